"""liftlab: exact-arithmetic laboratory for measure extensions, liftings,
Fubini-type product conditions, and marginal operators on finite spaces.

Everything is computed over explicit finite universes with rational weights;
results are checked, not approximated.  See the README for the module map.
"""

__version__ = "0.1.0"

from .setalg import (  # noqa: F401
    CapExceeded,
    FiniteAlgebra,
    Ideal,
    SetFamily,
    Universe,
    generated_algebra,
    largest_algebra_member,
    symdiff_closure,
    triple_in_T,
)
from .measure import (  # noqa: F401
    MeasureExtension,
    NotInT,
    NullityViolation,
    RationalMeasure,
    complete,
    extend_by_ideal,
    null_ideal,
)
from .ideals import (  # noqa: F401
    JoinInclusionReport,
    JoinResult,
    join_ideals,
    join_inclusion_checks,
    smallest_ideal_closure,
)
from .product import (  # noqa: F401
    FubiniReport,
    ProductPreconditionError,
    ProductSpace,
    check_fubini,
    extend_product_by_skew_ideal,
    nil_null_ideals,
    product_algebra,
    product_measure,
    product_universe,
    rectangle,
    section_repair,
    trivial_product_space,
)
from .lifting import (  # noqa: F401
    FiniteTopology,
    MeasurableFunction,
    VectorLifting,
    build_strong_vector_lifting,
    build_vector_lifting,
    check_strong_condition,
    classify_lifting,
    discrete_topology,
    gamma_flat,
    indiscrete_topology,
    lift_through_extension,
)
from .marginal import (  # noqa: F401
    MarginalMap,
    OdotMap,
    build_product_lifting,
    build_section_invariant_lifting,
    eta_bullet,
    generates_sections,
    is_2marginal_exact,
    is_2marginal_randomized,
    odot,
    preserving_and_weak_marginal_equivalence,
    separable_rank,
    smoothness_check,
    tensor,
    tensor_basis_check,
)
from .processes import (  # noqa: F401
    Process,
    check_mm_statements,
    check_skew_modification_equivalence,
    construct_modification,
    hereditary_skew_algebra,
    marginal_modification_bridge,
)
