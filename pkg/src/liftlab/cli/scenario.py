"""Scenario files: a versioned JSON description of spaces, liftings, and the
tasks to run on them.

Schema (version 1).  All rationals are "p/q" strings (integer numerators are
accepted without the slash on input, never emitted that way).  Sets are
lists of point names; on product universes a point name is "x,y".

    {
      "schema": 1,
      "name": "...",                       # used in report provenance
      "description": "...",
      "universes":  {"X": ["1", "2"]},
      "families":   {"F": {"universe": "X", "sets": [[], ["1"]]}},
      "ideals":     {"I": {"universe": "X", "sets": [[], ["1"]]}},
      "algebras":   {"S": {"universe": "X", "atoms": [["1"], ["2"]]}},
      "measures":   {"mu": {"algebra": "S", "weights": ["1/2", "1/2"]}},
      "topologies": {"t": {"universe": "X", "opens": [[], ["1", "2"]]}},
      "liftings":   {"eta": {"measure": "mu", "rows": [["1/1", "0/1"]]}
                     | {"measure": "mu", "build": "default",
                        "fix": [["1"], ...]}          # optional fixed sets
                     | {"measure": "mu", "build": "strong", "topology": "t"}},
      "products":   {"ps": {"left": "mu",
                            "right": "nu" | ["nu_row0", "nu_row1", ...],
                            "top": "product"
                             | {"atoms": [[["x","y"], ...], ...],
                                "weights": ["p/q", ...]}}},
      "processes":  {"Q": {"product": "ps", "values": [["0/1", ...], ...]}},
      "tasks":      [{"id": "t1", "op": "check-triple",
                      "args": {...}, "expect": {...}}]
    }

Measure weights are written in the order the atoms are declared; the parser
realigns them to the canonical atom order of the constructed algebra, so a
fixture never depends on the internal sort.  `expect` entries are compared
against the task's detail fields; a mismatch is a proven failure.  An
expected domain error is written as {"error": "NotInT", ...}.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..lifting import FiniteTopology, VectorLifting, build_strong_vector_lifting, build_vector_lifting
from ..measure import RationalMeasure
from ..product import ProductSpace, product_algebra, product_measure, product_universe
from ..processes import Process
from ..setalg import FiniteAlgebra, Ideal, SetFamily, Universe

SCHEMA_VERSION = 1


class ScenarioError(Exception):
    """Parse or validation failure, pointing at the first offending element."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def parse_rational(s: Any, where: str) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ScenarioError(f"rational must be a string, got {type(s).__name__}", where)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as e:
        raise ScenarioError(f"bad rational {s!r} ({e})", where) from None


def rational_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _expect(d: Any, key: str, kind, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"missing required key {key!r}", where)
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ScenarioError(
            f"{key!r} must be {getattr(kind, '__name__', kind)}, got {type(v).__name__}",
            where,
        )
    return v


class Task:
    __slots__ = ("id", "op", "args", "expect")

    def __init__(self, id: str, op: str, args: Dict[str, Any], expect: Optional[Dict[str, Any]]):
        self.id = id
        self.op = op
        self.args = args
        self.expect = expect


class Scenario:
    """Resolved scenario: named objects plus the task list and the raw text
    for provenance echo."""

    def __init__(self, raw: Dict[str, Any], source: str = "<memory>"):
        self.raw = raw
        self.source = source
        self.name: str = raw.get("name", "unnamed")
        self.universes: Dict[str, Universe] = {}
        self.families: Dict[str, SetFamily] = {}
        self.ideals: Dict[str, Ideal] = {}
        self.algebras: Dict[str, FiniteAlgebra] = {}
        self.measures: Dict[str, RationalMeasure] = {}
        self.topologies: Dict[str, FiniteTopology] = {}
        self.liftings: Dict[str, VectorLifting] = {}
        self.products: Dict[str, ProductSpace] = {}
        self.processes: Dict[str, Process] = {}
        self.tasks: List[Task] = []
        self._build()

    # -- lookups ------------------------------------------------------------

    def _get(self, section: str, name: Any, where: str):
        table = getattr(self, section)
        if not isinstance(name, str) or name not in table:
            raise ScenarioError(f"unknown {section[:-1]} {name!r}", where)
        return table[name]

    def universe(self, name, where="") -> Universe:
        return self._get("universes", name, where)

    def family(self, name, where="") -> SetFamily:
        return self._get("families", name, where)

    def ideal(self, name, where="") -> Ideal:
        return self._get("ideals", name, where)

    def algebra(self, name, where="") -> FiniteAlgebra:
        return self._get("algebras", name, where)

    def measure(self, name, where="") -> RationalMeasure:
        return self._get("measures", name, where)

    def topology(self, name, where="") -> FiniteTopology:
        return self._get("topologies", name, where)

    def lifting(self, name, where="") -> VectorLifting:
        return self._get("liftings", name, where)

    def product(self, name, where="") -> ProductSpace:
        return self._get("products", name, where)

    def process(self, name, where="") -> Process:
        return self._get("processes", name, where)

    # -- construction ---------------------------------------------------------

    def _mask(self, u: Universe, points: Any, where: str) -> int:
        if not isinstance(points, list):
            raise ScenarioError("set must be a list of point names", where)
        try:
            names = [p if isinstance(p, str) else ",".join(p) for p in points]
            return u.subset(names)
        except (KeyError, TypeError) as e:
            raise ScenarioError(str(e), where) from None

    def _measure_from(self, spec: Dict[str, Any], where: str) -> RationalMeasure:
        if "algebra" in spec:
            alg = self.algebra(spec["algebra"], where + ".algebra")
            declared = list(alg.atoms)
        else:
            u = self.universe(_expect(spec, "universe", str, where), where + ".universe")
            atoms_spec = _expect(spec, "atoms", list, where)
            declared = [
                self._mask(u, a, f"{where}.atoms[{i}]") for i, a in enumerate(atoms_spec)
            ]
            alg = FiniteAlgebra(u, declared)
        weights = _expect(spec, "weights", list, where)
        if len(weights) != len(declared):
            raise ScenarioError(
                f"{len(weights)} weights for {len(declared)} atoms", where + ".weights"
            )
        by_atom = {
            a: parse_rational(w, f"{where}.weights[{i}]")
            for i, (a, w) in enumerate(zip(declared, weights))
        }
        try:
            return RationalMeasure(alg, [by_atom[a] for a in alg.atoms])
        except ValueError as e:
            raise ScenarioError(str(e), where) from None

    def _build(self) -> None:
        raw = self.raw
        if _expect(raw, "schema", int, "scenario") != SCHEMA_VERSION:
            raise ScenarioError(f"unsupported schema version {raw['schema']}", "schema")

        for name, pts in raw.get("universes", {}).items():
            where = f"universes.{name}"
            if not isinstance(pts, list) or not all(isinstance(p, str) for p in pts):
                raise ScenarioError("universe must be a list of point names", where)
            try:
                self.universes[name] = Universe(pts)
            except ValueError as e:
                raise ScenarioError(str(e), where) from None

        for section, ctor in (("families", SetFamily), ("ideals", Ideal)):
            for name, spec in raw.get(section, {}).items():
                where = f"{section}.{name}"
                u = self.universe(_expect(spec, "universe", str, where), where + ".universe")
                sets = _expect(spec, "sets", list, where)
                masks = [self._mask(u, s, f"{where}.sets[{i}]") for i, s in enumerate(sets)]
                try:
                    getattr(self, section)[name] = ctor(u, masks)
                except ValueError as e:
                    raise ScenarioError(str(e), where) from None

        for name, spec in raw.get("algebras", {}).items():
            where = f"algebras.{name}"
            u = self.universe(_expect(spec, "universe", str, where), where + ".universe")
            atoms = _expect(spec, "atoms", list, where)
            masks = [self._mask(u, a, f"{where}.atoms[{i}]") for i, a in enumerate(atoms)]
            try:
                self.algebras[name] = FiniteAlgebra(u, masks)
            except ValueError as e:
                raise ScenarioError(str(e), where) from None

        for name, spec in raw.get("measures", {}).items():
            self.measures[name] = self._measure_from(spec, f"measures.{name}")

        for name, spec in raw.get("topologies", {}).items():
            where = f"topologies.{name}"
            u = self.universe(_expect(spec, "universe", str, where), where + ".universe")
            opens = _expect(spec, "opens", list, where)
            masks = [self._mask(u, o, f"{where}.opens[{i}]") for i, o in enumerate(opens)]
            try:
                self.topologies[name] = FiniteTopology(u, masks)
            except ValueError as e:
                raise ScenarioError(str(e), where) from None

        for name, spec in raw.get("liftings", {}).items():
            self.liftings[name] = self._lifting_from(spec, f"liftings.{name}")

        for name, spec in raw.get("products", {}).items():
            self.products[name] = self._product_from(spec, f"products.{name}")

        for name, spec in raw.get("processes", {}).items():
            where = f"processes.{name}"
            ps = self.product(_expect(spec, "product", str, where), where + ".product")
            values = self._grid(ps, _expect(spec, "values", list, where), where + ".values")
            try:
                self.processes[name] = Process(ps, values)
            except ValueError as e:
                raise ScenarioError(str(e), where) from None

        tasks = raw.get("tasks", [])
        if not isinstance(tasks, list):
            raise ScenarioError("tasks must be a list", "tasks")
        from . import ops  # deferred: ops imports nothing from here at import time

        seen: set = set()
        for i, spec in enumerate(tasks):
            where = f"tasks[{i}]"
            op = _expect(spec, "op", str, where)
            if op not in ops.OPS:
                raise ScenarioError(f"unknown op {op!r}", where + ".op")
            args = spec.get("args", {})
            if not isinstance(args, dict):
                raise ScenarioError("args must be an object", where + ".args")
            expect = spec.get("expect")
            if expect is not None and not isinstance(expect, dict):
                raise ScenarioError("expect must be an object", where + ".expect")
            tid = spec.get("id", f"task{i + 1}")
            if tid in seen:
                raise ScenarioError(f"duplicate task id {tid!r}", where + ".id")
            seen.add(tid)
            ops.OPS[op].validate_refs(self, args, where + ".args")
            self.tasks.append(Task(tid, op, args, expect))

    def _lifting_from(self, spec: Dict[str, Any], where: str) -> VectorLifting:
        m = self.measure(_expect(spec, "measure", str, where), where + ".measure")
        if "rows" in spec:
            rows_spec = _expect(spec, "rows", list, where)
            rows = []
            for i, row in enumerate(rows_spec):
                if not isinstance(row, list):
                    raise ScenarioError("row must be a list", f"{where}.rows[{i}]")
                rows.append(
                    tuple(
                        parse_rational(v, f"{where}.rows[{i}][{j}]") for j, v in enumerate(row)
                    )
                )
            try:
                return VectorLifting(m, rows)
            except ValueError as e:
                raise ScenarioError(str(e), where) from None
        build = spec.get("build", "default")
        # domain failures (infeasible fixes, missing strong condition) are
        # left to propagate so callers can expect them by type
        if build == "default":
            fix = None
            if "fix" in spec:
                u = m.universe
                fix = [
                    [
                        Fraction(1) if self._mask(u, s, f"{where}.fix[{i}]") >> p & 1 else Fraction(0)
                        for p in range(u.size)
                    ]
                    for i, s in enumerate(spec["fix"])
                ]
            return build_vector_lifting(m, fix=fix)
        if build == "strong":
            top = self.topology(_expect(spec, "topology", str, where), where + ".topology")
            return build_strong_vector_lifting(m, top)
        raise ScenarioError(f"unknown build mode {build!r}", where + ".build")

    def _product_from(self, spec: Dict[str, Any], where: str) -> ProductSpace:
        mu = self.measure(_expect(spec, "left", str, where), where + ".left")
        right_spec = _expect(spec, "right", None, where)
        if isinstance(right_spec, str):
            nu = self.measure(right_spec, where + ".right")
            right = [(nu.algebra, nu)] * mu.universe.size
        elif isinstance(right_spec, list):
            if len(right_spec) != mu.universe.size:
                raise ScenarioError(
                    f"{len(right_spec)} row measures for {mu.universe.size} rows",
                    where + ".right",
                )
            measures = [self.measure(r, f"{where}.right[{i}]") for i, r in enumerate(right_spec)]
            right = [(n.algebra, n) for n in measures]
        else:
            raise ScenarioError("right must be a measure name or a list of them", where + ".right")
        pu = product_universe(mu.universe, right[0][0].universe)
        top_spec = _expect(spec, "top", None, where)
        if top_spec == "product":
            if isinstance(right_spec, list):
                raise ScenarioError(
                    'top "product" needs a single right measure', where + ".top"
                )
            top = product_measure(mu, right[0][1])
        elif isinstance(top_spec, dict):
            atoms_spec = _expect(top_spec, "atoms", list, where + ".top")
            declared = [
                self._mask(pu, a, f"{where}.top.atoms[{i}]") for i, a in enumerate(atoms_spec)
            ]
            weights = _expect(top_spec, "weights", list, where + ".top")
            if len(weights) != len(declared):
                raise ScenarioError(
                    f"{len(weights)} weights for {len(declared)} atoms", where + ".top.weights"
                )
            try:
                alg = FiniteAlgebra(pu, declared)
                by_atom = {
                    a: parse_rational(w, f"{where}.top.weights[{i}]")
                    for i, (a, w) in enumerate(zip(declared, weights))
                }
                top = RationalMeasure(alg, [by_atom[a] for a in alg.atoms])
            except ValueError as e:
                raise ScenarioError(str(e), where + ".top") from None
        else:
            raise ScenarioError('top must be "product" or an atoms/weights object', where + ".top")
        try:
            return ProductSpace(mu, right, top)
        except ValueError as e:
            raise ScenarioError(str(e), where) from None

    def _grid(self, ps: ProductSpace, rows: List[Any], where: str) -> List[Fraction]:
        if len(rows) != ps.x_size:
            raise ScenarioError(f"{len(rows)} value rows for {ps.x_size} left points", where)
        out: List[Fraction] = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != ps.y_size:
                raise ScenarioError(
                    f"row must be a list of {ps.y_size} values", f"{where}[{i}]"
                )
            out.extend(parse_rational(v, f"{where}[{i}][{j}]") for j, v in enumerate(row))
        return out


def parse_scenario(path: str) -> Scenario:
    """Load and fully validate; diagnostics name the first offending element
    (line/column for malformed JSON, dotted path for semantic errors)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ScenarioError(str(e), path) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", path) from None
    if not isinstance(raw, dict):
        raise ScenarioError("top level must be an object", path)
    return Scenario(raw, source=path)


# -- report-side serialization helpers ---------------------------------------


def points_of(u: Universe, mask: int) -> List[str]:
    return list(u.points(mask))


def grid_str(values: Sequence[Fraction], x_size: int, y_size: int) -> List[List[str]]:
    return [
        [rational_str(values[x * y_size + y]) for y in range(y_size)] for x in range(x_size)
    ]
