"""Command line front end.

Reports are deterministic: identical scenario bytes, seed, and cap produce
byte-identical machine output (timings are opt-in for that reason).  Exit
codes: 0 all verdicts pass, 1 at least one proven failure or task error,
2 usage or parse error.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import random
import sys
import time
from typing import Any, Dict, List, Optional

import click

from .. import __version__
from ..setalg import ENUM_CAP
from . import ops as ops_mod
from .scenario import Scenario, ScenarioError, Task, parse_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _task_rng(seed: int, index: int) -> random.Random:
    # decouple tasks so sequential and parallel runs see the same streams
    return random.Random(seed * 1000003 + index)


class TaskOutcome:
    __slots__ = ("id", "op", "verdict", "details", "witness", "mismatches", "elapsed_ms")

    def __init__(self, id, op, verdict, details, witness, mismatches, elapsed_ms):
        self.id = id
        self.op = op
        self.verdict = verdict
        self.details = details
        self.witness = witness
        self.mismatches = mismatches
        self.elapsed_ms = elapsed_ms


def _mismatches(expect: Dict[str, Any], details: Dict[str, Any], prefix="") -> List[str]:
    out: List[str] = []
    for key, want in expect.items():
        path = f"{prefix}{key}"
        if not isinstance(details, dict) or key not in details:
            out.append(f"{path}: expected {json.dumps(want)}, field missing")
            continue
        got = details[key]
        if isinstance(want, dict) and isinstance(got, dict):
            out.extend(_mismatches(want, got, path + "."))
        elif got != want:
            out.append(f"{path}: expected {json.dumps(want)}, got {json.dumps(got)}")
    return out


def _run_task(scn: Scenario, task: Task, index: int, seed: int, cap: int) -> TaskOutcome:
    rng = _task_rng(seed, index)
    t0 = time.perf_counter()
    witness = None
    try:
        result = ops_mod.OPS[task.op].run(scn, task.args, rng, cap)
        details = result.details
        witness = result.witness
    except ScenarioError as e:
        details = {"error": "ScenarioError", "message": str(e)}
    except Exception as e:
        details = {"error": type(e).__name__, "message": str(e)}
    elapsed = round((time.perf_counter() - t0) * 1000, 3)
    if task.expect is not None:
        mism = _mismatches(task.expect, details)
        verdict = "pass" if not mism else "fail"
    else:
        mism = []
        verdict = "error" if "error" in details else "pass"
    return TaskOutcome(task.id, task.op, verdict, details, witness, mism, elapsed)


def _run_all(scn: Scenario, seed: int, cap: int, parallel: bool) -> List[TaskOutcome]:
    if parallel and len(scn.tasks) > 1:
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=min(8, len(scn.tasks))
        ) as pool:
            futures = [
                pool.submit(_run_task, scn, t, i, seed, cap)
                for i, t in enumerate(scn.tasks)
            ]
            return [f.result() for f in futures]
    return [_run_task(scn, t, i, seed, cap) for i, t in enumerate(scn.tasks)]


def _summary(outcomes: List[TaskOutcome]) -> Dict[str, int]:
    return {
        "tasks": len(outcomes),
        "pass": sum(1 for o in outcomes if o.verdict == "pass"),
        "fail": sum(1 for o in outcomes if o.verdict == "fail"),
        "error": sum(1 for o in outcomes if o.verdict == "error"),
    }


def _emit(
    scn: Scenario,
    outcomes: List[TaskOutcome],
    as_json: bool,
    seed: int,
    cap: int,
    timings: bool,
) -> None:
    if as_json:
        try:
            with open(scn.source, "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()
        except OSError:
            digest = None
        header = {
            "kind": "header",
            "tool": "liftlab",
            "version": __version__,
            "scenario": scn.name,
            "source": scn.source,
            "sha256": digest,
            "seed": seed,
            "cap": cap,
        }
        click.echo(json.dumps(header, sort_keys=True))
        for o in outcomes:
            line = {
                "kind": "task",
                "task": o.id,
                "op": o.op,
                "verdict": o.verdict,
                "details": o.details,
                "witness": o.witness,
            }
            if o.mismatches:
                line["mismatches"] = o.mismatches
            if timings:
                line["elapsed_ms"] = o.elapsed_ms
            click.echo(json.dumps(line, sort_keys=True))
        click.echo(json.dumps({"kind": "summary", **_summary(outcomes)}, sort_keys=True))
        return
    width = max([len(o.id) for o in outcomes] + [4])
    for o in outcomes:
        mark = {"pass": "ok  ", "fail": "FAIL", "error": "ERR "}[o.verdict]
        brief = _brief(o.details)
        if o.mismatches:
            brief = "; ".join(o.mismatches)
        line = f"{mark} {o.id:<{width}} {o.op:<22} {brief}"
        if timings:
            line += f"  [{o.elapsed_ms} ms]"
        click.echo(line)
    s = _summary(outcomes)
    click.echo(
        f"{s['tasks']} task(s): {s['pass']} pass, {s['fail']} fail, {s['error']} error"
    )


def _brief(details: Dict[str, Any], limit: int = 100) -> str:
    if "error" in details:
        msg = details.get("message") or json.dumps(details.get("witness"))
        return f"{details['error']}: {msg}"
    parts = []
    for k, v in details.items():
        if isinstance(v, (bool, int, str)) or v is None:
            parts.append(f"{k}={v}")
    text = " ".join(parts)
    return text[: limit - 1] + "…" if len(text) > limit else text


def _exit(outcomes: List[TaskOutcome]) -> None:
    bad = any(o.verdict != "pass" for o in outcomes)
    sys.exit(EXIT_FAIL if bad else EXIT_OK)


def _load(path: str) -> Scenario:
    try:
        return parse_scenario(path)
    except ScenarioError as e:
        click.echo(f"scenario error: {e}", err=True)
        sys.exit(EXIT_USAGE)


def common_options(f):
    f = click.option("--seed", type=int, default=0, show_default=True, help="Seed for all sampled checks.")(f)
    f = click.option("--json", "as_json", is_flag=True, help="Line-delimited JSON report.")(f)
    f = click.option("--cap", type=int, default=ENUM_CAP, show_default=True, help="Enumeration cap.")(f)
    f = click.option("--timings", is_flag=True, help="Include per-task timings (breaks byte-stable output).")(f)
    return f


def _single(scenario: str, op: str, args: Dict[str, Any], seed, as_json, cap, timings) -> None:
    scn = _load(scenario)
    args = {k: v for k, v in args.items() if v is not None and v is not False}
    try:
        ops_mod.OPS[op].validate_refs(scn, args, "args")
    except ScenarioError as e:
        click.echo(f"scenario error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    outcome = _run_task(scn, Task(op, op, args, None), 0, seed, cap)
    _emit(scn, [outcome], as_json, seed, cap, timings)
    _exit([outcome])


@click.group()
@click.version_option(__version__, prog_name="liftlab")
def main() -> None:
    """Exact checks for measure extensions, liftings, product conditions,
    marginal operators, and measurable modifications on finite spaces."""


@main.command("check-triple")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--algebra", required=True, help="Algebra name from the scenario.")
@click.option("--ideal", required=True, help="Ideal name from the scenario.")
@common_options
def check_triple_cmd(scenario, algebra, ideal, seed, as_json, cap, timings):
    """Class membership of (algebra, ideal), with closure sizes."""
    _single(scenario, "check-triple", {"algebra": algebra, "ideal": ideal}, seed, as_json, cap, timings)


@main.command("gen-algebra")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--family", required=True, help="Generating family name.")
@common_options
def gen_algebra_cmd(scenario, family, seed, as_json, cap, timings):
    """Algebra generated by a family: atoms and size."""
    _single(scenario, "gen-algebra", {"family": family}, seed, as_json, cap, timings)


@main.command("extend")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--measure", required=True)
@click.option("--ideal", required=True)
@common_options
def extend_cmd(scenario, measure, ideal, seed, as_json, cap, timings):
    """Extend a measure by a null ideal; reports atoms, weights, null count."""
    _single(scenario, "extend", {"measure": measure, "ideal": ideal}, seed, as_json, cap, timings)


@main.command("join-ideals")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--left", required=True)
@click.option("--right", required=True)
@click.option("--algebra", default=None, help="Optional ambient algebra for inclusion checks.")
@common_options
def join_ideals_cmd(scenario, left, right, algebra, seed, as_json, cap, timings):
    """Join of two ideals with verified decompositions."""
    _single(
        scenario,
        "join-ideals",
        {"left": left, "right": right, "algebra": algebra},
        seed, as_json, cap, timings,
    )


@main.command("product-check")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--product", required=True)
@click.option("--which", default="all", show_default=True, help="Condition name, comma list, or 'all'.")
@click.option("--ideal", default=None, help="Ideal for the relative section condition.")
@common_options
def product_check_cmd(scenario, product, which, ideal, seed, as_json, cap, timings):
    """Fubini-type compatibility conditions on a product space."""
    w: Any = which if which == "all" else [s.strip() for s in which.split(",")]
    _single(
        scenario,
        "product-check",
        {"product": product, "which": w, "ideal": ideal},
        seed, as_json, cap, timings,
    )


@main.command("build-lifting")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--lifting", default=None, help="Existing lifting name to inspect.")
@click.option("--measure", default=None, help="Measure to build a lifting for.")
@click.option("--build", default="default", show_default=True, type=click.Choice(["default", "strong"]))
@click.option("--topology", default=None, help="Topology (required for --build strong).")
@common_options
def build_lifting_cmd(scenario, lifting, measure, build, topology, seed, as_json, cap, timings):
    """Build or inspect a vector lifting; classify and test strength."""
    if (lifting is None) == (measure is None):
        click.echo("exactly one of --lifting / --measure is required", err=True)
        sys.exit(EXIT_USAGE)
    args = {"lifting": lifting, "measure": measure, "topology": topology}
    if measure is not None:
        args["build"] = build
    _single(scenario, "build-lifting", args, seed, as_json, cap, timings)


@main.command("build-product-lifting")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--product", required=True)
@click.option("--gamma", required=True, help="Left factor lifting.")
@click.option("--eta", required=True, help="Right factor lifting.")
@click.option("--left-topology", default=None)
@click.option("--right-topology", default=None)
@common_options
def build_product_lifting_cmd(scenario, product, gamma, eta, left_topology, right_topology, seed, as_json, cap, timings):
    """Product lifting from factor liftings; verifies the tensor identity."""
    _single(
        scenario,
        "build-product-lifting",
        {
            "product": product,
            "gamma": gamma,
            "eta": eta,
            "left_topology": left_topology,
            "right_topology": right_topology,
        },
        seed, as_json, cap, timings,
    )


@main.command("marginal-check")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--product", required=True)
@click.option("--lifting", required=True)
@click.option("--direction", default="vertical", show_default=True, type=click.Choice(["vertical", "horizontal"]))
@click.option("--scope", default="measurable", show_default=True,
              type=click.Choice(["measurable", "measurable-sections", "measurable-sections-ae"]))
@click.option("--extend-by-nil", is_flag=True, help="Extend the top measure by the nil null ideal first.")
@common_options
def marginal_check_cmd(scenario, product, lifting, direction, scope, extend_by_nil, seed, as_json, cap, timings):
    """Whether sectionwise application preserves top measurability."""
    _single(
        scenario,
        "marginal-check",
        {
            "product": product,
            "lifting": lifting,
            "direction": direction,
            "scope": scope,
            "extend_by_nil": extend_by_nil,
        },
        seed, as_json, cap, timings,
    )


@main.command("odot")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--product", required=True)
@click.option("--delta", required=True, help="Left factor selector.")
@click.option("--eta", required=True, help="Right factor selector.")
@click.option("--samples", type=int, default=8, show_default=True)
@common_options
def odot_cmd(scenario, product, delta, eta, samples, seed, as_json, cap, timings):
    """Clause report for the column-then-row composite of two selectors."""
    _single(
        scenario,
        "odot",
        {"product": product, "delta": delta, "eta": eta, "samples": samples},
        seed, as_json, cap, timings,
    )


@main.command("modify-process")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--process", required=True)
@common_options
def modify_process_cmd(scenario, process, seed, as_json, cap, timings):
    """Modification statement circle for a process, with the constructed
    modification when one exists."""
    _single(scenario, "modify-process", {"process": process}, seed, as_json, cap, timings)


@main.command("run")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--parallel", is_flag=True, help="Run independent tasks concurrently.")
@click.option("--list-tasks", is_flag=True, help="List available operations and exit.")
@click.option("--verify-witness", "verify_witness", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Re-verify witnesses from a saved JSON report.")
@common_options
def run_cmd(scenario, parallel, list_tasks, verify_witness, seed, as_json, cap, timings):
    """Run every task in a scenario file."""
    if list_tasks:
        for name, op in sorted(ops_mod.OPS.items()):
            refs = ", ".join(f"{a}→{s}" for a, s in op.refs.items())
            click.echo(f"{name:22} args: {refs or '(none)'}")
        sys.exit(EXIT_OK)
    scn = _load(scenario)
    if verify_witness is not None:
        sys.exit(_verify_report(scn, verify_witness, cap, as_json))
    outcomes = _run_all(scn, seed, cap, parallel)
    _emit(scn, outcomes, as_json, seed, cap, timings)
    _exit(outcomes)


def _verify_report(scn: Scenario, report_path: str, cap: int, as_json: bool) -> int:
    stored: Dict[str, Dict[str, Any]] = {}
    with open(report_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("kind") == "task" and rec.get("witness"):
                stored[rec["task"]] = rec
    checked = failed = skipped = 0
    for task in scn.tasks:
        rec = stored.get(task.id)
        if rec is None:
            continue
        op = ops_mod.OPS[task.op]
        if op.verify is None:
            skipped += 1
            status = "skip"
        else:
            checked += 1
            ok = op.verify(scn, task.args, rec["witness"], cap)
            status = "ok" if ok else "FAIL"
            if not ok:
                failed += 1
        if as_json:
            click.echo(json.dumps(
                {"kind": "witness", "task": task.id, "op": task.op, "status": status},
                sort_keys=True,
            ))
        else:
            click.echo(f"witness {status:4} {task.id} ({task.op})")
    tail = {"kind": "witness-summary", "checked": checked, "failed": failed, "skipped": skipped}
    click.echo(json.dumps(tail, sort_keys=True) if as_json else
               f"{checked} witness(es) checked, {failed} failed, {skipped} skipped")
    return EXIT_FAIL if failed else EXIT_OK


@main.command("fixtures")
@click.option("--list", "do_list", is_flag=True, help="List bundled fixtures (default action).")
@click.option("--emit", "emit_name", default=None, help="Print one fixture to stdout.")
@click.option("--dest", type=click.Path(file_okay=False), default=None,
              help="With --emit (or alone for all), write files here instead.")
def fixtures_cmd(do_list, emit_name, dest):
    """List or emit the bundled fixture corpus."""
    import importlib.resources as resources

    root = resources.files("liftlab.cli") / "fixtures"
    names = sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
    if emit_name is not None:
        if emit_name not in names:
            click.echo(f"unknown fixture {emit_name!r}; have: {', '.join(names)}", err=True)
            sys.exit(EXIT_USAGE)
        text = (root / f"{emit_name}.json").read_text(encoding="utf-8")
        if dest is not None:
            import os

            os.makedirs(dest, exist_ok=True)
            path = os.path.join(dest, f"{emit_name}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            click.echo(path)
        else:
            click.echo(text, nl=False)
        return
    if dest is not None:
        import os

        os.makedirs(dest, exist_ok=True)
        for n in names:
            path = os.path.join(dest, f"{n}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write((root / f"{n}.json").read_text(encoding="utf-8"))
            click.echo(path)
        return
    for n in names:
        raw = json.loads((root / f"{n}.json").read_text(encoding="utf-8"))
        click.echo(f"{n:24} {raw.get('description', '')}")


if __name__ == "__main__":
    main()
