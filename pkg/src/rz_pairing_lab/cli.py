"""Command-line front end: scenario ingestion, batch evaluation, golden table.

Scenario files are line-oriented: one record per non-comment line, a kind
followed by key=value tokens. Values are typed by shape: integers, rationals
``p/q`` (exact), floats, booleans, bare strings. Keys starting with
``expect_`` declare expectations checked against the stated tolerance
(``tol=`` per scenario, ``--tol`` globally, exact when 0). The bundled golden
file reproduces every closed-form number the engine is built around and
doubles as a regression fixture.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional, Tuple, Union

from .circlevals import CircleValue, circle_add, circle_dist, circle_eq, reduce_mod_z
from .eta import dai_zhang_reduced, eta_circle_flat, hurwitz_eta_zero
from .forms import (
    BottBundle,
    BundleData,
    Circle,
    K1Identity,
    K1Winding,
    LineBundle,
    ModelManifold,
    Point,
    Sphere,
    Torus2,
    TrivialBundle,
    ch_bundle,
    circle_grid_form,
    circle_theta,
    constant_form,
    exactness_residual,
    exp_form,
    integrate,
    todd_form,
    top_form,
    wedge,
)
from .pairing import (
    ConstantMap,
    GeometricKCycle,
    IdentityMap,
    RZK0Cocycle,
    pair_h1,
    pair_h2,
    pair_k0,
)
from .spectra import circle_twisted_spectrum, eta_partial_sum
from .spectral_flow import affine_twist, spectral_flow

KINDS = ("eta", "spectrum", "pair_h1", "pair_h2", "pair_k0", "verify", "sweep")

ENV_TOL = "RZ_PAIRING_TOL"

ParamValue = Union[int, float, Fraction, bool, str]


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioValidationError(ValueError):
    def __init__(self, scenario_id: str, message: str):
        super().__init__(f"scenario {scenario_id!r}: {message}")
        self.scenario_id = scenario_id


@dataclass(frozen=True)
class Scenario:
    kind: str
    id: str
    params: Dict[str, ParamValue]
    expects: Dict[str, ParamValue]
    tol: Optional[float]
    tag: str
    line: int


@dataclass
class Options:
    tolerance: float = 1e-9
    grid: int = 1024
    cutoff: int = 1000
    fmt: str = "table"
    jobs: int = 1


@dataclass
class Check:
    name: str
    expected: str
    actual: str
    tol: float
    passed: bool


@dataclass
class ScenarioRecord:
    id: str
    kind: str
    tag: str
    inputs: str
    results: Dict[str, str]
    checks: List[Check]
    provenance: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class Report:
    records: List[ScenarioRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")
_FRAC_RE = re.compile(r"^[+-]?\d+/\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


def parse_value(token: str) -> ParamValue:
    if token in ("true", "false"):
        return token == "true"
    if _INT_RE.match(token):
        return int(token)
    if _FRAC_RE.match(token):
        num, den = token.split("/")
        return Fraction(int(num), int(den))
    if _FLOAT_RE.match(token) and ("." in token or "e" in token or "E" in token):
        return float(token)
    return token


def parse_scenarios(text: str) -> List[Scenario]:
    scenarios: List[Scenario] = []
    seen_ids: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        tokens = stripped.split()
        kind = tokens[0]
        col = raw.index(kind) + 1
        if kind not in KINDS:
            raise ScenarioParseError(f"unknown scenario kind {kind!r}", lineno, col)
        params: Dict[str, ParamValue] = {}
        expects: Dict[str, ParamValue] = {}
        tol: Optional[float] = None
        tag = "derived"
        sid = None
        for tok in tokens[1:]:
            col = raw.index(tok) + 1
            if "=" not in tok:
                raise ScenarioParseError(f"expected key=value, got {tok!r}", lineno, col)
            key, _, rawval = tok.partition("=")
            if not key or not rawval:
                raise ScenarioParseError(f"malformed key=value token {tok!r}", lineno, col)
            value = parse_value(rawval)
            if key == "id":
                sid = str(value)
            elif key == "tol":
                tol = float(value)
            elif key == "tag":
                tag = str(value)
            elif key.startswith("expect_"):
                expects[key[len("expect_"):]] = value
            else:
                params[key] = value
        if sid is None:
            raise ScenarioParseError("scenario is missing an id", lineno, 1)
        if sid in seen_ids:
            raise ScenarioParseError(
                f"duplicate scenario id {sid!r} (first used on line {seen_ids[sid]})",
                lineno,
                1,
            )
        seen_ids[sid] = lineno
        scenarios.append(Scenario(kind, sid, params, expects, tol, tag, lineno))
    return scenarios


# ---------------------------------------------------------------------------
# Catalog name resolution
# ---------------------------------------------------------------------------

_SPHERE_RE = re.compile(r"^sphere(\d+)$")


def _manifold(name: str) -> ModelManifold:
    if name == "point":
        return Point()
    if name == "circle":
        return Circle()
    if name == "torus2":
        return Torus2()
    m = _SPHERE_RE.match(name)
    if m:
        return Sphere(int(m.group(1)))
    raise ValueError(f"unknown manifold {name!r}")


def _bundle(spec: str) -> BundleData:
    name, _, arg = spec.partition(":")
    if name == "trivial":
        return TrivialBundle(int(arg or 1))
    if name == "line":
        return LineBundle(int(arg or 0))
    if name == "bott":
        return BottBundle(int(arg or 1))
    raise ValueError(f"unknown bundle {spec!r}")


def _unitary(spec: str, base: ModelManifold):
    name, _, arg = spec.partition(":")
    if name == "identity":
        return K1Identity(int(arg or 1), base)
    if name == "winding":
        if not isinstance(base, Circle):
            raise ValueError("winding elements live on the circle")
        return K1Winding(int(arg or 0))
    raise ValueError(f"unknown unitary {spec!r}")


def _as_real(value: ParamValue, name: str):
    if isinstance(value, bool) or isinstance(value, str):
        raise ValueError(f"parameter {name!r} must be a number, got {value!r}")
    return value


def _require(sc: Scenario, key: str) -> ParamValue:
    if key not in sc.params:
        raise ScenarioValidationError(sc.id, f"missing required parameter {key!r}")
    return sc.params[key]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _render(value) -> str:
    if isinstance(value, CircleValue):
        return value.render()
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _check_value(name: str, expected: ParamValue, actual, tol: float) -> Check:
    if isinstance(actual, CircleValue):
        if isinstance(expected, (int, Fraction)) and not isinstance(expected, bool):
            want = reduce_mod_z(Fraction(expected))
        else:
            want = reduce_mod_z(float(expected))
        ok = circle_eq(actual, want, tol)
        return Check(name, want.render(), actual.render(), tol, ok)
    if isinstance(actual, bool):
        ok = bool(expected) == actual
        return Check(name, str(expected), str(actual), tol, ok)
    if isinstance(actual, int) and isinstance(expected, int):
        return Check(name, str(expected), str(actual), tol, expected == actual)
    exact_pair = (
        isinstance(expected, (int, Fraction))
        and isinstance(actual, (int, Fraction))
        and not isinstance(expected, bool)
    )
    if exact_pair and tol == 0:
        ok = Fraction(expected) == Fraction(actual)
    else:
        ok = abs(float(expected) - float(actual)) <= tol
    return Check(name, _render(expected), _render(actual), tol, ok)


def _eval_eta(sc: Scenario, opts: Options):
    a = _as_real(_require(sc, "a"), "a")
    result = eta_circle_flat(a)
    out = {
        "eta": result.eta,
        "hat_eta": result.hat_eta,
        "reduced": result.reduced,
    }
    if sc.params.get("check_numeric"):
        out["numeric_eta"] = hurwitz_eta_zero(float(a))
    return out, "closed-form:twisted-circle"


def _eval_spectrum(sc: Scenario, opts: Options):
    a = _as_real(_require(sc, "a"), "a")
    cutoff = int(sc.params.get("cutoff", opts.cutoff))
    s = float(sc.params.get("s", 0.0))
    spec = circle_twisted_spectrum(float(a), cutoff)
    return (
        {
            "modes": spec.mode_count,
            "kernel": spec.kernel_dim,
            "eta_s": eta_partial_sum(spec, s),
        },
        f"truncated-spectrum:cutoff={cutoff}",
    )


def _eval_pair_h1(sc: Scenario, opts: Options):
    a = _as_real(_require(sc, "a"), "a")
    w = int(_require(sc, "w"))
    report = pair_h1(a, w)
    return (
        {
            "value": report.value,
            "analytic": report.analytic_term,
            "topological": report.topological_term,
        },
        str(report.diagnostics.get("analytic_provenance", "")),
    )


def _eval_pair_h2(sc: Scenario, opts: Options):
    b = _as_real(_require(sc, "b"), "b")
    deg = int(sc.params.get("deg", 1))
    report = pair_h2(b, deg)
    return (
        {
            "value": report.value,
            "analytic": report.analytic_term,
            "topological": report.topological_term,
        },
        str(report.diagnostics.get("analytic_provenance", "")),
    )


def _build_k0(sc: Scenario) -> Tuple[RZK0Cocycle, GeometricKCycle]:
    base = _manifold(str(sc.params.get("base", "sphere2")))
    mu = constant_form(base, _as_real(sc.params.get("mu0", Fraction(0)), "mu0"))
    if "mu_top" in sc.params:
        mu = mu + top_form(base, _as_real(sc.params["mu_top"], "mu_top"))
    g = _unitary(str(sc.params.get("g", "identity")), base)
    cocycle = RZK0Cocycle(g, mu, base)
    cycle_m = _manifold(str(sc.params.get("cycle", "sphere2")))
    bundle = _bundle(str(_require(sc, "bundle")))
    map_name = str(sc.params.get("map", "identity"))
    if map_name == "identity":
        if cycle_m != base:
            raise ValueError("map=identity needs the cycle manifold to equal the base")
        fmap = IdentityMap(cycle_m)
    elif map_name == "constant":
        fmap = ConstantMap(cycle_m, base)
    else:
        raise ValueError(f"unknown catalog map {map_name!r}")
    return cocycle, GeometricKCycle(cycle_m, bundle, fmap)


def _eval_pair_k0(sc: Scenario, opts: Options):
    cocycle, cycle = _build_k0(sc)
    report = pair_k0(cocycle, cycle)
    return (
        {
            "value": report.value,
            "analytic": report.analytic_term,
            "topological": report.topological_term,
        },
        str(report.diagnostics.get("analytic_provenance", "")),
    )


def _eval_verify(sc: Scenario, opts: Options):
    check = str(_require(sc, "check"))
    if check == "ch_bott":
        p = int(sc.params.get("p", 1))
        sphere = Sphere(2 * p)
        value = integrate(wedge(ch_bundle(BottBundle(p), sphere), todd_form(sphere)), sphere)
        return {"value": value}, "index-integral:bott"
    if check == "ch_line":
        k = int(sc.params.get("k", 0))
        sphere = Sphere(2)
        value = integrate(ch_bundle(LineBundle(k), sphere), sphere)
        return {"value": value}, "index-integral:line"
    if check == "ch_exp":
        # exponential of the normalized curvature, the other route to ch(line)
        k = int(sc.params.get("k", 0))
        sphere = Sphere(2)
        value = integrate(exp_form(top_form(sphere, Fraction(k))), sphere)
        return {"value": value}, "index-integral:exp-curvature"
    if check == "sflow":
        w = int(sc.params.get("w", 0))
        a0 = _as_real(sc.params.get("a0", Fraction(1, 4)), "a0")
        grid = int(sc.params.get("grid", max(256, 4 * abs(w) + 4)))
        value = spectral_flow(affine_twist(float(a0), w, grid))
        return {"value": value}, "crossing-count"
    if check == "exactness":
        base = _manifold(str(sc.params.get("base", "circle")))
        g = _unitary(str(sc.params.get("g", "identity")), base)
        mu = constant_form(base, _as_real(sc.params.get("mu0", Fraction(0)), "mu0"))
        if sc.params.get("corrupt"):
            if not isinstance(base, Circle):
                raise ValueError("corrupt=true needs a circle base")
            import numpy as np

            mu = mu + circle_grid_form(0, np.sin(circle_theta(opts.grid)))
        return {"value": exactness_residual(mu, g)}, "exactness-residual"
    raise ValueError(f"unknown verify check {check!r}")


def _eval_sweep(sc: Scenario, opts: Options, tol: float):
    check = str(_require(sc, "check"))
    n = int(sc.params.get("n", 100))
    if check == "h1_reflection":
        worst = 0.0
        zero = reduce_mod_z(0)
        for i in range(1, n + 1):
            a = Fraction(i, n + 1)
            total = circle_add(pair_h1(a, 1).value, pair_h1(1 - a, 1).value)
            worst = max(worst, circle_dist(total, zero))
        return {"value": worst, "ok": worst <= tol}, "sweep:h1-reflection"
    if check == "dai_zhang_sf":
        worst = 0.0
        for i in range(1, n + 1):
            result = eta_circle_flat(Fraction(i, n + 1))
            for sf in range(-5, 6):
                worst = max(worst, circle_dist(dai_zhang_reduced(result, sf), result.reduced))
        return {"value": worst, "ok": worst <= tol}, "sweep:spectral-flow-invariance"
    if check == "mu0_injectivity":
        sphere = Sphere(2)
        cycle = GeometricKCycle(sphere, BottBundle(1), IdentityMap(sphere))
        values = []
        for i in range(n):
            x = RZK0Cocycle(K1Identity(1, sphere), constant_form(sphere, Fraction(i, n)), sphere)
            values.append(pair_k0(x, cycle).value.representative)
        values.sort()
        gaps = [values[j + 1] - values[j] for j in range(len(values) - 1)]
        gaps.append(1.0 - values[-1] + values[0])
        min_gap = min(gaps)
        return {"value": min_gap, "ok": min_gap > tol}, "sweep:generator-injectivity"
    raise ValueError(f"unknown sweep check {check!r}")


_EVALUATORS = {
    "eta": _eval_eta,
    "spectrum": _eval_spectrum,
    "pair_h1": _eval_pair_h1,
    "pair_h2": _eval_pair_h2,
    "pair_k0": _eval_pair_k0,
    "verify": _eval_verify,
}


def validate_scenario(sc: Scenario, opts: Options) -> None:
    """Check parameters against the target operation before anything runs."""
    try:
        if sc.kind == "eta":
            a = _as_real(_require(sc, "a"), "a")
            if not 0 < a < 1:
                raise ValueError(f"a must lie in (0, 1), got {a}")
        elif sc.kind == "spectrum":
            a = _as_real(_require(sc, "a"), "a")
            if not 0 <= a < 1:
                raise ValueError(f"a must lie in [0, 1), got {a}")
            if int(sc.params.get("cutoff", opts.cutoff)) < 1:
                raise ValueError("cutoff must be >= 1")
        elif sc.kind == "pair_h1":
            _as_real(_require(sc, "a"), "a")
            int(_require(sc, "w"))
        elif sc.kind == "pair_h2":
            _as_real(_require(sc, "b"), "b")
        elif sc.kind == "pair_k0":
            _build_k0(sc)
        elif sc.kind == "verify":
            _eval_verify(sc, opts)
        elif sc.kind == "sweep":
            check = str(_require(sc, "check"))
            if check not in ("h1_reflection", "dai_zhang_sf", "mu0_injectivity"):
                raise ValueError(f"unknown sweep check {check!r}")
    except ScenarioValidationError:
        raise
    except Exception as exc:
        raise ScenarioValidationError(sc.id, str(exc)) from exc


def evaluate_scenario(sc: Scenario, opts: Options) -> ScenarioRecord:
    tol = sc.tol if sc.tol is not None else opts.tolerance
    if sc.kind == "sweep":
        results, provenance = _eval_sweep(sc, opts, tol)
        checks = [
            Check("sweep", "within tolerance", _render(results["value"]), tol, bool(results["ok"]))
        ]
        rendered = {k: _render(v) for k, v in results.items()}
    else:
        results, provenance = _EVALUATORS[sc.kind](sc, opts)
        checks = []
        for name, expected in sorted(sc.expects.items()):
            if name not in results:
                checks.append(Check(name, _render(expected), "<missing>", tol, False))
            else:
                checks.append(_check_value(name, expected, results[name], tol))
        rendered = {k: _render(v) for k, v in results.items()}
    inputs = " ".join(f"{k}={_render(v)}" for k, v in sorted(sc.params.items()))
    return ScenarioRecord(sc.id, sc.kind, sc.tag, inputs, rendered, checks, provenance)


def run_scenarios(text: str, options: Options) -> Report:
    """Parse, validate, then evaluate a scenario document (fail closed)."""
    scenarios = parse_scenarios(text)
    for sc in scenarios:
        validate_scenario(sc, options)
    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            records = list(pool.map(lambda sc: evaluate_scenario(sc, options), scenarios))
    else:
        records = [evaluate_scenario(sc, options) for sc in scenarios]
    return Report(records)


def golden_text() -> str:
    return resources.files("rz_pairing_lab").joinpath("data/golden.scn").read_text()


def reproduce_paper_table(options: Optional[Options] = None) -> Report:
    """Run the bundled golden scenario file of closed-form values."""
    return run_scenarios(golden_text(), options or Options())


# ---------------------------------------------------------------------------
# Report formatting
# ---------------------------------------------------------------------------


def _record_summary(r: ScenarioRecord) -> Tuple[str, str, str]:
    if r.checks:
        shown = r.checks[0]
        result = "; ".join(f"{c.name}={c.actual}" for c in r.checks)
        expected = "; ".join(f"{c.name}={c.expected}" for c in r.checks)
        status = "pass" if r.passed else "FAIL"
        del shown
    else:
        result = "; ".join(f"{k}={v}" for k, v in r.results.items())
        expected = ""
        status = "-"
    return result, expected, status


def format_report(report: Report, fmt: str = "table") -> str:
    if fmt == "json":
        payload = []
        for r in report.records:
            payload.append(
                {
                    "id": r.id,
                    "kind": r.kind,
                    "tag": r.tag,
                    "inputs": r.inputs,
                    "results": r.results,
                    "provenance": r.provenance,
                    "checks": [
                        {
                            "name": c.name,
                            "expected": c.expected,
                            "actual": c.actual,
                            "tol": c.tol,
                            "passed": c.passed,
                        }
                        for c in r.checks
                    ],
                    "passed": r.passed,
                }
            )
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        out.write("id,kind,tag,result,expected,status\n")
        for r in report.records:
            result, expected, status = _record_summary(r)
            row = [r.id, r.kind, r.tag, result, expected, status]
            out.write(",".join('"' + cell.replace('"', '""') + '"' for cell in row) + "\n")
        return out.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [("ID", "KIND", "TAG", "RESULT", "EXPECTED", "STATUS")]
    for r in report.records:
        result, expected, status = _record_summary(r)
        rows.append((r.id, r.kind, r.tag, result, expected, status))
    widths = [max(len(row[i]) for row in rows) for i in range(6)]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[i] for i in range(6)))
    n_checked = sum(1 for r in report.records if r.checks)
    n_passed = sum(1 for r in report.records if r.checks and r.passed)
    lines.append("")
    lines.append(f"{n_passed}/{n_checked} checked scenarios passed")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rz-pairing-lab",
        description="Evaluate R/Z-valued pairing scenarios on the manifold catalog.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--tol", type=float, default=None, help="comparison tolerance")
        p.add_argument("--grid", type=int, default=1024, help="angular grid resolution")
        p.add_argument("--cutoff", type=int, default=1000, help="spectrum truncation")
        p.add_argument(
            "--format", choices=("table", "json", "csv"), default="table", dest="fmt"
        )
        p.add_argument("--jobs", type=int, default=1, help="parallel scenario evaluation")

    run = sub.add_parser("run", help="evaluate a scenario file ('-' for stdin)")
    run.add_argument("file")
    add_common(run)
    rep = sub.add_parser("reproduce", help="run the bundled golden table")
    add_common(rep)
    return parser


def _options_from_args(args) -> Options:
    tol = args.tol
    if tol is None:
        tol = float(os.environ.get(ENV_TOL, 1e-9))
    return Options(tolerance=tol, grid=args.grid, cutoff=args.cutoff, fmt=args.fmt, jobs=args.jobs)


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    options = _options_from_args(args)
    try:
        if args.command == "run":
            if args.file == "-":
                text = sys.stdin.read()
            else:
                with open(args.file, "r", encoding="utf-8") as handle:
                    text = handle.read()
        else:
            text = golden_text()
        report = run_scenarios(text, options)
    except (ScenarioParseError, ScenarioValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(format_report(report, options.fmt))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
