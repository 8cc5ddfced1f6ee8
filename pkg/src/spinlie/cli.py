"""Command-line front end: ``spinlie <command> <scenario.json>``.

Commands
--------
check    decide integrability, report gamma, D and the residuals
solve    closed-form propagation of ``initial_state``, written as CSV
oracle   numerical propagation (RK4 and exponential midpoint), written as CSV
compare  closed form against both numerical schemes
fsys     integrate the four-dimensional transformation system
selftest run the invariant suite

Exit status is 0 on success, 1 when the field is not integrable or a
comparison misses its tolerance, 2 on malformed input.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, su2
from .exceptions import DegenerateFieldError, PreconditionError, SpinLieError
from .fields import RotatingField, polar_functions, to_polar_track
from .integrability import (
    check_integrability,
    closed_form_D_rotating,
    compute_D,
    exact_propagator,
    solve_gamma,
)
from .liesys import AxisZ, FixedDirection, solve_fsys
from .oracle import PropagationResult, compare, rk4_propagate, unitary_midpoint_propagate
from .scenario import Scenario, field_from_dict, load_scenarios
from .selftest import format_checks, run_selftest
from .spinrep import unitarity_defect

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
COMMANDS = ("check", "solve", "oracle", "compare", "fsys")


class Outcome:
    """What one command produced for one scenario."""

    def __init__(self, name: str):
        self.name = name
        self.code = EXIT_OK
        self.lines: list[str] = []
        self.result: dict = {"scenario": name}
        self.tables: dict[str, tuple[list, np.ndarray]] = {}

    def say(self, text: str = ""):
        self.lines.append(text)


# --------------------------------------------------------------------------
# helpers


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to floats, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def write_csv(path: Path, header, data: np.ndarray):
    """Header row, commas, 17 significant digits, ``\\n`` line ends."""
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="", newline="\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _state_columns(dim: int) -> list:
    cols = []
    for k in range(dim):
        cols += [f"re_psi{k}", f"im_psi{k}"]
    return cols


def _interleave(states: np.ndarray) -> np.ndarray:
    out = np.empty(states.shape[:-1] + (2 * states.shape[-1],))
    out[..., 0::2] = states.real
    out[..., 1::2] = states.imag
    return out


def _spin_tag(sc: Scenario, spin) -> str:
    return "" if len(sc.spins) == 1 else f".j{spin.two_j}-2"


def _gamma_for(sc: Scenario, out: Outcome):
    """Resolve gamma and check the conditions; returns the report (or ``None``)."""
    grid = sc.grid
    if sc.gamma == "auto":
        try:
            track = to_polar_track(sc.field, grid)
            sol = solve_gamma(track)
        except DegenerateFieldError as exc:
            out.say(f"verdict: degenerate ({exc})")
            out.result.update(verdict="degenerate", gamma=None)
            out.code = EXIT_FAIL
            return None
        if sol is None:
            out.say("gamma: no constant solution along the field")
            out.say("verdict: not_integrable")
            out.result.update(verdict="not_integrable", gamma=None, gamma_source="auto")
            out.code = EXIT_FAIL
            return None
        gamma, source = sol, "auto"
    else:
        gamma, source = float(sc.gamma), "given"
    report = check_integrability(sc.field, gamma, grid, sc.residual_tol)
    out.result.update(report.to_dict(), gamma_source=source)
    g = report.gamma_value
    out.say(f"gamma: {g:.17g}  ({g / math.pi:.12g} pi, {source}, branch {report.gamma.branch})")
    out.say(f"residuals: algebraic {report.r_algebraic_1:.3e} {report.r_algebraic_2:.3e}, "
            f"differential {report.r_differential:.3e}  (tolerance {report.tolerance:.3e})")
    if report.D_samples.size:
        out.say(f"D range: [{np.min(report.D_samples):.17g}, {np.max(report.D_samples):.17g}]")
    if isinstance(sc.field, RotatingField):
        cf = closed_form_D_rotating(sc.field.B, sc.field.theta, sc.field.omega)
        out.result["closed_form_D"] = {"plus": cf.D_plus, "minus": cf.D_minus}
        out.say(f"closed-form D: plus {cf.D_plus:.17g}, minus {cf.D_minus:.17g}")
    for note in report.notes:
        out.say(f"note: {note}")
    out.say(f"verdict: {report.verdict}")
    if not report.integrable:
        out.code = EXIT_FAIL
        return None
    return report


# --------------------------------------------------------------------------
# commands


def cmd_check(sc: Scenario) -> Outcome:
    out = Outcome(sc.name)
    out.say(f"[check] {sc.name}")
    _gamma_for(sc, out)
    return out


def cmd_solve(sc: Scenario) -> Outcome:
    out = Outcome(sc.name)
    out.say(f"[solve] {sc.name}")
    report = _gamma_for(sc, out)
    if report is None:
        out.say("no CSV written")
        return out
    grid = sc.grid
    out.result["spins"] = {}
    for spin in sc.spins:
        P = exact_propagator(sc.field, report.gamma_value, spin, strict=False, origin=sc.t0)
        psi0 = sc.initial_for(spin)
        U = P(grid)
        states = U @ psi0
        theta = np.asarray(P.theta(grid), dtype=float) + 0.0 * grid
        D = np.asarray(P.D(grid), dtype=float) + 0.0 * grid
        data = np.column_stack([grid, _interleave(states), theta, D])
        header = ["t"] + _state_columns(spin.dim) + ["Theta", "D"]
        out.tables[f"{sc.name}.solve{_spin_tag(sc, spin)}.csv"] = (header, data)
        defect = unitarity_defect(U)
        out.result["spins"][str(spin)] = {
            "final_state": states[-1],
            "unitarity_defect": defect,
            "theta_closed_form": P.closed_form_theta,
        }
        out.say(f"j={spin}: |psi(t1)|-1 = {np.linalg.norm(states[-1]) - 1:.3e}, unitarity defect {defect:.3e}")
    return out


def cmd_oracle(sc: Scenario) -> Outcome:
    out = Outcome(sc.name)
    out.say(f"[oracle] {sc.name}")
    grid = sc.grid
    out.result["spins"] = {}
    for spin in sc.spins:
        psi0 = sc.initial_for(spin)
        rk = rk4_propagate(sc.field, spin, psi0, grid)
        mid = unitary_midpoint_propagate(sc.field, spin, grid, psi0)
        entry = {}
        for r in (rk, mid):
            data = np.column_stack([grid, _interleave(r.values)])
            out.tables[f"{sc.name}.oracle.{r.scheme}{_spin_tag(sc, spin)}.csv"] = (["t"] + _state_columns(spin.dim), data)
            entry[r.scheme] = {"norm_drift": r.norm_drift, "final_state": r.final}
            out.say(f"j={spin} {r.scheme}: step {r.step:.3e}, norm drift {r.norm_drift:.3e}")
        m = compare(rk, mid)
        entry["agreement"] = m.as_dict()
        out.say(f"j={spin} rk4 vs midpoint: max state error {m.max_state_error:.3e}, infidelity {m.infidelity:.3e}")
        out.result["spins"][str(spin)] = entry
    return out


def cmd_compare(sc: Scenario) -> Outcome:
    out = Outcome(sc.name)
    out.say(f"[compare] {sc.name}")
    report = _gamma_for(sc, out)
    if report is None:
        return out
    grid = sc.grid
    worst = 0.0
    out.result["spins"] = {}
    out.result["fidelity_tolerance"] = sc.fidelity_tol
    for spin in sc.spins:
        P = exact_propagator(sc.field, report.gamma_value, spin, strict=False, origin=sc.t0)
        psi0 = sc.initial_for(spin)
        exact = P.propagate(psi0, grid)
        ex = PropagationResult(grid, exact, "exact", 0.0, float(np.max(np.abs(np.linalg.norm(exact, axis=1) - 1))))
        block = {}
        out.say(f"j={spin}")
        for r in (rk4_propagate(sc.field, spin, psi0, grid), unitary_midpoint_propagate(sc.field, spin, grid, psi0)):
            m = compare(ex, r)
            block[r.scheme] = m.as_dict()
            worst = max(worst, m.infidelity)
            out.say(f"  exact vs {r.scheme:<16} max_state_error {m.max_state_error:.3e}  "
                    f"infidelity {m.infidelity:.3e}  norm drift {m.unitarity_defect:.3e}")
        out.result["spins"][str(spin)] = block
    ok = worst < sc.fidelity_tol
    out.result["max_infidelity"] = worst
    out.result["within_tolerance"] = ok
    out.say(f"max infidelity {worst:.3e} {'<' if ok else '>='} {sc.fidelity_tol:.1e}")
    if not ok:
        out.code = EXIT_FAIL
    return out


def _target(sc: Scenario, out: Outcome):
    """Target curve and default initial value for ``fsys``."""
    spec = sc.target or {"kind": "auto"}
    kind = spec.get("kind")
    if kind == "auto":
        report = _gamma_for(sc, out)
        if report is None:
            return None, None, None
        g = report.gamma_value
        pf = polar_functions(sc.field)
        D = lambda t: compute_D(pf.B(t), pf.theta(t), g)  # noqa: E731
        x0 = su2.a_gamma_coords(g, float(pf.phi(sc.t0)))
        return AxisZ(D), x0, g
    if kind == "axis_z":
        return AxisZ(spec.get("D", 0.0)), None, None
    if kind == "fixed_direction":
        return FixedDirection(tuple(spec["direction"]), spec.get("D", 0.0)), None, None
    if kind == "field":
        return field_from_dict(spec["field"]), None, None
    raise SpinLieError(f"unknown target kind {kind!r}")


def cmd_fsys(sc: Scenario) -> Outcome:
    out = Outcome(sc.name)
    out.say(f"[fsys] {sc.name}")
    try:
        target, x0, gamma = _target(sc, out)
    except KeyError as exc:
        raise SpinLieError(f"target is missing key {exc}") from exc
    if target is None:
        out.say("no trajectory computed")
        return out
    if sc.g0 is not None:
        x0 = sc.g0
    if x0 is None:
        x0 = su2.IDENTITY.as_array()
    grid = sc.grid
    tr = solve_fsys(sc.field, target, x0, grid)
    I = tr.first_integral()
    drift = float(np.max(np.abs(I - 1.0)))
    out.result.update(first_integral_drift=drift, final=tr.coords[-1])
    out.say(f"max |I(x(t)) - 1| = {drift:.3e}")
    if gamma is not None:
        c = tr.coords
        closure = {
            "max_abs_y1": float(np.max(np.abs(c[:, 2]))),
            "max_abs_x1_minus_cos": float(np.max(np.abs(c[:, 0] - math.cos(0.5 * gamma)))),
        }
        out.result["a_gamma_closure"] = closure
        out.say(f"A_gamma closure: max|y1| {closure['max_abs_y1']:.3e}, "
                f"max|x1 - cos(gamma/2)| {closure['max_abs_x1_minus_cos']:.3e}")
    data = np.column_stack([grid, tr.coords, I])
    out.tables[f"{sc.name}.fsys.csv"] = (["t", "x1", "x2", "y1", "y2", "I"], data)
    return out


_DISPATCH = {"check": cmd_check, "solve": cmd_solve, "oracle": cmd_oracle, "compare": cmd_compare, "fsys": cmd_fsys}


def run_scenario(command: str, sc: Scenario, out_dir) -> Outcome:
    """Run one command on one scenario and write its artifacts under ``out_dir``."""
    try:
        out = _DISPATCH[command](sc)
    except PreconditionError as exc:
        out = Outcome(sc.name)
        out.say(f"precondition failed: {exc}")
        out.code = EXIT_FAIL
    except (SpinLieError, ValueError, KeyError, TypeError) as exc:
        out = Outcome(sc.name)
        out.say(f"error: {exc}")
        out.result["error"] = str(exc)
        out.code = EXIT_INPUT
        return out
    out.result["exit_code"] = out.code
    out_dir = Path(out_dir)
    if sc.wants("csv"):
        for fname, (header, data) in out.tables.items():
            write_csv(out_dir / fname, header, data)
            out.say(f"wrote {out_dir / fname}")
    if sc.wants("result"):
        path = out_dir / f"{sc.name}.{command}.json"
        path.write_text(json.dumps(_clean(out.result), indent=2, sort_keys=True) + "\n")
        out.say(f"wrote {path}")
    if sc.wants("report"):
        path = out_dir / f"{sc.name}.{command}.txt"
        path.write_text("\n".join(out.lines) + "\n")
    return out


def _run_job(args):
    command, sc, out_dir = args
    return run_scenario(command, sc, out_dir)


def _combine(codes) -> int:
    codes = list(codes)
    if EXIT_INPUT in codes:
        return EXIT_INPUT
    return EXIT_FAIL if EXIT_FAIL in codes else EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinlie", description="Integrability and exact propagation of spin Hamiltonians.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=(__doc__ or "").split(name, 1)[1].split("\n", 1)[0].strip())
        s.add_argument("file", help="scenario JSON file (a single scenario or {\"scenarios\": [...]})")
        s.add_argument("--out", default=".", help="directory for CSV, result and report files (default: .)")
        s.add_argument("--tolerance", type=float, help="residual tolerance (check/solve/fsys) or fidelity tolerance (compare)")
        s.add_argument("--steps", type=int, help="override grid.steps")
        s.add_argument("--gamma", type=float, help="force gamma instead of solving for it")
        s.add_argument("--jobs", type=int, default=1, help="worker processes for batch files")
    sub.add_parser("selftest", help="run the invariant suite")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT

    if args.command == "selftest":
        checks = run_selftest()
        print(format_checks(checks))
        return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL

    overrides = {"steps": args.steps, "gamma": args.gamma}
    if args.tolerance is not None:
        if not args.tolerance > 0:
            print("error: --tolerance must be positive", file=sys.stderr)
            return EXIT_INPUT
        overrides["tolerance"] = args.tolerance
    try:
        scenarios = load_scenarios(args.file, overrides)
    except (OSError, SpinLieError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out_dir}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    jobs = [(args.command, sc, out_dir) for sc in scenarios]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_job, jobs))
    else:
        outcomes = [_run_job(j) for j in jobs]
    for o in outcomes:
        stream = sys.stderr if o.code == EXIT_INPUT else sys.stdout
        print("\n".join(o.lines), file=stream)
    return _combine(o.code for o in outcomes)


if __name__ == "__main__":
    sys.exit(main())
