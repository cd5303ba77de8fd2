"""Command-line interface: reproducible batch commands over JSON files.

Every sampling command takes an explicit ``--seed``; identical argv plus
seed produce byte-identical outputs.  Exit codes: 0 success/pass, 1
failed check, 2 malformed input (with a single-line error JSON on
stderr).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import serialize as ser
from .errors import PovmkitError, SchemaError
from .extremality import decompose_extremal, perturbation_space
from .families import (
    phase_povm,
    phase_scheme,
    spin_direction_povm,
    stern_gerlach_scheme,
    verify_scheme_equivalence,
)
from .merit import bayes_gain, check_equal_optimality
from .operators import GAP_THRESHOLD, TOL_COMPLETE, TOL_PSD
from .povm import validate_povm
from .sampling import compare_samples, sample_direct, sample_two_stage
from .tomography import (
    dual_coefficients,
    estimate_expectation,
    phase_dual,
    phase_dual_residual,
    spin_dual,
    spin_dual_residual,
)

_TOLERANCE_KEYS = ("psd", "complete", "gap")


def _emit(obj: dict):
    sys.stdout.write(ser.dumps_canonical(obj))
    sys.stdout.write("\n")


def _fail_input(message: str) -> int:
    sys.stderr.write(ser.dumps_canonical({"error": message}))
    sys.stderr.write("\n")
    return 2


def _parse_family(text: str):
    """Family spec: 'spin' (alias 'spin_direction') or 'phase:<d>'."""
    if text in ("spin", "spin_direction", "stern_gerlach"):
        return "spin", 2
    if text.startswith("phase:"):
        try:
            d = int(text.split(":", 1)[1])
        except ValueError as exc:
            raise SchemaError(f"bad family spec {text!r}") from exc
        return "phase", d
    if text == "phase":
        raise SchemaError("phase family needs a dimension, e.g. phase:3")
    raise SchemaError(f"unknown family {text!r}")


def _continuous(text: str):
    kind, d = _parse_family(text)
    return spin_direction_povm() if kind == "spin" else phase_povm(d)


def _scheme(text: str):
    kind, d = _parse_family(text)
    return stern_gerlach_scheme() if kind == "spin" else phase_scheme(d)


def _parse_tolerances(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise SchemaError(f"--tolerance needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        if key not in _TOLERANCE_KEYS:
            raise SchemaError(
                f"unknown tolerance {key!r}; known: {', '.join(_TOLERANCE_KEYS)}"
            )
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise SchemaError(f"tolerance {key}: bad value {val!r}") from exc
    return out


def _guard_output(out_path, inputs):
    if out_path is None:
        return
    target = os.path.abspath(out_path)
    for p in inputs:
        if p is not None and os.path.abspath(p) == target:
            raise SchemaError(f"output {out_path!r} would overwrite input {p!r}")


def _single_state(path):
    states = ser.load_states(path)
    return states[0][1]


# --- subcommand bodies --------------------------------------------------------

def _cmd_validate(args) -> int:
    tols = _parse_tolerances(args.tolerance)
    povm = ser.load_povm(args.povm)
    report = validate_povm(
        povm,
        tol_psd=tols.get("psd", TOL_PSD),
        tol_complete=tols.get("complete", TOL_COMPLETE),
    )
    _emit(ser.validation_report_to_dict(report))
    return 0 if report.passed else 1


def _cmd_extremal(args) -> int:
    tols = _parse_tolerances(args.tolerance)
    gap = tols.get("gap", GAP_THRESHOLD)
    povm = ser.load_povm(args.povm)
    basis = perturbation_space(povm, gap=gap)
    _emit({"extremal": not basis, "kernel_dim": len(basis)})
    return 0


def _cmd_decompose(args) -> int:
    tols = _parse_tolerances(args.tolerance)
    gap = tols.get("gap", GAP_THRESHOLD)
    povm = ser.load_povm(args.povm)
    _guard_output(args.output, [args.povm])
    result = decompose_extremal(povm, max_terms=args.max_terms, gap=gap)
    payload = ser.decomposition_to_dict(result)
    if args.output:
        ser.write_json(args.output, payload)
    _emit(
        {
            "terms": len(result.terms),
            "depth": result.depth,
            "weights": [float(w) for w in result.weights],
            "output": args.output,
        }
    )
    return 0


def _cmd_equiv(args) -> int:
    c = _continuous(args.family)
    s = _scheme(args.family)
    states = ser.load_states(args.states)
    regions = ser.load_regions(args.regions)
    _guard_output(args.output, [args.states, args.regions])
    mode = "deterministic" if args.mode == "det" else "montecarlo"
    if mode == "montecarlo" and args.seed is None:
        raise SchemaError("montecarlo mode requires --seed")
    report = verify_scheme_equivalence(
        c, s, states, regions, mode=mode, budget=args.budget, seed=args.seed
    )
    payload = ser.equivalence_report_to_dict(report)
    if args.output:
        ser.write_json(args.output, payload)
    _emit(payload)
    if args.tol is not None and report.max_abs_diff > args.tol:
        return 1
    return 0


def _cmd_sample(args) -> int:
    rho = _single_state(args.state)
    _guard_output(args.output, [args.state])
    if args.scheme:
        records = sample_two_stage(_scheme(args.family), rho, args.n, args.seed)
    else:
        records = sample_direct(_continuous(args.family), rho, args.n, args.seed)
    ser.write_records(args.output, records)
    _emit({"written": args.output, "n": len(records)})
    return 0


def _cmd_gof(args) -> int:
    rec_a = ser.read_records(args.a)
    rec_b = ser.read_records(args.b)
    if args.bins in ("sphere12", "circle16"):
        bins = args.bins
    else:
        bins = [r for _, r in ser.load_regions(args.bins)]
    report = compare_samples(rec_a, rec_b, bins)
    _emit(ser.gof_report_to_dict(report))
    if args.alpha is not None and report.p_value < args.alpha:
        return 1
    return 0


def _cmd_merit(args) -> int:
    spec = ser.bayes_spec_from_dict(ser.load_json(args.spec))
    _guard_output(args.output, [args.spec])
    if args.scheme:
        report = check_equal_optimality(
            _scheme(args.family),
            spec,
            x_samples=args.samples,
            tol=args.tol if args.tol is not None else 1e-9,
            seed=args.seed or 0,
        )
        payload = ser.merit_report_to_dict(report)
        if args.output:
            ser.write_json(args.output, payload)
        _emit(payload)
        if args.tol is not None and report.spread > args.tol:
            return 1
        return 0
    value = bayes_gain(_continuous(args.family), spec)
    payload = {"schema": 1, "value": value}
    if args.output:
        ser.write_json(args.output, payload)
    _emit(payload)
    return 0


def _cmd_tomo(args) -> int:
    target = ser.matrix_from_json(ser.load_json(args.target).get("matrix"), "target")
    _guard_output(args.output, [args.target, args.povm, args.records, args.state])
    if args.povm:
        povm = ser.load_povm(args.povm)
        dual = dual_coefficients(povm, target)
        residual = float(
            np.linalg.norm(
                sum(c * el for c, el in zip(dual.coefficients, povm.elements)) - target
            )
        )
    else:
        kind, d = _parse_family(args.family)
        if kind == "spin":
            dual = spin_dual(target)
            residual = float(spin_dual_residual(dual))
        else:
            dual = phase_dual(d, target)
            residual = float(phase_dual_residual(dual))
    payload = {"dual": ser.dual_to_dict(dual), "residual": residual}
    if args.records:
        records = ser.read_records(args.records)
        rho = _single_state(args.state) if args.state else None
        est = estimate_expectation(records, dual, rho_exact=rho)
        payload["estimate"] = ser.estimate_report_to_dict(est)
    if args.output:
        ser.write_json(args.output, payload)
    _emit(payload)
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povmkit",
        description=(
            "Validate, decompose, randomize, sample, and post-process finite "
            "and continuous POVMs over JSON files."
        ),
        epilog=(
            "Tolerance overrides: --tolerance psd=1e-9 --tolerance complete=1e-9 "
            "--tolerance gap=1e-8 (repeatable; apply where meaningful)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tol(p):
        p.add_argument("--tolerance", action="append", metavar="KEY=VALUE")

    p = sub.add_parser("validate", help="check the POVM axioms")
    p.add_argument("povm")
    add_tol(p)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("extremal", help="extremality verdict and kernel dimension")
    p.add_argument("povm")
    add_tol(p)
    p.set_defaults(fn=_cmd_extremal)

    p = sub.add_parser("decompose", help="convex decomposition into extremal POVMs")
    p.add_argument("povm")
    p.add_argument("--max-terms", type=int, default=256)
    p.add_argument("-o", "--output")
    add_tol(p)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("equiv", help="continuous POVM vs randomized scheme")
    p.add_argument("--family", required=True, help="spin or phase:<d>")
    p.add_argument("--states", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--mode", choices=["det", "mc"], default="det")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_equiv)

    p = sub.add_parser("sample", help="draw measurement outcomes")
    p.add_argument("--family", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--direct", action="store_true")
    group.add_argument("--scheme", action="store_true")
    p.add_argument("--state", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("gof", help="two-sample chi-square over a partition")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--bins", required=True, help="sphere12 | circle16 | regions.json")
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(fn=_cmd_gof)

    p = sub.add_parser("merit", help="Bayes gain of a family or scheme members")
    p.add_argument("--family", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--scheme", action="store_true")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_merit)

    p = sub.add_parser("tomo", help="dual processing and expectation estimates")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--povm")
    group.add_argument("--family")
    p.add_argument("--target", required=True)
    p.add_argument("--records")
    p.add_argument("--state")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_tomo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed a message; normalize exit code
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except SchemaError as exc:
        return _fail_input(str(exc))
    except FileNotFoundError as exc:
        return _fail_input(str(exc))
    except PovmkitError as exc:
        sys.stderr.write(ser.dumps_canonical({"check_failed": str(exc)}))
        sys.stderr.write("\n")
        return 1
    except ValueError as exc:
        return _fail_input(str(exc))


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
