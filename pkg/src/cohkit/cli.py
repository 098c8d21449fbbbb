"""Command-line front end.

Exit codes: 0 success, 1 malformed input file (with parse location),
2 invariant violation (naming the invariant), 3 transformation impossible
(with the majorization witness).  Identical (arguments, seed) pairs produce
byte-identical reports; every report records the seed and all numbers are
emitted at full double precision.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (
    CohkitError,
    InvariantViolationError,
    TransformationImpossibleError,
)
from .asymptotic import (
    covering_check,
    simulate_concentration,
    simulate_dilution,
    simulate_formation,
)
from .incoherent import (
    IncoherentChannel,
    classify_channel,
    synthesize_pure_transformation,
)
from .measures import (
    Ensemble,
    coherence_of_formation,
    entropy_of_coherence,
    relative_entropy_of_coherence,
    relative_entropy_of_coherence_variational,
)
from .qstate import BasisPartition, PureState, state_from_dict
from .reversibility import is_reversible
from .selftest import run_selftest

TOLERANCE_RANGE = (1e-14, 1e-3)


def _tolerance(text: str) -> float:
    value = float(text)
    lo, hi = TOLERANCE_RANGE
    if not (lo <= value <= hi):
        raise argparse.ArgumentTypeError(
            f"tolerance {value!r} outside [{lo}, {hi}]")
    return value


def _load_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(1)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON in {path} at line {exc.lineno} "
              f"column {exc.colno}: {exc.msg}", file=sys.stderr)
        raise SystemExit(1)


def _load_state(path: str, tolerance: float | None):
    kwargs = {}
    if tolerance is not None:
        kwargs["atol"] = tolerance
    data = _load_json_file(path)
    try:
        return state_from_dict(data, **kwargs)
    except TypeError:
        return state_from_dict(data)


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")


def _cmd_measure(args) -> int:
    state = _load_state(args.state, args.tolerance)
    report = {"command": "measure", "which": args.which, "seed": args.seed,
              "rng": "pcg64", "log_base": 2}
    if args.which == "c":
        if not isinstance(state, PureState):
            raise InvariantViolationError(
                "pure_state", "entropy of coherence takes a pure state")
        report["value"] = entropy_of_coherence(state)
    elif args.which == "cr":
        rho = state.to_density() if isinstance(state, PureState) else state
        report["value"] = relative_entropy_of_coherence(rho)
        if args.variational:
            report["variational"] = relative_entropy_of_coherence_variational(rho)
    elif args.which == "cf":
        rho = state.to_density() if isinstance(state, PureState) else state
        result = coherence_of_formation(rho, restarts=args.restarts,
                                        seed=args.seed)
        report["value"] = result.value
        report["bound_kind"] = "upper"
        report["converged"] = result.converged
        report["restarts"] = result.restarts
        report["ensemble"] = result.ensemble.to_dict()
    report[args.which] = report["value"]
    _emit(report, args.out)
    return 0


def _cmd_transform(args) -> int:
    source = _load_state(args.source, args.tolerance)
    target = _load_state(args.target, args.tolerance)
    if not isinstance(source, PureState) or not isinstance(target, PureState):
        raise InvariantViolationError(
            "pure_state", "transform takes pure-state JSON files")
    channel = synthesize_pure_transformation(source, target)
    report = {"command": "transform", "seed": args.seed,
              "kraus_count": len(channel.kraus),
              "class": channel.class_label,
              "completeness_defect": channel.completeness_defect(),
              "channel": channel.to_dict()}
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:  # the channel file itself, loadable by `classify`
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(channel.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_classify(args) -> int:
    data = _load_json_file(args.channel)
    data = data.get("channel", data)  # accept a transform report too
    try:
        channel = IncoherentChannel.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise InvariantViolationError("json_schema",
                                      f"not a channel file: {exc}")
    partition = None
    if args.partition:
        partition = BasisPartition.from_dict(_load_json_file(args.partition))
    report = {"command": "classify", "seed": args.seed,
              "class": classify_channel(channel, partition)}
    _emit(report, args.out)
    return 0


def _cmd_reversibility(args) -> int:
    state = _load_state(args.state, args.tolerance)
    rho = state.to_density() if isinstance(state, PureState) else state
    verdict = is_reversible(rho, threshold=args.threshold,
                            restarts=args.restarts, seed=args.seed)
    report = {"command": "reversibility", "seed": args.seed,
              "threshold": args.threshold}
    report.update(verdict.to_dict())
    _emit(report, args.out)
    return 0


def _write_trace_csv(path: str, trace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "n", "rate", "fidelity", "seed"])
        for t, (rate, fid) in enumerate(zip(trace.rates, trace.fidelity)):
            writer.writerow([t, trace.n, repr(float(rate)),
                             repr(float(fid)), trace.seed])


def _cmd_simulate(args) -> int:
    seed = args.seed
    if args.protocol == "concentrate":
        psi = _load_state(args.state, args.tolerance)
        trace = simulate_concentration(psi, args.n, args.trials, seed=seed)
    elif args.protocol == "dilute":
        psi = _load_state(args.state, args.tolerance)
        trace = simulate_dilution(psi, args.n, args.delta, seed=seed)
    elif args.protocol == "form":
        state = _load_state(args.state, args.tolerance)
        rho = state.to_density() if isinstance(state, PureState) else state
        trace = simulate_formation(rho, args.n, args.delta, args.delta2,
                                   seed=seed, trials=args.trials,
                                   restarts=args.restarts)
    else:  # cover
        ensemble = Ensemble.from_dict(_load_json_file(args.state))
        report = covering_check(ensemble, args.n, args.subset_size,
                                args.trials, seed=seed)
        summary = {"command": "simulate", "protocol": "cover", "seed": seed,
                   "rng": "pcg64", "n": args.n, "S": report.S, "M": report.M,
                   "median_deviation": float(np.median(report.deviations)),
                   "fraction_good": {str(k): v
                                     for k, v in report.fraction_good.items()}}
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["subset", "n", "deviation", "seed"])
                for i, dev in enumerate(report.deviations):
                    writer.writerow([i, args.n, repr(float(dev)), seed])
        _emit(summary, None)
        return 0
    if args.out:
        _write_trace_csv(args.out, trace)
    summary = {"command": "simulate", "protocol": args.protocol,
               "seed": seed, "rng": "pcg64", "n": trace.n,
               "trials": trace.trials, "mean_rate": trace.mean_rate,
               "std_rate": float(np.std(trace.rates)),
               "mean_fidelity": float(np.mean(trace.fidelity)),
               "target_rate": trace.target_rate}
    _emit(summary, None)
    return 0


def _cmd_selftest(args) -> int:
    ok = run_selftest(seed=args.seed)
    return 0 if ok else 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohkit",
        description="Operational coherence toolkit (all logarithms base 2).")
    parser.add_argument(
        "--version", action="version",
        version=(f"cohkit {__version__} | conventions: log base 2; "
                 "hermitian/trace tolerance 1e-10; psd floor -1e-9; "
                 "entropy eigenvalue floor 1e-12; support tolerance 1e-10"))
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int,
                       default=int(os.environ.get("COHKIT_SEED", "0")))
        p.add_argument("--tolerance", type=_tolerance, default=None,
                       help="override state-validation tolerance "
                            "(within [1e-14, 1e-3])")
        p.add_argument("--out", default=None, help="write report/trace here")

    p = sub.add_parser("measure", help="compute a coherence measure")
    common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--which", required=True, choices=["cr", "cf", "c"])
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--variational", action="store_true",
                   help="also report the variational C_r cross-check")
    p.set_defaults(fn=_cmd_measure)

    p = sub.add_parser("transform",
                       help="synthesize a pure-state transformation")
    common(p)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("classify", help="classify a channel's free class")
    common(p)
    p.add_argument("--channel", required=True)
    p.add_argument("--partition", default=None)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("reversibility", help="reversibility verdict")
    common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--threshold", type=float, default=1e-10)
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(fn=_cmd_reversibility)

    p = sub.add_parser("simulate", help="run a protocol simulation")
    common(p)
    p.add_argument("protocol",
                   choices=["concentrate", "dilute", "form", "cover"])
    p.add_argument("--state", required=True,
                   help="state JSON (ensemble JSON for cover)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--delta2", type=float, default=0.01)
    p.add_argument("--subset-size", type=int, default=16,
                   help="subset size S for the covering check")
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("selftest", help="run the invariant suite")
    common(p)
    p.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:  # argparse errors and parse failures
        code = exc.code
        return code if isinstance(code, int) else 1
    except TransformationImpossibleError as exc:
        report = {"error": "transformation_impossible", "detail": str(exc)}
        if exc.witness is not None:
            report["witness"] = exc.witness.to_dict()
        print(json.dumps(report, indent=2, sort_keys=True), file=sys.stderr)
        return 3
    except InvariantViolationError as exc:
        print(json.dumps({"error": "invariant_violation",
                          "invariant": exc.invariant,
                          "detail": exc.detail}, indent=2, sort_keys=True),
              file=sys.stderr)
        return 2
    except CohkitError as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)},
                         indent=2, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
