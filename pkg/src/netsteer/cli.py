"""Command-line front end.

    netsteer verify-swap  --out swap.csv
    netsteer activation   --n 3 --eta-boundary --omega-steps 1001 --out act.csv
    netsteer claims-demo  --omega 0.9 --out demo.json
    netsteer nlhs         --fixture sep_loc_sep --realize --out report.json

Exit status is 0 iff every per-point identity check passed its tolerance.
"""

from __future__ import annotations

import argparse
import importlib.resources
import sys
from pathlib import Path

from .experiments import (
    AXIS_PRESETS,
    ExperimentReport,
    SweepSpec,
    run_activation,
    run_claims_demo,
    run_nlhs,
    run_verify_swap,
    write_csv,
    write_json,
)
from .certificates import PipelinePreconditionError
from .nlhs import ModelNotFoundError, PatternError
from .nlhs_io import FixtureError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (NETSTEER_THREADS overrides)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized sub-steps (reproducibility)")


def _add_range(p: argparse.ArgumentParser, name: str, steps: int) -> None:
    p.add_argument(f"--{name}-min", type=float, default=0.0)
    p.add_argument(f"--{name}-max", type=float, default=1.0)
    p.add_argument(f"--{name}-steps", type=int, default=steps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netsteer",
        description="Network steering experiments on linear networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-swap", help="check the erased-Werner swap identity")
    _add_range(p, "eta", 21)
    _add_range(p, "omega", 21)
    _add_common(p)

    p = sub.add_parser("activation", help="sweep the steering-activation region")
    p.add_argument("--n", type=int, default=3, help="number of parties (>= 3)")
    p.add_argument("--eta-boundary", action="store_true",
                   help="tie eta to the unsteerability boundary (2/3)(1 - omega)")
    _add_range(p, "eta", 21)
    _add_range(p, "omega", 21)
    _add_common(p)

    p = sub.add_parser("claims-demo", help="input-encoding network steering demo")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--axes", choices=sorted(AXIS_PRESETS), default="zx")
    _add_common(p)

    p = sub.add_parser("nlhs", help="build an NLHS model from a fixture")
    p.add_argument("--fixture", required=True,
                   help="path to a fixture file, or the name of a bundled one")
    p.add_argument("--realize", action="store_true",
                   help="also round-trip through the separable realisation")
    p.add_argument("--model-out", type=Path, default=None,
                   help="write the serialized NLHS model here")
    _add_common(p)
    return parser


def _resolve_fixture(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = importlib.resources.files("netsteer") / "fixtures" / f"{name}.json"
    with importlib.resources.as_file(bundled) as p:
        if p.exists():
            return Path(p)
    raise FixtureError(f"fixture {name!r} not found on disk or among bundled ones")


def _emit(report: ExperimentReport, args) -> None:
    if args.out is not None:
        if args.format == "csv":
            write_csv(report, args.out)
        else:
            write_json(report, args.out)
    status = "ok" if report.ok else "FAILED"
    print(
        f"{report.name}: {status}  "
        f"max_deviation={report.max_deviation:.3e}  "
        f"records={len(report.records)}  "
        f"wall_time={report.wall_time:.2f}s"
    )
    for key, val in report.extra.items():
        if key not in ("model", "transcript"):
            print(f"  {key}: {val}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify-swap":
            spec = SweepSpec(
                eta_range=(args.eta_min, args.eta_max, args.eta_steps),
                omega_range=(args.omega_min, args.omega_max, args.omega_steps),
                threads=args.threads,
                seed=args.seed,
            )
            report = run_verify_swap(spec)
        elif args.command == "activation":
            spec = SweepSpec(
                eta_range=(args.eta_min, args.eta_max, args.eta_steps),
                omega_range=(args.omega_min, args.omega_max, args.omega_steps),
                n_parties=args.n,
                threads=args.threads,
                seed=args.seed,
                eta_boundary=args.eta_boundary,
            )
            report = run_activation(spec)
        elif args.command == "claims-demo":
            report = run_claims_demo(args.omega, args.axes)
        elif args.command == "nlhs":
            fixture = _resolve_fixture(args.fixture)
            report = run_nlhs(fixture, realize=args.realize)
            if args.model_out is not None:
                import json

                with open(args.model_out, "w") as fh:
                    json.dump(report.extra["model"], fh, indent=1)
        else:  # pragma: no cover
            raise AssertionError(args.command)
    except PipelinePreconditionError as exc:
        print(f"error: precondition not met: {exc}", file=sys.stderr)
        return 2
    except (FixtureError, PatternError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelNotFoundError as exc:
        print(f"error: no model found: {exc}", file=sys.stderr)
        return 3
    _emit(report, args)
    return 0 if report.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
