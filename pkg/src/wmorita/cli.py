"""Command-line driver: ``describe``, ``verify`` and ``report``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .report import CertReport
from .suites import FAULTS, SUITES, ConfigError, RunConfig, describe, run

SEED_ENV = "MORITA_SEED"


def _partition(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(b) for b in text.replace(" ", "").split(",") if b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad partition {text!r}") from exc
    if not parts:
        raise argparse.ArgumentTypeError("empty partition")
    return parts


def _suites(text: str) -> tuple[str, ...]:
    text = text.strip()
    if text == "all":
        return SUITES
    if text in ("", "none"):
        return ()
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown suites: {', '.join(unknown)} (choose from {', '.join(SUITES)})")
    return names


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}")


def _add_datum_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("gl", "sl"), default="gl")
    p.add_argument("--rank", type=int, default=2, help="matrix size n")
    p.add_argument("--prime", type=int, default=3)
    p.add_argument("--ext-degree", type=int, default=1, help="work over F_{p^k}")
    p.add_argument("--partition", type=_partition, default=None,
                   help="Jordan type of e, e.g. 2,1 (default: regular)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmorita",
        description="Exact certification of Morita equivalences for reduced enveloping algebras and W-algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("describe", help="print the nilpotent datum and expected dimensions")
    _add_datum_args(d)
    d.add_argument("--format", choices=("text", "json"), default="text")

    v = sub.add_parser("verify", help="run certification suites and emit a report")
    _add_datum_args(v)
    v.add_argument("--eta-samples", type=int, default=5, help="random points of chi + m-perp besides chi")
    v.add_argument("--seed", type=int, default=None, help=f"rng seed (default: ${SEED_ENV} or 0)")
    v.add_argument("--z-degree", type=int, default=2, help="truncation degree in the p-centre variables")
    v.add_argument("--suites", type=_suites, default=SUITES, help=f"'all', 'none' or a comma list of {','.join(SUITES)}")
    v.add_argument("--output", default=None, help="write the report here instead of stdout")
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--commutant-cap", type=int, default=100, help="largest module for the commutant oracle")
    v.add_argument("--permute-basis", action="store_true", help="seeded reordering of the Lie and universal bases")
    v.add_argument("--inject-fault", choices=FAULTS, default=None, help="corrupt the algebra (negative-path test)")
    v.add_argument("--quiet", action="store_true", help="no progress lines on stderr")

    r = sub.add_parser("report", help="render a saved JSON report")
    r.add_argument("path")
    r.add_argument("--format", choices=("json", "text"), default="text")
    r.add_argument("--output", default=None)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        family=args.family, rank=args.rank, prime=args.prime, ext_degree=args.ext_degree,
        partition=args.partition or (), eta_samples=getattr(args, "eta_samples", 0),
        seed=args.seed if getattr(args, "seed", None) is not None else _default_seed(),
        z_degree=getattr(args, "z_degree", 2), suites=getattr(args, "suites", SUITES),
        commutant_cap=getattr(args, "commutant_cap", 100), permute_basis=getattr(args, "permute_basis", False),
        inject_fault=getattr(args, "inject_fault", None),
    )


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "describe":
            info = describe(_config(args))
            if args.format == "json":
                _write(json.dumps(info, indent=2) + "\n", None)
            else:
                width = max(len(k) for k in info)
                _write("".join(f"{k.ljust(width)}  {v}\n" for k, v in info.items()), None)
            return 0
        if args.command == "verify":
            cfg = _config(args)

            def progress(entry):
                if not args.quiet:
                    print(f"[{entry.verdict:>12}] {entry.anchor} ({entry.ms} ms)", file=sys.stderr, flush=True)

            report = run(cfg, progress)
            _write(report.render(args.format), args.output)
            return report.exit_code
        report = CertReport.load(args.path)
        _write(report.render(args.format), args.output)
        return report.exit_code
    except ConfigError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
