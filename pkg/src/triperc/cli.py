"""
Command-line front end.

Every experiment subcommand writes ``<subcommand>.csv`` and/or
``<subcommand>.json`` to ``--out`` together with
``<subcommand>.manifest.json``, which records the resolved parameters and
the SHA-256 digest of every output file. ``triperc replay MANIFEST`` reruns
a manifest and checks the digests. Without ``--out`` the CSV (or JSON) goes
to standard output and no manifest is written.

Exit codes: 0 success, 1 failed verification (``oracle-verify``, ``replay``) or
failed estimation, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import secrets
import sys
import tempfile
import warnings
from pathlib import Path

from . import __version__
from .errors import DataQualityError, DomainError, EstimationError
from .experiments import (CSV_VERSION, DEFAULT_SEED, ExperimentSpec, records_to_csv,
                          result_to_json, run_experiment)
from .lattice import CLOSED, OPEN

SUBCOMMANDS = {
    "crossing-prob": "crossing_prob",
    "pivotal": "conditional_pivotal",
    "one-arm": "one_arm",
    "cluster-tail": "cluster_tail",
    "rsw": "rsw_aspect",
    "pc-locate": "pc_locate",
}
DEFAULT_REPLICAS = 1000


class UsageError(Exception):
    pass


def _seed(text: str):
    if text == "random":
        return "random"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a non-negative integer or 'random', got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a probability, got {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` -> the inclusive grid ``lo, lo + step, ..., hi``.

    >>> parse_grid("0.45:0.55:0.05")
    [0.45, 0.5, 0.55]
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {text!r}")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs step > 0 and hi >= lo")
    count = int(round((hi - lo) / step)) + 1
    values = [round(lo + i * step, 12) for i in range(count)]
    if not all(0.0 <= v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError("grid values must lie in [0, 1]")
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triperc", description="Site percolation on the triangular lattice.")
    parser.add_argument("--version", action="version", version=f"triperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(p, default_format="csv"):
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                       help=f"master seed, or 'random' (default {DEFAULT_SEED})")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json", "both"), default=default_format)

    for name, kind in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"{kind} experiment")
        p.add_argument("--n", type=_nonneg_int, action="append", required=True,
                       help="box size n (repeatable)")
        g = p.add_mutually_exclusive_group(required=kind != "rsw_aspect")
        g.add_argument("--p", type=_probability, action="append", help="probability (repeatable)")
        g.add_argument("--p-grid", type=parse_grid, help="inclusive grid lo:hi:step")
        p.add_argument("--replicas", type=_positive_int, default=DEFAULT_REPLICAS)
        p.add_argument("--aspect", type=_positive_int, default=2 if kind == "rsw_aspect" else 1,
                       help="width/height ratio k of [0,kn]x[0,n]")
        p.add_argument("--threads", type=_positive_int, default=1)
        if kind == "conditional_pivotal":
            p.add_argument("--closed", action="store_true",
                           help="closed left-right crossings and their pivotal sites")
            p.add_argument("--swapped", action="store_true",
                           help="draw the color-swapped configuration")
        if kind == "one_arm":
            p.add_argument("--conditioned", action="store_true",
                           help="condition on the origin being open")
        output_flags(p)

    p = sub.add_parser("oracle-verify", help="exhaustive verification suite")
    p.add_argument("--max-sites", type=_positive_int, default=16)
    p.add_argument("--random-configs", type=_nonneg_int, default=100_000)
    p.add_argument("--random-n", type=_nonneg_int, default=32)
    output_flags(p, default_format="json")

    p = sub.add_parser("replay", help="rerun a manifest and compare output digests")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--threads", type=_positive_int, default=None)
    return parser


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolved_argv(args, seed: int) -> list[str]:
    """Argument vector that reproduces this run (seed fixed, no output directory)."""
    argv = [args.command]
    if args.command == "oracle-verify":
        argv += ["--max-sites", str(args.max_sites), "--random-configs", str(args.random_configs),
                 "--random-n", str(args.random_n)]
    else:
        for n in args.n:
            argv += ["--n", str(n)]
        for p in _p_values(args):
            argv += ["--p", repr(p)]
        argv += ["--replicas", str(args.replicas), "--aspect", str(args.aspect),
                 "--threads", str(args.threads)]
        for flag in ("closed", "swapped", "conditioned"):
            if getattr(args, flag, False):
                argv.append(f"--{flag}")
    argv += ["--seed", str(seed), "--format", args.format]
    return argv


def _p_values(args) -> list[float]:
    if args.p_grid is not None:
        return args.p_grid
    if args.p:
        return args.p
    return [0.5]


def _emit(args, outputs: dict[str, str], params: dict, seed: int, argv, started: str) -> None:
    if args.out is None:
        for text in outputs.values():
            sys.stdout.write(text)
        return
    args.out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for fname, text in outputs.items():
        path = args.out / fname
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        digests[fname] = _sha256(path)
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "resolved_argv": _resolved_argv(args, seed),
        "params": params,
        "master_seed": seed,
        "version": __version__,
        "csv_version": CSV_VERSION,
        "started": started,
        "finished": _now(),
        "outputs": digests,
    }
    with open(args.out / f"{args.command}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_experiment(args, argv) -> int:
    started = _now()
    seed = secrets.randbits(63) if args.seed == "random" else args.seed
    kind = SUBCOMMANDS[args.command]
    spec = ExperimentSpec(
        kind=kind, n_values=tuple(args.n), p_values=tuple(_p_values(args)),
        replicas=args.replicas, master_seed=seed, aspect=args.aspect,
        conditioned=getattr(args, "conditioned", False),
        color=CLOSED if getattr(args, "closed", False) else OPEN,
        swapped=getattr(args, "swapped", False))
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        result = run_experiment(spec, threads=args.threads)
    outputs = {}
    if args.format in ("csv", "both"):
        outputs[f"{args.command}.csv"] = records_to_csv(result.records)
    if args.format in ("json", "both"):
        outputs[f"{args.command}.json"] = result_to_json(result)
    for key, fit in result.fits.items():
        lo, hi = fit.slope_ci
        print(f"{key}: slope {fit.slope:.6g} [{lo:.6g}, {hi:.6g}] R^2 {fit.r_squared:.6g}",
              file=sys.stderr)
    if kind == "pc_locate":
        for n, v in result.summary["p_star"].items():
            print(f"p*({n}) = {v:.6f}", file=sys.stderr)
    params = {"spec": spec.to_dict(), "threads": args.threads, "format": args.format}
    _emit(args, outputs, params, seed, argv, started)
    return 0


def _run_oracle(args, argv) -> int:
    from .oracle import run_suite

    started = _now()
    seed = secrets.randbits(63) if args.seed == "random" else args.seed
    report = run_suite(args.max_sites, random_configs=args.random_configs,
                       random_n=args.random_n, seed=seed)
    outputs = {}
    if args.format in ("json", "both"):
        outputs["oracle-verify.json"] = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.format in ("csv", "both"):
        lines = ["suite,region,event,p,lhs,rhs,pass"]
        for rec in report["records"]:
            vals = [rec["suite"], rec["region"], rec["event"], rec["p"], rec["lhs"],
                    rec["rhs"], int(rec["pass"])]
            lines.append(",".join("" if v is None else
                                  format(v, ".17g") if isinstance(v, float) else
                                  f'"{v}"' if isinstance(v, str) and "," in v else str(v)
                                  for v in vals))
        outputs["oracle-verify.csv"] = "\n".join(lines) + "\n"
    failed = [r for r in report["records"] if not r["pass"]]
    for r in failed:
        print(f"FAILED {r['suite']} {r['region']} {r['event']} p={r['p']}", file=sys.stderr)
    print(f"oracle-verify: {len(report['records']) - len(failed)}/{len(report['records'])} "
          "checks passed", file=sys.stderr)
    params = {"max_sites": args.max_sites, "random_configs": args.random_configs,
              "random_n": args.random_n, "format": args.format}
    _emit(args, outputs, params, seed, argv, started)
    return 0 if report["pass"] else 1


def _run_replay(args) -> int:
    try:
        manifest = json.loads(args.manifest.read_text())
        argv = list(manifest["resolved_argv"])
        expected = manifest["outputs"]
    except (OSError, ValueError, KeyError) as err:
        raise UsageError(f"cannot read manifest {args.manifest}: {err}")
    if args.threads is not None and "--threads" in argv:
        argv[argv.index("--threads") + 1] = str(args.threads)
    out = args.out if args.out is not None else Path(tempfile.mkdtemp(prefix="triperc-replay-"))
    code = main(argv + ["--out", str(out)])
    if code not in (0, 1):
        return code
    ok = True
    for fname, digest in expected.items():
        path = out / fname
        got = _sha256(path) if path.exists() else None
        same = got == digest
        ok &= same
        print(f"{'match' if same else 'DIFFERS'} {fname}", file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            return _run_replay(args)
        if args.command == "oracle-verify":
            return _run_oracle(args, argv)
        return _run_experiment(args, argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return 2
    except DomainError as err:
        print(f"triperc: error: {err}", file=sys.stderr)
        return 2
    except (DataQualityError, EstimationError) as err:
        print(f"triperc: estimation failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
