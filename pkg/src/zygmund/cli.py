"""Command-line front end.

Exit codes: 0 success, 1 invalid arguments, 2 numerical failure, 3 a
trivial-bound violation.  Results go to standard output as JSON unless
``--out`` is given; every ``--out`` file gets a ``.provenance.json``
sidecar recording the parsed arguments, seed and version, with no
timestamps, so identical invocations write identical bytes.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import NAME as BACKEND
from .experiments import (
    DEFAULT_SEED,
    OpNormConfig,
    block_hit_probability,
    run_main_experiment,
    run_sharpness,
    run_trivial_bound,
    summarize_main,
    summarize_sharpness,
    summarize_trivial,
    write_json,
    write_records_csv,
    _dumps,
)
from .luxemburg import DEFAULT_REL_TOL, NumericalFailure, luxemburg_norm
from .opnorm import opnorm_ascent, opnorm_bruteforce
from .sampling import IndexSet, bernoulli_subset
from .space import read_func_csv, uniform_grid_space
from .systems import fourier_system, read_system_csv, walsh_system
from .young import default_grid, format_family, parse_family, young_validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _key_values(text: str, allowed: dict) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key not in allowed:
            raise ValueError(f"bad parameter {item!r}; expected {', '.join(allowed)}")
        out[key] = allowed[key](value)
    return out


def parse_system(text: str):
    """``fourier:n=..[,M=..]``, ``walsh:d=..`` or a system CSV path."""
    name, _, rest = text.partition(":")
    if name == "fourier":
        kw = _key_values(rest, {"n": int, "M": int})
        if "n" not in kw:
            raise ValueError("fourier system needs n")
        return fourier_system(kw["n"], kw.get("M"))
    if name == "walsh":
        kw = _key_values(rest, {"d": int})
        if "d" not in kw:
            raise ValueError("walsh system needs d")
        return walsh_system(kw["d"])
    path = Path(text)
    if not path.is_file():
        raise ValueError(f"system {text!r} is neither fourier:..., walsh:... nor a file")
    return read_system_csv(path)


def parse_subset(text: str, n: int) -> IndexSet:
    """A JSON index set (file or literal), ``all``, or ``delta,seed`` for Bernoulli selection."""
    text = text.strip()
    if text == "all":
        return IndexSet(np.arange(1, n + 1), n, 1.0, 0)
    path = Path(text)
    if text.startswith("{") or path.is_file():
        raw = text if text.startswith("{") else path.read_text()
        try:
            J = IndexSet.from_json(raw)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"bad subset JSON: {exc}") from None
        if J.n != n:
            raise ValueError(f"subset was drawn from [1, {J.n}] but the system has n = {n}")
        return J
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("subset must be JSON, 'all', or 'delta,seed'")
    return bernoulli_subset(n, float(parts[0]), int(parts[1]))


def _emit(payload: dict, out: str | None, args) -> None:
    if out is None:
        print(_dumps(payload))
        return
    write_json(out, payload)
    _provenance(out, args)


def _provenance(out: str, args) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    write_json(
        str(out) + ".provenance.json",
        {"tool": "zygmund", "version": __version__, "backend": BACKEND, "parameters": params},
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate_young(args) -> int:
    spec = parse_family(args.family)
    report = young_validate(spec, default_grid(args.grid_points))
    _emit({"family": format_family(spec), **report.to_dict()}, args.out, args)
    return EXIT_OK


def cmd_norm(args) -> int:
    spec = parse_family(args.family)
    f = read_func_csv(args.func)
    if args.grid is not None and args.grid != f.size:
        raise ValueError(f"--grid {args.grid} does not match the {f.size} values in {args.func}")
    res = luxemburg_norm(uniform_grid_space(f.size), spec, f, args.rel_tol)
    payload = {
        "family": format_family(spec), "atoms": int(f.size), "norm": res.value,
        "modular_at_norm": res.modular_at_value, "iterations": res.iterations,
    }
    _emit(payload, args.out, args)
    return EXIT_OK


def cmd_opnorm(args) -> int:
    spec = parse_family(args.family)
    system = parse_system(args.system)
    J = parse_subset(args.subset, system.n)
    if len(J) == 0:
        raise ValueError("the selected subset is empty")
    est = opnorm_ascent(
        spec, system, J, restarts=args.restarts, max_iters=args.iters, tol=args.tol,
        seed=args.seed, rel_tol=args.rel_tol,
    )
    payload = {
        "family": format_family(spec), "system": args.system, "J_size": len(J),
        "indices": J.indices.tolist(), "value": est.value, "converged": est.converged,
        "restarts_used": est.restarts_used,
        "argmax": [[float(z.real), float(z.imag)] for z in est.argmax],
    }
    if args.bruteforce:
        payload["bruteforce"] = opnorm_bruteforce(
            spec, system, J, samples=args.bruteforce, seed=args.seed, rel_tol=args.rel_tol
        )
    _emit(payload, args.out, args)
    return EXIT_OK


def _opnorm_config(args) -> OpNormConfig:
    return OpNormConfig(restarts=args.restarts, max_iters=args.iters, tol=args.tol, rel_tol=args.rel_tol)


def _write_run(args, records, summary) -> None:
    summary = {
        "parameters": {k: v for k, v in sorted(vars(args).items()) if k not in ("handler",)},
        "version": __version__,
        **summary,
    }
    if args.out is None:
        print(_dumps(summary))
        return
    write_records_csv(args.out, records)
    write_json(args.summary or str(args.out) + ".summary.json", summary)
    _provenance(args.out, args)


def cmd_experiment(args) -> int:
    if args.kind == "main":
        records = run_main_experiment(
            args.alpha, args.n, args.trials, args.seed, _opnorm_config(args), args.threads
        )
        _write_run(args, records, {"summary": summarize_main(records)})
        return EXIT_OK
    if args.kind == "trivial":
        records = []
        for a in args.alpha:
            records += run_trivial_bound(
                a, args.n, args.trials, args.seed, _opnorm_config(args), args.threads,
                ascent=not args.no_ascent,
            )
        summary = summarize_trivial(records)
        _write_run(args, records, {"summary": summary})
        if summary["violations"]:
            print(f"trivial bound violated in {summary['violations']} rows", file=sys.stderr)
            return EXIT_VIOLATION
        return EXIT_OK
    records = run_sharpness(
        args.m, args.N, args.alpha[0], args.trials, args.seed, args.M, args.threads,
        args.full_sup, args.rel_tol,
    )
    _write_run(args, records, {"summary": summarize_sharpness(records)})
    return EXIT_OK


def cmd_hit_prob(args) -> int:
    p = block_hit_probability(args.delta, args.N, args.T)
    print(f"{p:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="zygmund", description=__doc__.split("\n\n")[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="write results here instead of standard output")
        p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL, help="Luxemburg bisection tolerance")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="base seed")

    def ascent(p, restarts, iters, tol):
        p.add_argument("--restarts", type=int, default=restarts, help="ascent starts")
        p.add_argument("--iters", type=int, default=iters, help="ascent iterations per start")
        p.add_argument("--tol", type=float, default=tol, help="ascent stopping tolerance")

    p = sub.add_parser("validate-young", help="scan a Young function for the Young axioms", formatter_class=fmt)
    p.add_argument("--family", required=True, help="e.g. close2:alpha=1")
    p.add_argument("--grid-points", type=int, default=400, help="log-spaced points on [1e-6, 1e8]")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_validate_young)

    p = sub.add_parser("norm", help="Luxemburg norm of a function on a uniform grid", formatter_class=fmt)
    p.add_argument("--family", required=True)
    p.add_argument("--func", required=True, help="headerless CSV with one re,im row per atom")
    p.add_argument("--grid", type=int, help="expected number of atoms")
    common(p, seed=False)
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("opnorm", help="operator norm lower bound of a subsystem", formatter_class=fmt)
    p.add_argument("--family", required=True)
    p.add_argument("--system", required=True, help="fourier:n=..[,M=..], walsh:d=.. or a CSV file")
    p.add_argument("--subset", required=True, help="index-set JSON (file or literal), 'all', or 'delta,seed'")
    p.add_argument("--bruteforce", type=int, default=0, help="also run the sampling oracle with this many points (|J| <= 3)")
    ascent(p, 8, 500, 1e-8)
    common(p)
    p.set_defaults(handler=cmd_opnorm)

    p = sub.add_parser("experiment", help="run a reproduction experiment", formatter_class=fmt)
    p.add_argument("kind", choices=("main", "trivial", "sharpness"))
    p.add_argument("--alpha", type=float, nargs="+", default=[1.0])
    p.add_argument("--n", type=int, nargs="+", default=[256, 1024, 4096, 16384], help="main/trivial: system sizes")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--m", type=int, default=4, help="sharpness: m")
    p.add_argument("--N", type=int, default=2, help="sharpness: block length")
    p.add_argument("--M", type=int, default=None, help="sharpness: grid size (default 32 N)")
    p.add_argument("--full-sup", action="store_true", help="sharpness: also run the ascent on J")
    p.add_argument("--no-ascent", action="store_true", help="trivial: skip the ascent maximizer")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--summary", help="summary JSON path (default OUT.summary.json)")
    d = OpNormConfig()
    ascent(p, d.restarts, d.max_iters, d.tol)
    common(p)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("hit-prob", help="exact block hit probability 1 - (1 - delta^N)^T", formatter_class=fmt)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.set_defaults(handler=cmd_hit_prob)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = args.handler
    del args.handler
    try:
        return handler(args)
    except NumericalFailure as exc:
        print(f"zygmund: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"zygmund: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
