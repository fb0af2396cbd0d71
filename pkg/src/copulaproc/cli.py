"""Command line interface: ``copulaproc <subcommand> [options]``.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments as ex
from . import io as cio
from ._validation import DomainError, InvalidArgumentError, QuadratureError
from .copulas import check_condition_2_1, parse_model
from .empirical import empirical_copula, hat_C_process, pseudo_observations, unit_lattice
from .pickands import pickands_estimate, simplex_grid
from .rank import parse_score, rank_autocorrelation
from .rng import check_seed, default_seed, stream
from .simulation import generate, parse_generator

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ConfigError(message)


def _seed(text):
    try:
        return check_seed(int(text, 0))
    except (ValueError, InvalidArgumentError):
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _on_off(text):
    if text.lower() in ("on", "true", "1", "yes"):
        return True
    if text.lower() in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help="master seed (default: $COPULA_PROC_SEED or a fixed value)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--timing", action="store_true", help="include wall-clock time in reports")

    p = _Parser(prog="copulaproc", description="Empirical copula processes and their applications.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="draw a sample from a generator")
    s.add_argument("--gen", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--latent", default=None, help="also write the latent uniforms here")

    s = sub.add_parser("ecop", parents=[common], help="empirical copula (process) on a lattice")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--m", type=int, default=10, help="lattice {0, 1/m, ..., 1}^d")
    s.add_argument("--model", default=None, help="evaluate sqrt(n)(C_n - C) for this model")

    s = sub.add_parser("wdist", parents=[common], help="weighted distance convergence study")
    s.add_argument("--gen", required=True)
    s.add_argument("--ns", type=_int_list, default=[200, 2000])
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--omega", type=float, default=0.25)
    s.add_argument("--c", type=float, default=0.5)
    s.add_argument("--m", type=int, default=128)

    s = sub.add_parser("conditions", parents=[common], help="empirical condition diagnostics")
    s.add_argument("--gen", required=True)
    s.add_argument("--ns", type=_int_list, default=[500, 2000, 8000])
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--omega", type=float, default=0.25)
    s.add_argument("--lam", type=float, default=0.5)
    s.add_argument("--theta3", type=float, default=1.0)
    s.add_argument("--mu", type=float, default=0.3)
    s.add_argument("--m", type=int, default=32)

    s = sub.add_parser("rank-clt", parents=[common], help="rank statistic CLT study")
    s.add_argument("--gen", default="iid:indep")
    s.add_argument("--score", default="vdw")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--sigma2", type=_on_off, default=None, help="on|off (default: on for i.i.d.)")

    s = sub.add_parser("autocorr", parents=[common], help="rank autocorrelation")
    s.add_argument("--in", dest="inp", default=None, help="series CSV; prints its autocorrelation")
    s.add_argument("--a", type=float, default=0.6)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--score", default="vdw")
    s.add_argument("--ns", type=_int_list, default=[500, 2000])
    s.add_argument("--reps", type=int, default=1000)

    s = sub.add_parser("pickands", parents=[common], help="Pickands estimator on a grid")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--wgrid", type=int, default=101)
    s.add_argument("--clip", type=_on_off, default=False)
    s.add_argument("--true", dest="true_model", default=None)

    s = sub.add_parser("hk-verify", parents=[common], help="fuzz the grid calculus")
    s.add_argument("--cases", type=int, default=500)
    s.add_argument("--max-size", type=int, default=16)

    s = sub.add_parser("check-model", parents=[common], help="numerical smoothness check")
    s.add_argument("--model", required=True)
    s.add_argument("--m", type=int, default=32)
    s.add_argument("--eps", type=float, default=1e-3)
    return p


def _write_text(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _table_report(experiment, config, columns, rows):
    return {"experiment": experiment, "config": config, "version": ex.VERSION,
            "table": {"columns": columns, "rows": rows}}


def _run(args):
    seed = args.seed if args.seed is not None else default_seed()
    fmt = args.format
    cmd = args.command

    if cmd == "simulate":
        gen = parse_generator(args.gen)
        x, latent = generate(gen, args.n, stream(seed, 0))
        if fmt == "json":
            rep = _table_report("simulate", {"gen": gen.describe(), "n": args.n, "seed": seed},
                                [f"x{j + 1}" for j in range(x.shape[1])], x.tolist())
            ex.emit(rep, "json", args.out)
        else:
            _write_text(cio.format_sample_csv(x), args.out)
        if args.latent:
            cio.write_sample_csv(args.latent, latent.values, prefix="u")
        return

    if cmd == "ecop":
        x = cio.read_sample_csv(args.inp)
        if args.m < 1:
            raise InvalidArgumentError("m must be positive")
        p = pseudo_observations(x)
        pts = unit_lattice(args.m, x.shape[1]).reshape(-1, x.shape[1])
        if args.model:
            model = parse_model(args.model)
            vals = hat_C_process(p, model, pts)
        else:
            vals = empirical_copula(p, pts)
        cols = [f"u{j + 1}" for j in range(x.shape[1])] + ["value"]
        rep = _table_report("ecop", {"in": args.inp, "m": args.m, "model": args.model},
                            cols, np.column_stack([pts, vals]).tolist())
        ex.emit(rep, fmt or "csv", args.out, args.timing)
        return

    if cmd == "wdist":
        rep = ex.run_wdist_study(args.gen, args.ns, args.reps, args.omega, args.c, args.m,
                                 seed, args.threads)
    elif cmd == "conditions":
        rep = ex.run_conditions_diagnostics(args.gen, args.ns, args.reps, args.omega, args.lam,
                                            args.theta3, args.mu, m=args.m, seed=seed,
                                            threads=args.threads)
    elif cmd == "rank-clt":
        rep = ex.clt_study(args.gen, args.score, args.n, args.reps, seed, args.threads, args.sigma2)
    elif cmd == "autocorr":
        if args.inp:
            y = cio.read_sample_csv(args.inp)[:, 0]
            J = parse_score(args.score)
            if J.factors is None:
                raise InvalidArgumentError(f"score {J.name!r} has no univariate factors")
            r = rank_autocorrelation(y, args.k, *J.factors)
            rep = _table_report("autocorr", {"in": args.inp, "k": args.k, "score": J.name},
                                ["k", "autocorrelation"], [[args.k, r]])
        else:
            rep = ex.autocorr_study(args.a, args.k, args.score, args.ns, args.reps, seed,
                                    args.threads)
    elif cmd == "pickands":
        x = cio.read_sample_csv(args.inp)
        if x.shape[1] != 2:
            raise InvalidArgumentError("the pickands subcommand expects bivariate data")
        if args.wgrid < 2:
            raise InvalidArgumentError("wgrid must be at least 2")
        w = simplex_grid(args.wgrid)
        p = pseudo_observations(x)
        est = pickands_estimate(p, w)
        cols, data = ["w", "estimate"], [w[:, 0], est]
        if args.clip:
            cols.append("clipped")
            data.append(pickands_estimate(p, w, clip=True))
        if args.true_model:
            cols.append("true")
            data.append(np.asarray(parse_model(args.true_model).pickands(w), dtype=float))
        rep = _table_report("pickands", {"in": args.inp, "wgrid": args.wgrid, "clip": args.clip,
                                         "true": args.true_model},
                            cols, np.column_stack(data).tolist())
        fmt = fmt or "csv"
    elif cmd == "hk-verify":
        rep = ex.run_hk_fuzz(args.cases, args.max_size, seed)
    elif cmd == "check-model":
        model = parse_model(args.model)
        res = check_condition_2_1(model, args.m, args.eps)
        res = {k: (list(v) if isinstance(v, tuple) else v) for k, v in res.items()}
        rep = {"experiment": "check-model", "config": {"model": model.spec_string(), "m": args.m,
               "eps": args.eps}, "cells": [res], "version": ex.VERSION}
    else:  # pragma: no cover - argparse guards this
        raise InvalidArgumentError(f"unknown command {cmd!r}")
    ex.emit(rep, fmt or "json", args.out, args.timing)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _run(args)
    except (_ConfigError, InvalidArgumentError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QuadratureError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
