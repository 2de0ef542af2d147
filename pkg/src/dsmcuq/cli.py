"""Command line front end: run | convergence | compare-exact.

Every config-file key is mirrored by a flag; flags win over the file.
Exits 0 on success, 2 on configuration or replay errors with a one-line
diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import sys

from .runner import (SimulationConfig, compare_exact, config_from_file,
                     config_from_mapping, convergence_study, run)

_FLAGS = [
    ("--test", str, "test family: Kac | Maxwell2D | VHS | VHSBivariate"),
    ("--n", int, "number of particles"),
    ("--m", int, "gPC order"),
    ("--h", int, "quadrature order (default: m)"),
    ("--dt", float, "time step"),
    ("--tmax", float, "final time"),
    ("--seed", int, "RNG seed"),
    ("--kappa", float, "uncertainty amplitude (univariate tests)"),
    ("--kappa1", float, "bivariate: temperature uncertainty"),
    ("--kappa2", float, "bivariate: kernel exponent uncertainty"),
    ("--gamma", float, "constant VHS exponent"),
    ("--c-gamma", float, "VHS kernel constant"),
    ("--mode", str, "regularization: indicator | sigmoid | thermalized"),
    ("--beta", float, "sigmoid sharpness"),
    ("--bounds-lo", float, "reconstruction window lower bound"),
    ("--bounds-hi", float, "reconstruction window upper bound"),
    ("--n-v", int, "reconstruction bins per axis"),
    ("--coupling", str, "initial sampling coupling: scaling | sort"),
    ("--out", str, "output directory"),
    ("--replay-tree", str, "collision tree file to replay"),
]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    for flag, typ, help_text in _FLAGS:
        p.add_argument(flag, type=typ, help=help_text, default=None)
    p.add_argument("--record-tree", action="store_true", default=None,
                   help="record the collision tree to the output directory")


def _build_config(args) -> SimulationConfig:
    base = config_from_file(args.config) if args.config else SimulationConfig()
    overrides = {}
    for flag, _, _ in _FLAGS:
        name = flag.lstrip("-").replace("-", "_")
        val = getattr(args, name)
        if val is not None:
            overrides[name] = val
    if args.record_tree:
        overrides["record_tree"] = True
    merged = {k: v for k, v in base.kv_items()}
    merged.update(overrides)
    return config_from_mapping(merged)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dsmcuq",
        description="DSMC with stochastic Galerkin uncertainty propagation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one configuration")
    _add_config_flags(p_run)

    p_conv = sub.add_parser("convergence",
                            help="record a reference tree and replay at lower M")
    _add_config_flags(p_conv)
    p_conv.add_argument("--m-list", required=True,
                        help="comma separated gPC orders, e.g. 1,2,4,8")
    p_conv.add_argument("--m-ref", type=int, required=True,
                        help="reference gPC order")

    p_cmp = sub.add_parser("compare-exact",
                           help="run and compare against the exact solution")
    _add_config_flags(p_cmp)

    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        if args.command == "run":
            res = run(config)
            print(f"run complete: {len(res.out_files)} files in {config.out}")
        elif args.command == "convergence":
            m_list = [int(x) for x in args.m_list.split(",") if x.strip()]
            res = convergence_study(config, m_list, args.m_ref)
            final = {m: res.errors[m][-1] for m in m_list}
            print(f"convergence table written to {res.csv_path}")
            for m in m_list:
                print(f"  M={m:3d}  L2 error at t_max = {final[m]:.6e}")
        else:
            res = compare_exact(config)
            print(f"comparison written to {res.csv_path}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
