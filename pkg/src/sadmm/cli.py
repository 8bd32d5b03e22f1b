"""Command-line entry point: run experiments, build references, inspect spectra."""

from __future__ import annotations

import argparse
import logging
import sys

from .datasets import parse_libsvm
from .harness import (
    assemble_problem,
    build_graph_spec,
    config_from_file,
    get_reference,
    graph_matrix,
    run_experiment,
)


def _add_run(sub):
    p = sub.add_parser("run", help="run one solver over the configured seeds")
    p.add_argument("--config", required=True, help="key = value experiment config file")
    p.add_argument("--solver", help="override the configured solver")
    p.add_argument("--seeds", "--seed", dest="seeds", help="comma-separated seed list override")
    p.add_argument("--epochs", type=int, help="override the epoch count")
    p.add_argument("--output-dir", help="override the output directory")
    p.add_argument("--eta", help="step size or 'auto'")
    p.add_argument("--beta", help="penalty weight or 'auto'")
    p.add_argument("--gamma", help="proximal-metric constant or 'auto'")
    p.add_argument("--theta", help="momentum weight or 'auto'")


def _add_reference(sub):
    p = sub.add_parser("reference", help="compute and cache the certified optimum")
    p.add_argument("--config", required=True)
    p.add_argument("--tol", type=float, default=None, help="KKT residual tolerance")


def _add_spectra(sub):
    p = sub.add_parser("spectra", help="spectral constants of the graph-guided penalty")
    p.add_argument("--data", required=True, help="libsvm data file")
    p.add_argument("--threshold", type=float, required=True, help="correlation threshold")


def _auto_or_float(raw):
    if raw is None:
        return None
    return raw if raw == "auto" else float(raw)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(prog="sadmm")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_reference(sub)
    _add_spectra(sub)
    args = parser.parse_args(argv)

    if args.command == "run":
        overrides = {
            "solver": args.solver,
            "epochs": args.epochs,
            "output_dir": args.output_dir,
            "eta": _auto_or_float(args.eta),
            "beta": _auto_or_float(args.beta),
            "gamma": _auto_or_float(args.gamma),
            "theta": _auto_or_float(args.theta),
        }
        if args.seeds:
            overrides["seeds"] = tuple(int(s) for s in args.seeds.replace(",", " ").split())
        cfg = config_from_file(args.config, overrides)
        result = run_experiment(cfg)
        print(f"reference objective: {result['reference_objective']!r}")
        for path in result["traces"]:
            print(f"trace: {path}")
        print(f"summary: {result['summary']}")
        return 0

    if args.command == "reference":
        overrides = {"ref_tol": args.tol} if args.tol is not None else {}
        cfg = config_from_file(args.config, overrides)
        problem, train, _test, kind = assemble_problem(cfg)
        from pathlib import Path

        ref = get_reference(
            problem,
            kind,
            train,
            tol=cfg.ref_tol,
            beta=cfg.ref_beta,
            cache_dir=Path(cfg.output_dir) / "refcache",
        )
        print(f"objective_star = {ref.objective_star!r}")
        print(f"kkt_residual = {ref.kkt_residual!r}")
        return 0

    if args.command == "spectra":
        data = parse_libsvm(args.data)
        spec = build_graph_spec(data, args.threshold)
        A = graph_matrix(spec.edges, data.dim)
        from .linalg import compute_spectral_constants

        sc = compute_spectral_constants(A)
        print(f"edges = {len(spec.edges)}")
        print(f"d1 = {A.cols}")
        print(f"d2 = {A.rows}")
        print(f"ata_norm = {sc.ata_norm!r}")
        print(f"aat_min_eig = {sc.aat_min_eig!r}")
        print(f"omega = {sc.ata_norm / sc.aat_min_eig!r}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
