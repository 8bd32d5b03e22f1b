#!/usr/bin/env python3
"""Grid-search eta and beta for one solver on a configured experiment.

Prints the best pair (by final objective gap of a short run) so it can be
pasted into a config file.
"""

import argparse
import warnings

from sadmm.harness import (
    assemble_problem,
    config_from_file,
    get_reference,
    grid_search_eta_beta,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", required=True)
    ap.add_argument("--solver", default=None)
    ap.add_argument("--epochs", type=int, default=6, help="length of each trial run")
    args = ap.parse_args()

    cfg = config_from_file(args.config, {"solver": args.solver} if args.solver else None)
    problem, train, _test, kind = assemble_problem(cfg)
    from pathlib import Path

    ref = get_reference(problem, kind, train, tol=cfg.ref_tol, beta=cfg.ref_beta,
                        cache_dir=Path(cfg.output_dir) / "refcache")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eta, beta = grid_search_eta_beta(problem, cfg.solver, cfg, ref, epochs=args.epochs)
    print(f"solver = {cfg.solver}")
    print(f"eta = {eta!r}")
    print(f"beta = {beta!r}")


if __name__ == "__main__":
    main()
