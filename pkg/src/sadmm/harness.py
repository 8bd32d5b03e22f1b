"""Experiment harness: graph-guided penalty construction, experiment
configuration, solver runners and CSV trace emission.

The harness owns all I/O. Solver runs are pure given (problem, config),
so independent (solver, seed) runs may execute concurrently; the worker
cap comes from the SADMM_WORKERS environment variable.
"""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
import scipy.sparse

from .datasets import make_classification, parse_libsvm, train_test_split
from .errors import ConfigError, DataFormatError
from .linalg import SparseMatrixCSR, spmv, vstack
from .losses import Dataset, LossKind, LossObjective
from .metrics import (
    CSV_HEADER,
    GAP_FLOOR,
    EpochTimer,
    ReferenceSolution,
    TraceRecord,
    compute_reference,
    evaluate,
    p_criterion,
)
from .problem import ProblemSpec
from .prox import Regularizer
from .solvers import (
    ConstantTheta,
    DecayingTheta,
    FixedOne,
    RateParams,
    SolverConfig,
    asvrg_admm_gc_epoch,
    asvrg_admm_sc_epoch,
    batch_admm_epoch,
    beta_star,
    init_batch_state,
    init_stoc_state,
    init_vr_state,
    optimal_theta_sc,
    stoc_admm_chunk,
    svrg_admm_epoch,
    warn_if_outside_rate_regime,
)
from .vr import delta_b

logger = logging.getLogger(__name__)

PROBLEMS = ("fused_lasso", "gg_logistic", "gg_svm")
SOLVERS = ("batch", "stoc", "svrg", "asvrg_sc", "asvrg_gc")

VR_SOLVERS = ("svrg", "asvrg_sc", "asvrg_gc")


# ---------------------------------------------------------------------------
# graph-guided penalty


@dataclass(frozen=True)
class GraphSpec:
    """Feature-graph edges (i, j, weight) with i < j, no duplicates."""

    edges: tuple

    def __post_init__(self):
        seen = set()
        for i, j, _w in self.edges:
            if not i < j:
                raise DataFormatError(f"edge ({i}, {j}) must have i < j")
            if (i, j) in seen:
                raise DataFormatError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))


def build_graph_spec(data: Dataset, threshold: float) -> GraphSpec:
    """Edges between feature pairs whose empirical correlation magnitude
    exceeds the threshold. Constant features are skipped with a warning."""
    if not 0.0 < threshold < 1.0:
        raise ConfigError("threshold must be in (0, 1)")
    X = data.features._scipy
    n = data.n
    mu = np.asarray(X.mean(axis=0)).ravel()
    second = (X.T @ X).toarray() / n
    cov = second - np.outer(mu, mu)
    var = np.clip(np.diag(cov), 0.0, None)
    sd = np.sqrt(var)
    degenerate = sd <= 1e-12 * max(sd.max(), 1.0)
    if degenerate.any():
        logger.warning(
            "skipping %d constant feature(s) in graph construction", int(degenerate.sum())
        )
    edges = []
    d = data.dim
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    for i in range(d):
        if degenerate[i]:
            continue
        for j in range(i + 1, d):
            if degenerate[j]:
                continue
            c = corr[i, j]
            if abs(c) > threshold:
                edges.append((i, j, float(c)))
    return GraphSpec(tuple(edges))


def graph_matrix(edges, dim: int) -> SparseMatrixCSR:
    """Stack edge-difference rows over an identity block: A = [G; I].

    Each edge (i, j, w) contributes a row with +1 at i and -sign(w) at j,
    so the penalty fuses positively correlated features and ties negatively
    correlated ones. The identity block keeps A full column rank.
    """
    eye = scipy.sparse.identity(dim, format="csr")
    if not edges:
        return SparseMatrixCSR.from_scipy(eye)
    rows, cols, vals = [], [], []
    for r, (i, j, w) in enumerate(edges):
        rows += [r, r]
        cols += [i, j]
        vals += [1.0, -float(np.sign(w))]
    G = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(len(edges), dim))
    return vstack([SparseMatrixCSR.from_scipy(G), SparseMatrixCSR.from_scipy(eye)])


def build_graph_matrix(data: Dataset, threshold: float) -> SparseMatrixCSR:
    """Correlation-threshold graph stacked over the identity."""
    return graph_matrix(build_graph_spec(data, threshold).edges, data.dim)


def save_graph(path, spec: GraphSpec) -> None:
    with open(path, "w") as fh:
        for i, j, w in spec.edges:
            fh.write(f"{i} {j} {repr(float(w))}\n")


def load_graph(path) -> GraphSpec:
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 'i j weight'")
            try:
                edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return GraphSpec(tuple(edges))


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "fused_lasso"
    dataset: str = "synthetic"  # path to a libsvm file, or "synthetic"
    test_dataset: str | None = None
    test_fraction: float = 0.2
    split_seed: int = 0
    synth_n: int = 1000
    synth_d: int = 50
    synth_seed: int = 7
    lambda1: float = 1e-5
    lambda2: float = 1e-2
    huber_width: float = 0.5
    solver: str = "asvrg_gc"
    m: int | None = None  # default: 2n/b for variance-reduced solvers
    eta: float | str = "auto"
    beta: float | str = "auto"
    b: int = 10
    gamma: float | str = 1.0  # benchmark preset; pass "auto" for gamma_min
    theta: float | str = "auto"
    epochs: int = 30
    seeds: tuple = (0,)
    graph_threshold: float = 0.9
    graph_path: str | None = None
    output_dir: str = "runs"
    ref_tol: float = 1e-10
    ref_beta: float = 0.1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if not self.seeds:
            raise ConfigError("need at least one seed")


_INT_KEYS = {"split_seed", "synth_n", "synth_d", "synth_seed", "m", "b", "epochs"}
_FLOAT_KEYS = {
    "test_fraction",
    "lambda1",
    "lambda2",
    "huber_width",
    "graph_threshold",
    "ref_tol",
    "ref_beta",
}
_AUTO_FLOAT_KEYS = {"eta", "beta", "gamma", "theta"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key == "seeds":
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _AUTO_FLOAT_KEYS:
        return raw if raw == "auto" else float(raw)
    if raw.lower() in ("none", ""):
        return None
    return raw


def parse_config_file(path) -> dict:
    """Line-oriented ``key = value`` config; '#' starts a comment."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataFormatError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise DataFormatError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _coerce(key, raw)
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return out


def config_from_file(path, overrides: dict | None = None) -> ExperimentConfig:
    values = parse_config_file(path)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# problem assembly


def loss_kind_for(cfg: ExperimentConfig) -> LossKind:
    if cfg.problem == "fused_lasso":
        return LossKind.logistic()
    if cfg.problem == "gg_logistic":
        return LossKind.l2_logistic(cfg.lambda2)
    return LossKind.huberized_hinge(cfg.lambda2, cfg.huber_width)


def load_datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    if cfg.dataset == "synthetic":
        full = make_classification(cfg.synth_n, cfg.synth_d, seed=cfg.synth_seed)
    else:
        full = parse_libsvm(cfg.dataset)
    if cfg.test_dataset:
        return full, parse_libsvm(cfg.test_dataset, dim=full.dim)
    return train_test_split(full, cfg.test_fraction, cfg.split_seed)


def assemble_problem(cfg: ExperimentConfig) -> tuple[ProblemSpec, Dataset, Dataset, LossKind]:
    train, test = load_datasets(cfg)
    if cfg.graph_path:
        A = graph_matrix(load_graph(cfg.graph_path).edges, train.dim)
    else:
        A = build_graph_matrix(train, cfg.graph_threshold)
    kind = loss_kind_for(cfg)
    problem = ProblemSpec(LossObjective(kind, train), Regularizer(cfg.lambda1), A)
    return problem, train, test, kind


def resolve_solver_config(problem: ProblemSpec, cfg: ExperimentConfig, seed: int) -> SolverConfig:
    """Fill the 'auto' slots of the per-run solver configuration.

    Automatic choices: m = 2n/b for variance-reduced solvers (one trace row
    per n single-sample steps for the decaying-step solver); eta = 1/(8L);
    beta = the rate-optimal penalty when the problem is strongly convex,
    else 1; the constant momentum weight from the optimal-weight formula
    when the whole (eta, beta, theta) trio is automatic and the problem is
    strongly convex, else the largest weight the batch-size bound allows.
    """
    n = problem.f.n
    L = problem.f.smoothness
    mu = problem.f.strong_convexity
    b = cfg.b
    if cfg.solver in VR_SOLVERS:
        m = cfg.m if cfg.m else max(1, (2 * n) // b)
    elif cfg.solver == "stoc":
        m = cfg.m if cfg.m else n
    else:
        m = 1
    beta = cfg.beta
    if beta == "auto":
        beta = beta_star(RateParams.from_problem(problem), problem.spectra) if mu > 0 else 1.0
    eta = cfg.eta
    schedule = FixedOne()
    if cfg.solver == "asvrg_sc":
        if cfg.theta == "auto" and cfg.eta == "auto" and mu > 0:
            params = RateParams.from_problem(problem)
            try:
                theta, _alpha, eta = optimal_theta_sc(m, b, n, params)
            except ConfigError:
                eta = 1.0 / (8.0 * L)
                theta = 1.0 - delta_b(n, b) / (1.0 / (L * eta) - 1.0)
            schedule = ConstantTheta(theta)
        else:
            if eta == "auto":
                eta = 1.0 / (8.0 * L)
            if cfg.theta == "auto":
                theta = 1.0 - delta_b(n, b) / (1.0 / (L * eta) - 1.0)
            else:
                theta = float(cfg.theta)
            schedule = ConstantTheta(theta)
    elif cfg.solver == "asvrg_gc":
        theta0 = None if cfg.theta == "auto" else float(cfg.theta)
        schedule = DecayingTheta(theta0)
    if eta == "auto":
        eta = 1.0 / (8.0 * L) if cfg.solver != "stoc" else 1.0 / L
    return SolverConfig(
        m=m,
        eta=float(eta),
        beta=float(beta),
        b=b,
        gamma=cfg.gamma,
        epochs=cfg.epochs,
        seed=seed,
        schedule=schedule,
    )


# ---------------------------------------------------------------------------
# reference cache


def _dataset_digest(h, data: Dataset):
    F = data.features
    h.update(np.int64([F.rows, F.cols]).tobytes())
    h.update(F.row_offsets.tobytes())
    h.update(F.col_indices.tobytes())
    h.update(F.values.tobytes())
    h.update(data.labels.tobytes())


def reference_key(kind: LossKind, data: Dataset, reg: Regularizer, A: SparseMatrixCSR,
                  tol: float, beta: float) -> str:
    h = hashlib.sha256()
    h.update(repr((kind.kind, kind.lambda2, kind.huber_width, reg.lambda1, tol, beta)).encode())
    _dataset_digest(h, data)
    h.update(A.row_offsets.tobytes())
    h.update(A.col_indices.tobytes())
    h.update(A.values.tobytes())
    return h.hexdigest()


def _save_reference(path: Path, ref: ReferenceSolution) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz.tmp")
    os.close(fd)
    try:
        with open(tmp, "wb") as fh:
            np.savez(
                fh,
                x_star=ref.x_star,
                y_star=ref.y_star,
                lambda_star=ref.lambda_star,
                grad_f_star=ref.grad_f_star,
                h_subgrad_star=ref.h_subgrad_star,
                scalars=np.array(
                    [ref.objective_star, ref.kkt_residual, ref.f_star, ref.h_star, ref.beta, ref.tol]
                ),
            )
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _load_reference(path: Path) -> ReferenceSolution:
    with np.load(path) as z:
        s = z["scalars"]
        return ReferenceSolution(
            x_star=z["x_star"],
            y_star=z["y_star"],
            lambda_star=z["lambda_star"],
            grad_f_star=z["grad_f_star"],
            h_subgrad_star=z["h_subgrad_star"],
            objective_star=float(s[0]),
            kkt_residual=float(s[1]),
            f_star=float(s[2]),
            h_star=float(s[3]),
            beta=float(s[4]),
            tol=float(s[5]),
        )


def get_reference(
    problem: ProblemSpec,
    kind: LossKind,
    data: Dataset,
    tol: float,
    beta: float = 1.0,
    cache_dir=None,
) -> ReferenceSolution:
    """Compute (or load from the content-addressed cache) the certified
    optimum of the instance."""
    if cache_dir is None:
        return compute_reference(problem, tol=tol, beta=beta)
    key = reference_key(kind, data, problem.reg, problem.A, tol, beta)
    path = Path(cache_dir) / f"{key}.npz"
    if path.exists():
        return _load_reference(path)
    ref = compute_reference(problem, tol=tol, beta=beta)
    _save_reference(path, ref)
    return ref


# ---------------------------------------------------------------------------
# runners


_VR_VARIANT = {"svrg": "svrg", "asvrg_sc": "sc", "asvrg_gc": "gc"}
_VR_EPOCH = {
    "svrg": svrg_admm_epoch,
    "asvrg_sc": asvrg_admm_sc_epoch,
    "asvrg_gc": asvrg_admm_gc_epoch,
}


def run_solver(
    problem: ProblemSpec,
    solver: str,
    config: SolverConfig,
    ref: ReferenceSolution | None = None,
    test: Dataset | None = None,
    kind: LossKind | None = None,
) -> list[TraceRecord]:
    """Run one solver for config.epochs trace rows and return the trace.

    Variance-reduced solvers trace their averaged epoch outputs, the batch
    solver its current iterate, and the decaying-step solver its running
    average. Row 0 is the initial point.
    """
    if solver in VR_SOLVERS:
        state = init_vr_state(problem, config, _VR_VARIANT[solver])
        epoch_fn = _VR_EPOCH[solver]
        point = lambda st: (st.snapshot.x_tilde, st.y_tilde)
        if solver != "asvrg_gc":
            warn_if_outside_rate_regime(problem, config, state.theta)
    elif solver == "batch":
        state = init_batch_state(problem, config)
        epoch_fn = batch_admm_epoch
        point = lambda st: (st.x, st.y)
    elif solver == "stoc":
        state = init_stoc_state(problem, config)
        epoch_fn = lambda st, p, c: stoc_admm_chunk(st, p, c, c.m)
        point = lambda st: (st.x_bar, st.y_bar)
    else:
        raise ConfigError(f"unknown solver {solver!r}")

    timer = EpochTimer()

    def record(st) -> TraceRecord:
        x_pt, y_pt = point(st)
        obj = problem.objective(x_pt)
        if ref is not None:
            gap = max(obj - ref.objective_star, GAP_FLOOR)
            p_val = p_criterion(x_pt, y_pt, ref, problem)
        else:
            gap = float("nan")
            p_val = float("nan")
        if test is not None and kind is not None:
            t_loss, t_acc = evaluate(x_pt, test, kind)
        else:
            t_loss = t_acc = float("nan")
        cv = float(np.linalg.norm(spmv(problem.A, x_pt) - y_pt))
        return TraceRecord(
            epoch=st.epoch,
            wall_seconds=timer.total,
            passes=st.grad_evals / problem.f.n,
            objective=obj,
            objective_gap=gap,
            p_criterion=p_val,
            constraint_violation=cv,
            test_loss=t_loss,
            test_accuracy=t_acc,
            theta=st.theta,
            sup_z=st.sup_z,
            sup_lambda=st.sup_lambda,
        )

    records = [record(state)]
    for _ in range(config.epochs):
        with timer:
            epoch_fn(state, problem, config)
        records.append(record(state))
    return records


def write_trace_csv(path, records) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(r.to_row() + "\n")


def read_trace_csv(path) -> list[TraceRecord]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise DataFormatError(f"{path}: unexpected trace header")
        return [TraceRecord.from_row(line) for line in fh if line.strip()]


def median_summary(traces: list[list[TraceRecord]]) -> list[TraceRecord]:
    """Per-epoch medians across seeds (all traces must share epoch counts)."""
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError("traces have differing lengths")
    out = []
    names = [f.name for f in fields(TraceRecord)]
    for rows in zip(*traces):
        vals = {
            name: (rows[0].epoch if name == "epoch" else float(np.median([getattr(r, name) for r in rows])))
            for name in names
        }
        out.append(TraceRecord(**vals))
    return out


def _worker_cap() -> int:
    try:
        return max(1, int(os.environ.get("SADMM_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run cfg.solver for every seed, write one CSV per (solver, seed) plus
    a per-epoch median summary; returns the written paths."""
    problem, train, test, kind = assemble_problem(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ref = get_reference(
        problem, kind, train, tol=cfg.ref_tol, beta=cfg.ref_beta, cache_dir=out_dir / "refcache"
    )

    def one_seed(seed: int):
        config = resolve_solver_config(problem, cfg, seed)
        recs = run_solver(problem, cfg.solver, config, ref=ref, test=test, kind=kind)
        path = out_dir / f"{cfg.problem}_{cfg.solver}_seed{seed}.csv"
        write_trace_csv(path, recs)
        return path, recs

    workers = _worker_cap()
    if workers > 1 and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_seed, cfg.seeds))
    else:
        results = [one_seed(s) for s in cfg.seeds]
    paths = [p for p, _ in results]
    summary = median_summary([r for _, r in results])
    summary_path = out_dir / f"{cfg.problem}_{cfg.solver}_summary.csv"
    write_trace_csv(summary_path, summary)
    meta_path = out_dir / f"{cfg.problem}_{cfg.solver}_meta.txt"
    with open(meta_path, "w") as fh:
        fh.write(f"workers = {workers}\n")
        for f_ in fields(cfg):
            fh.write(f"{f_.name} = {getattr(cfg, f_.name)}\n")
    return {
        "traces": paths,
        "summary": summary_path,
        "meta": meta_path,
        "reference_objective": ref.objective_star,
    }


def grid_search_eta_beta(
    problem: ProblemSpec,
    solver: str,
    cfg: ExperimentConfig,
    ref: ReferenceSolution,
    etas=None,
    betas=None,
    epochs: int = 4,
    seed: int = 0,
) -> tuple[float, float]:
    """Pick (eta, beta) minimizing the final objective gap of a short run."""
    L = problem.f.smoothness
    if etas is None:
        if solver == "stoc":
            etas = [16.0 / L, 8.0 / L, 4.0 / L, 1.0 / L]
        else:
            etas = [1.0 / (2.5 * L), 1.0 / (4.0 * L), 1.0 / (8.0 * L), 1.0 / (16.0 * L)]
    if betas is None:
        betas = [0.01, 0.1, 1.0, 10.0]
    best = (float("inf"), None, None)
    for eta in etas:
        for beta in betas:
            trial = replace(cfg, solver=solver, eta=eta, beta=beta, epochs=epochs)
            config = resolve_solver_config(problem, trial, seed)
            try:
                recs = run_solver(problem, solver, config, ref=ref)
            except Exception as exc:  # diverging settings are just skipped
                logger.info("grid point eta=%.3g beta=%.3g failed: %s", eta, beta, exc)
                continue
            gap = recs[-1].objective_gap
            if np.isfinite(gap) and gap < best[0]:
                best = (gap, eta, beta)
    if best[1] is None:
        raise ConfigError("no grid point produced a finite objective gap")
    return best[1], best[2]
