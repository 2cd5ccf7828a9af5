"""Simulation sweeps, edge-list I/O, real-data helpers and result emission."""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .dcmm import DcmmParams, build_omega, gen_theta, make_pi, make_planted_b, sample_adjacency
from .errors import DataError, InvalidParametersError, ParseError, PrimeError, RegularizationFailure
from .estimator import EstimatorConfig, estimate_memberships
from .evaluation import permutation_loss
from .privacy import DebiasedMatrix, PrivacyParams, debias, symmetric_edge_flip
from .streams import ROLE_FLIP, ROLE_GRAPH, ROLE_MODEL, make_stream
from .vertex_hunting import HuntConfig

log = logging.getLogger(__name__)

CSV_HEADER = "b_n,epsilon,mean_loss,std_loss,reps,runtime_ms,warnings"


def _fmt_eps(eps):
    return "inf" if math.isinf(eps) else repr(float(eps))


# ---------------------------------------------------------------------------
# simulation sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    n: int
    K: int
    bn_grid: tuple
    eps_grid: tuple  # math.inf marks the non-private run
    reps: int
    seed: int
    beta_n: float = 0.9
    theta_lo: float = 0.3
    theta_hi: float = 5.0
    pure_frac: float = 0.5
    tau: float = 1.0
    c: float = 0.01
    gamma: float = 0.5
    hunt: HuntConfig = field(default_factory=HuntConfig)

    def __post_init__(self):
        object.__setattr__(self, "bn_grid", tuple(float(b) for b in self.bn_grid))
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        if self.reps < 1:
            raise InvalidParametersError("reps must be >= 1")
        if not self.bn_grid or not self.eps_grid:
            raise InvalidParametersError("b_n and epsilon grids must be non-empty")
        if any(e <= 0 for e in self.eps_grid):
            raise InvalidParametersError("epsilon values must be > 0 (use inf for non-private)")

    def estimator_config(self):
        return EstimatorConfig(K=self.K, tau=self.tau, c=self.c, gamma=self.gamma, hunt=self.hunt)

    def metadata(self):
        meta = asdict(self)
        meta.pop("hunt")
        meta["bn_grid"] = list(self.bn_grid)
        meta["eps_grid"] = [_fmt_eps(e) for e in self.eps_grid]
        meta["pi_design"] = f"{self.pure_frac:g} pure (balanced) + Dirichlet(1) mixed rows"
        return meta


@dataclass(frozen=True)
class SweepRow:
    b_n: float
    epsilon: float
    mean_loss: float
    std_loss: float
    reps: int
    runtime_ms: float
    warnings: int


def sweep_model(spec, b_n, rep):
    """DCMM parameters for replication ``rep`` at degree level ``b_n``.

    The raw uniforms behind theta and Pi depend only on (seed, rep), so models
    at different b_n share them.
    """
    rng = make_stream(spec.seed, rep, ROLE_MODEL)
    theta = gen_theta(spec.n, b_n, spec.theta_lo, spec.theta_hi, rng)
    pi = make_pi(spec.n, spec.K, spec.pure_frac, rng)
    return DcmmParams(theta, pi, make_planted_b(spec.K, spec.beta_n))


def _run_task(args):
    spec, bn_index, rep = args
    b_n = spec.bn_grid[bn_index]
    try:
        params = sweep_model(spec, b_n, rep)
        a = sample_adjacency(build_omega(params), make_stream(spec.seed, rep, ROLE_GRAPH))
    except PrimeError as exc:
        log.warning("b_n=%g rep=%d: invalid model: %s", b_n, rep, exc)
        return [(b_n, eps, rep, np.nan, 0.0, True) for eps in spec.eps_grid]
    cfg = spec.estimator_config()
    out = []
    for eps in spec.eps_grid:
        t0 = time.perf_counter()
        loss, warned = np.nan, False
        try:
            if math.isinf(eps):
                m = DebiasedMatrix.nonprivate(a)
            else:
                flip = make_stream(spec.seed, rep, ROLE_FLIP)
                m = debias(symmetric_edge_flip(a, PrivacyParams.from_epsilon(eps), flip))
            est = estimate_memberships(m, cfg)
            loss = permutation_loss(est.pi_hat, params.pi).loss
            warned = est.warning is not None
        except PrimeError as exc:
            log.warning("b_n=%g eps=%s rep=%d failed: %s", b_n, _fmt_eps(eps), rep, exc)
            warned = True
        out.append((b_n, eps, rep, loss, 1000.0 * (time.perf_counter() - t0), warned))
    return out


def collect_replications(spec, workers=1):
    """Per-replication records keyed by (b_n, epsilon) then rep index.

    Each record is (loss, runtime_ms, warned); loss is NaN for failed runs.
    """
    tasks = [(spec, i, r) for i in range(len(spec.bn_grid)) for r in range(spec.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]
    cells = {}
    for batch in results:
        for b_n, eps, rep, loss, ms, warned in batch:
            cells.setdefault((b_n, eps), {})[rep] = (loss, ms, warned)
    return cells


def rep_losses(cells, b_n, eps):
    """Loss array over replications (NaN where the run failed), in rep order."""
    cell = cells[(float(b_n), float(eps))]
    return np.array([cell[r][0] for r in sorted(cell)])


def summarize(spec, cells):
    rows = []
    for b_n in spec.bn_grid:
        for eps in spec.eps_grid:
            recs = [cells[(b_n, eps)][r] for r in sorted(cells[(b_n, eps)])]
            losses = np.array([x[0] for x in recs if np.isfinite(x[0])])
            std = float(losses.std(ddof=1)) if losses.size > 1 else 0.0
            rows.append(SweepRow(
                b_n=b_n,
                epsilon=eps,
                mean_loss=float(losses.mean()) if losses.size else math.nan,
                std_loss=std,
                reps=int(losses.size),
                runtime_ms=float(np.mean([x[1] for x in recs])),
                warnings=int(sum(x[2] for x in recs)),
            ))
    return rows


def run_sweep(spec, workers=1):
    """Run every (b_n, epsilon) cell for ``spec.reps`` replications.

    Returns SweepRow objects in grid order (b_n outer, epsilon inner).  Failed
    replications count as warnings and are excluded from the loss statistics.
    """
    return summarize(spec, collect_replications(spec, workers))


def sweep_table(rows):
    """{(b_n, epsilon): SweepRow}."""
    return {(r.b_n, r.epsilon): r for r in rows}


# ---------------------------------------------------------------------------
# result emission
# ---------------------------------------------------------------------------

def format_csv(rows, meta=None, timing=True):
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(CSV_HEADER)
    for r in rows:
        runtime = repr(round(r.runtime_ms, 3)) if timing else "nan"
        lines.append(",".join([
            repr(r.b_n), _fmt_eps(r.epsilon), repr(r.mean_loss), repr(r.std_loss),
            str(r.reps), runtime, str(r.warnings),
        ]))
    return "\n".join(lines) + "\n"


def _plot(curves, xlabel, title, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, xs, ys) in enumerate(curves):
        (line,) = ax.plot(xs, ys, marker="o", label=label)
        line.set_gid(f"curve-{i}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean loss")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return len(curves)


def emit_results(rows, out_dir, formats=("csv",), meta=None, timing=True):
    """Write ``sweep.csv`` and, if requested, SVG line charts into ``out_dir``.

    Returns the list of written paths.
    """
    if not rows:
        raise ValueError("nothing to emit")
    formats = set(formats or ("csv",)) | {"csv"}
    unknown = formats - {"csv", "svg"}
    if unknown:
        raise ValueError(f"unknown formats {sorted(unknown)}")
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = [os.path.join(out_dir, "sweep.csv")]
        with open(paths[0], "w", newline="") as fh:
            fh.write(format_csv(rows, meta, timing))
        if "svg" in formats:
            bns = sorted({r.b_n for r in rows})
            epss = sorted({r.epsilon for r in rows})
            table = sweep_table(rows)
            by_eps = [
                (f"eps={_fmt_eps(e)}" if not math.isinf(e) else "non-private",
                 bns, [table[(b, e)].mean_loss for b in bns])
                for e in epss
            ]
            finite = [e for e in epss if not math.isinf(e)]
            by_bn = [(f"b_n={b:g}", finite, [table[(b, e)].mean_loss for e in finite]) for b in bns]
            paths.append(os.path.join(out_dir, "loss_vs_bn.svg"))
            _plot(by_eps, "b_n", "loss vs b_n", paths[-1])
            if finite:
                paths.append(os.path.join(out_dir, "loss_vs_eps.svg"))
                _plot(by_bn, "epsilon", "loss vs epsilon", paths[-1])
    except OSError as exc:
        raise DataError(f"cannot write results to {out_dir}: {exc}") from exc
    return paths


# ---------------------------------------------------------------------------
# edge lists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeListGraph:
    labels: tuple  # dense index -> external label
    adjacency: np.ndarray
    self_loops: int = 0

    @property
    def n(self):
        return len(self.labels)

    @property
    def n_edges(self):
        return int(np.triu(self.adjacency, 1).sum())

    @property
    def index(self):
        return {lab: i for i, lab in enumerate(self.labels)}


def parse_edge_lines(lines):
    index = {}
    pairs = []
    self_loops = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, got {len(tokens)}", line=lineno)
        u, v = (index.setdefault(t, len(index)) for t in tokens)
        if u == v:
            self_loops += 1
            continue
        pairs.append((u, v))
    n = len(index)
    a = np.zeros((n, n), dtype=np.uint8)
    if pairs:
        uv = np.array(pairs)
        a[uv[:, 0], uv[:, 1]] = 1
        a[uv[:, 1], uv[:, 0]] = 1
    if self_loops:
        log.info("dropped %d self-loop(s)", self_loops)
    labels = tuple(sorted(index, key=index.get))
    return EdgeListGraph(labels, a, self_loops)


def load_edge_list(path):
    """Read a whitespace-separated ``u v`` edge list ('#' starts a comment line)."""
    try:
        with open(path) as fh:
            return parse_edge_lines(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def write_edge_list(graph, path, adjacency=None):
    """Write the upper-triangular edges of ``adjacency`` (default: the graph's own)."""
    a = graph.adjacency if adjacency is None else adjacency
    iu, ju = np.nonzero(np.triu(a, 1))
    try:
        with open(path, "w") as fh:
            for i, j in zip(iu, ju):
                fh.write(f"{graph.labels[i]} {graph.labels[j]}\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_pi_csv(path):
    """Read a ``node,pi_1,...,pi_K`` file; returns (labels, matrix)."""
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if not header or header[0] != "node" or len(header) < 3:
                raise ParseError("header must be node,pi_1,...,pi_K", line=1)
            labels, rows = [], []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                if len(parts) != len(header):
                    raise ParseError(f"expected {len(header)} fields", line=lineno)
                labels.append(parts[0])
                try:
                    rows.append([float(x) for x in parts[1:]])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return labels, np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)


def write_pi_csv(path, labels, pi_hat):
    K = pi_hat.shape[1]
    try:
        with open(path, "w") as fh:
            fh.write("node," + ",".join(f"pi_{k + 1}" for k in range(K)) + "\n")
            for lab, row in zip(labels, pi_hat):
                fh.write(str(lab) + "," + ",".join(f"{x:.17g}" for x in row) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# real-data analyses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    epsilon: float
    mean_distance: float
    distances: tuple
    failures: int
    taus: tuple = ()  # regularization actually used per successful draw


def _estimate_with_tau_ladder(m, cfg, max_doublings):
    """Estimate, doubling tau on regularization failure; returns (estimate, tau)."""
    for step in range(max_doublings + 1):
        try:
            return estimate_memberships(m, cfg), cfg.tau
        except RegularizationFailure:
            if step == max_doublings:
                raise
            cfg = replace(cfg, tau=2.0 * cfg.tau)
            log.info("regularization failed; retrying with tau=%g", cfg.tau)


def private_vs_nonprivate_curve(graph, K, eps_grid, cfg=None, seed=0, reps=1, max_tau_doublings=6):
    """Loss between the non-private estimate and private estimates across epsilon.

    Each epsilon is averaged over ``reps`` independent mechanism draws.  At small
    epsilon the debiased degrees can be negative enough that H is not positive;
    such a draw is retried with tau doubled, at most ``max_tau_doublings``
    times, before it counts as a failure.
    """
    a = graph.adjacency if isinstance(graph, EdgeListGraph) else np.asarray(graph)
    cfg = cfg or EstimatorConfig(K)
    base = estimate_memberships(DebiasedMatrix.nonprivate(a), cfg).pi_hat
    points = []
    for e_idx, eps in enumerate(eps_grid):
        dists, taus, failures = [], [], 0
        for r in range(reps):
            flip = make_stream(seed, r, ROLE_FLIP, e_idx)
            try:
                m = debias(symmetric_edge_flip(a, PrivacyParams.from_epsilon(eps), flip))
                est, tau = _estimate_with_tau_ladder(m, cfg, max_tau_doublings)
                dists.append(permutation_loss(est.pi_hat, base).loss)
                taus.append(tau)
            except PrimeError as exc:
                log.warning("eps=%g rep=%d failed: %s", eps, r, exc)
                failures += 1
        mean = float(np.mean(dists)) if dists else math.nan
        points.append(CurvePoint(float(eps), mean, tuple(dists), failures, tuple(taus)))
    return points


FIVE_BIN_LABELS = (
    "highly conservative",
    "moderately conservative",
    "neutral",
    "moderately liberal",
    "highly liberal",
)
FIVE_BIN_CUTS = (0.2, 0.4, 0.6, 0.8)


def alignment_bins(pi_hat, scheme="two_bin", liberal_col=0, strong_cut=5 / 8, cuts=FIVE_BIN_CUTS):
    """Per-node alignment labels.

    ``two_bin``: V(i) = max_j pi_hat[i, j]; "weak" for V(i) <= strong_cut,
    "strong" above it.  ``five_bin`` (K = 2): bins of the liberal-column
    likelihood, closed on the right, e.g. (0.4, 0.6] is "neutral".
    """
    pi_hat = np.asarray(getattr(pi_hat, "pi_hat", pi_hat), dtype=float)
    if scheme == "two_bin":
        v = pi_hat.max(axis=1)
        return np.where(v > strong_cut, "strong", "weak")
    if scheme == "five_bin":
        if pi_hat.shape[1] != 2:
            raise InvalidParametersError("five_bin requires K = 2")
        x = pi_hat[:, liberal_col]
        idx = np.searchsorted(np.asarray(cuts), x, side="left")
        return np.asarray(FIVE_BIN_LABELS, dtype=object)[idx].astype(str)
    raise InvalidParametersError(f"unknown scheme {scheme!r}")


def hard_labels(pi_hat, rng=None):
    """argmax community per node with ties broken at random."""
    pi_hat = np.asarray(getattr(pi_hat, "pi_hat", pi_hat), dtype=float)
    rng = np.random.default_rng(rng)
    noise = rng.random(pi_hat.shape) * 1e-12
    top = pi_hat >= pi_hat.max(axis=1, keepdims=True) - 1e-15
    return np.argmax(np.where(top, 1.0 + noise, 0.0), axis=1)
