"""Exact t-SNE in NumPy.

Dense O(n^2) implementation sized for school cohorts (a few hundred
children). Every step is deterministic for a fixed row order and seed:
initialization draws from ``numpy.random.default_rng(seed)`` and all
reductions run in NumPy's fixed evaluation order.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .dataset import Cohort
from .errors import (
    CalibrationFailed,
    CohortTooSmall,
    DegenerateInput,
    PerplexityInfeasible,
    ShapeMismatch,
)

log = logging.getLogger(__name__)

P_FLOOR = 1e-12
INIT_SCALE = 1e-4
DEFAULT_PERPLEXITY = 30.0
MIN_AUTO_LEARNING_RATE = 50.0
MIN_COHORT = 4
_MIN_GAIN = 0.01
_Q_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class TsneParams:
    """Optimizer settings for one embedding run.

    ``perplexity=None`` means the default of 30, clamped to (n - 1) / 3 for
    small cohorts. An explicit value is used as given and must be < n - 1.
    ``learning_rate=None`` scales the step with cohort size,
    max(n / (4 * early_exaggeration_factor), 50); a fixed 200 overshoots on
    cohorts of a few dozen children.
    """

    perplexity: float | None = None
    learning_rate: float | None = None
    n_iter: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = 0
    perplexity_tolerance: float = 1e-5
    perplexity_max_bisection_steps: int = 50
    use_gains: bool = True

    def __post_init__(self):
        if self.perplexity is not None and not self.perplexity > 0:
            raise ValueError("perplexity must be positive")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if not self.early_exaggeration_factor > 0:
            raise ValueError("early_exaggeration_factor must be positive")
        if not 0 <= self.early_exaggeration_iters <= self.n_iter:
            raise ValueError("early_exaggeration_iters must lie in [0, n_iter]")
        for name in ("momentum_initial", "momentum_final"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.perplexity_tolerance > 0:
            raise ValueError("perplexity_tolerance must be positive")
        if self.perplexity_max_bisection_steps < 1:
            raise ValueError("perplexity_max_bisection_steps must be >= 1")

    def resolve(self, n: int) -> TsneParams:
        """Return a copy with concrete perplexity and learning rate for n points."""
        if self.perplexity is None:
            perplexity = min(DEFAULT_PERPLEXITY, (n - 1) / 3.0)
        else:
            perplexity = float(self.perplexity)
        if perplexity >= n - 1:
            raise PerplexityInfeasible(perplexity, n)
        learning_rate = self.learning_rate
        if learning_rate is None:
            learning_rate = max(n / (4.0 * self.early_exaggeration_factor), MIN_AUTO_LEARNING_RATE)
        return dataclasses.replace(self, perplexity=perplexity, learning_rate=float(learning_rate))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class AffinityMatrix:
    p: np.ndarray

    @property
    def n(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class CalibrationResult:
    conditional: np.ndarray
    betas: np.ndarray
    converged: np.ndarray  # per-row flag; False where max_steps ran out

    def __iter__(self):
        # allows ``conditional, betas = calibrate_perplexity(...)``
        return iter((self.conditional, self.betas))


@dataclass(frozen=True)
class Embedding2D:
    coords: np.ndarray
    params: TsneParams
    final_kl: float
    child_ids: tuple[str, ...]
    kl_trace: tuple[float, ...] = ()


def pairwise_sq_distances(points: np.ndarray) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DegenerateInput("need an (n, d) matrix with n >= 2")
    if not np.all(np.isfinite(x)):
        raise DegenerateInput("points must be finite")
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    # The expansion loses precision for near points; clamp and force exact symmetry.
    np.maximum(d, 0.0, out=d)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _row_entropy(dist: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """log2-entropy of the Gibbs row exp(-beta * dist) and the row itself."""
    shifted = dist - dist.min()
    w = np.exp(-beta * shifted)
    total = w.sum()
    p = w / total
    # H = log(total) + beta * E[shifted], in nats
    h = np.log(total) + beta * float(np.dot(p, shifted))
    return h / np.log(2.0), p


def calibrate_perplexity(
    sq_dists: np.ndarray,
    perplexity: float,
    tolerance: float = 1e-5,
    max_steps: int = 50,
    on_degenerate: str = "warn",
) -> CalibrationResult:
    """Bisect each row's Gaussian precision to hit the target perplexity.

    Rows whose off-diagonal distances are all zero cannot be calibrated;
    with ``on_degenerate="warn"`` they become uniform, otherwise
    ``CalibrationFailed`` is raised.
    """
    d = np.asarray(sq_dists, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise ShapeMismatch("distance matrix must be square")
    if not perplexity < n - 1:
        raise PerplexityInfeasible(perplexity, n)

    target = np.log2(perplexity)
    conditional = np.zeros((n, n))
    betas = np.zeros(n)
    converged = np.ones(n, dtype=bool)
    for i in range(n):
        others = np.delete(d[i], i)
        if not np.any(others > 0):
            if on_degenerate != "warn":
                raise CalibrationFailed(i)
            warnings.warn(f"row {i} has only zero distances; using a uniform row", RuntimeWarning)
            row = np.full(n - 1, 1.0 / (n - 1))
            beta = 0.0
        else:
            # Start at the inverse mean distance so score-scale inputs need few steps.
            beta = 1.0 / float(others[others > 0].mean())
            lo, hi = 0.0, np.inf
            h, row = _row_entropy(others, beta)
            ok = abs(h - target) <= tolerance
            steps = 0
            while not ok and steps < max_steps:
                if h > target:
                    lo = beta
                    beta = beta * 2.0 if hi == np.inf else 0.5 * (beta + hi)
                else:
                    hi = beta
                    beta = 0.5 * (beta + lo)
                h, row = _row_entropy(others, beta)
                ok = abs(h - target) <= tolerance
                steps += 1
            if not ok:
                converged[i] = False
                log.debug("row %d: perplexity bisection stopped at |dH|=%.3g", i, abs(h - target))
        conditional[i, :i] = row[:i]
        conditional[i, i + 1 :] = row[i:]
        betas[i] = beta
    return CalibrationResult(conditional, betas, converged)


def symmetrize_affinities(conditional: np.ndarray) -> AffinityMatrix:
    c = np.asarray(conditional, dtype=float)
    n = c.shape[0]
    p = (c + c.T) / (2.0 * n)
    off = ~np.eye(n, dtype=bool)
    p[off] = np.maximum(p[off], P_FLOOR)
    np.fill_diagonal(p, 0.0)
    p /= p.sum()
    p = 0.5 * (p + p.T)
    return AffinityMatrix(p)


def low_dim_affinities(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Student-t affinities q and their unnormalized numerators."""
    y = np.asarray(coords, dtype=float)
    num = 1.0 / (1.0 + pairwise_sq_distances(y))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return q, num


def _as_p(p) -> np.ndarray:
    return p.p if isinstance(p, AffinityMatrix) else np.asarray(p, dtype=float)


def kl_divergence(p, q: np.ndarray) -> float:
    pm = _as_p(p)
    qm = np.asarray(q, dtype=float)
    if pm.shape != qm.shape:
        raise ShapeMismatch(f"p has shape {pm.shape}, q has shape {qm.shape}")
    off = ~np.eye(pm.shape[0], dtype=bool)
    pv = np.maximum(pm[off], P_FLOOR)
    qv = np.maximum(qm[off], _Q_FLOOR)
    return float(np.sum(pv * np.log(pv / qv)))


def _gradient_from(p: np.ndarray, q: np.ndarray, num: np.ndarray, y: np.ndarray) -> np.ndarray:
    w = (p - q) * num
    return 4.0 * (w.sum(axis=1)[:, None] * y - w @ y)


def kl_gradient(p, coords: np.ndarray) -> np.ndarray:
    """Gradient of KL(p || q(coords)) with respect to the embedding."""
    pm = _as_p(p)
    y = np.asarray(coords, dtype=float)
    if y.ndim != 2 or pm.shape != (y.shape[0], y.shape[0]):
        raise ShapeMismatch(f"p has shape {pm.shape}, coords has shape {y.shape}")
    q, num = low_dim_affinities(y)
    return _gradient_from(pm, q, num, y)


def joint_affinities(points: np.ndarray, params: TsneParams) -> tuple[AffinityMatrix, CalibrationResult]:
    d = pairwise_sq_distances(points)
    cal = calibrate_perplexity(
        d, params.perplexity, params.perplexity_tolerance, params.perplexity_max_bisection_steps
    )
    unconverged = int((~cal.converged).sum())
    if unconverged:
        log.warning("%d rows did not reach the perplexity tolerance", unconverged)
    return symmetrize_affinities(cal.conditional), cal


def embed(
    points: np.ndarray,
    params: TsneParams,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
) -> tuple[np.ndarray, list[float]]:
    """Optimize a 2-D embedding of ``points``; returns coords and the KL trace.

    ``params`` must already be resolved (concrete perplexity and rate). ``callback``
    is called after every iteration with (iteration, coords, kl).
    """
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    p_mat, _ = joint_affinities(x, params)
    p = p_mat.p

    rng = np.random.default_rng(params.seed)
    y = rng.normal(0.0, INIT_SCALE, size=(n, 2))
    y -= y.mean(axis=0)
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    q, num = low_dim_affinities(y)

    trace: list[float] = []
    for it in range(params.n_iter):
        exaggeration = params.early_exaggeration_factor if it < params.early_exaggeration_iters else 1.0
        momentum = params.momentum_initial if it < params.momentum_switch_iter else params.momentum_final
        grad = _gradient_from(exaggeration * p, q, num, y)
        if params.use_gains:
            same_sign = (grad > 0) == (update > 0)
            gains = np.where(same_sign, gains * 0.8, gains + 0.2)
            np.maximum(gains, _MIN_GAIN, out=gains)
            update = momentum * update - params.learning_rate * gains * grad
        else:
            update = momentum * update - params.learning_rate * grad
        y = y + update
        y -= y.mean(axis=0)
        q, num = low_dim_affinities(y)
        kl = kl_divergence(p, q)
        trace.append(kl)
        if callback is not None:
            callback(it, y, kl)
    if not np.all(np.isfinite(y)):
        raise DegenerateInput("embedding diverged; lower the learning rate")
    return y, trace


def run_tsne(
    cohort: Cohort,
    params: TsneParams | None = None,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
) -> Embedding2D:
    params = params or TsneParams()
    n = len(cohort)
    if n < MIN_COHORT:
        raise CohortTooSmall(n, MIN_COHORT, cohort.course)
    resolved = params.resolve(n)
    coords, trace = embed(cohort.scores(), resolved, callback)
    return Embedding2D(
        coords=coords,
        params=resolved,
        final_kl=max(trace[-1], 0.0),
        child_ids=tuple(cohort.child_ids),
        kl_trace=tuple(trace),
    )
