"""Summary statistics for exit samples and theory-vs-empirical comparison.

The estimators are the plain ones: componentwise mean, covariance trace
as the sum of unbiased (n-1) per-coordinate variances, standard errors
for both, with the trace SE by the delta method (the SE of the mean of
W_j = |Y_j - mean|^2). Accumulation is one-pass over batches of moment
accumulators that merge associatively, so partial results from parallel
workers combine deterministically.

Comparison rows score each statistic as a z-value against the
closed-form mean/trace and flag PASS when every |z| <= 4 — wide enough
that a correctly sampling suite of nine rows times (d+1) statistics
stays quiet, tight enough that a real bias of a few standard errors
fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import driver
from .exits import points_of
from .geometry import Ball, Domain, as_point
from .ball import theoretical_trace

#: PASS threshold on |z|.
Z_MAX = 4.0

#: The nine (dimension, distance-from-center) table settings, in row order.
TABLE1_SETTINGS = tuple((d, rho) for d in (2, 3, 4) for rho in (0.2, 0.5, 0.8))


@dataclass(frozen=True)
class RunningMoments:
    """Mergeable one-pass moments of a point sample.

    Carries everything needed to reconstruct mean, covariance trace,
    and their standard errors after any sequence of merges: the count,
    the mean vector, the centered second-moment matrix, and the mean /
    second moment / cross moment of Q = |Y|^2 (which the delta-method
    trace SE needs).
    """

    n: int
    mean: np.ndarray
    cov_m2: np.ndarray
    q_mean: float
    q_m2: float
    qy_m2: np.ndarray

    @classmethod
    def from_points(cls, pts: np.ndarray) -> "RunningMoments":
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError(f"expected a nonempty (n, d) array, got {pts.shape}")
        n = pts.shape[0]
        mean = pts.mean(axis=0)
        dev = pts - mean
        q = np.einsum("ij,ij->i", pts, pts)
        q_mean = float(q.mean())
        qdev = q - q_mean
        return cls(
            n=n,
            mean=mean,
            cov_m2=dev.T @ dev,
            q_mean=q_mean,
            q_m2=float(qdev @ qdev),
            qy_m2=qdev @ dev,
        )

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if self.mean.shape != other.mean.shape:
            raise ValueError("cannot merge moments of different dimensions")
        na, nb = self.n, other.n
        n = na + nb
        # The merged mean is literally the weighted combination of batch means.
        mean = (na * self.mean + nb * other.mean) / n
        delta = other.mean - self.mean
        qdelta = other.q_mean - self.q_mean
        w = na * nb / n
        return RunningMoments(
            n=n,
            mean=mean,
            cov_m2=self.cov_m2 + other.cov_m2 + w * np.outer(delta, delta),
            q_mean=(na * self.q_mean + nb * other.q_mean) / n,
            q_m2=self.q_m2 + other.q_m2 + w * qdelta * qdelta,
            qy_m2=self.qy_m2 + other.qy_m2 + w * qdelta * delta,
        )

    def summary(self) -> "SummaryStats":
        n, mu = self.n, self.mean
        if n < 2:
            d = mu.shape[0]
            return SummaryStats(n=n, mean=mu.copy(), trace=np.nan,
                                mean_se=np.full(d, np.nan), trace_se=np.nan)
        var = np.diag(self.cov_m2) / (n - 1)
        # Sample variance of W_j = |Y_j - mean|^2, expanded in the stored moments.
        w_m2 = self.q_m2 - 4.0 * (self.qy_m2 @ mu) + 4.0 * (mu @ self.cov_m2 @ mu)
        var_w = max(w_m2, 0.0) / (n - 1)
        bias = n / (n - 1)
        return SummaryStats(
            n=n,
            mean=mu.copy(),
            trace=float(var.sum()),
            mean_se=np.sqrt(var / n),
            trace_se=float(bias * np.sqrt(var_w / n)),
        )


@dataclass(frozen=True)
class SummaryStats:
    """Empirical mean and covariance trace of an exit sample, with SEs."""

    n: int
    mean: np.ndarray
    trace: float
    mean_se: np.ndarray
    trace_se: float
    trace_se_method: str = "delta"


def summarize(samples) -> SummaryStats:
    """Mean, covariance trace, and standard errors of the exit points."""
    return RunningMoments.from_points(points_of(samples)).summary()


@dataclass(frozen=True)
class ComparisonRow:
    """One theory-vs-empirical row: z-scores and a PASS/FAIL verdict.

    trace_theory and z_trace are None when the domain has no closed-form
    trace (boxes); dt and epsilon carry the knob of whichever sampler
    produced the data and are None otherwise.
    """

    d: int
    theta: tuple
    method: str
    n: int
    summary: SummaryStats
    trace_theory: float | None
    z_mean: tuple
    z_trace: float | None
    passed: bool
    dt: float | None = None
    epsilon: float | None = None
    note: str = ""


def compare(summary: SummaryStats, domain: Domain, theta, *, method: str = "",
            dt: float | None = None, epsilon: float | None = None) -> ComparisonRow:
    """Score a summary against the closed-form mean (and trace, for balls)."""
    theta = as_point(theta, domain.dimension)
    if summary.mean.shape[0] != domain.dimension:
        raise ValueError(
            f"dimension mismatch: summary is {summary.mean.shape[0]}-dimensional, "
            f"domain is {domain.dimension}-dimensional")
    with np.errstate(divide="ignore", invalid="ignore"):
        z_mean = (summary.mean - theta) / summary.mean_se
    if isinstance(domain, Ball):
        trace_theory = theoretical_trace(domain, theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            z_trace = float((summary.trace - trace_theory) / summary.trace_se)
        zs = np.append(z_mean, z_trace)
    else:
        trace_theory = None
        z_trace = None
        zs = z_mean
    ok = bool(np.all(np.isfinite(zs)) and np.max(np.abs(zs)) <= Z_MAX)
    note = "" if np.all(np.isfinite(zs)) else "degenerate standard errors"
    return ComparisonRow(
        d=domain.dimension,
        theta=tuple(float(v) for v in theta),
        method=method,
        n=summary.n,
        summary=summary,
        trace_theory=trace_theory,
        z_mean=tuple(float(z) for z in z_mean),
        z_trace=z_trace,
        passed=ok,
        dt=dt,
        epsilon=epsilon,
        note=note,
    )


@dataclass(frozen=True)
class TableConfig:
    """Knobs for the nine-setting reproduction run."""

    method: str = "brownian"
    n: int = 500
    dt: float = 1e-4
    epsilon: float | None = None
    step_fraction: float = 0.5
    workers: int = 1


def reproduce_table1(cfg: TableConfig, seed: int) -> list[ComparisonRow]:
    """Run the nine (d, rho) settings on the unit ball and score each row.

    Settings are d in {2, 3, 4} crossed with start distance rho in
    {0.2, 0.5, 0.8} from the center of the unit ball, n samples each.
    Row k draws from stream context k, so rows are independent and any
    row can be recomputed in isolation.
    """
    from . import brownian as brw
    from . import wos as wos_mod

    rows = []
    for k, (d, rho) in enumerate(TABLE1_SETTINGS):
        domain = Ball(np.zeros(d), 1.0)
        theta = np.zeros(d)
        theta[0] = rho
        bcfg = brw.BrownianConfig(dt=cfg.dt) if cfg.method == "brownian" else None
        wcfg = (wos_mod.WosConfig(epsilon=cfg.epsilon, step_fraction=cfg.step_fraction)
                if cfg.method == "wos" else None)
        batch = driver.sample_exits(domain, theta, cfg.method, cfg.n, seed,
                                    context=k, workers=cfg.workers,
                                    brownian_cfg=bcfg, wos_cfg=wcfg)
        rows.append(compare(
            summarize(batch), domain, theta, method=cfg.method,
            dt=cfg.dt if cfg.method == "brownian" else None,
            epsilon=wcfg.resolve_epsilon(domain) if cfg.method == "wos" else None,
        ))
    return rows
