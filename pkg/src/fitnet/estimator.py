"""Growth-exponent estimation and distribution fitting.

The growth method: per node, ordinary least squares of log accumulated
in-degree against log snapshot time; nodes whose accumulated degree rarely
increases are flagged as zero-growth; fits below a correlation threshold are
dropped from the "measurable" set. Distribution fitters follow the
scikit-learn estimator protocol (``fit`` + ``get_params``) so they compose
with pipelines and grid search.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats
from sklearn.base import BaseEstimator

from .snapshots import AccumulatedSeries


class FitError(ValueError):
    """Input unsuitable for the requested fit."""


@dataclass
class GrowthFit:
    node_id: int
    beta: float
    intercept: float
    pearson_r: float
    points_used: int
    zero_growth: bool


def _is_zero_growth(kstar: np.ndarray, rule: str) -> bool:
    if rule == "events":
        # strict increases on at most 2 snapshot-to-snapshot transitions
        return int(np.count_nonzero(np.diff(kstar) > 0)) <= 2
    if rule == "factor":
        lo = kstar[kstar > 0]
        if lo.size == 0:
            return True
        return kstar[-1] <= 2 * lo[0]
    raise ValueError(f"unknown zero-growth rule {rule!r}")


def fit_growth(node_id: int, times: np.ndarray, kstar: np.ndarray,
               zero_growth_rule: str = "events") -> GrowthFit:
    """OLS fit of log k* against log t for one node.

    Only points with k* >= 1 enter the fit; the time axis is the 1-based
    snapshot index (proportional to wall-clock time, so the slope is
    unaffected by the unit).
    """
    times = np.asarray(times, dtype=float)
    kstar = np.asarray(kstar, dtype=float)
    if times.shape != kstar.shape or times.size == 0:
        raise FitError(f"node {node_id}: need aligned non-empty trajectories")
    if times.size < 2:
        # seen in a single snapshot: growth is unmeasurable
        return GrowthFit(node_id, 0.0, 0.0, 0.0, int(times.size), True)

    if _is_zero_growth(kstar, zero_growth_rule):
        return GrowthFit(node_id, 0.0, 0.0, 0.0, 0, True)

    mask = kstar >= 1
    x = np.log(times[mask])
    y = np.log(kstar[mask])
    if x.size < 2:
        return GrowthFit(node_id, 0.0, 0.0, 0.0, int(x.size), True)
    if np.ptp(y) == 0.0:
        # flat but passed the growth rule is impossible; keep for safety
        return GrowthFit(node_id, 0.0, float(y[0]), 0.0, int(x.size), True)
    res = stats.linregress(x, y)
    return GrowthFit(node_id, float(res.slope), float(res.intercept),
                     float(res.rvalue), int(x.size), False)


def _fit_chunk(args):
    chunk, rule = args
    return [fit_growth(nid, t, k, rule) for nid, t, k in chunk]


def fit_growth_table(acc: AccumulatedSeries, zero_growth_rule: str = "events",
                     workers: int | None = None) -> list[GrowthFit]:
    """Fit every node of an accumulated series; ordered by node id.

    ``workers`` defaults to the FITNET_THREADS environment variable (1 if
    unset). Per-node fits are pure, so the parallel reduction is deterministic.
    """
    if workers is None:
        workers = int(os.environ.get("FITNET_THREADS", "1"))
    items = [(nid, t, k) for nid, (t, k) in sorted(acc.per_node.items())]
    if workers <= 1 or len(items) < 1000:
        return [fit_growth(nid, t, k, zero_growth_rule) for nid, t, k in items]
    chunks = [items[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_fit_chunk, [(ch, zero_growth_rule) for ch in chunks]))
    fits = [f for part in parts for f in part]
    fits.sort(key=lambda f: f.node_id)
    return fits


def measurable(fits: list[GrowthFit], r_threshold: float = 0.8) -> list[GrowthFit]:
    """Non-zero-growth fits with Pearson r at or above the threshold."""
    if not 0.0 <= r_threshold <= 1.0:
        raise ValueError(f"r_threshold must lie in [0, 1], got {r_threshold}")
    return [f for f in fits if not f.zero_growth and f.pearson_r >= r_threshold]


class GrowthExponentEstimator(BaseEstimator):
    """Per-node growth-exponent fits over an accumulated series.

    Attributes after fit: ``fits_`` (all nodes, ordered by id),
    ``measurable_`` (filtered by r_threshold), ``nonzero_fraction_``.
    """

    def __init__(self, r_threshold: float = 0.8, zero_growth_rule: str = "events",
                 workers: int | None = None):
        self.r_threshold = r_threshold
        self.zero_growth_rule = zero_growth_rule
        self.workers = workers

    def fit(self, X: AccumulatedSeries, y=None):
        self.fits_ = fit_growth_table(X, self.zero_growth_rule, self.workers)
        self.measurable_ = measurable(self.fits_, self.r_threshold)
        n = len(self.fits_)
        self.nonzero_fraction_ = (
            sum(1 for f in self.fits_ if not f.zero_growth) / n if n else 0.0)
        return self

    def betas(self, only_measurable: bool = True) -> np.ndarray:
        fits = self.measurable_ if only_measurable else self.fits_
        return np.asarray([f.beta for f in fits])


@dataclass
class ExponentialFit:
    lam: float
    beta_max: float
    r_squared: float
    bins_used: int


class ExponentialFitter(BaseEstimator):
    """Truncated-exponential fit via OLS on the log histogram density.

    50 equal-width bins over [0, beta_max]; empty bins are excluded.
    ``beta_max`` defaults to the sample maximum.
    """

    def __init__(self, n_bins: int = 50, beta_max: float | None = None,
                 min_samples: int = 100):
        self.n_bins = n_bins
        self.beta_max = beta_max
        self.min_samples = min_samples

    def fit(self, X, y=None):
        x = np.asarray(X, dtype=float)
        if x.size < self.min_samples:
            raise FitError(f"need >= {self.min_samples} samples, got {x.size}")
        bmax = self.beta_max if self.beta_max is not None else float(x.max())
        if bmax <= 0 or np.ptp(x) == 0.0:
            raise FitError("degenerate sample: no spread in the data")
        counts, edges = np.histogram(x, bins=self.n_bins, range=(0.0, bmax),
                                     density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        keep = counts > 0
        if keep.sum() < 3:
            raise FitError("fewer than 3 occupied histogram bins")
        res = stats.linregress(centers[keep], np.log(counts[keep]))
        if res.slope >= 0:
            raise FitError(
                f"log-density slope is {res.slope:.3g} >= 0; "
                "sample is not exponential-decaying")
        self.lam_ = float(-res.slope)
        self.beta_max_ = float(bmax)
        self.r_squared_ = float(res.rvalue ** 2)
        self.result_ = ExponentialFit(self.lam_, self.beta_max_,
                                      self.r_squared_, int(keep.sum()))
        return self


def fit_exponential(betas, **kwargs) -> ExponentialFit:
    return ExponentialFitter(**kwargs).fit(betas).result_


@dataclass
class PowerLawFit:
    gamma: float          # default estimate (discrete MLE)
    gamma_mle: float
    gamma_ccdf: float
    k_min: int
    n_tail: int
    method: str = "discrete-MLE"


class PowerLawFitter(BaseEstimator):
    """Discrete power-law exponent for k >= k_min.

    Reports both the discrete maximum-likelihood estimate (via the Hurwitz
    zeta) and the OLS slope of the log empirical CCDF; the MLE is the default.
    """

    def __init__(self, k_min: int = 10, min_tail: int = 1000):
        self.k_min = k_min
        self.min_tail = min_tail

    def fit(self, X, y=None):
        k = np.asarray(X)
        k = k[k >= self.k_min].astype(np.int64)
        if k.size < self.min_tail:
            raise FitError(
                f"only {k.size} samples with k >= {self.k_min} "
                f"(need {self.min_tail})")
        self.n_tail_ = int(k.size)

        mean_log = float(np.mean(np.log(k)))

        def nll(g):
            return math.log(special.zeta(g, self.k_min)) + g * mean_log

        res = optimize.minimize_scalar(nll, bounds=(1.01, 8.0), method="bounded")
        self.gamma_mle_ = float(res.x)

        ks, counts = np.unique(k, return_counts=True)
        # P(K >= k): CCDF slope is 1 - gamma for a pure power law
        ccdf = 1.0 - (np.cumsum(counts) - counts) / k.size
        slope = stats.linregress(np.log(ks), np.log(ccdf)).slope
        self.gamma_ccdf_ = float(1.0 - slope)

        self.gamma_ = self.gamma_mle_
        self.result_ = PowerLawFit(self.gamma_, self.gamma_mle_,
                                   self.gamma_ccdf_, self.k_min, self.n_tail_)
        return self


def fit_power_law(degrees, k_min: int = 10, **kwargs) -> PowerLawFit:
    return PowerLawFitter(k_min=k_min, **kwargs).fit(degrees).result_


def fitness_vs_experience(fits: list[GrowthFit], initial_degrees: dict[int, int],
                          n_bins: int = 12):
    """Mean growth exponent per logarithmic initial-degree bin.

    Returns a list of dicts with bin bounds, counts, mean beta, and (where
    enough samples exist) a per-bin exponential rate of the beta distribution.
    Empty bins are skipped and reported with count 0.
    """
    pairs = [(initial_degrees[f.node_id], f.beta) for f in fits
             if f.node_id in initial_degrees and initial_degrees[f.node_id] >= 1]
    if not pairs:
        return []
    deg = np.asarray([p[0] for p in pairs], dtype=float)
    beta = np.asarray([p[1] for p in pairs])
    hi = max(deg.max(), 2.0)
    edges = np.logspace(0.0, np.log10(hi) + 1e-9, n_bins + 1)
    out = []
    for lo_e, hi_e in zip(edges[:-1], edges[1:]):
        mask = (deg >= lo_e) & (deg < hi_e)
        row = {"k_lo": float(lo_e), "k_hi": float(hi_e),
               "count": int(mask.sum()), "mean_beta": math.nan, "lam": math.nan}
        if mask.any():
            row["mean_beta"] = float(beta[mask].mean())
            if mask.sum() >= 100 and np.ptp(beta[mask]) > 0:
                try:
                    row["lam"] = fit_exponential(beta[mask]).lam
                except FitError:
                    pass
        out.append(row)
    return out
