"""Mean-field solutions of the fitness-with-deletion model.

The normalization constant A solves

    1 = integral rho(eta) / (A/eta * (1+c)/(1-c) - 1) d eta  over [0, eta_max]

For light-tailed fitness laws the root sits a distance eps above the integrand
pole at eta_max * (1-c)/(1+c), and eps can be exponentially small (far below
float spacing relative to A). The solver therefore works in the gap variable
directly: with A*(1+c)/(1-c) = eta_max + eps, the integral becomes

    I(eps) = integral g(x) / (x + eps) dx,   g(x) = rho(eta_max - x) * (eta_max - x)

which is well conditioned for subnormal eps. Bisection runs on log10(eps).
Downstream quantities (beta_max, gamma) are computed from eps, never from the
rounded A, to avoid cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .distributions import (DeltaFitness, EmpiricalFitness, FitnessDistribution)


class SolverError(RuntimeError):
    """Root finding or quadrature failed; message carries diagnostics."""


class DomainError(ValueError):
    """Input outside the formula's domain of validity."""


_LOG_EPS_MIN = -300.0
_LOG_EPS_MAX = 9.0


def _norm_integral(dist: FitnessDistribution, eps: float) -> float:
    """I(eps) defined above; monotone decreasing in eps."""
    emax = dist.eta_max
    if isinstance(dist, DeltaFitness):
        return emax / eps
    if isinstance(dist, EmpiricalFitness):
        total = 0.0
        for s in dist.samples:
            total += s / (emax - s + eps)
        return total / len(dist.samples)

    def g(x):
        return dist.density(emax - x) * (emax - x)

    g0 = g(0.0)
    a = emax / 4.0
    # log part of the near-pole region, then two smooth quadratures
    part1 = g0 * (math.log(a + eps) - math.log(eps))
    part2 = integrate.quad(lambda x: (g(x) - g0) / (x + eps), 0.0, a,
                           limit=200)[0]
    part3 = integrate.quad(lambda x: g(x) / (x + eps), a, emax, limit=200)[0]
    return part1 + part2 + part3


def solve_normalization(c: float, dist: FitnessDistribution,
                        tol: float = 1e-8) -> tuple[float, float, float]:
    """Solve for A; returns (A, eps, residual) with eps the pole gap in eta
    units: A = (eta_max + eps) * (1-c)/(1+c)."""
    if not 0.0 <= c < 1.0:
        raise DomainError(f"c must lie in [0, 1), got {c}")
    emax = dist.eta_max
    if not emax > 0:
        raise DomainError("fitness law must have positive eta_max")
    if isinstance(dist, DeltaFitness):
        eps = emax  # closed form: I(eps) = eta0/eps = 1
        return 2.0 * emax * (1.0 - c) / (1.0 + c), eps, 0.0

    lo, hi = _LOG_EPS_MIN, _LOG_EPS_MAX
    f_lo = _norm_integral(dist, 10.0 ** lo) - 1.0
    f_hi = _norm_integral(dist, 10.0 ** hi) - 1.0
    if not (f_lo > 0 > f_hi):
        raise SolverError(
            f"no sign change bracketing the root: I(1e{lo:.0f})-1={f_lo:.3g}, "
            f"I(1e{hi:.0f})-1={f_hi:.3g}; the fitness law may put too little "
            "mass near eta_max for a float-representable solution")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _norm_integral(dist, 10.0 ** mid) - 1.0
        if abs(f_mid) < tol:
            lo = hi = mid
            break
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    eps = 10.0 ** (0.5 * (lo + hi))
    residual = _norm_integral(dist, eps) - 1.0
    if abs(residual) > tol:
        raise SolverError(f"residual {residual:.3g} exceeds tolerance {tol:g}")
    A = (emax + eps) * (1.0 - c) / (1.0 + c)
    return A, eps, residual


def solve_A(c: float, dist: FitnessDistribution, tol: float = 1e-8) -> float:
    """Normalization constant A of the attachment kernel's mean field."""
    return solve_normalization(c, dist, tol)[0]


def growth_exponent(eta: float, A: float, c: float) -> float:
    """beta(eta) = eta/A - c/(1-c)."""
    if A <= 0:
        raise DomainError(f"A must be positive, got {A}")
    return eta / A - c / (1.0 - c)


def fitness_from_growth(beta: float, A: float, c: float) -> float:
    """Inverse map eta(beta) = A * (beta + c/(1-c))."""
    if A <= 0:
        raise DomainError(f"A must be positive, got {A}")
    return A * (beta + c / (1.0 - c))


def _beta_max_from_gap(c: float, emax: float, eps: float) -> float:
    # beta(eta_max) with A expressed through the gap; exact, no cancellation
    return (emax * (1.0 + c) / (emax + eps) - c) / (1.0 - c)


def predicted_gamma(c: float, dist: FitnessDistribution) -> float:
    """Degree-distribution exponent via the scaling relation at beta_max.

    gamma = 1 + 1/((1-c) * beta_max); for delta fitness this reduces to
    1 + 2/(1-c) exactly.
    """
    _, eps, _ = solve_normalization(c, dist)
    beta_max = _beta_max_from_gap(c, dist.eta_max, eps)
    if beta_max <= 0:
        raise DomainError(f"beta_max = {beta_max:.3g} <= 0")
    return 1.0 + 1.0 / ((1.0 - c) * beta_max)


def same_age_gamma(lam: float, age: float) -> float:
    """Power-law exponent of a same-age cohort: 1 + lam / ln(age).

    ``lam`` is the exponential rate of the growth-exponent distribution and
    ``age`` the ratio of measurement time to cohort birth time.
    """
    if lam <= 0:
        raise DomainError(f"lam must be positive, got {lam}")
    if age <= 1.0:
        raise DomainError(f"age must exceed 1, got {age}")
    return 1.0 + lam / math.log(age)


def accumulated_prefactor(eta: float, A: float, c: float, m: int) -> float:
    """Prefactor of the accumulated-degree power law,
    m * eta * (1-c) / (eta*(1-c) - c*A).

    The accumulated growth exponent equals the live growth exponent, so no
    separate beta* is exposed. Valid only above the pole eta = c*A/(1-c).
    """
    if A <= 0 or m < 1:
        raise DomainError("need A > 0 and m >= 1")
    if c == 0.0:
        return float(m)
    denom = eta * (1.0 - c) - c * A
    if denom <= 0:
        raise DomainError(
            f"eta = {eta:.4g} is at or below the prefactor pole "
            f"c*A/(1-c) = {c * A / (1 - c):.4g}")
    return m * eta * (1.0 - c) / denom


@dataclass
class TheoryParams:
    """Solved mean-field constants for one (c, fitness law) pair."""

    c: float
    fitness_dist: FitnessDistribution
    A: float
    eps_gap: float           # pole gap above the integrand singularity
    beta_max: float
    gamma_pred: float
    residual: float
    corrections: dict = field(default_factory=dict)

    @classmethod
    def solve(cls, c: float, dist: FitnessDistribution) -> "TheoryParams":
        A, eps, residual = solve_normalization(c, dist)
        beta_max = _beta_max_from_gap(c, dist.eta_max, eps)
        gamma = 1.0 + 1.0 / ((1.0 - c) * beta_max)
        # deviations from the leading-order approximations, as diagnostics
        corrections = {
            "eps1": eps,
            "eps2": 1.0 - (1.0 - c) * beta_max,
            "eps3": gamma - 2.0,
        }
        return cls(c=c, fitness_dist=dist, A=A, eps_gap=eps, beta_max=beta_max,
                   gamma_pred=gamma, residual=residual, corrections=corrections)


@dataclass
class WinnersReport:
    k_tg: float
    T: float
    k_cut: float
    winner_fraction: float        # W
    talented_winners: float       # TW at the critical cutoff
    experienced_losers: float     # EL at the critical cutoff
    talented_fraction: float      # r_tw = TW / W
    empirical: bool = False
    counts: dict = field(default_factory=dict)


def truncated_exponential_ccdf(lam: float, beta_max: float):
    """CCDF of the truncated exponential growth-exponent law."""
    if lam <= 0 or beta_max <= 0:
        raise DomainError("lam and beta_max must be positive")
    norm = -math.expm1(-lam * beta_max)

    def ccdf(b: float) -> float:
        if b <= 0:
            return 1.0
        if b >= beta_max:
            return 0.0
        return (math.exp(-lam * b) - math.exp(-lam * beta_max)) / norm

    return ccdf


def power_law_density(gamma: float, k_lo: float = 1.0, k_hi: float = 1000.0):
    """Continuous power-law density on [k_lo, k_hi], normalized."""
    if gamma <= 1.0:
        raise DomainError("gamma must exceed 1")
    norm = (k_lo ** (1.0 - gamma) - k_hi ** (1.0 - gamma)) / (gamma - 1.0)

    def pk(k: float) -> float:
        return k ** (-gamma) / norm

    return pk


def winners(k_tg: float = 1000.0, T: float = 13.0, ccdf=None, pk=None,
            lam: float = 3.3157, beta_max: float = 2.0,
            gamma_init: float = 1.8, quad_limit: int = 200) -> WinnersReport:
    """Theoretical winners analysis by numerical integration.

    A node with initial degree k wins when its growth exponent exceeds
    beta_c(k) = log(k_tg / k) / log(T). W integrates the exponent CCDF against
    the initial degree law on [1, k_tg]; the critical cutoff equalizes the
    talented-winner and experienced-loser masses; r_tw = TW / W.
    """
    if k_tg <= 1 or T <= 1:
        raise DomainError("need k_tg > 1 and T > 1")
    C = ccdf if ccdf is not None else truncated_exponential_ccdf(lam, beta_max)
    P = pk if pk is not None else power_law_density(gamma_init, 1.0, k_tg)
    logT = math.log(T)

    def win_density(k):
        return C(math.log(k_tg / k) / logT) * P(k)

    def lose_density(k):
        return (1.0 - C(math.log(k_tg / k) / logT)) * P(k)

    def _quad(f, a, b):
        val, err = integrate.quad(f, a, b, limit=quad_limit)
        if not math.isfinite(val):
            raise SolverError(f"quadrature diverged on [{a}, {b}]")
        return val

    W = _quad(win_density, 1.0, k_tg)
    if W <= 0:
        raise SolverError("no winner mass; check the CCDF and degree law")

    def imbalance(kc):
        return _quad(win_density, 1.0, kc) - _quad(lose_density, kc, k_tg)

    f_lo = imbalance(1.0 + 1e-9)
    f_hi = imbalance(k_tg - 1e-9)
    if f_lo >= 0.0:
        # degenerate: no loser mass anywhere (e.g. CCDF identically 1)
        k_cut = 1.0
    elif f_hi <= 0.0:
        k_cut = k_tg
    else:
        k_cut = optimize.brentq(imbalance, 1.0 + 1e-9, k_tg - 1e-9, xtol=1e-9)
    TW = _quad(win_density, 1.0, k_cut)
    EL = _quad(lose_density, k_cut, k_tg)
    return WinnersReport(k_tg=k_tg, T=T, k_cut=k_cut, winner_fraction=W,
                         talented_winners=TW, experienced_losers=EL,
                         talented_fraction=TW / W)


def empirical_winners(initial_degrees: dict[int, int],
                      final_accumulated: dict[int, int],
                      k_tg: float = 1000.0) -> WinnersReport:
    """Count-based winners analysis on measured node trajectories.

    Winners: initial degree < k_tg and final accumulated degree >= k_tg.
    The cutoff scan finds where the talented-winner count crosses the
    experienced-loser count.
    """
    rows = [(initial_degrees[nid], final_accumulated.get(nid, 0))
            for nid in initial_degrees]
    winners_init = sorted(k0 for k0, kf in rows if k0 < k_tg and kf >= k_tg)
    losers_init = sorted(k0 for k0, kf in rows if k0 < k_tg and kf < k_tg)
    n_w = len(winners_init)
    n_candidates = sum(1 for k0, _ in rows if k0 < k_tg)
    if n_w == 0:
        return WinnersReport(k_tg=k_tg, T=0.0, k_cut=0.0, winner_fraction=0.0,
                             talented_winners=0.0, experienced_losers=0.0,
                             talented_fraction=0.0, empirical=True,
                             counts={"winners": 0, "candidates": n_candidates})

    w_arr = np.asarray(winners_init)
    l_arr = np.asarray(losers_init)
    cuts = np.unique(np.concatenate([w_arr, l_arr])).astype(float)
    best_cut, best_gap, best_tw, best_el = 0.0, math.inf, 0, 0
    for kc in cuts:
        tw = int(np.searchsorted(w_arr, kc, side="left"))    # winners with k0 < kc
        el = int(l_arr.size - np.searchsorted(l_arr, kc, side="right"))  # k0 > kc
        gap = abs(tw - el)
        if gap < best_gap:
            best_cut, best_gap, best_tw, best_el = float(kc), gap, tw, el
    return WinnersReport(
        k_tg=k_tg, T=0.0, k_cut=best_cut,
        winner_fraction=n_w / n_candidates if n_candidates else 0.0,
        talented_winners=float(best_tw), experienced_losers=float(best_el),
        talented_fraction=best_tw / n_w, empirical=True,
        counts={"winners": n_w, "candidates": n_candidates,
                "tw": best_tw, "el": best_el})
