"""Fitness-boosted ranking: damped link-analysis scores times eta^alpha."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConvergenceError(RuntimeError):
    """Power iteration failed to reach tolerance."""


def base_scores(edges, damping: float = 0.85, tol: float = 1e-10,
                max_iter: int = 1000) -> dict[int, float]:
    """Damped link-analysis scores by power iteration.

    ``edges`` is an iterable of (src, dst) pairs. Dangling mass is
    redistributed uniformly; scores sum to 1. Insensitive to edge order.
    """
    edge_list = sorted(set(edges))
    if not edge_list:
        raise ValueError("empty snapshot: no edges to score")
    ids = sorted({n for e in edge_list for n in e})
    pos = {n: i for i, n in enumerate(ids)}
    n = len(ids)

    src = np.fromiter((pos[s] for s, _ in edge_list), dtype=np.int64)
    dst = np.fromiter((pos[d] for _, d in edge_list), dtype=np.int64)
    out_deg = np.bincount(src, minlength=n).astype(float)
    dangling = out_deg == 0
    inv_out = np.zeros(n)
    inv_out[~dangling] = 1.0 / out_deg[~dangling]

    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = x * inv_out
        nxt = np.bincount(dst, weights=contrib[src], minlength=n)
        nxt = damping * (nxt + x[dangling].sum() / n)
        nxt += (1.0 - damping) / n
        if np.abs(nxt - x).sum() < tol:
            x = nxt
            break
        x = nxt
    else:
        raise ConvergenceError(f"no convergence in {max_iter} iterations")
    x = x / x.sum()
    return {nid: float(x[pos[nid]]) for nid in ids}


@dataclass
class RankTable:
    node_ids: list[int]
    base: list[float]
    fitness: list[float]
    boosted: list[float]
    rank_base: list[int]       # 1-based positions, best first
    rank_boosted: list[int]
    missing_fitness: int = 0
    eta_floor: float = 1e-3
    alpha: float = 0.0
    order_base: list[int] = field(default_factory=list)     # ids best-first
    order_boosted: list[int] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["id,base,fitness,boosted,rank_base,rank_boosted"]
        for i, nid in enumerate(self.node_ids):
            lines.append(f"{nid},{self.base[i]!r},{self.fitness[i]!r},"
                         f"{self.boosted[i]!r},{self.rank_base[i]},"
                         f"{self.rank_boosted[i]}")
        return "\n".join(lines) + "\n"


def _ranks(ids, scores):
    """Best-first order and 1-based rank positions; ties break by id."""
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    rank = [0] * len(ids)
    for p, i in enumerate(order, start=1):
        rank[i] = p
    return [ids[i] for i in order], rank


def boost(base: dict[int, float], fitness_est: dict[int, float],
          alpha: float = 1.0, eta_floor: float | None = None) -> RankTable:
    """Multiply base scores by fitness^alpha and re-rank.

    Nodes without a fitness estimate get the floor (smallest positive estimate
    in the table, or 1e-3 if none); the count of such nodes is reported.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    ids = sorted(base)
    if eta_floor is None:
        positive = [v for v in fitness_est.values() if v > 0]
        eta_floor = min(positive) if positive else 1e-3
    if eta_floor <= 0:
        raise ValueError("eta_floor must be positive")

    missing = 0
    etas = []
    for nid in ids:
        eta = fitness_est.get(nid)
        if eta is None:
            missing += 1
            eta = eta_floor
        etas.append(max(eta, eta_floor))
    scores = [base[nid] for nid in ids]
    boosted = [s * (e ** alpha) for s, e in zip(scores, etas)]

    order_b, rank_b = _ranks(ids, scores)
    order_x, rank_x = _ranks(ids, boosted)
    return RankTable(node_ids=ids, base=scores, fitness=etas, boosted=boosted,
                     rank_base=rank_b, rank_boosted=rank_x,
                     missing_fitness=missing, eta_floor=eta_floor, alpha=alpha,
                     order_base=order_b, order_boosted=order_x)
