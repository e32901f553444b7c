"""Command-line entry point wiring the pipeline into reproducible runs.

Subcommands: simulate, estimate, theory, winners, rank, report. Every run
writes a ``run_manifest.json`` with the fully resolved configuration; re-running
from the same configuration reproduces outputs byte-identically for a fixed
seed. Exit codes: 0 success, 1 module error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import estimator, ranking, snapshots, theory
from .distributions import (DeltaFitness, ModelParams,
                            TruncatedExponentialFitness, UniformFitness)
from .simulate import Simulator

DEFAULT_LAMBDA = 1.44 / math.log10(math.e)   # measured growth-exponent rate


def _fitness_from_args(args):
    name = args.fitness
    if name == "delta":
        return DeltaFitness(args.eta0 if args.eta0 is not None else 1.0)
    if name == "trunc-exp":
        return TruncatedExponentialFitness(lam=args.lam, eta_max_=args.eta_max)
    if name == "uniform":
        return UniformFitness(args.eta_max)
    raise ValueError(f"unknown fitness law {name!r}")


def _add_fitness_flags(p, default="trunc-exp"):
    p.add_argument("--fitness", choices=["delta", "trunc-exp", "uniform"],
                   default=default)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--eta-max", type=float, default=2.0)
    p.add_argument("--eta0", type=float, default=None,
                   help="fitness value for the delta law (default 1.0)")


def _write_manifest(out_dir, command, config):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "run_manifest.json")
    with open(path, "w") as fh:
        json.dump({"command": command, "config": config}, fh,
                  indent=1, sort_keys=True)


def _write_report(path, pairs):
    with open(path, "w") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {value}\n")


def _config_dict(args, skip=("func", "command")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# subcommand implementations

def cmd_simulate(args) -> int:
    if args.config:
        with open(args.config) as fh:
            params = ModelParams.from_config(fh.read())
    else:
        interval = args.snapshot_interval or max(1, args.steps // args.snapshots)
        params = ModelParams(
            m=args.m, c=args.c, fitness_dist=_fitness_from_args(args),
            total_steps=args.steps, snapshot_interval=interval,
            seed=args.seed, kernel_offset=args.kernel_offset)
    sim = Simulator(params, track_accumulated=True)
    sim.run(args.out)
    with open(os.path.join(args.out, "params.cfg"), "w") as fh:
        fh.write(params.to_config())
    _write_manifest(args.out, "simulate", _config_dict(args))
    print(f"simulate: {params.total_steps} steps, "
          f"{len(sim.live_list)} live nodes, output in {args.out}")
    return 0


def cmd_estimate(args) -> int:
    series = snapshots.read_series(args.input)
    acc = snapshots.accumulate(series, max_nodes=args.max_nodes)
    est = estimator.GrowthExponentEstimator(
        r_threshold=args.r_threshold,
        zero_growth_rule=args.zero_growth_rule).fit(acc)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "growth_fits.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["id", "beta", "intercept", "r", "points", "zero_growth"])
        for f in est.fits_:
            wr.writerow([f.node_id, repr(f.beta), repr(f.intercept),
                         repr(f.pearson_r), f.points_used, int(f.zero_growth)])

    pairs = [("nodes", len(est.fits_)),
             ("nonzero_growth_fraction", est.nonzero_fraction_),
             ("measurable", len(est.measurable_)),
             ("r_threshold", args.r_threshold)]
    betas = est.betas()
    if betas.size >= 100 and np.ptp(betas) > 0:
        try:
            ef = estimator.fit_exponential(betas, beta_max=args.beta_max)
            pairs += [("exp_lambda", ef.lam), ("exp_beta_max", ef.beta_max),
                      ("exp_r_squared", ef.r_squared)]
        except estimator.FitError as exc:
            pairs.append(("exp_fit_error", exc))

    final_deg = list(snapshots.snapshot_in_degrees(series, len(series) - 1).values())
    try:
        pf = estimator.fit_power_law(final_deg, k_min=args.k_min)
        pairs += [("powerlaw_gamma_mle", pf.gamma_mle),
                  ("powerlaw_gamma_ccdf", pf.gamma_ccdf),
                  ("powerlaw_k_min", pf.k_min), ("powerlaw_tail_n", pf.n_tail)]
    except estimator.FitError as exc:
        pairs.append(("powerlaw_fit_error", exc))

    tstats = snapshots.turnover(series)
    pairs += [("turnover_c", tstats.c_estimate),
              ("turnover_inserted", tstats.total_inserted),
              ("turnover_removed", tstats.total_removed)]
    _write_report(os.path.join(args.out, "estimate_report.txt"), pairs)
    _write_manifest(args.out, "estimate", _config_dict(args))
    for key, value in pairs:
        print(f"{key} = {value}")
    return 0


def cmd_theory(args) -> int:
    tp = theory.TheoryParams.solve(args.c, _fitness_from_args(args))
    pairs = [("c", tp.c), ("A", tp.A), ("eps_gap", tp.eps_gap),
             ("beta_max", tp.beta_max), ("gamma_pred", tp.gamma_pred),
             ("residual", tp.residual)]
    pairs += [(k, v) for k, v in sorted(tp.corrections.items())]
    for key, value in pairs:
        print(f"{key} = {value}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_report(os.path.join(args.out, "theory_report.txt"), pairs)
        _write_manifest(args.out, "theory", _config_dict(args))
    return 0


def cmd_winners(args) -> int:
    if args.input:
        series = snapshots.read_series(args.input)
        acc = snapshots.accumulate(series)
        init = snapshots.snapshot_in_degrees(series, 0)
        last = series.indices[-1]
        persistent = {nid: d for nid, d in init.items()
                      if series.last_seen.get(nid, 0) == last}
        final = {nid: acc.final(nid) for nid in persistent if nid in acc.per_node}
        rep = theory.empirical_winners(persistent, final, k_tg=args.ktg)
    else:
        rep = theory.winners(k_tg=args.ktg, T=args.T, lam=args.lam,
                             beta_max=args.beta_max, gamma_init=args.gamma_init)
    pairs = [("k_tg", rep.k_tg), ("k_cut", rep.k_cut),
             ("winner_fraction", rep.winner_fraction),
             ("talented_winners", rep.talented_winners),
             ("experienced_losers", rep.experienced_losers),
             ("r_tw", rep.talented_fraction),
             ("empirical", rep.empirical)]
    for key, value in pairs:
        print(f"{key} = {value}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_report(os.path.join(args.out, "winners_report.txt"), pairs)
        _write_manifest(args.out, "winners", _config_dict(args))
    return 0


def cmd_rank(args) -> int:
    series = snapshots.read_series(args.input)
    edges = list(series.iter_edges(len(series) - 1))
    base = ranking.base_scores(edges)

    fitness_est: dict[int, float] = {}
    if args.fits:
        with open(args.fits, newline="") as fh:
            for row in csv.DictReader(fh):
                if int(row["zero_growth"]):
                    continue
                beta = float(row["beta"])
                if args.use_eta:
                    beta = theory.fitness_from_growth(beta, args.A, args.c)
                fitness_est[int(row["id"])] = beta
    table = ranking.boost(base, fitness_est, alpha=args.alpha)
    out_dir = os.path.dirname(os.path.abspath(args.out)) or "."
    os.makedirs(out_dir, exist_ok=True)
    with open(args.out, "w") as fh:
        fh.write(table.to_csv())
    _write_manifest(out_dir, "rank", _config_dict(args))
    print(f"rank: {len(table.node_ids)} nodes, "
          f"{table.missing_fitness} without fitness estimates -> {args.out}")
    return 0


def cmd_report(args) -> int:
    """Plot-ready data for the five figure analogues."""
    series = snapshots.read_series(args.input)
    acc = snapshots.accumulate(series)
    est = estimator.GrowthExponentEstimator(r_threshold=args.r_threshold).fit(acc)
    os.makedirs(args.out, exist_ok=True)
    indices = series.indices
    init = snapshots.snapshot_in_degrees(series, 0)

    # winners/losers curves and winner initial-degree CCDF
    persistent = {nid: d for nid, d in init.items()
                  if series.last_seen.get(nid, 0) == indices[-1]}
    final = {nid: acc.final(nid) for nid in persistent if nid in acc.per_node}
    winners_init = sorted(d for nid, d in persistent.items()
                          if d < args.ktg and final.get(nid, 0) >= args.ktg)
    losers_init = sorted(d for nid, d in persistent.items()
                         if d < args.ktg and final.get(nid, 0) < args.ktg)
    with open(os.path.join(args.out, "winners_curves.tsv"), "w") as fh:
        fh.write("cutoff\ttalented_winners\texperienced_losers\n")
        w = np.asarray(winners_init, dtype=float)
        l = np.asarray(losers_init, dtype=float)
        for kc in np.unique(np.concatenate([w, l])) if w.size + l.size else []:
            tw = int(np.searchsorted(w, kc, side="left"))
            el = int(l.size - np.searchsorted(l, kc, side="right"))
            fh.write(f"{kc:g}\t{tw}\t{el}\n")
    with open(os.path.join(args.out, "winners_initial_ccdf.tsv"), "w") as fh:
        fh.write("initial_degree\tccdf\n")
        w = np.asarray(winners_init, dtype=float)
        for i, kc in enumerate(np.unique(w)):
            frac = (w >= kc).mean() if w.size else 0.0
            fh.write(f"{kc:g}\t{frac!r}\n")

    # growth-exponent distribution (log-linear histogram)
    betas = est.betas()
    with open(os.path.join(args.out, "exponent_hist.tsv"), "w") as fh:
        fh.write("beta\tdensity\n")
        if betas.size:
            counts, edges = np.histogram(
                betas, bins=50, range=(0.0, max(betas.max(), 1e-9)), density=True)
            for ctr, cnt in zip(0.5 * (edges[:-1] + edges[1:]), counts):
                fh.write(f"{ctr!r}\t{cnt!r}\n")

    # mean exponent vs initial degree (experience profile)
    profile = estimator.fitness_vs_experience(est.measurable_, init)
    with open(os.path.join(args.out, "fitness_vs_experience.tsv"), "w") as fh:
        fh.write("k_lo\tk_hi\tcount\tmean_beta\tlam\n")
        for row in profile:
            fh.write(f"{row['k_lo']!r}\t{row['k_hi']!r}\t{row['count']}"
                     f"\t{row['mean_beta']!r}\t{row['lam']!r}\n")

    # same-age cohort degree distribution
    birth = indices[1] if len(indices) > 2 else indices[0]
    degs = snapshots.cohort(series, birth, indices[-1])
    with open(os.path.join(args.out, "same_age_distribution.tsv"), "w") as fh:
        fh.write("degree\tcount\n")
        if degs:
            ks, cnt = np.unique(degs, return_counts=True)
            for kk, cc in zip(ks, cnt):
                fh.write(f"{kk}\t{cc}\n")

    # per-snapshot degree distributions
    with open(os.path.join(args.out, "monthly_degree_distributions.tsv"), "w") as fh:
        fh.write("snapshot\tdegree\tcount\n")
        for pos, idx in enumerate(indices):
            dd = list(snapshots.snapshot_in_degrees(series, pos).values())
            ks, cnt = np.unique(dd, return_counts=True)
            for kk, cc in zip(ks, cnt):
                fh.write(f"{idx}\t{kk}\t{cc}\n")

    _write_manifest(args.out, "report", _config_dict(args))
    print(f"report: figure data written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fitnet",
        description="fitness-with-deletion network growth: simulation, "
                    "estimation, theory, winners, ranking")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the growth model")
    p.add_argument("--config", help="flat key=value parameter file")
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--c", type=float, default=0.0)
    _add_fitness_flags(p)
    p.add_argument("--steps", type=int, default=130000)
    p.add_argument("--snapshots", type=int, default=13,
                   help="number of snapshots (sets the interval)")
    p.add_argument("--snapshot-interval", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel-offset", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="growth-method estimation on snapshots")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--r-threshold", type=float, default=0.8)
    p.add_argument("--zero-growth-rule", choices=["events", "factor"],
                   default="events")
    p.add_argument("--k-min", type=int, default=10)
    p.add_argument("--beta-max", type=float, default=None)
    p.add_argument("--max-nodes", type=int, default=None,
                   help="memory budget for accumulation (nodes per pass)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("theory", help="mean-field constants and exponents")
    p.add_argument("--c", type=float, default=0.91)
    _add_fitness_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("winners", help="talented-winners analysis")
    p.add_argument("--ktg", type=float, default=1000.0)
    p.add_argument("--T", type=float, default=13.0)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--beta-max", type=float, default=2.0)
    p.add_argument("--gamma-init", type=float, default=1.8)
    p.add_argument("--in", dest="input", default=None,
                   help="snapshot directory for the empirical analysis")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_winners)

    p = sub.add_parser("rank", help="fitness-boosted link-analysis ranking")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--fits", default=None, help="growth_fits.csv from estimate")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--use-eta", action="store_true",
                   help="map growth exponents to fitness via A and c")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", help="plot-ready data for the figure analogues")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ktg", type=float, default=1000.0)
    p.add_argument("--r-threshold", type=float, default=0.8)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"fitnet {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
