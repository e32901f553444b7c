"""Growth-with-deletion simulator.

Each step inserts one node with fitness drawn from the configured law and m
out-links placed by the fitness-degree kernel (attachment weight
eta * (in_degree + offset)); then, with probability c, one uniformly random
live node is deleted with all of its edges. The loop is strictly sequential
for determinism; run seed sweeps as separate processes.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .distributions import ModelParams, DeltaFitness, TruncatedExponentialFitness, \
    UniformFitness, EmpiricalFitness
from .sampler import WeightedIndex


class EmptyNetworkError(RuntimeError):
    """Deletion requested on an empty network."""


@dataclass
class NodeRecord:
    id: int
    birth_step: int
    fitness: float
    alive: bool
    in_degree: int
    accumulated_in_degree: int


class _UniformStream:
    """Buffered uniform floats from a numpy Generator; exposes random()."""

    __slots__ = ("_gen", "_buf", "_i", "_n")

    def __init__(self, gen, block: int = 8192):
        self._gen = gen
        self._n = block
        self._buf = gen.random(block)
        self._i = 0

    def random(self) -> float:
        i = self._i
        if i == self._n:
            self._buf = self._gen.random(self._n)
            i = 0
        self._i = i + 1
        return self._buf[i]


def _params_dict(params: ModelParams) -> dict:
    d = {"m": params.m, "c": params.c, "steps": params.total_steps,
         "snapshot_interval": params.snapshot_interval, "seed": params.seed,
         "kernel_offset": params.offset}
    fd = params.fitness_dist
    if isinstance(fd, DeltaFitness):
        d.update(fitness="delta", eta0=fd.eta0)
    elif isinstance(fd, TruncatedExponentialFitness):
        d.update(fitness="trunc-exp", **{"lambda": fd.lam}, eta_max=fd.eta_max_)
    elif isinstance(fd, UniformFitness):
        d.update(fitness="uniform", eta_max=fd.eta_max_)
    elif isinstance(fd, EmpiricalFitness):
        d.update(fitness="empirical", n_samples=len(fd.samples))
    return d


class Simulator:
    """Owns the full mutable state of one run."""

    def __init__(self, params: ModelParams, track_accumulated: bool = True,
                 track_events: bool = False):
        self.params = params
        self.track_accumulated = track_accumulated
        self.track_events = track_events

        ss = np.random.SeedSequence(params.seed)
        fit_ss, u_ss = ss.spawn(2)
        self._fit_rng = np.random.default_rng(fit_ss)
        self._u = _UniformStream(np.random.default_rng(u_ss))

        self.t = 0
        self.birth: list[int] = []
        self.fitness: list[float] = []
        self.alive = bytearray()
        self.in_deg: list[int] = []
        self.acc_count: list[int] = []
        self.out: list = []        # live out-neighbor lists; None once dead
        self.in_nbrs: list = []    # live in-neighbor sets; None once dead
        self.acc_nbrs: list = []   # accumulated in-neighbor sets; None once dead

        self.index = WeightedIndex(capacity=1024)
        self.slot_of: list[int] = []
        self.node_of: list[int] = []

        self.live_list: list[int] = []
        self._live_pos: list[int] = []

        self.insertions = 0
        self.deletions = 0
        self.dropped_links = 0      # collision cap exceeded
        self.truncated_links = 0    # fewer live candidates than m
        self.deleted_degrees: list[int] = []
        self.events: list[tuple] = []

        self._seed_network()

    # construction

    def _seed_network(self):
        m = self.params.m
        n0 = m + 1
        for i in range(n0):
            self._new_node(birth=0)
        for i in range(n0):
            self._add_edge(i, (i + 1) % n0)

    def _new_node(self, birth: int) -> int:
        nid = len(self.birth)
        eta = self.params.fitness_dist.sample(self._fit_rng)
        self.birth.append(birth)
        self.fitness.append(eta)
        self.alive.append(1)
        self.in_deg.append(0)
        self.acc_count.append(0)
        self.out.append([])
        self.in_nbrs.append(set())
        self.acc_nbrs.append(set() if self.track_accumulated else None)
        slot = self.index.insert(eta * self.params.offset)
        self.slot_of.append(slot)
        if slot == len(self.node_of):
            self.node_of.append(nid)
        else:
            self.node_of[slot] = nid
        self._live_pos.append(len(self.live_list))
        self.live_list.append(nid)
        self.insertions += 1
        return nid

    def _add_edge(self, src: int, dst: int) -> None:
        self.out[src].append(dst)
        self.in_nbrs[dst].add(src)
        k = self.in_deg[dst] + 1
        self.in_deg[dst] = k
        if self.track_accumulated:
            acc = self.acc_nbrs[dst]
            if src not in acc:
                acc.add(src)
                self.acc_count[dst] += 1
        else:
            self.acc_count[dst] += 1
        self.index.update(self.slot_of[dst],
                          self.fitness[dst] * (k + self.params.offset))

    # dynamics

    def step(self) -> None:
        self.t += 1
        u = self._u
        m = self.params.m
        index = self.index
        node_of = self.node_of

        n_live = len(self.live_list)
        want = min(m, n_live)
        if want < m:
            self.truncated_links += m - want

        targets: list[int] = []
        if want:
            seen = set()
            total_ok = index.total_weight > 0.0
            for _ in range(want):
                if not total_ok:
                    self.truncated_links += 1
                    continue
                tgt = -1
                for _attempt in range(50):
                    cand = node_of[index.sample(u)]
                    if cand not in seen:
                        tgt = cand
                        break
                if tgt < 0:
                    self.dropped_links += 1
                    continue
                seen.add(tgt)
                targets.append(tgt)

        nid = self._new_node(birth=self.t)
        for tgt in targets:
            self._add_edge(nid, tgt)
        if self.track_events:
            self.events.append(("insert", self.t, nid, tuple(targets)))

        if self.params.c > 0.0 and u.random() < self.params.c:
            self.delete_uniform()

    def delete_uniform(self) -> int:
        """Delete one uniformly chosen live node with all its edges."""
        n_live = len(self.live_list)
        if n_live == 0:
            raise EmptyNetworkError("no live nodes to delete")
        victim = self.live_list[int(self._u.random() * n_live)]
        self._delete(victim)
        return victim

    def _delete(self, v: int) -> None:
        offset = self.params.offset
        self.deleted_degrees.append(self.in_deg[v])
        if self.track_events:
            self.events.append(("delete", self.t, v, self.in_deg[v],
                                len(self.out[v])))
        # Unhook inbound edges: sources lose one out-edge each.
        for s in self.in_nbrs[v]:
            self.out[s].remove(v)
        # Unhook outbound edges: targets lose one in-edge and kernel weight.
        for tgt in self.out[v]:
            self.in_nbrs[tgt].discard(v)
            k = self.in_deg[tgt] - 1
            self.in_deg[tgt] = k
            self.index.update(self.slot_of[tgt],
                              self.fitness[tgt] * (k + offset))
        self.alive[v] = 0
        self.in_nbrs[v] = None
        self.out[v] = None
        self.acc_nbrs[v] = None
        self.index.remove(self.slot_of[v])
        # Swap-remove from the uniform-victim list.
        pos = self._live_pos[v]
        last = self.live_list[-1]
        self.live_list[pos] = last
        self._live_pos[last] = pos
        self.live_list.pop()
        self.deletions += 1

    # bulk execution and snapshot output

    def run(self, out_dir: str | None = None):
        """Advance total_steps, emitting a snapshot every snapshot_interval.

        Returns the manifest dict. With ``out_dir`` set, snapshot TSVs, the
        manifest, and the ground-truth table are written there.
        """
        p = self.params
        n_snaps = p.total_steps // p.snapshot_interval
        pad = max(2, len(str(n_snaps)))
        snap_meta = []
        first_vis: dict[int, int] = {}
        last_vis: dict[int, int] = {}
        prev_ins, prev_del = 0, 0
        prev_dropped, prev_trunc = 0, 0

        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
        try:
            snap_idx = 0
            for s in range(1, p.total_steps + 1):
                self.step()
                if s % p.snapshot_interval == 0:
                    snap_idx += 1
                    name = f"snapshot_{snap_idx:0{pad}d}.tsv"
                    edges = 0
                    visible = set()
                    lines = [] if out_dir is not None else None
                    for nid in self.live_list:
                        row = self.out[nid]
                        if row:
                            visible.add(nid)
                            visible.update(row)
                            edges += len(row)
                            if lines is not None:
                                lines.extend(f"{nid}\t{t}\n" for t in sorted(row))
                    if lines is not None:
                        with open(os.path.join(out_dir, name), "w") as fh:
                            # deterministic order: sort by source id
                            fh.writelines(sorted(lines))
                    for nid in visible:
                        first_vis.setdefault(nid, snap_idx)
                        last_vis[nid] = snap_idx
                    snap_meta.append({
                        "index": snap_idx, "step": s, "file": name,
                        "edges": edges, "visible": len(visible),
                        "insertions": self.insertions - prev_ins,
                        "deletions": self.deletions - prev_del,
                        "dropped_links": self.dropped_links - prev_dropped,
                        "truncated_links": self.truncated_links - prev_trunc,
                        "_visible_set": visible,
                    })
                    prev_ins, prev_del = self.insertions, self.deletions
                    prev_dropped = self.dropped_links
                    prev_trunc = self.truncated_links
        except OSError:
            if out_dir is not None:
                try:
                    with open(os.path.join(out_dir, "INCOMPLETE"), "w") as fh:
                        fh.write("run aborted: snapshot write failure\n")
                except OSError:
                    pass
            raise

        # Snapshot-visibility insert/remove counts (first/last appearance).
        ins_by_snap: dict[int, int] = {}
        rem_by_snap: dict[int, int] = {}
        for f in first_vis.values():
            ins_by_snap[f] = ins_by_snap.get(f, 0) + 1
        for l in last_vis.values():
            rem_by_snap[l + 1] = rem_by_snap.get(l + 1, 0) + 1
        for meta in snap_meta:
            meta.pop("_visible_set")
            idx = meta["index"]
            meta["inserted"] = ins_by_snap.get(idx, 0)
            # nodes last seen at idx-1 count as removed at the transition into idx;
            # nodes still visible in the final snapshot are not removals
            meta["removed"] = rem_by_snap.get(idx, 0) if idx > 1 else 0

        manifest = {
            "params": _params_dict(p),
            "seed": p.seed,
            "snapshots": snap_meta,
            "counts": {"insertions": self.insertions,
                       "deletions": self.deletions,
                       "dropped_links": self.dropped_links,
                       "truncated_links": self.truncated_links,
                       "final_live_nodes": len(self.live_list)},
        }
        if out_dir is not None:
            try:
                with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
                    json.dump(manifest, fh, indent=1, sort_keys=True)
                with open(os.path.join(out_dir, "ground_truth.tsv"), "w") as fh:
                    fh.write("id\tbirth_step\tfitness\n")
                    for nid in range(len(self.birth)):
                        fh.write(f"{nid}\t{self.birth[nid]}\t{self.fitness[nid]!r}\n")
            except OSError:
                with open(os.path.join(out_dir, "INCOMPLETE"), "w") as fh:
                    fh.write("run aborted: manifest/ground-truth write failure\n")
                raise
        return manifest

    # inspection

    def node_record(self, nid: int) -> NodeRecord:
        return NodeRecord(
            id=nid, birth_step=self.birth[nid], fitness=self.fitness[nid],
            alive=bool(self.alive[nid]), in_degree=self.in_deg[nid],
            accumulated_in_degree=self.acc_count[nid])

    def live_in_degrees(self) -> list[int]:
        return [self.in_deg[n] for n in self.live_list]

    def live_edge_count(self) -> int:
        return sum(len(self.out[n]) for n in self.live_list)

    def node_table(self) -> dict[int, NodeRecord]:
        return {nid: self.node_record(nid) for nid in range(len(self.birth))}


def run_simulation(params: ModelParams, out_dir: str,
                   track_accumulated: bool = True):
    """Run one full simulation, writing snapshots; returns (series, node table).

    The returned series is read back from the emitted files, so downstream
    analysis sees exactly what an external pipeline would see.
    """
    from .snapshots import read_series

    sim = Simulator(params, track_accumulated=track_accumulated)
    sim.run(out_dir)
    series = read_series(out_dir)
    return series, sim.node_table()
