"""Snapshot series: reading edge-list crawls, accumulation, turnover, cohorts.

A series is a directory of ``snapshot_<index>.tsv`` files (``src<TAB>dst`` per
line) plus an optional ``manifest.json``. Node tokens may be arbitrary strings;
non-integer tokens are hashed to 64-bit ids with collision detection so that
crawl data and simulator output share one id space downstream.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

import numpy as np


class SeriesError(ValueError):
    """Directory does not contain a usable snapshot series."""


class FormatError(ValueError):
    """Too many malformed lines in a snapshot file."""


class IdCollisionError(ValueError):
    """Two distinct string ids hashed to the same 64-bit id."""


MALFORMED_THRESHOLD = 1e-3  # fatal above this fraction of malformed lines

_SNAP_RE = re.compile(r"snapshot_(\d+)\.tsv$")


@dataclass
class SnapshotInfo:
    index: int
    path: str
    n_edges: int = 0
    n_malformed: int = 0


@dataclass
class SnapshotSeries:
    snapshots: list[SnapshotInfo]
    first_seen: dict[int, int]
    last_seen: dict[int, int]
    id_names: dict[int, str] = field(default_factory=dict)  # hashed id -> original
    manifest: dict | None = None

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def indices(self) -> list[int]:
        return [s.index for s in self.snapshots]

    def iter_edges(self, i: int):
        """Yield deduplicated (src, dst) pairs of the i-th snapshot (0-based)."""
        seen = set()
        info = self.snapshots[i]
        with open(info.path) as fh:
            for raw in fh:
                parts = raw.rstrip("\n").split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    continue
                try:
                    edge = (self._to_id(parts[0]), self._to_id(parts[1]))
                except IdCollisionError:
                    raise
                if edge not in seen:
                    seen.add(edge)
                    yield edge

    def _to_id(self, token: str) -> int:
        try:
            return int(token)
        except ValueError:
            pass
        h = int.from_bytes(
            hashlib.blake2b(token.encode(), digest_size=8).digest(), "big")
        prev = self.id_names.get(h)
        if prev is not None and prev != token:
            raise IdCollisionError(f"{prev!r} and {token!r} both hash to {h}")
        self.id_names[h] = token
        return h


def read_series(directory: str) -> SnapshotSeries:
    """Index a snapshot directory; at least two snapshots are required.

    Malformed lines are counted and tolerated up to 0.1% per file.
    """
    try:
        names = os.listdir(directory)
    except OSError as exc:
        raise SeriesError(f"cannot list {directory}: {exc}") from exc
    found = []
    for name in names:
        mm = _SNAP_RE.match(name)
        if mm:
            found.append((int(mm.group(1)), os.path.join(directory, name)))
    found.sort()
    if len(found) < 2:
        raise SeriesError(
            f"{directory}: need at least 2 snapshot files, found {len(found)}")
    indices = [i for i, _ in found]
    if len(set(indices)) != len(indices):
        raise SeriesError(f"{directory}: duplicate snapshot indices")

    series = SnapshotSeries(
        snapshots=[SnapshotInfo(index=i, path=p) for i, p in found],
        first_seen={}, last_seen={})

    manifest_path = os.path.join(directory, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            series.manifest = json.load(fh)

    for pos, info in enumerate(series.snapshots):
        n_lines = 0
        n_bad = 0
        nodes = set()
        with open(info.path) as fh:
            for raw in fh:
                if not raw.strip():
                    continue
                n_lines += 1
                parts = raw.rstrip("\n").split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    n_bad += 1
                    continue
                nodes.add(series._to_id(parts[0]))
                nodes.add(series._to_id(parts[1]))
        if n_lines and n_bad / n_lines > MALFORMED_THRESHOLD:
            raise FormatError(
                f"{info.path}: {n_bad}/{n_lines} malformed lines "
                f"(threshold {MALFORMED_THRESHOLD:.1%})")
        info.n_edges = n_lines - n_bad
        info.n_malformed = n_bad
        for nid in nodes:
            if nid not in series.first_seen:
                series.first_seen[nid] = info.index
            series.last_seen[nid] = info.index
    return series


@dataclass
class AccumulatedSeries:
    """Per-node accumulated in-degree trajectory over snapshot indices."""

    per_node: dict[int, tuple[np.ndarray, np.ndarray]]

    def __len__(self) -> int:
        return len(self.per_node)

    def entry(self, nid: int) -> tuple[np.ndarray, np.ndarray]:
        return self.per_node[nid]

    def final(self, nid: int) -> int:
        return int(self.per_node[nid][1][-1])


def accumulate(series: SnapshotSeries, max_nodes: int | None = None) -> AccumulatedSeries:
    """Compute k*(t) = distinct in-neighbors over snapshots <= t, per node.

    ``max_nodes`` bounds how many nodes are held in memory at once; above the
    budget the work is split into hash partitions and the files are re-read
    once per partition (same result).
    """
    n_parts = 1
    if max_nodes is not None and len(series.first_seen) > max_nodes:
        n_parts = -(-len(series.first_seen) // max_nodes)

    born_at: dict[int, list[int]] = {}
    for nid, f in series.first_seen.items():
        born_at.setdefault(f, []).append(nid)

    per_node: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for part in range(n_parts):
        acc: dict[int, set] = {}
        traj: dict[int, tuple[list, list]] = {}
        active: list[int] = []
        for pos in range(len(series.snapshots)):
            idx = series.snapshots[pos].index
            for nid in born_at.get(idx, ()):
                if n_parts == 1 or nid % n_parts == part:
                    active.append(nid)
            for src, dst in series.iter_edges(pos):
                if n_parts > 1 and dst % n_parts != part:
                    continue
                acc.setdefault(dst, set()).add(src)
            # record k* for every node first seen by now (in this partition)
            for nid in active:
                t_list, k_list = traj.setdefault(nid, ([], []))
                t_list.append(idx)
                k_list.append(len(acc.get(nid, ())))
        for nid, (t_list, k_list) in traj.items():
            per_node[nid] = (np.asarray(t_list, dtype=np.int64),
                             np.asarray(k_list, dtype=np.int64))
    return AccumulatedSeries(per_node=per_node)


@dataclass
class TurnoverStats:
    inserted: list[int]       # per transition (snapshot 2..T)
    removed: list[int]
    c_estimate: float

    @property
    def total_inserted(self) -> int:
        return sum(self.inserted)

    @property
    def total_removed(self) -> int:
        return sum(self.removed)


def turnover(series: SnapshotSeries) -> TurnoverStats:
    """Per-transition insert/remove counts and the aggregate turnover rate.

    Inserted at t: nodes first seen at snapshot t. Removed at t: nodes last
    seen at t-1 (absent from every later snapshot).
    """
    indices = series.indices
    ins_by = {}
    rem_by = {}
    for nid, f in series.first_seen.items():
        ins_by[f] = ins_by.get(f, 0) + 1
    for nid, l in series.last_seen.items():
        rem_by[l] = rem_by.get(l, 0) + 1
    inserted = []
    removed = []
    for prev, cur in zip(indices, indices[1:]):
        inserted.append(ins_by.get(cur, 0))
        removed.append(rem_by.get(prev, 0))
    tot_ins = sum(inserted)
    tot_rem = sum(removed)
    c = tot_rem / tot_ins if tot_ins else 0.0
    return TurnoverStats(inserted=inserted, removed=removed, c_estimate=c)


def snapshot_in_degrees(series: SnapshotSeries, pos: int) -> dict[int, int]:
    """Distinct-in-neighbor counts at the pos-th snapshot (0-based position).

    Nodes that appear only as sources are present with in-degree 0.
    """
    indeg: dict[int, int] = {}
    nbrs: dict[int, set] = {}
    for src, dst in series.iter_edges(pos):
        nbrs.setdefault(dst, set()).add(src)
        indeg.setdefault(src, 0)
    for dst, ss in nbrs.items():
        indeg[dst] = len(ss)
    return indeg


def cohort(series: SnapshotSeries, birth_index: int, measure_index: int) -> list[int]:
    """In-degrees at ``measure_index`` of nodes first seen at ``birth_index``
    and still present then. Empty cohorts return an empty list."""
    indices = series.indices
    if birth_index not in indices or measure_index not in indices:
        raise SeriesError("cohort indices must be snapshot indices of the series")
    if not birth_index < measure_index:
        raise SeriesError("birth snapshot must precede measurement snapshot")
    members = {nid for nid, f in series.first_seen.items()
               if f == birth_index and series.last_seen[nid] >= measure_index}
    indeg = snapshot_in_degrees(series, indices.index(measure_index))
    return [indeg[nid] for nid in sorted(members) if nid in indeg]
