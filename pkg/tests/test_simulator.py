"""Growth-with-deletion simulator: invariants, rates, and file output."""
import math
import os

import numpy as np
import pytest

from fitnet import (DeltaFitness, EmptyNetworkError, ModelParams, Simulator,
                    TruncatedExponentialFitness)

LAM = 3.3157
EMAX = 2.0


def params(m=5, c=0.0, dist=None, steps=10, interval=None, seed=0, **kw):
    return ModelParams(m=m, c=c, fitness_dist=dist or DeltaFitness(1.0),
                       total_steps=steps,
                       snapshot_interval=interval or steps, seed=seed, **kw)


class TestCounting:
    def test_no_deletion_counts(self):
        p = params(m=1, c=0.0, steps=10)
        sim = Simulator(p)
        for _ in range(10):
            sim.step()
        # seed ring has m+1 = 2 nodes and 2 edges; each step adds 1 node, 1 edge
        assert len(sim.live_list) == 12
        assert sim.insertions == 12
        assert sim.deletions == 0
        assert sim.live_edge_count() == 12

    def test_deletion_rate_matches_c(self):
        p = params(m=2, c=0.9, steps=10_000, seed=3)
        sim = Simulator(p, track_accumulated=False)
        for _ in range(p.total_steps):
            sim.step()
        rate = sim.deletions / p.total_steps
        assert abs(rate - 0.9) < 0.01

    def test_in_degree_sum_equals_edge_count(self):
        p = params(m=3, c=0.5, steps=2000, seed=4)
        sim = Simulator(p, track_accumulated=False)
        for _ in range(p.total_steps):
            sim.step()
        assert sum(sim.live_in_degrees()) == sim.live_edge_count()

    def test_accumulated_bounds_current(self):
        p = params(m=5, c=0.5, dist=TruncatedExponentialFitness(LAM, EMAX),
                   steps=3000, seed=5)
        sim = Simulator(p)
        for _ in range(p.total_steps):
            sim.step()
        for nid in sim.live_list:
            assert sim.acc_count[nid] >= sim.in_deg[nid]


class TestKernel:
    def test_index_weight_is_fitness_times_shifted_degree(self):
        p = params(m=5, c=0.3, dist=TruncatedExponentialFitness(LAM, EMAX),
                   steps=500, seed=6)
        sim = Simulator(p, track_accumulated=False)
        for _ in range(p.total_steps):
            sim.step()
        for nid in sim.live_list:
            w = sim.index.weight(sim.slot_of[nid])
            assert w == pytest.approx(
                sim.fitness[nid] * (sim.in_deg[nid] + p.m), rel=1e-12)

    def test_uniform_deletion_is_uniform(self):
        """Each of 3 live nodes is deleted with probability 1/3."""
        counts = {}
        trials = 30_000
        g = np.random.default_rng(7)
        for tr in range(trials):
            p = params(m=1, c=0.0, steps=2, seed=int(g.integers(2**62)))
            sim = Simulator(p, track_accumulated=False)
            sim.step()           # 3 nodes now live (2 seed + 1)
            victim = sim.delete_uniform()
            counts[victim] = counts.get(victim, 0) + 1
        assert set(counts) == {0, 1, 2}
        exp = trials / 3
        se = math.sqrt(trials * (1 / 3) * (2 / 3))
        for v in counts.values():
            assert abs(v - exp) < 4 * se

    def test_mean_field_growth_no_deletion(self):
        """Delta fitness, c=0: mean (k_in + m)/m tracks (t/i)^(1/2)."""
        p = params(m=5, c=0.0, steps=40_000, seed=8)
        sim = Simulator(p, track_accumulated=False)
        for _ in range(p.total_steps):
            sim.step()
        t = p.total_steps
        for ratio in (2, 5, 10, 30, 100):
            i = t // ratio
            # average over a small birth window around i
            lo, hi = int(i * 0.95), int(i * 1.05)
            ks = [sim.in_deg[n] for n in range(len(sim.birth))
                  if lo <= sim.birth[n] <= hi]
            measured = (np.mean(ks) + p.m) / p.m
            predicted = (t / i) ** 0.5
            assert abs(measured / predicted - 1.0) < 0.10


class TestDeletionBookkeeping:
    def test_delete_removes_all_incident_edges(self):
        p = params(m=3, c=0.0, steps=300, seed=9)
        sim = Simulator(p)
        for _ in range(p.total_steps):
            sim.step()
        v = sim.live_list[len(sim.live_list) // 2]
        acc_before = sim.acc_count[v]
        neighbors = set(sim.in_nbrs[v]) | set(sim.out[v])
        sim._delete(v)
        assert not sim.alive[v]
        assert v not in sim.live_list
        for n in neighbors:
            assert v not in (sim.in_nbrs[n] or set())
            assert v not in (sim.out[n] or [])
        # accumulated count is frozen at death, not zeroed
        assert sim.acc_count[v] == acc_before
        assert sum(sim.live_in_degrees()) == sim.live_edge_count()

    def test_deleted_degrees_recorded(self):
        p = params(m=2, c=0.5, steps=2000, seed=10)
        sim = Simulator(p, track_accumulated=False)
        for _ in range(p.total_steps):
            sim.step()
        assert len(sim.deleted_degrees) == sim.deletions
        assert all(d >= 0 for d in sim.deleted_degrees)

    def test_delete_on_empty_network_raises(self):
        p = params(m=1, c=0.0, steps=1)
        sim = Simulator(p, track_accumulated=False)
        sim.live_list.clear()
        with pytest.raises(EmptyNetworkError):
            sim.delete_uniform()

    def test_truncated_links_when_too_few_candidates(self):
        # m=5 but only 2 live nodes available as targets at the first step
        p = params(m=5, c=0.0, steps=1)
        sim = Simulator(p, track_accumulated=False)
        for v in list(sim.live_list)[:4]:
            sim._delete(v)
        sim.step()
        assert sim.truncated_links >= 3
        assert len(sim.out[len(sim.birth) - 1]) <= 2


class TestRunOutput:
    def test_snapshot_cadence_and_files(self, tmp_path):
        p = params(m=2, c=0.2, steps=1300, interval=100, seed=11)
        manifest = Simulator(p, track_accumulated=False).run(str(tmp_path))
        snaps = sorted(f for f in os.listdir(tmp_path)
                       if f.startswith("snapshot_"))
        assert len(snaps) == 13
        assert manifest["counts"]["insertions"] == 1300 + p.m + 1
        assert len(manifest["snapshots"]) == 13
        steps = [s["step"] for s in manifest["snapshots"]]
        assert steps == list(range(100, 1301, 100))
        assert os.path.exists(tmp_path / "manifest.json")
        assert os.path.exists(tmp_path / "ground_truth.tsv")
        assert not os.path.exists(tmp_path / "INCOMPLETE")
        # per-snapshot deltas sum to totals (first delta includes seed nodes)
        assert (sum(s["insertions"] for s in manifest["snapshots"])
                == 1300 + p.m + 1)
        assert (sum(s["deletions"] for s in manifest["snapshots"])
                == manifest["counts"]["deletions"])

    def test_same_seed_byte_identical(self, tmp_path):
        p = params(m=3, c=0.5, dist=TruncatedExponentialFitness(LAM, EMAX),
                   steps=600, interval=200, seed=12)
        d1, d2 = tmp_path / "a", tmp_path / "b"
        Simulator(p).run(str(d1))
        Simulator(p).run(str(d2))
        for name in sorted(os.listdir(d1)):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_incomplete_marker_on_write_failure(self, tmp_path, monkeypatch):
        p = params(m=2, c=0.0, steps=200, interval=100, seed=13)
        real_open = open

        def failing_open(path, *a, **kw):
            if str(path).endswith(".tsv") and "snapshot_02" in str(path):
                raise OSError("disk full")
            return real_open(path, *a, **kw)

        import fitnet.simulate as sm
        monkeypatch.setattr(sm, "open", failing_open, raising=False)
        with pytest.raises(OSError):
            Simulator(p, track_accumulated=False).run(str(tmp_path))
        assert os.path.exists(tmp_path / "INCOMPLETE")

    def test_ground_truth_matches_node_table(self, tmp_path):
        p = params(m=2, c=0.3, steps=400, interval=200, seed=14)
        sim = Simulator(p, track_accumulated=False)
        sim.run(str(tmp_path))
        lines = (tmp_path / "ground_truth.tsv").read_text().splitlines()
        assert lines[0] == "id\tbirth_step\tfitness"
        assert len(lines) - 1 == len(sim.birth)
        nid, birth, eta = lines[5].split("\t")
        rec = sim.node_record(int(nid))
        assert rec.birth_step == int(birth)
        assert rec.fitness == float(eta)


class TestTrajectoryQuality:
    def test_accumulated_trajectories_fit_well(self):
        """Median log-log correlation of k*(t) is high for grown nodes."""
        from scipy import stats

        p = params(m=5, c=0.5, dist=TruncatedExponentialFitness(LAM, EMAX),
                   steps=20_000, interval=1000, seed=15)
        sim = Simulator(p)
        traj = {}
        snap = 0
        for s in range(1, p.total_steps + 1):
            sim.step()
            if s % p.snapshot_interval == 0:
                snap += 1
                for nid in range(min(2000, len(sim.birth))):
                    traj.setdefault(nid, []).append(sim.acc_count[nid])
        rs = []
        x = np.log(np.arange(1, snap + 1))
        for nid, ks in traj.items():
            ks = np.asarray(ks, dtype=float)
            # dead nodes keep a frozen (flat) accumulated count: exclude them
            if not sim.alive[nid]:
                continue
            if len(ks) == snap and ks[-1] >= 20 and np.ptp(ks) > 0:
                mask = ks >= 1
                if mask.sum() >= 5:
                    rs.append(stats.linregress(
                        x[mask], np.log(ks[mask])).rvalue)
        assert len(rs) >= 10
        assert np.median(rs) >= 0.9
