"""Dynamic weighted sampler: correctness, bookkeeping, and recycling."""
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fitnet import EmptySamplerError, SlotError, WeightedIndex


def rng(seed=0):
    return np.random.default_rng(seed)


class TestSamplingCorrectness:
    def test_zero_weight_slot_never_sampled(self):
        w = WeightedIndex()
        z = w.insert(0.0)
        a = w.insert(1.0)
        g = rng(1)
        for _ in range(2000):
            assert w.sample(g) != z
        assert w.sample(g) == a

    def test_frequencies_match_weights(self):
        w = WeightedIndex()
        slots = [w.insert(1.0), w.insert(1.0), w.insert(2.0)]
        g = rng(2)
        n = 40_000
        counts = {s: 0 for s in slots}
        for _ in range(n):
            counts[w.sample(g)] += 1
        for s, p in zip(slots, (0.25, 0.25, 0.5)):
            se = math.sqrt(p * (1 - p) * n)
            assert abs(counts[s] - p * n) < 3 * se

    def test_single_live_slot_after_removals(self):
        w = WeightedIndex()
        slots = [w.insert(float(i + 1)) for i in range(10)]
        keep = slots[4]
        for s in slots:
            if s != keep:
                w.remove(s)
        g = rng(3)
        assert all(w.sample(g) == keep for _ in range(100))

    def test_update_to_zero_excludes_slot(self):
        w = WeightedIndex()
        a = w.insert(1.0)
        b = w.insert(1.0)
        w.update(a, 0.0)
        g = rng(4)
        assert all(w.sample(g) == b for _ in range(500))


class TestBookkeeping:
    def test_total_tracks_random_operations(self):
        w = WeightedIndex(capacity=4, rebuild_interval=10_000)
        g = rng(5)
        live = []
        expected = 0.0
        for _ in range(100_000):
            op = g.random()
            if op < 0.5 or not live:
                x = float(g.random() * 10)
                live.append((w.insert(x), x))
                expected += x
            elif op < 0.8:
                i = g.integers(len(live))
                slot, old = live[i]
                x = float(g.random() * 10)
                w.update(slot, x)
                live[i] = (slot, x)
                expected += x - old
            else:
                i = g.integers(len(live))
                slot, old = live.pop(i)
                w.remove(slot)
                expected -= old
        assert w.total_weight == pytest.approx(expected, abs=1e-6)
        assert w.recomputed_total() == pytest.approx(w.total_weight, abs=1e-9)
        assert len(w) == len(live)

    def test_slot_recycling_reuses_freed_slots(self):
        w = WeightedIndex(capacity=2)
        a = w.insert(1.0)
        b = w.insert(1.0)
        w.remove(a)
        c = w.insert(2.0)
        assert c == a          # freed slot comes back before growth
        assert w.capacity == 2
        d = w.insert(3.0)
        e = w.insert(4.0)      # forces growth past the initial capacity
        assert w.capacity >= 4
        assert sorted({b, c, d, e}) == [0, 1, 2, 3]
        assert w.recomputed_total() == pytest.approx(10.0)

    def test_growth_preserves_weights(self):
        w = WeightedIndex(capacity=2)
        slots = [w.insert(float(i + 1)) for i in range(40)]
        for s in slots:
            assert w.weight(s) == float(s + 1) if s == slots[s] else True
        assert w.total_weight == pytest.approx(sum(range(1, 41)))
        g = rng(6)
        counts = np.zeros(40)
        for _ in range(20_000):
            counts[w.sample(g)] += 1
        # heaviest slot should be drawn roughly 40x the lightest
        assert counts[39] > 10 * counts[0]


class TestErrors:
    def test_stale_slot_rejected(self):
        w = WeightedIndex()
        a = w.insert(1.0)
        w.remove(a)
        with pytest.raises(SlotError):
            w.update(a, 2.0)
        with pytest.raises(SlotError):
            w.remove(a)
        with pytest.raises(SlotError):
            w.weight(a)

    def test_unknown_slot_rejected(self):
        w = WeightedIndex()
        w.insert(1.0)
        with pytest.raises(SlotError):
            w.update(999, 1.0)

    def test_negative_weight_rejected(self):
        w = WeightedIndex()
        with pytest.raises(ValueError):
            w.insert(-1.0)
        a = w.insert(1.0)
        with pytest.raises(ValueError):
            w.update(a, -0.5)

    def test_empty_sampler_raises(self):
        w = WeightedIndex()
        with pytest.raises(EmptySamplerError):
            w.sample(rng())
        a = w.insert(1.0)
        w.remove(a)
        with pytest.raises(EmptySamplerError):
            w.sample(rng())

    def test_all_zero_weights_raise(self):
        w = WeightedIndex()
        w.insert(0.0)
        w.insert(0.0)
        with pytest.raises(EmptySamplerError):
            w.sample(rng())


@settings(max_examples=200, deadline=None)
@given(st.lists(
    st.one_of(
        st.tuples(st.just("ins"), st.floats(0.0, 100.0)),
        st.tuples(st.just("upd"), st.floats(0.0, 100.0)),
        st.tuples(st.just("rem"), st.floats(0.0, 1.0)),
    ),
    min_size=1, max_size=60))
def test_total_matches_brute_force(ops):
    w = WeightedIndex(capacity=2)
    weights = {}
    k = 0
    for kind, val in ops:
        if kind == "ins":
            weights[w.insert(val)] = val
        elif kind == "upd" and weights:
            slot = sorted(weights)[k % len(weights)]
            w.update(slot, val)
            weights[slot] = val
        elif kind == "rem" and weights:
            slot = sorted(weights)[int(val * len(weights)) % len(weights)]
            w.remove(slot)
            del weights[slot]
        k += 1
    assert w.total_weight == pytest.approx(sum(weights.values()), abs=1e-9)
    assert w.recomputed_total() == pytest.approx(sum(weights.values()), abs=1e-9)
    assert len(w) == len(weights)


def test_throughput_benchmark_soft():
    """Informational: prints sampled ops/sec, asserts nothing strict."""
    w = WeightedIndex(capacity=1 << 14)
    g = rng(9)
    for _ in range(10_000):
        w.insert(float(g.random()) + 0.01)
    t0 = time.perf_counter()
    n = 50_000
    for _ in range(n):
        w.sample(g)
    dt = time.perf_counter() - t0
    print(f"\nsampler throughput: {n / dt:,.0f} samples/sec")
    assert dt < 60.0
