"""Link-analysis base scores and fitness boosting."""
import numpy as np
import pytest

from fitnet import RankTable, base_scores, boost


class TestBaseScores:
    def test_two_cycle_is_symmetric(self):
        scores = base_scores([(1, 2), (2, 1)])
        assert scores[1] == pytest.approx(0.5, abs=1e-9)
        assert scores[2] == pytest.approx(0.5, abs=1e-9)

    def test_scores_sum_to_one(self):
        g = np.random.default_rng(0)
        edges = {(int(a), int(b)) for a, b in g.integers(0, 50, size=(400, 2))
                 if a != b}
        scores = base_scores(edges)
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(v > 0 for v in scores.values())

    def test_star_hub_gets_max_score(self):
        edges = [(i, 0) for i in range(1, 20)]
        scores = base_scores(edges)
        assert scores[0] == max(scores.values())
        # leaves are symmetric
        leaf_vals = [scores[i] for i in range(1, 20)]
        assert max(leaf_vals) == pytest.approx(min(leaf_vals), rel=1e-9)

    def test_edge_order_invariance(self):
        g = np.random.default_rng(1)
        edges = [(int(a), int(b)) for a, b in g.integers(0, 30, size=(200, 2))
                 if a != b]
        s1 = base_scores(edges)
        shuffled = list(edges)
        g.shuffle(shuffled)
        s2 = base_scores(shuffled)
        for nid in s1:
            assert s1[nid] == pytest.approx(s2[nid], abs=1e-12)

    def test_empty_edge_list_rejected(self):
        with pytest.raises(ValueError):
            base_scores([])


class TestBoost:
    def test_alpha_zero_preserves_ranking(self):
        base = {1: 0.5, 2: 0.3, 3: 0.2}
        table = boost(base, {1: 0.1, 2: 1.9, 3: 1.0}, alpha=0.0)
        assert table.order_base == table.order_boosted
        assert table.rank_base == table.rank_boosted

    def test_fitter_node_overtakes_with_boost(self):
        base = {1: 0.51, 2: 0.49}
        fit = {1: 0.2, 2: 1.8}
        table = boost(base, fit, alpha=1.0)
        assert table.order_base == [1, 2]
        assert table.order_boosted == [2, 1]

    def test_boost_monotonic_in_alpha(self):
        g = np.random.default_rng(2)
        base = {i: float(v) for i, v in enumerate(g.dirichlet(np.ones(30)))}
        fit = {i: float(g.uniform(0.05, 2.0)) for i in range(30)}
        top_fit = max(fit, key=fit.get)
        prev_rank = None
        for alpha in (0.0, 0.5, 1.0, 2.0, 4.0, 16.0, 64.0, 256.0):
            table = boost(base, fit, alpha=alpha)
            r = table.rank_boosted[table.node_ids.index(top_fit)]
            if prev_rank is not None:
                assert r <= prev_rank
            prev_rank = r
        assert prev_rank == 1    # large alpha: fittest node ranks first

    def test_missing_fitness_gets_floor(self):
        base = {1: 0.4, 2: 0.4, 3: 0.2}
        table = boost(base, {1: 0.8}, alpha=1.0)
        assert table.missing_fitness == 2
        assert table.eta_floor == pytest.approx(0.8)
        i2 = table.node_ids.index(2)
        assert table.fitness[i2] == pytest.approx(0.8)

    def test_explicit_floor_applies(self):
        base = {1: 0.5, 2: 0.5}
        table = boost(base, {1: 1e-9, 2: 1.0}, alpha=1.0, eta_floor=0.5)
        i1 = table.node_ids.index(1)
        assert table.fitness[i1] == pytest.approx(0.5)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ValueError):
            boost({1: 1.0}, {1: 1.0}, alpha=-0.5)

    def test_csv_round_trip_shape(self):
        table = boost({1: 0.6, 2: 0.4}, {1: 1.0, 2: 2.0}, alpha=1.0)
        lines = table.to_csv().strip().splitlines()
        assert lines[0] == "id,base,fitness,boosted,rank_base,rank_boosted"
        assert len(lines) == 3
        row = lines[1].split(",")
        assert int(row[0]) == 1
        assert float(row[1]) == pytest.approx(0.6)

    def test_ties_break_by_id(self):
        table = boost({5: 0.5, 3: 0.5}, {5: 1.0, 3: 1.0}, alpha=1.0)
        assert table.order_base == [3, 5]
        assert table.order_boosted == [3, 5]
