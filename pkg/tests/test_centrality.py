"""Absolute influence centrality and the what-if experiments."""

import numpy as np
import pytest

from netgen import random_network
from signed_influence import (
    InfluenceMatrix,
    NoSuchEdgeError,
    ZeroDeltaError,
    absolute_centrality,
    flip_edge_signs,
    perturb_initial,
)
from signed_influence.pipeline import run_analysis


def _influence(theta):
    theta = np.asarray(theta, dtype=float)
    return InfluenceMatrix(theta=theta, theta_abs=np.abs(theta))


class TestAbsoluteCentrality:
    def test_scores_are_column_abs_sums(self):
        theta = [[0.5, -0.25], [0.0, 0.75]]
        res = absolute_centrality(_influence(theta))
        assert np.allclose(res.scores, [0.5, 1.0])
        assert res.ranking == (1, 0)
        assert res.most_influential == 1

    def test_ties_break_by_lowest_id(self):
        res = absolute_centrality(_influence(np.eye(4)))
        assert res.ranking == (0, 1, 2, 3)
        assert res.most_influential == 0

    def test_reference_network(self, ref11):
        res = run_analysis(ref11.net, ref11.params, ref11.x0, gain_method="solve")
        expected = [0.5, 0, 0, 0, 1.62, 3.92, 0, 0, 1.0824, 1.1545, 1.4431]
        assert np.allclose(res.centrality.scores, expected, atol=1e-3)
        assert res.centrality.most_influential == 5
        # ranking: stubborn leader, singleton leader, then antagonists
        assert res.centrality.ranking[:5] == (5, 4, 10, 9, 8)

    def test_independent_of_initial_opinions(self, ref11):
        a = run_analysis(ref11.net, ref11.params, ref11.x0, gain_method="solve")
        b = run_analysis(ref11.net, ref11.params, ref11.x0 * 13.7, gain_method="solve")
        assert np.allclose(a.centrality.scores, b.centrality.scores)
        assert a.centrality.ranking == b.centrality.ranking


class TestPerturbInitial:
    def test_rejects_zero_delta(self, ref11):
        with pytest.raises(ZeroDeltaError):
            perturb_initial(ref11.net, ref11.params, ref11.x0, 0, 0.0)

    def test_reference_stubborn_leader(self, ref11):
        res = perturb_initial(ref11.net, ref11.params, ref11.x0, 5, 1.0)
        assert res.deviation_per_unit == pytest.approx(3.92, abs=1e-9)

    def test_non_influential_agent_gives_zero(self, ref11):
        res = perturb_initial(ref11.net, ref11.params, ref11.x0, 1, 2.5)
        assert res.deviation_per_unit == pytest.approx(0.0, abs=1e-12)

    def test_homogeneous_in_delta(self, ref11):
        a = perturb_initial(ref11.net, ref11.params, ref11.x0, 8, 1.0)
        b = perturb_initial(ref11.net, ref11.params, ref11.x0, 8, 17.0)
        assert a.deviation_per_unit == pytest.approx(b.deviation_per_unit)

    def test_matches_centrality_scores(self):
        for seed in range(15):
            rn = random_network(seed)
            res = run_analysis(rn.net, rn.params, rn.x0, gain_method="solve")
            for agent in range(rn.net.n):
                dev = perturb_initial(
                    rn.net, rn.params, rn.x0, agent, 0.7
                ).deviation_per_unit
                assert dev == pytest.approx(
                    res.centrality.scores[agent], abs=1e-8
                ), (seed, agent)


class TestFlipEdgeSigns:
    def test_rejects_missing_edge(self, ref11):
        with pytest.raises(NoSuchEdgeError):
            flip_edge_signs(ref11.net, ref11.params, ref11.x0, ((4, 0),))

    def test_reference_experiment(self, ref11):
        res = flip_edge_signs(ref11.net, ref11.params, ref11.x0, ((0, 5), (1, 9)))
        assert res.mean_abs_deviation == pytest.approx(0.1493, abs=1e-3)
        for agent in (5, 6, 7):
            assert agent in res.unchanged

    def test_flip_twice_is_identity(self, ref11):
        once = flip_edge_signs(ref11.net, ref11.params, ref11.x0, ((0, 5),))
        import signed_influence as si

        net_flipped = si.build_network(
            ref11.net.n,
            [(i, j, -w if (i, j) == (0, 5) else w) for i, j, w in ref11.net.edges],
        )
        back = flip_edge_signs(net_flipped, ref11.params, ref11.x0, ((0, 5),))
        assert np.allclose(back.z_flipped, once.z_base, atol=1e-10)

    def test_flip_without_influence_path_changes_nothing(self, zoo17):
        # the unbalanced sink decays to zero, so flipping the edge that
        # listens to it cannot move any steady-state opinion
        res = flip_edge_signs(zoo17.net, zoo17.params, zoo17.x0, ((3, 14),))
        assert res.mean_abs_deviation == pytest.approx(0.0, abs=1e-12)
        assert len(res.unchanged) == zoo17.net.n

    def test_flip_can_change_sink_taxonomy(self, ref11):
        # flipping one internal antagonistic edge makes the sink unbalanced:
        # its members then decay to zero
        res = flip_edge_signs(ref11.net, ref11.params, ref11.x0, ((8, 9),))
        assert res.z_flipped[8] == pytest.approx(0.0, abs=1e-9)
        assert res.z_flipped[9] == pytest.approx(0.0, abs=1e-9)
