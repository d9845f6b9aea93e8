"""Signal-flow graph construction, reduction, gains and influence assembly."""

import dataclasses

import numpy as np
import pytest

from netgen import random_network
from signed_influence import (
    AgentParams,
    ComplexityCapExceededError,
    NotANodeError,
    SfgGraph,
    SinkSpectrum,
    SourceKind,
    SourceSpec,
    attach_probe,
    build_matrices,
    build_network,
    classify,
    individual_influence,
    mason_gain,
    mason_influence,
    reduce_sfg,
    solve_gain,
)
from signed_influence.pipeline import compute_spectra, run_analysis


def _stack(net, params):
    cls = classify(net, params)
    m = build_matrices(net, params, cls)
    from signed_influence import build_full_sfg

    full = build_full_sfg(m, cls)
    spectra = compute_spectra(m, cls)
    reduced = reduce_sfg(full, cls, spectra, m)
    return cls, m, full, spectra, reduced


class TestFullSfg:
    def test_reference_network_node_and_source_count(self, ref11):
        _, _, full, _, _ = _stack(ref11.net, ref11.params)
        assert len(full.nodes) == 13  # 11 final opinions + 2 stubborn initials
        kinds = [s.kind for s in full.sources]
        assert kinds == [
            SourceKind.SINGLETON_LEADER,
            SourceKind.STUBBORN_INITIAL,
            SourceKind.STUBBORN_INITIAL,
        ]
        assert full.sources[0].agent == 4
        assert {s.agent for s in full.sources[1:]} == {0, 5}

    def test_sources_have_no_incoming_branches(self, ref11):
        _, _, full, _, reduced = _stack(ref11.net, ref11.params)
        for g in (full, reduced):
            for _, dst, _ in g.branches:
                assert dst[0] != "source"

    def test_single_stubborn_isolated_agent(self):
        net = build_network(1, [])
        params = AgentParams(gamma=(0.5,), beta=(0.3,))
        _, _, full, _, _ = _stack(net, params)
        assert len(full.nodes) == 2
        gains = {(src, dst): g for src, dst, g in full.branches}
        assert gains[("agent", 0), ("agent", 0)] == pytest.approx(0.7)
        assert gains[("source", 0), ("agent", 0)] == pytest.approx(0.3)

    def test_no_stubborn_agents_leaves_only_leader_sources(self, zoo17):
        _, _, full, _, _ = _stack(zoo17.net, zoo17.params)
        assert all(s.kind == SourceKind.SINGLETON_LEADER for s in full.sources)
        assert len(full.nodes) == 17

    def test_branch_gains_are_matrix_entries(self, ref11):
        _, m, full, _, _ = _stack(ref11.net, ref11.params)
        gains = {(src, dst): g for src, dst, g in full.branches}
        assert gains[("agent", 1), ("agent", 0)] == pytest.approx(m.P[0, 1])
        assert gains[("agent", 7), ("agent", 0)] == pytest.approx(0.13)


class TestReduceSfg:
    def test_reference_network_source_catalog(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        labels = [(s.kind, s.agent, s.sink, s.side) for s in reduced.sources]
        assert labels == [
            (SourceKind.SINGLETON_LEADER, 4, 0, None),
            (SourceKind.BALANCED_PARTITION, None, 2, 1),
            (SourceKind.BALANCED_PARTITION, None, 2, -1),
            (SourceKind.STUBBORN_INITIAL, 0, None, None),
            (SourceKind.STUBBORN_INITIAL, 5, None, None),
        ]
        assert reduced.sources[1].members == (8,)
        assert reduced.sources[2].members == (9, 10)
        # stubborn-containing sink members stay non-source
        assert reduced.nonsource_agents() == (0, 1, 2, 3, 5, 6, 7)

    def test_partition_branch_gains_sum_members(self, ref11):
        _, m, _, _, reduced = _stack(ref11.net, ref11.params)
        gains = {(src, dst): g for src, dst, g in reduced.branches}
        # follower 1 listens to both members of the negative partition
        assert gains[("source", 2), ("agent", 1)] == pytest.approx(m.P[1, 9] + m.P[1, 10])

    def test_cooperative_pair_sum_rule(self):
        net = build_network(
            3, [(0, 1, 2.0), (0, 2, 3.0), (1, 2, 1.0), (2, 1, 1.0)]
        )
        params = AgentParams(gamma=(0.2, 0.3, 0.3), beta=(0.0, 0.0, 0.0))
        _, m, _, _, reduced = _stack(net, params)
        gains = {(src, dst): g for src, dst, g in reduced.branches}
        assert gains[("source", 0), ("agent", 0)] == pytest.approx(m.P[0, 1] + m.P[0, 2])

    def test_unbalanced_members_deleted(self, zoo17):
        cls, _, _, _, reduced = _stack(zoo17.net, zoo17.params)
        unb = next(s for s in range(len(cls.sinks)) if s not in cls.balanced_sinks)
        for agent in cls.sinks[unb]:
            assert ("agent", agent) not in reduced.nodes
        # and nothing references them
        for src, dst, _ in reduced.branches:
            assert src[0] != "agent" or src[1] not in cls.sinks[unb]

    def test_missing_spectrum_raises(self, ref11):
        from signed_influence import MissingSpectrumError, build_full_sfg

        cls = classify(ref11.net, ref11.params)
        m = build_matrices(ref11.net, ref11.params, cls)
        full = build_full_sfg(m, cls)
        with pytest.raises(MissingSpectrumError):
            reduce_sfg(full, cls, {}, m)


class TestAttachProbe:
    def test_adds_unit_gain_probe(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        probed = attach_probe(reduced, 1)
        assert ("probe", 1) in probed.nodes
        assert (("agent", 1), ("probe", 1), 1.0) in probed.branches

    def test_idempotent(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        once = attach_probe(reduced, 1)
        assert attach_probe(once, 1) == once

    def test_rejects_source_agent(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        with pytest.raises(NotANodeError):
            attach_probe(reduced, 4)  # singleton leader: a source


def _tiny_graph(g, loop):
    """source -> agent 0 with gain g, self-loop of gain loop on agent 0."""
    source = SourceSpec(SourceKind.STUBBORN_INITIAL, agent=0, members=(0,))
    branches = [(("source", 0), ("agent", 0), g)]
    if loop:
        branches.append((("agent", 0), ("agent", 0), loop))
    return SfgGraph(
        nodes=(("agent", 0), ("source", 0)),
        sources=(source,),
        branches=tuple(branches),
        reduced=True,
    )


class TestMasonGain:
    def test_single_path_single_loop(self):
        g = attach_probe(_tiny_graph(0.3, 0.6), 0)
        res = mason_gain(g, 0, 0)
        assert res.gain == pytest.approx(0.3 / (1 - 0.6))
        assert res.delta == pytest.approx(1 - 0.6)
        assert len(res.forward_paths) == 1
        assert len(res.loops) == 1

    def test_series_chain(self):
        source = SourceSpec(SourceKind.SINGLETON_LEADER, agent=9, members=(9,))
        g = SfgGraph(
            nodes=(("agent", 0), ("agent", 1), ("source", 0)),
            sources=(source,),
            branches=(
                (("source", 0), ("agent", 0), 0.5),
                (("agent", 0), ("agent", 1), 0.4),
            ),
            reduced=True,
        )
        res = mason_gain(attach_probe(g, 1), 0, 1)
        assert res.gain == pytest.approx(0.2)

    def test_no_path_gives_zero(self):
        g = attach_probe(_tiny_graph(0.3, 0.0), 0)
        extra = SourceSpec(SourceKind.SINGLETON_LEADER, agent=5, members=(5,))
        g = dataclasses.replace(
            g, nodes=g.nodes + (("source", 1),), sources=g.sources + (extra,)
        )
        assert mason_gain(g, 1, 0).gain == 0.0

    def test_reference_table_entry(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        probed = attach_probe(reduced, 0)
        assert mason_gain(probed, 0, 0).gain == pytest.approx(0.02, abs=1e-12)

    def test_complexity_cap(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        probed = attach_probe(reduced, 0)
        with pytest.raises(ComplexityCapExceededError):
            mason_gain(probed, 0, 0, enum_cap=1)
        with pytest.raises(ComplexityCapExceededError):
            mason_gain(probed, 0, 0, subset_cap=1)


class TestSolveGain:
    def test_reference_table_rows(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        ci = solve_gain(reduced)
        assert np.allclose(ci.row(0), [0.02, 0.12, 0.04, 0.5, 0.32], atol=1e-12)
        for agent in (1, 2, 3):
            assert np.allclose(ci.row(agent), [0.2, 0.2, 0.4, 0.0, 0.2], atol=1e-12)
        for agent in (5, 6, 7):
            assert np.allclose(ci.row(agent), [0.0, 0.0, 0.0, 0.0, 1.0], atol=1e-12)

    def test_matches_mason_on_random_networks(self):
        for seed in range(40):
            rn = random_network(seed)
            _, _, _, _, reduced = _stack(rn.net, rn.params)
            direct = solve_gain(reduced)
            enumerated = mason_influence(reduced)
            assert np.allclose(direct.c, enumerated.c, atol=1e-9), seed

    def test_threaded_mason_matches(self, ref11):
        _, _, _, _, reduced = _stack(ref11.net, ref11.params)
        assert np.allclose(mason_influence(reduced, jobs=4).c, solve_gain(reduced).c)


class TestIndividualInfluence:
    def test_reference_entries(self, ref11):
        res = run_analysis(ref11.net, ref11.params, ref11.x0, gain_method="solve")
        th = res.influence.theta
        assert th[0, 0] == pytest.approx(0.5)
        assert th[0, 8] == pytest.approx(0.08 * 15 / 51)  # 0.023
        assert th[1, 10] == pytest.approx(0.2 * 20 / 51)  # 0.0784
        assert th[4, 4] == 1.0
        for i in (5, 6, 7):
            row = np.zeros(11)
            row[5] = 1.0
            assert np.allclose(th[i], row)
        assert th[8, 8] == pytest.approx(15 / 51)
        assert th[9, 8] == pytest.approx(-15 / 51)

    def test_zero_columns_match_non_influential_set(self):
        for seed in range(25):
            rn = random_network(seed)
            res = run_analysis(rn.net, rn.params, rn.x0, gain_method="solve")
            cls = res.classification
            influential = set(cls.stubborn)
            for sink in cls.influence_free_sinks:
                influential.update(cls.sinks[sink])
            for j in range(rn.net.n):
                col_zero = np.all(res.influence.theta[:, j] == 0.0)
                assert col_zero == (j not in influential), (seed, j)

    def test_rows_sum_to_one_without_stubbornness(self):
        for seed in range(10):
            rn = random_network(
                seed, kinds=("cooperative", "singleton"), allow_stubborn=False
            )
            # force every interaction cooperative so P is row-stochastic
            net = build_network(rn.net.n, [(i, j, abs(w)) for i, j, w in rn.net.edges])
            res = run_analysis(net, rn.params, rn.x0, gain_method="solve")
            sums = res.influence.theta.sum(axis=1)
            assert np.allclose(sums, 1.0, atol=1e-9), seed

    def test_gauge_invariance_of_partition_labels(self, ref11):
        cls, m, full, spectra, reduced = _stack(ref11.net, ref11.params)
        baseline = individual_influence(solve_gain(reduced), cls, spectra)

        flipped_sigma = dict(cls.sigma)
        for k in cls.sinks[2]:
            flipped_sigma[k] = -flipped_sigma[k]
        cls2 = dataclasses.replace(cls, sigma=flipped_sigma)
        spec = spectra[2]
        spectra2 = dict(spectra)
        spectra2[2] = SinkSpectrum(
            sink=2, members=spec.members, w=-spec.w, v=-spec.v
        )
        reduced2 = reduce_sfg(full, cls2, spectra2, m)
        other = individual_influence(solve_gain(reduced2), cls2, spectra2)
        assert np.allclose(baseline.theta, other.theta, atol=1e-12)
