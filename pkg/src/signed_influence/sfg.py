"""Signal-flow graphs for influence quantification.

The steady-state equations are encoded as a signal-flow graph whose branch
direction is the reverse of the information flow in the network.  The full
graph carries one node per final opinion plus one per stubborn initial
opinion; the reduced graph collapses stubborn-free sinks into collective
sources so every influential agent (group) is represented by a source.

Gains are evaluated two independent ways: Mason's formula over enumerated
simple paths and loops, and a direct linear solve of the node equations.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np

from .dynamics import ModelMatrices, SinkSpectrum
from .errors import (
    ComplexityCapExceededError,
    MissingSpectrumError,
    NotANodeError,
    SingularSystemError,
)
from .graph import AgentClassification, SinkKind

NodeKey = tuple[str, int]  # ("agent", i) | ("source", r) | ("probe", i)

DEFAULT_ENUM_CAP = 1_000_000
DEFAULT_SUBSET_CAP = 100_000


class SourceKind(enum.Enum):
    SINGLETON_LEADER = "singleton-leader"
    COOPERATIVE_SINK = "cooperative-sink"
    BALANCED_PARTITION = "balanced-partition"
    STUBBORN_INITIAL = "stubborn-initial"


@dataclass(frozen=True)
class SourceSpec:
    """Catalog entry for one source of a (reduced) signal-flow graph."""

    kind: SourceKind
    agent: int | None = None  # singleton leader / stubborn agent
    sink: int | None = None  # collective sources
    side: int | None = None  # +1 or -1 for balanced partitions
    members: tuple[int, ...] = ()  # agents aggregated into this source

    def label(self) -> str:
        if self.kind == SourceKind.SINGLETON_LEADER:
            return f"leader {self.agent}"
        if self.kind == SourceKind.STUBBORN_INITIAL:
            return f"x{self.agent}(0)"
        if self.kind == SourceKind.COOPERATIVE_SINK:
            return f"S_{self.sink + 1}"
        sign = "+" if self.side == 1 else "-"
        return f"S_{self.sink + 1} ({sign})"


@dataclass(frozen=True)
class SfgGraph:
    nodes: tuple[NodeKey, ...]
    sources: tuple[SourceSpec, ...]  # index r matches ("source", r) nodes
    branches: tuple[tuple[NodeKey, NodeKey, float], ...]
    reduced: bool

    def nonsource_agents(self) -> tuple[int, ...]:
        return tuple(i for tag, i in self.nodes if tag == "agent")

    def has_node(self, key: NodeKey) -> bool:
        return key in self.nodes

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for src, dst, gain in self.branches:
            g.add_edge(src, dst, gain=gain)
        return g


@dataclass(frozen=True)
class GainComputation:
    forward_paths: tuple[tuple[tuple[NodeKey, ...], float], ...]
    loops: tuple[tuple[tuple[NodeKey, ...], float], ...]
    delta: float
    sub_deltas: tuple[float, ...]
    gain: float


@dataclass(frozen=True)
class CollectiveInfluence:
    """Gains from every source to every non-source node."""

    agents: tuple[int, ...]  # row order
    sources: tuple[SourceSpec, ...]  # column order
    c: np.ndarray  # len(agents) x len(sources)

    def row(self, agent: int) -> np.ndarray:
        return self.c[self.agents.index(agent)]

    def gain(self, agent: int, source: int) -> float:
        return float(self.c[self.agents.index(agent), source])


@dataclass(frozen=True)
class InfluenceMatrix:
    theta: np.ndarray
    theta_abs: np.ndarray


def source_catalog(
    classification: AgentClassification, stubborn_ids: tuple[int, ...]
) -> tuple[SourceSpec, ...]:
    """Deterministic source ordering: singleton leaders, cooperative sinks,
    balanced partition pairs (+ side first), then stubborn initial opinions."""
    cls = classification
    sources: list[SourceSpec] = []
    for sink in range(len(cls.sinks)):
        if sink not in cls.influence_free_sinks:
            continue
        if cls.sink_kind[sink] == SinkKind.SINGLETON_LEADER:
            (agent,) = cls.sinks[sink]
            sources.append(
                SourceSpec(SourceKind.SINGLETON_LEADER, agent=agent, sink=sink, members=(agent,))
            )
    for sink in range(len(cls.sinks)):
        if sink not in cls.influence_free_sinks:
            continue
        if cls.sink_kind[sink] == SinkKind.COOPERATIVE:
            sources.append(
                SourceSpec(SourceKind.COOPERATIVE_SINK, sink=sink, members=cls.sinks[sink])
            )
    for sink in range(len(cls.sinks)):
        if sink not in cls.influence_free_sinks:
            continue
        if cls.sink_kind[sink] == SinkKind.BALANCED:
            for side in (1, -1):
                members = tuple(m for m in cls.sinks[sink] if cls.sigma[m] == side)
                sources.append(
                    SourceSpec(SourceKind.BALANCED_PARTITION, sink=sink, side=side, members=members)
                )
    for agent in stubborn_ids:
        sources.append(SourceSpec(SourceKind.STUBBORN_INITIAL, agent=agent, members=(agent,)))
    return tuple(sources)


def build_full_sfg(matrices: ModelMatrices, classification: AgentClassification) -> SfgGraph:
    """One node per final opinion plus one source per stubborn initial opinion.

    Non-stubborn singleton leaders are tagged as sources (their trivial
    unit self-loop is dropped); every other agent node is a non-source.
    """
    cls = classification
    leader_sources = {}
    sources: list[SourceSpec] = []
    for agent in sorted(cls.singleton_leaders):
        if agent in cls.stubborn:
            continue
        sink = cls.sink_of[agent]
        leader_sources[agent] = len(sources)
        sources.append(
            SourceSpec(SourceKind.SINGLETON_LEADER, agent=agent, sink=sink, members=(agent,))
        )
    init_sources = {}
    for agent in matrices.stubborn_ids:
        init_sources[agent] = len(sources)
        sources.append(SourceSpec(SourceKind.STUBBORN_INITIAL, agent=agent, members=(agent,)))

    def node_of(agent: int) -> NodeKey:
        if agent in leader_sources:
            return ("source", leader_sources[agent])
        return ("agent", agent)

    nodes = [node_of(i) for i in range(matrices.n)]
    nodes += [("source", init_sources[a]) for a in matrices.stubborn_ids]
    # keep node list unique when a leader id also appears in ids order
    nodes = list(dict.fromkeys(nodes))

    branches = []
    for i in range(matrices.n):
        if i in leader_sources:
            continue  # row reads y_i = y_i; no branch
        for j in range(matrices.n):
            if matrices.P[i, j] != 0.0:
                branches.append((node_of(j), ("agent", i), float(matrices.P[i, j])))
    for agent in matrices.stubborn_ids:
        branches.append(
            (("source", init_sources[agent]), ("agent", agent), float(matrices.beta[agent]))
        )
    return SfgGraph(
        nodes=tuple(nodes), sources=tuple(sources), branches=tuple(branches), reduced=False
    )


def reduce_sfg(
    full: SfgGraph,
    classification: AgentClassification,
    spectra: dict[int, SinkSpectrum],
    matrices: ModelMatrices,
) -> SfgGraph:
    """Collapse stubborn-free sinks into collective sources.

    Singleton leaders stay single sources, cooperative stubborn-free sinks
    become one source, balanced ones a pair (one per partition), members of
    stubborn-free unbalanced sinks are deleted, and members of sinks with
    any stubborn leader remain ordinary non-source nodes.
    """
    cls = classification
    for sink in cls.influence_free_sinks:
        if cls.sink_kind[sink] != SinkKind.SINGLETON_LEADER and sink not in spectra:
            raise MissingSpectrumError(sink)

    sources = source_catalog(cls, matrices.stubborn_ids)
    source_of_agent: dict[int, int] = {}  # agent folded into source r
    for r, spec in enumerate(sources):
        if spec.kind in (SourceKind.SINGLETON_LEADER, SourceKind.COOPERATIVE_SINK,
                         SourceKind.BALANCED_PARTITION):
            for m in spec.members:
                source_of_agent[m] = r

    deleted = set()
    for sink in range(len(cls.sinks)):
        if cls.sink_kind[sink] == SinkKind.UNBALANCED and not cls.sink_has_stubborn(sink):
            deleted.update(cls.sinks[sink])

    nonsource = [
        i
        for i in range(matrices.n)
        if i not in source_of_agent and i not in deleted
    ]
    nodes: list[NodeKey] = [("agent", i) for i in nonsource]
    nodes += [("source", r) for r in range(len(sources))]

    branches: list[tuple[NodeKey, NodeKey, float]] = []
    for i in nonsource:
        gains: dict[NodeKey, float] = {}
        for j in range(matrices.n):
            b = matrices.P[i, j]
            if b == 0.0 or j in deleted:
                continue
            key = ("source", source_of_agent[j]) if j in source_of_agent else ("agent", j)
            gains[key] = gains.get(key, 0.0) + float(b)
        for key, gain in gains.items():
            if gain != 0.0:
                branches.append((key, ("agent", i), gain))
    stub_start = len(sources) - len(matrices.stubborn_ids)
    for col, agent in enumerate(matrices.stubborn_ids):
        branches.append(
            (("source", stub_start + col), ("agent", agent), float(matrices.beta[agent]))
        )
    return SfgGraph(
        nodes=tuple(nodes), sources=tuple(sources), branches=tuple(branches), reduced=True
    )


def attach_probe(g: SfgGraph, agent: int) -> SfgGraph:
    """Add a unit-gain probe sink hanging off a non-source agent node."""
    if ("agent", agent) not in g.nodes:
        raise NotANodeError(agent)
    probe = ("probe", agent)
    if probe in g.nodes:
        return g
    return replace(
        g,
        nodes=g.nodes + (probe,),
        branches=g.branches + ((("agent", agent), probe, 1.0),),
    )


def _loop_conflicts(
    loops: list[tuple[frozenset, float]], cap: int = DEFAULT_ENUM_CAP
) -> list[set[int]]:
    if len(loops) * (len(loops) - 1) // 2 > cap:
        raise ComplexityCapExceededError(cap)
    conflicts = [set() for _ in loops]
    for a, b in itertools.combinations(range(len(loops)), 2):
        if loops[a][0] & loops[b][0]:
            conflicts[a].add(b)
            conflicts[b].add(a)
    return conflicts


def _alternating_sum(
    loops: list[tuple[frozenset, float]],
    conflicts: list[set[int]],
    allowed: set[int],
    cap: int,
) -> float:
    """Sum over independent loop subsets of (-1)^|subset| * product of gains."""
    order = sorted(allowed)
    count = 0

    def full(pos: int, blocked: set[int]) -> float:
        nonlocal count
        acc = 1.0
        for k in range(pos, len(order)):
            idx = order[k]
            if idx in blocked:
                continue
            count += 1
            if count > cap:
                raise ComplexityCapExceededError(cap)
            acc += -loops[idx][1] * full(k + 1, blocked | conflicts[idx] | {idx})
        return acc

    return full(0, set())


def mason_gain(
    g: SfgGraph,
    source: int,
    probe_agent: int,
    enum_cap: int = DEFAULT_ENUM_CAP,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> GainComputation:
    """Gain from a source to a probe via Mason's formula.

    Enumerates simple forward paths and simple loops, evaluates the graph
    determinant as the alternating sum over mutually non-touching loop
    sets, and each path cofactor over the loops untouched by that path.
    """
    probe = ("probe", probe_agent)
    if probe not in g.nodes:
        raise NotANodeError(probe_agent)
    nxg = g.to_networkx()

    loops = []
    for cyc in nx.simple_cycles(nxg):
        gain = 1.0
        for a, b in zip(cyc, cyc[1:] + [cyc[0]]):
            gain *= nxg[a][b]["gain"]
        loops.append((frozenset(cyc), gain, tuple(cyc)))
        if len(loops) > enum_cap:
            raise ComplexityCapExceededError(enum_cap)

    paths = []
    src = ("source", source)
    if nxg.has_node(src):
        for path in nx.all_simple_paths(nxg, src, probe):
            gain = 1.0
            for a, b in zip(path, path[1:]):
                gain *= nxg[a][b]["gain"]
            paths.append((tuple(path), gain))
            if len(paths) > enum_cap:
                raise ComplexityCapExceededError(enum_cap)

    loop_sets = [(nodes, gain) for nodes, gain, _ in loops]
    conflicts = _loop_conflicts(loop_sets, enum_cap)
    everything = set(range(len(loop_sets)))
    delta = _alternating_sum(loop_sets, conflicts, everything, subset_cap)

    sub_deltas = []
    numerator = 0.0
    for path_nodes, path_gain in paths:
        touched = set(path_nodes)
        allowed = {k for k in everything if not (loop_sets[k][0] & touched)}
        dh = _alternating_sum(loop_sets, conflicts, allowed, subset_cap)
        sub_deltas.append(dh)
        numerator += path_gain * dh

    gain = numerator / delta if paths else 0.0
    return GainComputation(
        forward_paths=tuple(paths),
        loops=tuple((cyc, lg) for _, lg, cyc in loops),
        delta=delta,
        sub_deltas=tuple(sub_deltas),
        gain=gain,
    )


def solve_gain(g: SfgGraph) -> CollectiveInfluence:
    """All gains at once by solving the node equations u = P'u + Cv."""
    agents = g.nonsource_agents()
    idx = {("agent", i): k for k, i in enumerate(agents)}
    n, s = len(agents), len(g.sources)
    pprime = np.zeros((n, n))
    cmat = np.zeros((n, s))
    for src, dst, gain in g.branches:
        if dst[0] != "agent":
            continue
        row = idx[dst]
        if src[0] == "agent":
            pprime[row, idx[src]] += gain
        else:
            cmat[row, src[1]] += gain
    try:
        full = np.linalg.solve(np.eye(n) - pprime, cmat)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("unit-gain loop among non-sources") from exc
    if n and not np.all(np.isfinite(full)):
        raise SingularSystemError("non-finite gains; graph misreduced")
    return CollectiveInfluence(agents=agents, sources=g.sources, c=full)


def mason_influence(
    g: SfgGraph,
    enum_cap: int = DEFAULT_ENUM_CAP,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    jobs: int = 1,
) -> CollectiveInfluence:
    """The full c matrix entry by entry via Mason's formula."""
    agents = g.nonsource_agents()
    c = np.zeros((len(agents), len(g.sources)))

    def one_row(k_agent):
        k, agent = k_agent
        probed = attach_probe(g, agent)
        return k, [mason_gain(probed, r, agent, enum_cap, subset_cap).gain
                   for r in range(len(g.sources))]

    items = list(enumerate(agents))
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one_row, items))
    else:
        results = [one_row(it) for it in items]
    for k, row in results:
        c[k] = row
    return CollectiveInfluence(agents=agents, sources=g.sources, c=c)


def individual_influence(
    c: CollectiveInfluence,
    classification: AgentClassification,
    spectra: dict[int, SinkSpectrum],
) -> InfluenceMatrix:
    """Assemble the per-agent influence matrix from collective gains.

    Column j carries agent j's exact contribution to every final opinion;
    rows of source agents come straight from the sink eigenvectors.
    """
    cls = classification
    n = len(cls.perm)
    theta = np.zeros((n, n))

    col_source: dict[int, tuple] = {}  # j -> ("plain", r) | ("coop", r, sink) | ("bal", r, sink)
    for r, spec in enumerate(c.sources):
        if spec.kind == SourceKind.SINGLETON_LEADER:
            col_source[spec.agent] = ("plain", r)
        elif spec.kind == SourceKind.STUBBORN_INITIAL:
            col_source[spec.agent] = ("plain", r)
        elif spec.kind == SourceKind.COOPERATIVE_SINK:
            for m in spec.members:
                col_source[m] = ("coop", r, spec.sink)
        elif spec.kind == SourceKind.BALANCED_PARTITION and spec.side == 1:
            for m in cls.sinks[spec.sink]:
                col_source[m] = ("bal", r, spec.sink)

    def w_entry(sink: int, j: int) -> float:
        return float(spectra[sink].w[cls.member_index(j)])

    for row_pos, i in enumerate(c.agents):
        for j, how in col_source.items():
            if how[0] == "plain":
                theta[i, j] = c.c[row_pos, how[1]]
            elif how[0] == "coop":
                theta[i, j] = c.c[row_pos, how[1]] * w_entry(how[2], j)
            else:
                _, r, sink = how
                theta[i, j] = (c.c[row_pos, r] - c.c[row_pos, r + 1]) * w_entry(sink, j)

    # rows of agents folded into collective sources
    for r, spec in enumerate(c.sources):
        if spec.kind == SourceKind.SINGLETON_LEADER:
            theta[spec.agent, spec.agent] = 1.0
        elif spec.kind == SourceKind.COOPERATIVE_SINK:
            for i in spec.members:
                for j in spec.members:
                    theta[i, j] = w_entry(spec.sink, j)
        elif spec.kind == SourceKind.BALANCED_PARTITION and spec.side == 1:
            for i in cls.sinks[spec.sink]:
                for j in cls.sinks[spec.sink]:
                    theta[i, j] = cls.sigma[i] * w_entry(spec.sink, j)
    return InfluenceMatrix(theta=theta, theta_abs=np.abs(theta))
