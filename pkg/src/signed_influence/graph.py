"""Signed weighted digraphs and their structural classification.

The structural layer everything else builds on: strongly connected
components, the condensation graph and its sinks, the follower / opinion
leader split, and the balance taxonomy of each sink.

Agent ids are 0-based everywhere; human-facing 1-based names, when
wanted, belong in spec-file labels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from .errors import (
    BadIdError,
    DuplicateEdgeError,
    NotStronglyConnectedError,
    NotWeaklyConnectedError,
    ParamConstraintViolatedError,
    SelfLoopError,
    ZeroWeightError,
)

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class SignedNetwork:
    """A signed weighted digraph without self-loops.

    An edge ``(i, j, w)`` means agent ``i`` listens to agent ``j`` with
    signed weight ``w`` (the adjacency entry ``A[i, j]``).
    """

    n: int
    edges: tuple[Edge, ...]
    weakly_connected: bool

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            a[i, j] = w
        return a

    @cached_property
    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, _, _ in self.edges:
            deg[i] += 1
        return deg

    def graph_sinks(self) -> frozenset[int]:
        """Nodes of the digraph itself (not the condensation) with no out-edges."""
        return frozenset(i for i in range(self.n) if self.out_degree[i] == 0)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class Condensation:
    """SCC decomposition plus the acyclic component-level graph."""

    components: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]
    sinks: tuple[int, ...]

    def component_of(self, node: int) -> int:
        for idx, comp in enumerate(self.components):
            if node in comp:
                return idx
        raise BadIdError(node)


@dataclass(frozen=True)
class AgentParams:
    """Per-agent self-belief gamma and stubbornness beta."""

    gamma: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        for i, g in enumerate(self.gamma):
            if not (0.0 <= g <= 1.0):
                raise ParamConstraintViolatedError(i, f"gamma={g} outside [0, 1]")
        for i, b in enumerate(self.beta):
            if not (0.0 <= b < 1.0):
                raise ParamConstraintViolatedError(i, f"beta={b} outside [0, 1)")
        if len(self.gamma) != len(self.beta):
            raise ParamConstraintViolatedError(0, "gamma and beta lengths differ")

    def stubborn_agents(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.beta) if b > 0.0)


class SinkKind(enum.Enum):
    SINGLETON_LEADER = "singleton-leader"
    COOPERATIVE = "cooperative"
    BALANCED = "balanced"
    UNBALANCED = "unbalanced"


@dataclass(frozen=True)
class BalanceResult:
    """Outcome of the two-coloring check on a strongly connected node set."""

    balanced: bool
    sigma: Mapping[int, int] | None  # node -> +1/-1, only when balanced


@dataclass(frozen=True)
class AgentClassification:
    """Follower/leader/stubborn partition and the sink taxonomy."""

    followers: frozenset[int]
    singleton_leaders: frozenset[int]  # agents alone in their sink
    group_leaders: frozenset[int]  # agents sharing a sink
    stubborn: frozenset[int]
    sinks: tuple[tuple[int, ...], ...]  # sorted members, sinks ordered by min id
    sink_of: Mapping[int, int]  # leader -> sink index
    sink_kind: Mapping[int, SinkKind]
    sigma: Mapping[int, int]  # defined exactly on members of balanced sinks
    balanced_sinks: frozenset[int]  # effectively balanced (S_b)
    influence_free_sinks: frozenset[int]  # balanced and stubborn-free (S_n)
    follower_count: int
    perm: tuple[int, ...]  # followers first, then sink members, contiguously

    def sink_members(self, sink: int) -> tuple[int, ...]:
        return self.sinks[sink]

    def sink_has_stubborn(self, sink: int) -> bool:
        return any(m in self.stubborn for m in self.sinks[sink])

    def member_index(self, agent: int) -> int:
        """Position of a leader inside its sink block (the kappa offset)."""
        return self.sinks[self.sink_of[agent]].index(agent)


def build_network(n: int, edges: Iterable[tuple[int, int, float]]) -> SignedNetwork:
    """Validate and freeze a signed network description."""
    if n < 1:
        raise BadIdError(n)
    seen = set()
    frozen = []
    for i, j, w in edges:
        if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
            raise BadIdError((i, j))
        i, j = int(i), int(j)
        if not (0 <= i < n):
            raise BadIdError(i)
        if not (0 <= j < n):
            raise BadIdError(j)
        if i == j:
            raise SelfLoopError(i)
        if (i, j) in seen:
            raise DuplicateEdgeError(i, j)
        w = float(w)
        if w == 0.0 or not np.isfinite(w):
            raise ZeroWeightError(i, j)
        seen.add((i, j))
        frozen.append((i, j, w))
    und = nx.Graph()
    und.add_nodes_from(range(n))
    und.add_edges_from((i, j) for i, j, _ in frozen)
    connected = nx.is_connected(und)
    return SignedNetwork(n=n, edges=tuple(sorted(frozen)), weakly_connected=connected)


def condense(net: SignedNetwork) -> Condensation:
    """SCC decomposition and the (acyclic) condensation graph."""
    g = net.to_networkx()
    comps = [frozenset(c) for c in nx.strongly_connected_components(g)]
    comps.sort(key=min)
    comp_of = {}
    for idx, comp in enumerate(comps):
        for node in comp:
            comp_of[node] = idx
    cedges = set()
    for i, j, _ in net.edges:
        ci, cj = comp_of[i], comp_of[j]
        if ci != cj:
            cedges.add((ci, cj))
    has_out = {ci for ci, _ in cedges}
    sinks = tuple(idx for idx in range(len(comps)) if idx not in has_out)
    return Condensation(components=tuple(comps), edges=tuple(sorted(cedges)), sinks=sinks)


def check_structural_balance(net: SignedNetwork, members: Iterable[int]) -> BalanceResult:
    """Two-color a strongly connected node set over its undirected signed edges.

    Sign consistency requires ``sigma_i * sigma_j == sign(a_ij)`` for every
    internal edge; if (i, j) and (j, i) disagree in sign the set is
    unbalanced.  The lowest-id member is anchored at +1 so the returned
    labelling is canonical.
    """
    members = sorted(set(members))
    member_set = set(members)
    sub = net.to_networkx().subgraph(members)
    if len(members) > 1 and not nx.is_strongly_connected(sub):
        raise NotStronglyConnectedError(f"nodes {members} are not strongly connected")

    sign_of = {}
    contradictory = False
    for i, j, w in net.edges:
        if i in member_set and j in member_set:
            key = (min(i, j), max(i, j))
            s = 1 if w > 0 else -1
            if key in sign_of and sign_of[key] != s:
                contradictory = True
            sign_of[key] = s
    if contradictory:
        return BalanceResult(balanced=False, sigma=None)

    adj = {m: [] for m in members}
    for (i, j), s in sign_of.items():
        adj[i].append((j, s))
        adj[j].append((i, s))

    sigma = {}
    for start in members:  # single component when strongly connected, but be safe
        if start in sigma:
            continue
        sigma[start] = 1
        queue = [start]
        while queue:
            u = queue.pop()
            for v, s in adj[u]:
                want = sigma[u] * s
                if v not in sigma:
                    sigma[v] = want
                    queue.append(v)
                elif sigma[v] != want:
                    return BalanceResult(balanced=False, sigma=None)
    if sigma[members[0]] != 1:
        sigma = {k: -v for k, v in sigma.items()}
    return BalanceResult(balanced=True, sigma=sigma)


def classify(net: SignedNetwork, params: AgentParams) -> AgentClassification:
    """Full agent and sink classification for a weakly connected network."""
    if not net.weakly_connected:
        raise NotWeaklyConnectedError("network must be weakly connected")
    if len(params.gamma) != net.n:
        raise ParamConstraintViolatedError(net.n, "parameter length mismatch")

    cond = condense(net)
    sink_sets = [cond.components[s] for s in cond.sinks]
    sink_sets.sort(key=min)
    sinks = tuple(tuple(sorted(s)) for s in sink_sets)

    leaders = set()
    sink_of = {}
    for idx, members in enumerate(sinks):
        for m in members:
            leaders.add(m)
            sink_of[m] = idx
    followers = frozenset(range(net.n)) - leaders
    singleton = frozenset(m for idx, ms in enumerate(sinks) if len(ms) == 1 for m in ms)
    group = frozenset(leaders) - singleton
    stubborn = frozenset(params.stubborn_agents())

    graph_sinks = net.graph_sinks()
    for i in range(net.n):
        if i not in graph_sinks and params.gamma[i] + params.beta[i] >= 1.0:
            raise ParamConstraintViolatedError(
                i, f"gamma+beta={params.gamma[i] + params.beta[i]} must be < 1 off sinks"
            )
    for i in group:
        if params.gamma[i] <= 0.0:
            raise ParamConstraintViolatedError(i, "group opinion leaders need gamma > 0")

    a = net.adjacency
    sink_kind = {}
    sigma = {}
    balanced_sinks = set()
    for idx, members in enumerate(sinks):
        if len(members) == 1:
            sink_kind[idx] = SinkKind.SINGLETON_LEADER
            balanced_sinks.add(idx)
            continue
        internal = [(i, j) for i in members for j in members if i != j and a[i, j] != 0.0]
        if all(a[i, j] > 0 for i, j in internal):
            sink_kind[idx] = SinkKind.COOPERATIVE
            balanced_sinks.add(idx)
            continue
        result = check_structural_balance(net, members)
        if result.balanced:
            sink_kind[idx] = SinkKind.BALANCED
            balanced_sinks.add(idx)
            sigma.update(result.sigma)
        else:
            sink_kind[idx] = SinkKind.UNBALANCED

    influence_free = frozenset(
        idx
        for idx in balanced_sinks
        if not any(m in stubborn for m in sinks[idx])
    )

    perm = tuple(sorted(followers)) + tuple(m for members in sinks for m in members)
    return AgentClassification(
        followers=followers,
        singleton_leaders=singleton,
        group_leaders=group,
        stubborn=stubborn,
        sinks=sinks,
        sink_of=sink_of,
        sink_kind=sink_kind,
        sigma=sigma,
        balanced_sinks=frozenset(balanced_sinks),
        influence_free_sinks=influence_free,
        follower_count=len(followers),
        perm=perm,
    )
