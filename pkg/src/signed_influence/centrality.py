"""Absolute influence centrality and what-if perturbation experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    SteadyStateMethod,
    build_matrices,
    classify_convergence,
    steady_state,
)
from .errors import BadIdError, NoSuchEdgeError, ZeroDeltaError
from .graph import AgentParams, SignedNetwork, build_network, classify
from .sfg import InfluenceMatrix


@dataclass(frozen=True)
class CentralityResult:
    scores: np.ndarray  # absolute influence of each agent on the whole network
    ranking: tuple[int, ...]  # agent ids, most influential first, ties by id
    most_influential: int


@dataclass(frozen=True)
class PerturbationResult:
    """Steady-state response to nudging one initial opinion by delta."""

    agent: int
    delta: float
    z_base: np.ndarray
    z_perturbed: np.ndarray
    deviation_per_unit: float  # ||z' - z||_1 / |delta|


@dataclass(frozen=True)
class SignFlipResult:
    """Steady-state response to flipping the sign of selected edges."""

    flipped: tuple[tuple[int, int], ...]
    z_base: np.ndarray
    z_flipped: np.ndarray
    deltas: np.ndarray
    mean_abs_deviation: float
    unchanged: tuple[int, ...]  # agents whose final opinion is unaffected


def absolute_centrality(influence: InfluenceMatrix) -> CentralityResult:
    """Column-wise absolute sums: how much each agent shapes all final opinions."""
    scores = influence.theta_abs.sum(axis=0)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return CentralityResult(scores=scores, ranking=tuple(order), most_influential=order[0])


def _steady(net: SignedNetwork, params: AgentParams, x0: np.ndarray) -> np.ndarray:
    cls = classify(net, params)
    matrices = build_matrices(net, params, cls)
    verdict = classify_convergence(matrices, cls)
    return steady_state(
        matrices, cls, verdict, x0, method=SteadyStateMethod.DIRECT_SOLVE
    ).z


def perturb_initial(
    net: SignedNetwork,
    params: AgentParams,
    x0: np.ndarray,
    agent: int,
    delta: float,
) -> PerturbationResult:
    """Recompute the steady state with x_agent(0) shifted by delta.

    The per-unit L1 deviation equals the agent's absolute centrality score,
    which makes this an independent check on the influence matrix.
    """
    if delta == 0.0 or not np.isfinite(delta):
        raise ZeroDeltaError("perturbation delta must be nonzero and finite")
    if not (0 <= agent < net.n):
        raise BadIdError(agent)
    x0 = np.asarray(x0, dtype=float)
    z_base = _steady(net, params, x0)
    x0p = x0.copy()
    x0p[agent] += delta
    z_pert = _steady(net, params, x0p)
    deviation = float(np.abs(z_pert - z_base).sum() / abs(delta))
    return PerturbationResult(
        agent=agent,
        delta=float(delta),
        z_base=z_base,
        z_perturbed=z_pert,
        deviation_per_unit=deviation,
    )


def flip_edge_signs(
    net: SignedNetwork,
    params: AgentParams,
    x0: np.ndarray,
    edges: tuple[tuple[int, int], ...],
    atol: float = 1e-9,
) -> SignFlipResult:
    """Negate the weights of the given edges and compare steady states."""
    existing = {(i, j) for i, j, _ in net.edges}
    for i, j in edges:
        if (i, j) not in existing:
            raise NoSuchEdgeError(i, j)
    flip = set(edges)
    flipped_edges = [
        (i, j, -w if (i, j) in flip else w) for i, j, w in net.edges
    ]
    net_flipped = build_network(net.n, flipped_edges)

    x0 = np.asarray(x0, dtype=float)
    z_base = _steady(net, params, x0)
    z_flip = _steady(net_flipped, params, x0)
    deltas = z_flip - z_base
    unchanged = tuple(i for i in range(net.n) if abs(deltas[i]) <= atol)
    return SignFlipResult(
        flipped=tuple(sorted(flip)),
        z_base=z_base,
        z_flipped=z_flip,
        deltas=deltas,
        mean_abs_deviation=float(np.abs(deltas).mean()),
        unchanged=unchanged,
    )
