"""Model matrices, convergence classification and steady states.

The update rule is

    x(k+1) = (Gamma + (I - Gamma - B) Q) x(k) + B x(0)

with Q the sign-preserving row normalisation of the adjacency matrix,
Gamma = diag(gamma) the self-belief and B = diag(beta) the stubbornness.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEigenspaceError,
    SingularSystemError,
    StubbornSinkRejectedError,
)
from .graph import AgentClassification, AgentParams, SignedNetwork, SinkKind

_EIG_TOL = 1e-9
_SOLVE_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ModelMatrices:
    """Q, P and the stubbornness input matrix, plus the block bookkeeping.

    Matrices are stored in the original agent indexing; ``perm`` maps the
    block-triangular position to the agent id (followers first, then each
    sink contiguously).
    """

    n: int
    Q: np.ndarray
    P: np.ndarray
    Btilde: np.ndarray  # n x s, column h carries beta at the h-th stubborn agent
    stubborn_ids: tuple[int, ...]
    beta: np.ndarray
    gamma: np.ndarray
    perm: tuple[int, ...]
    blocks: tuple[tuple[int, int], ...]  # ranges into perm: followers, then sinks

    def sink_block(self, classification: AgentClassification, sink: int) -> np.ndarray:
        members = classification.sinks[sink]
        return self.P[np.ix_(members, members)]


class ConvergenceKind(enum.Enum):
    CONVERGENT = "convergent"
    SEMI_CONVERGENT = "semi-convergent"


@dataclass(frozen=True)
class ConvergenceVerdict:
    kind: ConvergenceKind
    spectral_radius_estimate: float
    unit_eigen_count: int


@dataclass(frozen=True)
class SinkSpectrum:
    """Unit-eigenvalue pair of a stubborn-free balanced sink block.

    ``w`` is the left eigenvector normalised so that sum(sigma * w) == 1;
    ``v`` is the right eigenvector (the sigma pattern, all ones for
    cooperative sinks).  Both are indexed by the sink's sorted members.
    """

    sink: int
    members: tuple[int, ...]
    w: np.ndarray
    v: np.ndarray


class SteadyStateMethod(enum.Enum):
    DIRECT_SOLVE = "direct-solve"
    EIGENPROJECTION = "eigenprojection"
    ITERATION = "iteration"


@dataclass(frozen=True)
class SteadyState:
    z: np.ndarray
    z_o: np.ndarray  # zero-stubbornness response (0 when convergent)
    z_s: np.ndarray  # stubborn response
    method: SteadyStateMethod


@dataclass(frozen=True)
class TrajectoryLog:
    xs: np.ndarray  # (iterations+1) x n, starting at x(0)
    converged: bool
    iterations: int
    residual: float


def build_matrices(
    net: SignedNetwork, params: AgentParams, classification: AgentClassification
) -> ModelMatrices:
    n = net.n
    a = net.adjacency
    absrow = np.abs(a).sum(axis=1)
    q = np.zeros((n, n))
    for i in range(n):
        if absrow[i] > 0.0:
            q[i] = a[i] / absrow[i]
        else:
            q[i, i] = 1.0
    gamma = np.array(params.gamma, dtype=float)
    beta = np.array(params.beta, dtype=float)
    p = np.diag(gamma) + (np.eye(n) - np.diag(gamma) - np.diag(beta)) @ q

    stubborn_ids = params.stubborn_agents()
    btilde = np.zeros((n, len(stubborn_ids)))
    for col, i in enumerate(stubborn_ids):
        btilde[i, col] = beta[i]

    m = classification.follower_count
    blocks = [(0, m)]
    pos = m
    for members in classification.sinks:
        blocks.append((pos, pos + len(members)))
        pos += len(members)
    return ModelMatrices(
        n=n,
        Q=q,
        P=p,
        Btilde=btilde,
        stubborn_ids=stubborn_ids,
        beta=beta,
        gamma=gamma,
        perm=classification.perm,
        blocks=tuple(blocks),
    )


def spectral_radius(
    m: np.ndarray, max_iters: int = 2000, restarts: int = 3, dense_fallback: bool = True
) -> float:
    """Spectral radius estimate: power iteration, Gelfand cross-check, dense fallback.

    Diagnostic only; convergence decisions are structural, never spectral.
    """
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 0:
        return 0.0
    rng = np.random.default_rng(0)
    best = None
    for _ in range(restarts):
        v = rng.standard_normal(m.shape[0])
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iters):
            w = m @ v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                lam = 0.0
                break
            new_lam = norm
            v = w / norm
            if abs(new_lam - lam) < 1e-12 * max(1.0, new_lam):
                lam = new_lam
                break
            lam = new_lam
        # accept only if v is close to an eigenvector (real dominant eigenvalue)
        resid = np.linalg.norm(m @ v - (v @ m @ v) * v)
        if resid < 1e-9 * max(1.0, lam):
            cand = abs(v @ m @ v)
            best = cand if best is None else max(best, cand)
    if best is not None:
        return best
    if dense_fallback:
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    # Gelfand upper-bound style estimate; slow to converge but always defined
    k = 64
    mk = np.linalg.matrix_power(m, k)
    return float(np.linalg.norm(mk, np.inf) ** (1.0 / k))


def classify_convergence(
    matrices: ModelMatrices, classification: AgentClassification
) -> ConvergenceVerdict:
    """Structural decision: semi-convergent iff a stubborn-free balanced sink exists."""
    count = len(classification.influence_free_sinks)
    kind = ConvergenceKind.SEMI_CONVERGENT if count else ConvergenceKind.CONVERGENT
    rho = spectral_radius(matrices.P)
    return ConvergenceVerdict(kind=kind, spectral_radius_estimate=rho, unit_eigen_count=count)


def simulate(
    matrices: ModelMatrices,
    x0: np.ndarray,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    thin: int = 1,
) -> TrajectoryLog:
    """Iterate the update rule until the sup-norm residual drops below tol."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (matrices.n,):
        raise ValueError(f"x0 must have length {matrices.n}")
    drive = matrices.beta * x0
    xs = [x0.copy()]
    last_recorded = 0
    x = x0.copy()
    residual = np.inf
    iters = 0
    converged = False
    while iters < max_iters:
        nxt = matrices.P @ x + drive
        residual = float(np.max(np.abs(nxt - x)))
        x = nxt
        iters += 1
        if iters % thin == 0:
            xs.append(x.copy())
            last_recorded = iters
        if residual < tol:
            converged = True
            break
    if last_recorded != iters:
        xs.append(x.copy())
    return TrajectoryLog(np.array(xs), converged=converged, iterations=iters, residual=residual)


def sink_spectrum(
    matrices: ModelMatrices, classification: AgentClassification, sink: int
) -> SinkSpectrum:
    """Left/right unit eigenpair of a stubborn-free balanced sink block."""
    if classification.sink_has_stubborn(sink):
        raise StubbornSinkRejectedError(f"sink {sink} contains stubborn agents")
    members = classification.sinks[sink]
    block = matrices.sink_block(classification, sink)
    kind = classification.sink_kind[sink]
    if kind == SinkKind.UNBALANCED:
        raise DegenerateEigenspaceError(f"sink {sink} is unbalanced; no unit eigenvalue")

    if kind == SinkKind.BALANCED:
        sigma = np.array([classification.sigma[m] for m in members], dtype=float)
    else:
        sigma = np.ones(len(members))

    a = block.T - np.eye(len(members))
    _, s, vh = np.linalg.svd(a)
    if len(members) > 1 and s[-2] < 1e-8:
        raise DegenerateEigenspaceError(f"unit eigenvalue of sink {sink} is not simple")
    if s[-1] > 1e-8:
        raise DegenerateEigenspaceError(f"sink {sink} block has no unit eigenvalue")
    w = vh[-1]
    scale = float(sigma @ w)
    if abs(scale) < 1e-12:
        raise DegenerateEigenspaceError(f"cannot normalise eigenvector of sink {sink}")
    w = w / scale
    return SinkSpectrum(sink=sink, members=members, w=w, v=sigma.copy())


def leader_limit(
    matrices: ModelMatrices,
    classification: AgentClassification,
    sink: int,
    x0: np.ndarray,
) -> dict[int, float]:
    """Limit opinions of the members of a stubborn-free sink."""
    if classification.sink_has_stubborn(sink):
        raise StubbornSinkRejectedError(f"sink {sink} contains stubborn agents")
    members = classification.sinks[sink]
    kind = classification.sink_kind[sink]
    x0 = np.asarray(x0, dtype=float)
    if kind == SinkKind.SINGLETON_LEADER:
        (m,) = members
        return {m: float(x0[m])}
    if kind == SinkKind.UNBALANCED:
        return {m: 0.0 for m in members}
    spec = sink_spectrum(matrices, classification, sink)
    consensus = float(spec.w @ x0[list(members)])
    if kind == SinkKind.COOPERATIVE:
        return {m: consensus for m in members}
    return {m: classification.sigma[m] * consensus for m in members}


def _solve_checked(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    resid = np.max(np.abs(a @ x - b)) if b.size else 0.0
    if not np.isfinite(resid) or resid > _SOLVE_RESIDUAL_TOL * max(1.0, np.max(np.abs(b), initial=0.0)):
        raise SingularSystemError(f"solve residual {resid} too large")
    return x


def _stubborn_limits(matrices, classification, x0):
    """Exact limits on followers and stubborn-sink members, given sink limits.

    Solves sink blocks containing stubbornness first, then the follower
    block against all leader limits.  Valid because every such block is
    convergent.
    """
    n = matrices.n
    z = np.zeros(n)
    for sink in range(len(classification.sinks)):
        members = list(classification.sinks[sink])
        if classification.sink_has_stubborn(sink):
            block = matrices.P[np.ix_(members, members)]
            rhs = matrices.beta[members] * x0[members]
            z[members] = _solve_checked(np.eye(len(members)) - block, rhs)
        else:
            lim = leader_limit(matrices, classification, sink, x0)
            for m, val in lim.items():
                z[m] = val
    followers = sorted(classification.followers)
    if followers:
        leaders = [i for i in range(n) if i not in classification.followers]
        pff = matrices.P[np.ix_(followers, followers)]
        pfl = matrices.P[np.ix_(followers, leaders)]
        rhs = pfl @ z[leaders] + matrices.beta[followers] * x0[followers]
        z[followers] = _solve_checked(np.eye(len(followers)) - pff, rhs)
    return z


def _unit_eigenprojection(matrices, classification, x0):
    """lim P^k x(0): projection onto the unit eigenspace spanned by the sinks."""
    n = matrices.n
    followers = sorted(classification.followers)
    z_o = np.zeros(n)
    for sink in sorted(classification.influence_free_sinks):
        spec = sink_spectrum(matrices, classification, sink)
        members = list(spec.members)
        amount = float(spec.w @ x0[members])
        v_full = np.zeros(n)
        v_full[members] = spec.v
        if followers:
            pff = matrices.P[np.ix_(followers, followers)]
            pfm = matrices.P[np.ix_(followers, members)]
            v_full[followers] = _solve_checked(
                np.eye(len(followers)) - pff, pfm @ spec.v
            )
        z_o += v_full * amount
    return z_o


def steady_state(
    matrices: ModelMatrices,
    classification: AgentClassification,
    verdict: ConvergenceVerdict,
    x0: np.ndarray,
    method: SteadyStateMethod = SteadyStateMethod.DIRECT_SOLVE,
    tol: float = 1e-10,
    max_iters: int = 100_000,
) -> SteadyState:
    """Final opinion vector by one of three independent routes.

    direct-solve: per-block linear solves (whole-system solve when
    convergent).  eigenprojection: z_o from the unit eigenpairs plus a
    stubborn-response solve on the complement.  iteration: run the update
    rule to convergence.
    """
    x0 = np.asarray(x0, dtype=float)
    n = matrices.n
    semi = verdict.kind == ConvergenceKind.SEMI_CONVERGENT

    if method == SteadyStateMethod.ITERATION:
        log = simulate(matrices, x0, tol=tol, max_iters=max_iters)
        z = log.xs[-1]
        z_o = _unit_eigenprojection(matrices, classification, x0) if semi else np.zeros(n)
        return SteadyState(z=z, z_o=z_o, z_s=z - z_o, method=method)

    if not semi:
        z = _solve_checked(np.eye(n) - matrices.P, matrices.beta * x0)
        return SteadyState(z=z, z_o=np.zeros(n), z_s=z, method=method)

    if method == SteadyStateMethod.DIRECT_SOLVE:
        z = _stubborn_limits(matrices, classification, x0)
        z_o = _unit_eigenprojection(matrices, classification, x0)
        return SteadyState(z=z, z_o=z_o, z_s=z - z_o, method=method)

    # eigenprojection: z_o from the eigenpairs, z_s from the convergent complement
    z_o = _unit_eigenprojection(matrices, classification, x0)
    free = set()
    for sink in classification.influence_free_sinks:
        free.update(classification.sinks[sink])
    comp = [i for i in range(n) if i not in free]
    z_s = np.zeros(n)
    if comp:
        pcc = matrices.P[np.ix_(comp, comp)]
        rhs = matrices.beta[comp] * x0[comp]
        z_s[comp] = _solve_checked(np.eye(len(comp)) - pcc, rhs)
    return SteadyState(z=z_o + z_s, z_o=z_o, z_s=z_s, method=method)
