"""End-to-end analysis: classification through centrality in one call."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centrality import CentralityResult, absolute_centrality
from .dynamics import (
    ConvergenceVerdict,
    ModelMatrices,
    SinkSpectrum,
    SteadyState,
    SteadyStateMethod,
    build_matrices,
    classify_convergence,
    sink_spectrum,
    steady_state,
)
from .errors import ComplexityCapExceededError
from .graph import AgentClassification, AgentParams, SignedNetwork, classify
from .sfg import (
    CollectiveInfluence,
    InfluenceMatrix,
    SfgGraph,
    build_full_sfg,
    individual_influence,
    mason_influence,
    reduce_sfg,
    solve_gain,
)


@dataclass(frozen=True)
class AnalysisResult:
    net: SignedNetwork
    params: AgentParams
    x0: np.ndarray
    classification: AgentClassification
    matrices: ModelMatrices
    verdict: ConvergenceVerdict
    spectra: dict[int, SinkSpectrum]
    full_sfg: SfgGraph
    reduced_sfg: SfgGraph
    collective: CollectiveInfluence
    influence: InfluenceMatrix
    steady: SteadyState
    centrality: CentralityResult
    gain_method_used: str  # "mason" or "solve"


def compute_spectra(
    matrices: ModelMatrices, classification: AgentClassification
) -> dict[int, SinkSpectrum]:
    """Unit eigenpairs for every multi-agent stubborn-free balanced sink."""
    from .graph import SinkKind

    spectra = {}
    for sink in sorted(classification.influence_free_sinks):
        if classification.sink_kind[sink] == SinkKind.SINGLETON_LEADER:
            continue
        spectra[sink] = sink_spectrum(matrices, classification, sink)
    return spectra


def run_analysis(
    net: SignedNetwork,
    params: AgentParams,
    x0,
    gain_method: str = "auto",
    steady_method: SteadyStateMethod = SteadyStateMethod.DIRECT_SOLVE,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    jobs: int = 1,
) -> AnalysisResult:
    """Run the whole stack and return every intermediate product.

    gain_method: "solve" for the algebraic gains, "mason" for path/loop
    enumeration (raises on the complexity cap), "auto" for enumeration
    with algebraic fallback.
    """
    x0 = np.asarray(x0, dtype=float)
    cls = classify(net, params)
    matrices = build_matrices(net, params, cls)
    verdict = classify_convergence(matrices, cls)
    spectra = compute_spectra(matrices, cls)
    full = build_full_sfg(matrices, cls)
    reduced = reduce_sfg(full, cls, spectra, matrices)

    if gain_method == "solve":
        collective = solve_gain(reduced)
        used = "solve"
    elif gain_method == "mason":
        collective = mason_influence(reduced, jobs=jobs)
        used = "mason"
    elif gain_method == "auto":
        try:
            collective = mason_influence(reduced, jobs=jobs)
            used = "mason"
        except ComplexityCapExceededError:
            collective = solve_gain(reduced)
            used = "solve"
    else:
        raise ValueError(f"unknown gain method {gain_method!r}")

    influence = individual_influence(collective, cls, spectra)
    steady = steady_state(
        matrices, cls, verdict, x0, method=steady_method, tol=tol, max_iters=max_iters
    )
    centrality = absolute_centrality(influence)
    return AnalysisResult(
        net=net,
        params=params,
        x0=x0,
        classification=cls,
        matrices=matrices,
        verdict=verdict,
        spectra=spectra,
        full_sfg=full,
        reduced_sfg=reduced,
        collective=collective,
        influence=influence,
        steady=steady,
        centrality=centrality,
        gain_method_used=used,
    )
