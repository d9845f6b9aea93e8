"""Network spec files, analysis reports, DOT export and trajectory CSV.

A network spec is a small YAML document:

    schema: signed-influence/1
    n: 3
    edges:
      - [0, 1, 2.5]     # agent 0 listens to agent 1 with weight 2.5
      - [1, 2, -1.0]
    gamma: [0.3, 0.3, 0.3]
    beta: [0.1, 0.0, 0.0]
    x0: [1.0, -2.0, 0.5]
    labels: ["a", "b", "c"]   # optional display names

Reports are YAML as well, schema ``signed-influence/report/1``, with every
number serialized to 12 significant digits so that a re-ingested report
diffs clean against a fresh run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import BadIdError, SpecFileError
from .graph import AgentParams, SignedNetwork, build_network
from .pipeline import AnalysisResult
from .sfg import SfgGraph, SourceKind

SPEC_SCHEMA = "signed-influence/1"
REPORT_SCHEMA = "signed-influence/report/1"


@dataclass(frozen=True)
class NetworkSpec:
    net: SignedNetwork
    params: AgentParams
    x0: np.ndarray
    labels: tuple[str, ...] | None

    def resolve_agent(self, token: str) -> int:
        """Map a CLI token to an agent id: display label first, then raw id."""
        if self.labels is not None and token in self.labels:
            return self.labels.index(token)
        try:
            agent = int(token)
        except ValueError:
            raise BadIdError(token) from None
        if not (0 <= agent < self.net.n):
            raise BadIdError(token)
        return agent

    def label_of(self, agent: int) -> str:
        return self.labels[agent] if self.labels is not None else str(agent)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SpecFileError(message)


def load_spec(path: str) -> NetworkSpec:
    """Load and validate a network spec file."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise SpecFileError(f"{path} is not valid YAML: {exc}") from exc
    _require(isinstance(doc, dict), "top level must be a mapping")
    _require(doc.get("schema") == SPEC_SCHEMA, f"schema must be {SPEC_SCHEMA!r}")
    _require(isinstance(doc.get("n"), int) and doc["n"] >= 1, "n must be a positive integer")
    n = doc["n"]
    edges = doc.get("edges", [])
    _require(isinstance(edges, list), "edges must be a list")
    parsed = []
    for e in edges:
        _require(
            isinstance(e, (list, tuple)) and len(e) == 3, f"edge {e!r} must be [from, to, weight]"
        )
        parsed.append((e[0], e[1], e[2]))
    for field in ("gamma", "beta", "x0"):
        v = doc.get(field)
        _require(isinstance(v, list) and len(v) == n, f"{field} must be a list of length n")
        _require(
            all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
            f"{field} entries must be numbers",
        )
    labels = doc.get("labels")
    if labels is not None:
        _require(
            isinstance(labels, list) and len(labels) == n,
            "labels must be a list of length n",
        )
        labels = tuple(str(x) for x in labels)
        _require(len(set(labels)) == n, "labels must be unique")

    try:
        net = build_network(n, parsed)
        params = AgentParams(gamma=tuple(float(g) for g in doc["gamma"]),
                             beta=tuple(float(b) for b in doc["beta"]))
    except Exception as exc:
        raise SpecFileError(f"{path}: {exc}") from exc
    return NetworkSpec(
        net=net, params=params, x0=np.array(doc["x0"], dtype=float), labels=labels
    )


def _num(v: float) -> float:
    """Canonical 12-significant-digit float for serialization."""
    return float(f"{float(v):.12g}")


def _vec(v) -> list[float]:
    return [_num(x) for x in np.asarray(v).ravel()]


def _mat(m) -> list[list[float]]:
    return [_vec(row) for row in np.asarray(m)]


def _source_entry(spec) -> dict:
    entry = {"kind": spec.kind.value, "members": list(spec.members)}
    if spec.agent is not None:
        entry["agent"] = spec.agent
    if spec.sink is not None:
        entry["sink"] = spec.sink
    if spec.side is not None:
        entry["side"] = spec.side
    return entry


def build_report(result: AnalysisResult, tol: float, max_iters: int) -> dict:
    """Machine-readable analysis report (plain dict, YAML-serializable)."""
    cls = result.classification
    return {
        "schema": REPORT_SCHEMA,
        "classification": {
            "followers": sorted(cls.followers),
            "singleton_leaders": sorted(cls.singleton_leaders),
            "group_leaders": sorted(cls.group_leaders),
            "stubborn": sorted(cls.stubborn),
            "sinks": [
                {
                    "name": f"S_{idx + 1}",
                    "members": list(members),
                    "kind": cls.sink_kind[idx].value,
                    "stubborn_free": not cls.sink_has_stubborn(idx),
                }
                for idx, members in enumerate(cls.sinks)
            ],
            "influence_free_sinks": [f"S_{s + 1}" for s in sorted(cls.influence_free_sinks)],
        },
        "convergence": {
            "kind": result.verdict.kind.value,
            "spectral_radius_estimate": _num(result.verdict.spectral_radius_estimate),
            "unit_eigen_count": result.verdict.unit_eigen_count,
        },
        "steady_state": {
            "z": _vec(result.steady.z),
            "z_o": _vec(result.steady.z_o),
            "z_s": _vec(result.steady.z_s),
            "method": result.steady.method.value,
        },
        "collective_influence": {
            "agents": list(result.collective.agents),
            "sources": [_source_entry(s) for s in result.collective.sources],
            "c": _mat(result.collective.c),
        },
        "individual_influence": {"theta": _mat(result.influence.theta)},
        "centrality": {
            "scores": _vec(result.centrality.scores),
            "ranking": list(result.centrality.ranking),
            "most_influential": result.centrality.most_influential,
        },
        "provenance": {
            "gain_method": result.gain_method_used,
            "tol": _num(tol),
            "max_iters": max_iters,
        },
    }


def dump_report(report: dict, path: str | None = None) -> str:
    text = yaml.safe_dump(report, sort_keys=False, default_flow_style=None)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_report(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise SpecFileError(f"cannot read report {path}: {exc}") from exc
    _require(isinstance(doc, dict) and doc.get("schema") == REPORT_SCHEMA,
             f"report schema must be {REPORT_SCHEMA!r}")
    return doc


def diff_reports(a: dict, b: dict, _path: str = "") -> list[str]:
    """Paths at which two reports disagree; empty means identical."""
    diffs = []
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a or key not in b:
                diffs.append(f"{_path}/{key}: only on one side")
            else:
                diffs.extend(diff_reports(a[key], b[key], f"{_path}/{key}"))
    elif isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            diffs.append(f"{_path}: length {len(a)} != {len(b)}")
        else:
            for k, (x, y) in enumerate(zip(a, b)):
                diffs.extend(diff_reports(x, y, f"{_path}[{k}]"))
    elif a != b:
        diffs.append(f"{_path}: {a!r} != {b!r}")
    return diffs


_SOURCE_SHAPE = {
    SourceKind.SINGLETON_LEADER: "doublecircle",
    SourceKind.COOPERATIVE_SINK: "diamond",
    SourceKind.BALANCED_PARTITION: "trapezium",
    SourceKind.STUBBORN_INITIAL: "box",
}


def _dot_id(node) -> str:
    return f"{node[0]}_{node[1]}"


def export_dot(g: SfgGraph, path: str | None = None, labels=None) -> str:
    """Graphviz DOT rendering; node shape encodes the source kind."""
    def agent_label(i: int) -> str:
        return labels[i] if labels is not None else str(i)

    lines = ["digraph sfg {", "  rankdir=LR;"]
    for node in g.nodes:
        tag, idx = node
        if tag == "source":
            spec = g.sources[idx]
            shape = _SOURCE_SHAPE[spec.kind]
            label = spec.label()
            if spec.kind in (SourceKind.SINGLETON_LEADER, SourceKind.STUBBORN_INITIAL):
                shown = agent_label(spec.agent)
                label = (
                    f"leader {shown}"
                    if spec.kind == SourceKind.SINGLETON_LEADER
                    else f"x{shown}(0)"
                )
            lines.append(f'  {_dot_id(node)} [shape={shape}, label="{label}"];')
        elif tag == "probe":
            lines.append(f'  {_dot_id(node)} [shape=point, label="d{agent_label(idx)}"];')
        else:
            lines.append(f'  {_dot_id(node)} [shape=circle, label="{agent_label(idx)}"];')
    for src, dst, gain in g.branches:
        lines.append(f'  {_dot_id(src)} -> {_dot_id(dst)} [label="{gain:.6g}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def write_trajectory_csv(path: str, xs: np.ndarray) -> None:
    """Trajectory table with columns k, x_0, ..., x_{n-1}."""
    n = xs.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k"] + [f"x_{i}" for i in range(n)])
        for k, row in enumerate(xs):
            writer.writerow([k] + [f"{v:.12g}" for v in row])
