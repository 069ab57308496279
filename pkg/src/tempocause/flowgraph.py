"""Accumulated causal flow graph: merge saved relations, lay out by lag.

Nodes are identified by what they assert (variable + canonical constraint +
effect type), so re-saving a semantically equal event lands on the same node
across sessions and files. Edges carry the delay window, effect type, and the
significance at save time; the graph stays acyclic so the time-axis layout
(x grows by the edge's maximum lag) is always well defined.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

import jsonschema

from .dataset import Dataset
from .errors import NoSignificantCauses, SchemaError, UnknownNode, ValidationError
from .formula import VALUE_IN, EffectSpec, EventDef, LevelSet, Range, Window
from .inference import SignificanceReport

GRAPH_VERSION = 1


def _constraint_dict(constraint: Range | LevelSet | None) -> dict | None:
    if constraint is None:
        return None
    if isinstance(constraint, Range):
        return {"kind": "range", "lo": constraint.lo, "hi": constraint.hi}
    return {"kind": "levels", "levels": constraint.sorted_levels()}


def _constraint_from_dict(data: dict | None) -> Range | LevelSet | None:
    if data is None:
        return None
    if data.get("kind") == "range":
        return Range(float(data["lo"]), float(data["hi"]))
    if data.get("kind") == "levels":
        return LevelSet(frozenset(str(v) for v in data["levels"]))
    raise SchemaError(f"unknown constraint kind {data.get('kind')!r}")


def node_id_for(variable: str, constraint: Range | LevelSet | None, effect_type: str | None) -> str:
    key = json.dumps(
        {"variable": variable, "constraint": _constraint_dict(constraint), "effect_type": effect_type},
        sort_keys=True,
    )
    return "n" + hashlib.sha1(key.encode("utf-8")).hexdigest()[:10]


@dataclass(frozen=True)
class FlowNode:
    node_id: str
    variable: str
    constraint: Range | LevelSet | None
    effect_type: str | None
    display_label: str

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "variable": self.variable,
            "constraint": _constraint_dict(self.constraint),
            "effect_type": self.effect_type,
            "label": self.display_label,
        }

    @staticmethod
    def for_event(event: EventDef) -> "FlowNode":
        return FlowNode(
            node_id=node_id_for(event.variable, event.constraint, None),
            variable=event.variable,
            constraint=event.constraint,
            effect_type=None,
            display_label=event.label,
        )

    @staticmethod
    def for_effect(effect: EffectSpec) -> "FlowNode":
        constraint = effect.event.constraint if effect.effect_type == VALUE_IN else None
        return FlowNode(
            node_id=node_id_for(effect.variable, constraint, effect.effect_type),
            variable=effect.variable,
            constraint=constraint,
            effect_type=effect.effect_type,
            display_label=effect.label,
        )


@dataclass(frozen=True)
class FlowEdge:
    from_id: str
    to_id: str
    window: Window
    effect_type: str
    strength: float | None
    saved_at: str

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.from_id, self.to_id, self.effect_type)

    def to_dict(self) -> dict:
        return {
            "from": self.from_id,
            "to": self.to_id,
            "window": self.window.to_dict(),
            "effect_type": self.effect_type,
            "strength": self.strength,
            "saved_at": self.saved_at,
        }


@dataclass
class CausalFlowGraph:
    fingerprint: dict | None = None
    nodes: dict[str, FlowNode] = field(default_factory=dict)
    edges: dict[tuple[str, str, str], FlowEdge] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalFlowGraph):
            return NotImplemented
        return (
            self.fingerprint == other.fingerprint
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    # -- structure -----------------------------------------------------------

    def _reachable(self, start: str, goal: str) -> list[str] | None:
        """Path start -> ... -> goal along edges, or None."""
        stack = [(start, [start])]
        seen = {start}
        by_source: dict[str, list[str]] = {}
        for (f, t, _), _e in self.edges.items():
            by_source.setdefault(f, []).append(t)
        while stack:
            node, path = stack.pop()
            if node == goal:
                return path
            for nxt in sorted(by_source.get(node, ())):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, path + [nxt]))
        return None

    def add_node(self, node: FlowNode) -> bool:
        """True if the node was new."""
        if node.node_id in self.nodes:
            return False
        self.nodes[node.node_id] = node
        return True

    def upsert_edge(self, edge: FlowEdge) -> tuple[str, list[str] | None]:
        """Insert or update an edge; returns ("added"|"updated"|"rejected", cycle path)."""
        if edge.from_id == edge.to_id:
            return "rejected", [edge.from_id, edge.to_id]
        if edge.from_id not in self.nodes or edge.to_id not in self.nodes:
            raise ValidationError("edge references an unknown node")
        if edge.key in self.edges:
            self.edges[edge.key] = edge
            return "updated", None
        cycle = self._reachable(edge.to_id, edge.from_id)
        if cycle is not None:
            return "rejected", cycle + [edge.to_id]
        self.edges[edge.key] = edge
        return "added", None

    def delete_node(self, node_id: str) -> dict:
        """Remove a node, cascading to incident edges; returns the diff."""
        if node_id not in self.nodes:
            raise UnknownNode(f"unknown node {node_id!r}")
        removed = [k for k in self.edges if node_id in (k[0], k[1])]
        for k in removed:
            del self.edges[k]
        del self.nodes[node_id]
        return {
            "removed_node": node_id,
            "removed_edges": [{"from": f, "to": t, "effect_type": e} for f, t, e in sorted(removed)],
        }

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": GRAPH_VERSION,
            "fingerprint": self.fingerprint,
            "nodes": [self.nodes[k].to_dict() for k in sorted(self.nodes)],
            "edges": [self.edges[k].to_dict() for k in sorted(self.edges)],
        }

    @staticmethod
    def from_dict(data: dict) -> "CausalFlowGraph":
        validate_graph_dict(data)
        graph = CausalFlowGraph(fingerprint=data.get("fingerprint"))
        for nd in data["nodes"]:
            node = FlowNode(
                node_id=str(nd["node_id"]),
                variable=str(nd["variable"]),
                constraint=_constraint_from_dict(nd.get("constraint")),
                effect_type=nd.get("effect_type"),
                display_label=str(nd.get("label") or ""),
            )
            graph.nodes[node.node_id] = node
        for ed in data["edges"]:
            edge = FlowEdge(
                from_id=str(ed["from"]),
                to_id=str(ed["to"]),
                window=Window(int(ed["window"]["r"]), int(ed["window"]["s"])),
                effect_type=str(ed["effect_type"]),
                strength=None if ed.get("strength") is None else float(ed["strength"]),
                saved_at=str(ed["saved_at"]),
            )
            status, path = graph.upsert_edge(edge)
            if status == "rejected":
                raise SchemaError(f"edge {edge.key} forms a cycle", detail={"path": path})
        return graph


_SCHEMA_CACHE: dict | None = None


def graph_schema() -> dict:
    global _SCHEMA_CACHE
    if _SCHEMA_CACHE is None:
        text = resources.files("tempocause.schemas").joinpath("flowgraph.schema.json").read_text()
        _SCHEMA_CACHE = json.loads(text)
    return _SCHEMA_CACHE


def validate_graph_dict(data: dict) -> None:
    try:
        jsonschema.validate(data, graph_schema())
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"flow graph JSON invalid: {exc.message}") from exc
    node_ids = {nd["node_id"] for nd in data["nodes"]}
    if len(node_ids) != len(data["nodes"]):
        raise SchemaError("duplicate node ids")
    for ed in data["edges"]:
        if ed["from"] not in node_ids or ed["to"] not in node_ids:
            raise SchemaError(f"edge {ed['from']}->{ed['to']} references a missing node")
        if ed["from"] == ed["to"]:
            raise SchemaError(f"self loop on {ed['from']}")


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def save_relations(
    graph: CausalFlowGraph,
    report: SignificanceReport,
    saved_at: str | None = None,
) -> dict:
    """Write every significant cause -> effect relation into the graph.

    Nodes deduplicate by identity; an existing (from, to, effect_type) edge is
    updated in place; an edge that would close a cycle is rejected with the
    offending path while the rest still apply.
    """
    significant = [m for m in report.causes if m.is_significant]
    if not significant:
        raise NoSignificantCauses("report has no significant causes to save")
    stamp = saved_at or _now_iso()
    effect_node = FlowNode.for_effect(report.effect)
    diff: dict = {"added_nodes": [], "added_edges": [], "updated_edges": [], "rejected_edges": []}
    if graph.add_node(effect_node):
        diff["added_nodes"].append(effect_node.node_id)
    for measure in significant:
        cause_node = FlowNode.for_event(measure.event)
        if graph.add_node(cause_node):
            diff["added_nodes"].append(cause_node.node_id)
        strength = measure.eps_avg if measure.eps_avg is not None else measure.elevation
        edge = FlowEdge(
            from_id=cause_node.node_id,
            to_id=effect_node.node_id,
            window=report.window,
            effect_type=report.effect.effect_type,
            strength=strength,
            saved_at=stamp,
        )
        status, path = graph.upsert_edge(edge)
        entry = {"from": edge.from_id, "to": edge.to_id, "effect_type": edge.effect_type}
        if status == "rejected":
            diff["rejected_edges"].append({**entry, "path": path})
        else:
            diff[f"{status}_edges"].append(entry)
    return diff


def merge_graphs(base: CausalFlowGraph, incoming: CausalFlowGraph) -> dict:
    """Apply every node and edge of ``incoming`` onto ``base`` (save semantics)."""
    diff: dict = {"added_nodes": [], "added_edges": [], "updated_edges": [], "rejected_edges": []}
    for node_id in sorted(incoming.nodes):
        if base.add_node(incoming.nodes[node_id]):
            diff["added_nodes"].append(node_id)
    for key in sorted(incoming.edges):
        status, path = base.upsert_edge(incoming.edges[key])
        entry = {"from": key[0], "to": key[1], "effect_type": key[2]}
        if status == "rejected":
            diff["rejected_edges"].append({**entry, "path": path})
        else:
            diff[f"{status}_edges"].append(entry)
    return diff


def layout(graph: CausalFlowGraph) -> dict[str, dict]:
    """Time-axis layout: roots at x=0, every effect at the maximum over
    incoming edges of (cause.x + edge max lag); layer counts hops likewise."""
    incoming: dict[str, list[FlowEdge]] = {nid: [] for nid in graph.nodes}
    indegree: dict[str, int] = {nid: 0 for nid in graph.nodes}
    for edge in graph.edges.values():
        incoming[edge.to_id].append(edge)
        indegree[edge.to_id] += 1
    order: list[str] = []
    pending = dict(indegree)
    queue = sorted(nid for nid, deg in indegree.items() if deg == 0)
    while queue:
        nid = queue.pop(0)
        order.append(nid)
        outs = sorted(e.to_id for e in graph.edges.values() if e.from_id == nid)
        for to in outs:
            pending[to] -= 1
            if pending[to] == 0:
                queue.append(to)
    if len(order) != len(graph.nodes):
        raise ValidationError("graph has a cycle; layout undefined")
    pos: dict[str, dict] = {}
    for nid in order:
        if not incoming[nid]:
            pos[nid] = {"x": 0, "layer": 0}
        else:
            pos[nid] = {
                "x": max(pos[e.from_id]["x"] + e.window.s for e in incoming[nid]),
                "layer": max(pos[e.from_id]["layer"] + 1 for e in incoming[nid]),
            }
    return pos


def persist(graph: CausalFlowGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph.to_dict(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def restore(path, dataset: Dataset | None = None) -> tuple[CausalFlowGraph, list[str]]:
    """Load a persisted graph; fingerprint mismatches warn, never fail."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    graph = CausalFlowGraph.from_dict(data)
    warnings = fingerprint_warnings(graph, dataset)
    return graph, warnings


def fingerprint_warnings(graph: CausalFlowGraph, dataset: Dataset | None) -> list[str]:
    if dataset is None:
        return []
    warnings = []
    expected = dataset.fingerprint()
    if graph.fingerprint != expected:
        warnings.append(
            f"flow graph was saved against a different dataset "
            f"(saved: {graph.fingerprint}, current: {expected})"
        )
    unknown = sorted(
        {n.variable for n in graph.nodes.values() if not dataset.has_variable(n.variable)}
    )
    if unknown:
        warnings.append(f"nodes reference variables absent from the dataset: {unknown}")
    return warnings


def node_to_query(graph: CausalFlowGraph, node_id: str, as_role: str) -> dict:
    """Payload to reload a node into the analysis as a cause or an effect."""
    if node_id not in graph.nodes:
        raise UnknownNode(f"unknown node {node_id!r}")
    node = graph.nodes[node_id]
    if as_role == "cause":
        if node.constraint is None:
            raise ValidationError(
                f"node {node_id!r} is a {node.effect_type} effect with no value "
                "constraint; reload it as an effect instead"
            )
        event = EventDef(
            id=node_id, variable=node.variable, constraint=node.constraint,
            display_label=node.display_label,
        )
        return {"role": "cause", "event": event.to_dict()}
    if as_role == "effect":
        if node.effect_type is not None and node.effect_type != VALUE_IN:
            spec = EffectSpec(effect_type=node.effect_type, variable=node.variable)
        else:
            event = EventDef(
                id=node_id, variable=node.variable, constraint=node.constraint,
                display_label=node.display_label,
            )
            spec = EffectSpec(effect_type=VALUE_IN, event=event)
        return {"role": "effect", "effect": spec.to_dict()}
    raise ValidationError(f"role must be 'cause' or 'effect', got {as_role!r}")
