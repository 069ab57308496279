import copy
import json

import numpy as np
import pytest

from support import dataset_from_columns
from tempocause.errors import NoSignificantCauses, SchemaError, UnknownNode, ValidationError
from tempocause.flowgraph import (
    CausalFlowGraph,
    FlowEdge,
    FlowNode,
    layout,
    merge_graphs,
    node_id_for,
    node_to_query,
    persist,
    restore,
    save_relations,
)
from tempocause.formula import EffectSpec, EventDef, LevelSet, Range, Window
from tempocause import inference as inf

STAMP = "2026-08-10T00:00:00Z"


def two_cause_dataset(seed=0, length=300):
    # Conjunctive drive keeps both screening terms near 1, so both causes
    # stay significant at a small epsilon.
    rng = np.random.default_rng(seed)
    a = [round(float(v), 4) for v in rng.uniform(0, 10, length)]
    b = [str(x) for x in rng.choice(["on", "off"], size=length)]
    y = [round(float(v), 4) for v in rng.uniform(1, 3, length)]
    for t in range(length - 1):
        if 4.0 <= a[t] <= 6.0 and b[t] == "on":
            y[t + 1] = round(float(rng.uniform(5, 7)), 4)
    return dataset_from_columns({"a": a, "b": b, "y": y})


def two_cause_report(seed=0):
    ds = two_cause_dataset(seed)
    causes = [
        EventDef(id="ca", variable="a", constraint=Range(4.0, 6.0)),
        EventDef(id="cb", variable="b", constraint=LevelSet(frozenset({"on"}))),
    ]
    effect = EffectSpec(
        effect_type="valuein",
        event=EventDef(id="e", variable="y", constraint=Range(5.0, 7.0)),
    )
    report = inf.significance_report(ds, causes, effect, Window(1, 1), epsilon=0.05)
    assert len(report.significant_events) == 2
    return ds, report


def simple_node(tag: str) -> FlowNode:
    return FlowNode(
        node_id=node_id_for(tag, Range(0.0, 1.0), None),
        variable=tag,
        constraint=Range(0.0, 1.0),
        effect_type=None,
        display_label=tag,
    )


def edge_between(a: FlowNode, b: FlowNode, s: int = 1, r: int = 0) -> FlowEdge:
    return FlowEdge(
        from_id=a.node_id,
        to_id=b.node_id,
        window=Window(r, s),
        effect_type="increase",
        strength=0.5,
        saved_at=STAMP,
    )


class TestSaveRelations:
    def test_empty_graph_two_causes(self):
        ds, report = two_cause_report()
        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        diff = save_relations(graph, report, saved_at=STAMP)
        assert len(graph.nodes) == 3
        assert len(graph.edges) == 2
        assert len(diff["added_nodes"]) == 3
        assert len(diff["added_edges"]) == 2

    def test_idempotent(self):
        ds, report = two_cause_report()
        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        save_relations(graph, report, saved_at=STAMP)
        snapshot = copy.deepcopy(graph.to_dict())
        diff = save_relations(graph, report, saved_at=STAMP)
        assert graph.to_dict() == snapshot
        assert diff["added_nodes"] == [] and diff["added_edges"] == []
        assert len(diff["updated_edges"]) == 2

    def test_no_significant_causes(self):
        ds, report = two_cause_report()
        starved = inf.significance_report(
            ds, [m.event for m in report.causes], report.effect, report.window, epsilon=1.1
        )
        with pytest.raises(NoSignificantCauses):
            save_relations(CausalFlowGraph(), starved, saved_at=STAMP)

    def test_semantically_equal_events_share_a_node(self):
        ds, report = two_cause_report()
        graph = CausalFlowGraph()
        save_relations(graph, report, saved_at=STAMP)
        renamed = [
            EventDef(id="other-id", variable="a", constraint=Range(4.0, 6.0)),
            EventDef(id="cb", variable="b", constraint=LevelSet(frozenset({"on"}))),
        ]
        report2 = inf.significance_report(ds, renamed, report.effect, report.window, 0.05)
        save_relations(graph, report2, saved_at=STAMP)
        assert len(graph.nodes) == 3  # same constraint, same node, despite the id

    def test_save_order_commutes_for_nonconflicting_reports(self):
        rng = np.random.default_rng(13)
        length = 300

        def report_over(names):
            a = [round(float(v), 4) for v in rng.uniform(0, 10, length)]
            b = [str(x) for x in rng.choice(["on", "off"], size=length)]
            y = [round(float(v), 4) for v in rng.uniform(1, 3, length)]
            for t in range(length - 1):
                if 4.0 <= a[t] <= 6.0 and b[t] == "on":
                    y[t + 1] = round(float(rng.uniform(5, 7)), 4)
            ds = dataset_from_columns(dict(zip(names, [a, b, y])))
            causes = [
                EventDef(id="ca", variable=names[0], constraint=Range(4.0, 6.0)),
                EventDef(id="cb", variable=names[1], constraint=LevelSet(frozenset({"on"}))),
            ]
            effect = EffectSpec(
                effect_type="valuein",
                event=EventDef(id="e", variable=names[2], constraint=Range(5.0, 7.0)),
            )
            return inf.significance_report(ds, causes, effect, Window(1, 1), 0.05)

        rep1 = report_over(["a", "b", "y"])
        rep2 = report_over(["p", "q", "z"])
        forward = CausalFlowGraph()
        save_relations(forward, rep1, saved_at=STAMP)
        save_relations(forward, rep2, saved_at=STAMP)
        backward = CausalFlowGraph()
        save_relations(backward, rep2, saved_at=STAMP)
        save_relations(backward, rep1, saved_at=STAMP)
        assert forward.to_dict() == backward.to_dict()

    def test_cycle_rejected_with_path(self):
        a, b = simple_node("a"), simple_node("b")
        graph = CausalFlowGraph()
        graph.add_node(a)
        graph.add_node(b)
        assert graph.upsert_edge(edge_between(a, b))[0] == "added"
        status, path = graph.upsert_edge(edge_between(b, a))
        assert status == "rejected"
        assert path == [a.node_id, b.node_id, a.node_id]
        assert len(graph.edges) == 1


class TestTwoLayerWalkthrough:
    """Saving pollution-style relations at one delay, then upstream relations
    onto one of the cause variables, must land as two acyclic edge layers
    with shared cause nodes deduplicated (structure check only)."""

    def test_two_saves_build_two_layers(self):
        rng = np.random.default_rng(99)
        length = 400
        names = [
            "PM", "Pressure", "Temperature", "WindDirection",
            "Precipitation", "WindSpeed",
        ]
        columns = {
            name: [round(float(v), 4) for v in rng.uniform(0, 10, length)]
            for name in names
        }
        ds = dataset_from_columns(columns)

        def quantile_event(eid, name):
            return EventDef(id=eid, variable=name, constraint=Range(5.0, 10.0))

        shared_temp = quantile_event("temp", "Temperature")
        shared_wind = quantile_event("wind", "WindDirection")

        first = inf.significance_report(
            ds,
            [
                quantile_event("press", "Pressure"),
                shared_temp,
                shared_wind,
                quantile_event("precip", "Precipitation"),
            ],
            EffectSpec(effect_type="increase", variable="PM"),
            Window(5, 5),
            epsilon=0.0,
        )
        second = inf.significance_report(
            ds,
            [quantile_event("speed", "WindSpeed"), shared_temp, shared_wind],
            EffectSpec(effect_type="decrease", variable="Pressure"),
            Window(1, 1),
            epsilon=0.0,
        )
        assert len(first.significant_events) == 4
        assert len(second.significant_events) == 3

        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        save_relations(graph, first, saved_at=STAMP)
        save_relations(graph, second, saved_at=STAMP)

        # 4 + 3 edges, no rejections, and the shared cause nodes merged:
        # nodes = PM effect + Pressure effect + 5 distinct cause events.
        assert len(graph.edges) == 7
        assert len(graph.nodes) == 7
        pm_node = next(n for n in graph.nodes.values() if n.variable == "PM")
        pressure_effect = next(
            n for n in graph.nodes.values()
            if n.variable == "Pressure" and n.effect_type == "decrease"
        )
        into_pm = [e for e in graph.edges.values() if e.to_id == pm_node.node_id]
        into_pressure = [
            e for e in graph.edges.values() if e.to_id == pressure_effect.node_id
        ]
        assert len(into_pm) == 4 and all(e.effect_type == "increase" for e in into_pm)
        assert len(into_pressure) == 3 and all(
            e.effect_type == "decrease" for e in into_pressure
        )
        positions = layout(graph)  # acyclic by construction, layout must hold
        assert positions[pm_node.node_id]["x"] == 5


class TestLayout:
    def test_chain_accumulates_lag(self):
        a, b, c = simple_node("a"), simple_node("b"), simple_node("c")
        graph = CausalFlowGraph()
        for n in (a, b, c):
            graph.add_node(n)
        graph.upsert_edge(edge_between(a, b, s=2))
        graph.upsert_edge(edge_between(b, c, s=3))
        pos = layout(graph)
        assert pos[a.node_id]["x"] == 0
        assert pos[b.node_id]["x"] == 2
        assert pos[c.node_id]["x"] == 5

    def test_diamond_takes_longest_path(self):
        a, b, c, d = (simple_node(t) for t in "abcd")
        graph = CausalFlowGraph()
        for n in (a, b, c, d):
            graph.add_node(n)
        graph.upsert_edge(edge_between(a, b, s=1))
        graph.upsert_edge(edge_between(a, c, s=4))
        graph.upsert_edge(edge_between(b, d, s=1))
        graph.upsert_edge(edge_between(c, d, s=1))
        pos = layout(graph)
        assert pos[d.node_id]["x"] == 5

    def test_single_node(self):
        graph = CausalFlowGraph()
        n = simple_node("solo")
        graph.add_node(n)
        assert layout(graph) == {n.node_id: {"x": 0, "layer": 0}}

    def test_every_edge_respected(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            graph = random_dag(rng)
            pos = layout(graph)
            for edge in graph.edges.values():
                assert pos[edge.to_id]["x"] >= pos[edge.from_id]["x"] + edge.window.s


from support import random_dag  # noqa: E402  (shared with the acceptance suite)


class TestPersistence:
    def test_round_trip_identity(self, tmp_path):
        rng = np.random.default_rng(9)
        for i in range(10):
            graph = random_dag(rng)
            graph.fingerprint = {"dataset_name": "x", "length": 10, "variables_hash": "abc"}
            path = tmp_path / f"g{i}.flow.json"
            persist(graph, path)
            loaded, warnings = restore(path)
            assert loaded == graph
            assert warnings == []

    def test_tampered_edge_reference(self, tmp_path):
        ds, report = two_cause_report()
        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        save_relations(graph, report, saved_at=STAMP)
        path = tmp_path / "g.flow.json"
        persist(graph, path)
        data = json.loads(path.read_text())
        data["nodes"] = data["nodes"][1:]  # drop a referenced node
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaError):
            restore(path)

    def test_fingerprint_mismatch_warns(self, tmp_path):
        ds, report = two_cause_report()
        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        save_relations(graph, report, saved_at=STAMP)
        path = tmp_path / "g.flow.json"
        persist(graph, path)
        other = dataset_from_columns({"zz": [0.5, 1.5, 2.5]}, name="other")
        loaded, warnings = restore(path, other)
        assert any("different dataset" in w for w in warnings)
        assert any("absent from the dataset" in w for w in warnings)


class TestMerge:
    def test_merge_with_self_is_identity(self, tmp_path):
        ds, report = two_cause_report()
        graph = CausalFlowGraph(fingerprint=ds.fingerprint())
        save_relations(graph, report, saved_at=STAMP)
        before = graph.to_dict()
        merge_graphs(graph, CausalFlowGraph.from_dict(before))
        assert graph.to_dict() == before

    def test_disjoint_union(self):
        ds1, rep1 = two_cause_report(seed=0)
        graph = CausalFlowGraph()
        save_relations(graph, rep1, saved_at=STAMP)
        other = CausalFlowGraph()
        a, b = simple_node("p"), simple_node("q")
        other.add_node(a)
        other.add_node(b)
        other.upsert_edge(edge_between(a, b))
        n_before = len(graph.nodes)
        diff = merge_graphs(graph, other)
        assert len(graph.nodes) == n_before + 2
        assert len(diff["added_edges"]) == 1

    def test_cycle_forming_merge_rejected_edgewise(self):
        a, b = simple_node("a"), simple_node("b")
        g1 = CausalFlowGraph()
        g1.add_node(a)
        g1.add_node(b)
        g1.upsert_edge(edge_between(a, b))
        g2 = CausalFlowGraph()
        g2.add_node(a)
        g2.add_node(b)
        g2.upsert_edge(edge_between(b, a))
        diff = merge_graphs(g1, g2)
        assert len(diff["rejected_edges"]) == 1
        assert diff["rejected_edges"][0]["path"]
        assert len(g1.edges) == 1


class TestNodeReload:
    def test_effect_node_reloads_as_effect(self):
        ds, report = two_cause_report()
        graph = CausalFlowGraph()
        save_relations(graph, report, saved_at=STAMP)
        effect_node = next(n for n in graph.nodes.values() if n.effect_type == "valuein")
        payload = node_to_query(graph, effect_node.node_id, "effect")
        assert payload["effect"]["effect_type"] == "valuein"
        assert payload["effect"]["event"]["lo"] == 5.0

    def test_cause_node_reloads_as_valuein_effect(self):
        ds, report = two_cause_report()
        graph = CausalFlowGraph()
        save_relations(graph, report, saved_at=STAMP)
        cause_node = next(
            n for n in graph.nodes.values() if n.effect_type is None and n.variable == "a"
        )
        payload = node_to_query(graph, cause_node.node_id, "effect")
        assert payload["effect"]["effect_type"] == "valuein"
        assert payload["effect"]["event"]["lo"] == 4.0

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            node_to_query(CausalFlowGraph(), "missing", "cause")

    def test_shift_effect_node_cannot_reload_as_cause(self):
        node = FlowNode(
            node_id=node_id_for("y", None, "decrease"),
            variable="y",
            constraint=None,
            effect_type="decrease",
            display_label="y decrease",
        )
        graph = CausalFlowGraph()
        graph.add_node(node)
        with pytest.raises(ValidationError, match="no value constraint"):
            node_to_query(graph, node.node_id, "cause")


class TestDeleteNode:
    def test_cascade_and_diff(self):
        a, b, c = simple_node("a"), simple_node("b"), simple_node("c")
        graph = CausalFlowGraph()
        for n in (a, b, c):
            graph.add_node(n)
        graph.upsert_edge(edge_between(a, b))
        graph.upsert_edge(edge_between(b, c))
        diff = graph.delete_node(b.node_id)
        assert len(diff["removed_edges"]) == 2
        assert b.node_id not in graph.nodes
        assert len(graph.edges) == 0
