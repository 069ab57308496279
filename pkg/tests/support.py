"""Shared test fixtures: CSV builders and the randomized instance generator
used by both the oracle-equivalence suite and the acceptance criteria."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

import numpy as np

from tempocause.dataset import Dataset, IngestOptions, parse_csv
from tempocause.formula import EffectSpec, EventDef, LevelSet, Range, Window


def csv_from_columns(columns: dict[str, list]) -> str:
    """Columns hold float | str | None per slot; None becomes an empty cell."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(names)
    length = len(next(iter(columns.values())))
    for t in range(length):
        row = []
        for name in names:
            v = columns[name][t]
            row.append("" if v is None else (repr(v) if isinstance(v, float) else str(v)))
        writer.writerow(row)
    return buf.getvalue()


def dataset_from_columns(columns: dict[str, list], name: str = "test") -> Dataset:
    return parse_csv(csv_from_columns(columns), IngestOptions(), name=name)


@dataclass
class Instance:
    """One randomized dataset plus oracle-ready raw columns and bound queries."""

    ds: Dataset
    raw: dict[str, list]
    causes: list[EventDef]
    cause_tracks: list[list]
    effect: EffectSpec
    effect_kind: str  # "prob" | "exp"
    effect_oracle: list  # label track (prob) or raw values (exp)
    window: Window


def _continuous_column(rng: np.random.Generator, length: int, missing: float) -> list:
    values: list = [round(float(v), 6) for v in rng.uniform(0.0, 10.0, length)]
    for t in range(length):
        if rng.random() < missing:
            values[t] = None
    if all(v is None for v in values):
        values[int(rng.integers(0, length))] = round(float(rng.uniform(0.0, 10.0)), 6)
    return values


def _discrete_column(rng: np.random.Generator, length: int, missing: float) -> list:
    n_levels = int(rng.integers(2, 5))
    levels = [f"L{i}" for i in range(n_levels)]
    values: list = [levels[int(rng.integers(0, n_levels))] for _ in range(length)]
    for t in range(length):
        if rng.random() < missing:
            values[t] = None
    if all(v is None for v in values):
        values[int(rng.integers(0, length))] = levels[0]
    return values


def _cause_event(rng: np.random.Generator, name: str, column: list, idx: int) -> EventDef:
    observed = [v for v in column if v is not None]
    if isinstance(observed[0], float):
        a, b = (float(v) for v in rng.choice(observed, size=2, replace=True))
        return EventDef(id=f"c{idx}", variable=name, constraint=Range(min(a, b), max(a, b)))
    present = sorted(set(observed))
    size = int(rng.integers(1, len(present) + 1))
    chosen = [str(v) for v in rng.choice(present, size=size, replace=False)]
    return EventDef(id=f"c{idx}", variable=name, constraint=LevelSet(frozenset(chosen)))


def random_instance(rng: np.random.Generator, max_length: int = 30, missing: float = 0.1) -> Instance:
    """Mixed-kind dataset with up to 3 causes; every cause occurs at least once."""
    from oracles import levels_track, range_track

    length = int(rng.integers(8, max_length + 1))
    n_causes = int(rng.integers(1, 4))
    raw: dict[str, list] = {}
    causes: list[EventDef] = []
    for i in range(n_causes):
        name = f"v{i}"
        maker = _continuous_column if rng.random() < 0.6 else _discrete_column
        column = maker(rng, length, missing)
        raw[name] = column
        causes.append(_cause_event(rng, name, column, i))

    effect_kind = "prob" if rng.random() < 0.5 else "exp"
    raw["eff"] = _continuous_column(rng, length, missing)
    if effect_kind == "prob":
        observed = sorted(v for v in raw["eff"] if v is not None)
        lo = observed[len(observed) // 3]
        hi = observed[max(len(observed) * 2 // 3, len(observed) // 3)]
        event = EventDef(id="e", variable="eff", constraint=Range(lo, hi))
        effect = EffectSpec(effect_type="valuein", event=event)
        effect_oracle = range_track(raw["eff"], lo, hi)
    else:
        etype = "increase" if rng.random() < 0.5 else "decrease"
        effect = EffectSpec(effect_type=etype, variable="eff")
        effect_oracle = raw["eff"]

    r = int(rng.integers(0, 4))
    s = r + int(rng.integers(0, 4))
    window = Window(r, min(s, length - 1))

    ds = dataset_from_columns(raw)
    cause_tracks = []
    for ev in causes:
        column = raw[ev.variable]
        if isinstance(ev.constraint, Range):
            cause_tracks.append(range_track(column, ev.constraint.lo, ev.constraint.hi))
        else:
            cause_tracks.append(levels_track(column, set(ev.constraint.levels)))
    return Instance(
        ds=ds,
        raw=raw,
        causes=causes,
        cause_tracks=cause_tracks,
        effect=effect,
        effect_kind=effect_kind,
        effect_oracle=effect_oracle,
        window=window,
    )


def occurring_instance(rng: np.random.Generator, **kw) -> Instance:
    """random_instance filtered so every cause event occurs at least once."""
    while True:
        inst = random_instance(rng, **kw)
        if all(any(x is True for x in tr) for tr in inst.cause_tracks):
            return inst


def jaccard_interval(a: tuple[float, float], b: tuple[float, float]) -> float:
    inter = max(0.0, min(a[1], b[1]) - max(a[0], b[0]))
    union = max(a[1], b[1]) - min(a[0], b[0])
    return inter / union if union > 0 else 0.0


def simple_flow_node(tag: str):
    from tempocause.flowgraph import FlowNode, node_id_for

    return FlowNode(
        node_id=node_id_for(tag, Range(0.0, 1.0), None),
        variable=tag,
        constraint=Range(0.0, 1.0),
        effect_type=None,
        display_label=tag,
    )


def random_dag(rng: np.random.Generator, max_nodes: int = 8):
    """Random acyclic flow graph built forward along a node ordering."""
    from tempocause.flowgraph import CausalFlowGraph, FlowEdge

    n = int(rng.integers(2, max_nodes + 1))
    nodes = [simple_flow_node(f"v{i}") for i in range(n)]
    graph = CausalFlowGraph()
    for node in nodes:
        graph.add_node(node)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.35:
                edge = FlowEdge(
                    from_id=nodes[i].node_id,
                    to_id=nodes[j].node_id,
                    window=Window(0, int(rng.integers(1, 6))),
                    effect_type=str(rng.choice(["increase", "decrease", "valuein"])),
                    strength=float(rng.normal()),
                    saved_at="2026-08-10T00:00:00Z",
                )
                assert graph.upsert_edge(edge)[0] == "added"
    return graph
