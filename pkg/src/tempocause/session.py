"""Workflow state shared by the CLI and the HTTP service.

A session binds one immutable dataset to the mutable analysis state (effect,
ordered cause set, delay window, significance threshold, flow graph) and
exposes exactly the computations the interfaces serve. Both front ends go
through this module, so a report produced by the CLI and by the service for
identical inputs is the same object, byte for byte once serialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CONTINUOUS, DEFAULT_HISTOGRAM_BINS, Dataset
from .errors import DuplicateEvent, NoEffect, NoOccurrences, UnknownEvent, ValidationError
from .estimate import EstimationResult, EstimatorConfig, estimate_all
from .flowgraph import CausalFlowGraph, fingerprint_warnings, node_to_query, save_relations
from .formula import (
    TRUE,
    VALUE_IN,
    EffectSpec,
    EventDef,
    Window,
    bind_event,
    label_track,
)
from .inference import DelayProfile, SignificanceReport, delay_sweep, significance_report


@dataclass
class AnalysisSession:
    dataset: Dataset
    effect: EffectSpec | None = None
    causes: dict[str, EventDef] = field(default_factory=dict)
    window: Window = Window(1, 1)
    epsilon: float = 0.0
    flow: CausalFlowGraph = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.flow is None:
            self.flow = CausalFlowGraph(fingerprint=self.dataset.fingerprint())
        self.window.validate_for(self.dataset)

    # -- configuration ---------------------------------------------------

    def set_effect(self, effect: EffectSpec) -> None:
        effect.validate_for(self.dataset)
        clash = [ev.id for ev in self.causes.values() if ev.variable == effect.variable]
        if clash:
            raise ValidationError(
                f"causes {clash} are defined on {effect.variable!r}; remove them "
                "before making it the effect variable"
            )
        self.effect = effect

    def set_window(self, window: Window) -> None:
        window.validate_for(self.dataset)
        self.window = window

    def set_epsilon(self, epsilon: float) -> None:
        if epsilon < 0:
            raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
        self.epsilon = epsilon

    def add_cause(self, event: EventDef) -> None:
        if self.effect is None:
            raise NoEffect("set an effect before adding causes")
        bind_event(self.dataset, event)
        if event.id in self.causes:
            raise DuplicateEvent(f"event id {event.id!r} already in the cause set")
        if event.variable == self.effect.variable:
            raise ValidationError(
                f"cause {event.id!r} is on the effect variable {event.variable!r}"
            )
        # A cause that never occurs would poison every later report (its
        # occurrence ratio is undefined), so it is rejected up front.
        if not (label_track(self.dataset, event) == TRUE).any():
            raise NoOccurrences(f"cause {event.id!r} never occurs in the dataset")
        self.causes[event.id] = event

    def remove_cause(self, event_id: str) -> EventDef:
        try:
            return self.causes.pop(event_id)
        except KeyError:
            raise UnknownEvent(f"unknown cause event {event_id!r}") from None

    def replace_causes(self, events: list[EventDef]) -> list[EventDef]:
        """Swap in a new cause set, returning the previous one for undo."""
        previous = list(self.causes.values())
        self.causes = {}
        for ev in events:
            self.add_cause(ev)
        return previous

    # -- computations ------------------------------------------------------

    def _resolved(self, eps: float | None, r: int | None, s: int | None) -> tuple[float, Window]:
        epsilon = self.epsilon if eps is None else eps
        if epsilon < 0:
            raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
        if (r is None) != (s is None):
            raise ValidationError("window overrides need both r and s")
        window = self.window if r is None else Window(r, s)
        window.validate_for(self.dataset)
        return epsilon, window

    def report(
        self, eps: float | None = None, r: int | None = None, s: int | None = None
    ) -> SignificanceReport:
        if self.effect is None:
            raise NoEffect("set an effect before requesting a report")
        if not self.causes:
            raise ValidationError("add at least one cause before requesting a report")
        epsilon, window = self._resolved(eps, r, s)
        return significance_report(
            self.dataset, list(self.causes.values()), self.effect, window, epsilon
        )

    def sweep(
        self,
        max_delay: int,
        eps: float | None = None,
        r: int | None = None,
        s: int | None = None,
    ) -> DelayProfile:
        report = self.report(eps, r, s)
        return delay_sweep(self.dataset, report.significant_events, self.effect, max_delay)

    def estimate(
        self, cfg: EstimatorConfig, exclude: set[str] | None = None
    ) -> tuple[EstimationResult, list[EventDef]]:
        """Run auto-estimation and replace the cause set (undo list returned)."""
        if self.effect is None:
            raise NoEffect("set an effect before estimating causes")
        result = estimate_all(self.dataset, self.effect, self.window, cfg, exclude)
        previous = self.replace_causes([c.event for c in result.causes])
        return result, previous

    def conditional(self, cause: EventDef, delay: int, bins: int = DEFAULT_HISTOGRAM_BINS) -> dict:
        if self.effect is None:
            raise NoEffect("set an effect before requesting conditional distributions")
        if delay < 0 or delay >= self.dataset.length:
            raise ValidationError(f"delay must be in [0, {self.dataset.length}), got {delay}")
        bind_event(self.dataset, cause)
        return conditional_payload(self.dataset, self.effect, cause, delay, bins)

    # -- flow graph --------------------------------------------------------

    def save_flow(self, saved_at: str | None = None) -> dict:
        report = self.report()
        return save_relations(self.flow, report, saved_at=saved_at)

    def load_flow(self, graph: CausalFlowGraph) -> list[str]:
        warnings = fingerprint_warnings(graph, self.dataset)
        self.flow = graph
        return warnings

    def reload_node(self, node_id: str, role: str) -> dict:
        payload = node_to_query(self.flow, node_id, role)
        if role == "cause":
            self.add_cause(EventDef.from_dict(payload["event"]))
        else:
            effect = EffectSpec.from_dict(payload["effect"])
            self.set_effect(effect)
        return payload

    def state_dict(self) -> dict:
        return {
            "effect": self.effect.to_dict() if self.effect else None,
            "causes": [ev.to_dict() for ev in self.causes.values()],
            "window": self.window.to_dict(),
            "epsilon": self.epsilon,
        }


def _histogram(values: np.ndarray, edges: list[float]) -> list[int]:
    finite = values[~np.isnan(values)]
    if len(edges) == 2 and edges[0] == edges[1]:
        return [int(finite.size)]
    counts, _ = np.histogram(finite, bins=np.array(edges))
    return [int(c) for c in counts]


def conditional_payload(
    ds: Dataset, effect: EffectSpec, cause: EventDef, delay: int, bins: int
) -> dict:
    """Base vs cause-conditioned distribution of the effect variable at one
    delay, on identical bins; a never-occurring cause flags instead of erroring."""
    var = ds.variable(effect.variable)
    cause_track = label_track(ds, cause)
    times = np.flatnonzero(cause_track == TRUE)
    shifted = times + delay
    shifted = shifted[shifted < ds.length]

    if var.kind == CONTINUOUS:
        lo, hi = var.observed_min, var.observed_max
        edges = (
            [lo, hi]
            if lo == hi
            else [float(e) for e in np.linspace(lo, hi, bins + 1)]
        )
        base_values = var.values
        cond_values = var.values[shifted]
        cond_values = cond_values[~np.isnan(cond_values)]
        base = {
            "edges": edges,
            "counts": _histogram(base_values, edges),
            "mean": float(np.mean(base_values[~np.isnan(base_values)])),
            "levels": None,
        }
        cond = {
            "edges": edges,
            "counts": _histogram(cond_values, edges) if cond_values.size else [0] * (len(edges) - 1),
            "mean": float(np.mean(cond_values)) if cond_values.size else None,
            "levels": None,
        }
    else:
        labels = list(var.levels)
        base_counts = [int((var.values == i).sum()) for i in range(len(labels))]
        picked = var.values[shifted]
        cond_counts = [int((picked == i).sum()) for i in range(len(labels))]
        base = {"edges": None, "counts": base_counts, "mean": None, "levels": labels}
        cond = {"edges": None, "counts": cond_counts, "mean": None, "levels": labels}

    return {
        "cause": cause.to_dict(),
        "effect": effect.to_dict(),
        "delay": delay,
        "base": base,
        "conditional": cond,
        "occurrences": int(times.size),
        "conditional_count": int(sum(cond["counts"])),
        "no_occurrences": bool(times.size == 0),
    }


def series_payload(session: AnalysisSession) -> dict:
    """Stacked-track payload: effect first, then causes in insertion order."""
    ds = session.dataset
    tracks = []

    def variable_values(name: str) -> list:
        var = ds.variable(name)
        if var.kind == CONTINUOUS:
            return [None if np.isnan(v) else float(v) for v in var.values]
        return [None if v < 0 else var.levels[int(v)] for v in var.values]

    if session.effect is not None:
        spec = session.effect
        entry = {
            "role": "effect",
            "event_id": None,
            "variable": spec.variable,
            "kind": ds.variable(spec.variable).kind,
            "label": spec.label,
            "values": variable_values(spec.variable),
            "labels": None,
            "levels": list(ds.variable(spec.variable).levels) or None,
        }
        if spec.effect_type == VALUE_IN:
            entry["labels"] = [int(x) for x in label_track(ds, spec.event)]
        tracks.append(entry)
    for ev in session.causes.values():
        tracks.append(
            {
                "role": "cause",
                "event_id": ev.id,
                "variable": ev.variable,
                "kind": ds.variable(ev.variable).kind,
                "label": ev.label,
                "values": variable_values(ev.variable),
                "labels": [int(x) for x in label_track(ds, ev)],
                "levels": list(ds.variable(ev.variable).levels) or None,
            }
        )
    return {"length": ds.length, "time_unit_label": ds.time_unit_label, "tracks": tracks}
