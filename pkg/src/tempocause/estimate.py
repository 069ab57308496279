"""Automated estimation of potential causes.

For a continuous candidate variable, the values it takes at times from which
the effect holds within the window are clustered incrementally in 1-D; each
surviving cluster's value range becomes a candidate event, candidates that
fail the elevation test are dropped, overlapping survivors are merged, and
the strongest correctly-signed candidate is returned. Discrete variables are
scanned level by level and the passing levels unioned into one event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CONTINUOUS, Dataset
from .errors import AllMissingInWindow, NoEvidence, NoOccurrences, ValidationError
from .formula import (
    INCREASE,
    TRUE,
    VALUE_IN,
    EffectSpec,
    EventDef,
    LevelSet,
    Range,
    Window,
    label_track,
)
from .inference import PotentialCause, _EffectContext, _potential_from_context, bind_effect

DEFAULT_THETA_FRACTION = 0.15
DEFAULT_MAX_ITERATIONS = 5


@dataclass(frozen=True)
class EstimatorConfig:
    """Clustering knobs: cluster radius as a fraction of the cause variable's
    value range, iteration cap, and the outlier floor (None = max(2, 1% of
    the evidence size))."""

    theta_fraction: float = DEFAULT_THETA_FRACTION
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    min_cluster_mass: int | None = None

    def __post_init__(self):
        if not (0.0 < self.theta_fraction <= 1.0):
            raise ValidationError(f"theta_fraction must be in (0, 1], got {self.theta_fraction}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.min_cluster_mass is not None and self.min_cluster_mass < 1:
            raise ValidationError(f"min_cluster_mass must be >= 1, got {self.min_cluster_mass}")

    def resolved_min_mass(self, evidence_size: int) -> int:
        if self.min_cluster_mass is not None:
            return self.min_cluster_mass
        return max(2, math.ceil(0.01 * evidence_size))


@dataclass(frozen=True)
class Cluster:
    center: float
    members: tuple[float, ...]

    @property
    def lo(self) -> float:
        return min(self.members)

    @property
    def hi(self) -> float:
        return max(self.members)


@dataclass(frozen=True)
class EstimatedCause:
    event: EventDef
    cluster_support: int
    elevation: float

    def to_dict(self) -> dict:
        return {
            "event": self.event.to_dict(),
            "cluster_support": self.cluster_support,
            "elevation": self.elevation,
        }


def _evidence_track(ctx: _EffectContext) -> np.ndarray:
    """Boolean "the effect holds here" track used to filter preceding values.

    ValueIn uses the effect event itself; a value-shift effect holds where the
    observed value lies on the requested side of its mean (the event form of
    the shift), so preceding values concentrate where the shift is driven.
    """
    if ctx.spec.effect_type == VALUE_IN:
        return ctx.effect_track == TRUE
    observed = ~np.isnan(ctx.values)
    if ctx.spec.effect_type == INCREASE:
        return observed & (ctx.values > ctx.base)
    return observed & (ctx.values < ctx.base)


def _window_hits(effect_true: np.ndarray, times: np.ndarray, w: Window) -> np.ndarray:
    length = len(effect_true)
    true_cum = np.concatenate(([0], np.cumsum(effect_true)))
    lo = np.minimum(times + w.r, length)
    hi = np.minimum(times + w.s + 1, length)
    return (true_cum[hi] - true_cum[lo]) > 0


def collect_preceding_values(
    ds: Dataset, v_c: str, effect: EffectSpec, w: Window
) -> list[float]:
    """Observed cause-variable values at times from which the effect holds
    within [t+r, t+s], in time order."""
    var = ds.variable(v_c)
    ctx = bind_effect(ds, effect)
    effect_true = _evidence_track(ctx)
    observed = ~np.isnan(var.values) if var.kind == CONTINUOUS else var.values >= 0
    times = np.flatnonzero(observed)
    picked = times[_window_hits(effect_true, times, w)]
    if picked.size == 0:
        raise NoEvidence(f"no observed {v_c!r} value precedes the effect within the window")
    return [float(var.values[t]) for t in picked]


def incremental_cluster(
    values: list[float], theta: float, cfg: EstimatorConfig
) -> list[Cluster]:
    """1-D incremental clustering with per-iteration re-assignment.

    Values scan in their given order; each joins the nearest center strictly
    within theta (ties to the earliest center) or spawns a new cluster.
    Centers move to member means after each scan and clusters below the
    outlier floor are dropped. The outcome is order-sensitive by design.
    """
    if not values:
        raise ValidationError("cannot cluster an empty value list")
    min_mass = cfg.resolved_min_mass(len(values))
    centers: list[float] = [values[0]]
    prev_partition: tuple[tuple[int, ...], ...] | None = None
    for _ in range(cfg.max_iterations):
        scan_centers = list(centers)
        members: list[list[int]] = [[] for _ in scan_centers]
        for vi, v in enumerate(values):
            best, best_dist = -1, math.inf
            for ci, center in enumerate(scan_centers):
                dist = abs(center - v)
                if dist < best_dist:
                    best, best_dist = ci, dist
            if best >= 0 and best_dist < theta:
                members[best].append(vi)
            else:
                scan_centers.append(v)
                members.append([vi])
        kept = [m for m in members if len(m) >= min_mass]
        partition = tuple(tuple(m) for m in kept)
        centers = [sum(values[i] for i in m) / len(m) for m in kept]
        if partition == prev_partition:
            break
        prev_partition = partition
    return [
        Cluster(center=c, members=tuple(values[i] for i in m))
        for c, m in zip(centers, prev_partition or ())
    ]


def _event_support(
    ds: Dataset, event: EventDef, effect_true: np.ndarray, w: Window
) -> int:
    """Event occurrences from which the effect holds in-window (evidence mass)."""
    times = np.flatnonzero(label_track(ds, event) == TRUE)
    return int(_window_hits(effect_true, times, w).sum())


def _test_candidate(
    ds: Dataset, ctx: _EffectContext, event: EventDef, w: Window
) -> PotentialCause | None:
    try:
        result = _potential_from_context(ctx, label_track(ds, event), w)
    except (NoOccurrences, AllMissingInWindow):
        return None
    return result if result.verdict else None


def _merge_passing_ranges(
    ds: Dataset,
    ctx: _EffectContext,
    v_c: str,
    passing: list[tuple[Range, PotentialCause]],
    w: Window,
    merge_gap: float,
) -> list[tuple[Range, PotentialCause]]:
    """Union overlapping-or-touching survivor ranges; a merged range must
    still pass the elevation re-test, otherwise its constituents stay.

    Adjacent clusters tiling one continuous mass end up separated by gaps at
    the data's sample resolution, so "touching" is taken at the clustering
    radius: ranges closer than ``merge_gap`` merge.
    """
    ordered = sorted(passing, key=lambda pair: (pair[0].lo, pair[0].hi))
    groups: list[list[tuple[Range, PotentialCause]]] = []
    bound = -math.inf
    for item in ordered:
        if groups and item[0].lo <= bound + merge_gap:
            groups[-1].append(item)
            bound = max(bound, item[0].hi)
        else:
            groups.append([item])
            bound = item[0].hi
    out: list[tuple[Range, PotentialCause]] = []
    for group in groups:
        if len(group) == 1:
            out.append(group[0])
            continue
        merged = Range(min(r.lo for r, _ in group), max(r.hi for r, _ in group))
        result = _test_candidate(ds, ctx, EventDef(id=f"est.{v_c}", variable=v_c, constraint=merged), w)
        if result is not None:
            out.append((merged, result))
        else:
            out.extend(group)
    return out


def estimate_cause(
    ds: Dataset, v_c: str, effect: EffectSpec, w: Window, cfg: EstimatorConfig
) -> EstimatedCause | None:
    """Best elevation-passing range event on one continuous variable, or None."""
    var = ds.variable(v_c)
    if var.kind != CONTINUOUS:
        raise ValidationError(f"estimate_cause needs a continuous variable, got {v_c!r}")
    evidence = collect_preceding_values(ds, v_c, effect, w)
    ctx = bind_effect(ds, effect)
    theta = cfg.theta_fraction * var.value_range()
    clusters = incremental_cluster(evidence, theta, cfg)

    passing: list[tuple[Range, PotentialCause]] = []
    for cluster in clusters:
        rng = Range(cluster.lo, cluster.hi)
        result = _test_candidate(ds, ctx, EventDef(id=f"est.{v_c}", variable=v_c, constraint=rng), w)
        if result is not None:
            passing.append((rng, result))
    if not passing:
        return None
    passing = _merge_passing_ranges(ds, ctx, v_c, passing, w, merge_gap=theta)

    best_rng, best = max(passing, key=lambda pair: abs(pair[1].elevation))
    event = EventDef(
        id=f"est.{v_c}",
        variable=v_c,
        constraint=best_rng,
        display_label=f"{v_c} in [{best_rng.lo:g}, {best_rng.hi:g}]",
    )
    support = _event_support(ds, event, _evidence_track(ctx), w)
    if support < cfg.resolved_min_mass(len(evidence)):
        return None
    return EstimatedCause(event=event, cluster_support=support, elevation=best.elevation)


def _estimate_discrete(
    ds: Dataset, v_c: str, effect: EffectSpec, w: Window, cfg: EstimatorConfig
) -> EstimatedCause | None:
    """Scan the variable's levels and union every elevation-passing level."""
    var = ds.variable(v_c)
    ctx = bind_effect(ds, effect)
    selected = [
        level
        for level in var.levels
        if _test_candidate(
            ds, ctx, EventDef(id=f"est.{v_c}", variable=v_c, constraint=LevelSet(frozenset({level}))), w
        )
        is not None
    ]
    if not selected:
        return None
    union = EventDef(
        id=f"est.{v_c}",
        variable=v_c,
        constraint=LevelSet(frozenset(selected)),
        display_label=f"{v_c} in {{{', '.join(sorted(selected))}}}",
    )
    result = _test_candidate(ds, ctx, union, w)
    if result is None:
        return None
    effect_true = _evidence_track(ctx)
    all_levels = EventDef(id=f"all.{v_c}", variable=v_c, constraint=LevelSet(frozenset(var.levels)))
    evidence_size = _event_support(ds, all_levels, effect_true, w)
    support = _event_support(ds, union, effect_true, w)
    if evidence_size == 0 or support < cfg.resolved_min_mass(evidence_size):
        return None
    return EstimatedCause(event=union, cluster_support=support, elevation=result.elevation)


@dataclass(frozen=True)
class EstimationResult:
    causes: tuple[EstimatedCause, ...]
    skipped: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "causes": [c.to_dict() for c in self.causes],
            "skipped": list(self.skipped),
        }


def estimate_all(
    ds: Dataset,
    effect: EffectSpec,
    w: Window,
    cfg: EstimatorConfig = EstimatorConfig(),
    exclude: set[str] | None = None,
) -> EstimationResult:
    """Estimate one candidate event per variable; the effect variable and any
    excluded names are skipped, and per-variable failures are reported."""
    effect.validate_for(ds)
    w.validate_for(ds)
    excluded = set(exclude or ())
    excluded.add(effect.variable)
    causes: list[EstimatedCause] = []
    skipped: list[dict] = []
    for var in ds.variables:
        if var.name in excluded:
            continue
        try:
            if var.kind == CONTINUOUS:
                found = estimate_cause(ds, var.name, effect, w, cfg)
            else:
                found = _estimate_discrete(ds, var.name, effect, w, cfg)
        except NoEvidence as exc:
            skipped.append({"variable": var.name, "reason": exc.code, "message": exc.message})
            continue
        if found is None:
            skipped.append(
                {
                    "variable": var.name,
                    "reason": "no_elevating_event",
                    "message": "no candidate elevates the effect",
                }
            )
        else:
            causes.append(found)
    return EstimationResult(causes=tuple(causes), skipped=tuple(skipped))
