"""State formulas over a dataset and leads-to path satisfaction.

An event is a Boolean proposition on one variable (inclusive value range for
continuous, level set for discrete). Evaluating it yields a label track with
three states per time point: TRUE, FALSE, or MISSING when the underlying
value is missing. Conjunction merges tracks pointwise with missing absorbing.

A cause occurrence at time t satisfies the path to an effect under window
[r, s] iff the effect track is TRUE at some t' in [t+r, t+s] inside the
series; missing effect entries count as not-true.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CONTINUOUS, DISCRETE, Dataset, Variable
from .errors import ValidationError

FALSE = np.int8(0)
TRUE = np.int8(1)
MISSING = np.int8(2)

INCREASE = "increase"
DECREASE = "decrease"
VALUE_IN = "valuein"
EFFECT_TYPES = (INCREASE, DECREASE, VALUE_IN)


@dataclass(frozen=True)
class Range:
    """Inclusive numeric constraint lo <= v <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValidationError(f"range lo {self.lo} must be <= hi {self.hi}")


@dataclass(frozen=True)
class LevelSet:
    """Membership constraint over declared levels of a discrete variable."""

    levels: frozenset[str]

    def __post_init__(self):
        if not self.levels:
            raise ValidationError("level set must be non-empty")

    def sorted_levels(self) -> list[str]:
        return sorted(self.levels)


@dataclass(frozen=True)
class EventDef:
    id: str
    variable: str
    constraint: Range | LevelSet
    display_label: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("event id must be non-empty")

    @property
    def label(self) -> str:
        if self.display_label:
            return self.display_label
        if isinstance(self.constraint, Range):
            return f"{self.variable} in [{self.constraint.lo:g}, {self.constraint.hi:g}]"
        return f"{self.variable} in {{{', '.join(self.constraint.sorted_levels())}}}"

    def to_dict(self) -> dict:
        if isinstance(self.constraint, Range):
            kind, lo, hi, levels = "range", self.constraint.lo, self.constraint.hi, None
        else:
            kind, lo, hi, levels = "levels", None, None, self.constraint.sorted_levels()
        return {
            "id": self.id,
            "variable": self.variable,
            "kind": kind,
            "lo": lo,
            "hi": hi,
            "levels": levels,
            "label": self.label,
        }

    @staticmethod
    def from_dict(data: dict) -> "EventDef":
        try:
            kind = data["kind"]
            if kind == "range":
                constraint: Range | LevelSet = Range(float(data["lo"]), float(data["hi"]))
            elif kind == "levels":
                constraint = LevelSet(frozenset(str(v) for v in data["levels"]))
            else:
                raise ValidationError(f"unknown event kind {kind!r}")
            return EventDef(
                id=str(data["id"]),
                variable=str(data["variable"]),
                constraint=constraint,
                display_label=str(data.get("label") or ""),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed event definition: {exc}") from exc


@dataclass(frozen=True)
class Window:
    """Delay window [r, s] in index units, 0 <= r <= s."""

    r: int
    s: int

    def __post_init__(self):
        if not (0 <= self.r <= self.s):
            raise ValidationError(f"window needs 0 <= r <= s, got [{self.r}, {self.s}]")

    def to_dict(self) -> dict:
        return {"r": self.r, "s": self.s}

    def validate_for(self, ds: Dataset) -> None:
        if self.s >= ds.length:
            raise ValidationError(
                f"window upper bound {self.s} must be below dataset length {ds.length}"
            )


@dataclass(frozen=True)
class EffectSpec:
    """What "the effect occurs" means: a value shift or an event range.

    Increase/Decrease address a continuous variable's expected value;
    ValueIn wraps an EventDef and optionally the Eq.-2 probability bar p.
    """

    effect_type: str
    variable: str | None = None
    event: EventDef | None = None
    p_threshold: float | None = None

    def __post_init__(self):
        if self.effect_type not in EFFECT_TYPES:
            raise ValidationError(f"unknown effect type {self.effect_type!r}")
        if self.effect_type == VALUE_IN:
            if self.event is None:
                raise ValidationError("valuein effect requires an event definition")
            object.__setattr__(self, "variable", self.event.variable)
        else:
            if self.variable is None:
                raise ValidationError(f"{self.effect_type} effect requires a variable")
            if self.p_threshold is not None:
                raise ValidationError("p_threshold only applies to valuein effects")
        if self.p_threshold is not None and not (0.0 < self.p_threshold <= 1.0):
            raise ValidationError(f"p_threshold must be in (0, 1], got {self.p_threshold}")

    @property
    def label(self) -> str:
        if self.effect_type == VALUE_IN:
            return self.event.label
        return f"{self.variable} {self.effect_type}"

    def to_dict(self) -> dict:
        return {
            "effect_type": self.effect_type,
            "variable": self.variable,
            "event": self.event.to_dict() if self.event else None,
            "p_threshold": self.p_threshold,
        }

    @staticmethod
    def from_dict(data: dict) -> "EffectSpec":
        try:
            effect_type = str(data["effect_type"])
            event = EventDef.from_dict(data["event"]) if data.get("event") else None
            p = data.get("p_threshold")
            return EffectSpec(
                effect_type=effect_type,
                variable=data.get("variable"),
                event=event,
                p_threshold=float(p) if p is not None else None,
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed effect spec: {exc}") from exc

    def validate_for(self, ds: Dataset) -> None:
        var = ds.variable(self.variable)
        if self.effect_type in (INCREASE, DECREASE) and var.kind != CONTINUOUS:
            raise ValidationError(
                f"{self.effect_type} effect requires a continuous variable, "
                f"{self.variable!r} is {var.kind}"
            )
        if self.event is not None:
            bind_event(ds, self.event)


def bind_event(ds: Dataset, ev: EventDef) -> Variable:
    """Check the event against the dataset and return its variable."""
    var = ds.variable(ev.variable)
    if isinstance(ev.constraint, Range):
        if var.kind != CONTINUOUS:
            raise ValidationError(
                f"range constraint on discrete variable {ev.variable!r} (event {ev.id!r})"
            )
    else:
        if var.kind != DISCRETE:
            raise ValidationError(
                f"level constraint on continuous variable {ev.variable!r} (event {ev.id!r})"
            )
        unknown = ev.constraint.levels - set(var.levels)
        if unknown:
            raise ValidationError(
                f"event {ev.id!r} references undeclared levels {sorted(unknown)}"
            )
    return var


def label_track(ds: Dataset, ev: EventDef) -> np.ndarray:
    """Evaluate the event at every time point into {TRUE, FALSE, MISSING}."""
    var = bind_event(ds, ev)
    track = np.full(ds.length, FALSE, dtype=np.int8)
    if var.kind == CONTINUOUS:
        missing = np.isnan(var.values)
        hit = (var.values >= ev.constraint.lo) & (var.values <= ev.constraint.hi)
    else:
        missing = var.values < 0
        wanted = np.array(
            [i for i, label in enumerate(var.levels) if label in ev.constraint.levels],
            dtype=np.int32,
        )
        hit = np.isin(var.values, wanted)
    track[hit & ~missing] = TRUE
    track[missing] = MISSING
    return track


def negate(track: np.ndarray) -> np.ndarray:
    """Logical negation; missing stays missing."""
    out = np.full(track.shape, FALSE, dtype=np.int8)
    out[track == FALSE] = TRUE
    out[track == MISSING] = MISSING
    return out


def conjoin(tracks: list[np.ndarray]) -> np.ndarray:
    """Pointwise AND of label tracks; any missing entry makes the point missing."""
    if not tracks:
        raise ValidationError("conjoin needs at least one track")
    length = len(tracks[0])
    for t in tracks[1:]:
        if len(t) != length:
            raise ValidationError("conjoin requires equal-length tracks")
    stacked = np.stack(tracks)
    out = np.where((stacked == TRUE).all(axis=0), TRUE, FALSE).astype(np.int8)
    out[(stacked == MISSING).any(axis=0)] = MISSING
    return out


def occurrence_times(track: np.ndarray) -> np.ndarray:
    return np.flatnonzero(track == TRUE)


def satisfies_path(
    cause_track: np.ndarray, effect_track: np.ndarray, w: Window, t: int
) -> bool:
    """Does the cause occurrence at t lead to the effect within [t+r, t+s]?"""
    if cause_track[t] != TRUE:
        raise ValidationError(f"no cause occurrence at t={t}")
    length = len(effect_track)
    lo, hi = t + w.r, min(t + w.s, length - 1)
    if lo >= length:
        return False
    return bool((effect_track[lo : hi + 1] == TRUE).any())


def path_counts(
    cause_track: np.ndarray, effect_track: np.ndarray, w: Window
) -> tuple[int, int, int]:
    """(satisfied occurrences, total occurrences, occurrences whose window
    contains at least one missing effect entry)."""
    times = occurrence_times(cause_track)
    if times.size == 0:
        return 0, 0, 0
    length = len(effect_track)
    true_cum = np.concatenate(([0], np.cumsum(effect_track == TRUE)))
    miss_cum = np.concatenate(([0], np.cumsum(effect_track == MISSING)))
    lo = np.minimum(times + w.r, length)
    hi = np.minimum(times + w.s + 1, length)
    hits = (true_cum[hi] - true_cum[lo]) > 0
    with_missing = (miss_cum[hi] - miss_cum[lo]) > 0
    return int(hits.sum()), int(times.size), int(with_missing.sum())
