"""The causal calculus: lagged conditional measures, screening, sweeps.

Probability-form queries count how often an effect event follows a cause
occurrence within the delay window (hits over occurrences). Expectation-form
queries average the effect variable over every in-window (occurrence, offset)
pair, which at a single-point window [d, d] reduces to the frequency-weighted
sum over the variable's domain.

Screening compares the effect with and without a cause while a companion
cause is held present (same-time conjunction of label tracks); the average of
those screened terms over all companions is the cause's average significance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CONTINUOUS, Dataset
from .errors import (
    AllMissingInWindow,
    EmptyCauseSet,
    InsufficientCauses,
    NoObservations,
    NoOccurrences,
    ValidationError,
)
from .formula import (
    INCREASE,
    MISSING,
    TRUE,
    VALUE_IN,
    EffectSpec,
    EventDef,
    Window,
    conjoin,
    label_track,
    negate,
    occurrence_times,
    path_counts,
)

# Dead band for Increase/Decrease verdicts, scaled by the effect's value range
# so float noise never decides a direction.
DIRECTION_DEAD_BAND = 1e-9

REASON_INSUFFICIENT = "insufficient_causes"
REASON_ALL_SKIPPED = "all_terms_skipped"
REASON_EMPTY_SET = "empty_significant_set"

MISSING_WINDOW_WARN_FRACTION = 0.05


def base_probability(effect_track: np.ndarray) -> float:
    """Base rate of the event over its observed (non-missing) time points."""
    observed = int((effect_track != MISSING).sum())
    if observed == 0:
        raise NoObservations("effect track has no observed entries")
    return int((effect_track == TRUE).sum()) / observed


def base_expectation(values: np.ndarray) -> float:
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        raise NoObservations("variable has no observed values")
    return float(np.sum(finite)) / finite.size


def cond_probability(
    ds: Dataset, cause_track: np.ndarray, effect_track: np.ndarray, w: Window
) -> float:
    """Fraction of cause occurrences followed by the effect within the window.

    Occurrences whose window runs past the series end stay in the denominator
    and count as unsatisfied; missing effect entries are not-true.
    """
    hits, occurrences, _ = path_counts(cause_track, effect_track, w)
    if occurrences == 0:
        raise NoOccurrences("cause event never occurs")
    return hits / occurrences


def _window_value_stats(
    cause_track: np.ndarray, values: np.ndarray, w: Window
) -> tuple[float, int, int, int]:
    """(sum, count, occurrences, windows containing a missing value) over all
    in-window effect values across cause occurrences. Summation order is fixed
    (offset-major, time-ascending) so results never depend on scheduling."""
    times = occurrence_times(cause_track)
    if times.size == 0:
        raise NoOccurrences("cause event never occurs")
    length = len(values)
    total = 0.0
    count = 0
    for d in range(w.r, w.s + 1):
        idx = times + d
        vals = values[idx[idx < length]]
        finite = vals[~np.isnan(vals)]
        total += float(np.sum(finite))
        count += int(finite.size)
    miss_cum = np.concatenate(([0], np.cumsum(np.isnan(values))))
    lo = np.minimum(times + w.r, length)
    hi = np.minimum(times + w.s + 1, length)
    missing_windows = int(((miss_cum[hi] - miss_cum[lo]) > 0).sum())
    return total, count, int(times.size), missing_windows


def cond_expectation(
    ds: Dataset, cause_track: np.ndarray, effect_var: str, w: Window
) -> float:
    """Mean effect value over every in-window point after a cause occurrence."""
    var = ds.variable(effect_var)
    if var.kind != CONTINUOUS:
        raise ValidationError(f"expected value needs a continuous variable, got {effect_var!r}")
    total, count, _, _ = _window_value_stats(cause_track, var.values, w)
    if count == 0:
        raise AllMissingInWindow(
            f"no observed {effect_var!r} value inside any cause window"
        )
    return total / count


@dataclass(frozen=True)
class _EffectContext:
    """Bound effect: base measure plus a conditional-measure evaluator."""

    spec: EffectSpec
    ds: Dataset
    base: float
    effect_track: np.ndarray | None
    values: np.ndarray | None

    def conditional(self, cause_track: np.ndarray, w: Window) -> tuple[float, int, int]:
        """(measure, occurrence count, windows-with-missing count)."""
        if self.spec.effect_type == VALUE_IN:
            hits, occ, miss = path_counts(cause_track, self.effect_track, w)
            if occ == 0:
                raise NoOccurrences("cause event never occurs")
            return hits / occ, occ, miss
        total, count, occ, miss = _window_value_stats(cause_track, self.values, w)
        if count == 0:
            raise AllMissingInWindow("no observed effect value inside any cause window")
        return total / count, occ, miss

    @property
    def dead_band(self) -> float:
        if self.spec.effect_type == VALUE_IN:
            return 0.0
        return DIRECTION_DEAD_BAND * self.ds.variable(self.spec.variable).value_range()


def bind_effect(ds: Dataset, effect: EffectSpec) -> _EffectContext:
    effect.validate_for(ds)
    if effect.effect_type == VALUE_IN:
        track = label_track(ds, effect.event)
        return _EffectContext(
            spec=effect, ds=ds, base=base_probability(track), effect_track=track, values=None
        )
    values = ds.variable(effect.variable).values
    return _EffectContext(
        spec=effect, ds=ds, base=base_expectation(values), effect_track=None, values=values
    )


@dataclass(frozen=True)
class PotentialCause:
    verdict: bool
    elevation: float
    conditional: float
    base: float


def is_potential_cause(
    ds: Dataset, c: EventDef, effect: EffectSpec, w: Window
) -> PotentialCause:
    """Eq.-2/3 test: does the event elevate the effect at this window?

    ValueIn with an explicit p runs the literal two-sided bar test
    (base < p and conditional >= p); without p, strict elevation of the
    conditional probability is required. Increase/Decrease compare expected
    values directionally with a range-scaled dead band.
    """
    ctx = bind_effect(ds, effect)
    track = label_track(ds, c)
    return _potential_from_context(ctx, track, w)


def _potential_from_context(
    ctx: _EffectContext, cause_track: np.ndarray, w: Window
) -> PotentialCause:
    cond, _, _ = ctx.conditional(cause_track, w)
    elevation = cond - ctx.base
    if ctx.spec.effect_type == VALUE_IN:
        p = ctx.spec.p_threshold
        if p is None:
            verdict = cond > ctx.base
        else:
            verdict = ctx.base < p and cond >= p
    elif ctx.spec.effect_type == INCREASE:
        verdict = cond > ctx.base + ctx.dead_band
    else:
        verdict = cond < ctx.base - ctx.dead_band
    return PotentialCause(verdict=verdict, elevation=elevation, conditional=cond, base=ctx.base)


def _screen_term(
    ctx: _EffectContext,
    c_track: np.ndarray,
    x_track: np.ndarray,
    w: Window,
) -> float | None:
    """One screening term: measure(c AND x) minus measure(NOT-c AND x).

    None when either conditioning never occurs (or yields no observed effect
    value), which callers must skip with a reduced divisor.
    """
    try:
        with_c, _, _ = ctx.conditional(conjoin([c_track, x_track]), w)
        without_c, _, _ = ctx.conditional(conjoin([negate(c_track), x_track]), w)
    except (NoOccurrences, AllMissingInWindow):
        return None
    return with_c - without_c


def eps_average(
    ds: Dataset,
    c: EventDef,
    causes: list[EventDef],
    effect: EffectSpec,
    w: Window,
) -> float | None:
    """Average screened influence of c among the full cause set.

    Returns None (the Undefined marker) when every companion term had to be
    skipped; raises InsufficientCauses when the set has fewer than two events.
    """
    if len(causes) < 2:
        raise InsufficientCauses("average significance needs at least two potential causes")
    ids = [ev.id for ev in causes]
    if len(set(ids)) != len(ids):
        raise ValidationError("cause set contains duplicate event ids")
    if c.id not in ids:
        raise ValidationError(f"event {c.id!r} is not in the cause set")
    ctx = bind_effect(ds, effect)
    c_track = label_track(ds, c)
    terms = []
    for x in causes:
        if x.id == c.id:
            continue
        term = _screen_term(ctx, c_track, label_track(ds, x), w)
        if term is not None:
            terms.append(term)
    if not terms:
        return None
    return math.fsum(terms) / len(terms)


@dataclass(frozen=True)
class CauseMeasure:
    event: EventDef
    elevation: float
    eps_avg: float | None
    eps_reason: str | None
    occurrence_count: int
    is_significant: bool
    skipped_terms: int
    missing_window_fraction: float

    def to_dict(self) -> dict:
        return {
            "event": self.event.to_dict(),
            "elevation": self.elevation,
            "eps_avg": self.eps_avg,
            "eps_reason": self.eps_reason,
            "occurrence_count": self.occurrence_count,
            "is_significant": self.is_significant,
            "skipped_terms": self.skipped_terms,
            "missing_window_fraction": self.missing_window_fraction,
        }


@dataclass(frozen=True)
class SignificanceReport:
    effect: EffectSpec
    window: Window
    epsilon: float
    causes: tuple[CauseMeasure, ...]
    matrix: tuple[tuple[float | None, ...], ...]
    combined_base: float
    combined_cond: float | None
    combined_influence: float | None
    combined_occurrences: int | None
    combined_reason: str | None
    warnings: tuple[str, ...]

    @property
    def significant_events(self) -> list[EventDef]:
        return [m.event for m in self.causes if m.is_significant]

    def to_dict(self) -> dict:
        return {
            "effect": self.effect.to_dict(),
            "window": self.window.to_dict(),
            "epsilon": self.epsilon,
            "causes": [m.to_dict() for m in self.causes],
            "matrix": {
                "event_ids": [m.event.id for m in self.causes],
                "values": [list(row) for row in self.matrix],
            },
            "combined": {
                "base": self.combined_base,
                "conditional": self.combined_cond,
                "influence": self.combined_influence,
                "occurrences": self.combined_occurrences,
                "reason": self.combined_reason,
            },
            "significant_ids": [m.event.id for m in self.causes if m.is_significant],
            "warnings": list(self.warnings),
        }


def _sort_key(measure: CauseMeasure) -> tuple:
    rank = abs(measure.eps_avg) if measure.eps_avg is not None else -math.inf
    return (-rank, -abs(measure.elevation), measure.event.id)


def significance_report(
    ds: Dataset,
    causes: list[EventDef],
    effect: EffectSpec,
    w: Window,
    epsilon: float,
) -> SignificanceReport:
    """Full tested-cause report: per-cause elevation and average significance,
    the screening matrix, and the combined effect of the significant set."""
    if not causes:
        raise ValidationError("report needs at least one cause event")
    ids = [ev.id for ev in causes]
    if len(set(ids)) != len(ids):
        raise ValidationError("cause set contains duplicate event ids")
    if epsilon < 0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    w.validate_for(ds)
    ctx = bind_effect(ds, effect)
    tracks = {ev.id: label_track(ds, ev) for ev in causes}

    warnings: list[str] = []
    if w.r == 0 and w.s == 0:
        warnings.append(
            "window [0, 0]: screening conditions companions at the same instant; "
            "widen the window so companion causes could also have acted"
        )

    elevations: dict[str, float] = {}
    occurrences: dict[str, int] = {}
    miss_fraction: dict[str, float] = {}
    for ev in causes:
        cond, occ, miss = ctx.conditional(tracks[ev.id], w)
        elevations[ev.id] = cond - ctx.base
        occurrences[ev.id] = occ
        miss_fraction[ev.id] = miss / occ
        if miss / occ > MISSING_WINDOW_WARN_FRACTION:
            warnings.append(
                f"cause {ev.id!r}: {miss / occ:.1%} of its windows contain missing "
                "effect values (treated as not-true)"
            )

    n = len(causes)
    term_of: dict[tuple[str, str], float | None] = {}
    if n >= 2:
        for c in causes:
            for x in causes:
                if c.id == x.id:
                    continue
                term_of[(c.id, x.id)] = _screen_term(ctx, tracks[c.id], tracks[x.id], w)

    measures = []
    for ev in causes:
        if n < 2:
            eps_avg_value, reason, skipped = None, REASON_INSUFFICIENT, 0
            significant = abs(elevations[ev.id]) >= epsilon
        else:
            terms = [term_of[(ev.id, x.id)] for x in causes if x.id != ev.id]
            defined = [t for t in terms if t is not None]
            skipped = len(terms) - len(defined)
            if not defined:
                eps_avg_value, reason = None, REASON_ALL_SKIPPED
                significant = False
            else:
                eps_avg_value = math.fsum(defined) / len(defined)
                reason = None
                significant = abs(eps_avg_value) >= epsilon
        measures.append(
            CauseMeasure(
                event=ev,
                elevation=elevations[ev.id],
                eps_avg=eps_avg_value,
                eps_reason=reason,
                occurrence_count=occurrences[ev.id],
                is_significant=significant,
                skipped_terms=skipped,
                missing_window_fraction=miss_fraction[ev.id],
            )
        )
    measures.sort(key=_sort_key)

    matrix = tuple(
        tuple(
            elevations[row.event.id]
            if row.event.id == col.event.id
            else term_of[(row.event.id, col.event.id)]
            for col in measures
        )
        for row in measures
    )

    significant = [m.event for m in measures if m.is_significant]
    combined_cond = combined_influence = None
    combined_occ = None
    combined_reason = None
    if not significant:
        combined_reason = REASON_EMPTY_SET
    else:
        conj = conjoin([tracks[ev.id] for ev in significant])
        try:
            cond, occ, _ = ctx.conditional(conj, w)
            combined_cond, combined_occ = cond, occ
            combined_influence = cond - ctx.base
        except (NoOccurrences, AllMissingInWindow) as exc:
            combined_reason = exc.code
            combined_occ = int((conj == TRUE).sum())

    return SignificanceReport(
        effect=effect,
        window=w,
        epsilon=epsilon,
        causes=tuple(measures),
        matrix=matrix,
        combined_base=ctx.base,
        combined_cond=combined_cond,
        combined_influence=combined_influence,
        combined_occurrences=combined_occ,
        combined_reason=combined_reason,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class DelayPoint:
    delay: int
    conditional: float | None
    influence: float | None

    def to_dict(self) -> dict:
        return {"delay": self.delay, "conditional": self.conditional, "influence": self.influence}


@dataclass(frozen=True)
class DelayProfile:
    max_delay: int
    base: float
    points: tuple[DelayPoint, ...]

    def to_dict(self) -> dict:
        return {
            "max_delay": self.max_delay,
            "base": self.base,
            "points": [p.to_dict() for p in self.points],
        }


def delay_sweep(
    ds: Dataset,
    significant: list[EventDef],
    effect: EffectSpec,
    max_delay: int,
) -> DelayProfile:
    """Combined influence of a fixed significant-cause set at every exact
    delay d = 0..max_delay; unobtainable points become gaps, not zeros."""
    if not significant:
        raise EmptyCauseSet("delay sweep needs at least one significant cause")
    if max_delay < 1:
        raise ValidationError(f"max_delay must be >= 1, got {max_delay}")
    ctx = bind_effect(ds, effect)
    conj = conjoin([label_track(ds, ev) for ev in significant])
    points = []
    for d in range(max_delay + 1):
        try:
            Window(d, d).validate_for(ds)
            cond, _, _ = ctx.conditional(conj, Window(d, d))
            points.append(DelayPoint(delay=d, conditional=cond, influence=cond - ctx.base))
        except (NoOccurrences, AllMissingInWindow, ValidationError):
            points.append(DelayPoint(delay=d, conditional=None, influence=None))
    return DelayProfile(max_delay=max_delay, base=ctx.base, points=tuple(points))
