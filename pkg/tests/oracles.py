"""Brute-force reference implementations used to pin the engine's math.

Everything here recomputes the definitions with plain Python loops over
lists (None marks a missing entry). Nothing imports engine internals, so an
agreement test compares two independently written derivations.
"""

from __future__ import annotations


def range_track(values: list, lo: float, hi: float) -> list:
    return [None if v is None else (lo <= v <= hi) for v in values]


def levels_track(values: list, levels: set) -> list:
    return [None if v is None else (v in levels) for v in values]


def negate(track: list) -> list:
    return [None if x is None else (not x) for x in track]


def conjoin(*tracks: list) -> list:
    out = []
    for entries in zip(*tracks):
        if any(e is None for e in entries):
            out.append(None)
        else:
            out.append(all(entries))
    return out


def occurrences(track: list) -> list[int]:
    return [t for t, x in enumerate(track) if x is True]


def satisfies(effect_track: list, t: int, r: int, s: int) -> bool:
    for d in range(r, s + 1):
        u = t + d
        if u < len(effect_track) and effect_track[u] is True:
            return True
    return False


def base_probability(track: list) -> float:
    observed = [x for x in track if x is not None]
    return sum(1 for x in observed if x) / len(observed)


def base_expectation(values: list) -> float:
    observed = [v for v in values if v is not None]
    return sum(observed) / len(observed)


def cond_probability(cause_track: list, effect_track: list, r: int, s: int) -> float:
    occ = occurrences(cause_track)
    hits = sum(1 for t in occ if satisfies(effect_track, t, r, s))
    return hits / len(occ)


def cond_expectation(cause_track: list, values: list, r: int, s: int) -> float | None:
    """None when no in-window value is observed (the engine raises instead)."""
    picked = []
    for t in occurrences(cause_track):
        for d in range(r, s + 1):
            u = t + d
            if u < len(values) and values[u] is not None:
                picked.append(values[u])
    if not picked:
        return None
    return sum(picked) / len(picked)


def _measure(effect_kind: str, cause_track: list, effect: list, r: int, s: int):
    """effect_kind "prob" uses an effect label track, "exp" the raw values."""
    if not occurrences(cause_track):
        return None
    if effect_kind == "prob":
        return cond_probability(cause_track, effect, r, s)
    return cond_expectation(cause_track, effect, r, s)


def screen_term(
    effect_kind: str, c_track: list, x_track: list, effect: list, r: int, s: int
) -> float | None:
    with_c = _measure(effect_kind, conjoin(c_track, x_track), effect, r, s)
    without_c = _measure(effect_kind, conjoin(negate(c_track), x_track), effect, r, s)
    if with_c is None or without_c is None:
        return None
    return with_c - without_c


def eps_average(
    effect_kind: str, c_index: int, cause_tracks: list[list], effect: list, r: int, s: int
) -> float | None:
    terms = []
    for j, x_track in enumerate(cause_tracks):
        if j == c_index:
            continue
        term = screen_term(effect_kind, cause_tracks[c_index], x_track, effect, r, s)
        if term is not None:
            terms.append(term)
    if not terms:
        return None
    return sum(terms) / len(terms)
