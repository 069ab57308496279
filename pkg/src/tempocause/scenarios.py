"""Deterministic synthetic datasets with known planted relations.

Each generator emits CSV text plus a ground-truth sidecar describing the
planted relations (variables, ranges, delays), so recovery tests can score
against construction rather than against opinion. Identical seed and
parameters always produce identical bytes.

Bundled samples (the 8-point worked micro-example and the insulin/glucose
style series) live as package data and load through ``bundled_sample``.
"""

from __future__ import annotations

import io
import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .dataset import Dataset, IngestOptions, parse_csv
from .errors import ValidationError


@dataclass(frozen=True)
class ScenarioOutput:
    name: str
    csv_text: str
    ground_truth: dict

    def dataset(self, name: str | None = None) -> Dataset:
        return parse_csv(self.csv_text, IngestOptions(), name=name or self.name)


def _csv_text(header: list[str], columns: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow(row)
    return buf.getvalue()


def _fmt(values, digits: int = 4) -> list[str]:
    return [repr(round(float(v), digits)) for v in values]


def shift(seed: int, delay: int = 3, length: int = 1000, noise: float = 0.05) -> ScenarioOutput:
    """Effect event is the cause event shifted by ``delay`` with label noise."""
    if not (1 <= delay < length):
        raise ValidationError(f"delay must be in [1, length), got {delay}")
    rng = np.random.default_rng(seed)
    spike = rng.random(length) < 0.35
    x = np.where(spike, rng.uniform(2.0, 3.0, length), rng.uniform(0.0, 1.0, length))
    trigger = np.zeros(length, dtype=bool)
    trigger[delay:] = spike[: length - delay]
    trigger ^= rng.random(length) < noise
    y = np.where(trigger, rng.uniform(2.0, 3.0, length), rng.uniform(0.0, 1.0, length))
    truth = {
        "scenario": "shift",
        "seed": seed,
        "relations": [
            {
                "cause": {"variable": "x", "lo": 2.0, "hi": 3.0},
                "effect": {"variable": "y", "lo": 2.0, "hi": 3.0, "effect_type": "valuein"},
                "delay": delay,
            }
        ],
    }
    return ScenarioOutput("shift", _csv_text(["x", "y"], [_fmt(x), _fmt(y)]), truth)


def planted_range(
    seed: int, delay: int = 2, length: int = 600, lo: float = 4.0, hi: float = 6.0
) -> ScenarioOutput:
    """A driver range causes the effect at a fixed lag; a hidden confounder
    fires the effect too and drives a decoy variable, so the decoy shows a
    spurious lagged association that screening must discount."""
    if not (1 <= delay < length):
        raise ValidationError(f"delay must be in [1, length), got {delay}")
    rng = np.random.default_rng(seed)
    driver = rng.uniform(0.0, 10.0, length)
    latent = rng.random(length) < 0.15
    decoy = np.where(
        latent, 8.0 + rng.normal(0.0, 0.4, length), 2.0 + rng.normal(0.0, 0.4, length)
    )
    background = rng.uniform(0.0, 10.0, length)
    in_range = (driver >= lo) & (driver <= hi)
    confound_fire = latent & (rng.random(length) < 0.5)
    trigger = np.zeros(length, dtype=bool)
    trigger[delay:] = in_range[: length - delay] | confound_fire[: length - delay]
    trigger ^= rng.random(length) < 0.01
    y = np.where(trigger, rng.uniform(5.0, 7.0, length), rng.uniform(1.0, 3.0, length))
    truth = {
        "scenario": "planted-range",
        "seed": seed,
        "relations": [
            {
                "cause": {"variable": "driver", "lo": lo, "hi": hi},
                "effect": {"variable": "y", "lo": 5.0, "hi": 7.0, "effect_type": "valuein"},
                "delay": delay,
            }
        ],
        "decoy_variable": "decoy",
        "confounder": "latent (not exported)",
    }
    return ScenarioOutput(
        "planted-range",
        _csv_text(
            ["driver", "decoy", "background", "y"],
            [_fmt(driver), _fmt(decoy), _fmt(background), _fmt(y)],
        ),
        truth,
    )


def chain(seed: int, lag1: int = 2, lag2: int = 3, length: int = 800) -> ScenarioOutput:
    """Two-step chain x -> m -> y: x drives m at lag1, m drives y at lag2."""
    if lag1 < 1 or lag2 < 1 or lag1 + lag2 >= length:
        raise ValidationError("lags must be >= 1 and fit inside the series")
    rng = np.random.default_rng(seed)
    x_spike = rng.random(length) < 0.3
    x = np.where(x_spike, rng.uniform(2.0, 3.0, length), rng.uniform(0.0, 1.0, length))
    m_band = np.zeros(length, dtype=bool)
    m_band[lag1:] = x_spike[: length - lag1]
    m_band ^= rng.random(length) < 0.05
    m = np.where(m_band, rng.uniform(2.0, 3.0, length), rng.uniform(0.0, 1.0, length))
    y_band = np.zeros(length, dtype=bool)
    y_band[lag2:] = m_band[: length - lag2]
    y_band ^= rng.random(length) < 0.05
    y = np.where(y_band, rng.uniform(2.0, 3.0, length), rng.uniform(0.0, 1.0, length))
    truth = {
        "scenario": "chain",
        "seed": seed,
        "relations": [
            {
                "cause": {"variable": "x", "lo": 2.0, "hi": 3.0},
                "effect": {"variable": "m", "lo": 2.0, "hi": 3.0, "effect_type": "valuein"},
                "delay": lag1,
            },
            {
                "cause": {"variable": "m", "lo": 2.0, "hi": 3.0},
                "effect": {"variable": "y", "lo": 2.0, "hi": 3.0, "effect_type": "valuein"},
                "delay": lag2,
            },
        ],
    }
    return ScenarioOutput(
        "chain", _csv_text(["x", "m", "y"], [_fmt(x), _fmt(m), _fmt(y)]), truth
    )


def null(seed: int, n_vars: int = 4, length: int = 300) -> ScenarioOutput:
    """Mutually independent uniform series; no relation is planted."""
    if n_vars < 2:
        raise ValidationError("null scenario needs at least 2 variables")
    rng = np.random.default_rng(seed)
    names = [f"s{i}" for i in range(n_vars)]
    columns = [_fmt(rng.uniform(0.0, 1.0, length)) for _ in names]
    truth = {"scenario": "null", "seed": seed, "relations": []}
    return ScenarioOutput("null", _csv_text(names, columns), truth)


SCENARIOS = {
    "shift": shift,
    "planted-range": planted_range,
    "chain": chain,
    "null": null,
}


def generate(scenario: str, seed: int, **params) -> ScenarioOutput:
    try:
        fn = SCENARIOS[scenario]
    except KeyError:
        raise ValidationError(
            f"unknown scenario {scenario!r}; choose one of {sorted(SCENARIOS)}"
        ) from None
    return fn(seed, **params)


# -- bundled samples ---------------------------------------------------------

# Fast insulin acts at lag 1, slow insulin peaks at lag 4; doses land on a
# sparse schedule so the regular-dose track is missing between doses.
_GLUCOSE_SEED = 726302
_REGULAR_EFFECT = {"low": {1: 5.0, 2: 2.0, 3: 1.0}, "dose": {1: 28.0, 2: 12.0, 3: 4.0}}
_ULTRA_EFFECT = {1: 10.0, 2: 14.0, 3: 20.0, 4: 45.0, 5: 26.0, 6: 12.0}


def glucose_sample(seed: int = _GLUCOSE_SEED, length: int = 500) -> ScenarioOutput:
    rng = np.random.default_rng(seed)
    glucose = 140.0 + rng.normal(0.0, 6.0, length)
    regular = [""] * length
    ultra = ["none"] * length
    t = int(rng.integers(0, 4))
    while t < length:
        level = ["low", "normal", "high"][int(rng.integers(0, 3))]
        regular[t] = level
        strength = _REGULAR_EFFECT["low" if level == "low" else "dose"]
        for lag, drop in strength.items():
            if t + lag < length:
                glucose[t + lag] -= drop
        if rng.random() < 0.5:
            ultra[t] = "taken"
            for lag, drop in _ULTRA_EFFECT.items():
                if t + lag < length:
                    glucose[t + lag] -= drop
        t += int(rng.integers(5, 9))
    glucose = np.maximum(glucose, 40.0)
    truth = {
        "scenario": "glucose-sample",
        "seed": seed,
        "relations": [
            {
                "cause": {"variable": "RegularIns", "levels": ["normal", "high"]},
                "effect": {"variable": "Glucose", "effect_type": "decrease"},
                "delay": 1,
            },
            {
                "cause": {"variable": "UltralenteIns", "levels": ["taken"]},
                "effect": {"variable": "Glucose", "effect_type": "decrease"},
                "delay": 4,
            },
        ],
    }
    return ScenarioOutput(
        "glucose-sample",
        _csv_text(
            ["Glucose", "RegularIns", "UltralenteIns"],
            [_fmt(glucose, digits=1), regular, ultra],
        ),
        truth,
    )


_FIG1_CSV = """c,v_e
T,1.7
F,0.9
T,1.6
F,3.0
T,0.7
F,2.3
T,0.5
F,1.3
"""


def fig1_micro_csv() -> str:
    """8-point worked example: cause fires at even steps; the effect variable
    averages 1.5 overall and 1.875 one step after each cause occurrence."""
    return _FIG1_CSV


SAMPLE_FILES = {"fig1": "fig1_micro.csv", "glucose": "glucose_sample.csv"}


def bundled_sample(name: str) -> Dataset:
    try:
        filename = SAMPLE_FILES[name]
    except KeyError:
        raise ValidationError(
            f"unknown sample {name!r}; choose one of {sorted(SAMPLE_FILES)}"
        ) from None
    text = resources.files("tempocause.data").joinpath(filename).read_text(encoding="utf-8")
    return parse_csv(text, IngestOptions(time_unit_label="hour"), name=name)


def sample_ground_truth(name: str) -> dict:
    stem = SAMPLE_FILES[name].rsplit(".", 1)[0]
    text = resources.files("tempocause.data").joinpath(f"{stem}.truth.json").read_text()
    return json.loads(text)
