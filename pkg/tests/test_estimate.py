import numpy as np
import pytest

import oracles
from support import dataset_from_columns, occurring_instance
from tempocause.errors import NoEvidence, ValidationError
from tempocause.estimate import (
    EstimatorConfig,
    collect_preceding_values,
    estimate_all,
    estimate_cause,
    incremental_cluster,
)
from tempocause.formula import EffectSpec, EventDef, Range, Window
from tempocause import inference as inf


FIG1 = {
    "c": ["T", "F", "T", "F", "T", "F", "T", "F"],
    "v_e": [1.7, 0.9, 1.6, 3.0, 0.7, 2.3, 0.5, 1.3],
}


def value_in(variable, lo, hi, p=None):
    return EffectSpec(
        effect_type="valuein",
        event=EventDef(id="e", variable=variable, constraint=Range(lo, hi)),
        p_threshold=p,
    )


class TestCollectPrecedingValues:
    def test_effect_never_true(self):
        ds = dataset_from_columns({"a": [1.5, 2.5, 3.5], "y": [0.5, 0.5, 0.5]})
        with pytest.raises(NoEvidence):
            collect_preceding_values(ds, "a", value_in("y", 9.0, 10.0), Window(1, 1))

    def test_fig1_layout_members(self):
        # e = [v_e in [1.6, 3.0]] holds at t in {0, 2, 3, 5}; with w=[1,1] the
        # preceding self-values are v_e at t in {1, 2, 4}.
        ds = dataset_from_columns(FIG1)
        got = collect_preceding_values(ds, "v_e", value_in("v_e", 1.6, 3.0), Window(1, 1))
        assert got == [0.9, 1.6, 0.7]

    def test_matches_oracle_filter(self):
        rng = np.random.default_rng(19)
        checked = 0
        while checked < 25:
            inst = occurring_instance(rng, max_length=25)
            if inst.effect_kind != "prob":
                continue
            name = next(
                (v.name for v in inst.ds.variables if v.kind == "continuous" and v.name != "eff"),
                None,
            )
            if name is None:
                continue
            expected = [
                inst.raw[name][t]
                for t in range(inst.ds.length)
                if inst.raw[name][t] is not None
                and oracles.satisfies(inst.effect_oracle, t, inst.window.r, inst.window.s)
            ]
            if expected:
                got = collect_preceding_values(inst.ds, name, inst.effect, inst.window)
                assert got == expected
            else:
                with pytest.raises(NoEvidence):
                    collect_preceding_values(inst.ds, name, inst.effect, inst.window)
            checked += 1


class TestIncrementalCluster:
    def test_outlier_dropped(self):
        cfg = EstimatorConfig(min_cluster_mass=2)
        clusters = incremental_cluster([1.0, 1.01, 9.0], theta=0.5, cfg=cfg)
        assert len(clusters) == 1
        assert clusters[0].members == (1.0, 1.01)

    def test_identical_values_single_cluster(self):
        cfg = EstimatorConfig()
        clusters = incremental_cluster([5.0] * 10, theta=1.0, cfg=cfg)
        assert len(clusters) == 1
        assert clusters[0].center == 5.0
        assert clusters[0].lo == clusters[0].hi == 5.0

    def test_bimodal_two_clusters(self):
        rng = np.random.default_rng(2)
        values = [float(v) for v in rng.normal(0.0, 0.3, 50)] + [
            float(v) for v in rng.normal(10.0, 0.3, 50)
        ]
        rng.shuffle(values)
        clusters = incremental_cluster(values, theta=1.5, cfg=EstimatorConfig())
        assert len(clusters) == 2
        los = sorted(c.center for c in clusters)
        assert abs(los[0]) < 1.0 and abs(los[1] - 10.0) < 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        values = [float(v) for v in rng.uniform(0, 10, 60)]
        a = incremental_cluster(values, theta=1.2, cfg=EstimatorConfig())
        b = incremental_cluster(values, theta=1.2, cfg=EstimatorConfig())
        assert [(c.center, c.members) for c in a] == [(c.center, c.members) for c in b]

    def test_halving_theta_never_decreases_cluster_count(self):
        rng = np.random.default_rng(4)
        for seed in range(6):
            r = np.random.default_rng(seed)
            values = [float(v) for v in r.normal(0.0, 0.3, 50)] + [
                float(v) for v in r.normal(10.0, 0.3, 50)
            ]
            wide = incremental_cluster(values, theta=3.0, cfg=EstimatorConfig())
            narrow = incremental_cluster(values, theta=1.5, cfg=EstimatorConfig())
            assert len(narrow) >= len(wide)


def planted_dataset(seed=0, length=400, lo=4.0, hi=6.0, d=2):
    """v_c in [lo, hi] makes y land in its high band d steps later."""
    rng = np.random.default_rng(seed)
    v_c = [round(float(v), 4) for v in rng.uniform(0, 10, length)]
    y = [round(float(v), 4) for v in rng.uniform(1, 3, length)]
    for t in range(length - d):
        if lo <= v_c[t] <= hi:
            y[t + d] = round(float(rng.uniform(5, 7)), 4)
    return dataset_from_columns({"v_c": v_c, "y": y})


class TestEstimateCause:
    def test_returns_none_when_nothing_elevates(self):
        rng = np.random.default_rng(8)
        ds = dataset_from_columns(
            {
                "a": [round(float(v), 4) for v in rng.uniform(0, 10, 200)],
                "y": [round(float(v), 4) for v in rng.uniform(0, 1, 200)],
            }
        )
        # Effect fires everywhere, so no range on `a` can elevate it.
        got = estimate_cause(ds, "a", value_in("y", 0.0, 1.0), Window(1, 1), EstimatorConfig())
        assert got is None

    def test_recovers_planted_range(self):
        ds = planted_dataset(seed=0)
        est = estimate_cause(ds, "v_c", value_in("y", 5.0, 7.0), Window(2, 2), EstimatorConfig())
        assert est is not None
        rng_c = est.event.constraint
        from support import jaccard_interval

        assert jaccard_interval((rng_c.lo, rng_c.hi), (4.0, 6.0)) >= 0.5
        assert est.elevation > 0

    def test_rejects_discrete_variable(self):
        ds = dataset_from_columns({"d": ["a", "b", "a"], "y": [0.5, 1.5, 2.5]})
        with pytest.raises(ValidationError, match="continuous"):
            estimate_cause(ds, "d", value_in("y", 1.0, 3.0), Window(1, 1), EstimatorConfig())

    def test_returned_cause_passes_retest(self):
        for seed in range(5):
            ds = planted_dataset(seed=seed)
            spec = value_in("y", 5.0, 7.0)
            est = estimate_cause(ds, "v_c", spec, Window(2, 2), EstimatorConfig())
            assert est is not None
            res = inf.is_potential_cause(ds, est.event, spec, Window(2, 2))
            assert res.verdict is True

    def test_support_meets_floor(self):
        ds = planted_dataset(seed=1)
        cfg = EstimatorConfig(min_cluster_mass=5)
        est = estimate_cause(ds, "v_c", value_in("y", 5.0, 7.0), Window(2, 2), cfg)
        assert est is not None
        assert est.cluster_support >= 5

    def test_two_elevating_clusters_merge_into_one_event(self):
        # Two elevation-passing value bands close enough for their clusters to
        # touch must come back as a single unioned event.
        rng = np.random.default_rng(21)
        length = 500
        band = []
        for _ in range(length):
            roll = rng.random()
            if roll < 0.25:
                band.append(round(float(rng.uniform(4.0, 4.9)), 4))
            elif roll < 0.5:
                band.append(round(float(rng.uniform(5.1, 6.0)), 4))
            else:
                band.append(round(float(rng.uniform(0.0, 10.0)), 4))
        y = [round(float(v), 4) for v in rng.uniform(1, 3, length)]
        for t in range(length - 1):
            if 4.0 <= band[t] <= 6.0:
                y[t + 1] = round(float(rng.uniform(5, 7)), 4)
        ds = dataset_from_columns({"band": band, "y": y})
        est = estimate_cause(ds, "band", value_in("y", 5.0, 7.0), Window(1, 1), EstimatorConfig())
        assert est is not None
        constraint = est.event.constraint
        assert constraint.lo < 4.95 and constraint.hi > 5.05  # spans both bands


class TestEstimateAll:
    def test_only_effect_variable_yields_empty(self):
        ds = dataset_from_columns({"y": [0.5, 1.5, 2.5, 3.5]})
        res = estimate_all(ds, value_in("y", 2.0, 4.0), Window(1, 1))
        assert res.causes == ()

    def test_exclusion_respected(self):
        ds = planted_dataset(seed=3)
        spec = value_in("y", 5.0, 7.0)
        res = estimate_all(ds, spec, Window(2, 2), exclude={"v_c"})
        assert all(c.event.variable != "v_c" for c in res.causes)

    def test_discrete_levels_unioned(self):
        rng = np.random.default_rng(12)
        length = 300
        lev = [str(x) for x in rng.choice(["a", "b", "c"], size=length)]
        y = [round(float(v), 4) for v in rng.uniform(1, 3, length)]
        for t in range(length - 1):
            if lev[t] in ("a", "b"):
                y[t + 1] = round(float(rng.uniform(5, 7)), 4)
        ds = dataset_from_columns({"lev": lev, "y": y})
        res = estimate_all(ds, value_in("y", 5.0, 7.0), Window(1, 1))
        found = {c.event.variable: c for c in res.causes}
        assert "lev" in found
        assert found["lev"].event.constraint.levels == frozenset({"a", "b"})

    def test_estimates_feed_report(self):
        ds = planted_dataset(seed=7)
        spec = value_in("y", 5.0, 7.0)
        res = estimate_all(ds, spec, Window(2, 2))
        assert res.causes
        rep = inf.significance_report(
            ds, [c.event for c in res.causes], spec, Window(2, 2), epsilon=0.0
        )
        assert rep.causes
