import math

import pytest
from hypothesis import given, strategies as st

from abcselect.ci_estimator import (
    BoundInputs,
    clamp_to_cached,
    estimate_ci,
    lower_bound,
    upper_bound,
)
from abcselect.core import (
    ConfidenceInterval,
    ConfigurationState,
    ProbeOutcome,
    clamp_interval,
)

# Frozen reference values, computed with a 40-digit evaluation of the bound
# formulas (see test_acceptance for the live high-precision comparison).
U_REFERENCE = 0.9066169763124238
L_REFERENCE = 0.7660692978779244


def make_inputs(s_tr=1000, s_te=2000, a_tr=0.85, a_te=0.80, n=5, delta=0.5,
                full_test=100_000):
    outcome = ProbeOutcome(s_tr, s_te, a_tr, a_te, 1.0)
    return BoundInputs(outcome, n, delta, full_test)


class TestUpperBound:
    def test_worked_value(self):
        assert upper_bound(make_inputs()) == pytest.approx(U_REFERENCE, abs=1e-15)

    def test_vanishing_variation_terms(self):
        inp = make_inputs(s_tr=10**12, full_test=10**12)
        assert upper_bound(inp) == pytest.approx(0.85, abs=1e-5)

    def test_clamps_above_one(self):
        inp = make_inputs(s_tr=50, s_te=50, a_tr=0.99, full_test=100)
        raw = upper_bound(inp)
        assert raw > 1.0
        assert clamp_interval(0.0, raw).upper == 1.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_inputs(n=0)
        with pytest.raises(ValueError):
            make_inputs(delta=1.0)
        with pytest.raises(ValueError):
            make_inputs(full_test=100)  # smaller than the test sample


class TestLowerBound:
    def test_worked_value(self):
        assert lower_bound(make_inputs()) == pytest.approx(L_REFERENCE, abs=1e-15)

    def test_clamps_below_zero(self):
        inp = make_inputs(s_te=10, a_te=0.02, full_test=100_000)
        raw = lower_bound(inp)
        assert raw < 0.0
        assert clamp_interval(raw, 1.0).lower == 0.0

    def test_vanishing_variation_term(self):
        inp = make_inputs(s_te=10**12, full_test=10**12)
        assert lower_bound(inp) == pytest.approx(0.80, abs=1e-5)

    def test_never_exceeds_test_accuracy(self):
        assert lower_bound(make_inputs()) <= 0.80


valid_inputs = st.builds(
    make_inputs,
    s_tr=st.integers(1, 10**9),
    s_te=st.integers(1, 10**5),  # headroom for the x100 growth cases below
    a_tr=st.floats(0, 1),
    a_te=st.floats(0, 1),
    n=st.integers(1, 1000),
    delta=st.floats(1e-6, 0.999),
    full_test=st.just(10**7),
)


class TestMonotonicity:
    @given(valid_inputs, st.integers(2, 100))
    def test_upper_nonincreasing_in_train_size(self, inp, factor):
        bigger = make_inputs(
            s_tr=inp.outcome.train_sample_size * factor,
            s_te=inp.outcome.test_sample_size,
            a_tr=inp.outcome.train_accuracy,
            a_te=inp.outcome.test_accuracy,
            n=inp.n_configs, delta=inp.delta, full_test=inp.full_test_size,
        )
        assert upper_bound(bigger) <= upper_bound(inp)

    @given(valid_inputs, st.integers(2, 100))
    def test_upper_nondecreasing_in_n(self, inp, factor):
        more = make_inputs(
            s_tr=inp.outcome.train_sample_size,
            s_te=inp.outcome.test_sample_size,
            a_tr=inp.outcome.train_accuracy,
            a_te=inp.outcome.test_accuracy,
            n=inp.n_configs * factor, delta=inp.delta,
            full_test=inp.full_test_size,
        )
        assert upper_bound(more) >= upper_bound(inp)

    @given(valid_inputs, st.integers(2, 100))
    def test_lower_nondecreasing_in_test_size(self, inp, factor):
        bigger = make_inputs(
            s_tr=inp.outcome.train_sample_size,
            s_te=inp.outcome.test_sample_size * factor,
            a_tr=inp.outcome.train_accuracy,
            a_te=inp.outcome.test_accuracy,
            n=inp.n_configs, delta=inp.delta, full_test=inp.full_test_size,
        )
        assert lower_bound(bigger) >= lower_bound(inp)

    @given(valid_inputs, st.floats(0.0, 0.2))
    def test_upper_nondecreasing_in_train_accuracy(self, inp, bump):
        higher = make_inputs(
            s_tr=inp.outcome.train_sample_size,
            s_te=inp.outcome.test_sample_size,
            a_tr=min(1.0, inp.outcome.train_accuracy + bump),
            a_te=inp.outcome.test_accuracy,
            n=inp.n_configs, delta=inp.delta, full_test=inp.full_test_size,
        )
        assert upper_bound(higher) >= upper_bound(inp)


class TestSnapshotClamp:
    def test_lower_clamped_into_cache(self):
        nested, disjoint = clamp_to_cached(
            ConfidenceInterval(0.70, 0.90), ConfidenceInterval(0.72, 0.95)
        )
        assert nested == ConfidenceInterval(0.72, 0.90)
        assert not disjoint

    def test_already_nested_unchanged(self):
        nested, disjoint = clamp_to_cached(
            ConfidenceInterval(0.75, 0.90), ConfidenceInterval(0.72, 0.95)
        )
        assert nested == ConfidenceInterval(0.75, 0.90)
        assert not disjoint

    def test_fresh_cache_is_vacuous(self):
        raw = ConfidenceInterval(0.3, 0.6)
        nested, disjoint = clamp_to_cached(raw, ConfidenceInterval(0.0, 1.0))
        assert nested == raw and not disjoint

    def test_disjoint_collapses_to_nearest_endpoint(self):
        below, flag = clamp_to_cached(
            ConfidenceInterval(0.1, 0.2), ConfidenceInterval(0.5, 0.9)
        )
        assert flag and below == ConfidenceInterval(0.5, 0.5)
        above, flag = clamp_to_cached(
            ConfidenceInterval(0.95, 0.99), ConfidenceInterval(0.5, 0.9)
        )
        assert flag and above == ConfidenceInterval(0.9, 0.9)

    @given(
        st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)
    )
    def test_result_always_inside_cache(self, a, b, c, d):
        raw = ConfidenceInterval(min(a, b), max(a, b))
        cached = ConfidenceInterval(min(c, d), max(c, d))
        nested, _ = clamp_to_cached(raw, cached)
        assert nested.is_subset_of(cached)


class TestEstimateCI:
    def test_estimate_nested_in_cache(self):
        cfg = ConfigurationState(id=1, label="x", current_sample_size=1000)
        cfg.cached_ci = ConfidenceInterval(0.72, 0.95)
        ci = estimate_ci(cfg, make_inputs())
        assert ci.is_subset_of(cfg.cached_ci)
        # lower bound 0.766 beats the cache floor; upper 0.907 under the cap
        assert ci.lower == pytest.approx(L_REFERENCE, abs=1e-15)
        assert ci.upper == pytest.approx(U_REFERENCE, abs=1e-15)

    def test_fresh_configuration_gets_raw_interval(self):
        cfg = ConfigurationState(id=1, label="x", current_sample_size=1000)
        ci = estimate_ci(cfg, make_inputs())
        assert ci.lower == pytest.approx(L_REFERENCE, abs=1e-15)
        assert ci.upper == pytest.approx(U_REFERENCE, abs=1e-15)
