import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from predcache import (
    ConfigError,
    NoiseSpec,
    SlackPolicy,
    WorkloadSpec,
    check_bounds,
    count_inversions_fast,
    count_inversions_naive,
    ell1_loss,
    harmonic,
    next_arrivals,
    perturb_predictions,
    summarize_errors,
    synthesize,
)


def test_harmonic():
    assert harmonic(1) == 1.0
    assert math.isclose(harmonic(4), 1 + 0.5 + 1 / 3 + 0.25)


def test_ell1_examples():
    assert ell1_loss([3, 4, 4], [3.0, 4.0, 4.0]) == 0.0
    assert ell1_loss([3, 4, 4], [5.0, 4.0, 2.0]) == 4.0
    assert ell1_loss([2], [0.0]) == 2.0
    with pytest.raises(ValueError):
        ell1_loss([1, 2], [1.0])


def test_inversion_examples():
    # sigma = (a,b,a,b): only the first pair is inverted
    y, h = [3, 4, 5, 5], [4.0, 3.0, 5.0, 5.0]
    assert count_inversions_naive(y, h) == 1
    y2 = [3, 4, 5, 5]
    assert count_inversions_naive(y2, [float(v) for v in y2]) == 0
    # sigma = (a,a,a): equal predictions at increasing arrivals invert once
    y3, h3 = [2, 3, 4], [3.0, 3.0, 4.0]
    assert count_inversions_naive(y3, h3) == 1
    assert ell1_loss(y3, h3) >= count_inversions_naive(y3, h3) / 2


def test_fast_matches_naive_on_examples():
    cases = [
        ([3, 4, 5, 5], [4.0, 3.0, 5.0, 5.0]),
        ([3, 4, 5, 5], [3.0, 4.0, 5.0, 5.0]),
        ([2, 3, 4], [3.0, 3.0, 4.0]),
        ([5, 5, 5], [1.0, 2.0, 3.0]),  # tied arrivals contribute nothing
        ([1], [9.0]),
    ]
    for y, h in cases:
        assert count_inversions_fast(y, h) == count_inversions_naive(y, h)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_fast_matches_naive_on_random_instances(data):
    n = data.draw(st.integers(1, 60))
    y = data.draw(st.lists(st.integers(1, 20), min_size=n, max_size=n))
    h = data.draw(
        st.lists(
            st.floats(0, 30, allow_nan=False, allow_infinity=False), min_size=n, max_size=n
        )
    )
    assert count_inversions_fast(y, h) == count_inversions_naive(y, h)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.sampled_from("abcd"), min_size=1, max_size=30),
    st.integers(0, 10_000),
    st.sampled_from(
        [
            NoiseSpec("perfect"),
            NoiseSpec("additive_uniform", width=4.0),
            NoiseSpec("additive_gaussian", sigma=3.0),
            NoiseSpec("lognormal_scale", sigma=0.6),
            NoiseSpec("constant_shift", shift=2.5),
            NoiseSpec("random_replace", prob=0.4, limit=60.0),
        ]
    ),
)
def test_loss_dominates_half_the_inversions(requests, seed, noise):
    y = next_arrivals(requests)
    h = perturb_predictions(y, noise, seed)
    assert ell1_loss(y, h) >= count_inversions_naive(y, h) / 2


def test_zero_loss_means_zero_inversions():
    requests = [f"p{i % 7}" for i in range(50)]
    y = next_arrivals(requests)
    h = perturb_predictions(y, NoiseSpec("perfect"), seed=0)
    assert ell1_loss(y, h) == 0.0
    assert count_inversions_fast(y, h) == 0


def test_summarize_errors():
    trace = synthesize(
        WorkloadSpec("uniform", universe=10, length=100),
        NoiseSpec("additive_uniform", width=2.0),
        seed=1,
    )
    summary = summarize_errors(trace, opt_cost=10)
    assert summary.eta > 0
    assert summary.eps_ratio == summary.eta / 10
    assert not summary.opt_is_zero

    zero = summarize_errors(trace, opt_cost=0)
    assert zero.eps_ratio is None and zero.opt_is_zero


# ---------------------------------------------------------------- check_bounds


def test_prop1_pass_and_fail():
    ok = check_bounds({"blind_oracle": 10}, opt=10, eta=0.0, inversions=0, k=4)
    assert ok.get("thm1_prop1").passed

    bad = check_bounds({"blind_oracle": 11}, opt=10, eta=0.0, inversions=0, k=4)
    record = bad.get("thm1_prop2")
    assert record.passed  # 11 <= 2*10 + 0 + 4
    assert not bad.get("thm1_prop1").passed
    assert bad.get("thm1_prop1").slack_used == 0.0


def test_lemma1_failure_signals_metrics_bug():
    report = check_bounds({}, opt=5, eta=3.0, inversions=7, k=4)
    record = report.get("lemma1")
    assert record is not None and not record.passed
    assert (record.lhs, record.rhs) == (3.5, 3.0)


def test_prop2_not_applicable_at_k1():
    report = check_bounds({"blind_oracle": 3}, opt=2, eta=1.0, inversions=0, k=1)
    record = report.get("thm1_prop2")
    assert record.vacuous and record.passed and "k >= 2" in record.note


def test_vacuous_pass_when_opt_is_zero():
    report = check_bounds({"blind_oracle": 0, "lru": 0}, opt=0, eta=5.0, inversions=1, k=4)
    assert report.get("thm1_prop1").vacuous
    assert report.get("lru_k").vacuous
    assert report.all_passed


def test_ftl_and_mw_bounds():
    report = check_bounds(
        {"blind_oracle": 30, "lru": 50, "marker": 40, "ftl": 65, "mw": 45},
        opt=20,
        eta=10.0,
        inversions=4,
        k=4,
        epsilon=0.1,
    )
    ftl = report.get("ftl_thm2")
    assert (ftl.lhs, ftl.rhs) == (65.0, 2 * 30 + 8.0)
    assert ftl.passed
    mw = report.get("mw_thm3")
    assert mw.rhs == pytest.approx(1.1 * 30 + 8 * 4 / 0.1)
    assert mw.passed
    assert report.get("cor1_det") is not None
    assert report.get("cor2_rand") is not None


def test_missing_expert_costs_raise():
    with pytest.raises(ConfigError):
        check_bounds({"ftl": 10}, opt=5, eta=0.0, inversions=0, k=2)
    with pytest.raises(ConfigError):
        check_bounds({"mw": 10, "blind_oracle": 5}, opt=5, eta=0.0, inversions=0, k=2, epsilon=0.1)
    with pytest.raises(ConfigError):
        check_bounds({"mw": 10, "blind_oracle": 5, "marker": 6}, opt=5, eta=0.0, inversions=0, k=2)


def test_slack_policy_is_visible_in_records():
    report = check_bounds(
        {"lru": 10},
        opt=2,
        eta=0.0,
        inversions=0,
        k=3,
        slack=SlackPolicy(lru_k=2.0),
    )
    record = report.get("lru_k")
    assert record.slack_used == 6.0
    assert record.rhs == 3 * 2 + 6.0


def test_csv_block_shape():
    report = check_bounds({"lru": 4}, opt=2, eta=1.0, inversions=1, k=2)
    lines = report.csv_block().strip().splitlines()
    assert lines[0] == "bound_id,lhs,rhs,slack_used,pass"
    assert len(lines) == 1 + len(report.records)


def test_random_cross_check_fast_vs_naive_larger():
    rng = random.Random(77)
    for _ in range(50):
        n = rng.randint(1, 200)
        y = [rng.randint(1, n + 1) for _ in range(n)]
        h = [rng.uniform(0, n + 2) for _ in range(n)]
        assert count_inversions_fast(y, h) == count_inversions_naive(y, h)
