import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import tenseg.ccid as ccid
from tenseg.ccid import (CcidConfig, PeriodogramPanel, aggregate, build_panel, cusum_stats, detect,
                         information_criterion, isolate_detect, model_select, penalty,
                         preaverage_detect, prune, refine_locations, scaled_cusum, solution_path,
                         subsample_detect, threshold)


def panel_of(rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return PeriodogramPanel(values=rows, pairs=[(i, i) for i in range(rows.shape[0])])


def step_panel(levels, bounds, d=3, noise=True, seed=0):
    """Chi-square(1) panel whose mean switches between ``levels`` at ``bounds``."""
    rng = np.random.default_rng(seed)
    n = bounds[-1]
    mean = np.empty(n)
    for lev, lo, hi in zip(levels, [0, *bounds[:-1]], bounds):
        mean[lo:hi] = lev
    z = rng.standard_normal((d, n)) ** 2 if noise else np.ones((d, n))
    return panel_of(mean * z)


def variance_step_series(T=200, cp=100, p=3, ratio=3.0, seed=0, ar=0.0):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal((p, T))
    if ar:
        for t in range(1, T):
            e[:, t] = ar * e[:, t - 1] + math.sqrt(1 - ar * ar) * e[:, t]
    e[:, cp:] *= ratio
    return e


# ---------------------------------------------------------------- panel

def test_panel_constant_series_is_zero():
    p = build_panel(np.full((3, 10), 4.2))
    assert p.values.shape == (6, 9)
    assert np.all(p.values == 0.0)


def test_panel_hand_example():
    p = build_panel(np.array([[0.0, 2.0]]))
    np.testing.assert_allclose(p.values, [[2.0]])


def test_panel_two_series():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 7))
    p = build_panel(x)
    assert p.d == 3 and p.length == 6
    assert p.pairs == [(0, 0), (1, 1), (0, 1)]
    w = (x[:, :-1] - x[:, 1:]) / math.sqrt(2)
    np.testing.assert_allclose(p.values[2], ((w[0] + w[1]) / math.sqrt(2)) ** 2)
    assert np.all(p.values >= 0)


def test_panel_errors():
    with pytest.raises(ValueError):
        build_panel(np.zeros((2, 1)))
    with pytest.raises(ValueError):
        build_panel(np.array([[0.0, np.nan, 1.0]]))


# ---------------------------------------------------------------- CUSUM

def test_cusum_hand_example():
    assert scaled_cusum([1, 1, 4, 4], 1, 2, 4) == pytest.approx(1.2, rel=1e-15)


def test_cusum_constant_and_zero_rows():
    for s, b, e in [(1, 1, 5), (2, 3, 6), (1, 5, 6)]:
        assert scaled_cusum(np.full(6, 3.0), s, b, e) == 0.0
        assert scaled_cusum(np.zeros(6), s, b, e) == 0.0


def test_cusum_index_errors():
    with pytest.raises(ValueError):
        scaled_cusum([1, 2, 3], 2, 3, 3)
    with pytest.raises(ValueError):
        scaled_cusum([1, 2, 3], 0, 1, 3)


positive_rows = hnp.arrays(np.float64, st.integers(2, 30),
                           elements=st.floats(1e-3, 1e3, allow_nan=False))


@settings(max_examples=80, deadline=None)
@given(positive_rows, st.floats(1e-3, 1e3), st.data())
def test_cusum_scale_invariance(y, c, data):
    n = y.size
    s = data.draw(st.integers(1, n - 1))
    e = data.draw(st.integers(s + 1, n))
    b = data.draw(st.integers(s, e - 1))
    assert scaled_cusum(c * y, s, b, e) == pytest.approx(scaled_cusum(y, s, b, e), rel=1e-12, abs=1e-12)


# prefix-sum differences resolve values only relative to the running total,
# so entries are exact zeros or within a few orders of magnitude of each other
panel_entries = st.one_of(st.just(0.0), st.floats(1e-3, 100))


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(2, 25)),
                  elements=panel_entries), st.data())
def test_vectorized_cusum_matches_scalar(rows, data):
    n = rows.shape[1]
    s = data.draw(st.integers(1, n - 1))
    e = data.draw(st.integers(s + 1, n))
    cs = panel_of(rows).cumsum()
    vec = cusum_stats(cs, s, e)
    for k in range(rows.shape[0]):
        for j, b in enumerate(range(s, e)):
            assert vec[k, j] == pytest.approx(scaled_cusum(rows[k], s, b, e), rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- aggregation and threshold

def test_aggregate_examples():
    assert aggregate(np.zeros((5, 1)), "l2")[0] == 0.0
    stats = np.array([[3.0], [0.0], [0.0], [0.0]])
    assert aggregate(stats, "l2")[0] == pytest.approx(1.5)
    assert aggregate(stats, "linf")[0] == 3.0
    with pytest.raises(ValueError):
        aggregate(stats, "l1")


@settings(max_examples=80, deadline=None)
@given(hnp.arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 1e6)))
def test_mean_dominance(x):
    col = x[:, None]
    mean = x.mean()
    l2, linf = aggregate(col, "l2")[0], aggregate(col, "linf")[0]
    tol = 1e-12 * max(1.0, linf)
    assert linf + tol >= l2 >= mean - tol


def test_threshold_examples():
    assert threshold(math.e, 1, 1.0) == pytest.approx(1.0)
    assert threshold(200, 10, 1.0) == pytest.approx(2.4233, abs=5e-4)
    assert threshold(200, 10, 2.0) == pytest.approx(2 * threshold(200, 10, 1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        CcidConfig(lambda_t=0)
    with pytest.raises(ValueError):
        CcidConfig(rho_sub=1.0)
    with pytest.raises(ValueError):
        CcidConfig(const=-1.0)
    with pytest.raises(ValueError):
        CcidConfig(norm="l1")


# ---------------------------------------------------------------- Isolate-Detect

def test_zero_panel_has_no_detections():
    res = isolate_detect(panel_of(np.zeros((3, 50))), CcidConfig(stop="threshold"))
    assert res.change_points == []


def test_clean_step_single_row():
    # the nominal l-infinity constant; the calibrated default targets noisy
    # panels with up to 210 rows and is too strict for this one-row example
    y = np.r_[np.ones(100), np.full(100, 25.0)]
    cfg = CcidConfig(norm="linf", stop="threshold", const=2.25)
    res = isolate_detect(panel_of(y), cfg)
    assert len(res.change_points) == 1
    assert abs(res.change_points[0] - 100) <= 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(20, 180), st.sampled_from(["l2", "linf"]))
def test_full_interval_argmax_matches_brute_force(seed, cp, norm):
    p = step_panel([1.0, 3.0], [cp, 200], d=4, seed=seed)
    n = p.length
    agg = aggregate(cusum_stats(p.cumsum(), 1, n), norm)
    brute = [aggregate(np.array([[scaled_cusum(r, 1, b, n)] for r in p.values]), norm)[0]
             for b in range(1, n)]
    assert int(np.argmax(agg)) == int(np.argmax(brute))


def test_isolation_on_constructed_panel(monkeypatch):
    truth = [40, 55, 90, 130]
    p = step_panel([1, 6, 1, 6, 1], truth + [170], d=2, noise=False)
    cfg = CcidConfig(norm="l2", stop="threshold", const=1.0)
    zeta = threshold(p.length, p.d, cfg.threshold_const)
    seen = []
    real = ccid.cusum_stats

    def spy(cs, s, e):
        out = real(cs, s, e)
        seen.append((s, e, out))
        return out

    monkeypatch.setattr(ccid, "cusum_stats", spy)
    res = isolate_detect(p, cfg)
    # candidates keep lambda_t points clear of the interval end, so a clean
    # step can be flagged a point early before the interval grows past it
    assert len(res.change_points) == len(truth)
    assert all(abs(a - b) <= cfg.lambda_t for a, b in zip(res.change_points, truth))
    hits = [(s, e) for s, e, out in seen if aggregate(out, "l2").max() > zeta]
    assert len(hits) == len(truth)
    for s, e in hits:
        assert sum(s <= b < e for b in truth) == 1


def test_short_series_rejected():
    with pytest.raises(ValueError):
        isolate_detect(panel_of(np.ones((1, 5))), CcidConfig(lambda_t=3))


# ---------------------------------------------------------------- solution path and criterion

def test_single_candidate_path():
    p = step_panel([1, 5], [50, 100])
    path, scores = solution_path(p, [50])
    assert path == [50] and len(scores) == 1 and scores[0] > 0


def test_flat_candidate_removed_first():
    p = step_panel([1, 20], [50, 100], noise=False)
    path, _ = solution_path(p, [25, 50])
    assert path == [50, 25]


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(1, 118), min_size=0, max_size=12), st.sampled_from(["l2", "linf"]))
def test_path_is_permutation(cands, norm):
    p = step_panel([1, 4], [60, 120], seed=len(cands))
    path, scores = solution_path(p, sorted(cands), norm)
    assert sorted(path) == sorted(cands)
    assert len(scores) == len(path)


def test_path_ranks_true_changes_first():
    truth = list(range(60, 601, 60))
    levels = [1.0 if i % 2 == 0 else 4.0 for i in range(11)]
    p = step_panel(levels, truth + [660], d=6, seed=3)
    spurious = [30, 85, 200, 333, 470, 515, 640]
    for norm in ("l2", "linf"):
        path, _ = solution_path(p, sorted(truth + spurious), norm)
        assert sorted(path[:10]) == truth


def test_criterion_on_empty_model():
    p = step_panel([1, 3], [40, 80], d=3)
    expected = sum(p.length * (math.log(r.mean()) + 1) for r in p.values)
    assert information_criterion(p, [], 1.0) == pytest.approx(expected, rel=1e-13)


def test_criterion_skips_zero_segments():
    p = panel_of([[0.0] * 10 + [2.0] * 10])
    # the straddling zero scores log(1) + 0 against the midpoint mean 1
    assert information_criterion(p, [10], 0.0) == pytest.approx(10 * (math.log(2.0) + 1))


def test_criterion_scores_straddling_value_against_midpoint():
    p = panel_of([[1.0, 1.0, 5.0, 3.0, 3.0]])
    expected = 2 * (math.log(1.0) + 1) + 2 * (math.log(3.0) + 1) + math.log(2.0) + 5.0 / 2.0
    assert information_criterion(p, [3], 0.0) == pytest.approx(expected, rel=1e-13)


def test_model_select_keeps_big_jump_only():
    p = step_panel([1, 50], [60, 120], d=3, seed=1)
    path, scores = solution_path(p, [30, 60])
    res = model_select(p, path, scores, alpha=0.35)
    assert res.change_points == [60]
    assert set(res.change_points) <= set(res.candidates)


def test_penalty_shape():
    assert penalty(100, 1, 1.0, 0.8) == pytest.approx(math.log(100) ** 2)
    assert penalty(100, 32, 2.0, 0.8) == pytest.approx(2 * 32 ** 0.8 * math.log(100) ** 2)


# ---------------------------------------------------------------- relocation and pruning

def test_refinement_moves_estimate_to_change():
    p = step_panel([1, 8], [70, 140], d=5, seed=2)
    assert abs(refine_locations(p, [62])[0] - 70) <= 1


def test_prune_returns_subset_without_refinement():
    p = step_panel([1, 8], [70, 140], d=5, seed=4)
    kept = prune(p, [20, 70, 100], CcidConfig(refine=False))
    assert set(kept) <= {20, 70, 100}
    assert 70 in kept


# ---------------------------------------------------------------- detect

def test_no_change_series_mostly_silent():
    silent = [detect(np.random.default_rng(s).standard_normal((5, 200))).n_cpts == 0
              for s in range(100)]
    assert np.mean(silent) >= 0.95


def test_detect_single_variance_change():
    hits = 0
    for seed in range(20):
        res = detect(variance_step_series(seed=seed))
        hits += res.n_cpts == 1 and abs(res.change_points[0] - 100) <= 3
    assert hits >= 19


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["threshold", "ic"]), st.sampled_from(["l2", "linf"]))
def test_detect_result_invariants(seed, stop, norm):
    x = variance_step_series(T=160, cp=70, seed=seed, ratio=2.0)
    cfg = CcidConfig(stop=stop, norm=norm)
    res = detect(x, cfg)
    cps = res.change_points
    assert cps == sorted(set(cps))
    assert all(b - a >= cfg.min_spacing for a, b in zip(cps, cps[1:]))
    assert all(1 <= c < res.T for c in cps)
    if stop == "ic":
        assert sorted(res.solution_path) == res.candidates
        assert set(res.selected) <= set(res.solution_path)
    again = detect(x, cfg)
    assert again.change_points == cps and again.solution_path == res.solution_path


def test_threshold_rule_detects_change():
    res = detect(variance_step_series(seed=5, ratio=4.0), CcidConfig(stop="threshold"))
    assert any(abs(c - 100) <= 3 for c in res.change_points)


# ---------------------------------------------------------------- subsampling and pre-averaging

def test_subsample_no_change_is_empty():
    empty = [subsample_detect(np.random.default_rng(s).standard_normal((4, 300)), step=2).n_cpts == 0
             for s in range(10)]
    assert np.mean(empty) >= 0.9


def test_subsample_ar_noise_jump():
    near = 0
    for seed in range(10):
        x = variance_step_series(T=300, cp=150, ratio=4.0, seed=seed, ar=0.7)
        res = subsample_detect(x, step=2, quorum=2)
        near += res.n_cpts == 1 and abs(res.change_points[0] - 150) <= 4
    assert near >= 7


def test_subsample_quorum_one_is_union():
    x = variance_step_series(T=300, cp=150, ratio=3.0, seed=1)
    cfg = CcidConfig()
    union = subsample_detect(x, cfg, step=2, quorum=1)
    strict = subsample_detect(x, cfg, step=2, quorum=2)
    assert len(union.change_points) >= len(strict.change_points)


def test_subsample_errors():
    x = np.ones((2, 100))
    with pytest.raises(ValueError):
        subsample_detect(x, step=2, quorum=3)
    with pytest.raises(ValueError):
        subsample_detect(x, step=1)


def test_preaverage_window_one_is_detect():
    x = variance_step_series(seed=3)
    assert preaverage_detect(x, window=1).change_points == detect(x).change_points


def test_preaverage_constant_and_jump():
    assert preaverage_detect(np.full((3, 90), 2.0), window=3).change_points == []
    res = preaverage_detect(variance_step_series(T=300, cp=150, ratio=4.0, seed=2), window=3)
    assert res.n_cpts == 1 and abs(res.change_points[0] - 150) <= 3
