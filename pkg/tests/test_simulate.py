import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tenseg.simulate import (PrecisionSpec, ScenarioSpec, ar1_precision, build_precision, er_precision,
                             generate, kronecker_sum, scenario_spec, star_block_covariance,
                             star_block_precision, sylvester_solve)
from tenseg.tensor import mode_product, vec


def sylvester_residual(psis, x, rhs):
    lhs = sum(mode_product(x, p, k) for k, p in enumerate(psis))
    return np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)


def random_spd(n, rng):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


# ---------------------------------------------------------------- precision matrices

def test_ar1_examples():
    np.testing.assert_array_equal(ar1_precision(5, 0.0), np.eye(5))
    np.testing.assert_allclose(ar1_precision(2, 0.5), 4 / 3 * np.array([[1, -0.5], [-0.5, 1]]), atol=1e-15)
    a = 0.8 ** np.abs(np.subtract.outer(np.arange(20), np.arange(20)))
    np.testing.assert_allclose(ar1_precision(20, 0.8) @ a, np.eye(20), atol=1e-10)
    with pytest.raises(ValueError):
        ar1_precision(3, 1.0)


def test_star_block_examples():
    np.testing.assert_allclose(star_block_precision(6, 0.5, 6), np.eye(6), atol=1e-15)
    a = np.array([[1, .5, .5], [.5, 1, .25], [.5, .25, 1]])
    np.testing.assert_allclose(star_block_covariance(3, 0.5, 1), a)
    np.testing.assert_allclose(star_block_precision(3, 0.5, 1) @ a, np.eye(3), atol=1e-10)
    with pytest.raises(ValueError):
        star_block_precision(3, 0.5, 4)


def test_star_block_is_block_diagonal():
    psi = star_block_precision(20, 0.8, 4)
    for lo in range(0, 20, 5):
        mask = np.ones((20, 20), dtype=bool)
        mask[lo:lo + 5, lo:lo + 5] = False
        assert np.abs(psi[lo:lo + 5][mask[lo:lo + 5]]).max() <= 1e-12


def test_star_block_remainder_joins_last_block():
    cov = star_block_covariance(7, 0.5, 2)
    # blocks are [0, 3) and [3, 7); node 3 is the hub of the second
    assert cov[3, 6] == 0.5 and cov[4, 6] == 0.25
    assert cov[0, 3] == 0.0 and cov[2, 3] == 0.0


def test_er_examples():
    np.testing.assert_array_equal(er_precision(5, 0, 0.7, 0.9), 0.25 * np.eye(5))
    # n=2 has a single pair; a near-degenerate weight interval pins gamma to 0.3
    psi = er_precision(2, 1, 0.3, 0.3 + 1e-14, rng=0)
    np.testing.assert_allclose(psi, [[0.55, -0.3], [-0.3, 0.55]], atol=1e-13)
    g = -er_precision(2, 1, 0.1, 0.5, rng=1)[0, 1]
    assert 0.1 <= g <= 0.5
    with pytest.raises(ValueError):
        er_precision(3, 4, 0.1, 0.2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["ar", "sb", "er"]))
def test_precisions_symmetric_positive_definite(seed, kind):
    rng = np.random.default_rng(seed)
    spec = PrecisionSpec(kind, 20, rho=float(rng.uniform(0.05, 0.95)), blocks=int(rng.integers(1, 21)))
    psi = build_precision(spec, np.random.default_rng(seed))
    assert np.abs(psi - psi.T).max() <= 1e-12 * max(1.0, np.abs(psi).max())
    assert np.linalg.eigvalsh(psi).min() > 0


# ---------------------------------------------------------------- Sylvester solver

def test_identity_precisions_divide_by_mode_count():
    rhs = np.random.default_rng(0).standard_normal((3, 4, 2))
    x = sylvester_solve([np.eye(3), np.eye(4), np.eye(2)], rhs)
    np.testing.assert_allclose(x, rhs / 3, rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(1, 6), min_size=1, max_size=3))
def test_solver_matches_dense_kronecker_sum(seed, shape):
    rng = np.random.default_rng(seed)
    psis = [random_spd(n, rng) for n in shape]
    rhs = rng.standard_normal(shape)
    x = sylvester_solve(psis, rhs)
    dense = np.linalg.solve(kronecker_sum(psis), vec(rhs))
    assert dense.size <= 216
    np.testing.assert_allclose(vec(x), dense, atol=1e-9)
    assert sylvester_residual(psis, x, rhs) < 1e-8


def test_small_kronecker_sum_oracle():
    rng = np.random.default_rng(1)
    p1, p2 = random_spd(3, rng), random_spd(3, rng)
    rhs = rng.standard_normal((3, 3))
    x = sylvester_solve([p1, p2], rhs)
    np.testing.assert_allclose(vec(x), np.linalg.solve(kronecker_sum([p1, p2]), vec(rhs)), atol=1e-9)


def test_solver_linearity_and_errors():
    rng = np.random.default_rng(2)
    psis = [ar1_precision(4, 0.3), ar1_precision(5, 0.6)]
    rhs = rng.standard_normal((4, 5))
    np.testing.assert_allclose(sylvester_solve(psis, 2.5 * rhs), 2.5 * sylvester_solve(psis, rhs), rtol=1e-12)
    with pytest.raises(ValueError):
        sylvester_solve(psis[:1], rhs)
    with pytest.raises(ValueError):
        sylvester_solve([np.eye(4), np.eye(4)], rhs)
    with pytest.raises(ValueError):
        sylvester_solve([np.zeros((4, 4)), np.zeros((5, 5))], rhs)


# ---------------------------------------------------------------- scenarios and generation

def test_scenario_shapes_and_truth():
    x, truth = generate(scenario_spec("CP0", "ar"), seed=0)
    assert x.shape == (20, 20, 20, 200) and truth == []
    spec = scenario_spec("CP4", "ar")
    assert spec.T == 300 and spec.change_points == (100, 150, 200, 250)
    assert [s.rho for s in spec.segments] == [0.2, 0.8, 0.2, 0.8, 0.2]
    small = scenario_spec("CP10", "ar", "small")
    assert {s.rho for s in small.segments} == {0.4, 0.6}


def test_scenario_errors():
    with pytest.raises(ValueError):
        scenario_spec("CP7")
    with pytest.raises(ValueError):
        scenario_spec("CP4", "sb", "small")
    with pytest.raises(ValueError):
        ScenarioSpec(T=10, change_points=(5,), segments=(PrecisionSpec("ar", 2),), spatial=(2, 2))
    with pytest.raises(ValueError):
        ScenarioSpec(T=10, change_points=(), segments=(PrecisionSpec("ar", 2),), spatial=(2, 2),
                     time_term="diag")


def small_spec(**kw):
    seg = (PrecisionSpec("ar", 4, rho=0.2), PrecisionSpec("ar", 4, rho=0.8))
    base = dict(T=30, change_points=(12,), segments=seg, spatial=(4, 4, 4))
    base.update(kw)
    return ScenarioSpec(**base)


def test_generate_determinism():
    spec = small_spec()
    a, _ = generate(spec, seed=5)
    b, _ = generate(spec, seed=5)
    c, truth = generate(spec, seed=6)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c) and truth == [12]


def test_slices_solve_segment_system():
    spec = small_spec()
    x, _ = generate(spec, seed=1)
    # recover the noise through the forward operator and check it is N(0, 1)-like
    for lo, hi, rho in [(0, 12, 0.2), (12, 30, 0.8)]:
        psis = [ar1_precision(4, rho)] * 3
        seg = x[..., lo:hi]
        noise = sum(mode_product(seg, p, k) for k, p in enumerate(psis))
        assert abs(noise.std() - 1) < 0.15
        np.testing.assert_allclose(sylvester_solve(psis, noise[..., 0]), seg[..., 0], atol=1e-10)


def test_time_term_identity_adds_one():
    spec_none, spec_id = small_spec(), small_spec(time_term="identity")
    x0, _ = generate(spec_none, seed=2)
    x1, _ = generate(spec_id, seed=2)
    psis = [ar1_precision(4, 0.2)] * 3
    noise = sum(mode_product(x0[..., 0], p, k) for k, p in enumerate(psis))
    expected = sylvester_solve(psis + [np.eye(1)], noise[..., None])[..., 0]
    np.testing.assert_allclose(x1[..., 0], expected, atol=1e-10)


def test_time_precision_override():
    spec = small_spec(time_precision=np.eye(30))
    x, _ = generate(spec, seed=3)
    y, _ = generate(small_spec(time_term="identity"), seed=3)
    np.testing.assert_allclose(x, y, atol=1e-12)
    with pytest.raises(ValueError):
        small_spec(time_precision=np.eye(5))


def test_ar1_noise_has_unit_variance_and_memory():
    spec = ScenarioSpec(T=4000, change_points=(), segments=(PrecisionSpec("ar", 2, rho=0.0),),
                        spatial=(2, 2), noise="ar1", alpha=0.7)
    x, _ = generate(spec, seed=0)
    z = x * 2  # two identity precisions halve the noise
    assert abs(z.var() - 1) < 0.1
    lag1 = np.mean([np.corrcoef(z[i, j, :-1], z[i, j, 1:])[0, 1] for i in range(2) for j in range(2)])
    assert abs(lag1 - 0.7) < 0.05


def test_segment_stationarity():
    spec = ScenarioSpec(T=4000, change_points=(), segments=(PrecisionSpec("ar", 3, rho=0.6),),
                        spatial=(3, 3))
    x, _ = generate(spec, seed=4)
    v = x.reshape(9, -1)
    gaps = []
    for n in (250, 2000):
        first, second = v[:, :n], v[:, 2000:2000 + n]
        gaps.append(np.linalg.norm(np.cov(first) - np.cov(second)))
    assert gaps[1] < gaps[0]
