import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsdistill import (
    OuParams,
    ParamRanges,
    ValidationError,
    generate_series,
    sample_params,
    theoretical_moments,
)


def test_zero_noise_zero_mean_is_fixed_point():
    series = generate_series(OuParams(kappa=0.5, r_bar=0.0, sigma=0.0, n_steps=5, seed=123))
    assert np.array_equal(series.values, np.zeros(6))


def test_noiseless_recursion_hand_unrolled():
    series = generate_series(OuParams(kappa=0.5, r_bar=1.0, sigma=0.0, n_steps=3, seed=0))
    assert series.values == pytest.approx([0.0, 0.5, 0.75, 0.875], abs=0.0)


def test_determinism_bit_for_bit():
    params = OuParams(kappa=0.2, r_bar=-3.0, sigma=1.5, n_steps=50, seed=987654321)
    a = generate_series(params)
    b = generate_series(params)
    assert np.array_equal(a.values, b.values)


def test_different_seeds_differ():
    base = dict(kappa=0.2, r_bar=-3.0, sigma=1.5, n_steps=50)
    a = generate_series(OuParams(seed=1, **base))
    b = generate_series(OuParams(seed=2, **base))
    assert not np.array_equal(a.values, b.values)


def test_series_shape_and_start():
    series = generate_series(OuParams(kappa=0.3, r_bar=4.0, sigma=2.0, n_steps=17, seed=5))
    assert series.n_points == 18
    assert series.values[0] == 0.0


@pytest.mark.parametrize(
    "kwargs, bad_field",
    [
        (dict(kappa=0.0, r_bar=0.0, sigma=1.0, n_steps=10, seed=0), "kappa"),
        (dict(kappa=1.5, r_bar=0.0, sigma=1.0, n_steps=10, seed=0), "kappa"),
        (dict(kappa=0.5, r_bar=0.0, sigma=-0.1, n_steps=10, seed=0), "sigma"),
        (dict(kappa=0.5, r_bar=0.0, sigma=1.0, n_steps=1, seed=0), "n_steps"),
        (dict(kappa=0.5, r_bar=0.0, sigma=1.0, n_steps=10, seed=-1), "seed"),
    ],
)
def test_param_validation_names_offending_field(kwargs, bad_field):
    with pytest.raises(ValidationError, match=bad_field):
        OuParams(**kwargs)


def test_monte_carlo_mean_at_t200():
    # Closed-form AR(1) oracle: E[r_200] = 10 * (1 - 0.9^200) ~= 10.0
    params = [OuParams(kappa=0.1, r_bar=10.0, sigma=2.0, n_steps=200, seed=s) for s in range(10_000)]
    finals = np.array([generate_series(p).values[-1] for p in params])
    mean_th, var_th = theoretical_moments(params[0], 200)
    se = np.sqrt(var_th / len(finals))
    assert abs(finals.mean() - mean_th) < 3 * se


@pytest.mark.parametrize(
    "kappa, r_bar, sigma, t",
    [(0.1, 10.0, 2.0, 25), (0.4, -8.0, 5.0, 60), (0.9, 3.0, 1.0, 10)],
)
def test_monte_carlo_moments_match_theory(kappa, r_bar, sigma, t):
    n = 10_000
    finals = np.array(
        [
            generate_series(OuParams(kappa=kappa, r_bar=r_bar, sigma=sigma, n_steps=t, seed=s)).values[t]
            for s in range(n)
        ]
    )
    mean_th, var_th = theoretical_moments(
        OuParams(kappa=kappa, r_bar=r_bar, sigma=sigma, n_steps=t, seed=0), t
    )
    se_mean = np.sqrt(var_th / n)
    se_var = var_th * np.sqrt(2.0 / (n - 1))
    assert abs(finals.mean() - mean_th) < 4 * se_mean
    assert abs(finals.var() - var_th) < 4 * se_var


def test_theoretical_moments_initial_condition():
    params = OuParams(kappa=0.3, r_bar=7.0, sigma=2.0, n_steps=10, seed=0)
    assert theoretical_moments(params, 0) == (0.0, 0.0)


def test_theoretical_moments_geometric_limit():
    # sigma^2 / (1 - (1-kappa)^2) = 4 / 0.19 for kappa=0.1, sigma=2
    params = OuParams(kappa=0.1, r_bar=0.0, sigma=2.0, n_steps=500, seed=0)
    _, var = theoretical_moments(params, 500)
    assert var == pytest.approx(4.0 / 0.19, rel=1e-6)


def test_theoretical_moments_full_reversion():
    params = OuParams(kappa=1.0, r_bar=-4.5, sigma=3.0, n_steps=10, seed=0)
    for t in (1, 5, 10):
        mean, var = theoretical_moments(params, t)
        assert mean == pytest.approx(-4.5)
        assert var == pytest.approx(9.0)


def test_theoretical_moments_validates_t():
    params = OuParams(kappa=0.3, r_bar=7.0, sigma=2.0, n_steps=10, seed=0)
    with pytest.raises(ValidationError):
        theoretical_moments(params, 11)
    with pytest.raises(ValidationError):
        theoretical_moments(params, -1)


def test_noiseless_matches_closed_form():
    params = OuParams(kappa=0.23, r_bar=13.0, sigma=0.0, n_steps=80, seed=0)
    series = generate_series(params)
    for t in (0, 1, 7, 80):
        mean, var = theoretical_moments(params, t)
        assert var == 0.0
        assert series.values[t] == pytest.approx(mean, abs=1e-9)


@pytest.mark.parametrize("c", [3.0, 0.5])
def test_affine_response_shares_noise_stream(c):
    # Scaling (r_bar, sigma) by c > 0 scales the whole trajectory by c
    # when the seed is shared, by linearity of the recursion.
    base = generate_series(OuParams(kappa=0.15, r_bar=4.0, sigma=2.0, n_steps=60, seed=77))
    scaled = generate_series(OuParams(kappa=0.15, r_bar=c * 4.0, sigma=c * 2.0, n_steps=60, seed=77))
    np.testing.assert_allclose(scaled.values, c * base.values, rtol=1e-12, atol=1e-12)


def test_sample_params_point_intervals():
    ranges = ParamRanges(kappa_range=(0.25, 0.25), r_bar_range=(0.25, 0.25), sigma_range=(0.25, 0.25))
    params = sample_params(ranges, seed=9)
    assert (params.kappa, params.r_bar, params.sigma) == (0.25, 0.25, 0.25)


def test_sample_params_deterministic():
    ranges = ParamRanges()
    assert sample_params(ranges, seed=4242) == sample_params(ranges, seed=4242)


def test_sample_params_uniform_mean():
    # Uniform oracle: mean of kappa over [0.01, 0.5] is 0.255.
    ks = np.array([sample_params(ParamRanges(), seed=s).kappa for s in range(10_000)])
    se = (0.49 / np.sqrt(12.0)) / np.sqrt(10_000)
    assert abs(ks.mean() - 0.255) < 3 * se


def test_sample_params_respects_bounds():
    ranges = ParamRanges(kappa_range=(0.2, 0.4), r_bar_range=(-1.0, 1.0), sigma_range=(0.0, 0.5), n_steps=20)
    for seed in range(200):
        p = sample_params(ranges, seed)
        assert 0.2 <= p.kappa <= 0.4
        assert -1.0 <= p.r_bar <= 1.0
        assert 0.0 <= p.sigma <= 0.5
        assert p.n_steps == 20


def test_param_ranges_validation():
    with pytest.raises(ValidationError):
        ParamRanges(kappa_range=(0.0, 0.5))
    with pytest.raises(ValidationError):
        ParamRanges(kappa_range=(0.5, 0.1))
    with pytest.raises(ValidationError):
        ParamRanges(sigma_range=(-1.0, 1.0))


@settings(max_examples=50, deadline=None)
@given(
    kappa=st.floats(0.01, 1.0),
    r_bar=st.floats(-50.0, 50.0),
    sigma=st.floats(0.0, 10.0),
    n_steps=st.integers(2, 60),
    seed=st.integers(0, 2**64 - 1),
)
def test_generate_series_is_pure(kappa, r_bar, sigma, n_steps, seed):
    params = OuParams(kappa=kappa, r_bar=r_bar, sigma=sigma, n_steps=n_steps, seed=seed)
    a = generate_series(params)
    b = generate_series(params)
    assert np.array_equal(a.values, b.values)
    assert a.values[0] == 0.0
    assert len(a.values) == n_steps + 1


@settings(max_examples=50, deadline=None)
@given(kappa=st.floats(0.01, 1.0), r_bar=st.floats(-50.0, 50.0), n_steps=st.integers(2, 60))
def test_noiseless_is_monotone_toward_mean(kappa, r_bar, n_steps):
    series = generate_series(OuParams(kappa=kappa, r_bar=r_bar, sigma=0.0, n_steps=n_steps, seed=0))
    gaps = np.abs(series.values - r_bar)
    assert np.all(np.diff(gaps) <= 1e-12)
    expected = np.abs(r_bar) * (1.0 - kappa) ** np.arange(n_steps + 1)
    np.testing.assert_allclose(gaps, expected, atol=1e-9)
