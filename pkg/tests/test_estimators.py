from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftq import (
    Exponential,
    FiniteAtoms,
    Gaussian,
    PiecewiseDensity,
    Uniform,
    constant_estimator,
    discrete_n_sample_estimator,
    discrete_one_sample_estimator,
    invariant_extension,
    mean_estimator,
    min_shift_estimator,
    mixture,
    window_mle_estimator,
)
from shiftq.estimators import SHIFT_INVARIANT


def test_window_center_on_standard_gaussian_pair():
    e = window_mle_estimator(Gaussian(0.0, 1.0), 0.5)
    assert e.evaluate((0.0, 2.0)) == pytest.approx(1.0, abs=1e-6)


def test_window_center_on_scaled_gaussian_single():
    e = window_mle_estimator(Gaussian(3.0, 2.0), 1.0)
    assert e.evaluate((5.0,)) == pytest.approx(2.0, abs=1e-6)


def test_window_equals_mean_on_gaussian_inputs():
    rng = np.random.default_rng(31)
    for sigma in (0.5, 1.0, 2.0):
        d = Gaussian(0.0, sigma)
        w = window_mle_estimator(d, 0.5)
        m = mean_estimator(d)
        for n in (1, 3, 8):
            x = rng.normal(0.0, sigma, size=(40, n))
            assert np.max(np.abs(w.evaluate_batch(x) - m.evaluate_batch(x))) < 1e-6


def test_window_requires_suitable_traits():
    with pytest.raises(ValueError):
        window_mle_estimator(Exponential(1.0), 0.25)


def test_window_on_merely_unimodal_law_is_labeled():
    e = window_mle_estimator(Uniform(0.0, 1.0), 0.1)
    assert "unverified" in e.label
    # Any center on the flat stretch is optimal; the guess must stay inside it.
    guess = e.evaluate((0.5,))
    center = 0.5 - guess
    assert 0.1 - 1e-9 <= center <= 0.9 + 1e-9


def test_window_full_cover_picks_support_midpoint():
    # With 2*delta wider than the support every window covers it; the
    # positivity-interval midpoint is the canonical answer.
    e = window_mle_estimator(Uniform(0.0, 1.0), 2.0)
    assert e.evaluate((0.25,)) == pytest.approx(0.25 - 0.5, abs=1e-9)


def test_window_batch_agrees_with_scalar_path():
    d = Gaussian(1.0, 1.5)
    e = window_mle_estimator(d, 0.7)
    rng = np.random.default_rng(5)
    x = rng.normal(1.0, 1.5, size=(25, 3))
    batch = e.evaluate_batch(x)
    rowwise = [e.evaluate(tuple(row)) for row in x]
    assert np.allclose(batch, rowwise, atol=1e-9)


def test_min_shift_evaluate():
    e = min_shift_estimator(0.25)
    assert e.evaluate((1.0, 0.3, 2.0)) == pytest.approx(0.05)
    assert e.evaluate((Fraction(1), Fraction(3, 4))) == Fraction(1, 2)
    assert e.invariance_claim == SHIFT_INVARIANT


def test_discrete_one_sample_snaps_to_window_center(example_atoms):
    e = discrete_one_sample_estimator(example_atoms, Fraction(3, 4))
    assert e.evaluate((10.5,)) == pytest.approx(10.0)
    assert e.evaluate((Fraction(21, 2),)) == Fraction(10)
    assert e.evaluate((Fraction(0),)) == Fraction(-1, 2)


def test_discrete_n_sample_recovers_shift_exactly(example_atoms):
    e = discrete_n_sample_estimator(example_atoms, Fraction(3, 4), 2)
    rng = np.random.default_rng(17)
    locs = example_atoms.locations
    masses = [float(m) for m in example_atoms.masses]
    theta = Fraction(22, 7)
    hits = 0
    for _ in range(2000):
        idx = rng.choice(len(locs), size=2, p=masses)
        samples = tuple(locs[i] + theta for i in idx)
        guess = e.evaluate(samples)
        if idx[0] != idx[1]:
            assert guess == theta
            hits += 1
        else:
            # Identical samples fall back to the one-sample window rule.
            assert guess == samples[0] - Fraction(1, 2)
    assert hits > 1000


def test_discrete_n_sample_requires_distinct_distances():
    evenly = FiniteAtoms(
        atoms=(
            (Fraction(0), Fraction(1, 3)),
            (Fraction(1), Fraction(1, 3)),
            (Fraction(2), Fraction(1, 3)),
        )
    )
    with pytest.raises(ValueError, match="distinct"):
        discrete_n_sample_estimator(evenly, Fraction(1, 4), 2)


def test_discrete_n_sample_rejects_impossible_samples(example_atoms):
    e = discrete_n_sample_estimator(example_atoms, Fraction(3, 4), 2)
    with pytest.raises(ValueError, match="atom"):
        e.evaluate((Fraction(0), Fraction(1, 3)))


def test_invariant_extension_reproduces_min_shift():
    delta = 0.25
    e = invariant_extension(lambda x0: delta - min(x0), n=3)
    ref = min_shift_estimator(delta)
    rng = np.random.default_rng(23)
    for _ in range(50):
        x = tuple(rng.normal(5.0, 2.0, size=3))
        assert e.evaluate(x) == pytest.approx(ref.evaluate(x), abs=1e-12)
    assert e.invariance_claim == SHIFT_INVARIANT


def test_constant_estimator_ignores_samples():
    e = constant_estimator(Fraction(7, 2))
    assert e.evaluate((1.0,)) == Fraction(7, 2)
    assert e.evaluate((1.0, 2.0, 3.0)) == Fraction(7, 2)
    assert e.invariance_claim != SHIFT_INVARIANT


def test_mixture_validation(example_atoms):
    a = constant_estimator(0.0)
    b = constant_estimator(100.0)
    with pytest.raises(ValueError, match="sum"):
        mixture([(a, 0.5), (b, 0.4)])
    with pytest.raises(ValueError, match="positive"):
        mixture([(a, 1.5), (b, -0.5)])
    m = mixture([(a, 0.5), (b, 0.5)])
    rng = np.random.default_rng(3)
    values = {float(m.evaluate((1.0,), rng)) for _ in range(200)}
    assert values == {0.0, 100.0}


def test_mixture_component_split_is_weighted():
    a = constant_estimator(0.0)
    b = constant_estimator(1.0)
    m = mixture([(a, 0.25), (b, 0.75)])
    rng = np.random.default_rng(8)
    out = m.evaluate_batch(np.zeros((20_000, 1)), rng)
    assert out.mean() == pytest.approx(0.75, abs=0.02)


def test_mixture_inherits_invariance_only_when_unanimous():
    inv = min_shift_estimator(0.1)
    m_inv = mixture([(inv, 0.5), (min_shift_estimator(0.2), 0.5)])
    assert m_inv.invariance_claim == SHIFT_INVARIANT
    m_plain = mixture([(inv, 0.5), (constant_estimator(0.0), 0.5)])
    assert m_plain.invariance_claim != SHIFT_INVARIANT


@pytest.mark.parametrize("c", [-1e6, -3.5, 0.0, 11.25, 1e6])
def test_shift_equivariance_of_invariant_estimators(example_atoms, c):
    gauss = Gaussian(0.0, 1.0)
    estimators = [
        (mean_estimator(gauss), (0.3, -0.8, 1.7)),
        (window_mle_estimator(gauss, 0.5), (0.3, -0.8, 1.7)),
        (min_shift_estimator(0.25), (0.3, -0.8, 1.7)),
        (discrete_one_sample_estimator(example_atoms, Fraction(3, 4)), (1.0,)),
    ]
    for e, x in estimators:
        base = float(e.evaluate(x))
        moved = float(e.evaluate(tuple(v + c for v in x)))
        assert moved - c == pytest.approx(base, abs=1e-9 * max(1.0, abs(c) * 1e-3))


@given(
    st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=6),
    st.floats(min_value=-100, max_value=100),
)
def test_mean_estimator_is_exactly_equivariant_in_expectation(xs, c):
    d = Gaussian(0.0, 1.0)
    e = mean_estimator(d)
    x = tuple(xs)
    assert float(e.evaluate(tuple(v + c for v in x))) - c == pytest.approx(
        float(e.evaluate(x)), abs=1e-7
    )


@given(st.floats(min_value=-4, max_value=4), st.floats(min_value=-4, max_value=4))
def test_window_guess_lies_in_the_positive_density_region(a, b):
    d = Gaussian(0.0, 1.0)
    e = window_mle_estimator(d, 0.5)
    guess = float(e.evaluate((a, b)))
    # The balanced window center never leaves the sample span by more than
    # the half-window plus the mode pull.
    assert min(a, b) - 3.0 <= guess <= max(a, b) + 3.0
