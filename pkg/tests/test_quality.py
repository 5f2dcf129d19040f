import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from shiftq import (
    Exponential,
    FiniteAtoms,
    Gaussian,
    MCConfig,
    averaged_performance_bound,
    constant_estimator,
    default_theta_grid,
    discrete_one_sample_estimator,
    exact_quality_discrete,
    mean_estimator,
    min_shift_estimator,
    mixture,
    quality_at,
    quality_inf,
    wilson_halfwidth,
)
from shiftq.estimators import SHIFT_INVARIANT, Estimator
from tests.conftest import random_rational_atoms

UNIT_WINDOW_MASS = 0.6826894921370859
EXPO_HALF_MASS = 0.3934693402873666
EXPO_FULL_MASS = 0.6321205588285577


def test_wilson_halfwidth_frozen_value():
    # z = 2.5758... at 99%; reference computed once from the closed form.
    assert wilson_halfwidth(500, 1000, 0.99) == pytest.approx(0.04056, abs=2e-4)
    assert wilson_halfwidth(0, 1000, 0.99) > 0.0
    assert wilson_halfwidth(1000, 1000, 0.99) < 0.01


def test_wilson_halfwidth_shrinks_with_trials():
    widths = [wilson_halfwidth(n // 2, n, 0.99) for n in (100, 1000, 10_000, 100_000)]
    assert all(a > b for a, b in zip(widths, widths[1:]))


def test_gaussian_mean_quality_matches_normal_mass(mc_mid):
    d = Gaussian(0.0, 1.0)
    q, ci = quality_at(mean_estimator(d), d, 0.0, 1.0, mc_mid, n=1)
    assert abs(q - UNIT_WINDOW_MASS) <= 3 * ci
    # Four samples halve the standard error: same mass at half the threshold.
    q4, ci4 = quality_at(mean_estimator(d), d, 0.0, 0.5, mc_mid, n=4)
    assert abs(q4 - UNIT_WINDOW_MASS) <= 3 * ci4


def test_min_shift_quality_matches_closed_form(mc_mid):
    d = Exponential(1.0)
    e = min_shift_estimator(0.25)
    for n, want in ((1, EXPO_HALF_MASS), (2, EXPO_FULL_MASS)):
        q, ci = quality_at(e, d, 0.0, 0.25, mc_mid, n=n)
        assert abs(q - want) <= 3 * ci


def test_quality_is_zero_for_far_constant_guess(mc_fast):
    d = Gaussian(0.0, 1.0)
    q, ci = quality_at(constant_estimator(0.0), d, 10.0, 1.0, mc_fast, n=1)
    assert q == 0.0


def test_exact_quality_hand_enumerated(example_atoms):
    delta = Fraction(3, 4)
    e = discrete_one_sample_estimator(example_atoms, delta)
    # Window center 1/2 covers atoms 0 and 1: mass 1/4 + 7/20 = 3/5.
    assert exact_quality_discrete(e, example_atoms, Fraction(0), delta) == Fraction(3, 5)
    assert exact_quality_discrete(e, example_atoms, Fraction(22, 7), delta) == Fraction(3, 5)

    const = constant_estimator(Fraction(0))
    assert exact_quality_discrete(const, example_atoms, Fraction(0), delta, n=1) == 1
    assert exact_quality_discrete(const, example_atoms, Fraction(10), delta, n=1) == 0


def test_exact_quality_closed_interval_boundary(example_atoms):
    delta = Fraction(3, 4)
    const = constant_estimator(Fraction(0))
    # |guess - theta| lands exactly on the threshold.
    open_q = exact_quality_discrete(
        const, example_atoms, delta, delta, n=1, closed_interval=False
    )
    closed_q = exact_quality_discrete(
        const, example_atoms, delta, delta, n=1, closed_interval=True
    )
    assert open_q == 0
    assert closed_q == 1


def test_exact_quality_of_mixture_is_weighted(example_atoms):
    delta = Fraction(3, 4)
    good = discrete_one_sample_estimator(example_atoms, delta)
    bad = constant_estimator(Fraction(-1000))
    m = mixture([(good, 0.5), (bad, 0.5)])
    got = exact_quality_discrete(m, example_atoms, Fraction(0), delta)
    assert got == pytest.approx(0.5 * 0.6, abs=1e-12)


def test_mc_determinism_across_parallelism():
    d = Gaussian(0.0, 1.0)
    e = mean_estimator(d)
    base = MCConfig(trials=200_000, seed=77, parallelism=1)
    par = dataclasses.replace(base, parallelism=3)
    q1, ci1 = quality_at(e, d, 0.0, 1.0, base, n=2)
    q3, ci3 = quality_at(e, d, 0.0, 1.0, par, n=2)
    assert q1 == q3 and ci1 == ci3


def test_mc_determinism_across_runs(mc_fast):
    d = Exponential(2.0)
    e = min_shift_estimator(0.3)
    a = quality_at(e, d, 1.5, 0.3, mc_fast, n=2)
    b = quality_at(e, d, 1.5, 0.3, mc_fast, n=2)
    assert a == b


def test_mc_agrees_with_exact_on_random_atoms():
    rng = np.random.default_rng(55)
    mc = MCConfig(trials=40_000, seed=13)
    for _ in range(10):
        exact_d = random_rational_atoms(rng, int(rng.integers(2, 5)))
        # Same instance with float data for the sampling path.
        float_d = FiniteAtoms(
            atoms=tuple((float(z), float(m)) for z, m in exact_d.atoms)
        )
        delta = Fraction(int(rng.integers(1, 8)), 8)
        e_exact = discrete_one_sample_estimator(exact_d, delta)
        e_float = discrete_one_sample_estimator(float_d, float(delta))
        want = exact_quality_discrete(e_exact, exact_d, Fraction(0), delta)
        got, ci = quality_at(e_float, float_d, 0.0, float(delta), mc, n=1)
        assert abs(got - float(want)) <= 3 * ci + 1e-9


def test_quality_inf_certifies_invariant_estimators(mc_fast):
    d = Exponential(1.0)
    e = min_shift_estimator(0.25)
    report = quality_inf(e, d, 0.25, (-5.0, 3.0, 100.0), mc_fast, n=2)
    assert report.infimum_certified
    assert report.worst_case[1] == 0.0
    thetas = [t.theta for t in report.per_theta]
    assert 0.0 in thetas
    spread = max(t.q for t in report.per_theta) - min(t.q for t in report.per_theta)
    assert spread <= 6 * max(t.ci_half_width for t in report.per_theta)


def test_quality_inf_reports_grid_minimum_for_plain_estimators(mc_fast):
    d = Gaussian(0.0, 1.0)
    e = constant_estimator(0.0)
    report = quality_inf(e, d, 1.0, (0.0, 5.0), mc_fast, n=1)
    assert not report.infimum_certified
    assert report.worst_case[1] == 5.0
    assert report.worst_case[0] == 0.0


def test_quality_inf_rejects_false_invariance_claims(mc_fast):
    d = Gaussian(0.0, 1.0)
    liar = Estimator(
        label="liar", fn=lambda x: 0.0, n="any", invariance_claim=SHIFT_INVARIANT
    )
    with pytest.raises(RuntimeError, match="invariance"):
        quality_inf(liar, d, 1.0, (0.0, 6.0), mc_fast, n=1)


def test_quality_inf_uses_exact_path_on_atoms(example_atoms):
    e = discrete_one_sample_estimator(example_atoms, Fraction(3, 4))
    mc = MCConfig(trials=1000, seed=1)
    report = quality_inf(e, example_atoms, Fraction(3, 4), (0.0, 1.5, 3.0), mc, n=1)
    assert all(t.exact and t.ci_half_width == 0.0 for t in report.per_theta)
    assert report.worst_case[0] == pytest.approx(0.6, abs=1e-15)


def test_default_theta_grid_covers_both_signs():
    grid = default_theta_grid(0.25, 2)
    assert min(grid) == -5.0 and max(grid) == 5.0
    assert any(t == 0.0 for t in grid)
    assert len(grid) >= 41


def test_averaged_performance_dominates_minimum(example_atoms, mc_fast):
    e = discrete_one_sample_estimator(example_atoms, Fraction(3, 4))
    out = averaged_performance_bound(e, example_atoms, Fraction(3, 4), 5, mc_fast, n=1)
    assert out.average >= out.minimum
    # This estimator's per-shift quality is shift independent.
    assert out.average == pytest.approx(0.6, abs=1e-15)
    assert out.minimum == pytest.approx(0.6, abs=1e-15)


def test_mc_config_validation():
    with pytest.raises(ValueError):
        MCConfig(trials=10)
    with pytest.raises(ValueError):
        MCConfig(ci_level=1.0)
    with pytest.raises(ValueError):
        MCConfig(parallelism=0)


def test_randomized_estimator_mc_quality(example_atoms, mc_mid):
    # Mixing in a hopeless component halves the quality.
    float_d = FiniteAtoms(atoms=tuple((float(z), float(m)) for z, m in example_atoms.atoms))
    good = discrete_one_sample_estimator(float_d, 0.75)
    bad = constant_estimator(-1000.0)
    m = mixture([(good, 0.5), (bad, 0.5)])
    q, ci = quality_at(m, float_d, 0.0, 0.75, mc_mid, n=1)
    assert abs(q - 0.3) <= 3 * ci + 1e-9
