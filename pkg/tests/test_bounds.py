import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from shiftq import (
    BoundReport,
    Exponential,
    FiniteAtoms,
    Gaussian,
    MCConfig,
    PiecewiseDensity,
    Uniform,
    coefficient_sumset,
    constant_estimator,
    discrete_one_sample_estimator,
    exact_quality_discrete,
    packing_bound_discrete,
    packing_bound_halfline,
    sumset_average_bound,
    window_bound_log_concave,
    window_bound_one_sample,
)
from shiftq.estimators import Estimator
from shiftq.util import EnumerationLimitError
from tests.conftest import random_rational_atoms

UNIT_WINDOW_MASS = 0.6826894921370859
EXPO_HALF_MASS = 0.3934693402873666
EXPO_FULL_MASS = 0.6321205588285577
EXPO_FIVE_MASS = 0.9179150013761012


def brute_force_packing(d: FiniteAtoms, delta) -> Fraction:
    """Best conflict-free subset by exhaustive 2^r search (oracle)."""
    locs, masses = d.locations, d.masses
    step = 2 * delta
    r = len(locs)

    def conflict(i, j):
        ratio = (locs[j] - locs[i]) / step
        return ratio == int(ratio)

    best = Fraction(0)
    for mask in range(1, 2**r):
        chosen = [i for i in range(r) if mask >> i & 1]
        if any(conflict(i, j) for i, j in itertools.combinations(chosen, 2)):
            continue
        best = max(best, sum(masses[i] for i in chosen))
    return best


def test_gaussian_window_bound_is_centered_at_the_mode():
    r = window_bound_one_sample(Gaussian(0.0, 1.0), 1.0)
    assert r.kind == "window" and r.n == 1
    assert r.value == pytest.approx(UNIT_WINDOW_MASS, abs=1e-9)
    assert r.witness == pytest.approx(0.0, abs=1e-7)
    assert r.equality_certified
    assert r.ci_half_width == 0.0


def test_exponential_window_bound_hugs_the_left_edge():
    r = window_bound_one_sample(Exponential(1.0), 0.25)
    assert r.value == pytest.approx(EXPO_HALF_MASS, abs=1e-9)
    assert r.witness == pytest.approx(0.25, abs=1e-7)
    assert r.equality_certified


def test_uniform_window_bound_has_a_flat_optimum():
    r = window_bound_one_sample(Uniform(0.0, 1.0), 0.1)
    assert r.value == pytest.approx(0.2, abs=1e-9)
    assert 0.1 - 1e-6 <= r.witness <= 0.9 + 1e-6


def test_piecewise_window_bound_matches_grid_oracle():
    d = PiecewiseDensity(knots=((0.0, 0.0), (1.0, 0.75), (2.0, 0.25), (3.0, 0.0)))
    delta = 0.4
    r = window_bound_one_sample(d, delta)
    centers = np.linspace(-0.5, 3.5, 20_001)
    masses = d.cdf(centers + delta) - d.cdf(centers - delta)
    assert r.value == pytest.approx(float(np.max(masses)), abs=1e-6)


def test_discrete_window_bound_hand_example(example_atoms):
    r = window_bound_one_sample(example_atoms, Fraction(3, 4))
    assert r.value == Fraction(3, 5)
    assert r.witness == Fraction(1, 2)
    assert isinstance(r.value, Fraction)


def test_discrete_window_leftmost_tie_break():
    d = FiniteAtoms(
        atoms=(
            (Fraction(0), Fraction(1, 2)),
            (Fraction(5), Fraction(1, 2)),
        )
    )
    r = window_bound_one_sample(d, Fraction(1, 4))
    # Both singleton windows tie at mass 1/2; the left one wins.
    assert r.value == Fraction(1, 2)
    assert r.witness == Fraction(0)


def test_discrete_packing_bound_hand_example(example_atoms):
    # Atoms 1 and 10 are 9 apart = 6 * (2 * 3/4), so they conflict.
    r = packing_bound_discrete(example_atoms, Fraction(3, 4))
    assert r.kind == "packing"
    assert r.value == Fraction(1, 4) + Fraction(2, 5)
    assert not r.equality_certified  # strictly above the window bound 3/5


def test_discrete_packing_no_conflicts_sums_to_one(example_atoms):
    r = packing_bound_discrete(example_atoms, Fraction(2, 7))
    # 2*delta = 4/7; none of the distances 1, 9, 10 is a multiple of it.
    assert r.value == 1


def test_discrete_packing_wide_step_conflicts(example_atoms):
    # 2*delta = 2/3 divides the distance 10 (15 steps), so 0 and 10 conflict.
    r = packing_bound_discrete(example_atoms, Fraction(1, 3))
    assert r.value == Fraction(2, 5) + Fraction(7, 20)


def test_packing_agrees_with_brute_force_up_to_r12():
    rng = np.random.default_rng(99)
    for r_atoms in (3, 6, 9, 12):
        for _ in range(3):
            d = random_rational_atoms(rng, r_atoms)
            delta = Fraction(int(rng.integers(1, 10)), 16)
            got = packing_bound_discrete(d, delta).value
            want = brute_force_packing(d, delta)
            assert got == want


def test_window_never_exceeds_packing_on_random_instances():
    rng = np.random.default_rng(123)
    for _ in range(25):
        d = random_rational_atoms(rng, int(rng.integers(2, 6)))
        delta = Fraction(int(rng.integers(1, 12)), 16)
        s = window_bound_one_sample(d, delta).value
        t = packing_bound_discrete(d, delta).value
        assert isinstance(s, Fraction) and isinstance(t, Fraction)
        assert s <= t


def test_halfline_packing_closed_forms():
    d = Exponential(1.0)
    for n, want in ((1, EXPO_HALF_MASS), (2, EXPO_FULL_MASS), (5, EXPO_FIVE_MASS)):
        r = packing_bound_halfline(d, n, 0.25)
        assert r.value == pytest.approx(want, abs=1e-12)
        assert r.equality_certified and r.n == n
    with pytest.raises(ValueError):
        packing_bound_halfline(Gaussian(0.0, 1.0), 1, 0.25)


def test_log_concave_window_bound_matches_gaussian_mass():
    mc = MCConfig(trials=150_000, seed=7)
    r = window_bound_log_concave(Gaussian(0.0, 1.0), 4, 0.5, mc)
    assert abs(r.value - UNIT_WINDOW_MASS) <= 3 * r.ci_half_width
    assert r.equality_certified and r.ci_half_width > 0.0


def test_log_concave_window_bound_is_scale_equivariant():
    mc = MCConfig(trials=100_000, seed=21)
    a = window_bound_log_concave(Gaussian(0.0, 1.0), 3, 0.5, mc)
    b = window_bound_log_concave(Gaussian(0.0, 2.0), 3, 1.0, mc)
    assert abs(a.value - b.value) <= 3 * (a.ci_half_width + b.ci_half_width)


def test_window_bound_rejects_degenerate_threshold():
    with pytest.raises(ValueError):
        window_bound_one_sample(Gaussian(0.0, 1.0), 0.0)


def test_coefficient_sumset_examples():
    assert coefficient_sumset([0, 1], 3) == [0, 1, 2]
    assert coefficient_sumset([Fraction(0), Fraction(1), Fraction(10)], 2) == [
        0,
        1,
        10,
        11,
    ]
    # Nearby floats collapse.
    assert coefficient_sumset([0.0, 1e-12], 2) == [0.0]


def test_coefficient_sumset_caps():
    with pytest.raises(EnumerationLimitError):
        coefficient_sumset(list(range(7)), 2)
    with pytest.raises(EnumerationLimitError):
        coefficient_sumset(list(range(6)), 100)
    with pytest.raises(ValueError):
        coefficient_sumset([], 2)


def test_sumset_average_bound_on_the_optimal_estimator(example_atoms):
    delta = Fraction(3, 4)
    e = discrete_one_sample_estimator(example_atoms, delta)
    out = sumset_average_bound(e, example_atoms, delta, 4)
    assert out.holds
    assert out.average_quality == Fraction(3, 5)
    assert isinstance(out.bound, Fraction)
    assert out.average_quality <= out.bound


def test_sumset_average_bound_on_random_rules(example_atoms):
    rng = np.random.default_rng(31)
    delta = Fraction(3, 4)
    for _ in range(20):
        offset = Fraction(int(rng.integers(-40, 40)), 8)
        modulus = Fraction(int(rng.integers(2, 12)), 2)

        def rule(x, offset=offset, modulus=modulus):
            v = x[0]
            return v - offset if (v % modulus) < modulus / 2 else v + offset

        e = Estimator(label="table rule", fn=rule, n=1)
        out = sumset_average_bound(e, example_atoms, delta, 3)
        assert out.holds


def test_bound_report_is_frozen():
    r = window_bound_one_sample(Gaussian(0.0, 1.0), 1.0)
    assert isinstance(r, BoundReport)
    with pytest.raises(Exception):
        r.value = 0.0
