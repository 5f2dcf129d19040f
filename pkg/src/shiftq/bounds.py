"""Ceilings on achievable worst-case quality, per family.

Two kinds of bound are computed. The window bound caps every shift-equivariant
estimator: it is the largest probability a width-2*delta window can capture
(best single window of the density or of the atom masses for one sample, and
a Monte Carlo evaluation of the optimal window estimator for strictly
log-concave laws with several samples). The packing bound caps all estimators,
randomized included: it is the largest mass of a set disjoint from its own
translates by nonzero multiples of 2*delta.

The discrete sumset checker ties the two together: averaging an arbitrary
estimator's exact quality over a sumset of shifts can exceed the one-sample
window bound only by the sumset growth factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import ContinuousDistribution, Distribution, FiniteAtoms, classify
from .estimators import window_mle_estimator
from .quality import MCConfig, exact_quality_discrete, quality_at
from .util import (
    BISECT_TOL,
    EnumerationLimitError,
    MATCH_ATOL,
    is_exact,
    within_threshold,
)

__all__ = [
    "BoundReport",
    "SumsetAverageBound",
    "window_bound_one_sample",
    "packing_bound_discrete",
    "packing_bound_halfline",
    "window_bound_log_concave",
    "coefficient_sumset",
    "sumset_average_bound",
]

WINDOW = "window"  # ceiling for shift-equivariant estimators
PACKING = "packing"  # ceiling for all estimators, randomized included

_SUMSET_POINT_CAP = 6
_SUMSET_SIZE_CAP = 10_000_000


@dataclass(frozen=True)
class BoundReport:
    """One computed ceiling.

    kind is "window" or "packing". equality_certified records whether the two
    ceilings are known to coincide for this family and sample count (proven
    for the continuous one-sample and registered n-sample classes; checked by
    direct computation for atoms). witness carries the achieving object:
    a window center, the selected atoms, or a set description. ci_half_width
    is nonzero only for Monte Carlo backed values.
    """

    kind: str
    n: int
    delta: object
    value: object
    method: str
    equality_certified: bool
    witness: object = None
    ci_half_width: float = 0.0


class SumsetAverageBound(NamedTuple):
    average_quality: object
    bound: object
    holds: bool


def _discrete_window_best(d: FiniteAtoms, delta, closed_interval: bool):
    """(mass, center) of the heaviest width-2*delta window over the atoms.

    A window can cover a run of consecutive atoms whose span stays below
    2*delta (boundary spans count only under the closed convention); ties go
    to the leftmost run, and the center is the midpoint of the feasible
    center interval.
    """
    locs = d.locations
    masses = d.masses
    exact = is_exact(*locs)
    two_delta = 2 * delta
    prefix = [0]
    for m in masses:
        prefix.append(prefix[-1] + m)
    best_mass = None
    best_center = None
    j = 0
    for i in range(len(locs)):
        if j < i:
            j = i
        while j + 1 < len(locs) and within_threshold(locs[j + 1] - locs[i], two_delta, closed_interval):
            j += 1
        mass = prefix[j + 1] - prefix[i]
        if best_mass is None or mass > best_mass:
            best_mass = mass
            edge_sum = locs[i] + locs[j]
            best_center = Fraction(edge_sum, 2) if exact else edge_sum / 2
    return best_mass, best_center


def _conflict_multiple(z_a, z_b, delta) -> bool:
    """True when the two locations differ by a nonzero multiple of 2*delta."""
    if is_exact(z_a, z_b, delta):
        ratio = Fraction(z_b - z_a) / (2 * Fraction(delta))
        return ratio != 0 and ratio.denominator == 1
    ratio = (float(z_b) - float(z_a)) / (2.0 * float(delta))
    k = round(ratio)
    return k != 0 and abs(ratio - k) <= 1e-9 * max(1.0, abs(ratio))


def _discrete_packing_best(d: FiniteAtoms, delta):
    """(mass, selected atoms) for the best translate-disjoint atom subset.

    Atoms conflict when their distance is a nonzero multiple of 2*delta;
    conflicts are transitive (exactly so under rational arithmetic), so the
    best subset keeps the heaviest atom of each conflict class.
    """
    atoms = d.atoms
    parent = list(range(len(atoms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            if _conflict_multiple(atoms[i][0], atoms[j][0], delta):
                parent[find(j)] = find(i)

    best_by_class: dict[int, tuple] = {}
    for i, (z, m) in enumerate(atoms):
        root = find(i)
        current = best_by_class.get(root)
        if current is None or m > current[1]:
            best_by_class[root] = (z, m)
    selected = sorted(best_by_class.values(), key=lambda zm: float(zm[0]))
    total = sum(m for _, m in selected)
    return total, tuple(selected)


def _grid_refine_center(d: ContinuousDistribution, delta: float) -> float:
    """Best window center for an arbitrary continuous law by grid refinement."""
    lo, hi = d.finite_support()
    lo -= delta
    hi += delta

    def mass(c):
        return d.cdf(c + delta) - d.cdf(c - delta)

    center = 0.5 * (lo + hi)
    span = hi - lo
    for _ in range(4):
        grid = np.linspace(max(lo, center - span), min(hi, center + span), 801)
        center = float(grid[int(np.argmax(mass(grid)))])
        span = span / 200.0
    return center


def _bisect_center(d: ContinuousDistribution, delta: float) -> float:
    """Best window center when the density rises then falls.

    The window-mass derivative is pdf(c+delta) - pdf(c-delta), which changes
    sign exactly once for such densities, so bisection applies; flat stretches
    resolve to the lowest crossing.
    """
    slo, shi = d.finite_support()
    lo = slo - delta
    hi = shi + delta
    for _ in range(200):
        if hi - lo <= BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        g = float(d.pdf(mid + delta)) - float(d.pdf(mid - delta))
        if g > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def window_bound_one_sample(d: Distribution, delta, *, closed_interval: bool = False) -> BoundReport:
    """Largest probability captured by one width-2*delta window.

    This is the quality ceiling for every shift-equivariant estimator seeing
    a single sample, and it is attained: the witness is an optimal window
    center.
    """
    if not float(delta) > 0:
        raise ValueError("delta must be positive")
    if isinstance(d, FiniteAtoms):
        value, center = _discrete_window_best(d, delta, closed_interval)
        packing_value, _ = _discrete_packing_best(d, delta)
        if is_exact(value, packing_value):
            certified = value == packing_value
        else:
            certified = abs(float(value) - float(packing_value)) <= 1e-12
        return BoundReport(
            kind=WINDOW,
            n=1,
            delta=delta,
            value=value,
            method="atom sliding window",
            equality_certified=certified,
            witness=center,
        )
    traits = classify(d)
    delta_f = float(delta)
    if traits.unimodal or traits.monotone_on_halfline:
        center = _bisect_center(d, delta_f)
        method = "density bisection"
        certified = True
    else:
        center = _grid_refine_center(d, delta_f)
        method = "grid refinement (no shape guarantee)"
        certified = False
    value = float(d.cdf(center + delta_f) - d.cdf(center - delta_f))
    return BoundReport(
        kind=WINDOW,
        n=1,
        delta=delta,
        value=value,
        method=method,
        equality_certified=certified,
        witness=center,
    )


def packing_bound_discrete(d: FiniteAtoms, delta) -> BoundReport:
    """Ceiling for arbitrary estimators on an atomic law, one sample.

    Exact: keeps the heaviest atom from each class of atoms linked by
    2*delta-multiple distances. The window bound can sit strictly below this
    value; equality is certified only when the two computations agree.
    """
    if not isinstance(d, FiniteAtoms):
        raise TypeError("packing bound over atoms needs a finite atomic law")
    if not float(delta) > 0:
        raise ValueError("delta must be positive")
    value, selected = _discrete_packing_best(d, delta)
    window_value, _ = _discrete_window_best(d, delta, False)
    if is_exact(value, window_value):
        certified = value == window_value
    else:
        certified = abs(float(value) - float(window_value)) <= 1e-12
    return BoundReport(
        kind=PACKING,
        n=1,
        delta=delta,
        value=value,
        method="heaviest atom per translate-conflict class",
        equality_certified=certified,
        witness=selected,
    )


def packing_bound_halfline(d: Distribution, n: int, delta) -> BoundReport:
    """Ceiling for arbitrary estimators when the density decreases on [0, inf).

    The event "every sample lies within 2*delta above the shift" is disjoint
    from its translates by multiples of 2*delta and no estimator can beat its
    probability 1 - (1 - F(2*delta))^n; the minimum-based estimator attains
    it, so the window and packing ceilings coincide for this family.
    """
    traits = classify(d)
    if not traits.monotone_on_halfline:
        raise ValueError("halfline packing bound needs a density decreasing on [0, inf)")
    if n < 1:
        raise ValueError("n must be at least 1")
    tail = 1.0 - float(d.cdf(2.0 * float(delta)))
    value = 1.0 - tail**n
    return BoundReport(
        kind=PACKING,
        n=n,
        delta=delta,
        value=value,
        method="closed form from the minimum statistic",
        equality_certified=True,
        witness="samples with smallest value within 2*delta of the shift",
    )


def window_bound_log_concave(
    d: ContinuousDistribution,
    n: int,
    delta,
    mc: MCConfig,
    *,
    closed_interval: bool = False,
) -> BoundReport:
    """Attained ceiling for equivariant estimators, strictly log-concave laws.

    The optimal window estimator achieves the ceiling, so its Monte Carlo
    quality at shift zero is reported as the bound value (ci_half_width
    carries the statistical error).
    """
    traits = classify(d)
    if not traits.log_concave_strict:
        raise ValueError("this bound needs a strictly log-concave density")
    estimator = window_mle_estimator(d, delta)
    q, ci = quality_at(estimator, d, 0.0, delta, mc, n=n, closed_interval=closed_interval)
    return BoundReport(
        kind=WINDOW,
        n=n,
        delta=delta,
        value=q,
        method="Monte Carlo quality of the optimal window estimator at shift zero",
        equality_certified=True,
        witness=None,
        ci_half_width=ci,
    )


def _dedup(values: Sequence, exact: bool) -> list:
    if exact:
        return sorted(set(values))
    arr = np.sort(np.asarray([float(v) for v in values]))
    keep = np.concatenate(([True], np.diff(arr) > MATCH_ATOL))
    return arr[keep].tolist()


def _setsum(a: Sequence, b: Sequence) -> list:
    exact = is_exact(*a) and is_exact(*b)
    return _dedup([x + y for x in a for y in b], exact)


def coefficient_sumset(points: Sequence, k: int) -> list:
    """All sums of the points with integer coefficients in [0, k).

    Nearby floats (within 1e-9) collapse to one element; exact inputs
    deduplicate exactly.
    """
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    if len(points) > _SUMSET_POINT_CAP:
        raise EnumerationLimitError(f"more than {_SUMSET_POINT_CAP} generating points")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k ** len(points) > _SUMSET_SIZE_CAP:
        raise EnumerationLimitError(f"{k}^{len(points)} combinations exceed the cap")
    exact = is_exact(*points)
    values = [0 if exact else 0.0]
    for z in points:
        values = _dedup([v + h * z for v in values for h in range(k)], exact)
    return values


def sumset_average_bound(e, d: FiniteAtoms, delta, k: int, *, closed_interval: bool = False) -> SumsetAverageBound:
    """Check the averaging ceiling for an arbitrary estimator on atoms.

    The average of the exact quality over shifts in the coefficient sumset of
    the atom locations cannot exceed the one-sample window bound scaled by
    |sumset + atoms| / |sumset|. Exact inputs are decided exactly; float
    inputs allow 1e-12 slack.
    """
    if not isinstance(d, FiniteAtoms):
        raise TypeError("the averaging check needs a finite atomic law")
    locs = list(d.locations)
    shifts = coefficient_sumset(locs, k)
    qualities = [
        exact_quality_discrete(e, d, theta, delta, closed_interval=closed_interval)
        for theta in shifts
    ]
    total = sum(qualities)
    window_value = window_bound_one_sample(d, delta, closed_interval=closed_interval).value
    grown = _setsum(shifts, locs)
    if is_exact(total, window_value):
        average = total / len(shifts)
        bound = window_value * Fraction(len(grown), len(shifts))
        holds = average <= bound
    else:
        average = float(total) / len(shifts)
        bound = float(window_value) * len(grown) / len(shifts)
        holds = average <= bound + 1e-12
    return SumsetAverageBound(average_quality=average, bound=bound, holds=holds)


def bound_report_dict(report: BoundReport) -> dict:
    """JSON-ready form; exact values become 'p/q' strings."""
    from .util import number_repr

    witness = report.witness
    if isinstance(witness, tuple):
        witness = [[number_repr(z), number_repr(m)] for z, m in witness]
    elif witness is not None and not isinstance(witness, str):
        witness = number_repr(witness)
    return {
        "kind": report.kind,
        "n": report.n,
        "delta": number_repr(report.delta),
        "value": number_repr(report.value),
        "method": report.method,
        "equality_certified": report.equality_certified,
        "witness": witness,
        "ci_half_width": report.ci_half_width,
    }
