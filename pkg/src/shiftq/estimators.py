"""Location estimators: constructions, invariance metadata, mixtures.

An Estimator wraps a plain evaluation function together with the sample count
it accepts and the invariance it claims. Constructions that admit a
vectorized form also carry a batch evaluator, which is what keeps the Monte
Carlo loops fast; anything else falls back to a per-row Python loop.

Shift equivariance is the load-bearing property here: e(x + c) = e(x) + c
means the estimator's success probability does not depend on the unknown
shift, so it can be measured once at shift zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import ContinuousDistribution, Distribution, FiniteAtoms, classify
from .util import BISECT_TOL, MATCH_ATOL, is_exact

__all__ = [
    "Estimator",
    "RandomizedEstimator",
    "mean_estimator",
    "window_mle_estimator",
    "min_shift_estimator",
    "discrete_one_sample_estimator",
    "discrete_n_sample_estimator",
    "invariant_extension",
    "constant_estimator",
    "mixture",
]

SHIFT_INVARIANT = "shift_invariant"
NO_CLAIM = "none"


@dataclass(frozen=True)
class Estimator:
    """A deterministic location estimator.

    fn maps a length-n sample sequence to a real estimate. n is either a
    fixed int or "any". batch_fn, when present, maps an (m, n) float array to
    m estimates and must agree with fn row by row.
    """

    label: str
    fn: Callable[[Sequence], object]
    n: object = "any"
    invariance_claim: str = NO_CLAIM
    batch_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, samples):
        samples = tuple(samples)
        if self.n != "any" and len(samples) != self.n:
            raise ValueError(f"{self.label} expects {self.n} samples, got {len(samples)}")
        return self.fn(samples)

    def evaluate_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.n != "any" and x.shape[1] != self.n:
            raise ValueError(f"{self.label} expects {self.n} samples, got {x.shape[1]}")
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(x), dtype=float)
        return np.array([float(self.fn(tuple(row))) for row in x])


@dataclass(frozen=True)
class RandomizedEstimator:
    """A finite mixture of estimators; evaluation first draws a component."""

    components: tuple[tuple[Estimator, float], ...]
    label: str = "mixture"

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = [w for _, w in self.components]
        if any(not (w > 0) for w in weights):
            raise ValueError("mixture weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {sum(weights):.12g}, expected 1")
        fixed = {e.n for e, _ in self.components if e.n != "any"}
        if len(fixed) > 1:
            raise ValueError("mixture components disagree on sample count")

    @property
    def n(self):
        fixed = {e.n for e, _ in self.components if e.n != "any"}
        return fixed.pop() if fixed else "any"

    @property
    def invariance_claim(self) -> str:
        if all(e.invariance_claim == SHIFT_INVARIANT for e, _ in self.components):
            return SHIFT_INVARIANT
        return NO_CLAIM

    @property
    def _cum_weights(self) -> np.ndarray:
        return np.cumsum([w for _, w in self.components])

    def evaluate(self, samples, rng: np.random.Generator):
        u = rng.random()
        idx = int(np.searchsorted(self._cum_weights, u, side="right"))
        idx = min(idx, len(self.components) - 1)
        return self.components[idx][0].evaluate(samples)

    def evaluate_batch(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = rng.random(x.shape[0])
        idx = np.minimum(
            np.searchsorted(self._cum_weights, u, side="right"), len(self.components) - 1
        )
        out = np.empty(x.shape[0])
        for j, (comp, _) in enumerate(self.components):
            mask = idx == j
            if mask.any():
                out[mask] = comp.evaluate_batch(x[mask])
        return out


def mean_estimator(d: Distribution) -> Estimator:
    """Sample mean recentred by the base law's mean. Shift equivariant."""
    mu = d.expected_value()
    mu_f = float(mu)

    def fn(x):
        return sum(x) / len(x) - mu

    return Estimator(
        label="mean",
        fn=fn,
        n="any",
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=lambda x: x.mean(axis=1) - mu_f,
    )


def _window_center_batch(d: ContinuousDistribution, delta: float, x0: np.ndarray) -> np.ndarray:
    """Centers t maximizing the window integral of prod_i f(x0_i + t).

    x0 has first column zero. The derivative of the window integral changes
    sign where the log product density at t+delta and t-delta cross, which is
    monotone for strictly log-concave laws and single-crossing for unimodal
    one-sample inputs, so bisection applies. Ties (flat stretches) resolve to
    the lowest root.
    """
    slo, shi = d.support()
    xmin = x0.min(axis=1)
    xmax = x0.max(axis=1)
    span = xmax - xmin
    width = shi - slo
    if np.any(span >= width):
        raise ValueError("sample spread exceeds the support width; every window has zero mass")
    pos_lo = slo - xmin  # window centers below this give a zero product
    pos_hi = shi - xmax
    mlo, mhi = d.mode_interval()
    lo = np.maximum(mlo - xmax - 2.0 * delta, pos_lo - delta)
    hi = np.minimum(mhi - xmin + 2.0 * delta, pos_hi + delta)

    full_cover = np.zeros(x0.shape[0], dtype=bool)
    if math.isfinite(width):
        full_cover = 2.0 * delta >= (pos_hi - pos_lo)
        # Any center whose window contains the whole positive stretch is optimal.
        lo = np.where(full_cover, 0.5 * (pos_lo + pos_hi), lo)
        hi = np.where(full_cover, 0.5 * (pos_lo + pos_hi), hi)

    def log_product(t):
        return d.logpdf(x0 + t[:, None]).sum(axis=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        for _ in range(200):
            if np.max(hi - lo) <= BISECT_TOL:
                break
            mid = 0.5 * (lo + hi)
            g = log_product(mid + delta) - log_product(mid - delta)
            move_lo = g > 0  # NaN (both sides zero-density) falls through to hi
            lo = np.where(move_lo, mid, lo)
            hi = np.where(move_lo, hi, mid)
    return 0.5 * (lo + hi)


def window_mle_estimator(d: ContinuousDistribution, delta: float) -> Estimator:
    """Estimator that centers the best fixed-width likelihood window.

    Anchored at the first sample, it slides a window of half-width delta over
    the product density of the anchored samples and returns first sample minus
    the best center. For strictly log-concave laws this is the optimal
    shift-equivariant estimator at threshold delta; for laws that are only
    unimodal the same search is exposed but its optimality beyond one sample
    is unverified.
    """
    traits = classify(d)
    if not (traits.log_concave_strict or traits.unimodal):
        raise ValueError("window estimator needs a log-concave or unimodal density")
    delta = float(delta)
    if not delta > 0:
        raise ValueError("delta must be positive")
    suffix = "" if traits.log_concave_strict else ", optimality unverified beyond n=1"

    def batch(x):
        x = np.asarray(x, dtype=float)
        x1 = x[:, 0]
        t = _window_center_batch(d, delta, x - x1[:, None])
        return x1 - t

    return Estimator(
        label=f"window(delta={delta:g}{suffix})",
        fn=lambda x: float(batch(np.asarray([x], dtype=float))[0]),
        n="any",
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=batch,
    )


def min_shift_estimator(delta) -> Estimator:
    """Smallest sample minus delta; matched to laws decreasing on [0, inf)."""
    delta_f = float(delta)

    def fn(x):
        return min(x) - delta

    return Estimator(
        label=f"min_shift(delta={delta_f:g})",
        fn=fn,
        n="any",
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=lambda x: x.min(axis=1) - delta_f,
    )


def discrete_one_sample_estimator(d: FiniteAtoms, delta, *, closed_interval: bool = False) -> Estimator:
    """Sample minus the center of the heaviest width-2*delta atom window.

    The center comes from the discrete window bound, so the estimator's exact
    quality equals that bound at every shift.
    """
    from .bounds import window_bound_one_sample  # deferred: bounds builds estimators too

    if not isinstance(d, FiniteAtoms):
        raise TypeError("expected a finite atomic law")
    report = window_bound_one_sample(d, delta, closed_interval=closed_interval)
    center = report.witness
    center_f = float(center)

    def fn(x):
        return x[0] - center

    return Estimator(
        label=f"discrete_window(center={center_f:g})",
        fn=fn,
        n=1,
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=lambda x: x[:, 0] - center_f,
    )


def _all_close(values, exact: bool) -> bool:
    first = values[0]
    if exact:
        return all(v == first for v in values)
    return all(abs(float(v) - float(first)) <= MATCH_ATOL for v in values)


def discrete_n_sample_estimator(d: FiniteAtoms, delta, n: int) -> Estimator:
    """Exact shift recovery for atom sets with all pairwise distances distinct.

    With two distinct sample values the shift is pinned uniquely: subtracting
    a candidate atom from the first sample must land every sample back on an
    atom. All-equal samples fall back to the one-sample window rule applied to
    the common value.
    """
    traits = classify(d)
    if not traits.discrete:
        raise TypeError("expected a finite atomic law")
    if not traits.distinct_pairwise_distances:
        raise ValueError("atom locations must have distinct pairwise distances")
    if n < 1:
        raise ValueError("n must be at least 1")
    from .bounds import window_bound_one_sample

    center = window_bound_one_sample(d, delta).witness
    locs = d.locations

    def matches_atom(value, exact):
        if exact:
            return any(value == z for z in locs)
        return any(abs(float(value) - float(z)) <= MATCH_ATOL for z in locs)

    def fn(x):
        exact = is_exact(*x) and is_exact(*locs)
        if _all_close(x, exact):
            return x[0] - center
        for z in locs:
            candidate = x[0] - z
            if all(matches_atom(v - candidate, exact) for v in x):
                return candidate
        raise ValueError("no shift places every sample on an atom of the base law")

    return Estimator(
        label=f"discrete_exact(n={n})",
        fn=fn,
        n=n,
        invariance_claim=SHIFT_INVARIANT,
    )


def invariant_extension(f0: Callable[[tuple], object], n: int) -> Estimator:
    """Extend a rule defined on first-coordinate-zero vectors equivariantly.

    f0 sees the samples anchored so the first coordinate is zero and returns
    the negated estimate there; the extension is first sample minus f0 of the
    anchored vector, which is shift equivariant by construction.
    """
    if n < 1:
        raise ValueError("n must be at least 1")

    def fn(x):
        first = x[0]
        return first - f0(tuple(v - first for v in x))

    def batch(x):
        anchored = x - x[:, :1]
        return x[:, 0] - np.array([float(f0(tuple(row))) for row in anchored])

    return Estimator(
        label="invariant_extension",
        fn=fn,
        n=n,
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=batch,
    )


def constant_estimator(value, n="any") -> Estimator:
    """Always guesses the same point; the canonical non-equivariant baseline."""
    value_f = float(value)
    return Estimator(
        label=f"constant({value_f:g})",
        fn=lambda x: value,
        n=n,
        invariance_claim=NO_CLAIM,
        batch_fn=lambda x: np.full(x.shape[0], value_f),
    )


def mixture(components: Sequence[tuple[Estimator, float]], label: str = "mixture") -> RandomizedEstimator:
    """Weighted randomization over estimators; weights must sum to 1."""
    return RandomizedEstimator(components=tuple(components), label=label)
