"""Shift estimation on the circle and the coset-pinning averaging argument.

Points live on [0, 1) with arithmetic mod 1 and the wrap-around distance.
Because the circle is a compact group, any estimator can be converted into a
shift-equivariant one that agrees with it on the coset where the first sample
equals a chosen anchor; averaging over anchors shows the best pinned copy is
at least as good as the original estimator's worst case. The checker here
measures that numerically on a grid of anchors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .distributions import _LinearDensityTable
from .estimators import NO_CLAIM, SHIFT_INVARIANT
from .quality import MCConfig, _bernoulli_mc

__all__ = [
    "wrap",
    "circle_distance",
    "CircleDensity",
    "uniform_circle_density",
    "CircleEstimator",
    "constant_circle_estimator",
    "biased_mean_circle_estimator",
    "warped_circle_estimator",
    "invariant_from_coset",
    "circle_quality_at",
    "averaging_check",
    "CircleAveragingReport",
]


def wrap(x):
    """Reduce to the fundamental domain [0, 1)."""
    x = np.asarray(x, dtype=float)
    out = x - np.floor(x)
    # floor(x) can round so that x - floor(x) == 1.0 for tiny negatives
    return np.where(out >= 1.0, out - 1.0, out)


def circle_distance(u, v):
    """Shorter arc between two points; at most 1/2."""
    d = np.abs(wrap(u) - wrap(v))
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class CircleDensity:
    """Piecewise-linear density on the circle given by (position, value) knots.

    Positions must be strictly increasing within [0, 1]; the gap between the
    last knot and the first one (one turn later) is interpolated linearly, so
    the table always covers the full circle. Total mass within 1e-3 of 1 is
    renormalized; larger deviations raise ValueError. Atomic laws on the
    circle are out of scope by construction.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(x), float(f)) for x, f in self.knots)
        if len(knots) < 2:
            raise ValueError("need at least two knots")
        xs = [x for x, _ in knots]
        fs = [f for _, f in knots]
        if any(x < 0.0 or x > 1.0 for x in xs):
            raise ValueError("knot positions must lie in [0, 1]")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot positions must be strictly increasing")
        if any(f < 0 for f in fs):
            raise ValueError("density values must be nonnegative")
        object.__setattr__(self, "knots", knots)
        total = self._raw_table.total
        if total <= 0:
            raise ValueError("density integrates to zero")
        if abs(total - 1.0) >= 1e-3:
            raise ValueError(f"density integrates to {total:.6g}, expected 1 within 0.001")
        if total != 1.0:
            object.__setattr__(self, "knots", tuple((x, f / total) for x, f in knots))
            self.__dict__.pop("_raw_table", None)

    @cached_property
    def _raw_table(self) -> _LinearDensityTable:
        # Unroll one full turn starting at the first knot.
        xs = [x for x, _ in self.knots]
        fs = [f for _, f in self.knots]
        if xs[-1] - xs[0] < 1.0:
            xs = xs + [xs[0] + 1.0]
            fs = fs + [fs[0]]
        return _LinearDensityTable(xs, fs)

    def pdf(self, x):
        t = wrap(x)
        start = self.knots[0][0]
        t = np.where(t < start, t + 1.0, t)
        return self._raw_table.pdf(t)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return wrap(self._raw_table.ppf_mass(u * self._raw_table.total))

    def sample_with_rng(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.ppf(rng.random(shape))


def uniform_circle_density() -> CircleDensity:
    return CircleDensity(knots=((0.0, 1.0), (1.0, 1.0)))


@dataclass(frozen=True)
class CircleEstimator:
    """A guessing rule on circle samples; n is always a fixed count here."""

    label: str
    n: int
    fn: Callable[[tuple], float]
    invariance_claim: str = NO_CLAIM
    batch_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, samples) -> float:
        samples = tuple(samples)
        if len(samples) != self.n:
            raise ValueError(f"{self.label} expects {self.n} samples, got {len(samples)}")
        return float(self.fn(samples))

    def evaluate_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(x), dtype=float)
        return np.array([float(self.fn(tuple(row))) for row in x])


def constant_circle_estimator(value: float, n: int = 1) -> CircleEstimator:
    value = float(wrap(value))
    return CircleEstimator(
        label=f"constant({value:g})",
        n=n,
        fn=lambda x: value,
        invariance_claim=NO_CLAIM,
        batch_fn=lambda x: np.full(x.shape[0], value),
    )


def biased_mean_circle_estimator(bias: float, n: int) -> CircleEstimator:
    """First sample plus the mean signed offset of the rest, plus a bias.

    Offsets are taken in (-1/2, 1/2], so the rule is equivariant under
    rotation; the bias shifts every guess by the same arc.
    """

    def batch(x):
        offsets = wrap(x - x[:, :1]) if x.shape[1] > 1 else np.zeros_like(x)
        signed = np.where(offsets > 0.5, offsets - 1.0, offsets)
        return wrap(x[:, 0] + signed.mean(axis=1) + bias)

    return CircleEstimator(
        label=f"biased_mean(bias={bias:g})",
        n=n,
        fn=lambda s: float(batch(np.asarray([s], dtype=float))[0]),
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=batch,
    )


def warped_circle_estimator(strength: float = 0.25, n: int = 1) -> CircleEstimator:
    """Deliberately non-equivariant: warps the first sample quadratically."""

    def batch(x):
        v = x[:, 0]
        return wrap(v + strength * v * (1.0 - v))

    return CircleEstimator(
        label=f"warped(strength={strength:g})",
        n=n,
        fn=lambda s: float(batch(np.asarray([s], dtype=float))[0]),
        invariance_claim=NO_CLAIM,
        batch_fn=batch,
    )


def invariant_from_coset(e: CircleEstimator, anchor: float, n: int | None = None) -> CircleEstimator:
    """Equivariant copy of e that agrees with it when the first sample is anchor.

    The samples are rotated so the first one lands on the anchor, e is
    evaluated there, and the guess is rotated back. The copy is equivariant
    for every anchor; if e already was, the copy coincides with it.
    """
    n = e.n if n is None else int(n)
    if n != e.n:
        raise ValueError(f"{e.label} expects n={e.n}")
    anchor = float(wrap(anchor))

    def batch(x):
        x = np.asarray(x, dtype=float)
        pinned = wrap(x - x[:, :1] + anchor)
        pinned[:, 0] = anchor  # exact, not through wrap roundoff
        return wrap(x[:, 0] - anchor + e.evaluate_batch(pinned))

    return CircleEstimator(
        label=f"pinned(anchor={anchor:g}, base={e.label})",
        n=n,
        fn=lambda s: float(batch(np.asarray([s], dtype=float))[0]),
        invariance_claim=SHIFT_INVARIANT,
        batch_fn=batch,
    )


def circle_quality_at(
    e: CircleEstimator,
    density: CircleDensity,
    theta: float,
    delta: float,
    mc: MCConfig,
) -> tuple[float, float]:
    """Monte Carlo (q, ci): probability the guess lands within arc delta of theta."""
    delta = float(delta)
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie strictly between 0 and 1/2")
    theta = float(wrap(theta))

    def count(rng, m):
        x = wrap(theta + density.sample_with_rng(rng, (m, e.n)))
        est = e.evaluate_batch(x)
        return int((circle_distance(est, theta) < delta).sum())

    return _bernoulli_mc(count, mc)


@dataclass(frozen=True)
class CircleAveragingReport:
    """Outcome of the anchor-averaging comparison for one estimator."""

    q_e: float
    q_e_ci: float
    theta_argmin: float
    anchor_qualities: tuple[tuple[float, float, float], ...]  # (anchor, q, ci)
    best_anchor: float
    q_best: float
    q_best_ci: float
    average_pinned_quality: float
    holds: bool


def averaging_check(
    e: CircleEstimator,
    density: CircleDensity,
    delta: float,
    anchor_grid: int,
    mc: MCConfig,
) -> CircleAveragingReport:
    """Compare the best coset-pinned copy of e against e's own worst case.

    The worst case of e is measured over a uniform shift grid of the same
    granularity as the anchor grid; each pinned copy is equivariant, so its
    quality is measured once at shift zero. holds records whether the best
    pinned copy is at least e's worst case, within three combined CI
    half-widths.
    """
    if anchor_grid < 8:
        raise ValueError("anchor_grid must be at least 8")
    shifts = [i / anchor_grid for i in range(anchor_grid)]
    q_e = q_e_ci = theta_argmin = None
    for theta in shifts:
        q, ci = circle_quality_at(e, density, theta, delta, mc)
        if q_e is None or q < q_e:
            q_e, q_e_ci, theta_argmin = q, ci, theta
    anchor_rows = []
    for anchor in shifts:
        pinned = invariant_from_coset(e, anchor)
        q, ci = circle_quality_at(pinned, density, 0.0, delta, mc)
        anchor_rows.append((anchor, q, ci))
    best_anchor, q_best, q_best_ci = max(anchor_rows, key=lambda row: row[1])
    average = sum(q for _, q, _ in anchor_rows) / len(anchor_rows)
    holds = q_best >= q_e - 3.0 * (q_e_ci + q_best_ci)
    return CircleAveragingReport(
        q_e=q_e,
        q_e_ci=q_e_ci,
        theta_argmin=theta_argmin,
        anchor_qualities=tuple(anchor_rows),
        best_anchor=best_anchor,
        q_best=q_best,
        q_best_ci=q_best_ci,
        average_pinned_quality=average,
        holds=holds,
    )
