"""Word algebra and exact estimation on the trivalent tree.

The sample space is the group generated by three involutive letters a, b, c
with no further relations; elements are reduced words (no letter appears
twice in a row) and the empty word is the identity. Its Cayley graph is the
trivalent tree, and the graph distance plays the role the threshold plays on
the line: with a threshold below 1, success means guessing the shifted point
exactly.

Everything here is exact; qualities are Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .util import EnumerationLimitError

__all__ = [
    "GENERATORS",
    "IDENTITY",
    "reduce_word",
    "multiply",
    "inverse",
    "distance",
    "ball",
    "TreeDistribution",
    "standard_tree_distribution",
    "TreeEstimator",
    "truncation_estimator",
    "left_translate_estimator",
    "right_translate_estimator",
    "table_estimator",
    "evaluate_tree_estimator",
    "exact_quality_tree",
    "quality_inf_ball",
]

GENERATORS = "abc"
IDENTITY = ""

_BALL_CAP = 1_000_000


def _check_word(w: str) -> str:
    for ch in w:
        if ch not in GENERATORS:
            raise ValueError(f"letter {ch!r} is not one of {GENERATORS!r}")
    for x, y in zip(w, w[1:]):
        if x == y:
            raise ValueError(f"word {w!r} is not reduced")
    return w


def reduce_word(letters: str) -> str:
    """Cancel adjacent equal letters until none remain."""
    out: list[str] = []
    for ch in letters:
        if ch not in GENERATORS:
            raise ValueError(f"letter {ch!r} is not one of {GENERATORS!r}")
        if out and out[-1] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def multiply(u: str, v: str) -> str:
    """Concatenate two reduced words and cancel across the seam."""
    _check_word(u)
    _check_word(v)
    out = list(u)
    for ch in v:
        if out and out[-1] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def inverse(u: str) -> str:
    """Each letter is its own inverse, so reversal inverts the word."""
    return _check_word(u)[::-1]


def distance(u: str, v: str) -> int:
    """Graph distance on the tree: length of u^-1 v."""
    return len(multiply(inverse(u), v))


def ball(radius: int) -> list[str]:
    """All reduced words of length at most radius, in breadth-first order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    words = [IDENTITY]
    frontier = [IDENTITY]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for ch in GENERATORS:
                if not w or w[-1] != ch:
                    nxt.append(w + ch)
        words.extend(nxt)
        frontier = nxt
        if len(words) > _BALL_CAP:
            raise EnumerationLimitError(f"ball exceeds {_BALL_CAP} words")
    return words


@dataclass(frozen=True)
class TreeDistribution:
    """Finitely supported law on reduced words; masses are exact Fractions."""

    atoms: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((w, Fraction(m)) for w, m in self.atoms)
        words = [w for w, _ in atoms]
        for w in words:
            _check_word(w)
        if len(set(words)) != len(words):
            raise ValueError("atom words must be distinct")
        if any(m <= 0 for _, m in atoms):
            raise ValueError("atom masses must be positive")
        total = sum(m for _, m in atoms)
        if total != 1:
            raise ValueError(f"atom masses sum to {total}, expected 1")
        object.__setattr__(self, "atoms", atoms)


def standard_tree_distribution() -> TreeDistribution:
    """Equal mass 1/3 on each single-letter word."""
    third = Fraction(1, 3)
    return TreeDistribution(atoms=(("a", third), ("b", third), ("c", third)))


@dataclass(frozen=True)
class TreeEstimator:
    """A guessing rule on words.

    kind selects the behaviour: "truncation" drops the last letter (the empty
    word maps to "a"), "left_translate" returns x * word (the general form of
    a rule constant on left cosets), "right_translate" returns word * x, and
    "table" looks x up in a finite mapping with a default for unmapped words.
    """

    kind: str
    word: str = IDENTITY
    table: Mapping[str, str] | None = None
    default: str = IDENTITY


def truncation_estimator() -> TreeEstimator:
    return TreeEstimator(kind="truncation")


def left_translate_estimator(word: str) -> TreeEstimator:
    return TreeEstimator(kind="left_translate", word=_check_word(word))


def right_translate_estimator(word: str) -> TreeEstimator:
    return TreeEstimator(kind="right_translate", word=_check_word(word))


def table_estimator(table: Mapping[str, str], default: str = IDENTITY) -> TreeEstimator:
    return TreeEstimator(kind="table", table=dict(table), default=_check_word(default))


def evaluate_tree_estimator(e: TreeEstimator, x: str) -> str:
    _check_word(x)
    if e.kind == "truncation":
        return x[:-1] if x else "a"
    if e.kind == "left_translate":
        return multiply(x, e.word)
    if e.kind == "right_translate":
        return multiply(e.word, x)
    if e.kind == "table":
        return e.table.get(x, e.default)
    raise ValueError(f"unknown tree estimator kind {e.kind!r}")


def exact_quality_tree(e: TreeEstimator, mu: TreeDistribution, theta: str, delta: Fraction) -> Fraction:
    """Exact success probability at one shift.

    delta must lie strictly between 0 and 1; distances are integers, so
    success is exact equality with the shift.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie strictly between 0 and 1")
    _check_word(theta)
    total = Fraction(0)
    for z, m in mu.atoms:
        if evaluate_tree_estimator(e, multiply(theta, z)) == theta:
            total += m
    return total


def quality_inf_ball(
    e: TreeEstimator, mu: TreeDistribution, delta: Fraction, radius: int
) -> tuple[Fraction, str]:
    """Minimum exact quality over all shifts in the radius ball.

    For the built-in estimator kinds the per-shift quality depends only on
    the shift's length and last letter, so the ball minimum for radius >= 2
    already equals the infimum over the whole group.
    """
    if radius < 2:
        raise ValueError("radius must be at least 2")
    best_q = None
    best_theta = IDENTITY
    for theta in ball(radius):
        q = exact_quality_tree(e, mu, theta, delta)
        if best_q is None or q < best_q:
            best_q = q
            best_theta = theta
    return best_q, best_theta
