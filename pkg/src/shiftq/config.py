"""Experiment configuration: JSON parsing, validation, serialization.

Configs are plain JSON. Validation is total: every problem in the document is
collected as a (path, message) pair and reported at once through ConfigError,
so a config either parses into a fully validated ExperimentConfig or fails
before any computation starts. Numbers may be given as 'p/q' strings to opt
in to exact rational arithmetic where the computation supports it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .compact_circle import CircleDensity
from .distributions import (
    Distribution,
    Exponential,
    FiniteAtoms,
    Gaussian,
    PiecewiseDensity,
    Uniform,
)
from .quality import MCConfig
from .util import number_repr, parse_number

__all__ = [
    "ConfigError",
    "EstimatorSpec",
    "OutputSpec",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
]

COMMANDS = ("quality", "bounds", "lemma-check", "tree-demo", "circle-avg", "paper-suite")

_ESTIMATOR_KINDS = ("mean", "window_mle", "min_shift", "discrete_mle", "constant", "mixture")
_CIRCLE_ESTIMATOR_KINDS = ("constant", "biased_mean", "warped")


class ConfigError(ValueError):
    """Carries every field-level problem found in a config document."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path}: {message}" for path, message in self.errors))


@dataclass(frozen=True)
class EstimatorSpec:
    """Validated estimator description; construction happens at run time."""

    kind: str
    value: object = None
    bias: float = 0.0
    strength: float = 0.25
    parts: tuple[tuple[float, "EstimatorSpec"], ...] = ()


@dataclass(frozen=True)
class OutputSpec:
    format: str = "json"
    path: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    distribution: Distribution | None = None
    density: CircleDensity | None = None
    estimator: EstimatorSpec | None = None
    delta: object = None
    n: int = 1
    theta_grid: tuple | None = None
    k: int = 6
    radius: int = 8
    anchor_grid: int = 64
    mc: MCConfig = field(default_factory=MCConfig)
    closed_interval: bool = False
    output: OutputSpec = field(default_factory=OutputSpec)


class _Collector:
    def __init__(self):
        self.errors: list[tuple[str, str]] = []

    def add(self, path: str, message: str):
        self.errors.append((path, message))


def _get_number(doc: dict, key: str, path: str, errs: _Collector, *, required=False, default=None):
    if key not in doc:
        if required:
            errs.add(f"{path}{key}", "required field is missing")
        return default
    try:
        return parse_number(doc[key])
    except (ValueError, TypeError, ZeroDivisionError):
        errs.add(f"{path}{key}", f"expected a number or 'p/q' string, got {doc[key]!r}")
        return default


def _get_int(doc: dict, key: str, path: str, errs: _Collector, *, default=None, minimum=None):
    if key not in doc:
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        errs.add(f"{path}{key}", f"expected an integer, got {value!r}")
        return default
    if minimum is not None and value < minimum:
        errs.add(f"{path}{key}", f"must be at least {minimum}")
        return default
    return value


def _build_distribution(spec, path: str, errs: _Collector) -> Distribution | None:
    if not isinstance(spec, dict):
        errs.add(path, "expected an object with a 'family' field")
        return None
    family = spec.get("family")
    try:
        if family == "gaussian":
            return Gaussian(
                mean=float(_get_number(spec, "mean", f"{path}.", errs, default=0.0)),
                sigma=float(_get_number(spec, "sigma", f"{path}.", errs, default=1.0)),
            )
        if family == "exponential":
            return Exponential(rate=float(_get_number(spec, "rate", f"{path}.", errs, default=1.0)))
        if family == "uniform":
            return Uniform(
                lo=float(_get_number(spec, "lo", f"{path}.", errs, default=0.0)),
                hi=float(_get_number(spec, "hi", f"{path}.", errs, default=1.0)),
            )
        if family == "piecewise":
            knots = spec.get("knots")
            if not isinstance(knots, list) or any(
                not isinstance(p, list) or len(p) != 2 for p in knots
            ):
                errs.add(f"{path}.knots", "expected a list of [position, value] pairs")
                return None
            return PiecewiseDensity(knots=tuple((float(x), float(f)) for x, f in knots))
        if family == "atoms":
            points = spec.get("points")
            if not isinstance(points, list) or any(
                not isinstance(p, list) or len(p) != 2 for p in points
            ):
                errs.add(f"{path}.points", "expected a list of [location, mass] pairs")
                return None
            pairs = []
            for i, (z, m) in enumerate(points):
                try:
                    pairs.append((parse_number(z), parse_number(m)))
                except (ValueError, TypeError, ZeroDivisionError):
                    errs.add(f"{path}.points[{i}]", f"expected numbers or 'p/q' strings, got {[z, m]!r}")
            if len(pairs) != len(points):
                return None
            return FiniteAtoms(atoms=tuple(pairs))
    except ValueError as exc:
        errs.add(path, str(exc))
        return None
    errs.add(f"{path}.family", f"unknown family {family!r}")
    return None


def _build_density(spec, path: str, errs: _Collector) -> CircleDensity | None:
    if not isinstance(spec, dict) or not isinstance(spec.get("knots"), list):
        errs.add(path, "expected an object with a 'knots' list of [position, value] pairs")
        return None
    knots = spec["knots"]
    if any(not isinstance(p, list) or len(p) != 2 for p in knots):
        errs.add(f"{path}.knots", "expected [position, value] pairs")
        return None
    try:
        return CircleDensity(knots=tuple((float(x), float(f)) for x, f in knots))
    except ValueError as exc:
        errs.add(path, str(exc))
        return None


def _build_estimator_spec(spec, path: str, errs: _Collector, kinds) -> EstimatorSpec | None:
    if not isinstance(spec, dict):
        errs.add(path, "expected an object with a 'kind' field")
        return None
    kind = spec.get("kind")
    if kind not in kinds:
        errs.add(f"{path}.kind", f"unknown estimator kind {kind!r}; expected one of {kinds}")
        return None
    if kind == "constant":
        value = _get_number(spec, "value", f"{path}.", errs, default=0.0)
        return EstimatorSpec(kind=kind, value=value)
    if kind == "biased_mean":
        bias = _get_number(spec, "bias", f"{path}.", errs, default=0.0)
        return EstimatorSpec(kind=kind, bias=float(bias))
    if kind == "warped":
        strength = _get_number(spec, "strength", f"{path}.", errs, default=0.25)
        return EstimatorSpec(kind=kind, strength=float(strength))
    if kind == "mixture":
        parts = spec.get("parts")
        if not isinstance(parts, list) or not parts:
            errs.add(f"{path}.parts", "mixture needs a nonempty 'parts' list")
            return None
        built = []
        for i, part in enumerate(parts):
            if not isinstance(part, dict):
                errs.add(f"{path}.parts[{i}]", "expected an object with 'weight' and 'estimator'")
                continue
            weight = _get_number(part, "weight", f"{path}.parts[{i}].", errs, required=True)
            inner = _build_estimator_spec(
                part.get("estimator"), f"{path}.parts[{i}].estimator", errs, kinds
            )
            if weight is not None and inner is not None:
                built.append((float(weight), inner))
        if len(built) != len(parts):
            return None
        total = sum(w for w, _ in built)
        if abs(total - 1.0) > 1e-12:
            errs.add(f"{path}.parts", f"mixture weights sum to {total:.12g}, expected 1")
            return None
        return EstimatorSpec(kind=kind, parts=tuple(built))
    return EstimatorSpec(kind=kind)


def _check_rational_mixing(cfg_doc, distribution, delta, errs: _Collector):
    """Atoms either go all-exact (locations and delta rational) or all-float."""
    from numbers import Rational

    if not isinstance(distribution, FiniteAtoms):
        return
    values = list(distribution.locations) + [delta]
    exact_flags = [isinstance(v, Rational) for v in values if v is not None]
    if any(exact_flags) and not all(exact_flags):
        errs.add(
            "delta",
            "rational and float values are mixed; give every atom location and delta "
            "as 'p/q' strings for exact arithmetic, or none of them",
        )


def parse_config(text: str, default_command: str = "quality") -> ExperimentConfig:
    """Parse and validate a JSON config; raises ConfigError with every problem."""
    errs = _Collector()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("/", f"invalid JSON: {exc}")]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([("/", "top level must be a JSON object")])

    command = doc.get("command", default_command)
    if command not in COMMANDS:
        errs.add("command", f"unknown command {command!r}; expected one of {COMMANDS}")
        command = "quality"

    distribution = None
    if "distribution" in doc:
        distribution = _build_distribution(doc["distribution"], "distribution", errs)
    density = None
    if "density" in doc:
        density = _build_density(doc["density"], "density", errs)

    estimator = None
    if "estimator" in doc:
        kinds = _CIRCLE_ESTIMATOR_KINDS if command == "circle-avg" else _ESTIMATOR_KINDS
        estimator = _build_estimator_spec(doc["estimator"], "estimator", errs, kinds)

    delta = _get_number(doc, "delta", "", errs)
    if delta is not None and not float(delta) > 0:
        errs.add("delta", "delta must be positive")

    n = _get_int(doc, "n", "", errs, default=1, minimum=1)
    k = _get_int(doc, "k", "", errs, default=6, minimum=1)
    radius = _get_int(doc, "radius", "", errs, default=8, minimum=2)
    anchor_grid = _get_int(doc, "anchor_grid", "", errs, default=64, minimum=8)

    theta_grid = None
    if doc.get("theta_grid") is not None:
        raw = doc["theta_grid"]
        if not isinstance(raw, list) or not raw:
            errs.add("theta_grid", "expected a nonempty list of shifts")
        else:
            grid = []
            for i, value in enumerate(raw):
                try:
                    grid.append(parse_number(value))
                except (ValueError, TypeError, ZeroDivisionError):
                    errs.add(f"theta_grid[{i}]", f"expected a number, got {value!r}")
            theta_grid = tuple(grid)

    mc_doc = doc.get("mc", {})
    if not isinstance(mc_doc, dict):
        errs.add("mc", "expected an object")
        mc_doc = {}
    trials = _get_int(mc_doc, "trials", "mc.", errs, default=100_000, minimum=100)
    seed = _get_int(mc_doc, "seed", "mc.", errs, default=42)
    parallelism = _get_int(mc_doc, "parallelism", "mc.", errs, default=1, minimum=1)
    ci_level = _get_number(mc_doc, "ci_level", "mc.", errs, default=0.99)
    try:
        mc = MCConfig(trials=trials, seed=seed, parallelism=parallelism, ci_level=float(ci_level))
    except ValueError as exc:
        errs.add("mc", str(exc))
        mc = MCConfig()

    closed = doc.get("closed_interval", False)
    if not isinstance(closed, bool):
        errs.add("closed_interval", f"expected true or false, got {closed!r}")
        closed = False

    out_doc = doc.get("output", {})
    if not isinstance(out_doc, dict):
        errs.add("output", "expected an object")
        out_doc = {}
    fmt = out_doc.get("format", "json")
    if fmt not in ("json", "csv"):
        errs.add("output.format", f"expected 'json' or 'csv', got {fmt!r}")
        fmt = "json"
    path = out_doc.get("path")
    if path is not None and not isinstance(path, str):
        errs.add("output.path", "expected a string path")
        path = None

    _check_rational_mixing(doc, distribution, delta, errs)

    if errs.errors:
        raise ConfigError(errs.errors)
    return ExperimentConfig(
        command=command,
        distribution=distribution,
        density=density,
        estimator=estimator,
        delta=delta,
        n=n,
        theta_grid=theta_grid,
        k=k,
        radius=radius,
        anchor_grid=anchor_grid,
        mc=mc,
        closed_interval=closed,
        output=OutputSpec(format=fmt, path=path),
    )


def _distribution_doc(d: Distribution) -> dict:
    if isinstance(d, Gaussian):
        return {"family": "gaussian", "mean": d.mean, "sigma": d.sigma}
    if isinstance(d, Exponential):
        return {"family": "exponential", "rate": d.rate}
    if isinstance(d, Uniform):
        return {"family": "uniform", "lo": d.lo, "hi": d.hi}
    if isinstance(d, PiecewiseDensity):
        return {"family": "piecewise", "knots": [[x, f] for x, f in d.knots]}
    if isinstance(d, FiniteAtoms):
        return {
            "family": "atoms",
            "points": [[_number_doc(z), _number_doc(m)] for z, m in d.atoms],
        }
    raise TypeError(f"cannot serialize distribution {d!r}")


def _number_doc(value):
    if isinstance(value, Fraction):
        return number_repr(value)
    return value


def _estimator_doc(spec: EstimatorSpec) -> dict:
    if spec.kind == "constant":
        return {"kind": spec.kind, "value": _number_doc(spec.value)}
    if spec.kind == "biased_mean":
        return {"kind": spec.kind, "bias": spec.bias}
    if spec.kind == "warped":
        return {"kind": spec.kind, "strength": spec.strength}
    if spec.kind == "mixture":
        return {
            "kind": spec.kind,
            "parts": [
                {"weight": w, "estimator": _estimator_doc(inner)} for w, inner in spec.parts
            ],
        }
    return {"kind": spec.kind}


def serialize_config(cfg: ExperimentConfig) -> dict:
    """JSON-ready document; parse_config(json.dumps(result)) round-trips."""
    doc: dict = {"command": cfg.command}
    if cfg.distribution is not None:
        doc["distribution"] = _distribution_doc(cfg.distribution)
    if cfg.density is not None:
        doc["density"] = {"knots": [[x, f] for x, f in cfg.density.knots]}
    if cfg.estimator is not None:
        doc["estimator"] = _estimator_doc(cfg.estimator)
    if cfg.delta is not None:
        doc["delta"] = _number_doc(cfg.delta)
    doc["n"] = cfg.n
    if cfg.theta_grid is not None:
        doc["theta_grid"] = [_number_doc(t) for t in cfg.theta_grid]
    doc["k"] = cfg.k
    doc["radius"] = cfg.radius
    doc["anchor_grid"] = cfg.anchor_grid
    doc["mc"] = {
        "trials": cfg.mc.trials,
        "seed": cfg.mc.seed,
        "parallelism": cfg.mc.parallelism,
        "ci_level": cfg.mc.ci_level,
    }
    doc["closed_interval"] = cfg.closed_interval
    doc["output"] = {"format": cfg.output.format, "path": cfg.output.path}
    return doc
