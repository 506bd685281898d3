"""Problem data model: lasso-graph geometry, edge potentials, configuration I/O.

The lasso graph is one boundary segment of length ``l1`` joined to one loop of
length ``l2`` at a single internal vertex.  A potential lives on each edge as
midpoint samples of a piecewise-constant approximation on a uniform grid; that
representation makes the transfer-matrix propagation exact per cell.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError

# LengthRatio.kind values
EQUAL = "equal"
RATIONAL = "rational"
IRRATIONAL = "irrational"


@dataclass(frozen=True)
class EdgePotential:
    """Real-valued potential on one edge, sampled at cell midpoints.

    ``samples[i]`` is the value at ``x = (i + 1/2) * length / n``.
    """

    length: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValidationError(f"non-positive length: {self.length}")
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValidationError("potential needs at least one midpoint sample")
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("non-finite sample in potential")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def h(self) -> float:
        """Cell width of the sampling grid."""
        return self.length / self.samples.size

    def integral(self) -> float:
        """Midpoint-rule integral of the potential over the edge."""
        return self.h * float(np.sum(self.samples))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def reversed(self) -> "EdgePotential":
        """Potential of the direction-reversed edge, q(length - x)."""
        return EdgePotential(self.length, self.samples[::-1].copy())

    def shifted(self, c: float) -> "EdgePotential":
        return EdgePotential(self.length, self.samples + c)


@dataclass(frozen=True)
class LassoProblem:
    """Full input datum: potential q1 on the boundary edge, q2 on the loop."""

    q1: EdgePotential
    q2: EdgePotential

    @property
    def l1(self) -> float:
        return self.q1.length

    @property
    def l2(self) -> float:
        return self.q2.length

    def max_abs_potential(self) -> float:
        return max(self.q1.max_abs(), self.q2.max_abs())


@dataclass(frozen=True)
class LengthRatio:
    """Classification of l2/l1 as equal, rational k2/k1, or irrational.

    Floating-point lengths are never exactly rational, so the classification
    is relative to ``tolerance`` and a denominator cap; it selects which set
    of evaluation sequences the trace extraction uses.
    """

    kind: str
    l1: float
    l2: float
    tolerance: float
    k1: int | None = None
    k2: int | None = None
    l: float | None = None  # common unit length, l1 = k1*l and l2 = k2*l

    def __post_init__(self):
        if self.kind not in (EQUAL, RATIONAL, IRRATIONAL):
            raise ValidationError(f"unknown ratio kind: {self.kind}")
        if self.kind == RATIONAL:
            if not (self.k1 and self.k2 and self.l and self.l > 0):
                raise ValidationError("rational ratio requires k1, k2, l")
            if math.gcd(self.k1, self.k2) != 1:
                raise ValidationError("k1, k2 must be coprime")
            err = abs(self.l1 - self.k1 * self.l) + abs(self.l2 - self.k2 * self.l)
            if err > self.tolerance * (self.l1 + self.l2) * (1 + 1e-12):
                raise ValidationError("rational ratio does not satisfy its tolerance")


def classify_ratio(l1: float, l2: float, tol: float = 1e-9,
                   max_denominator: int = 64) -> LengthRatio:
    """Classify the length ratio l2/l1 for the trace-extraction case split.

    Returns Equal when the lengths agree within ``tol*(l1+l2)``; otherwise
    searches the continued-fraction convergents of l2/l1 for the smallest
    k1 + k2 <= 2*max_denominator reproducing both lengths from a common unit
    within the tolerance; otherwise Irrational.
    """
    if not (l1 > 0 and l2 > 0):
        raise ValidationError("lengths must be positive")
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    if abs(l1 - l2) <= tol * (l1 + l2):
        return LengthRatio(EQUAL, l1, l2, tol)
    budget = tol * (l1 + l2)
    for k2, k1 in _convergents(l2 / l1, 2 * max_denominator):
        if k1 + k2 > 2 * max_denominator:
            break
        unit = (l1 + l2) / (k1 + k2)
        if abs(l1 - k1 * unit) + abs(l2 - k2 * unit) <= budget:
            return LengthRatio(RATIONAL, l1, l2, tol, k1=k1, k2=k2, l=unit)
    return LengthRatio(IRRATIONAL, l1, l2, tol)


def _convergents(x: float, cap: int):
    """Continued-fraction convergents p/q of x > 0 with p + q <= cap."""
    p_prev, q_prev = 1, 0
    p, q = int(math.floor(x)), 1
    rem = x - math.floor(x)
    yield p, q
    for _ in range(64):
        if rem < 1e-15:
            return
        x = 1.0 / rem
        a = int(math.floor(x))
        rem = x - a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        if p + q > cap:
            return
        yield p, q


# --- built-in potential families -------------------------------------------

def _family_constant(x, length, params):
    return np.full_like(x, float(params["value"]))


def _family_sine(x, length, params):
    a = float(params["amplitude"])
    periods = float(params["periods"])
    return a * np.sin(2 * np.pi * periods * x / length)


def _family_bump(x, length, params):
    # raised-cosine bump; closed-form integral = height*width/2
    center = float(params["center"])
    width = float(params["width"])
    height = float(params["height"])
    if width <= 0:
        raise ConfigError("bump width must be positive")
    u = 2.0 * (x - center) / width
    out = np.where(np.abs(u) < 1.0, 0.5 * height * (1.0 + np.cos(np.pi * u)), 0.0)
    return out


_FAMILIES = {"constant": _family_constant, "sine": _family_sine, "bump": _family_bump}


def expand_family(spec: dict, length: float, n: int) -> EdgePotential:
    """Expand a potential family description to midpoint samples."""
    family = spec.get("family")
    if family == "samples":
        values = spec.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("samples family requires a non-empty 'values' array")
        return EdgePotential(length, np.asarray(values, dtype=float))
    fn = _FAMILIES.get(family)
    if fn is None:
        raise ConfigError(f"unknown potential family: {family!r}")
    if n < 1:
        raise ConfigError("resolution n must be >= 1")
    x = (np.arange(n) + 0.5) * (length / n)
    try:
        samples = fn(x, length, spec)
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc} for family {family!r}") from exc
    return EdgePotential(length, samples)


def load_problem(config_text: str) -> LassoProblem:
    """Parse and validate a problem configuration (UTF-8 JSON text).

    Schema: {"l1": number, "l2": number, "n": integer,
             "q1": {"family": ...}, "q2": {"family": ...}}.
    """
    try:
        cfg = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("l1", "l2", "q1", "q2"):
        if key not in cfg:
            raise ConfigError(f"config missing required key {key!r}")
    l1, l2 = cfg["l1"], cfg["l2"]
    for name, val in (("l1", l1), ("l2", l2)):
        if not isinstance(val, (int, float)) or not math.isfinite(val) or val <= 0:
            raise ConfigError(f"non-positive length: {name}={val!r}")
    n = int(cfg.get("n", 256))
    try:
        q1 = expand_family(cfg["q1"], float(l1), n)
        q2 = expand_family(cfg["q2"], float(l2), n)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    return LassoProblem(q1, q2)


def problem_to_config(problem: LassoProblem) -> dict:
    """Serialize a problem to a config dict; sample arrays round-trip exactly."""
    return {
        "l1": problem.l1,
        "l2": problem.l2,
        "n": problem.q1.n,
        "q1": {"family": "samples", "values": problem.q1.samples.tolist()},
        "q2": {"family": "samples", "values": problem.q2.samples.tolist()},
    }


def zero_problem(l1: float, l2: float, n: int = 8) -> LassoProblem:
    """The zero-potential problem on the given geometry."""
    return LassoProblem(
        EdgePotential(l1, np.zeros(n)),
        EdgePotential(l2, np.zeros(n)),
    )
