"""Fundamental solutions of -y'' + q y = lambda y across one edge.

C and S are the cosine- and sine-type solutions with C(0)=S'(0)=1,
C'(0)=S(0)=0.  Each grid cell of the potential carries its exact
constant-potential transfer matrix, expressed through the even entire
functions cs(z) = cos(sqrt z) and sn(z) = sin(sqrt z)/sqrt z of
z = (lambda - v) h^2, so the result is smooth in lambda across lambda = v
with no branch artifacts.  The cell propagator is exact in lambda, so grid
resolution is needed only for the potential, not for oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .graph_model import EdgePotential

# |z| below which cs/sn switch from direct trig/hyperbolic evaluation to a
# truncated Taylor series; the retained terms keep the switchover error
# below 1e-15.
_SERIES_SWITCH = 1e-4

WRONSKIAN_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralParameter:
    """Real spectral parameter lambda with its derived rho = sqrt(lambda)."""

    lam: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValidationError("spectral parameter must be finite")

    @property
    def rho(self) -> float | None:
        """sqrt(lambda) for lambda >= 0; None below (work directly in lambda)."""
        return math.sqrt(self.lam) if self.lam >= 0 else None


@dataclass(frozen=True)
class FundamentalValues:
    """(C, C', S, S') at the right endpoint of an edge for a fixed lambda."""

    C: float
    Cp: float
    S: float
    Sp: float

    def wronskian_defect(self) -> float:
        """|C S' - C' S - 1|, zero for the exact flow."""
        return abs(self.C * self.Sp - self.Cp * self.S - 1.0)


def _cs_sn(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """cos(sqrt z) and sin(sqrt z)/sqrt z, branch-free for real z."""
    cs = np.empty_like(z)
    sn = np.empty_like(z)
    big = z > _SERIES_SWITCH
    neg = z < -_SERIES_SWITCH
    mid = ~(big | neg)
    if np.any(big):
        w = np.sqrt(z[big])
        cs[big] = np.cos(w)
        sn[big] = np.sin(w) / w
    if np.any(neg):
        w = np.sqrt(-z[neg])
        cs[neg] = np.cosh(w)
        sn[neg] = np.sinh(w) / w
    if np.any(mid):
        t = z[mid]
        cs[mid] = 1.0 - t / 2.0 * (1.0 - t / 12.0 * (1.0 - t / 30.0 * (1.0 - t / 56.0)))
        sn[mid] = 1.0 - t / 6.0 * (1.0 - t / 20.0 * (1.0 - t / 42.0 * (1.0 - t / 72.0)))
    return cs, sn


def propagate_many(q: EdgePotential, lams: np.ndarray):
    """Vectorized transfer across the whole edge for an array of lambdas.

    Returns arrays (C, Cp, S, Sp) evaluated at x = length.  Raises
    NumericalError when the sweep overflows (very negative lambda on a
    long edge).
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if not np.all(np.isfinite(lams)):
        raise ValidationError("lambda values must be finite")
    h = q.h
    C = np.ones_like(lams)
    Cp = np.zeros_like(lams)
    S = np.zeros_like(lams)
    Sp = np.ones_like(lams)
    with np.errstate(over="ignore", invalid="ignore"):
        for v in q.samples:
            z = (lams - v) * (h * h)
            cs, sn = _cs_sn(z)
            hsn = h * sn
            # C' picks up -omega^2 * h * sn with omega^2 = lambda - v = z/h^2
            msn = -(lams - v) * hsn
            C, Cp = cs * C + hsn * Cp, msn * C + cs * Cp
            S, Sp = cs * S + hsn * Sp, msn * S + cs * Sp
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(Cp))
            and np.all(np.isfinite(S)) and np.all(np.isfinite(Sp))):
        bad = ~(np.isfinite(C) & np.isfinite(Cp) & np.isfinite(S) & np.isfinite(Sp))
        lam_bad = lams[bad][0]
        scale = np.nanmax(np.abs(np.concatenate([C, Cp, S, Sp])))
        raise NumericalError(
            f"propagation overflow at lambda={lam_bad:g} on edge of length "
            f"{q.length:g} (max finite magnitude {scale:.3e})")
    return C, Cp, S, Sp


def propagate(q: EdgePotential, lam: float) -> FundamentalValues:
    """Fundamental values (C, C', S, S') at x = length for one real lambda."""
    C, Cp, S, Sp = propagate_many(q, np.array([float(lam)]))
    out = FundamentalValues(float(C[0]), float(Cp[0]), float(S[0]), float(Sp[0]))
    tol = WRONSKIAN_RTOL * max(1.0, abs(out.C * out.Sp))
    if out.wronskian_defect() > tol:
        raise NumericalError(
            f"Wronskian identity violated at lambda={lam:g}: "
            f"defect {out.wronskian_defect():.3e} > {tol:.3e}")
    return out


@dataclass(frozen=True)
class AsymptoticsTable:
    """Residuals of the large-rho expansions of (C, C', S, S') at x = l."""

    rho: np.ndarray
    r_C: np.ndarray
    r_Cp: np.ndarray
    r_S: np.ndarray
    r_Sp: np.ndarray

    def rows(self):
        for i in range(self.rho.size):
            yield (float(self.rho[i]), float(self.r_C[i]), float(self.r_Cp[i]),
                   float(self.r_S[i]), float(self.r_Sp[i]))


def verify_asymptotics(q: EdgePotential, rho_list) -> AsymptoticsTable:
    """Scaled deviations from the leading large-rho behaviour, for decay inspection.

    For each rho the four residuals compare the propagated values against
    cos(rho l), -rho sin(rho l), sin(rho l)/rho, cos(rho l) plus the first
    integral-of-q correction; the scalings (rho, 1, rho^2, rho) turn the
    expected decay into a shrinking trend.
    """
    rho = np.asarray(list(rho_list), dtype=float)
    if rho.size == 0:
        raise ValidationError("rho_list must be non-empty")
    if np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
        raise ValidationError("rho_list must be positive and increasing")
    l = q.length
    iq = q.integral()
    C, Cp, S, Sp = propagate_many(q, rho * rho)
    cos_l = np.cos(rho * l)
    sin_l = np.sin(rho * l)
    r_C = rho * np.abs(C - cos_l - sin_l / (2 * rho) * iq)
    r_Cp = np.abs(Cp + rho * sin_l - cos_l / 2 * iq)
    r_S = rho * rho * np.abs(S - sin_l / rho + cos_l / (2 * rho * rho) * iq)
    r_Sp = rho * np.abs(Sp - cos_l - sin_l / (2 * rho) * iq)
    return AsymptoticsTable(rho, r_C, r_Cp, r_S, r_Sp)
