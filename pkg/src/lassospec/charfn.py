"""Characteristic function of the lasso boundary value problem and its real zeros.

delta(lambda) vanishes exactly at the eigenvalues of -y'' + q y = lambda y on
the lasso graph with Kirchhoff matching at the internal vertex and a Neumann
condition at the free end.  The zero finder scans in rho = sqrt(lambda) for
lambda > 0 (zeros are asymptotically equally spaced in rho) and in lambda on
the sub-zero window, then refines sign-change brackets by bisection and
tangential (double) zeros by golden section plus a derivative-sign polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .graph_model import LassoProblem
from .propagator import propagate_many

# refinement tolerances (relative to 1 + |lambda|)
BISECT_WIDTH_REL = 1e-12
MERGE_REL = 1e-10
# dip detector: candidate cut, acceptance threshold and ambiguity band,
# all relative to the local |delta| scale
DIP_CANDIDATE_REL = 1e-3
DIP_ACCEPT_REL = 1e-8
DIP_AMBIGUOUS_REL = 1e-5

DEFAULT_SCAN_DENSITY = 64


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with multiplicities, certified up to scan_ceiling."""

    eigenvalues: tuple  # of (lambda, multiplicity)
    scan_ceiling: float
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues",
                           tuple((float(l), int(m)) for l, m in self.eigenvalues))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        lams = [l for l, _ in self.eigenvalues]
        if any(m < 1 for _, m in self.eigenvalues):
            raise ValidationError("multiplicities must be >= 1")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("eigenvalues must be strictly ascending")
        ceil_slack = self.scan_ceiling + 1e-9 * (1 + abs(self.scan_ceiling))
        if lams and lams[-1] > ceil_slack:
            raise ValidationError("eigenvalue above scan ceiling")

    @property
    def count(self) -> int:
        """Number of eigenvalues counted with multiplicity."""
        return sum(m for _, m in self.eigenvalues)

    def flattened(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity, ascending."""
        return np.repeat([l for l, _ in self.eigenvalues],
                         [m for _, m in self.eigenvalues]).astype(float)


def delta_many(problem: LassoProblem, lams: np.ndarray) -> np.ndarray:
    """Characteristic function on an array of real lambdas."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    C1, C1p, _, _ = propagate_many(problem.q1, lams)
    C2, _, S2, S2p = propagate_many(problem.q2, lams)
    return C1 * (C2 + S2p - 2.0) + C1p * S2


def delta(problem: LassoProblem, lam: float) -> float:
    """C1(l1)*(C2(l2) + S2'(l2) - 2) + C1'(l1)*S2(l2) at one real lambda."""
    return float(delta_many(problem, np.array([float(lam)]))[0])


def delta0(l1: float, l2: float, lam) -> np.ndarray | float:
    """Zero-potential characteristic function, in closed form.

    2 cos(rho l1)(cos(rho l2) - 1) - sin(rho l1) sin(rho l2) for lambda >= 0;
    the hyperbolic continuation 2 cosh(mu l1)(cosh(mu l2) - 1)
    + sinh(mu l1) sinh(mu l2) with mu = sqrt(-lambda) below.
    """
    if not (l1 > 0 and l2 > 0):
        raise ValidationError("lengths must be positive")
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty_like(arr)
    pos = arr >= 0
    if np.any(pos):
        r = np.sqrt(arr[pos])
        out[pos] = (2.0 * np.cos(r * l1) * (np.cos(r * l2) - 1.0)
                    - np.sin(r * l1) * np.sin(r * l2))
    if np.any(~pos):
        m = np.sqrt(-arr[~pos])
        out[~pos] = (2.0 * np.cosh(m * l1) * (np.cosh(m * l2) - 1.0)
                     + np.sinh(m * l1) * np.sinh(m * l2))
    return out if np.ndim(lam) else float(out[0])


def spectral_shift_residual(problem: LassoProblem, rho: float) -> float:
    """2 rho (delta - delta0) at lambda = rho^2.

    For large rho this approaches a([q1]) + b([q2]) with the oscillatory
    coefficients a, b of the first-order expansion, which is what the trace
    extraction inverts.
    """
    if rho <= 0:
        raise ValidationError("rho must be positive")
    lam = rho * rho
    return 2.0 * rho * (delta(problem, lam) - delta0(problem.l1, problem.l2, lam))


def scan_floor(problem: LassoProblem) -> float:
    """Crude rigorous lower bound for the spectrum: -(max |q|) - 1."""
    return -problem.max_abs_potential() - 1.0


def find_spectrum(problem: LassoProblem, lambda_max: float,
                  scan_points_per_unit_rho: int = DEFAULT_SCAN_DENSITY) -> Spectrum:
    """All zeros of delta in [scan floor, lambda_max], with multiplicities.

    Sign-change brackets are refined by bisection to a lambda interval of
    width 1e-12*(1+|lambda|).  Tangential zeros (no sign change) are detected
    as deep local minima of |delta|, refined by golden section and polished by
    bisecting a centered difference of delta; they are reported with
    multiplicity 2.  Multiplicity is never reported above 2: the lasso has one
    boundary edge and one loop, so higher apparent multiplicity means the scan
    failed and a warning is attached instead.
    """
    if lambda_max <= 0:
        raise ValidationError("lambda_max must be positive")
    if scan_points_per_unit_rho < 1:
        raise ValidationError("scan density must be >= 1")
    floor = scan_floor(problem)
    density = scan_points_per_unit_rho

    n_neg = max(33, int(round(density * (0.0 - floor))) + 1)
    lam_neg = np.linspace(floor, 0.0, n_neg)[:-1]
    rho_max = math.sqrt(lambda_max)
    n_pos = max(65, int(density * rho_max) + 2)
    rho_grid = np.linspace(0.0, rho_max, n_pos)
    grid = np.concatenate([lam_neg, rho_grid * rho_grid])

    f = delta_many(problem, grid)
    warnings: list[str] = []
    roots: list[tuple[float, int]] = []

    # exact hits (e.g. lambda = 0 for the zero potential)
    hit_idx = np.nonzero(f == 0.0)[0]
    for i in hit_idx:
        if 0 < i < grid.size - 1 and f[i - 1] * f[i + 1] > 0:
            roots.append((float(grid[i]), 2))
        else:
            roots.append((float(grid[i]), 1))

    # sign-change brackets -> vectorized bisection
    br = np.nonzero(f[:-1] * f[1:] < 0)[0]
    if br.size:
        a = grid[br].copy()
        b = grid[br + 1].copy()
        fa = f[br].copy()
        for _ in range(128):
            mid = 0.5 * (a + b)
            width_ok = (b - a) <= BISECT_WIDTH_REL * (1.0 + np.abs(mid))
            if np.all(width_ok):
                break
            fm = delta_many(problem, mid)
            go_left = np.sign(fm) == np.sign(fa)
            go_left &= ~width_ok
            shrink_right = ~go_left & ~width_ok
            a[go_left] = mid[go_left]
            fa[go_left] = fm[go_left]
            b[shrink_right] = mid[shrink_right]
        for x in 0.5 * (a + b):
            roots.append((float(x), 1))

    # tangential-zero candidates: interior |f| local minima without sign change
    dip_roots, dip_warnings = _refine_dips(problem, grid, f)
    roots.extend(dip_roots)
    warnings.extend(dip_warnings)

    roots.sort(key=lambda t: t[0])
    merged: list[tuple[float, int]] = []
    for lam, mult in roots:
        if merged and lam - merged[-1][0] <= MERGE_REL * (1.0 + abs(lam)):
            prev_lam, prev_mult = merged[-1]
            merged[-1] = (prev_lam, min(2, max(prev_mult, mult)))
        else:
            merged.append((lam, mult))
    merged = [(l, m) for l, m in merged
              if floor - 1e-9 <= l <= lambda_max + 1e-9 * (1 + lambda_max)]
    return Spectrum(tuple(merged), float(lambda_max), tuple(warnings))


def _refine_dips(problem, grid, f):
    """Locate double zeros hiding as sign-preserving dips of |delta|."""
    absf = np.abs(f)
    n = grid.size
    interior = np.arange(1, n - 1)
    no_flip = (f[interior - 1] * f[interior] > 0) & (f[interior] * f[interior + 1] > 0)
    is_min = (absf[interior] <= absf[interior - 1]) & (absf[interior] <= absf[interior + 1])
    cand = interior[no_flip & is_min]
    if cand.size == 0:
        return [], []
    half_window = 64
    scales = np.array([
        np.max(absf[max(0, i - half_window):min(n, i + half_window + 1)]) for i in cand
    ])
    keep = absf[cand] <= DIP_CANDIDATE_REL * scales
    cand, scales = cand[keep], scales[keep]
    if cand.size == 0:
        return [], []

    a = grid[cand - 1].copy()
    b = grid[cand + 1].copy()
    # plain golden section on |delta|
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(48):
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        f1 = np.abs(delta_many(problem, x1))
        f2 = np.abs(delta_many(problem, x2))
        left = f1 < f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
    center = 0.5 * (a + b)

    # polish: bisect g(lambda) = delta(lambda+d) - delta(lambda-d), whose sign
    # flips across the extremum; this pins double zeros far better than the
    # golden-section floor of |delta|
    d = 1e-6 * (1.0 + np.abs(center))
    w = np.maximum(4.0 * d, 10.0 * (b - a))
    lo = center - w
    hi = center + w
    g_lo = delta_many(problem, lo + d) - delta_many(problem, lo - d)
    g_hi = delta_many(problem, hi + d) - delta_many(problem, hi - d)
    for _ in range(6):
        unbracketed = np.sign(g_lo) == np.sign(g_hi)
        if not np.any(unbracketed):
            break
        w = np.where(unbracketed, 4.0 * w, w)
        lo = np.where(unbracketed, center - w, lo)
        hi = np.where(unbracketed, center + w, hi)
        g_lo = np.where(unbracketed,
                        delta_many(problem, lo + d) - delta_many(problem, lo - d), g_lo)
        g_hi = np.where(unbracketed,
                        delta_many(problem, hi + d) - delta_many(problem, hi - d), g_hi)
    bracketed = np.sign(g_lo) != np.sign(g_hi)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        gm = delta_many(problem, mid + d) - delta_many(problem, mid - d)
        same = np.sign(gm) == np.sign(g_lo)
        lo = np.where(bracketed & same, mid, lo)
        g_lo = np.where(bracketed & same, gm, g_lo)
        hi = np.where(bracketed & ~same, mid, hi)
    best = np.where(bracketed, 0.5 * (lo + hi), center)

    residual = np.abs(delta_many(problem, best))
    roots, warnings = [], []
    for x, r, s in zip(best, residual, scales):
        if r <= DIP_ACCEPT_REL * s:
            roots.append((float(x), 2))
        elif r <= DIP_AMBIGUOUS_REL * s:
            warnings.append(
                f"ambiguous dip near lambda={x:.6g}: |delta| min {r:.3e} "
                f"against local scale {s:.3e}; possible unresolved close pair")
    return roots, warnings


# --- spectrum file formats (CSV and JSON, shared with the FD oracle) --------

def spectrum_to_csv(spectrum: Spectrum) -> str:
    lines = ["index,lambda,multiplicity"]
    for i, (lam, mult) in enumerate(spectrum.eigenvalues):
        lines.append(f"{i},{lam!r},{mult}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> Spectrum:
    """Read the (index, lambda, multiplicity) schema; ceiling defaults to max lambda."""
    entries = []
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty spectrum file")
    start = 1 if lines[0].lower().startswith("index") else 0
    for ln in lines[start:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValidationError(f"malformed spectrum row: {ln!r}")
        try:
            entries.append((float(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ValidationError(f"malformed spectrum row: {ln!r}") from exc
    if not entries:
        raise ValidationError("spectrum file has no rows")
    ceiling = max(l for l, _ in entries)
    return Spectrum(tuple(entries), ceiling)


def spectrum_to_json_dict(spectrum: Spectrum) -> dict:
    return {
        "eigenvalues": [[lam, mult] for lam, mult in spectrum.eigenvalues],
        "scan_ceiling": spectrum.scan_ceiling,
        "warnings": list(spectrum.warnings),
    }


def spectrum_from_json_dict(data: dict) -> Spectrum:
    return Spectrum(tuple((float(l), int(m)) for l, m in data["eigenvalues"]),
                    float(data["scan_ceiling"]),
                    tuple(data.get("warnings", ())))
