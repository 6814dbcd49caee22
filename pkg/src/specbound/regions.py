"""Exponent functions and complex-plane regions for spectral enclosures.

The enclosure predicate is a union of closed discs around the powers of the
free frequencies and a central region controlled by a piecewise Lebesgue
exponent.  The exterior region used for resolvent estimates is bounded by a
conjugate pair of arcs (lambda +/- i)**alpha, lambda >= cot(pi/alpha), taken
with the principal branch; its membership test is a crossing-parity test
against an adaptively refined polyline.

All types are immutable after construction and all functions are pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AdmissibilityError",
    "Disc",
    "EnclosureRegion",
    "Exponents",
    "MembershipReport",
    "XiIndeterminateError",
    "XiRegion",
    "enclosure_contains",
    "gamma_point",
    "gamma_polyline",
    "lebesgue_pair",
    "sigma_exponent",
    "xi_contains",
    "z_star",
]


class AdmissibilityError(ValueError):
    """Raised when (d, q, alpha) violates the exponent admissibility window."""


class XiIndeterminateError(RuntimeError):
    """Crossing count failed to stabilize under maximal refinement."""


def _check_admissible(d: int, q: float, alpha: float, relaxed: bool) -> None:
    if d < 1 or int(d) != d:
        raise AdmissibilityError(f"dimension d={d} must be a positive integer")
    if alpha <= 0:
        raise AdmissibilityError(f"alpha={alpha} must be positive")
    if q < 1:
        raise AdmissibilityError(f"q={q} violates q >= 1")
    if d == alpha and math.isinf(q):
        raise AdmissibilityError("q must be finite when d == alpha")
    if d > alpha:
        lower = d / 2 if relaxed else d / alpha
        if relaxed:
            if q < lower:
                raise AdmissibilityError(
                    f"q={q} violates relaxed lower edge q >= d/2 = {lower}"
                )
        elif q <= lower:
            raise AdmissibilityError(
                f"q={q} violates lower edge q > d/alpha = {lower}"
            )
        upper = 2 * d / (d - alpha)
        if q > upper:
            raise AdmissibilityError(
                f"q={q} violates upper edge q <= 2d/(d-alpha) = {upper}"
            )
    # d <= alpha: any 1 <= q < inf is admissible (finite q of math.inf allowed
    # through the second sigma branch).


def sigma_exponent(d: int, q: float, alpha: float, *, relaxed: bool = False) -> float:
    """Piecewise exponent controlling disc radii, with breakpoint q=(d+1)/2.

    The two branches are written as (d-q)/(2q) and (d-1)/(4q) so that they
    agree bit-for-bit at the breakpoint.  ``relaxed`` lowers the admissibility
    edge to q >= d/2 (the classical alpha=2 window).
    """
    _check_admissible(d, q, alpha, relaxed)
    if math.isinf(q):
        return 0.0
    breakpoint_q = (d + 1) / 2
    if q <= breakpoint_q:
        return (d - q) / (2 * q)
    return (d - 1) / (4 * q)


def lebesgue_pair(q: float) -> tuple[float, float]:
    """Solve 1/p + 1/p' = 1 and 1/q = 1/p - 1/p' for (p, p').

    Degenerate at q <= 1 (p' would be infinite); q = inf gives (2, 2).
    """
    if math.isinf(q):
        return 2.0, 2.0
    if q <= 1:
        raise ValueError(f"q={q}: duality pair degenerates for q <= 1")
    return 2 * q / (q + 1), 2 * q / (q - 1)


def z_star(alpha: float) -> float:
    """Meeting point of the two arcs on the negative real axis.

    Returns -sin(pi/alpha)**(-alpha), cross-checked against the
    principal-branch evaluation of (cot(pi/alpha) + i)**alpha.
    """
    if alpha <= 1:
        raise ValueError(f"alpha={alpha} must exceed 1")
    value = -math.sin(math.pi / alpha) ** (-alpha)
    lam = 1.0 / math.tan(math.pi / alpha)
    direct = complex(lam, 1.0) ** alpha
    if abs(direct - value) > 1e-12 * abs(value):
        raise ArithmeticError(
            f"principal-branch cross-check failed for alpha={alpha}: "
            f"{direct} vs {value}"
        )
    return value


def gamma_point(lam: float, branch: str, alpha: float) -> complex:
    """Point (lam +/- i)**alpha on the upper ('+') or lower ('-') arc."""
    if alpha <= 1:
        raise ValueError(f"alpha={alpha} must exceed 1")
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    lam_min = 1.0 / math.tan(math.pi / alpha)
    if lam < lam_min - 1e-12 * (1.0 + abs(lam_min)):
        raise ValueError(
            f"lambda={lam} below the arc start cot(pi/alpha)={lam_min}"
        )
    sign = 1.0 if branch == "+" else -1.0
    return complex(lam, sign) ** alpha


def gamma_polyline(alpha: float, lam_max: float, n: int) -> np.ndarray:
    """Upper-arc polyline vertices; the lower arc is the conjugate.

    Vertices are geometrically spaced in the curve parameter so the highly
    curved region near the meeting point is sampled densely.  The first
    vertex is pinned to the exact real meeting point.
    """
    lam_min = 1.0 / math.tan(math.pi / alpha)
    t = np.geomspace(1.0, lam_max - lam_min + 1.0, n)
    lam = lam_min + (t - 1.0)
    pts = (lam + 1j) ** alpha
    pts[0] = complex(z_star(alpha), 0.0)
    return pts


def _segment_crossings(c: complex, d: complex, pts: np.ndarray) -> int:
    """Count proper crossings of segment [c, d] with the polyline ``pts``.

    Points falling exactly on a test line are assigned to the nonnegative
    side, so a vertex shared by two edges is never double counted.
    """
    a = pts[:-1]
    b = pts[1:]
    ur, ui = (d - c).real, (d - c).imag
    sa = (ur * (a.imag - c.imag) - ui * (a.real - c.real)) >= 0.0
    sb = (ur * (b.imag - c.imag) - ui * (b.real - c.real)) >= 0.0
    cand = sa != sb
    if not cand.any():
        return 0
    a = a[cand]
    b = b[cand]
    vr, vi = (b - a).real, (b - a).imag
    sc = (vr * (c.imag - a.imag) - vi * (c.real - a.real)) >= 0.0
    sd = (vr * (d.imag - a.imag) - vi * (d.real - a.real)) >= 0.0
    return int(np.count_nonzero(sc != sd))


def _polyline_distance(z: complex, pts: np.ndarray) -> float:
    """Distance from z to the polyline (point-to-segment, vectorized)."""
    a = pts[:-1]
    b = pts[1:]
    ab = b - a
    denom = (ab.real**2 + ab.imag**2).clip(min=1e-300)
    t = ((z - a).real * ab.real + (z - a).imag * ab.imag) / denom
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * ab
    return float(np.abs(z - proj).min())


def _arc_distance(z: complex, alpha: float, lam_grid: np.ndarray) -> float:
    """Distance from z to the exact upper arc, refined in parameter space."""
    vals = (lam_grid + 1j) ** alpha
    dist = np.abs(vals - z)
    i = int(dist.argmin())
    lo = lam_grid[max(i - 1, 0)]
    hi = lam_grid[min(i + 1, len(lam_grid) - 1)]

    def f(lam: float) -> float:
        return abs(complex(lam, 1.0) ** alpha - z)

    # golden-section refinement of the bracketed parameter interval
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - gr * (hi - lo)
    x2 = lo + gr * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(80):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - gr * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + gr * (hi - lo)
            f2 = f(x2)
        if hi - lo < 1e-15 * (1.0 + abs(hi)):
            break
    return min(f1, f2, float(dist[i]))


def xi_contains(z: complex, alpha: float, tol: float | None = None) -> str:
    """Classify z against the closed exterior region bounded by the arcs.

    Returns "inside" (strict interior of the exterior component containing
    the half-line left of the meeting point), "boundary" (within ``tol`` of
    the arcs; part of the closed region), or "outside".

    The test draws the segment from z to an anchor deep on the negative real
    axis and counts crossings with both arcs, truncated far beyond the
    operating radius and refined until the count stabilizes.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite query point {z}")
    if alpha <= 1:
        raise ValueError(f"alpha={alpha} must exceed 1")
    if tol is None:
        tol = 1e-9 * (1.0 + abs(z))

    zst = z_star(alpha)
    anchor = complex(min(2.0 * zst, zst - 4.0 * (1.0 + abs(z))), 0.0)
    # truncate where the arc modulus safely exceeds everything in play
    radius = 10.0 * (abs(z) + abs(anchor))
    lam_min = 1.0 / math.tan(math.pi / alpha)
    lam_max = math.sqrt(max(radius ** (2.0 / alpha) - 1.0, 0.0))
    lam_max = max(lam_max, lam_min + 1.0)

    n = 512
    prev_count = -1
    stable = 0
    final_pts = None
    while n <= (1 << 20):
        pts = gamma_polyline(alpha, lam_max, n)
        count = _segment_crossings(z, anchor, pts)
        count += _segment_crossings(z, anchor, np.conj(pts))
        if count == prev_count:
            stable += 1
            if stable >= 2:
                final_pts = pts
                break
        else:
            stable = 0
        prev_count = count
        n *= 2
    if final_pts is None:
        raise XiIndeterminateError(
            f"crossing count did not stabilize for z={z}, alpha={alpha}"
        )

    coarse = min(
        _polyline_distance(z, final_pts),
        _polyline_distance(z, np.conj(final_pts)),
    )
    if coarse < max(1e3 * tol, 1e-6 * (1.0 + abs(z))):
        lam_grid = lam_min + (np.geomspace(1.0, lam_max - lam_min + 1.0, 4096) - 1.0)
        exact = min(
            _arc_distance(z, alpha, lam_grid),
            _arc_distance(z.conjugate(), alpha, lam_grid),
        )
        if exact <= tol:
            return "boundary"
    return "inside" if prev_count % 2 == 0 else "outside"


@dataclass(frozen=True)
class Exponents:
    """Admissible exponent tuple with the derived quantities attached.

    ``sigma`` follows the piecewise rule, ``(p, pprime)`` is the dual
    Lebesgue pair of q and ``nu`` coincides with ``sigma``.  Construction
    fails outside the admissibility window; ``relaxed=True`` lowers the edge
    to q >= d/2 (classical alpha=2 setting).
    """

    d: int
    q: float
    alpha: float
    relaxed: bool = False
    sigma: float = field(init=False)
    p: float = field(init=False)
    pprime: float = field(init=False)
    nu: float = field(init=False)

    def __post_init__(self):
        sigma = sigma_exponent(self.d, self.q, self.alpha, relaxed=self.relaxed)
        if self.q > 1:
            p, pprime = lebesgue_pair(self.q)
        else:
            p, pprime = 1.0, math.inf
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "pprime", pprime)
        object.__setattr__(self, "nu", sigma)


@dataclass(frozen=True)
class Disc:
    """Closed disc; membership includes the boundary."""

    center: complex
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"radius {self.radius} must be nonnegative")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) <= self.radius


@dataclass(frozen=True)
class XiRegion:
    """Arc pair and its closed exterior component.

    ``lambda_min`` is the common arc start cot(pi/alpha), ``zstar`` the real
    meeting point and ``truncation`` the base curve-parameter cutoff used
    when a query does not force a larger one.
    """

    alpha: float
    lambda_min: float = field(init=False)
    zstar: float = field(init=False)
    truncation: float = 50.0

    def __post_init__(self):
        if self.alpha <= 1:
            raise ValueError(f"alpha={self.alpha} must exceed 1")
        if self.truncation <= 0:
            raise ValueError("truncation must be positive")
        object.__setattr__(self, "lambda_min", 1.0 / math.tan(math.pi / self.alpha))
        object.__setattr__(self, "zstar", z_star(self.alpha))

    def contains(self, z: complex, tol: float | None = None) -> str:
        return xi_contains(z, self.alpha, tol)

    def polyline(self, lam_max: float | None = None, n: int = 2048) -> np.ndarray:
        return gamma_polyline(self.alpha, lam_max or self.truncation, n)


def _central_value(z: complex, alpha: float, sigma: float) -> float:
    """|z|**(1-1/alpha) * (1+|z|)**(-2 sigma / alpha)."""
    r = abs(z)
    if r == 0.0:
        return 0.0
    return r ** (1.0 - 1.0 / alpha) * (1.0 + r) ** (-2.0 * sigma / alpha)


@dataclass(frozen=True)
class EnclosureRegion:
    """Union of discs around frequency powers plus the central region.

    ``centers[k] = lam[k]**alpha`` and ``radii[k] = C * vnorm *
    (1 + lam[k])**(2 sigma)``; the central region is the sublevel set of
    |z|**(1-1/alpha) (1+|z|)**(-2 sigma/alpha) at level C * vnorm.
    """

    lam: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    C: float
    vnorm: float
    exp: Exponents

    @classmethod
    def build(cls, freqs, exp: Exponents, C: float, vnorm: float) -> "EnclosureRegion":
        if C < 0 or vnorm < 0:
            raise ValueError("C and vnorm must be nonnegative")
        lam = np.asarray(freqs, dtype=float)
        if lam.ndim != 1 or (lam < 0).any():
            raise ValueError("frequencies must be a 1-d nonnegative array")
        centers = lam**exp.alpha
        radii = C * vnorm * (1.0 + lam) ** (2.0 * exp.sigma)
        return cls(lam=lam, centers=centers, radii=radii, C=C, vnorm=vnorm, exp=exp)

    def central_value(self, z: complex) -> float:
        return _central_value(z, self.exp.alpha, self.exp.sigma)


@dataclass(frozen=True)
class MembershipReport:
    """Which mechanisms enclose z and the smallest constant that would.

    ``minimal_c`` is the smaller of the per-mechanism minima: the constant is
    shared between discs and central region, and z only needs one mechanism.
    """

    z: complex
    disc_hits: tuple[int, ...]
    central_holds: bool
    enclosed: bool
    minimal_c_disc: float
    minimal_c_central: float
    best_disc: int

    @property
    def minimal_c(self) -> float:
        return min(self.minimal_c_disc, self.minimal_c_central)


def enclosure_contains(z: complex, region: EnclosureRegion) -> MembershipReport:
    """Membership report for z against disc union and central region.

    Total on finite inputs; the minimal constants are the exact scaling
    thresholds at which each mechanism starts covering z.
    """
    z = complex(z)
    dist = np.abs(z - region.centers)
    hits = tuple(int(i) for i in np.nonzero(dist <= region.radii)[0])
    growth = (1.0 + region.lam) ** (2.0 * region.exp.sigma)
    if region.vnorm > 0:
        per_disc = dist / (region.vnorm * growth)
        best = int(per_disc.argmin())
        min_c_disc = float(per_disc[best])
    else:
        exact = np.nonzero(dist == 0.0)[0]
        best = int(exact[0]) if exact.size else int(dist.argmin())
        min_c_disc = 0.0 if exact.size else math.inf
    g = region.central_value(z)
    central_holds = g <= region.C * region.vnorm
    if region.vnorm > 0:
        min_c_central = g / region.vnorm
    else:
        min_c_central = 0.0 if g == 0.0 else math.inf
    return MembershipReport(
        z=z,
        disc_hits=hits,
        central_holds=central_holds,
        enclosed=bool(hits) or central_holds,
        minimal_c_disc=min_c_disc,
        minimal_c_central=min_c_central,
        best_disc=best,
    )
