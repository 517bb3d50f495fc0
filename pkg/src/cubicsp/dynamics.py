"""The cubic family F(z) = z^3 - 3a^2 z + (2a^3 + v).

Scalar orbit machinery (records, escape tests, Green potential, Newton for
periodic points, continuation along parameter paths) plus the vectorised
escape kernel used by the rasterizers.  Everything here is a pure function of
its inputs; arrays are never mutated in place across call boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchJumpSuspected,
    DerivativeSingular,
    NoConvergence,
    NonEscapingPoint,
)

NEWTON_MAX_STEPS = 64
#: extra full Newton steps taken after the stop rule fires, to polish
#: residuals to machine precision (cheap, and downstream chain-rule
#: identities over ~10 cycle lengths need it).
NEWTON_POLISH_STEPS = 2


def _require_finite(name: str, z: complex) -> None:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must have finite components, got {z!r}")


@dataclass(frozen=True)
class CubicMap:
    """A cubic polynomial in the marked normal form.

    ``a`` is the marked critical point and ``v = F(a)`` its critical value.
    The other critical point is ``-a``; the co-critical point ``2a`` shares
    its image: F(2a) = F(-a) = 4a^3 + v.
    """

    a: complex
    v: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "v", complex(self.v))
        _require_finite("a", self.a)
        _require_finite("v", self.v)

    def __call__(self, z: complex) -> complex:
        a = self.a
        return z * (z * z - 3 * a * a) + 2 * a**3 + self.v

    def derivative(self, z: complex) -> complex:
        return 3 * (z * z - self.a * self.a)

    @property
    def cocritical(self) -> complex:
        return 2 * self.a

    @property
    def free_critical(self) -> complex:
        return -self.a

    @property
    def escape_radius(self) -> float:
        """Radius R such that |z| >= R implies |F(z)| >= 2|z|.

        Triangle inequality on the normal form: |F(z)| >= |z|^3 - 3|a|^2|z|
        - |2a^3+v| >= 2|z| once |z|^2 >= 3|a|^2 + |2a^3+v| + 2 and |z| >= 1.
        """
        a, v = self.a, self.v
        return max(2.0, math.sqrt(3 * abs(a) ** 2 + abs(2 * a**3 + v) + 2))


@dataclass(frozen=True)
class OrbitRecord:
    """A recorded orbit with the chain-rule derivative of the final iterate."""

    points: tuple
    derivative: complex
    escaped_at: int | None
    escape_radius_used: float

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PeriodicPoint:
    location: complex
    period: int
    multiplier: complex

    @property
    def repelling(self) -> bool:
        return abs(self.multiplier) > 1


def iterate(F: CubicMap, z0: complex, n: int, escape_radius: float | None = None) -> OrbitRecord:
    """Record the orbit of z0 for up to n steps, stopping at escape.

    ``derivative`` is the chain-rule product of F'(points[k]) over the steps
    actually taken, i.e. (F^j)'(z0) where j = len(points) - 1.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if escape_radius is None:
        escape_radius = F.escape_radius
    elif escape_radius < F.escape_radius:
        raise ValueError(
            f"escape_radius {escape_radius} is below the guaranteed-escape "
            f"bound {F.escape_radius} of this map"
        )
    pts = [complex(z0)]
    der = 1 + 0j
    escaped = 0 if abs(pts[0]) > escape_radius else None
    if escaped is None:
        for _ in range(n):
            der *= F.derivative(pts[-1])
            z = F(pts[-1])
            pts.append(z)
            if abs(z) > escape_radius:
                escaped = len(pts) - 1
                break
    return OrbitRecord(tuple(pts), der, escaped, float(escape_radius))


def in_filled_julia(F: CubicMap, z: complex, max_iter: int) -> bool:
    """Escape-time membership test for the filled Julia set.

    One-sided: True may be a false positive near the boundary; False is
    certain (the orbit provably escapes once it leaves the radius).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    R = F.escape_radius
    w = complex(z)
    if abs(w) > R:
        return False
    for _ in range(max_iter):
        w = F(w)
        if abs(w) > R:
            return False
    return True


def green_potential(F: CubicMap, z: complex, tol: float, max_iter: int = 10_000) -> float:
    """Escape-rate potential g(z) = lim 3^{-n} log|F^n(z)|.

    Satisfies g(F(z)) = 3 g(z).  Raises NonEscapingPoint if the orbit never
    leaves the escape radius within the budget.
    """
    R = F.escape_radius
    w = complex(z)
    n = 0
    while abs(w) <= R:
        if n >= max_iter:
            raise NonEscapingPoint(f"orbit of {z!r} stayed bounded for {max_iter} steps")
        w = F(w)
        n += 1
    g = 3.0 ** (-n) * math.log(abs(w))
    # Successive refinement: each extra step changes the estimate by
    # 3^{-(n+1)} log|F(w)/w^3|, which shrinks super-geometrically.
    while abs(w) < 1e90:
        w = F(w)
        n += 1
        g_next = 3.0 ** (-n) * math.log(abs(w))
        done = abs(g_next - g) <= 0.5 * tol
        g = g_next
        if done:
            break
    return g


def cycle_eval(F: CubicMap, z: complex, m: int) -> tuple[complex, complex]:
    """F^m(z) and the chain-rule derivative (F^m)'(z)."""
    w = complex(z)
    d = 1 + 0j
    for _ in range(m):
        d *= F.derivative(w)
        w = F(w)
    return w, d


def newton_periodic_point(F: CubicMap, m: int, guess: complex, tol: float) -> PeriodicPoint:
    """Newton's method on F^m(z) - z from the given guess.

    Stops at 64 iterations or |step| < tol*(1+|z|), whichever first, then
    takes two polishing steps.  The result is accepted only if the fixed-point
    residual is below tol.
    """
    if m < 1:
        raise ValueError("period must be >= 1")
    z = complex(guess)
    converged = False
    for _ in range(NEWTON_MAX_STEPS):
        w, d = cycle_eval(F, z, m)
        denom = d - 1
        if abs(denom) < 1e-14 * (1 + abs(d)):
            raise DerivativeSingular(f"(F^{m})' - 1 vanished at {z!r}")
        step = (w - z) / denom
        z = z - step
        if abs(step) < tol * (1 + abs(z)):
            converged = True
            break
    if converged:
        for _ in range(NEWTON_POLISH_STEPS):
            w, d = cycle_eval(F, z, m)
            denom = d - 1
            if abs(denom) < 1e-14 * (1 + abs(d)):
                break
            z = z - (w - z) / denom
    w, d = cycle_eval(F, z, m)
    if abs(w - z) >= tol:
        raise NoConvergence(
            f"period-{m} Newton from {guess!r} left residual {abs(w - z):.3e} >= {tol:.3e}"
        )
    return PeriodicPoint(z, m, d)


def orbit_param_jet(a, v, z0, n, dz0_da=0j, dz0_dv=0j):
    """Orbit of z0 with forward-mode derivatives w.r.t. the coefficients a, v.

    Tracks both the z-argument and the explicit coefficient dependence:
    d z_{k+1} = F'(z_k) dz_k + (-6 a z_k + 6 a^2) da + dv.  Returns a list of
    (z, dz/da, dz/dv) triples of length n+1, scalar or ndarray according to
    the inputs.
    """
    z = z0 + 0j
    za = dz0_da + 0j
    zv = dz0_dv + 0j
    out = [(z, za, zv)]
    c = 2 * a**3 + v
    for _ in range(n):
        fp = 3 * (z * z - a * a)
        za = fp * za + 6 * a * (a - z)
        zv = fp * zv + 1
        z = z * (z * z - 3 * a * a) + c
        out.append((z, za, zv))
    return out


def continue_periodic_point(path, start: PeriodicPoint, tol: float) -> list[PeriodicPoint]:
    """Track a periodic point along a path of maps by seeded Newton.

    Each step seeds Newton at a first-order implicit-function prediction.  A
    step whose Newton correction exceeds half the predicted move (plus a small
    absolute floor) is rejected as a suspected branch jump rather than
    accepted silently.
    """
    m = start.period
    out: list[PeriodicPoint] = []
    prev_map: CubicMap | None = None
    prev = start.location
    for F in path:
        if prev_map is None:
            pred = prev
        else:
            da = F.a - prev_map.a
            dv = F.v - prev_map.v
            # s solves F^m(s) = s; differentiate: ds = -d_param F^m / ((F^m)' - 1)
            _, pa, pv = orbit_param_jet(prev_map.a, prev_map.v, prev, m)[m]
            _, dmult = cycle_eval(prev_map, prev, m)
            denom = dmult - 1
            if abs(denom) < 1e-14 * (1 + abs(dmult)):
                raise DerivativeSingular("parabolic point: cannot predict continuation step")
            pred = prev - (pa * da + pv * dv) / denom
        pp = newton_periodic_point(F, m, pred, tol)
        allowed = 0.5 * abs(pred - prev) + 1e-5 * (1 + abs(pred))
        if abs(pp.location - pred) > allowed:
            raise BranchJumpSuspected(
                f"Newton moved {abs(pp.location - pred):.3e} from the predicted point "
                f"(allowed {allowed:.3e}); path step too large or branch jump"
            )
        out.append(pp)
        prev_map = F
        prev = pp.location
    return out


# -- vectorised kernels ---------------------------------------------------------


def escape_radius_grid(a, v):
    """Vectorised guaranteed-escape radius, matching CubicMap.escape_radius."""
    a = np.asarray(a, np.complex128)
    v = np.asarray(v, np.complex128)
    return np.maximum(2.0, np.sqrt(3 * np.abs(a) ** 2 + np.abs(2 * a**3 + v) + 2))


def bounded_mask(a, v, z0, max_iter: int, escape_radius=None):
    """Boolean array: which starting points stay within the escape radius.

    ``a`` and ``v`` may be scalars (one map for all points) or arrays of the
    same shape as ``z0`` (one map per point).  Matches the scalar
    ``in_filled_julia`` semantics exactly, so the one-sided bias is identical
    on both sides of any comparison using the same ``max_iter``.
    """
    z0 = np.asarray(z0, np.complex128)
    shape = z0.shape
    z = z0.ravel().copy()
    per_point = np.ndim(a) > 0 or np.ndim(v) > 0
    if per_point:
        A3 = 3 * (np.asarray(a, np.complex128) * np.asarray(a, np.complex128)).ravel()
        c = (2 * np.asarray(a, np.complex128) ** 3 + np.asarray(v, np.complex128)).ravel()
        R = (
            np.broadcast_to(escape_radius_grid(a, v), shape).ravel().copy()
            if escape_radius is None
            else np.broadcast_to(np.asarray(escape_radius, float), shape).ravel().copy()
        )
    else:
        F = CubicMap(complex(a), complex(v))
        A3 = 3 * F.a * F.a
        c = 2 * F.a**3 + F.v
        R = F.escape_radius if escape_radius is None else float(escape_radius)

    bounded = np.abs(z) <= R
    idx = np.flatnonzero(bounded)
    zz = z[idx]
    if per_point:
        aa3 = A3[idx]
        cc = c[idx]
        rr = R[idx]
    for _ in range(max_iter):
        if idx.size == 0:
            break
        if per_point:
            zz = zz * (zz * zz - aa3) + cc
            esc = np.abs(zz) > rr
        else:
            zz = zz * (zz * zz - A3) + c
            esc = np.abs(zz) > R
        if esc.any():
            bounded[idx[esc]] = False
            keep = ~esc
            idx = idx[keep]
            zz = zz[keep]
            if per_point:
                aa3 = aa3[keep]
                cc = cc[keep]
                rr = rr[keep]
    return bounded.reshape(shape)
