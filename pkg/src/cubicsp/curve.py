"""The parameter curves S_p.

S_p is the affine curve of pairs (a, v) whose marked critical point a is
periodic of minimal period p under F_{a,v}.  This module provides the curve
equation eta = F^p(a) - a and its coefficient gradient, local charts (the
explicit translation chart for p = 1, a Hamiltonian-flow chart for general
p), connectedness-locus membership, the Misiurewicz certificate solver, and
the transversality data (B0, winding check) that the similarity engine
builds on.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CubicMap,
    PeriodicPoint,
    bounded_mask,
    continue_periodic_point,
    cycle_eval,
    in_filled_julia,
    iterate,
    newton_periodic_point,
    orbit_param_jet,
)
from .errors import (
    ChartDomainExceeded,
    ContinuationFailure,
    FreeCriticalPeriodic,
    NoConvergence,
    NotMinimal,
    NotRepelling,
    OffCurve,
    ProjectionFailed,
    SamplingTooCoarse,
    SolverError,
    TransversalityFailure,
)

#: residual threshold for minimality tests, an order of magnitude looser than
#: solver tolerances so roundoff cannot fake a NotMinimal.
MINIMALITY_TOL = 1e-8

CHART_ETA_TOL = 1e-9


def eta(a, v, p: int):
    """Curve equation F^p(a) - a for the map (a, v); zero exactly on S_p.

    Accepts scalars or equally shaped arrays.
    """
    if p < 1:
        raise ValueError("period must be >= 1")
    c = 2 * a**3 + v
    z = a + 0j
    for _ in range(p):
        z = z * (z * z - 3 * a * a) + c
    return z - a


def eta_gradient(a, v, p: int):
    """(d eta/d a, d eta/d v) by forward-mode differentiation through the orbit."""
    if p < 1:
        raise ValueError("period must be >= 1")
    z, za, zv = orbit_param_jet(a, v, a, p, dz0_da=1.0, dz0_dv=0.0)[p]
    return za - 1, zv


@dataclass(frozen=True)
class CurvePoint:
    """A validated point of S_p."""

    map: CubicMap
    period: int
    eta_residual: float


def curve_point(map: CubicMap, p: int, tol: float = CHART_ETA_TOL) -> CurvePoint:
    """Validate that a map lies on S_p with minimal period p."""
    res = abs(eta(map.a, map.v, p))
    if res > tol:
        raise OffCurve(f"|eta(a, v, {p})| = {res:.3e} > {tol:.1e}")
    for d in range(1, p):
        if p % d == 0 and abs(eta(map.a, map.v, d)) <= MINIMALITY_TOL:
            raise NotMinimal(f"marked critical point already has period {d} < {p}")
    return CurvePoint(map, p, res)


@dataclass(frozen=True)
class LocalChart:
    """A local parametrization t -> (a(t), v(t)) of S_p, with t = 0 at the base.

    ``explicit_s1`` translates along the diagonal (exact for p = 1, where
    eta = v - a).  ``hamiltonian`` integrates da/dt = d eta/dv,
    dv/dt = -d eta/da along the straight segment from 0 to t; the flow
    preserves eta, and a Newton projection per step (fix a, solve v) removes
    the integrator drift.
    """

    base: CurvePoint
    kind: str
    integrator_step: float
    domain_radius: float


def chart_point(chart: LocalChart, t: complex) -> CubicMap:
    """Map of the chart at local parameter t."""
    a, v = _chart_arrays(chart, complex(t))
    return CubicMap(complex(a), complex(v))


def chart_grid(chart: LocalChart, t):
    """Vectorised chart evaluation; returns (a, v) arrays for an array of t."""
    return _chart_arrays(chart, np.asarray(t, np.complex128))


def _chart_arrays(chart: LocalChart, t):
    big = float(np.max(np.abs(t))) if np.ndim(t) else abs(t)
    if big > chart.domain_radius * (1 + 1e-12):
        raise ChartDomainExceeded(
            f"|t| = {big:.6g} exceeds the chart domain radius {chart.domain_radius:.6g}"
        )
    a0 = chart.base.map.a
    v0 = chart.base.map.v
    p = chart.base.period
    if chart.kind == "explicit_s1":
        return a0 + t, v0 + t
    if chart.kind != "hamiltonian":
        raise ValueError(
            f"chart kind {chart.kind!r} is not constructible; the closed-form "
            "S_2 parametrization fails the period-2 condition (see s2_delta_chart)"
        )
    steps = max(1, math.ceil(big / chart.integrator_step))
    h = t / steps
    a = a0 + 0j * t  # broadcast to the shape of t
    v = v0 + 0j * t

    def field(aa, vv):
        ea, ev = eta_gradient(aa, vv, p)
        return ev, -ea

    for _ in range(steps):
        k1a, k1v = field(a, v)
        k2a, k2v = field(a + 0.5 * h * k1a, v + 0.5 * h * k1v)
        k3a, k3v = field(a + 0.5 * h * k2a, v + 0.5 * h * k2v)
        k4a, k4v = field(a + h * k3a, v + h * k3v)
        a = a + (h / 6.0) * (k1a + 2 * k2a + 2 * k3a + k4a)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        # project back onto the curve: fix a, one Newton update on v
        res = eta(a, v, p)
        _, ev = eta_gradient(a, v, p)
        v = v - res / ev
    res = np.max(np.abs(eta(a, v, p)))
    if res > CHART_ETA_TOL:
        raise ProjectionFailed(
            f"chart point off-curve after projection: |eta| = {res:.3e}"
        )
    return a, v


def s2_delta_chart(delta: complex) -> CubicMap:
    """Literal transcription of the published closed-form S_2 parametrization.

    With beta = (delta + 1/delta)/3 the marked critical point is a = -beta and
    the constant term is -2 beta^3 - beta, decomposed here into (a, v) of the
    normal form.  The formula is recorded as-is, not silently accepted: the
    result is checked against the period-2 curve equation and OffCurve is
    raised if |eta(a, v, 2)| > 1e-9.  (As transcribed it reduces to v = a,
    so the check clears but the period is not minimal; Hamiltonian charts are
    the working parametrization for S_2.)
    """
    delta = complex(delta)
    if delta == 0:
        raise ValueError("delta must be nonzero")
    beta = (delta + 1 / delta) / 3
    a = -beta
    const = -2 * beta**3 - beta
    v = const - 2 * a**3
    m = CubicMap(a, v)
    res = abs(eta(a, v, 2))
    if res > 1e-9:
        raise OffCurve(f"delta-formula map fails eta(a,v,2)=0: residual {res:.3e}")
    return m


def locus_membership(map: CubicMap, max_iter: int) -> bool:
    """Connectedness-locus test: the free critical orbit stays bounded.

    One-sided in the same way as in_filled_julia.
    """
    return in_filled_julia(map, map.free_critical, max_iter)


def locus_mask(a, v, max_iter: int):
    """Vectorised locus membership for arrays of maps."""
    a = np.asarray(a, np.complex128)
    return bounded_mask(a, v, -a, max_iter)


# -- chart construction -----------------------------------------------------------


def build_chart(
    map: CubicMap,
    p: int,
    a0: complex | None = None,
    m: int | None = None,
    max_radius: float = 0.1,
    domain_radius: float | None = None,
) -> LocalChart:
    """Chart at a base map, sizing the domain by halving from ``max_radius``.

    A candidate radius is accepted when eight boundary samples stay on the
    curve (|eta| <= 1e-9 after projection) and, when (a0, m) are supplied,
    the periodic point continues from the base to each boundary sample.  With
    ``domain_radius`` given explicitly the search is skipped (used when
    reloading a serialized certificate).
    """
    base = curve_point(map, p)
    kind = "explicit_s1" if p == 1 else "hamiltonian"
    if domain_radius is not None:
        return LocalChart(base, kind, 0.01 * domain_radius, domain_radius)
    r = max_radius
    while r >= 1e-6:
        chart = LocalChart(base, kind, 0.01 * r, r)
        if _chart_domain_ok(chart, a0, m):
            return chart
        r /= 2
    raise ChartDomainExceeded(f"no valid chart domain found at {map!r}")


def _chart_domain_ok(chart: LocalChart, a0, m) -> bool:
    for j in range(8):
        t = chart.domain_radius * cmath.exp(2j * math.pi * j / 8)
        try:
            chart_point(chart, t)
            if a0 is not None and m is not None:
                _track_cycle(chart, t, a0, m, steps=8)
        except SolverError:
            return False
    return True


def _track_cycle(chart: LocalChart, t: complex, a0: complex, m: int, steps: int = 8):
    """Continue the period-m point from the base (at a0) out to parameter t."""
    path = [chart_point(chart, t * (j / steps)) for j in range(steps + 1)]
    _, lam = cycle_eval(chart.base.map, a0, m)
    start = PeriodicPoint(complex(a0), m, lam)
    return continue_periodic_point(path, start, 1e-12)[-1]


# -- Misiurewicz certificates ------------------------------------------------------


@dataclass(frozen=True)
class MisiurewiczCertificate:
    """A located Misiurewicz map with its similarity constants.

    The co-critical point 2a lands after ell steps on the repelling point a0
    of period m and multiplier lambda0; A0 = (F^ell)'(2a), B0 is the
    transversal derivative of b(t) - s(t) at t = 0, Q = A0/B0 and q = 1/Q.
    """

    map: CubicMap
    p: int
    ell: int
    m: int
    a0: complex
    lambda0: complex
    A0: complex
    B0: complex
    Q: complex
    q: complex
    chart: LocalChart


def _proper_divisors(n: int):
    return [d for d in range(1, n) if n % d == 0]


def find_misiurewicz(p: int, ell: int, m: int, seed, tol: float = 1e-12) -> MisiurewiczCertificate:
    """Solve for a Misiurewicz map of preperiod (ell, m) on S_p near a seed.

    Newton's method on the square system {eta(a, v, p) = 0,
    F^{ell+m}(-a) - F^ell(-a) = 0}; a0 is recovered afterwards as F^ell(-a)
    and polished.  Minimality of p, ell and m, strict preperiodicity of -a,
    and |lambda0| > 1 are all verified before the certificate is assembled.
    """
    if p < 1 or ell < 1 or m < 1:
        raise ValueError("p, ell, m must all be >= 1")
    a = complex(seed[0])
    v = complex(seed[1])

    def system(a, v):
        r1 = eta(a, v, p)
        j1a, j1v = eta_gradient(a, v, p)
        jet = orbit_param_jet(a, v, -a, ell + m, dz0_da=-1.0, dz0_dv=0.0)
        zl, zla, zlv = jet[ell]
        zm, zma, zmv = jet[ell + m]
        r2 = zm - zl
        return (r1, r2), ((j1a, j1v), (zma - zla, zmv - zlv))

    def norm(res):
        return abs(res[0]) + abs(res[1])

    (r1, r2), J = system(a, v)
    size = norm((r1, r2))
    converged = False
    for _ in range(64):
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        if abs(det) < 1e-300:
            raise NoConvergence("singular Jacobian in the Misiurewicz system")
        da = (r1 * J[1][1] - r2 * J[0][1]) / det
        dv = (r2 * J[0][0] - r1 * J[1][0]) / det
        scale = 1.0
        for _ in range(12):
            a_new, v_new = a - scale * da, v - scale * dv
            (r1n, r2n), Jn = system(a_new, v_new)
            if norm((r1n, r2n)) < size or scale < 1e-3:
                break
            scale *= 0.5
        step = abs(scale * da) + abs(scale * dv)
        a, v, (r1, r2), J = a_new, v_new, (r1n, r2n), Jn
        size = norm((r1, r2))
        if step < tol * (1 + abs(a) + abs(v)):
            converged = True
            break
    if converged:
        for _ in range(2):  # polish to machine precision
            det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
            if abs(det) < 1e-300:
                break
            a -= (r1 * J[1][1] - r2 * J[0][1]) / det
            v -= (r2 * J[0][0] - r1 * J[1][0]) / det
            (r1, r2), J = system(a, v)
        size = norm((r1, r2))
    if not converged or size > tol:
        raise NoConvergence(
            f"Misiurewicz Newton from {seed!r} left residual {size:.3e} (tol {tol:.1e})"
        )

    F = CubicMap(a, v)
    base = curve_point(F, p)  # OffCurve / NotMinimal on failure

    free = F.free_critical
    orbit = iterate(F, free, ell + m)
    if orbit.escaped_at is not None:
        raise NoConvergence("free critical orbit escapes; not preperiodic")
    for j in range(1, ell + m + 1):
        if abs(orbit.points[j] - free) <= MINIMALITY_TOL:
            raise FreeCriticalPeriodic(
                f"free critical point -a returns to itself after {j} steps"
            )
    for l2 in range(1, ell):
        if abs(orbit.points[l2 + m] - orbit.points[l2]) <= MINIMALITY_TOL:
            raise NotMinimal(f"co-critical orbit already lands after {l2} < {ell} steps")

    a0 = newton_periodic_point(F, m, orbit.points[ell], max(tol, 1e-13))
    for d in _proper_divisors(m):
        if abs(cycle_eval(F, a0.location, d)[0] - a0.location) <= MINIMALITY_TOL:
            raise NotMinimal(f"landing point has period {d} < {m}")
    if not a0.repelling:
        raise NotRepelling(
            f"landing cycle multiplier |{a0.multiplier:.6g}| <= 1 is not repelling"
        )

    A0 = iterate(F, F.cocritical, ell).derivative
    if abs(A0) < 1e-12:
        raise TransversalityFailure("A0 = (F^ell)'(2a) vanished")

    chart = build_chart(F, p, a0=a0.location, m=m)
    B0, _ = _transversal_slope(chart, ell, a0.location, m)
    Q = A0 / B0
    return MisiurewiczCertificate(
        map=F,
        p=p,
        ell=ell,
        m=m,
        a0=a0.location,
        lambda0=a0.multiplier,
        A0=A0,
        B0=B0,
        Q=Q,
        q=B0 / A0,
        chart=chart,
    )


def _b_of_t(chart: LocalChart, ell: int, t: complex) -> complex:
    G = chart_point(chart, t)
    return iterate(G, G.cocritical, ell).points[-1]


def _s_of_t(chart: LocalChart, t: complex, a0: complex, m: int, steps: int = 8) -> complex:
    return _track_cycle(chart, t, a0, m, steps=steps).location


def _transversal_slope(chart, ell, a0, m, h_ladder=None):
    """d/dt [b(t) - s(t)] at t = 0 by central differences plus extrapolation.

    Returns (value, error_estimate).  Neville extrapolation in h^2 over the
    ladder, so any strictly decreasing ladder works (the default halves).
    """
    d = chart.domain_radius
    if h_ladder is None:
        h_ladder = [d / 8, d / 16, d / 32, d / 64]
    h_ladder = sorted({float(h) for h in h_ladder}, reverse=True)
    if not h_ladder or h_ladder[0] > d:
        raise ValueError("h_ladder must be nonempty and within the chart domain")

    def f(t):
        return _b_of_t(chart, ell, t) - _s_of_t(chart, t, a0, m)

    try:
        diffs = [(f(h) - f(-h)) / (2 * h) for h in h_ladder]
    except SolverError as exc:
        raise ContinuationFailure(f"could not track s(t) across the ladder: {exc}") from exc

    xs = [h * h for h in h_ladder]
    table = [list(diffs)]
    n = len(diffs)
    for col in range(1, n):
        row = []
        for i in range(n - col):
            num = xs[i] * table[col - 1][i + 1] - xs[i + col] * table[col - 1][i]
            row.append(num / (xs[i] - xs[i + col]))
        table.append(row)
    value = table[-1][0]
    err = abs(table[-1][0] - table[-2][0]) if n > 1 else abs(value)
    if abs(value) < 1e-6:
        raise TransversalityFailure(
            f"|B0| = {abs(value):.3e} < 1e-6: transversal derivative vanished"
        )
    return value, err


def compute_B0(cert: MisiurewiczCertificate, h_ladder=None) -> complex:
    """Transversal derivative B0 = d/dt [b(t) - s(t)] at the certificate map."""
    value, _ = _transversal_slope(cert.chart, cert.ell, cert.a0, cert.m, h_ladder)
    return value


# -- winding / transversality check ------------------------------------------------


def winding_number(f, radius: float, samples: int = 64, max_evals: int = 4096) -> int:
    """Winding number of t -> f(t) about 0 along the circle |t| = radius.

    Sums principal-branch argument increments over sampled points, inserting
    midpoints adaptively wherever an increment exceeds pi/2.
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    evals = [0]

    def value(theta):
        evals[0] += 1
        if evals[0] > max_evals:
            raise SamplingTooCoarse(f"winding sampling exceeded {max_evals} evaluations")
        w = f(radius * cmath.exp(2j * math.pi * theta))
        if w == 0:
            raise SamplingTooCoarse(f"contour passes through zero at angle {theta}")
        return w

    def increment(t1, w1, t2, w2):
        inc = cmath.phase(w2 / w1)
        if abs(inc) <= 0.5 * math.pi:
            return inc
        tm = 0.5 * (t1 + t2)
        wm = value(tm)
        return increment(t1, w1, tm, wm) + increment(tm, wm, t2, w2)

    thetas = [j / samples for j in range(samples)]
    ws = [value(th) for th in thetas]
    total = 0.0
    for j in range(samples):
        t1, w1 = thetas[j], ws[j]
        t2 = thetas[j + 1] if j + 1 < samples else 1.0
        w2 = ws[(j + 1) % samples]
        total += increment(t1, w1, t2, w2)
    winding = total / (2 * math.pi)
    nearest = round(winding)
    if abs(winding - nearest) > 1e-3:
        raise SamplingTooCoarse(f"argument sum {winding:.6f} is not an integer")
    return int(nearest)


def transversality_winding(cert: MisiurewiczCertificate, radius: float, samples: int = 64) -> int:
    """Winding number of b(t) - s(t) on |t| = radius; 1 certifies a simple zero."""
    chart = cert.chart
    if radius > chart.domain_radius:
        raise ChartDomainExceeded(
            f"radius {radius} exceeds the chart domain {chart.domain_radius}"
        )
    cache: list[tuple[complex, complex]] = []

    def s_at(t):
        if not cache:
            loc = _s_of_t(chart, t, cert.a0, cert.m)
        else:
            tn, sn = min(cache, key=lambda pair: abs(pair[0] - t))
            if abs(t - tn) > 0.5 * radius:
                loc = _s_of_t(chart, t, cert.a0, cert.m)
            else:
                path = [chart_point(chart, tn), chart_point(chart, t)]
                start = PeriodicPoint(sn, cert.m, cert.lambda0)
                loc = continue_periodic_point(path, start, 1e-12)[-1].location
        cache.append((t, loc))
        return loc

    def f(t):
        try:
            return _b_of_t(chart, cert.ell, t) - s_at(t)
        except SamplingTooCoarse:
            raise
        except SolverError as exc:
            raise ContinuationFailure(f"continuation around the circle failed: {exc}") from exc

    return winding_number(f, radius, samples)


# -- serialization ------------------------------------------------------------------

_JSON_KEYS = ("p", "ell", "m", "a", "v", "a0", "lambda0", "A0", "B0", "Q", "q",
              "chart_kind", "domain_radius")


def _c17(z: complex) -> str:
    # +0.0 canonicalizes negative zeros, which JSON would round-trip as int 0
    return f"[{z.real + 0.0:.17g}, {z.imag + 0.0:.17g}]"


def certificate_to_json(cert: MisiurewiczCertificate) -> str:
    """Serialize with 17-significant-digit (round-trip exact) numbers."""
    parts = [
        f'"p": {cert.p}',
        f'"ell": {cert.ell}',
        f'"m": {cert.m}',
        f'"a": {_c17(cert.map.a)}',
        f'"v": {_c17(cert.map.v)}',
        f'"a0": {_c17(cert.a0)}',
        f'"lambda0": {_c17(cert.lambda0)}',
        f'"A0": {_c17(cert.A0)}',
        f'"B0": {_c17(cert.B0)}',
        f'"Q": {_c17(cert.Q)}',
        f'"q": {_c17(cert.q)}',
        f'"chart_kind": "{cert.chart.kind}"',
        f'"domain_radius": {cert.chart.domain_radius:.17g}',
    ]
    return "{\n  " + ",\n  ".join(parts) + "\n}\n"


def certificate_from_json(text: str) -> MisiurewiczCertificate:
    data = json.loads(text)
    missing = [k for k in _JSON_KEYS if k not in data]
    if missing:
        raise ValueError(f"certificate JSON missing fields: {missing}")

    def cx(key):
        re_, im_ = data[key]
        return complex(re_, im_)

    F = CubicMap(cx("a"), cx("v"))
    p = int(data["p"])
    chart = build_chart(F, p, domain_radius=float(data["domain_radius"]))
    if chart.kind != data["chart_kind"]:
        chart = LocalChart(chart.base, data["chart_kind"], chart.integrator_step,
                           chart.domain_radius)
    return MisiurewiczCertificate(
        map=F,
        p=p,
        ell=int(data["ell"]),
        m=int(data["m"]),
        a0=cx("a0"),
        lambda0=cx("lambda0"),
        A0=cx("A0"),
        B0=cx("B0"),
        Q=cx("Q"),
        q=cx("q"),
        chart=chart,
    )
