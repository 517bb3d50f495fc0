"""External rays and escape-region coordinates.

The Boettcher coordinate B(z) conjugates F to z^3 near infinity
(B(F(z)) = B(z)^3, B(z)/z -> 1); its modulus is exp of the Green potential
and its argument is the external angle.  Dynamic rays are followed by Newton
on the high-iterate equation F^N(z) = exp(3^N (s + 2 pi i theta)), which
needs no branch tracking: once 3^N s is large the Boettcher coordinate of
F^N(z) is z itself to machine accuracy.  Parameter angles of escape-region
maps come from the co-critical point, iterated forward above the critical
potential and pulled back by dividing potential and angle by 3 per step.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .curve import MisiurewiczCertificate, chart_point, locus_membership
from .dynamics import CubicMap, green_potential, in_filled_julia
from .errors import (
    BranchAmbiguity,
    ChartDomainExceeded,
    InsidePotential,
    NewtonDivergence,
    NotInEscapeRegion,
)

#: default tolerance for declaring a ray landed (three final points within
#: this distance), and default final potential.  Both sit at the double
#: precision limit near a repelling landing point; adjust per experiment.
LANDING_TOL = 1e-4
RAY_S_END = 1e-5

#: target log-potential for the high-iterate ray equation; e^24 is far enough
#: out that B(z) = z to ~1e-20 while F^N(z) and its derivative stay
#: representable.
_RAY_LOG_TARGET = 24.0

_MEMBERSHIP_ITER = 2000


@dataclass(frozen=True)
class RayTrace:
    """A traced external ray: (potential, point) samples at one angle."""

    angle: float
    samples: tuple  # ((s, point), ...) with s strictly decreasing
    landed: bool
    landing_estimate: complex | None

    def to_csv(self) -> str:
        lines = ["s,re,im"]
        for s, z in self.samples:
            lines.append(f"{s:.17g},{z.real:.17g},{z.imag:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, angle: float = 0.0) -> "RayTrace":
        rows = [ln for ln in text.strip().splitlines()[1:] if ln]
        samples = []
        for row in rows:
            s, re_, im_ = row.split(",")
            samples.append((float(s), complex(float(re_), float(im_))))
        return cls(angle, tuple(samples), False, None)


def _safe_modulus(F: CubicMap) -> float:
    """|z| beyond which every telescoping factor stays within 1/2 of 1."""
    a, v = F.a, F.v
    return max(
        F.escape_radius,
        math.sqrt(12 * abs(a) ** 2 + 1),
        (4 * abs(2 * a**3 + v) + 1) ** (1 / 3),
    )


def _log_bottcher_from(F: CubicMap, z: complex, tol: float) -> complex:
    """Principal-branch log B(z) for |z| already at the safe modulus."""
    L = cmath.log(z)
    w = z
    weight = 1.0 / 3.0
    for _ in range(200):
        a = F.a
        factor = 1 - 3 * a * a / (w * w) + (2 * a**3 + F.v) / (w**3)
        if abs(factor - 1) > 0.5:
            raise BranchAmbiguity(
                f"telescoping factor {factor:.6g} strayed from 1 at |z| = {abs(w):.4g}"
            )
        term = weight * cmath.log(factor)
        L += term
        if abs(term) < 0.01 * tol:
            return L
        w = F(w)
        weight /= 3.0
        if abs(w) > 1e80:
            return L
    raise BranchAmbiguity("telescoping product did not settle within 200 factors")


def bottcher_coordinate(F: CubicMap, z: complex, tol: float = 1e-12) -> complex:
    """B(z) by the telescoping product z * prod (F^{n+1}z / (F^n z)^3)^{1/3^{n+1}}.

    Requires z to escape with potential above the critical potential; each
    factor must stay within 1/2 of 1 so the principal roots are the right
    branch, otherwise BranchAmbiguity is raised.
    """
    z = complex(z)
    if z == 0 or in_filled_julia(F, z, _MEMBERSHIP_ITER):
        raise InsidePotential(f"{z!r} does not escape; no Boettcher coordinate")
    gz = green_potential(F, z, 1e-12)
    gcrit = 0.0
    for crit in (F.free_critical, F.a):
        if not in_filled_julia(F, crit, _MEMBERSHIP_ITER):
            gcrit = max(gcrit, green_potential(F, crit, 1e-12))
    if gz < gcrit - 1e-12:
        raise InsidePotential(
            f"g(z) = {gz:.6g} lies below the critical potential {gcrit:.6g}"
        )
    return cmath.exp(_log_bottcher_from(F, z, tol))


def _tripled_angle(theta: float, n: int) -> float:
    t = theta % 1.0
    for _ in range(n):
        t = (3.0 * t) % 1.0
    return t


def _ray_newton(F: CubicMap, theta: float, s: float, seed: complex) -> complex:
    """Solve B(z) = exp(s + 2 pi i theta) via F^N(z) = exp(3^N(s + 2 pi i theta))."""
    N = 0
    pot = s
    while pot < _RAY_LOG_TARGET:
        N += 1
        pot *= 3.0
    target = cmath.exp(complex(pot, 2 * math.pi * _tripled_angle(theta, N)))
    z = complex(seed)
    for _ in range(64):
        w = z
        d = 1 + 0j
        bad = False
        for _ in range(N):
            d *= F.derivative(w)
            w = F(w)
            if abs(w) > 1e200:
                bad = True
                break
        if bad or d == 0:
            raise NewtonDivergence(
                f"ray Newton overflowed at angle {theta}, potential {s:.3e}"
            )
        step = (w - target) / d
        # clamp: near a bifurcation the full step can overshoot wildly
        lim = 0.5 * max(abs(z), 1.0)
        if abs(step) > lim:
            step *= lim / abs(step)
        z = z - step
        if abs(step) < 1e-13 * (1 + abs(z)):
            return z
    raise NewtonDivergence(
        f"ray Newton did not converge at angle {theta}, potential {s:.3e} "
        "(the ray likely bifurcates near a precritical point)"
    )


def trace_dynamic_ray(
    F: CubicMap,
    theta: float,
    s_start: float = 2.0,
    s_end: float = RAY_S_END,
    steps: int = 120,
    landing_tol: float = LANDING_TOL,
) -> RayTrace:
    """Follow the external ray at angle theta down a geometric potential ladder.

    Each sample solves the Boettcher equation by Newton seeded at the previous
    point; NewtonDivergence is reported, not guessed around.
    """
    if not (s_start > s_end > 0):
        raise ValueError("need s_start > s_end > 0")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    theta = theta % 1.0
    ratio = (s_end / s_start) ** (1.0 / (steps - 1))
    z = cmath.exp(complex(s_start, 2 * math.pi * theta))
    samples = []
    s = s_start
    for i in range(steps):
        z = _ray_newton(F, theta, s, z)
        samples.append((s, z))
        s = s_start * ratio ** (i + 1)
    tail = [pt for _, pt in samples[-3:]]
    landed = len(tail) == 3 and all(
        abs(tail[i] - tail[j]) <= landing_tol for i in range(3) for j in range(i + 1, 3)
    )
    return RayTrace(theta, tuple(samples), landed, samples[-1][1] if landed else None)


def cocritical_parameter_angle(
    map: CubicMap,
    mu: int,
    branch_anchor: complex | None = None,
) -> tuple[float, float]:
    """Parameter angle and root-modulus of an escape-region map.

    Computes B(2a) by iterating the co-critical point forward until every
    telescoping factor is safe, then pulling potential and angle back by a
    factor 3 per step, and takes the mu-th root.  The pullback and root leave
    the angle determined only up to multiples of 1/(3^J mu); the grid point
    continuous with ``branch_anchor`` is chosen (principal, i.e. the offset-0
    point, when no anchor is given).  Returns (angle in turns mod 1, |B|^(1/mu)).
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if locus_membership(map, _MEMBERSHIP_ITER):
        raise NotInEscapeRegion(f"{map!r} has bounded free critical orbit")
    safe = _safe_modulus(map)
    w = map.cocritical
    J = 0
    while abs(w) < safe:
        w = map(w)
        J += 1
        if J > 200:
            raise NotInEscapeRegion("co-critical orbit failed to reach the safe modulus")
    L = _log_bottcher_from(map, w, 1e-13)
    scale = 3.0**J * mu
    if scale > 2**52:
        raise BranchAmbiguity("pullback depth exhausts the angle resolution of doubles")
    theta_top = L.imag / (2 * math.pi)
    angle = theta_top / scale
    if branch_anchor is not None:
        beta = cmath.phase(branch_anchor) / (2 * math.pi)
        offset = round((beta - angle) * scale)
        angle += offset / scale
    return angle % 1.0, math.exp(L.real / scale)


@dataclass(frozen=True)
class LandingReport:
    """Solutions t(s) of (ray point at potential s) = 2a(t), per ladder rung."""

    theta: float
    mu: int
    rows: tuple  # ((s, t, parameter_angle), ...)

    def to_csv(self) -> str:
        lines = ["s,t_re,t_im,param_angle"]
        for s, t, ang in self.rows:
            lines.append(f"{s:.17g},{t.real:.17g},{t.imag:.17g},{ang:.17g}")
        return "\n".join(lines) + "\n"

    @property
    def t_moduli(self) -> tuple:
        return tuple(abs(t) for _, t, _ in self.rows)


def landing_check(
    cert: MisiurewiczCertificate,
    theta: float,
    mu: int,
    s_ladder=(1e-1, 1e-2, 1e-3, 1e-4),
) -> LandingReport:
    """Numeric approach-to-target check for the parameter ray at theta/mu.

    For each potential s in the decreasing ladder, solves
    H_s(t) = r_{F_t, theta}(s) - 2a(t) = 0 by Newton in the chart parameter t
    (the dynamic ray point is recomputed for every t), then reports t(s) and
    the co-critical parameter angle of the solved map, which should sit near
    theta/mu as t -> 0.
    """
    ladder = [float(s) for s in s_ladder]
    if any(s2 >= s1 for s1, s2 in zip(ladder, ladder[1:])) or not ladder:
        raise ValueError("s_ladder must be strictly decreasing and nonempty")
    theta = theta % 1.0
    chart = cert.chart
    domain = chart.domain_radius
    rows = []
    t = 0j
    for s in ladder:

        def ray_point(G):
            # descend the whole ladder from high potential each time: seeds
            # from other chart parameters are not reliable this close to the
            # Julia set
            s_hi = max(2.0, 3 * s)
            n_sub = max(12, int(10 * math.log10(s_hi / s)))
            z = cmath.exp(complex(s_hi, 2 * math.pi * theta))
            for i in range(n_sub + 1):
                si = s_hi * (s / s_hi) ** (i / n_sub)
                z = _ray_newton(G, theta, si, z)
            return z

        def H(tt):
            G = chart_point(chart, tt)
            return ray_point(G) - G.cocritical

        converged = False
        for _ in range(40):
            h = 1e-7 * max(1.0, abs(t))
            val = H(t)
            dH = (H(t + h) - H(t - h)) / (2 * h)
            if dH == 0:
                raise NewtonDivergence(f"flat H_s at s = {s}")
            step = val / dH
            if abs(t - step) > domain:
                raise ChartDomainExceeded(
                    f"landing solve left the chart domain at s = {s}"
                )
            t = t - step
            if abs(step) < 1e-12 * (1 + abs(t)):
                converged = True
                break
        if not converged:
            raise NewtonDivergence(f"landing solve did not converge at s = {s}")
        G = chart_point(chart, t)
        anchor = cmath.exp(complex(s / mu, 2 * math.pi * theta / mu))
        angle, _ = cocritical_parameter_angle(G, mu, branch_anchor=anchor)
        rows.append((s, t, angle))
    return LandingReport(theta, mu, tuple(rows))


def scan_cocritical_angles(
    F: CubicMap,
    samples: int = 128,
    probe_potential: float = 1e-3,
    top: int = 4,
) -> list[tuple[float, float]]:
    """Candidate external angles of the co-critical point, by nearest approach.

    Traces ``samples`` equally spaced rays down to the probe potential and
    ranks them by final distance to 2a.  Returns the ``top`` (angle, distance)
    pairs, best first; full enumeration of external angles is out of scope.
    """
    target = F.cocritical
    scored = []
    for j in range(samples):
        theta = j / samples
        try:
            trace = trace_dynamic_ray(F, theta, s_end=probe_potential, steps=60)
        except NewtonDivergence:
            continue
        scored.append((theta, abs(trace.samples[-1][1] - target)))
    scored.sort(key=lambda pair: pair[1])
    return scored[:top]
