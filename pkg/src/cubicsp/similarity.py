"""The similarity engine.

Builds the linearizing entire function phi at the landing point of a
Misiurewicz certificate (phi(0) = a0, phi'(0) = 1, phi(lambda0 w) =
F^m(phi(w))), the magnification scales rho_k = 1/(A0 lambda0^k), the two
rescaled families

    dynamical:  w -> F^{ell+km}(2a + rho_k w)
    parameter:  w -> F_t^{ell+km}(2a(t)),  t = Q rho_k w,

and runs the two Hausdorff-convergence experiments of the main similarity
statement against the limit model { w : phi(w) in K_F }.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .curve import MisiurewiczCertificate, chart_grid, chart_point
from .dynamics import CubicMap, bounded_mask, cycle_eval
from .errors import ChartDomainExceeded, NoConvergence, NotRepelling, PrecisionExhausted
from .grids import GridSet, hausdorff_distance, truncate_window

#: |rho_k| below this is refused: the magnified window would sit below the
#: resolution of double precision near 2a.
RHO_FLOOR = 1e-10


def magnification_scale(cert: MisiurewiczCertificate, k: int) -> complex:
    """rho_k = 1/(A0 lambda0^k), the k-th magnification scale."""
    if k < 0:
        raise ValueError("k must be >= 0")
    denom = cert.A0 * cert.lambda0**k
    if abs(denom) > 1.0 / RHO_FLOOR:
        raise PrecisionExhausted(
            f"|rho_{k}| = {1 / abs(denom):.3e} is below the double-precision floor"
        )
    return 1.0 / denom


class PoincareEvaluator:
    """Evaluates the linearizer phi of a repelling period-m point.

    phi is the entire function with phi(0) = a0, phi'(0) = 1 and
    phi(lambda0 w) = F^m(phi(w)); it is evaluated as F^{nm}(seed(w/lambda0^n))
    with n deep enough that w/lambda0^n falls inside a validated disk.  The
    seed is a short Taylor jet of phi at 0 (computed from the cycle's own jet),
    which keeps the truncation error below the amplified round-off floor.
    """

    def __init__(
        self,
        map: CubicMap,
        a0: complex,
        m: int,
        tol: float = 1e-10,
        test_radius: float = 3.0,
        jet_order: int = 7,
        inner_radius: float | None = None,
    ):
        self.map = map
        self.a0 = complex(a0)
        self.m = int(m)
        self.tol = float(tol)
        self.test_radius = float(test_radius)
        w, lam = cycle_eval(map, self.a0, self.m)
        if abs(w - self.a0) > 1e-9:
            raise ValueError(f"a0 is not period-{m}: residual {abs(w - self.a0):.3e}")
        if abs(lam) <= 1 + 1e-12:
            raise NotRepelling(f"multiplier {lam:.6g} is not repelling")
        self.lambda0 = lam
        self._jet = _linearizer_jet(map, self.a0, self.m, lam, jet_order)
        if inner_radius is None:
            inner_radius = self._search_inner_radius()
        self.inner_radius = float(inner_radius)

    @classmethod
    def from_certificate(cls, cert: MisiurewiczCertificate, **kwargs) -> "PoincareEvaluator":
        return cls(cert.map, cert.a0, cert.m, **kwargs)

    # internals ------------------------------------------------------------

    def _seed(self, u):
        acc = self._jet[-1] * np.ones_like(u) if np.ndim(u) else self._jet[-1]
        for c in self._jet[-2::-1]:
            acc = acc * u + c
        return acc

    def _depth(self, absw: float) -> int:
        if absw <= self.inner_radius:
            return 0
        return max(
            0,
            math.ceil(
                (math.log(absw) - math.log(self.inner_radius))
                / math.log(abs(self.lambda0))
                - 1e-12
            ),
        )

    def _eval_at_depth(self, w: complex, n: int) -> complex:
        u = w / self.lambda0**n
        z = self._seed(u)
        F = self.map
        for _ in range(n * self.m):
            z = F(z)
        return z

    def _doubling_gap_ok(self, w: complex, n: int) -> bool:
        """Compare depth n against depth 2*max(n,1), with a noise floor.

        Round-off injected along the orbit is amplified by the chain-rule
        derivative, so differences below that floor carry no information;
        the tolerance is tol*(1+|y1|+|y2|) plus the amplified machine noise.
        """
        n2 = 2 * max(n, 1)
        y1 = self._eval_at_depth(w, n)
        u = w / self.lambda0**n2
        z = self._seed(u)
        F = self.map
        deriv = 1.0 + 0j
        for _ in range(n2 * self.m):
            deriv *= F.derivative(z)
            z = F(z)
        y2 = z
        floor = 100 * (n2 * self.m + 1) * 2.3e-16 * (1 + abs(deriv))
        return abs(y1 - y2) <= self.tol * (1 + abs(y1) + abs(y2)) + floor

    def _search_inner_radius(self) -> float:
        # Largest radius (halving from 0.1) whose doubling check passes at 16
        # samples per depth shell.  One ring per shell matters: along escaping
        # directions the truncation-to-value balance is worst at intermediate
        # radii, not at the test circle itself.
        lam = abs(self.lambda0)
        r = 0.1
        while r >= 1e-9:
            self.inner_radius = r  # probed by _depth
            # one ring per depth shell, at the top of the shell |w| = r*lam^n
            # where the seed sits at its largest and truncation peaks
            radii = []
            shell = r * lam
            while shell < self.test_radius:
                radii.append(shell * (1 - 1e-9))
                shell *= lam
            radii.append(self.test_radius)
            ok = True
            for rad in radii:
                for j in range(16):
                    w = rad * complex(
                        math.cos(2 * math.pi * (j + 0.37) / 16),
                        math.sin(2 * math.pi * (j + 0.37) / 16),
                    )
                    if not self._doubling_gap_ok(w, self._depth(abs(w))):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return r
            r /= 2
        raise NoConvergence(
            f"no linearization radius down to 1e-9 meets tol {self.tol:.1e} "
            f"at test radius {self.test_radius}"
        )

    # public ----------------------------------------------------------------

    def eval(self, w: complex) -> complex:
        """phi(w), with the doubling convergence check enforced per call."""
        w = complex(w)
        n = self._depth(abs(w))
        if not self._doubling_gap_ok(w, n):
            raise NoConvergence(
                f"doubling the linearization depth moved phi({w:.6g}) by more "
                f"than tol {self.tol:.1e} plus the round-off floor"
            )
        return self._eval_at_depth(w, n)

    __call__ = eval

    def eval_grid(self, W) -> np.ndarray:
        """Vectorised phi over an array of points within the validated radius.

        Points are grouped by linearization depth; the per-call doubling check
        is skipped (the inner radius was validated at construction out to
        test_radius, which must cover max |W|).
        """
        W = np.asarray(W, np.complex128)
        out = np.empty_like(W)
        absw = np.abs(W)
        if absw.size and absw.max() > self.test_radius * (1 + 1e-9):
            raise ValueError(
                f"grid reaches |w| = {absw.max():.4g} beyond the validated "
                f"test radius {self.test_radius}"
            )
        logl = math.log(abs(self.lambda0))
        with np.errstate(divide="ignore"):
            depths = np.ceil(
                (np.log(absw) - math.log(self.inner_radius)) / logl - 1e-12
            )
        depths = np.where(np.isfinite(depths), np.maximum(depths, 0), 0).astype(int)
        F = self.map
        for n in np.unique(depths):
            sel = depths == n
            u = W[sel] / self.lambda0 ** int(n)
            z = self._seed(u)
            for _ in range(int(n) * self.m):
                z = z * (z * z - 3 * F.a * F.a) + 2 * F.a**3 + F.v
            out[sel] = z
        return out


def _series_mul(p, q, order):
    return np.convolve(p, q)[: order + 1]


def _cycle_series(F: CubicMap, a0: complex, m: int, order: int) -> np.ndarray:
    """Taylor coefficients of u -> F^m(a0 + u) - a0, truncated past u^order."""
    s = np.zeros(order + 1, complex)
    s[0] = a0
    s[1] = 1.0
    for _ in range(m):
        s2 = _series_mul(s, s, order)
        s3 = _series_mul(s2, s, order)
        s = s3 - 3 * F.a**2 * s
        s[0] += 2 * F.a**3 + F.v
    s[0] -= a0
    return s


def _linearizer_jet(F, a0, m, lam, order) -> np.ndarray:
    """Taylor coefficients of phi at 0 up to u^order (phi(0)=a0, phi'(0)=1).

    Solves g(phi(u)) = phi(lam u) order by order, where g is the cycle series.
    """
    g = _cycle_series(F, a0, m, order)
    b = np.zeros(order + 1, complex)
    b[1] = 1.0
    for j in range(2, order + 1):
        # coefficient of u^j in g(psi(u)) with b_j still zero
        power = np.zeros(j + 1, complex)
        power[0] = 1.0
        comp = np.zeros(j + 1, complex)
        for kk in range(1, j + 1):
            power = _series_mul(power, b[: j + 1], j)
            comp += g[kk] * power
        b[j] = comp[j] / (lam**j - lam)
    b[0] = a0
    return b


def poincare_eval(ev: PoincareEvaluator, w: complex) -> complex:
    """Function-style access to PoincareEvaluator.eval."""
    return ev.eval(w)


def dynamical_rescaling(cert: MisiurewiczCertificate, w: complex, k: int) -> complex:
    """phi_k(w) = F^{ell+km}(2a + rho_k w), the rescaled filled-Julia family."""
    rho = magnification_scale(cert, k)
    F = cert.map
    z = F.cocritical + rho * complex(w)
    for _ in range(cert.ell + k * cert.m):
        z = F(z)
    return z


def parameter_rescaling(cert: MisiurewiczCertificate, w: complex, k: int) -> complex:
    """Phi_k(w) = G^{ell+km}(2a(t)) with G the chart map at t = Q rho_k w."""
    rho = magnification_scale(cert, k)
    t = cert.Q * rho * complex(w)
    G = chart_point(cert.chart, t)
    z = G.cocritical
    for _ in range(cert.ell + k * cert.m):
        z = G(z)
    return z


# -- rasterization -----------------------------------------------------------------

_MODES = ("limit_model", "rescaled_julia", "rescaled_locus")


def rasterize(
    cert: MisiurewiczCertificate,
    mode: str,
    r: float,
    resolution: int,
    k: int | None = None,
    max_iter: int = 500,
    evaluator: PoincareEvaluator | None = None,
) -> GridSet:
    """Rasterise one of the three compared sets over [-r, r]^2, then window it.

    limit_model marks w with phi(w) in K_F; rescaled_julia marks w with
    2a + rho_k w in K_F; rescaled_locus marks w whose chart map at
    t = Q rho_k w has bounded free critical orbit.  The circular window
    operator is applied before returning.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    if mode != "limit_model" and k is None:
        raise ValueError(f"mode {mode!r} requires k")
    xs = (np.arange(resolution) + 0.5) * (2.0 * r / resolution) - r
    W = xs[:, None] + 1j * xs[None, :]
    F = cert.map
    if mode == "limit_model":
        ev = evaluator or PoincareEvaluator.from_certificate(
            cert, tol=1e-9, test_radius=r * math.sqrt(2) * 1.01
        )
        Z = ev.eval_grid(W)
        bits = bounded_mask(F.a, F.v, Z, max_iter)
    elif mode == "rescaled_julia":
        rho = magnification_scale(cert, k)
        bits = bounded_mask(F.a, F.v, F.cocritical + rho * W, max_iter)
    else:
        rho = magnification_scale(cert, k)
        scale = cert.Q * rho
        if abs(scale) * r * math.sqrt(2) > cert.chart.domain_radius * (1 + 1e-12):
            raise ChartDomainExceeded(
                f"rescaled locus at k={k} needs |t| up to "
                f"{abs(scale) * r * math.sqrt(2):.3e}, beyond the chart domain "
                f"{cert.chart.domain_radius:.3e}"
            )
        A, V = chart_grid(cert.chart, scale * W)
        bits = bounded_mask(A, V, -A, max_iter)
    return truncate_window(GridSet(r, resolution, bits))


@dataclass(frozen=True)
class SimilarityReport:
    """Hausdorff distances of the two rescaled families to the limit model.

    d_par entries are NaN for k rejected by the chart-domain guard;
    cell_size = 2r/resolution is the resolution floor of every distance.
    """

    r: float
    k_range: tuple
    d_dyn: tuple
    d_par: tuple
    grid_resolution: int
    cell_size: float

    def to_csv(self) -> str:
        lines = ["k,d_dyn,d_par"]
        for k, dd, dp in zip(self.k_range, self.d_dyn, self.d_par):
            lines.append(f"{k},{dd:.17g},{dp:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, r: float, resolution: int) -> "SimilarityReport":
        rows = [ln for ln in text.strip().splitlines()[1:] if ln]
        ks, dds, dps = [], [], []
        for row in rows:
            k, dd, dp = row.split(",")
            ks.append(int(k))
            dds.append(float(dd))
            dps.append(float(dp))
        return cls(r, tuple(ks), tuple(dds), tuple(dps), resolution,
                   2.0 * r / resolution)

    def params_json(self, max_iter: int) -> str:
        payload = {
            "r": float(self.r),
            "resolution": self.grid_resolution,
            "k_min": self.k_range[0],
            "k_max": self.k_range[-1],
            "max_iter": max_iter,
            "cell_size": self.cell_size,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run_similarity(
    cert: MisiurewiczCertificate,
    r: float,
    k_min: int,
    k_max: int,
    resolution: int,
    max_iter: int,
    keep_grids: bool = False,
):
    """Shared engine behind verify_main_theorem; optionally returns the grids.

    max_iter is identical across the two sets of every comparison so the
    one-sided membership bias cancels.  Chart-guard failures make individual
    d_par entries NaN; if no k in range passes, ChartDomainExceeded is raised.
    """
    if k_min > k_max or k_min < 0:
        raise ValueError("need 0 <= k_min <= k_max")
    ev = PoincareEvaluator.from_certificate(
        cert, tol=1e-9, test_radius=r * math.sqrt(2) * 1.01
    )
    limit = rasterize(cert, "limit_model", r, resolution, max_iter=max_iter, evaluator=ev)
    ks = list(range(k_min, k_max + 1))
    d_dyn, d_par = [], []
    grids = {"limit_model": limit} if keep_grids else None
    any_par = False
    for k in ks:
        jul = rasterize(cert, "rescaled_julia", r, resolution, k=k, max_iter=max_iter)
        d_dyn.append(hausdorff_distance(jul, limit))
        if keep_grids:
            grids[f"rescaled_julia_k{k}"] = jul
        try:
            loc = rasterize(cert, "rescaled_locus", r, resolution, k=k, max_iter=max_iter)
        except ChartDomainExceeded:
            d_par.append(float("nan"))
            continue
        any_par = True
        d_par.append(hausdorff_distance(loc, limit))
        if keep_grids:
            grids[f"rescaled_locus_k{k}"] = loc
    if not any_par:
        raise ChartDomainExceeded(
            f"no k in {k_min}..{k_max} passes the chart-domain guard at r = {r}"
        )
    report = SimilarityReport(
        r=float(r),
        k_range=tuple(ks),
        d_dyn=tuple(d_dyn),
        d_par=tuple(d_par),
        grid_resolution=int(resolution),
        cell_size=2.0 * r / resolution,
    )
    return (report, grids) if keep_grids else (report, None)


def verify_main_theorem(
    cert: MisiurewiczCertificate,
    r: float,
    k_min: int,
    k_max: int,
    resolution: int,
    max_iter: int,
) -> SimilarityReport:
    """Run both convergence experiments and report the distance sequences."""
    report, _ = run_similarity(cert, r, k_min, k_max, resolution, max_iter)
    return report
