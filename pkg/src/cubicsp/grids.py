"""Bitmap model of planar compact sets over a square window.

A GridSet is a boolean raster over [-r, r]^2; cell (i, j) represents the
center point (-r + (i+1/2)h, -r + (j+1/2)h) with h = 2r/resolution.  The
circular window operator keeps the closed disk and always adds the ring of
cells meeting the circle |z| = r, so truncated sets are never empty.
Hausdorff distances are exact Euclidean distances between member cell
centers, computed through a two-pass squared distance transform (lower
envelope of parabolas), so they agree bit-for-bit with brute force.
"""

from __future__ import annotations

import math
import os
import re

import numpy as np

from .errors import EmptySet

_INF = np.inf


class GridSet:
    """Immutable boolean raster over the square window [-r, r]^2."""

    __slots__ = ("r", "resolution", "bits", "cell_size", "_edt2")

    def __init__(self, r: float, resolution: int, bits):
        if resolution < 2:
            raise ValueError("resolution must be >= 2")
        bits = np.array(bits, dtype=bool, copy=True)
        if bits.shape != (resolution, resolution):
            raise ValueError(f"bits must be {resolution}x{resolution}, got {bits.shape}")
        bits.flags.writeable = False
        self.r = float(r)
        self.resolution = int(resolution)
        self.bits = bits
        self.cell_size = 2.0 * self.r / self.resolution
        self._edt2 = None

    def __eq__(self, other):
        if not isinstance(other, GridSet):
            return NotImplemented
        return (
            self.r == other.r
            and self.resolution == other.resolution
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"GridSet(r={self.r}, resolution={self.resolution}, "
            f"members={int(self.bits.sum())})"
        )

    @property
    def is_empty(self) -> bool:
        return not self.bits.any()

    def axis_centers(self) -> np.ndarray:
        """Cell-center coordinates along one axis (shared by x and y)."""
        return (np.arange(self.resolution) + 0.5) * self.cell_size - self.r

    def centers(self) -> np.ndarray:
        """Complex grid of cell centers; centers()[i, j] pairs with bits[i, j]."""
        xs = self.axis_centers()
        return xs[:, None] + 1j * xs[None, :]

    def member_points(self) -> np.ndarray:
        """Complex coordinates of the member cell centers."""
        return self.centers()[self.bits]

    def _edt_squared(self) -> np.ndarray:
        """Squared distance (in cells) from every cell to the nearest member."""
        if self._edt2 is None:
            if self.is_empty:
                raise EmptySet("distance transform of an empty raster")
            self._edt2 = _edt_squared(self.bits)
        return self._edt2


def from_predicate(r: float, resolution: int, member, vectorized: bool = False) -> GridSet:
    """Rasterise a membership predicate: bit set iff member(cell center).

    ``member`` takes a complex point (or, with ``vectorized=True``, a complex
    ndarray) and returns booleans.
    """
    xs = (np.arange(resolution) + 0.5) * (2.0 * r / resolution) - r
    pts = xs[:, None] + 1j * xs[None, :]
    if vectorized:
        bits = np.asarray(member(pts), bool)
    else:
        bits = np.empty((resolution, resolution), bool)
        for i in range(resolution):
            for j in range(resolution):
                bits[i, j] = bool(member(pts[i, j]))
    return GridSet(r, resolution, bits)


def _ring_mask(g: GridSet) -> np.ndarray:
    """Cells whose closed square touches the circle |z| = r."""
    xs = np.abs(g.axis_centers())
    h = 0.5 * g.cell_size
    X = xs[:, None]
    Y = xs[None, :]
    near = np.hypot(np.maximum(X - h, 0.0), np.maximum(Y - h, 0.0))
    far = np.hypot(X + h, Y + h)
    return (near <= g.r) & (g.r <= far)


def truncate_window(g: GridSet) -> GridSet:
    """Circular window operator: keep the closed disk, add the boundary ring."""
    xs = g.axis_centers()
    inside = np.hypot(xs[:, None], xs[None, :]) <= g.r
    bits = (g.bits & inside) | _ring_mask(g)
    return GridSet(g.r, g.resolution, bits)


def _nearest_1d_sq(bits: np.ndarray) -> np.ndarray:
    """Per-column squared distance to the nearest member within the column.

    bits is 2-D; the scan runs along axis 0 for all columns at once.
    """
    n = bits.shape[0]
    big = 2 * n  # farther than any in-column distance
    idx = np.arange(n)[:, None]
    here = np.where(bits, idx, -big)
    left = np.maximum.accumulate(here, axis=0)
    dist_left = idx - left
    here = np.where(bits, idx, 3 * big)
    right = np.minimum.accumulate(here[::-1], axis=0)[::-1]
    dist_right = right - idx
    d = np.minimum(dist_left, dist_right).astype(float)
    out = d * d
    out[d >= big] = _INF
    return out


def _lower_envelope_sq(f: np.ndarray) -> np.ndarray:
    """1-D squared distance transform of sampled function f.

    Returns min_q (p - q)^2 + f(q) for every p (Felzenszwalb-Huttenlocher
    lower envelope).  Entries of f may be +inf.
    """
    n = f.size
    finite = np.flatnonzero(np.isfinite(f))
    if finite.size == 0:
        return np.full(n, _INF)
    v = np.empty(finite.size, np.intp)
    z = np.empty(finite.size + 1)
    k = 0
    v[0] = finite[0]
    z[0] = -_INF
    z[1] = _INF
    for q in finite[1:]:
        q = int(q)
        fq = f[q] + q * q
        while True:
            p = v[k]
            s = (fq - f[p] - p * p) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = _INF
    ps = np.arange(n)
    which = np.searchsorted(z[1 : k + 1], ps, side="left")
    src = v[which]
    return (ps - src) ** 2 + f[src]


def _edt_squared(bits: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance (in cells) to the nearest member."""
    d1 = _nearest_1d_sq(bits)  # along axis 0, per column
    out = np.empty_like(d1)
    for i in range(bits.shape[0]):
        out[i, :] = _lower_envelope_sq(d1[i, :])
    # rows with their own member always end finite; fully empty rows pick up
    # members from other rows through d1, so out is finite iff bits has any.
    return out


def hausdorff_distance(A: GridSet, B: GridSet) -> float:
    """Euclidean Hausdorff distance between the member cell-center sets."""
    if A.r != B.r or A.resolution != B.resolution:
        raise ValueError("grids must share the window radius and resolution")
    if A.is_empty or B.is_empty:
        raise EmptySet("Hausdorff distance needs two non-empty rasters")
    d2_ab = B._edt_squared()[A.bits].max()
    d2_ba = A._edt_squared()[B.bits].max()
    return A.cell_size * math.sqrt(max(d2_ab, d2_ba))


def convergence_report(seq, target: GridSet) -> list[float]:
    """Hausdorff distances of a sequence of grids to a target, in order."""
    return [hausdorff_distance(g, target) for g in seq]


# -- PGM I/O --------------------------------------------------------------------

# Binary PGM, maxval 255: member = 0 (black), non-member = 255 (white),
# row 0 = top = +imaginary.  The window radius travels in a comment line so
# the file reads back losslessly.


def pgm_bytes(g: GridSet) -> bytes:
    header = f"P5\n# r={g.r:.17g}\n{g.resolution} {g.resolution}\n255\n".encode("ascii")
    raster = np.where(np.flipud(g.bits.T), 0, 255).astype(np.uint8)
    return header + raster.tobytes()


def write_pgm(g: GridSet, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(pgm_bytes(g))
    os.replace(tmp, path)


def read_pgm(path) -> GridSet:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM file")
    pos = 2
    fields = []
    radius = None
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.index(b"\n", pos)
            m = re.match(rb"#\s*r=([^\s]+)", data[pos:end])
            if m:
                radius = float(m.group(1))
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval != 255 or width != height:
        raise ValueError(f"{path}: expected square maxval-255 PGM")
    if radius is None:
        raise ValueError(f"{path}: missing '# r=' window-radius comment")
    raster = np.frombuffer(data[pos : pos + width * height], np.uint8)
    if raster.size != width * height:
        raise ValueError(f"{path}: truncated raster")
    pgm = raster.reshape(height, width)
    bits = np.flipud(pgm == 0).T
    return GridSet(radius, width, bits)
