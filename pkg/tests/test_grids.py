import math

import numpy as np
import pytest

import cubicsp as cs
from cubicsp.errors import EmptySet
from cubicsp.grids import _ring_mask


def brute_force_hausdorff(A, B):
    """O(n^2) pairwise maximin oracle, same cell metric as the package."""
    ia, ja = np.nonzero(A.bits)
    ib, jb = np.nonzero(B.bits)
    d2 = (ia[:, None] - ib[None, :]) ** 2 + (ja[:, None] - jb[None, :]) ** 2
    delta_ab = d2.min(axis=1).max()
    delta_ba = d2.min(axis=0).max()
    return A.cell_size * math.sqrt(max(delta_ab, delta_ba))


def random_grid(rng, resolution, density):
    bits = rng.random((resolution, resolution)) < density
    if not bits.any():
        bits[resolution // 2, resolution // 2] = True
    return cs.GridSet(1.0, resolution, bits)


def test_disk_area():
    g = cs.from_predicate(2.0, 256, lambda z: abs(z) <= 1, vectorized=True)
    area = g.bits.sum() * g.cell_size**2
    assert abs(area - math.pi) <= 0.02 * math.pi


def test_empty_and_full_predicates():
    g = cs.from_predicate(1.0, 32, lambda z: False)
    assert g.is_empty
    g = cs.from_predicate(1.0, 32, lambda z: True)
    assert g.bits.all()


def test_truncate_empty_gives_ring():
    g = cs.from_predicate(1.0, 64, lambda z: False)
    t = cs.truncate_window(g)
    assert not t.is_empty
    assert np.array_equal(t.bits, _ring_mask(g))


def test_truncate_full_gives_closed_disk_plus_ring():
    g = cs.from_predicate(1.0, 64, lambda z: True)
    t = cs.truncate_window(g)
    xs = g.axis_centers()
    inside = np.hypot(xs[:, None], xs[None, :]) <= g.r
    assert np.array_equal(t.bits, inside | _ring_mask(g))


def test_truncate_idempotent():
    rng = np.random.default_rng(0)
    g = random_grid(rng, 48, 0.3)
    t1 = cs.truncate_window(g)
    t2 = cs.truncate_window(t1)
    assert t1 == t2


def test_truncate_kills_outside_disk():
    g = cs.from_predicate(1.0, 64, lambda z: True)
    t = cs.truncate_window(g)
    xs = g.axis_centers()
    dist = np.hypot(xs[:, None], xs[None, :])
    assert not t.bits[dist > g.r + g.cell_size].any()


def test_hausdorff_identity():
    rng = np.random.default_rng(1)
    g = random_grid(rng, 32, 0.2)
    assert cs.hausdorff_distance(g, g) == 0.0


def test_hausdorff_singletons():
    res = 64
    bits_a = np.zeros((res, res), bool)
    bits_b = np.zeros((res, res), bool)
    ga = cs.GridSet(2.0, res, bits_a)
    # snap 0 and 1 to cell indices
    cell = ga.cell_size
    i0 = int((0 + 2.0) / cell)
    i1 = int((1 + 2.0) / cell)
    j = res // 2
    bits_a[i0, j] = True
    bits_b[i1, j] = True
    ga = cs.GridSet(2.0, res, bits_a)
    gb = cs.GridSet(2.0, res, bits_b)
    assert cs.hausdorff_distance(ga, gb) == pytest.approx(1.0, abs=ga.cell_size)


def test_hausdorff_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(60):
        res = int(rng.integers(4, 33))
        A = random_grid(rng, res, float(rng.uniform(0.02, 0.5)))
        B = random_grid(rng, res, float(rng.uniform(0.02, 0.5)))
        fast = cs.hausdorff_distance(A, B)
        slow = brute_force_hausdorff(A, B)
        assert fast == slow  # exact: both reduce to integer min-squares


def test_hausdorff_symmetry_exact():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = random_grid(rng, 24, 0.2)
        B = random_grid(rng, 24, 0.2)
        assert cs.hausdorff_distance(A, B) == cs.hausdorff_distance(B, A)


def test_hausdorff_triangle_inequality():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = random_grid(rng, 24, 0.25)
        B = random_grid(rng, 24, 0.25)
        C = random_grid(rng, 24, 0.25)
        ab = cs.hausdorff_distance(A, B)
        bc = cs.hausdorff_distance(B, C)
        ac = cs.hausdorff_distance(A, C)
        assert ac <= ab + bc + 1e-12


def test_hausdorff_empty_raises():
    empty = cs.from_predicate(1.0, 16, lambda z: False)
    full = cs.from_predicate(1.0, 16, lambda z: True)
    with pytest.raises(EmptySet):
        cs.hausdorff_distance(empty, full)


def test_hausdorff_incompatible_grids():
    a = cs.from_predicate(1.0, 16, lambda z: True)
    b = cs.from_predicate(2.0, 16, lambda z: True)
    with pytest.raises(ValueError):
        cs.hausdorff_distance(a, b)


def test_convergence_report_constant():
    g = cs.truncate_window(cs.from_predicate(1.0, 32, lambda z: abs(z) < 0.5, vectorized=True))
    assert cs.convergence_report([g, g, g], g) == [0.0, 0.0, 0.0]


def test_convergence_report_dilations():
    r, res = 2.0, 128
    target = cs.from_predicate(r, res, lambda z: abs(z) <= 0.8, vectorized=True)
    eps_seq = [0.4, 0.2, 0.1]
    seq = [
        cs.from_predicate(r, res, lambda z, e=e: abs(z) <= 0.8 + e, vectorized=True)
        for e in eps_seq
    ]
    dists = cs.convergence_report(seq, target)
    assert len(dists) == len(seq)
    for d, e in zip(dists, eps_seq):
        assert abs(d - e) <= target.cell_size * 1.5


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    g = random_grid(rng, 40, 0.3)
    path = tmp_path / "g.pgm"
    cs.write_pgm(g, path)
    back = cs.read_pgm(path)
    assert back == g


def test_pgm_bytes_layout():
    bits = np.zeros((4, 4), bool)
    bits[0, 3] = True  # smallest x, largest y -> top-left pixel in the image
    g = cs.GridSet(1.0, 4, bits)
    data = cs.pgm_bytes(g)
    header = b"P5\n# r=1\n4 4\n255\n"
    assert data.startswith(header)
    raster = data[len(header):]
    assert len(raster) == 16
    assert raster[0] == 0  # member = black
    assert set(raster[1:]) == {255}


def test_gridset_member_points_orientation():
    bits = np.zeros((8, 8), bool)
    bits[6, 1] = True
    g = cs.GridSet(1.0, 8, bits)
    pt = g.member_points()[0]
    assert pt.real > 0 and pt.imag < 0  # i indexes x, j indexes y
