"""Orbits, escape tests and filled Julia sets of the cubic family.

Every map here is F(z) = z^3 - 3a^2 z + (2a^3 + v), written so that the
marked critical point is a (with critical value v) and the free critical
point is -a.  The co-critical point 2a shares the image of -a, which is why
it shows up everywhere in the similarity experiments.

Renders a couple of filled Julia sets to PGM files under demos/output/.
"""

import os

import numpy as np

import cubicsp as cs

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# --- the canonical Misiurewicz map on S_1 -------------------------------------
F = cs.CubicMap(0.5, 0.5)
print("map:", F)
print("co-critical point 2a =", F.cocritical, " free critical point -a =", F.free_critical)
print("escape radius:", F.escape_radius)

# the free critical orbit lands on the repelling fixed point 1 in one step
orbit = cs.iterate(F, F.free_critical, 6)
print("orbit of -a:", [f"{z:.4g}" for z in orbit.points])

# fixed points and multipliers via Newton
for guess in (1.1, -1.4, 0.4):
    pp = cs.newton_periodic_point(F, 1, guess, 1e-12)
    kind = "repelling" if pp.repelling else "non-repelling"
    print(f"fixed point {pp.location:.6g}  multiplier {pp.multiplier:.6g}  ({kind})")

# Green potential doubles... triples along the orbit
z = 4.0
g = cs.green_potential(F, z, 1e-12)
print(f"g({z}) = {g:.12f},  g(F(z))/3 = {cs.green_potential(F, F(z), 1e-12)/3:.12f}")

# --- render filled Julia sets ---------------------------------------------------
for name, (a, v), r in [
    ("julia_cube", (0, 0), 1.6),            # plain z^3: the unit disk
    ("julia_canonical", (0.5, 0.5), 2.0),   # the Misiurewicz map above
    ("julia_s2", (0.7071067811865476, 0.0), 2.2),  # period-2 marked cycle
]:
    Fm = cs.CubicMap(*map(complex, (a, v)))
    grid = cs.from_predicate(
        r, 512, lambda Z, Fm=Fm: cs.bounded_mask(Fm.a, Fm.v, Z, 300), vectorized=True
    )
    path = os.path.join(OUT, f"{name}.pgm")
    cs.write_pgm(grid, path)
    print(f"wrote {path} ({int(grid.bits.sum())} member cells)")
