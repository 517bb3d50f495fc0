"""The two magnification experiments behind the similarity statement.

At a Misiurewicz map, magnifying the filled Julia set K_F around the
co-critical point 2a by 1/rho_k (rho_k = 1/(A0 lambda0^k)) and magnifying
the connectedness locus of S_p around the map itself by q/rho_k both
converge, in the Hausdorff metric on a fixed window, to the same limit
model: the phi-preimage of K_F under the linearizer phi of the landing
point.  This script runs both sequences at a moderate resolution, prints
the distance table, and writes the zoom pairs as PGM images.

Distances contract by roughly 1/|lambda0| = 4/9 per step until they hit the
resolution floor (the cell size).
"""

import os

import cubicsp as cs

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cert = cs.find_misiurewicz(1, 1, 1, (0.45, 0.45))
R, RES, ITERS = 2.0, 256, 400

report, grids = cs.run_similarity(cert, R, 1, 6, RES, ITERS, keep_grids=True)

print(f"window radius {R}, resolution {RES}, cell size {report.cell_size:.5f}")
print(f"{'k':>2} {'d_dyn':>10} {'d_par':>10}   (nan = chart-domain guard)")
for k, dd, dp in zip(report.k_range, report.d_dyn, report.d_par):
    print(f"{k:>2} {dd:>10.5f} {dp:>10.5f}")

ratios = [b / a for a, b in zip(report.d_dyn, report.d_dyn[1:])]
print("d_dyn contraction ratios:", [f"{r:.3f}" for r in ratios],
      f"(1/|lambda0| = {1/abs(cert.lambda0):.3f})")

for name, grid in grids.items():
    path = os.path.join(OUT, f"{name}.pgm")
    cs.write_pgm(grid, path)
print(f"wrote {len(grids)} PGM grids under {OUT}")

with open(os.path.join(OUT, "similarity_report.csv"), "w") as fh:
    fh.write(report.to_csv())
print("wrote similarity_report.csv")
