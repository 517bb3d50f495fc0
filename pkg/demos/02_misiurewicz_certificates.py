"""Locating Misiurewicz maps on S_p and certifying their similarity data.

A Misiurewicz map has its free critical point -a strictly preperiodic: after
ell steps the orbit lands on a repelling cycle of period m at the point a0.
The certificate records the landing multiplier lambda0, the co-critical
derivative A0 = (F^ell)'(2a), and the transversal slope B0 of b(t) - s(t)
where b tracks the co-critical orbit and s the repelling point across the
local chart of S_p.  Q = A0/B0 and q = 1/Q convert between the dynamical and
parameter magnifications.

Two instances with closed forms:

* p = 1:  (a, v) = (1/2, 1/2), a0 = 1, lambda0 = A0 = 9/4, B0 = 18/5.
* p = 2:  (a, v) = (1/sqrt 2, 0), marked cycle a -> 0 -> a; the free orbit
  lands on the fixed point sqrt 2 with multiplier 9/2, and B0 = -36/7.
"""

import os

import cubicsp as cs

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)


def show(cert, label):
    print(f"--- {label} ---")
    print(f"(a, v)   = ({cert.map.a:.15g}, {cert.map.v:.15g})")
    print(f"preperiod (ell, m) = ({cert.ell}, {cert.m})")
    print(f"a0       = {cert.a0:.15g}")
    print(f"lambda0  = {cert.lambda0:.15g}")
    print(f"A0       = {cert.A0:.15g}")
    print(f"B0       = {cert.B0:.15g}")
    print(f"Q = A0/B0 = {cert.Q:.15g},  q = 1/Q = {cert.q:.15g}")
    print(f"chart: {cert.chart.kind}, domain radius {cert.chart.domain_radius}")
    winding = cs.transversality_winding(cert, 1e-3)
    print(f"winding of b(t) - s(t) on |t| = 1e-3: {winding} (1 = simple zero)")


cert1 = cs.find_misiurewicz(1, 1, 1, (0.45, 0.45))
show(cert1, "S_1 canonical certificate")

cert2 = cs.find_misiurewicz(2, 1, 1, (0.7071, 0.0))
show(cert2, "S_2 closed-form certificate")

# a genuinely preperiodic instance with ell = 2 on S_2, from a coarse scan
cert2b = cs.find_misiurewicz(2, 2, 1, (0.897246485802, -1.34938143833))
show(cert2b, "S_2 scan instance with ell = 2")

# certificates serialize to JSON and reload identically
path = os.path.join(OUT, "certificate_s1.json")
with open(path, "w") as fh:
    fh.write(cs.certificate_to_json(cert1))
with open(path) as fh:
    back = cs.certificate_from_json(fh.read())
print(f"\nwrote {path}; reload matches: {back.map == cert1.map}")
