import pytest

import cubicsp as cs

# The canonical period-1 Misiurewicz map: a = v = 1/2, co-critical point
# 2a = 1 lands immediately on the repelling fixed point 1 with multiplier
# 9/4.  Closed form: B0 = 18/5, Q = 5/8, q = 8/5.
CANONICAL_SEED = (0.45, 0.45)

# Period-2 instance with closed form, located by a scan-then-Newton pass:
# a = 1/sqrt(2), v = 0 (marked cycle a -> 0 -> a); the free critical orbit
# lands after one step on the fixed point sqrt(2) with multiplier 9/2.
# Hand-derived: B0 = -36/7, Q = -7/8, q = -8/7.
P2_SEED = (0.7071, 0.0)

# Real preperiod-(2,1) instance on S_2 from the same scan (frozen seed).
P2_ELL2_SEED = (0.897246485802, -1.34938143833)


@pytest.fixture(scope="session")
def cert1():
    return cs.find_misiurewicz(1, 1, 1, CANONICAL_SEED)


@pytest.fixture(scope="session")
def evaluator1(cert1):
    return cs.PoincareEvaluator.from_certificate(cert1)


@pytest.fixture(scope="session")
def cert2():
    return cs.find_misiurewicz(2, 1, 1, P2_SEED)


@pytest.fixture(scope="session")
def cert2_ell2():
    return cs.find_misiurewicz(2, 2, 1, P2_ELL2_SEED)
