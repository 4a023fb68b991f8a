"""Shared oracles for the test modules."""
import math
from functools import lru_cache

from stripstat.formulas import partition_geo
from stripstat.twolayer.geo import h_geo, kernel_geo, twolayer_logdensity_geo

# criterion number -> "criterion k: PASS/FAIL ..." line, filled by test_acceptance
ACCEPTANCE_LINES = {}


def chain_vs_density_tv(p, K):
    """TV distance between chain marginals and the N = 2 density, boxed at K, plus unseen mass."""
    Z = partition_geo(2, p)
    k01 = lru_cache(None)(lambda l, m: kernel_geo(0, 1, l, m, p))
    k12 = lru_cache(None)(lambda l, m: kernel_geo(1, 2, l, m, p))
    tv = sc = sd = 0.0
    for m in range(K + 1):
        p0 = p.c1**m * h_geo(0, 2, m, p)
        for a1 in range(m, K + 1):
            for a2 in range(0, m + 1):
                pa = p0 * k01((m, 0), (a1, a2))
                for b1 in range(a1, K + 1):
                    for b2 in range(a2, a1 + 1):
                        pc = pa * k12((a1, a2), (b1, b2))
                        pd = math.exp(twolayer_logdensity_geo([(m, 0), (a1, a2), (b1, b2)], p)) / Z
                        tv += abs(pc - pd)
                        sc += pc
                        sd += pd
    # unseen mass bounds the TV contribution outside the box
    return tv + (1 - sc) + (1 - sd)
