"""Laplace transform of the geometric stationary measure against exact enumeration."""
from stripstat.formulas import LaplaceQuery, laplace_geo, partition_geo
from stripstat.params import GeoParams
from stripstat.strip_models import brute_force_laplace_geo

p = GeoParams.homogeneous(0.5, 2, 0.3, 0.4)
print("Z_Geo(2) =", partition_geo(2, p))

print(f"{'t':>5} {'contour':>20} {'enumeration':>20} {'tail bound':>10}")
for t in (0.6, 0.9, 1.0, 1.1, 1.3):
    q = LaplaceQuery.single("GEO", 2, t)
    ref = brute_force_laplace_geo(p, q)
    print(f"{t:5.2f} {laplace_geo(q, p):20.15f} {ref.value:20.15f} {ref.tail_bound:10.1e}")

# two observation points: E[t1^{2 L1(1)} t2^{2 (L1(2) - L1(1))}]
q = LaplaceQuery("GEO", (0, 1, 2), (1.1, 1.2))
print("two-point transform:", laplace_geo(q, p))
