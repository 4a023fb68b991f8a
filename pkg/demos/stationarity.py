"""Evolve stationary two-layer samples through the strip and test their law."""
import json

from stripstat.params import GeoParams, LGParams
from stripstat.strip_models import stationarity_report

geo = GeoParams.homogeneous(0.5, 2, 0.4, 0.6)
lg = LGParams.homogeneous(1.0, 2, 0.8, 0.8)

for model, params in (("GEO", geo), ("LG", lg)):
    for control in (False, True):
        rep = stationarity_report(model, params, m=3, samples=20_000, seed=7, negative_control=control)
        label = "flat start" if control else "stationary start"
        pv = [round(c["p_value"], 4) for c in rep["coordinates"]]
        print(f"{model:3s} {label:16s} p-values {pv}  passed={rep['passed']}")

rep = stationarity_report("LG", lg, m=3, samples=20_000, seed=7)
print(json.dumps(rep["mcmc"], indent=2))
