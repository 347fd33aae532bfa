"""Monte Carlo checks of the estimator's limit behavior.

The harness simulates many datasets and compares the scaled estimation
error against its advertised limits: a normal distribution with the
quadrature variance at fixed points, and uniform convergence of the
scaled at-risk process. Runs here are sized for a quick look; the
acceptance suite runs the full-size versions.
"""
from bihazard import CensoringModel, FgmModel, MCConfig, QuantileTable, verify_clt, verify_glivenko


def show(report):
    print(f"  experiment: {report.experiment}, overall passed: {report.passed}")
    for row in report.rows:
        ref = "" if row["reference"] is None else f"  ref {row['reference']}"
        print(f"    {row['name']:24s} value {row['value']:9.5f}{ref}"
              f"  [{row['tolerance']}] -> {row['passed']}")


print("== normal limit at a fixed point ==")
cfg = MCConfig(model=FgmModel(0.0), censor_model=CensoringModel("full"),
               n=400, replicates=160, seed=11)
show(verify_clt(cfg, [(0.5, 0.5)], var_rtol=0.2, ks_bound=0.1))

print()
print("== the same, under random rectangle censoring ==")
cm = CensoringModel("rectangle", {"tau1": QuantileTable.uniform(0.7, 1.0),
                                  "tau2": QuantileTable.uniform(0.7, 1.0)})
cfg = MCConfig(model=FgmModel(0.3), censor_model=cm,
               n=500, replicates=120, seed=12)
show(verify_clt(cfg, [(0.4, 0.4)], checks=("mean",)))

print()
print("== uniform at-risk convergence ==")
cfg = MCConfig(model=FgmModel(0.0), censor_model=cm,
               replicates=60, grid_size=24, seed=13)
show(verify_glivenko(cfg, ladder=(250, 500, 1000), bound=0.06))
