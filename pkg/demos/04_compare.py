from fdaflock import ScenarioConfig
from fdaflock.experiments import compare, sweep

# Four arms (reactive/fda x nominal/perturbed), K seeds shared across arms.
# K=20 takes roughly half a minute on one core.
res = compare(ScenarioConfig(seed=0), k=20)

for arm, stats in res.summary.items():
    if "final_gamma" in stats:
        g = stats["final_gamma"]
        print("%-20s gamma median %.4f  IQR [%.4f, %.4f]" % (arm, g["median"], g["q25"], g["q75"]))

for claim, value in res.claims.items():
    print(claim, value)

# One-parameter sweep over the look-ahead horizon
rows = sweep(ScenarioConfig(), "t_ph", [0.5, 1.0, 2.0], k=3, modes=("nominal",))
for row in rows:
    print(row["value"], row["seed_index"], row["status"], round(row["final_gamma"], 4), row["linear_stable"])
