"""
Same total number of coincidences spent on the optimal two-outcome
measurement or on 16-setting tomography (J16 and R16 sets).
"""
from optent import experiments

cfg = experiments.load_config({"experiment": "tomo-compare", "points": [{"p": 0.972, "q": 0.5}], "seed": 3})
rows, _ = experiments.run(cfg)
base = rows[0]["delta_epsilon"]
for r in rows:
    print(f"{r['method']:>8}: eps = {r['epsilon']:.4f} +- {r['delta_epsilon']:.4f}  "
          f"(x{r['delta_epsilon'] / base:.1f})  counts {r['total_counts']:.0f}")
print(f"optimal, single window: +- {rows[0]['delta_epsilon_window']:.4f}")
