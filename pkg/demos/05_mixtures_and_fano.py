"""
Controlled admixture of unentangled light, and the estimator under
super-Poissonian count statistics.
"""
from optent import experiments

for model in ("decoherence", "werner"):
    cfg = experiments.load_config({"experiment": "mixture-sweep", "model": model, "replications": 100, "seed": 2})
    print(f"-- {model} admixture --")
    for r in experiments.run(cfg)[0]:
        print(f"{r['point']:>12}  eps {r['epsilon_true']:.4f}  <eps hat> {r['epsilon_hat_mean']:.4f}  "
              f"Var*K / (1 - eps^2) = {r['var_normalized'] / r['qfi_bound']:.3f}")

for mode in ("common", "independent"):
    cfg = experiments.load_config({"experiment": "fano-check", "replications": 100, "fano_mode": mode,
                                   "points": [1.0, 1.5, 2.0]})
    print(f"-- Fano inflation, {mode} --")
    for r in experiments.run(cfg)[0]:
        print(f"x{r['inflation']:.1f}: F(total) = {r['fano_total']:.2f}  "
              f"Var*K deviation {r['relative_deviation']:+.3f}")
