# %% [markdown]
# # Monte Carlo on the sphere
#
# Draw Gaussian sections of degree n, find every critical point of |s|_h, and
# compare the empirical critical values with the limit laws.

# %%
import numpy as np

from cvlab import densities as D
from cvlab.experiments import ExperimentConfig, bin_averages, expected_counts, run_experiment

cfg = ExperimentConfig(n=30, samples=100, ensemble="gaussian", master_seed=7, bins=25)
summary = run_experiment(cfg)
print("accepted samples:", summary.accepted, "incomplete:", summary.identity_failures)
print("saddles/n:", summary.counts["saddle"]["mean_over_n"], "exact:",
      expected_counts(cfg.n)["saddle"] / cfg.n)
print("maxima/n:", summary.counts["max"]["mean_over_n"])
print("KS against limit laws:", summary.ks)

# %% [markdown]
# Histogram of all critical values against the exact finite-degree curve.

# %%
emp = np.array(summary.histograms["saddle"]) + np.array(summary.histograms["max"])
theory = bin_averages(lambda x: D.kac_rice_finite(cfg.n, x), cfg.edges)
mids = 0.5 * (cfg.edges[1:] + cfg.edges[:-1])
for m, e, t in zip(mids[:12], emp, theory):
    print(f"{m:5.2f}  {e:7.4f}  {t:7.4f}  {'#' * int(40 * e / theory.max())}")
