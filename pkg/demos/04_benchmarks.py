# %% [markdown]
# Benchmarks: is the copula model worse than simple noise models?
#
# B1 adds Gaussian noise to Y, B2 multiplies it by lognormal noise, B3 is a
# bivariate Gaussian. All three match the variance of X in the main setting.
# Ratios above one mean the copula model has the larger gap.

# %%
from basisrisk.simlab import MainSettingConfig, figure_suite, matched_noise_variance

base = MainSettingConfig()
print("B1 noise variance:", f"{matched_noise_variance('B1', base):.4g}")
print("B2 log-noise variance:", f"{matched_noise_variance('B2', base):.4f}")

# %%
tabs = figure_suite("fig4", n=300_000, seed=1)
r = tabs["mean_ratio"]
view = r[r["quantile"].isin([0.5, 0.9, 0.99])]
print(view.pivot_table(index=["tau", "benchmark"], columns="quantile", values="ratio").round(3).to_string())

# %%
sq = tabs["square_ratio"]
print(sq[sq["quantile"] == 0.99][["tau", "benchmark", "ratio"]].to_string(index=False))
