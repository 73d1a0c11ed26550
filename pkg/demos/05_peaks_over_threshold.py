# %% [markdown]
# Peaks over threshold
#
# Fit a generalized Pareto law to the excesses over a high quantile and read
# the tail index. The exponential QQ data bend upward for heavy tails.

# %%
import numpy as np

from basisrisk.evt import fit_gpd, pot_fit, qq_exponential, sample_gpd

for gamma in (-0.2, 0.0, 0.5):
    fit = fit_gpd(sample_gpd(20_000, gamma, 2.0, seed=3))
    print(f"true gamma {gamma:+.1f}: gamma_hat {fit.gamma:+.3f} +- {fit.std_errors[0]:.3f}, sigma_hat {fit.sigma:.3f}")

# %%
rng = np.random.default_rng(0)
values = 100 * (1 - rng.random(5000)) ** -0.7  # Pareto, tail index 0.7
fit = pot_fit(values, 0.8)
print(fit.to_dict())

# %%
qq = qq_exponential(values[values > fit.threshold] - fit.threshold)
for q in (0.5, 0.9, 0.99):
    i = int(q * (len(qq) - 1))
    print(f"theoretical {qq[i, 0]:10.1f}   empirical {qq[i, 1]:10.1f}")
