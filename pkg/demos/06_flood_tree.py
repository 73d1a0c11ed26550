# %% [markdown]
# Flood events: a regression-tree payoff and its errors by damage class
#
# A synthetic stand-in for an event database: damage is heavy tailed, the
# number of affected people tracks it loosely, and reported damages carry a
# 5% yearly inflation trend. Deflate, cross-validate a CART tree, then look at
# the RMSE within damage deciles.

# %%
import numpy as np

from basisrisk import flood_pipeline as fp
from basisrisk.evt import pot_fit

records = fp.synthetic_corpus(n=1200, gamma=0.7, seed=0)
deflated, a, b = fp.deflate(records)
print(f"trend: log mean damage = {a:.2f} + {b:.4f} year  (exp(b) = {np.exp(b):.4f})")

# %%
damage = np.array([r.damage for r in deflated])
fit = pot_fit(damage, 0.8)
print(f"threshold {fit.threshold:.3f}, gamma_hat {fit.gamma:.3f} +- {fit.std_errors[0]:.3f}")

# %%
tree = fp.fit_tree(deflated)
print(tree, "root split on", tree.root.feature)

# %%
cv = fp.kfold_cv(deflated, k=10, seed=0)
print(fp.rmse_by_decile(cv).to_string(index=False))
