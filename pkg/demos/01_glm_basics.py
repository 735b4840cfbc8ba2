# %% [markdown]
# # Fitting a GLM by IRLS
#
# The two-by-two table below has 30 positives and 10 negatives when the
# dummy is on, and the reverse when it is off. For a saturated logistic
# model each coefficient is a difference of empirical log-odds, so we know
# the answer before fitting.

# %%
import math

import numpy as np

from catcluster.glm import INTERCEPT, Column, DesignMatrix, Family, fit_irls, predict_mean, score_bound

d = np.repeat([1, 1, 0, 0], [30, 10, 10, 30]).astype(float)
y = np.repeat([1, 0, 1, 0], [30, 10, 10, 30]).astype(float)
design = DesignMatrix((INTERCEPT, Column("dummy", "d", "1")), np.column_stack([np.ones(80), d]))
fit = fit_irls(design, y, Family.BERNOULLI_LOGIT)
print("coefficients:", fit.coefficients)
print("closed form: ", [math.log(1 / 3), math.log(9)])

# %% [markdown]
# A converged fit solves the score equations. The residual is stored on
# the model, and the deviance path never goes up.

# %%
print(f"max |X'(y - mu)| = {fit.score_residual:.2e} (bound {score_bound(80):.2e})")
print("deviance path:", np.round(fit.deviance_path, 6))

# %% [markdown]
# Poisson with only an intercept recovers the log of the sample mean.

# %%
counts = np.random.default_rng(0).poisson(4.0, 200).astype(float)
pois = fit_irls(DesignMatrix((INTERCEPT,), np.ones((200, 1))), counts, Family.POISSON_LOG)
print(pois.coefficients[0], math.log(counts.mean()))
print("fitted mean:", predict_mean(pois, DesignMatrix((INTERCEPT,), np.ones((1, 1))))[0])
