# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Stacking on a synthetic expression table
#
# A table with a few hundred samples, most columns pure noise and a small
# block of informative ones. We split it, standardize on the training rows,
# and compare the three base learners with the stacked model.

# %%
import numpy as np

from pkdnet.dataset import apply_scaler, fit_scaler, split
from pkdnet.ensemble import StackConfig, predict_stack, train_stack
from pkdnet.pipeline import evaluate
from pkdnet.synthgen import SynthConfig, generate

config = SynthConfig(n_samples=400, n_features=120, n_informative=12,
                     positive_fraction=0.2, class_separation=1.0, seed=0)
data, informative = generate(config)
print(data.x.shape, "positives:", int(data.y.sum()))
print("informative columns:", [data.feature_names[j] for j in informative])

# %% [markdown]
# The scaler only ever sees training rows.

# %%
parts = split(data, 0.2, seed=0)
scaler = fit_scaler(parts.train.x)
train = parts.train.with_x(apply_scaler(scaler, parts.train.x))
test = parts.test.with_x(apply_scaler(scaler, parts.test.x))
print("train", train.n, "test", test.n, "test positives", int(test.y.sum()))

# %% [markdown]
# Smaller forest and boosting budgets than the defaults keep this quick.

# %%
stack_cfg = StackConfig(rf_trees=30, rf_depth=8, gbm_rounds=40)
model = train_stack(train, stack_cfg, seed=0)

for name, learner in zip(("svm", "rf", "gbm"), model.base):
    pred = (learner.predict_proba(test.x) >= 0.5).astype(np.int64)
    print(f"{name:>5}  accuracy {evaluate(pred, test.y).accuracy:.3f}")
proba, labels = predict_stack(model, test.x)
print("stack  accuracy", evaluate(labels, test.y).accuracy)

# %% [markdown]
# The meta learner was fit on out-of-fold probabilities, one column per
# base learner. Its weights show how much each learner is trusted.

# %%
print("oof matrix", model.oof.shape)
print("meta weights", np.round(model.meta.coefficients, 3), "intercept", round(model.meta.intercept, 3))
print("fold sizes", np.bincount(model.folds))
