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
# # The MLP, checked and trained
#
# First the backward pass against central differences on a tiny network,
# then a full training run on a well-separated synthetic table.

# %%
import numpy as np

from pkdnet import mlp
from pkdnet.dataset import apply_scaler, fit_scaler, split
from pkdnet.pipeline import evaluate
from pkdnet.synthgen import SynthConfig, generate

rng = np.random.default_rng(0)
net = mlp.init([4, 5, 2], seed=0)
x = rng.normal(size=(6, 4))
y = rng.integers(0, 2, 6)
loss, gw, gb = mlp.loss_and_gradients(net, x, y, l2=0.01)

eps = 1e-5
w = net.weights[0]
numeric = np.zeros_like(w)
for idx in np.ndindex(w.shape):
    old = w[idx]
    w[idx] = old + eps
    up = mlp.loss_and_gradients(net, x, y, 0.01)[0]
    w[idx] = old - eps
    down = mlp.loss_and_gradients(net, x, y, 0.01)[0]
    w[idx] = old
    numeric[idx] = (up - down) / (2 * eps)
print("loss", round(loss, 6))
print("max |backprop - numeric| on first layer:", np.abs(gw[0] - numeric).max())

# %% [markdown]
# ## Training

# %%
data, _ = generate(SynthConfig(600, 200, 20, 0.2, class_separation=2.0, seed=1))
parts = split(data, 0.2, seed=1)
scaler = fit_scaler(parts.train.x)
train = parts.train.with_x(apply_scaler(scaler, parts.train.x))
test_x = apply_scaler(scaler, parts.test.x)

model = mlp.init([train.d, 100, 2], seed=1)
model, history = mlp.train(model, train, mlp.TrainConfig(epochs=40, seed=1))
for epoch in (0, 9, 19, 39):
    print(f"epoch {epoch + 1:>3}  loss {history.loss[epoch]:.4f}  train acc {history.accuracy[epoch]:.3f}")

metrics = evaluate(mlp.predict(model, test_x), parts.test.y)
print("test accuracy", metrics.accuracy)
print(metrics.confusion)

# %% [markdown]
# A learning rate that is far too large does not silently produce NaNs.

# %%
from pkdnet.errors import NonFiniteLoss

try:
    mlp.train(mlp.init([train.d, 8, 2], 0), train, mlp.TrainConfig(epochs=5, learning_rate=1e6))
except NonFiniteLoss as exc:
    print("stopped:", exc)
