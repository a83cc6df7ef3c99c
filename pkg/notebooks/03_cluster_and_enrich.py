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
# # From probabilities to a gene list
#
# Each row gets a predicted probability. Rows are placed in a plane of
# (mean standardized expression, probability) and grouped with k-means.
# The cluster with the highest mean probability is then tested for
# over-represented annotation terms against all rows.

# %%
import tempfile
from pathlib import Path

import numpy as np

from pkdnet import mlp
from pkdnet.analysis import GoAnnotation, enrich, feature_label_correlation
from pkdnet.cluster import build_cluster_space, kmeans, top_cluster
from pkdnet.dataset import apply_scaler, fit_scaler
from pkdnet.pipeline import emit_correlation_chart
from pkdnet.synthgen import SynthConfig, generate

data, informative = generate(SynthConfig(300, 60, 8, 0.25, 1.5, seed=4))
scaler = fit_scaler(data.x)
scaled = data.with_x(apply_scaler(scaler, data.x))
model, _ = mlp.train(mlp.init([data.d, 32, 2], 4), scaled, mlp.TrainConfig(epochs=30, seed=4))
proba = mlp.predict_proba(model, scaled.x)

# %%
points = build_cluster_space(scaled, proba, "mean")
result = kmeans(points, k=3, seed=4)
top, members = top_cluster(result, points)
print("objective", round(result.objective, 4), "after", result.iterations, "iterations")
for c in range(3):
    in_c = result.assignments == c
    print(f"cluster {c}: {in_c.sum():>3} rows, mean probability {proba[in_c].mean():.3f}")
print("top cluster", top, "with", len(members), "rows;", "positives:",
      int(sum(data.y[data.ids.index(m)] for m in members)))

# %% [markdown]
# ## Enrichment
#
# A toy annotation set: one term covers mostly positive rows, the others
# are random. Row ids stand in for gene ids here.

# %%
rng = np.random.default_rng(0)
ids = np.array(data.ids)
positives = ids[data.y == 1]
annotations = [
    GoAnnotation("GO:TOY0001", "mostly positive", "process",
                 set(rng.choice(positives, 40, replace=False)) | set(rng.choice(ids, 10))),
    GoAnnotation("GO:TOY0002", "random A", "process", set(rng.choice(ids, 50, replace=False))),
    GoAnnotation("GO:TOY0003", "random B", "function", set(rng.choice(ids, 50, replace=False))),
]
for rec in enrich(members, data.ids, annotations):
    print(f"{rec.term_id}  k={rec.k:>3} K={rec.K:>3}  p={rec.p_value:.3g}  q={rec.q_value:.3g}  {rec.term_name}")

# %% [markdown]
# ## Which columns track the label

# %%
ranked = feature_label_correlation(data)
out = Path(tempfile.mkdtemp())
rows = emit_correlation_chart(ranked, 10, out / "correlations.csv", out / "correlations.svg")
truth = {data.feature_names[j] for j in informative}
for rec in rows:
    print(f"{rec.feature_name}  r={rec.r:+.3f}  {'informative' if rec.feature_name in truth else ''}")
print("chart written to", out / "correlations.svg")
