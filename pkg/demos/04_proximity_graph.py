# %% [markdown]
# # Which categories travel together?
#
# Every GRASP pass yields a clustered model. Counting how often two
# categories land in the same cluster across passes gives a proximity
# between 0 and 1, which we export as a Graphviz graph.

# %%
from pathlib import Path

from catcluster.data import SplitPlan, load_csv, load_schema, split
from catcluster.grasp import GraspConfig, grasp_run
from catcluster.proximity import compute_proximity, export_dot, to_csv

root = Path(__file__).resolve().parents[1] / "datasets" / "german"
data = load_csv(root / "data.csv", load_schema(root / "schema.json"))
train, _ = split(data, SplitPlan(), 0)
out = grasp_run(train, GraspConfig(m=30, seed=4))

# %%
purpose = data.schema.predictor("purpose")
matrix = compute_proximity(out.all_iterations, "purpose", purpose.categories)
print(to_csv(matrix))

# %% [markdown]
# Render with `dot -Tpng purpose.dot -o purpose.png`; thicker edges mean
# the two purposes were grouped more often. Weak links are dropped here.

# %%
Path("purpose.dot").write_text(export_dot(matrix, threshold=0.5))
print(export_dot(matrix, threshold=0.5))
