# %% [markdown]
# # Original versus clustered, over ten reshuffles
#
# The benchmark repeats a 70/30 split ten times, fits the one-hot model
# and runs GRASP on each training part, and averages the test accuracy.
# This mirrors `catcluster benchmark` on the command line.

# %%
from pathlib import Path

from catcluster.cli import run_benchmark
from catcluster.data import SplitPlan, load_csv, load_schema
from catcluster.grasp import GraspConfig

root = Path(__file__).resolve().parents[1] / "datasets"
for name in ("car_evaluation", "solar"):
    data = load_csv(root / name / "data.csv", load_schema(root / name / "schema.json"))
    report = run_benchmark(data, name, SplitPlan(0.7, 10, 0), GraspConfig(m=100))
    print(report.summary())
    print(f"took {report.wall_clock_seconds:.1f}s")
