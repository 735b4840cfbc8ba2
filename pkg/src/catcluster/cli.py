"""Command line: one-hot fits, GRASP clustering runs, and the ten-reshuffle benchmark."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .clustering import build_design, relative_complexity
from .data import BINARY, Dataset, SplitPlan, load_csv, load_schema, split
from .glm import Family, fit_irls
from .grasp import GraspConfig, family_for, grasp_run, output_to_dict, holdout_scores
from .proximity import compute_proximity, export_dot, to_csv

log = logging.getLogger("catcluster")

FAMILIES = {"logit": Family.BERNOULLI_LOGIT, "poisson": Family.POISSON_LOG}


@dataclass
class RunReport:
    name: str
    metric: str
    original: list[float]
    clustered: list[float]
    relative_complexity: float
    config: dict = field(default_factory=dict)
    wall_clock_seconds: float | None = None

    @property
    def mean_original(self) -> float:
        return float(np.mean(self.original))

    @property
    def mean_clustered(self) -> float:
        return float(np.mean(self.clustered))

    def to_dict(self) -> dict:
        # wall-clock time is left out so reports are reproducible byte for byte
        return {
            "name": self.name,
            "metric": self.metric,
            "original": self.original,
            "clustered": self.clustered,
            "mean_original": self.mean_original,
            "mean_clustered": self.mean_clustered,
            "relative_complexity": self.relative_complexity,
            "config": self.config,
        }

    def summary(self) -> str:
        if self.metric == "ccr":
            head = ("Name", "Accuracy Original (%)", "Accuracy Clustered (%)", "Relative Complexity (%)")
            cells = (self.name, f"{100 * self.mean_original:.2f}", f"{100 * self.mean_clustered:.2f}",
                     f"{self.relative_complexity:.2f}")
        else:
            head = ("Name", "RMSE Original", "RMSE Clustered", "Relative Complexity (%)")
            cells = (self.name, f"{self.mean_original:.2f}", f"{self.mean_clustered:.2f}",
                     f"{self.relative_complexity:.2f}")
        widths = [max(len(a), len(b)) for a, b in zip(head, cells)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        return fmt.format(*head) + "\n" + fmt.format(*cells) + "\n"


def reshuffle_seed(seed: int, reshuffle_index: int) -> int:
    """GRASP seed for one reshuffle, independent of the split stream."""
    return int(np.random.SeedSequence([seed, reshuffle_index, 1]).generate_state(1)[0])


def _one_reshuffle(dataset: Dataset, plan: SplitPlan, config: GraspConfig, index: int) -> tuple[float, float]:
    train, test = split(dataset, plan, index)
    family = family_for(dataset.schema)
    original = fit_irls(build_design(train), train.y, family, config.fit)
    cfg = GraspConfig(m=config.m, k_prime=config.k_prime, rcl_size=config.rcl_size,
                      seed=reshuffle_seed(config.seed, index), payoff_split=config.payoff_split, fit=config.fit)
    out = grasp_run(train, cfg, test)
    key = "ccr" if family is Family.BERNOULLI_LOGIT else "rmse"
    return holdout_scores(original, test)[key], out.test_metrics[key]


def run_benchmark(dataset: Dataset, name: str, plan: SplitPlan = SplitPlan(),
                  config: GraspConfig = GraspConfig(), jobs: int = 1) -> RunReport:
    """Original vs clustered out-of-sample metric over ``plan.n_reshuffles`` train/test splits."""
    start = time.perf_counter()
    indices = range(plan.n_reshuffles)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_reshuffle, [dataset] * len(indices), [plan] * len(indices),
                                    [config] * len(indices), indices))
    else:
        results = [_one_reshuffle(dataset, plan, config, i) for i in indices]
    metric = "ccr" if dataset.schema.response_type == BINARY else "rmse"
    return RunReport(
        name=name,
        metric=metric,
        original=[r[0] for r in results],
        clustered=[r[1] for r in results],
        relative_complexity=relative_complexity(dataset.schema, k_prime=config.k_prime),
        config={"split": {"train_fraction": plan.train_fraction, "n_reshuffles": plan.n_reshuffles,
                          "seed": plan.seed},
                "grasp": config.to_dict()},
        wall_clock_seconds=time.perf_counter() - start,
    )


def _load(args) -> Dataset:
    schema = load_schema(args.schema)
    dataset = load_csv(args.data, schema)
    if args.family is not None and FAMILIES[args.family] is not family_for(schema):
        raise ValueError(f"--family {args.family} does not match the schema's {schema.response_type} response")
    return dataset


def _grasp_config(args) -> GraspConfig:
    return GraspConfig(m=args.m, k_prime=args.kprime, rcl_size=args.rcl, seed=args.seed,
                       payoff_split=args.payoff_split)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_fit(args) -> int:
    dataset = _load(args)
    family = family_for(dataset.schema)
    plan = SplitPlan(args.train_frac, args.reshuffles, args.seed)
    key = "ccr" if family is Family.BERNOULLI_LOGIT else "rmse"
    scores = []
    for i in range(plan.n_reshuffles):
        train, test = split(dataset, plan, i)
        scores.append(holdout_scores(fit_irls(build_design(train), train.y, family), test)[key])
    model = fit_irls(build_design(dataset), dataset.y, family)
    width = max(len(str(c)) for c in model.columns)
    for col, beta in zip(model.columns, model.coefficients):
        print(f"{str(col):<{width}}  {beta: .6f}")
    flags = f" flags={','.join(model.flags)}" if model.flags else ""
    print(f"converged={model.converged} iterations={model.n_iterations} deviance={model.deviance:.4f}{flags}")
    print(f"test {key} over {plan.n_reshuffles} reshuffles: mean {np.mean(scores):.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "model.json", model.to_dict())
        _write_json(out / "fit_report.json", {"metric": key, "scores": scores, "mean": float(np.mean(scores))})
    return 0


def cmd_cluster(args) -> int:
    dataset = _load(args)
    schema = dataset.schema
    plan = SplitPlan(args.train_frac, max(args.reshuffles, args.reshuffle + 1), args.seed)
    train, test = split(dataset, plan, args.reshuffle)
    output = grasp_run(train, _grasp_config(args), test)
    out = Path(args.out)
    (out / "proximity").mkdir(parents=True, exist_ok=True)
    _write_json(out / "best_model.json", output.best.model.to_dict())
    _write_json(out / "grasp.json", output_to_dict(output, schema))
    for name in output.eligible:
        matrix = compute_proximity(output.all_iterations, name, schema.predictor(name).categories)
        (out / "proximity" / f"{name}.csv").write_text(to_csv(matrix), encoding="utf-8")
        (out / "proximity" / f"{name}.dot").write_text(export_dot(matrix, args.threshold), encoding="utf-8")
    print(f"best repeat {output.best.repeat}: payoff {output.best.payoff:.4f}, test {output.test_metrics}")
    for name, c in output.best.clusterings.items():
        labels = [schema.predictor(name).categories[i] for i in c.order]
        groups: dict[int, list[str]] = {}
        for lab, g in zip(labels, c.assignment):
            groups.setdefault(g, []).append(lab)
        print(f"  {name}: " + " | ".join(", ".join(v) for v in groups.values()))
    return 0


def cmd_benchmark(args) -> int:
    dataset = _load(args)
    plan = SplitPlan(args.train_frac, args.reshuffles, args.seed)
    name = args.name or Path(args.data).parent.name
    report = run_benchmark(dataset, name, plan, _grasp_config(args), jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", report.to_dict())
    (out / "summary.txt").write_text(report.summary(), encoding="utf-8")
    sys.stdout.write(report.summary())
    print(f"wall clock: {report.wall_clock_seconds:.1f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", required=True, help="CSV file with a header row")
    common.add_argument("--schema", required=True, help="JSON schema describing predictors and response")
    common.add_argument("--family", choices=sorted(FAMILIES), help="defaults to the schema's response type")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--train-frac", type=float, default=0.7)
    common.add_argument("--reshuffles", type=int, default=10)
    common.add_argument("-v", "--verbose", action="store_true")

    grasp = argparse.ArgumentParser(add_help=False)
    grasp.add_argument("--kprime", type=int, default=2)
    grasp.add_argument("--m", type=int, default=100, help="GRASP repeats")
    grasp.add_argument("--rcl", type=int, default=None, help="fixed candidate-list size (default: 3 or 2 by cardinality)")
    grasp.add_argument("--payoff-split", type=float, default=0.25,
                       help="share of the training sample held out to score candidates; 0 scores on the test sample")

    parser = argparse.ArgumentParser(prog="catcluster", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fit", parents=[common], help="one-hot GLM: coefficients and test metric")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("cluster", parents=[common, grasp], help="GRASP run on one train/test split")
    p.add_argument("--reshuffle", type=int, default=0, help="which train/test split to use")
    p.add_argument("--threshold", type=float, default=0.0, help="proximity graph edge threshold")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)
    p = sub.add_parser("benchmark", parents=[common, grasp], help="original vs clustered over all reshuffles")
    p.add_argument("--name")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"catcluster: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
