"""Experiment harness: configuration, orchestration, reports, and the CLI.

A run loads each dataset once, fixes a single train/test split, computes
the deterministic baselines on it, then sweeps the (phi, n) grid running
the evolutionary pipeline ``repeats`` times per cell with derived seeds.
Reports are written as machine-readable JSON plus a formatted text table,
with the best surrogate dataset of each cell exported as CSV.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import linreg, nbr, peak, stats, surrogate, tabular
from .nbr import DEFAULT_MODE_SEARCH, ModeSearchConfig
from .peak import PeakConfig
from .surrogate import PipelineConfig
from .tabular import Dataset

log = logging.getLogger("swarmnbr")

ALGORITHMS = ("nbr", "lr", "cso-nbr", "spso-nbr")


@dataclass(frozen=True)
class ExperimentSpec:
    data_paths: tuple[str, ...]
    target: str | int = -1
    data_format: str | None = None
    algorithm: str = "cso-nbr"
    split_fraction: float = 0.66
    shuffle: bool = True
    seed: int = 0
    phi_values: tuple[float, ...] = (0.1,)
    n_values: tuple[int, ...] = (10,)
    swarm_size: int = 100
    iterations: int = 1000
    repeats: int = 10
    inertia: float = 0.6
    cognitive: float = 1.7
    social: float = 1.7
    workers: int = 1
    fitness_subsample: int | None = None
    mode_search: ModeSearchConfig = DEFAULT_MODE_SEARCH
    out_dir: str | None = None

    def __post_init__(self):
        if not self.data_paths:
            raise ValueError("no dataset paths given")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.phi_values or not self.n_values:
            raise ValueError("sweep lists must be non-empty")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split fraction must be in (0, 1)")


def expected_evaluations(algorithm: str, swarm_size: int, iterations: int) -> int:
    if algorithm == "spso":
        return swarm_size * (iterations + 1)
    return swarm_size + (swarm_size // 2) * iterations


@dataclass
class CellOutcome:
    """One sweep cell's record plus its exportable best surrogate."""

    record: dict
    best_surrogate: Dataset | None = None


def _baselines(train: Dataset, test: Dataset, cfg: ModeSearchConfig) -> tuple[float, float]:
    model = nbr.train(train, cfg)
    nbr_rmse = nbr.rmse(model, test, cfg)
    lin = linreg.fit_ols(train)
    lr_rmse = linreg.lr_rmse(lin, test)
    return nbr_rmse, lr_rmse


def run_dataset(spec: ExperimentSpec, path: str) -> list[CellOutcome]:
    name = Path(path).stem
    ds = tabular.impute(tabular.load_dataset(path, spec.data_format, spec.target))
    train, test = tabular.split(ds, spec.split_fraction, spec.seed, spec.shuffle)
    log.info("%s: %d train rows, %d test rows", name, train.n_rows, test.n_rows)

    baseline_nbr, baseline_lr = _baselines(train, test, spec.mode_search)
    log.info("%s: NBR baseline %.4f, OLS baseline %.4f", name, baseline_nbr, baseline_lr)

    base_record = {
        "dataset": name,
        "algo": spec.algorithm,
        "s": spec.swarm_size,
        "t_max": spec.iterations,
        "repeats": spec.repeats,
        "baseline_nbr_rmse": baseline_nbr,
        "lr_rmse": baseline_lr,
    }

    if spec.algorithm in ("nbr", "lr"):
        record = dict(
            base_record,
            phi=None,
            n=None,
            seed=spec.seed,
            samples=[],
            mean=None,
            std=None,
            best=None,
            p_value=None,
            wall_seconds=[],
        )
        return [CellOutcome(record)]

    algorithm = "cso" if spec.algorithm == "cso-nbr" else "spso"
    outcomes = []
    cells = list(itertools.product(spec.phi_values, spec.n_values))
    for cell_index, (phi, n) in enumerate(cells):
        cell_seed = spec.seed + 1000 * cell_index
        pipeline = PipelineConfig(
            n_rows=n,
            algorithm=algorithm,
            swarm_size=spec.swarm_size,
            iterations=spec.iterations,
            phi=phi,
            inertia=spec.inertia,
            cognitive=spec.cognitive,
            social=spec.social,
            repeats=spec.repeats,
            seed=cell_seed,
            mode_search=spec.mode_search,
            workers=spec.workers,
            fitness_subsample=spec.fitness_subsample,
        )
        expected = expected_evaluations(algorithm, spec.swarm_size, spec.iterations)
        samples: list[float] = []
        walls: list[float] = []
        best_rmse = float("inf")
        best_surrogate: Dataset | None = None
        for i in range(spec.repeats):
            t0 = time.perf_counter()
            surrogate_ds, model, result = surrogate.evolve(train, pipeline, seed=cell_seed + i)
            wall = time.perf_counter() - t0
            if result.evaluations != expected:
                raise RuntimeError(
                    f"{name}: run used {result.evaluations} fitness evaluations, "
                    f"expected {expected}"
                )
            test_rmse = nbr.rmse(model, test, spec.mode_search)
            samples.append(test_rmse)
            walls.append(wall)
            if test_rmse < best_rmse:
                best_rmse = test_rmse
                best_surrogate = surrogate_ds
            log.info(
                "%s phi=%g n=%d repeat %d/%d: fitness %.4f, test RMSE %.4f (%d evals, %.1fs)",
                name, phi, n, i + 1, spec.repeats,
                result.best_fitness, test_rmse, result.evaluations, wall,
            )
        report = stats.aggregate(
            samples,
            baseline_nbr,
            config={"phi": phi, "n": n, "s": spec.swarm_size,
                    "t_max": spec.iterations, "seed": cell_seed},
        )
        record = dict(
            base_record,
            phi=phi,
            n=n,
            seed=cell_seed,
            samples=list(report.samples),
            mean=report.mean,
            std=report.stddev,
            best=report.best,
            p_value=report.p_value,
            wall_seconds=walls,
        )
        outcomes.append(CellOutcome(record, best_surrogate))
    return outcomes


def run_experiment(spec: ExperimentSpec) -> list[CellOutcome]:
    """All sweep cells of all datasets; writes reports when out_dir is set."""
    outcomes: list[CellOutcome] = []
    for path in spec.data_paths:
        outcomes.extend(run_dataset(spec, path))
    if spec.out_dir is not None:
        write_report(outcomes, spec.out_dir)
    return outcomes


def _format_cell(value, width=12) -> str:
    if value is None:
        return " " * (width - 1) + "-"
    return f"{value:>{width}.4f}"


def format_table(records: list[dict]) -> str:
    """Text table mirroring the report columns: baselines, mean +/- std, p, best."""
    lines = [
        f"{'phi':>6} {'n':>4} {'NBR':>12} {'OLS':>12} "
        f"{'mean':>12} {'std':>12} {'p':>8} {'best':>12}"
    ]
    for rec in records:
        phi = f"{rec['phi']:>6}" if rec["phi"] is not None else "     -"
        n = f"{rec['n']:>4}" if rec["n"] is not None else "   -"
        p = f"{rec['p_value']:>8.4f}" if rec["p_value"] is not None else "       -"
        lines.append(
            f"{phi} {n} {_format_cell(rec['baseline_nbr_rmse'])} "
            f"{_format_cell(rec['lr_rmse'])} {_format_cell(rec['mean'])} "
            f"{_format_cell(rec['std'])} {p} {_format_cell(rec['best'])}"
        )
    return "\n".join(lines) + "\n"


def write_report(outcomes: list[CellOutcome], out_dir) -> list[Path]:
    """One JSON report and one text table per dataset, plus surrogate CSVs."""
    if not outcomes:
        raise ValueError("nothing to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    by_dataset: dict[str, list[CellOutcome]] = {}
    for oc in outcomes:
        by_dataset.setdefault(oc.record["dataset"], []).append(oc)
    for name, group in by_dataset.items():
        records = [oc.record for oc in group]
        json_path = out / f"{name}.json"
        json_path.write_text(
            json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        written.append(json_path)
        txt_path = out / f"{name}.txt"
        txt_path.write_text(format_table(records), encoding="utf-8")
        written.append(txt_path)
        for oc in group:
            if oc.best_surrogate is None:
                continue
            csv_path = out / (
                f"{name}_surrogate_phi{oc.record['phi']}_n{oc.record['n']}.csv"
            )
            tabular.write_csv(oc.best_surrogate, csv_path, target_last=True)
            written.append(csv_path)
    return written


def read_report(path) -> list[dict]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def run_peak_analysis(
    samples: int = 100,
    seed: int = 0,
    out_dir=None,
    pipeline: PipelineConfig | None = None,
    grid_cfg: PeakConfig | None = None,
) -> dict:
    """Peak-problem study: baselines, evolution, and contour exports."""
    pipeline = pipeline or PipelineConfig()
    grid_cfg = grid_cfg or PeakConfig(samples=samples, seed=seed)
    train = peak.generate_peak(replace(grid_cfg, samples=samples, seed=seed))
    test = peak.generate_peak(replace(grid_cfg, samples=samples, seed=seed + 1))

    cfg = pipeline.mode_search
    nbr_model = nbr.train(train, cfg)
    lin = linreg.fit_ols(train)
    record = {
        "dataset": "peak",
        "algo": "cso-nbr" if pipeline.algorithm == "cso" else "spso-nbr",
        "phi": pipeline.phi,
        "n": pipeline.n_rows,
        "s": pipeline.swarm_size,
        "t_max": pipeline.iterations,
        "seed": seed,
        "repeats": pipeline.repeats,
        "baseline_nbr_rmse": nbr.rmse(nbr_model, test, cfg),
        "lr_rmse": linreg.lr_rmse(lin, test),
    }
    log.info("peak: NBR baseline %.4f, OLS baseline %.4f",
             record["baseline_nbr_rmse"], record["lr_rmse"])

    samples_rmse: list[float] = []
    walls: list[float] = []
    best_rmse = float("inf")
    best_model = None
    best_surrogate = None
    for i in range(pipeline.repeats):
        t0 = time.perf_counter()
        surrogate_ds, model, result = surrogate.evolve(train, pipeline, seed=seed + i)
        walls.append(time.perf_counter() - t0)
        test_rmse = nbr.rmse(model, test, cfg)
        samples_rmse.append(test_rmse)
        if test_rmse < best_rmse:
            best_rmse, best_model, best_surrogate = test_rmse, model, surrogate_ds
        log.info("peak repeat %d/%d: fitness %.4f, test RMSE %.4f (%.1fs)",
                 i + 1, pipeline.repeats, result.best_fitness, test_rmse, walls[-1])
    report = stats.aggregate(
        samples_rmse,
        record["baseline_nbr_rmse"],
        config={"phi": pipeline.phi, "n": pipeline.n_rows,
                "s": pipeline.swarm_size, "t_max": pipeline.iterations, "seed": seed},
    )
    record.update(
        samples=list(report.samples),
        mean=report.mean,
        std=report.stddev,
        best=report.best,
        p_value=report.p_value,
        wall_seconds=walls,
    )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "peak.json").write_text(
            json.dumps([record], indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (out / "peak.txt").write_text(format_table([record]), encoding="utf-8")
        tabular.write_csv(best_surrogate, out / "peak_surrogate.csv", target_last=True)

        def model_predictor(points):
            rows = np.column_stack([points, np.full(len(points), np.nan)])
            return nbr.predict_batch(best_model, rows, cfg)

        def nbr_predictor(points):
            rows = np.column_stack([points, np.full(len(points), np.nan)])
            return nbr.predict_batch(nbr_model, rows, cfg)

        def lr_predictor(points):
            rows = np.column_stack([points, np.full(len(points), np.nan)])
            return linreg.lr_predict(lin, Dataset(peak.PEAK_SCHEMA, rows))

        def truth_predictor(points):
            return peak.peak_height(points[:, 0], points[:, 1], grid_cfg.amplitude)

        for fname, predictor in [
            ("contour_truth.csv", truth_predictor),
            ("contour_lr.csv", lr_predictor),
            ("contour_nbr.csv", nbr_predictor),
            ("contour_cso_nbr.csv", model_predictor),
        ]:
            peak.write_contour_csv(out / fname, peak.contour_grid(predictor, grid_cfg))
    return record


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmnbr",
        description="Train naive Bayes regression on evolved artificial surrogate data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments on tabular dataset files")
    run.add_argument("--data", nargs="+", required=True, help="dataset file(s)")
    run.add_argument("--format", choices=["csv", "arff"], default=None)
    run.add_argument("--target", default="-1",
                     help="target column name or index (default: last column)")
    run.add_argument("--algo", choices=list(ALGORITHMS), default="cso-nbr")
    run.add_argument("--phi", nargs="+", type=float, default=[0.1])
    run.add_argument("--n", nargs="+", type=int, default=[10])
    run.add_argument("--swarm", type=int, default=100)
    run.add_argument("--iters", type=int, default=1000)
    run.add_argument("--repeats", type=int, default=10)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--split", type=float, default=0.66)
    run.add_argument("--no-shuffle", action="store_true",
                     help="keep row order when splitting (time-series mode)")
    run.add_argument("--fitness-subsample", type=int, default=None, metavar="M",
                     help="evaluate fitness on at most M training rows")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--quick", action="store_true",
                     help="CI profile: swarm 50, 200 iterations, 3 repeats")
    budget = run.add_mutually_exclusive_group()
    budget.add_argument("--spso-half-swarm", action="store_true",
                        help="SPSO budget matching: swarm 50, full iterations")
    budget.add_argument("--spso-half-iters", action="store_true",
                        help="SPSO budget matching: full swarm, half iterations")
    run.add_argument("--out", default=None, help="report output directory")

    pk = sub.add_parser("peak", help="run the synthetic 2-D peak study")
    pk.add_argument("--samples", type=int, default=100)
    pk.add_argument("--seed", type=int, default=0)
    pk.add_argument("--workers", type=int, default=1)
    pk.add_argument("--quick", action="store_true")
    pk.add_argument("--out", required=True)
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    target: str | int = args.target
    try:
        target = int(args.target)
    except (TypeError, ValueError):
        pass
    swarm_size, iterations, repeats = args.swarm, args.iters, args.repeats
    if args.quick:
        swarm_size, iterations, repeats = 50, 200, 3
    if args.spso_half_swarm:
        swarm_size = swarm_size // 2
    if args.spso_half_iters:
        iterations = iterations // 2
    return ExperimentSpec(
        data_paths=tuple(args.data),
        target=target,
        data_format=args.format,
        algorithm=args.algo,
        split_fraction=args.split,
        shuffle=not args.no_shuffle,
        seed=args.seed,
        phi_values=tuple(args.phi),
        n_values=tuple(args.n),
        swarm_size=swarm_size,
        iterations=iterations,
        repeats=repeats,
        workers=args.workers,
        fitness_subsample=args.fitness_subsample,
        out_dir=args.out,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        spec = _spec_from_args(args)
        outcomes = run_experiment(spec)
        print(format_table([oc.record for oc in outcomes]), end="")
        return 0
    if args.command == "peak":
        if args.quick:
            pipeline = PipelineConfig(swarm_size=50, iterations=200, repeats=3,
                                      workers=args.workers)
        else:
            pipeline = PipelineConfig(workers=args.workers)
        record = run_peak_analysis(
            samples=args.samples, seed=args.seed, out_dir=args.out, pipeline=pipeline
        )
        print(format_table([record]), end="")
        return 0
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
