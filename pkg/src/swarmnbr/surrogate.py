"""Particle <-> dataset codec and the surrogate-data training pipeline.

A candidate solution is a flat vector holding an n-row artificial
dataset in row-major order (row r, attribute a at index r*d + a).
Numeric cells are copied verbatim, so evolved values may leave the real
attribute ranges; categorical cells are clamped to the legal index range
and rounded to the nearest category.  The fitness of a vector is the
RMSE that a model trained on the decoded dataset achieves on the real
training data, which the optimiser then minimises.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import nbr, swarm
from .nbr import DEFAULT_MODE_SEARCH, ModeSearchConfig, NbrModel
from .swarm import CsoConfig, OptResult, SpsoConfig
from .tabular import Dataset, Kind


@dataclass(frozen=True)
class SurrogateCodec:
    schema: tuple
    n_rows: int

    def __post_init__(self):
        if self.n_rows < 1:
            raise ValueError("surrogate datasets need at least one row")
        object.__setattr__(self, "schema", tuple(self.schema))

    @property
    def n_attributes(self) -> int:
        return len(self.schema)

    @property
    def dimension(self) -> int:
        return self.n_rows * len(self.schema)

    def decode(self, x) -> Dataset:
        """Flat vector -> schema-valid dataset; the vector is not modified."""
        vec = np.asarray(x, dtype=float)
        if vec.shape != (self.dimension,):
            raise ValueError(
                f"expected a vector of length {self.dimension}, got shape {vec.shape}"
            )
        cells = vec.reshape(self.n_rows, self.n_attributes).copy()
        for j, attr in enumerate(self.schema):
            if attr.kind is Kind.CATEGORICAL:
                top = len(attr.categories) - 1
                clamped = np.clip(cells[:, j], 0.0, float(top))
                cells[:, j] = np.floor(clamped + 0.5)  # round half up
        return Dataset(self.schema, cells)

    def encode(self, ds: Dataset) -> np.ndarray:
        """Inverse of decode for datasets with integral category cells."""
        if tuple(ds.schema) != self.schema or ds.n_rows != self.n_rows:
            raise ValueError("dataset does not match this codec's schema and row count")
        return ds.rows.reshape(-1).copy()


def init_bounds(train: Dataset, codec: SurrogateCodec) -> np.ndarray:
    """Per-dimension initialisation box: attribute min/max from the training data.

    Categorical dimensions span the full index range [0, k-1].
    """
    per_attr = np.empty((codec.n_attributes, 2))
    for j, attr in enumerate(codec.schema):
        if attr.kind is Kind.CATEGORICAL:
            per_attr[j] = (0.0, float(len(attr.categories) - 1))
        else:
            col = train.rows[:, j]
            per_attr[j] = (float(col.min()), float(col.max()))
    return np.tile(per_attr, (codec.n_rows, 1))


@dataclass(frozen=True)
class SurrogateFitness:
    """RMSE on the real training data of a model trained on the decoded vector.

    Total over all real vectors: decode clamps categorical cells and the
    density estimators fall back to fixed bandwidths on degenerate
    columns.  Pure and picklable, so evaluations may run in worker
    processes.
    """

    codec: SurrogateCodec
    train_data: Dataset
    mode_search: ModeSearchConfig = DEFAULT_MODE_SEARCH
    reference_range: float = field(default=0.0)

    def __call__(self, x) -> float:
        model = self.train_model(x)
        return nbr.rmse(model, self.train_data, self.mode_search)

    def train_model(self, x) -> NbrModel:
        decoded = self.codec.decode(x)
        return nbr.train(
            decoded, self.mode_search, reference_range=self.reference_range
        )


def make_fitness(
    train: Dataset,
    n_rows: int,
    mode_search: ModeSearchConfig = DEFAULT_MODE_SEARCH,
    subsample: int | None = None,
    subsample_seed: int = 0,
) -> SurrogateFitness:
    """Build the pipeline fitness for a training dataset.

    ``subsample`` caps the number of real rows used in each evaluation
    (a seeded choice, fixed for the fitness lifetime) for very large
    training sets.
    """
    eval_data = train
    if subsample is not None and subsample < train.n_rows:
        rng = np.random.default_rng(subsample_seed)
        keep = np.sort(rng.choice(train.n_rows, size=subsample, replace=False))
        eval_data = Dataset(train.schema, train.rows[keep])
    y = train.target_values()
    ref = float(y.max() - y.min())
    codec = SurrogateCodec(tuple(train.schema), n_rows)
    return SurrogateFitness(codec, eval_data, mode_search, ref)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one evolution run needs besides the data."""

    n_rows: int = 10
    algorithm: str = "cso"  # "cso" or "spso"
    swarm_size: int = 100
    iterations: int = 1000
    phi: float = 0.1
    inertia: float = 0.6
    cognitive: float = 1.7
    social: float = 1.7
    repeats: int = 10
    seed: int = 0
    mode_search: ModeSearchConfig = DEFAULT_MODE_SEARCH
    workers: int = 1
    fitness_subsample: int | None = None

    def __post_init__(self):
        if self.n_rows < 1:
            raise ValueError("surrogate row count must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeat count must be >= 1")
        if self.algorithm not in ("cso", "spso"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


def evolve(
    train: Dataset, cfg: PipelineConfig, seed: int | None = None
) -> tuple[Dataset, NbrModel, OptResult]:
    """One optimisation run: evolve a surrogate dataset for ``train``.

    Returns the decoded best surrogate dataset, the model trained on it,
    and the optimisation result.  ``seed`` overrides ``cfg.seed`` so
    callers can derive per-repeat seeds.
    """
    if train.n_rows == 0:
        raise ValueError("training data is empty")
    fitness = make_fitness(
        train,
        cfg.n_rows,
        cfg.mode_search,
        subsample=cfg.fitness_subsample,
        subsample_seed=cfg.seed,
    )
    bounds = init_bounds(train, fitness.codec)
    run_seed = cfg.seed if seed is None else seed
    if cfg.algorithm == "cso":
        opt_cfg = CsoConfig(
            swarm_size=cfg.swarm_size,
            iterations=cfg.iterations,
            bounds=bounds,
            phi=cfg.phi,
            seed=run_seed,
            workers=cfg.workers,
        )
        result = swarm.cso_minimize(fitness, opt_cfg)
    else:
        opt_cfg = SpsoConfig(
            swarm_size=cfg.swarm_size,
            iterations=cfg.iterations,
            bounds=bounds,
            inertia=cfg.inertia,
            cognitive=cfg.cognitive,
            social=cfg.social,
            seed=run_seed,
            workers=cfg.workers,
        )
        result = swarm.spso_minimize(fitness, opt_cfg)
    surrogate_ds = fitness.codec.decode(result.best_position)
    model = fitness.train_model(result.best_position)
    return surrogate_ds, model, result
