"""Naive Bayes regression trained on swarm-evolved artificial surrogate data."""

from .kde import Kde1, Kde2, select_bandwidth1, select_bandwidth2
from .linreg import LinearModel, fit_ols, lr_rmse
from .nbr import ModeSearchConfig, NbrModel, predict, predict_batch, rmse, train
from .peak import PeakConfig, contour_grid, generate_peak
from .stats import RunReport, aggregate, t_test_one_sample_less
from .surrogate import PipelineConfig, SurrogateCodec, evolve, init_bounds, make_fitness
from .swarm import CsoConfig, OptResult, SpsoConfig, cso_minimize, spso_minimize
from .tabular import AttributeSchema, Dataset, Kind, impute, load_dataset, split, stats

__version__ = "0.1.0"

__all__ = [
    "AttributeSchema",
    "CsoConfig",
    "Dataset",
    "Kde1",
    "Kde2",
    "Kind",
    "LinearModel",
    "ModeSearchConfig",
    "NbrModel",
    "OptResult",
    "PeakConfig",
    "PipelineConfig",
    "RunReport",
    "SpsoConfig",
    "SurrogateCodec",
    "aggregate",
    "contour_grid",
    "cso_minimize",
    "evolve",
    "fit_ols",
    "generate_peak",
    "impute",
    "init_bounds",
    "load_dataset",
    "lr_rmse",
    "make_fitness",
    "predict",
    "predict_batch",
    "rmse",
    "select_bandwidth1",
    "select_bandwidth2",
    "split",
    "spso_minimize",
    "stats",
    "t_test_one_sample_less",
    "train",
]
