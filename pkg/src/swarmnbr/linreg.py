"""Ordinary least squares baseline, ridge-stabilised, with one-hot encoding.

The small ridge term keeps the normal equations solvable on singular
designs (constant or duplicated columns).  Note this is plain least
squares without any attribute selection; reports should label it
"OLS (not M5')".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tabular import Dataset, Kind


@dataclass(frozen=True)
class LinearModel:
    schema: tuple
    target_index: int
    coefficients: np.ndarray  # one per encoded feature column
    intercept: float
    encoding: tuple[tuple[int, ...], ...]  # attribute index -> encoded column indices


def _design_matrix(ds: Dataset) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    cols: list[np.ndarray] = []
    encoding: list[tuple[int, ...]] = []
    for j, attr in enumerate(ds.schema):
        if attr.is_target:
            encoding.append(())
            continue
        if attr.kind is Kind.NUMERIC:
            encoding.append((len(cols),))
            cols.append(ds.rows[:, j])
        else:
            # one-hot with the last category dropped
            k = len(attr.categories)
            idx = ds.rows[:, j].astype(int)
            start = len(cols)
            for c in range(k - 1):
                cols.append((idx == c).astype(float))
            encoding.append(tuple(range(start, len(cols))))
    if cols:
        x = np.column_stack(cols)
    else:
        x = np.empty((ds.n_rows, 0))
    return x, tuple(encoding)


def fit_ols(ds: Dataset, ridge: float = 1e-8) -> LinearModel:
    """Fit by normal equations with an L2 penalty of ``ridge`` on all weights."""
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    x, encoding = _design_matrix(ds)
    y = ds.target_values()
    design = np.column_stack([np.ones(ds.n_rows), x])
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    beta = np.linalg.solve(gram, design.T @ y)
    return LinearModel(
        schema=tuple(ds.schema),
        target_index=ds.target_index,
        coefficients=beta[1:],
        intercept=float(beta[0]),
        encoding=encoding,
    )


def lr_predict(model: LinearModel, ds: Dataset) -> np.ndarray:
    x, _ = _design_matrix(ds)
    return model.intercept + x @ model.coefficients


def lr_rmse(model: LinearModel, ds: Dataset) -> float:
    if ds.n_rows == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    err = lr_predict(model, ds) - ds.target_values()
    return float(np.sqrt(np.mean(err * err)))
