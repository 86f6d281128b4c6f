"""Naive Bayes for regression with kernel conditional densities.

A trained model holds one bivariate KDE per continuous attribute, one
univariate KDE per category of each categorical attribute, and a
univariate KDE over the target.  Predictions are the mode of the
unnormalised posterior over the target, located by a recursive grid
search; the posterior denominator is never computed because the mode
does not depend on it.

Training rows are brought into a canonical sort order first, so models
built from permutations of the same rows are bit-identical, as are
their predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kde
from .kde import DENSITY_FLOOR, SQRT_2PI
from .tabular import Dataset, Kind


@dataclass(frozen=True)
class ModeSearchConfig:
    """Recursive grid search over the target range.

    Each level places ``grid_size`` equally spaced points; subsequent
    levels re-grid the interval spanned by the two neighbours of the
    current argmax.  ``range_expansion`` widens the search range beyond
    the observed target span on each side.
    """

    grid_size: int = 11
    levels: int = 6
    range_expansion: float = 0.1

    def __post_init__(self):
        if self.grid_size < 3:
            raise ValueError("mode search needs at least 3 grid points per level")
        if self.levels < 1:
            raise ValueError("mode search needs at least one level")
        if self.range_expansion < 0:
            raise ValueError("range expansion must be nonnegative")


DEFAULT_MODE_SEARCH = ModeSearchConfig()


def mode_search_resolution(cfg: ModeSearchConfig, lo: float, hi: float) -> float:
    """Grid spacing at the final search level."""
    step = (hi - lo) / (cfg.grid_size - 1)
    for _ in range(cfg.levels - 1):
        step = 2.0 * step / (cfg.grid_size - 1)
    return step


@dataclass(frozen=True)
class _ContinuousDensity:
    column: int
    x: np.ndarray  # attribute values in canonical row order
    h_x: float
    h_y: float  # jointly selected target bandwidth, reused for the per-attribute marginal


@dataclass(frozen=True)
class _CategoricalDensity:
    column: int
    priors: np.ndarray  # add-one smoothed P(X = v), sums to 1
    indices: tuple[np.ndarray, ...]  # per category, indices into the canonical target vector
    bandwidths: np.ndarray  # per category; NaN for categories with no training rows


@dataclass(frozen=True)
class NbrModel:
    schema: tuple
    target_index: int
    y: np.ndarray  # target values in canonical row order
    h_y: float  # global target-marginal bandwidth
    y_lo: float
    y_hi: float
    continuous: tuple[_ContinuousDensity, ...]
    categorical: tuple[_CategoricalDensity, ...]

    def __post_init__(self):
        # constants of the grid evaluation, laid out as [marginal, *continuous]
        n = self.y.size
        neg_inv = np.empty(1 + len(self.continuous))
        neg_inv[0] = -1.0 / (2.0 * self.h_y * self.h_y)
        joint_norm = np.empty(len(self.continuous))
        marg_norm = np.empty(len(self.continuous))
        for k, attr in enumerate(self.continuous):
            neg_inv[1 + k] = -1.0 / (2.0 * attr.h_y * attr.h_y)
            joint_norm[k] = 1.0 / (n * attr.h_x * attr.h_y * 2.0 * math.pi)
            marg_norm[k] = 1.0 / (n * attr.h_y * SQRT_2PI)
        object.__setattr__(self, "_neg_inv_two_h2", neg_inv)
        object.__setattr__(self, "_joint_norm", joint_norm)
        object.__setattr__(self, "_marg_norm", marg_norm)


def _fallback_bandwidth(reference_range: float) -> float:
    return max(1e-3, 1e-3 * abs(reference_range))


def _select1(values: np.ndarray, grid_size: int, fallback: float) -> float:
    if values.size < 2 or float(np.std(values, ddof=1)) == 0.0:
        return fallback
    h, _ = kde.select_bandwidth1(values, kde.default_grid(values, grid_size))
    return h


def train(
    ds: Dataset,
    cfg: ModeSearchConfig = DEFAULT_MODE_SEARCH,
    grid_size: int = kde.DEFAULT_GRID_SIZE,
    reference_range: float | None = None,
) -> NbrModel:
    """Fit all density estimators on an imputed dataset.

    ``reference_range`` sets the scale of the fixed fallback bandwidth
    used for degenerate columns (fewer than two rows, or zero variance);
    it defaults to the span of this dataset's target but callers fitting
    many small derived datasets should pass the span of the original
    training target so the fallback scale stays meaningful.
    """
    rows = np.asarray(ds.rows, dtype=float)
    if rows.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    if np.isnan(rows).any():
        raise ValueError("dataset must be imputed before training")
    t = ds.target_index

    # Canonical order: sort by target, then feature columns left to right.
    feature_cols = [j for j in range(rows.shape[1]) if j != t]
    keys = tuple(rows[:, j] for j in reversed(feature_cols)) + (rows[:, t],)
    rows = rows[np.lexsort(keys)]
    y = rows[:, t].copy()
    n = y.size

    ref = float(y.max() - y.min()) if reference_range is None else reference_range
    fallback = _fallback_bandwidth(ref)

    # Prior f(Y) bandwidth: normal-reference rule.  Cross-entropy selection is
    # reserved for the conditional estimators; applying it to the prior makes
    # the posterior mode snap to spikes of the target marginal and measurably
    # degrades predictions whenever the target distribution is sharply skewed.
    if n >= 2 and float(np.std(y, ddof=1)) > 0:
        h_y = kde.silverman_bandwidth(y)
    else:
        h_y = fallback
    span = float(y.max() - y.min())
    if span > 0:
        pad = cfg.range_expansion * span
        y_lo, y_hi = float(y.min() - pad), float(y.max() + pad)
    else:
        # constant target: open a symmetric window so the search range is non-empty
        y_lo, y_hi = float(y[0] - fallback), float(y[0] + fallback)

    if n >= 2:
        sy = float(np.std(y, ddof=1))
        grid_y = kde.default_grid(y, grid_size) if sy > 0 else np.array([fallback])
    else:
        grid_y = None

    continuous: list[_ContinuousDensity] = []
    categorical: list[_CategoricalDensity] = []
    for j, attr in enumerate(ds.schema):
        if j == t:
            continue
        col = rows[:, j].copy()
        if attr.kind is Kind.NUMERIC:
            if grid_y is None:
                h_x = h_yj = fallback
            else:
                sx = float(np.std(col, ddof=1))
                grid_x = kde.default_grid(col, grid_size) if sx > 0 else np.array([fallback])
                h_x, h_yj, _ = kde.select_bandwidth2(col, y, grid_x, grid_y)
            continuous.append(_ContinuousDensity(j, col, h_x, h_yj))
        else:
            k = len(attr.categories)
            v = col.astype(int)
            if v.size and (v.min() < 0 or v.max() >= k):
                raise ValueError(f"column {attr.name!r}: category index out of range")
            counts = np.bincount(v, minlength=k)
            priors = (counts + 1.0) / (n + k)
            indices = tuple(np.flatnonzero(v == c) for c in range(k))
            bands = np.full(k, np.nan)
            for c in range(k):
                if indices[c].size:
                    bands[c] = _select1(y[indices[c]], grid_size, fallback)
            categorical.append(_CategoricalDensity(j, priors, indices, bands))

    return NbrModel(
        schema=tuple(ds.schema),
        target_index=t,
        y=y,
        h_y=h_y,
        y_lo=y_lo,
        y_hi=y_hi,
        continuous=tuple(continuous),
        categorical=tuple(categorical),
    )


def _prepare_rows(model: NbrModel, rows) -> tuple[np.ndarray, np.ndarray | None, list]:
    feats = np.asarray(rows, dtype=float)
    if feats.ndim == 1:
        feats = feats[None, :]
    if feats.shape[1] != len(model.schema):
        raise ValueError(
            f"row width {feats.shape[1]} does not match schema width {len(model.schema)}"
        )
    cont_stack = None
    if model.continuous:
        # stacked unnormalised feature kernels, shape (n_cont, m, n)
        cont_stack = np.empty((len(model.continuous), feats.shape[0], model.y.size))
        for k, attr in enumerate(model.continuous):
            col = feats[:, attr.column]
            if np.isnan(col).any():
                raise ValueError("feature rows contain missing values")
            dx = col[:, None] - attr.x[None, :]
            np.multiply(dx, dx, out=dx)
            dx *= -1.0 / (2.0 * attr.h_x * attr.h_x)
            np.exp(dx, out=cont_stack[k])
    cat_values = []
    for attr in model.categorical:
        col = feats[:, attr.column]
        if np.isnan(col).any():
            raise ValueError("feature rows contain missing values")
        v = col.astype(int)
        k = len(attr.indices)
        if v.size and (v.min() < 0 or v.max() >= k):
            raise ValueError("category index out of range")
        cat_values.append(v)
    return feats, cont_stack, cat_values


def _log_posterior_matrix(
    model: NbrModel,
    n_rows: int,
    cont_stack: np.ndarray | None,
    cat_values: list,
    grid: np.ndarray,
) -> np.ndarray:
    """Log unnormalised posterior at per-row target grids.

    ``grid`` has shape (1, G) when all rows share one grid or (n_rows, G)
    otherwise.  Products of densities are accumulated in log space; every
    density and ratio is floored before the log so the result is finite.
    """
    n = model.y.size
    shared_grid = grid.shape[0] == 1
    ydiff2 = grid[:, None, :] - model.y[None, :, None]  # (mY, n, G)
    np.multiply(ydiff2, ydiff2, out=ydiff2)
    scaled = ydiff2[None, :, :, :] * model._neg_inv_two_h2[:, None, None, None]
    b_all = np.exp(scaled, out=scaled)  # target kernels: [marginal, *continuous]
    sums = b_all.sum(axis=2)  # (1 + n_cont, mY, G)

    marg = sums[0] * (1.0 / (n * model.h_y * SQRT_2PI))
    lp = np.zeros((n_rows, grid.shape[1]))
    lp += np.log(np.maximum(marg, DENSITY_FLOOR))

    if cont_stack is not None:
        if shared_grid:
            joint = np.einsum("krj,kjg->krg", cont_stack, b_all[1:, 0])
        else:
            joint = np.einsum("krj,krjg->krg", cont_stack, b_all[1:])
        joint *= model._joint_norm[:, None, None]
        attr_marg = sums[1:] * model._marg_norm[:, None, None]  # (n_cont, mY, G)
        np.maximum(joint, DENSITY_FLOOR, out=joint)
        joint /= np.maximum(attr_marg, DENSITY_FLOOR)
        np.maximum(joint, DENSITY_FLOOR, out=joint)
        np.log(joint, out=joint)
        lp += joint.sum(axis=0)

    for k, attr in enumerate(model.categorical):
        v = cat_values[k]
        num = np.zeros((n_rows, grid.shape[1]))
        den = np.zeros((grid.shape[0], grid.shape[1]))
        for c, idx in enumerate(attr.indices):
            if idx.size == 0:
                continue
            h_c = float(attr.bandwidths[c])
            dens_c = np.exp(ydiff2[:, idx, :] * (-1.0 / (2.0 * h_c * h_c))).sum(axis=1)
            dens_c *= attr.priors[c] / (idx.size * h_c * SQRT_2PI)
            den += dens_c  # (mY, G)
            hit = v == c
            if hit.any():
                num[hit] = dens_c[0] if shared_grid else dens_c[hit]
        q = num / np.maximum(den, DENSITY_FLOOR)
        lp += np.log(np.maximum(q, DENSITY_FLOOR))

    return lp


def log_posterior_unnorm(model: NbrModel, row, y):
    """Log of posterior-density numerator at target value(s) ``y``.

    ``row`` is a full-width row matching the schema; its target cell is
    ignored and may be NaN.
    """
    feats, cont_stack, cat_values = _prepare_rows(model, row)
    yq = np.asarray(y, dtype=float)
    grid = np.atleast_1d(yq).astype(float)[None, :]
    lp = _log_posterior_matrix(model, 1, cont_stack, cat_values, grid)[0]
    return float(lp[0]) if yq.ndim == 0 else lp


def predict_batch(
    model: NbrModel, rows, cfg: ModeSearchConfig = DEFAULT_MODE_SEARCH
) -> np.ndarray:
    """Posterior-mode predictions for each row via recursive grid search."""
    feats, cont_stack, cat_values = _prepare_rows(model, rows)
    m = feats.shape[0]
    g = cfg.grid_size
    base = np.linspace(0.0, 1.0, g)
    grid = (model.y_lo + (model.y_hi - model.y_lo) * base)[None, :]
    rowsel = np.arange(m)
    for level in range(cfg.levels):
        lp = _log_posterior_matrix(model, m, cont_stack, cat_values, grid)
        idx = lp.argmax(axis=1)  # first maximum: ties resolve to the smaller target
        ygrid = np.broadcast_to(grid, (m, g)) if grid.shape[0] == 1 else grid
        if level == cfg.levels - 1:
            return ygrid[rowsel, idx].copy()
        lo = ygrid[rowsel, np.maximum(idx - 1, 0)]
        hi = ygrid[rowsel, np.minimum(idx + 1, g - 1)]
        grid = lo[:, None] + (hi - lo)[:, None] * base[None, :]
    raise AssertionError("unreachable")


def predict(model: NbrModel, row, cfg: ModeSearchConfig = DEFAULT_MODE_SEARCH) -> float:
    return float(predict_batch(model, row, cfg)[0])


def rmse(model: NbrModel, ds: Dataset, cfg: ModeSearchConfig = DEFAULT_MODE_SEARCH) -> float:
    """Root mean squared error of posterior-mode predictions on a dataset."""
    if ds.n_rows == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    preds = predict_batch(model, ds.rows, cfg)
    err = preds - ds.target_values()
    return float(np.sqrt(np.mean(err * err)))
