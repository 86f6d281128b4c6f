"""Tabular datasets: schema, file loading, imputation, statistics, splitting.

Cells are stored in a single float matrix.  Categorical cells hold the
(float) index of their category label; missing cells hold NaN.  Datasets
are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(Exception):
    """Raised for malformed files, bad schemas, or invalid dataset operations."""


class Kind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: Kind
    categories: tuple[str, ...] = ()
    is_target: bool = False

    def __post_init__(self):
        if self.kind is Kind.CATEGORICAL:
            if not self.categories:
                raise DatasetError(f"categorical attribute {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise DatasetError(f"attribute {self.name!r} has duplicate categories")
        elif self.categories:
            raise DatasetError(f"numeric attribute {self.name!r} must not list categories")
        if self.is_target and self.kind is not Kind.NUMERIC:
            raise DatasetError(f"target attribute {self.name!r} must be numeric")


@dataclass(frozen=True)
class Dataset:
    schema: tuple[AttributeSchema, ...]
    rows: np.ndarray  # (r, d) float; categorical cells are category indices, NaN = missing

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            rows = rows.reshape(-1, len(self.schema))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "schema", tuple(self.schema))
        targets = [i for i, a in enumerate(self.schema) if a.is_target]
        if len(targets) != 1:
            raise DatasetError(f"expected exactly one target attribute, found {len(targets)}")
        if rows.shape[1] != len(self.schema):
            raise DatasetError(
                f"row width {rows.shape[1]} does not match schema width {len(self.schema)}"
            )
        object.__setattr__(self, "_target_index", targets[0])

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_attributes(self) -> int:
        return len(self.schema)

    @property
    def target_index(self) -> int:
        return self._target_index

    def column(self, index: int) -> np.ndarray:
        return self.rows[:, index]

    def target_values(self) -> np.ndarray:
        return self.rows[:, self._target_index]

    def validate_cells(self) -> None:
        """Check categorical indices are integral and in range (NaN allowed)."""
        for i, attr in enumerate(self.schema):
            if attr.kind is not Kind.CATEGORICAL:
                continue
            col = self.rows[:, i]
            present = col[~np.isnan(col)]
            if present.size and (
                np.any(present != np.floor(present))
                or present.min() < 0
                or present.max() >= len(attr.categories)
            ):
                raise DatasetError(f"column {attr.name!r} has out-of-range category indices")


@dataclass(frozen=True)
class NumericStats:
    minimum: float
    maximum: float
    mean: float
    stddev: float


@dataclass(frozen=True)
class CategoricalStats:
    counts: tuple[int, ...]
    mode_index: int


@dataclass(frozen=True)
class AttributeStats:
    per_attribute: tuple[NumericStats | CategoricalStats, ...] = field(default=())


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_csv(text: str, path: str) -> tuple[list[str], list[list[str | None]]]:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DatasetError(f"{path}:1: missing CSV header")
    header = [h.strip() for h in lines[0].split(",")]
    rows: list[list[str | None]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise DatasetError(
                f"{path}:{lineno}: expected {len(header)} cells, found {len(cells)}"
            )
        rows.append([c if c != "" else None for c in cells])
    return header, rows


def _load_csv(path: Path, target) -> Dataset:
    header, raw = _parse_csv(path.read_text(encoding="utf-8"), str(path))
    if not raw:
        raise DatasetError(f"{path}: no data rows")
    t_idx = _resolve_target(header, target, path)
    schema: list[AttributeSchema] = []
    columns: list[np.ndarray] = []
    for j, name in enumerate(header):
        cells = [row[j] for row in raw]
        present = [c for c in cells if c is not None]
        numeric = all(_is_number(c) for c in present)
        if numeric:
            col = np.array([float(c) if c is not None else np.nan for c in cells])
            schema.append(AttributeSchema(name, Kind.NUMERIC, is_target=(j == t_idx)))
        else:
            if j == t_idx:
                raise DatasetError(f"{path}: target column {name!r} is categorical")
            cats: list[str] = []
            index: dict[str, int] = {}
            for c in present:
                if c not in index:
                    index[c] = len(cats)
                    cats.append(c)
            col = np.array([float(index[c]) if c is not None else np.nan for c in cells])
            schema.append(AttributeSchema(name, Kind.CATEGORICAL, tuple(cats)))
        columns.append(col)
    return Dataset(tuple(schema), np.column_stack(columns))


def _split_arff_values(body: str, lineno: int, path: Path) -> list[str]:
    values = [v.strip() for v in body.split(",")]
    if any(not v for v in values):
        raise DatasetError(f"{path}:{lineno}: empty value in data line")
    return values


def _load_arff(path: Path, target) -> Dataset:
    names: list[str] = []
    kinds: list[tuple[Kind, tuple[str, ...]]] = []
    data: list[list[str]] = []
    in_data = False
    for lineno, rawline in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("%"):
            continue
        lower = line.lower()
        if in_data:
            data.append(_split_arff_values(line, lineno, path))
        elif lower.startswith("@relation"):
            continue
        elif lower.startswith("@attribute"):
            rest = line[len("@attribute") :].strip()
            if rest.startswith("{"):
                raise DatasetError(f"{path}:{lineno}: attribute declaration missing a name")
            if rest.startswith(("'", '"')):
                quote = rest[0]
                end = rest.find(quote, 1)
                if end < 0:
                    raise DatasetError(f"{path}:{lineno}: unterminated attribute name")
                name, spec = rest[1:end], rest[end + 1 :].strip()
            else:
                parts = rest.split(None, 1)
                if len(parts) != 2:
                    raise DatasetError(f"{path}:{lineno}: malformed attribute declaration")
                name, spec = parts
            spec = spec.strip()
            if spec.startswith("{"):
                if not spec.endswith("}"):
                    raise DatasetError(f"{path}:{lineno}: unterminated nominal specification")
                cats = tuple(
                    c.strip().strip("'\"") for c in spec[1:-1].split(",") if c.strip()
                )
                if not cats:
                    raise DatasetError(f"{path}:{lineno}: empty nominal specification")
                names.append(name)
                kinds.append((Kind.CATEGORICAL, cats))
            elif spec.lower() in ("numeric", "real", "integer"):
                names.append(name)
                kinds.append((Kind.NUMERIC, ()))
            else:
                raise DatasetError(
                    f"{path}:{lineno}: unsupported attribute type {spec!r} "
                    "(only numeric and nominal are accepted)"
                )
        elif lower.startswith("@data"):
            if not names:
                raise DatasetError(f"{path}:{lineno}: @data before any @attribute")
            in_data = True
        else:
            raise DatasetError(f"{path}:{lineno}: unrecognised directive {line.split()[0]!r}")
    if not in_data:
        raise DatasetError(f"{path}: no @data section")
    if not data:
        raise DatasetError(f"{path}: no data rows")

    t_idx = _resolve_target(names, target, path)
    if kinds[t_idx][0] is Kind.CATEGORICAL:
        raise DatasetError(f"{path}: target column {names[t_idx]!r} is categorical")

    matrix = np.empty((len(data), len(names)))
    for i, values in enumerate(data):
        if len(values) != len(names):
            raise DatasetError(
                f"{path}: data row {i + 1} has {len(values)} values, expected {len(names)}"
            )
        for j, token in enumerate(values):
            if token == "?":
                matrix[i, j] = np.nan
            elif kinds[j][0] is Kind.NUMERIC:
                try:
                    matrix[i, j] = float(token)
                except ValueError:
                    raise DatasetError(
                        f"{path}: data row {i + 1}: non-numeric value {token!r} "
                        f"in numeric column {names[j]!r}"
                    ) from None
            else:
                token = token.strip("'\"")
                try:
                    matrix[i, j] = kinds[j][1].index(token)
                except ValueError:
                    raise DatasetError(
                        f"{path}: data row {i + 1}: unknown category {token!r} "
                        f"for column {names[j]!r}"
                    ) from None
    schema = tuple(
        AttributeSchema(name, kind, cats, is_target=(j == t_idx))
        for j, (name, (kind, cats)) in enumerate(zip(names, kinds))
    )
    return Dataset(schema, matrix)


def _resolve_target(names: list[str], target, path) -> int:
    if isinstance(target, int):
        if not 0 <= target < len(names):
            raise DatasetError(f"{path}: target index {target} out of range")
        return target
    if target in names:
        return names.index(target)
    raise DatasetError(f"{path}: unknown target column {target!r}")


def load_dataset(path, fmt: str | None = None, target: str | int = -1) -> Dataset:
    """Load a CSV or ARFF file and designate a numeric target column.

    ``fmt`` may be "csv" or "arff"; when omitted it is inferred from the
    file suffix.  ``target`` is a column name or index (negative indices
    count from the end).
    """
    p = Path(path)
    if not p.exists():
        raise DatasetError(f"no such file: {p}")
    if fmt is None:
        fmt = p.suffix.lstrip(".").lower()
    fmt = fmt.lower()
    if fmt == "csv":
        header, _ = _parse_csv(p.read_text(encoding="utf-8"), str(p))
        t = target if not isinstance(target, int) or target >= 0 else len(header) + target
        ds = _load_csv(p, t)
    elif fmt == "arff":
        text = p.read_text(encoding="utf-8")
        n_attrs = sum(
            1 for line in text.splitlines() if line.strip().lower().startswith("@attribute")
        )
        t = target if not isinstance(target, int) or target >= 0 else n_attrs + target
        ds = _load_arff(p, t)
    else:
        raise DatasetError(f"unsupported format {fmt!r} (expected csv or arff)")
    ds.validate_cells()
    return ds


def impute(ds: Dataset) -> Dataset:
    """Fill missing cells with the column mean (numeric) or mode (categorical).

    Rows whose target is missing are dropped first.  Idempotent.
    """
    keep = ~np.isnan(ds.target_values())
    rows = ds.rows[keep].copy()
    if rows.shape[0] == 0:
        raise DatasetError("all rows have a missing target value")
    for j, attr in enumerate(ds.schema):
        col = rows[:, j]
        missing = np.isnan(col)
        if not missing.any():
            continue
        present = col[~missing]
        if present.size == 0:
            raise DatasetError(f"column {attr.name!r} is entirely missing")
        if attr.kind is Kind.NUMERIC:
            col[missing] = present.mean()
        else:
            counts = np.bincount(present.astype(int), minlength=len(attr.categories))
            col[missing] = int(np.argmax(counts))
    return Dataset(ds.schema, rows)


def split(
    ds: Dataset, train_fraction: float, seed: int, shuffle: bool = True
) -> tuple[Dataset, Dataset]:
    """Split rows into train/test at ceil(train_fraction * r).

    With ``shuffle`` the rows are permuted by a generator seeded with
    ``seed`` first; without it the leading rows become the training set
    (time-series mode).  Both halves share the schema.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train fraction must be in (0, 1), got {train_fraction}")
    r = ds.n_rows
    n_train = math.ceil(train_fraction * r)
    if n_train == 0 or n_train == r:
        raise DatasetError(f"split of {r} rows at fraction {train_fraction} leaves a half empty")
    if shuffle:
        order = np.random.default_rng(seed).permutation(r)
    else:
        order = np.arange(r)
    train_rows = ds.rows[order[:n_train]]
    test_rows = ds.rows[order[n_train:]]
    return Dataset(ds.schema, train_rows), Dataset(ds.schema, test_rows)


def stats(ds: Dataset) -> AttributeStats:
    """Exact per-attribute summary statistics of an imputed dataset."""
    out: list[NumericStats | CategoricalStats] = []
    for j, attr in enumerate(ds.schema):
        col = ds.rows[:, j]
        if attr.kind is Kind.NUMERIC:
            sd = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
            out.append(
                NumericStats(float(col.min()), float(col.max()), float(col.mean()), sd)
            )
        else:
            counts = np.bincount(col.astype(int), minlength=len(attr.categories))
            out.append(CategoricalStats(tuple(int(c) for c in counts), int(np.argmax(counts))))
    return AttributeStats(tuple(out))


def write_csv(ds: Dataset, path, target_last: bool = True) -> None:
    """Write a dataset as CSV with category labels spelled out.

    ``target_last`` moves the target column to the final position, the
    conventional layout for exported surrogate datasets.
    """
    order = list(range(ds.n_attributes))
    if target_last:
        order.remove(ds.target_index)
        order.append(ds.target_index)
    lines = [",".join(ds.schema[j].name for j in order)]
    for row in ds.rows:
        cells = []
        for j in order:
            v = row[j]
            if np.isnan(v):
                cells.append("")
            elif ds.schema[j].kind is Kind.CATEGORICAL:
                cells.append(ds.schema[j].categories[int(v)])
            else:
                cells.append(repr(float(v)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
