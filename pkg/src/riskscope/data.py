"""Dataset ingestion and the Pima feature schema."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HIST_BINS = 16

PIMA_LABEL_COLUMN = "Outcome"


class DataError(ValueError):
    """Raised when a dataset file violates the expected layout."""


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: its name, unit, and how it may change for the better."""

    name: str
    unit: str
    actionable: bool
    healthy_direction: str  # "decrease" | "increase" | "none"

    def __post_init__(self) -> None:
        if self.healthy_direction not in ("decrease", "increase", "none"):
            raise ValueError(f"bad healthy_direction {self.healthy_direction!r}")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if not names:
            raise ValueError("schema needs at least one feature")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    @property
    def d(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def spec_of(self, name: str) -> FeatureSpec:
        return self.features[self.index_of(name)]

    @property
    def actionable_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features if f.actionable)

    @property
    def immutable_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features if not f.actionable)


def pima_schema() -> FeatureSchema:
    """The d=8 Pima schema with actionability and healthy directions."""
    return FeatureSchema(
        features=(
            FeatureSpec("Pregnancies", "count", False, "none"),
            FeatureSpec("Glucose", "mg/dL", True, "decrease"),
            FeatureSpec("BloodPressure", "mm Hg", True, "decrease"),
            FeatureSpec("SkinThickness", "mm", True, "decrease"),
            FeatureSpec("Insulin", "uU/mL", True, "decrease"),
            FeatureSpec("BMI", "kg/m^2", True, "decrease"),
            FeatureSpec("DiabetesPedigreeFunction", "score", False, "none"),
            FeatureSpec("Age", "years", False, "none"),
        )
    )


@dataclass(frozen=True)
class PatientRecord:
    id: int
    values: tuple[float, ...]
    label: int | None = None


@dataclass(frozen=True)
class FeatureSummary:
    """Min/max plus a fixed-width histogram of one feature's values."""

    low: float
    high: float
    bin_edges: tuple[float, ...]
    bin_counts: tuple[int, ...]


def _summarize(values: np.ndarray) -> FeatureSummary:
    low = float(values.min())
    high = float(values.max())
    if low == high:
        # Degenerate spread: a single bin holds every record.
        return FeatureSummary(low, high, (low, high), (int(values.size),))
    counts, edges = np.histogram(values, bins=HIST_BINS, range=(low, high))
    return FeatureSummary(low, high, tuple(float(e) for e in edges), tuple(int(c) for c in counts))


class Dataset:
    """Immutable collection of patient records with per-feature summaries.

    Matrix/label views are materialized once at construction; summaries
    exist only when the dataset is non-empty.
    """

    def __init__(self, schema: FeatureSchema, records: list[PatientRecord]):
        for r in records:
            if len(r.values) != schema.d:
                raise DataError(f"record {r.id} has {len(r.values)} values, schema expects {schema.d}")
        self.schema = schema
        self.records = tuple(records)
        self._by_id = {r.id: r for r in self.records}
        if len(self._by_id) != len(self.records):
            raise DataError("record ids must be unique")
        self.matrix = np.array([r.values for r in self.records], dtype=np.float64).reshape(len(records), schema.d)
        labels = [r.label for r in self.records]
        self.labels = None if any(l is None for l in labels) or not records else np.array(labels, dtype=np.int64)
        if records:
            self.means = self.matrix.mean(axis=0)
            raw_std = self.matrix.std(axis=0)
            # Zero-variance features standardize to 0 rather than dividing by 0.
            self.stds = np.where(raw_std > 0, raw_std, 1.0)
            self.summaries = {
                name: _summarize(self.matrix[:, j]) for j, name in enumerate(schema.names)
            }
        else:
            self.means = np.zeros(schema.d)
            self.stds = np.ones(schema.d)
            self.summaries = {}

    def __len__(self) -> int:
        return len(self.records)

    def record(self, patient_id: int) -> PatientRecord:
        try:
            return self._by_id[patient_id]
        except KeyError:
            raise KeyError(f"no patient with id {patient_id}") from None

    def has_record(self, patient_id: int) -> bool:
        return patient_id in self._by_id

    def range_of(self, name: str) -> tuple[float, float]:
        s = self.summaries[name]
        return s.low, s.high

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.means) / self.stds

    def destandardize(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) * self.stds + self.means

    @classmethod
    def from_arrays(
        cls,
        schema: FeatureSchema,
        X: np.ndarray,
        y: np.ndarray | None = None,
        ids: list[int] | None = None,
    ) -> "Dataset":
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        ids = ids if ids is not None else list(range(n))
        records = [
            PatientRecord(
                id=ids[i],
                values=tuple(float(v) for v in X[i]),
                label=None if y is None else int(y[i]),
            )
            for i in range(n)
        ]
        return cls(schema, records)


def load_dataset(path: str | Path, schema: FeatureSchema) -> Dataset:
    """Read a labeled CSV whose header is the schema names plus "Outcome".

    Records get sequential ids in file order. Malformed cells are reported
    with their row and column.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    expected = list(schema.names) + [PIMA_LABEL_COLUMN]
    records: list[PatientRecord] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header row") from None
        if [h.strip() for h in header] != expected:
            raise DataError(f"{path}: header mismatch, expected {expected}, got {header}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(expected)}")
            values: list[float] = []
            for col, cell in zip(expected[:-1], row[:-1]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}: non-numeric value {cell!r} at row {row_no}, column {col}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite value at row {row_no}, column {col}")
                values.append(v)
            label_cell = row[-1].strip()
            if label_cell not in ("0", "1"):
                raise DataError(f"{path}: label must be 0 or 1 at row {row_no}, column {PIMA_LABEL_COLUMN}")
            records.append(PatientRecord(id=len(records), values=tuple(values), label=int(label_cell)))
    return Dataset(schema, records)
