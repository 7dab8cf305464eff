"""Domain types shared by every other module: datasets, model supports,
coefficient points, candidate collections, and run configuration.

All types are immutable after construction (arrays are marked read-only), so
instances can be shared freely across worker threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ValidationError",
    "Dataset",
    "SupportSet",
    "ThetaPoint",
    "CandidateSet",
    "InferenceConfig",
    "LinearTarget",
    "ColumnScale",
    "validate_dataset",
    "standardize_columns",
    "destandardize_columns",
    "default_max_support",
]


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """An observed design matrix (n x p, float) with binary labels in {0, 1}."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def signs(self) -> np.ndarray:
        """Labels in sign form 2y - 1, computed on demand."""
        return 2.0 * self.y - 1.0


def validate_dataset(x, y) -> Dataset:
    """Validate raw arrays and construct a Dataset.

    Raises ValidationError for a row-count mismatch, labels outside {0, 1},
    or non-finite covariate entries.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValidationError(f"design matrix must be 2-d and non-empty, got shape {x.shape}")
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValidationError(
            f"dimension mismatch: x has {x.shape[0]} rows, y has length {y.shape[0] if y.ndim == 1 else '?'}"
        )
    if not np.all(np.isin(y, (0, 1))):
        raise ValidationError("non-binary label: every y entry must be exactly 0 or 1")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite covariate in design matrix")
    return Dataset(x=_frozen(x), y=_frozen(y.astype(np.int64)))


@dataclass(frozen=True)
class SupportSet:
    """A model: a strictly increasing tuple of column indices in [0, p)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"support indices must be strictly increasing, got {idx}")
        if any(i < 0 for i in idx):
            raise ValidationError(f"support indices must be nonnegative, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, it) -> "SupportSet":
        return cls(indices=tuple(sorted({int(i) for i in it})))

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, j: int) -> bool:
        return int(j) in self.indices

    def __iter__(self):
        return iter(self.indices)

    def union(self, other) -> "SupportSet":
        other_idx = other.indices if isinstance(other, SupportSet) else tuple(other)
        return SupportSet.from_iterable(self.indices + tuple(other_idx))

    def with_index(self, j: int) -> "SupportSet":
        return self if j in self else SupportSet.from_iterable(self.indices + (int(j),))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


@dataclass(frozen=True)
class ThetaPoint:
    """A model together with the coefficients restricted to it."""

    support: SupportSet
    coef: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=float).ravel()
        if coef.shape[0] != len(self.support):
            raise ValidationError(
                f"coef length {coef.shape[0]} does not match support cardinality {len(self.support)}"
            )
        if not np.all(np.isfinite(coef)):
            raise ValidationError("non-finite coefficient")
        object.__setattr__(self, "coef", _frozen(coef))

    def dense(self, p: int) -> np.ndarray:
        """Embed the coefficients into a length-p vector (zeros elsewhere)."""
        beta = np.zeros(p)
        beta[self.support.as_array()] = self.coef
        return beta


@dataclass(frozen=True)
class CandidateSet:
    """Deduplicated model supports with provenance of the repro draws and
    information-criterion settings that produced each one."""

    models: tuple[SupportSet, ...]
    provenance: tuple[tuple[dict, ...], ...] = ()
    failed_draws: int = 0

    def __post_init__(self):
        seen = set()
        for m in self.models:
            if m.indices in seen:
                raise ValidationError(f"duplicate model in candidate set: {m.indices}")
            seen.add(m.indices)
        if self.provenance and len(self.provenance) != len(self.models):
            raise ValidationError("provenance length must match model count")

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __contains__(self, support: SupportSet) -> bool:
        return any(m.indices == support.indices for m in self.models)

    def to_json(self) -> dict:
        return {
            "models": [list(m.indices) for m in self.models],
            "provenance": [list(p) for p in self.provenance] if self.provenance else [],
            "failed_draws": self.failed_draws,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict) -> "CandidateSet":
        models = tuple(SupportSet.from_iterable(m) for m in doc["models"])
        prov = tuple(tuple(p) for p in doc.get("provenance", []))
        return cls(models=models, provenance=prov, failed_draws=int(doc.get("failed_draws", 0)))


def default_max_support(n: int, p: int) -> int:
    """Default cardinality cap for candidate models: ceil(n / (2 log p))."""
    if p < 2:
        return max(1, n)
    return max(1, math.ceil(n / (2.0 * math.log(p))))


@dataclass(frozen=True)
class InferenceConfig:
    """Knobs shared by the candidate, model-confidence, and coefficient
    inference stages.

    alpha follows the coverage-target convention (e.g. 0.95 for a 95% set).
    max_support=None defers to default_max_support(n, p) at use time; a cap
    of 0 is legal and forces the null model.
    """

    alpha: float = 0.95
    d: int = 100
    m: int = 100
    loss: str = "logistic"
    seed: int = 0
    max_support: int | None = None
    beta_mode: str = "mle"
    unpenalized: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must be in (0,1), got {self.alpha}")
        if self.d < 1:
            raise ValidationError(f"d must be >= 1, got {self.d}")
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.loss not in ("logistic", "hinge"):
            raise ValidationError(f"loss must be 'logistic' or 'hinge', got {self.loss!r}")
        if self.beta_mode not in ("mle", "profile"):
            raise ValidationError(f"beta_mode must be 'mle' or 'profile', got {self.beta_mode!r}")
        if self.max_support is not None and self.max_support < 0:
            raise ValidationError(f"max_support must be >= 0, got {self.max_support}")

    def resolve_max_support(self, n: int, p: int) -> int:
        if self.max_support is not None:
            return self.max_support
        return default_max_support(n, p)

    def with_overrides(self, **kwargs) -> "InferenceConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class LinearTarget:
    """A q x p coefficient-combination matrix; the rank of each restricted
    submatrix is determined where the restriction is applied."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2 or a.shape[0] < 1:
            raise ValidationError(f"target matrix must have q >= 1 rows, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("non-finite entry in target matrix")
        object.__setattr__(self, "a", _frozen(a))

    @property
    def q(self) -> int:
        return self.a.shape[0]

    @property
    def p(self) -> int:
        return self.a.shape[1]

    def restricted(self, support: SupportSet) -> np.ndarray:
        """Columns of the target matrix restricted to a model, shape (q, |support|)."""
        return self.a[:, support.as_array()] if len(support) else np.zeros((self.q, 0))

    @classmethod
    def single_coef(cls, j: int, p: int) -> "LinearTarget":
        row = np.zeros((1, p))
        row[0, j] = 1.0
        return cls(a=row)

    @classmethod
    def identity(cls, p: int) -> "LinearTarget":
        return cls(a=np.eye(p))


@dataclass(frozen=True)
class ColumnScale:
    """Per-column centering/scaling used by standardize_columns."""

    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray  # boolean flags for constant columns

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "scale", _frozen(np.asarray(self.scale, dtype=float)))
        object.__setattr__(self, "constant", _frozen(np.asarray(self.constant, dtype=bool)))


def standardize_columns(data: Dataset) -> tuple[Dataset, ColumnScale]:
    """Center each column to mean 0 and scale to sample standard deviation 1
    (divisor n-1).  Constant columns are centered, given scale 1, and flagged.
    """
    if data.n < 2:
        raise ValidationError("standardize_columns requires at least 2 rows")
    mean = data.x.mean(axis=0)
    sd = data.x.std(axis=0, ddof=1)
    constant = sd == 0.0
    scale = np.where(constant, 1.0, sd)
    z = (data.x - mean) / scale
    return (
        Dataset(x=_frozen(z), y=data.y),
        ColumnScale(mean=mean, scale=scale, constant=constant),
    )


def destandardize_columns(data: Dataset, scale: ColumnScale) -> Dataset:
    """Invert standardize_columns."""
    x = data.x * scale.scale + scale.mean
    return Dataset(x=_frozen(x), y=data.y)
