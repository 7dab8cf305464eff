"""Seeded random generation: logistic noise draws, synthetic binary
responses, and AR(1)-correlated Gaussian covariates.

Streams are counter-based (Philox keyed by (seed, stream_id)), so any draw is
reproducible independently of scheduling: two runs with the same (seed,
stream_id, n) produce bit-identical vectors no matter how many workers are
active.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, ThetaPoint, ValidationError

__all__ = ["RngStream", "draw_logistic", "draw_uniform", "synth_response", "draw_ar_gaussian"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, offset: int) -> "RngStream":
        return RngStream(seed=self.seed, stream_id=self.stream_id + offset)


def draw_uniform(stream: RngStream, n: int) -> np.ndarray:
    """n i.i.d. uniforms on the open interval (0, 1)."""
    if n < 1:
        raise ValidationError(f"draw count must be >= 1, got {n}")
    u = stream.generator().random(n)
    # random() covers [0, 1); keep the endpoints out for inverse-CDF use.
    tiny = np.finfo(float).tiny
    return np.where(u < tiny, tiny, u)


def draw_logistic(stream: RngStream, n: int) -> np.ndarray:
    """n i.i.d. standard-logistic draws via the inverse CDF log(u / (1-u))."""
    u = draw_uniform(stream, n)
    return np.log(u) - np.log1p(-u)


def synth_response(x: np.ndarray, theta: ThetaPoint, eps: np.ndarray) -> np.ndarray:
    """Binary responses 1{x_support' coef + eps > 0}.

    Ties at exactly zero classify as 0, matching the strict inequality of the
    generating model.
    """
    x = np.asarray(x, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if eps.shape[0] != x.shape[0]:
        raise ValidationError(
            f"noise length {eps.shape[0]} does not match row count {x.shape[0]}"
        )
    idx = theta.support.as_array()
    if idx.size and (idx.max() >= x.shape[1]):
        raise ValidationError(f"support index {idx.max()} out of range for p={x.shape[1]}")
    lp = x[:, idx] @ theta.coef if idx.size else np.zeros(x.shape[0])
    return (lp + eps > 0.0).astype(np.int64)


def draw_ar_gaussian(stream: RngStream, n: int, p: int, rho: float) -> np.ndarray:
    """n i.i.d. rows from N(0, Sigma) with Sigma_ij = rho^|i-j|, built by the
    AR(1) recursion X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j."""
    if abs(rho) >= 1.0:
        raise ValidationError(f"AR parameter must satisfy |rho| < 1, got {rho}")
    if n < 1 or p < 1:
        raise ValidationError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    z = stream.generator().standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = z[:, 0]
    scale = np.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        x[:, j] = rho * x[:, j - 1] + scale * z[:, j]
    return x


def generate_logistic_data(
    x: np.ndarray, theta: ThetaPoint, noise_stream: RngStream
) -> tuple[Dataset, np.ndarray]:
    """Draw realized logistic noise and the induced responses for a design.

    Returns the dataset together with the realized noise vector (useful for
    oracle-style checks that condition on the generating noise).
    """
    eps_rel = draw_logistic(noise_stream, x.shape[0])
    y = synth_response(x, theta, eps_rel)
    from .core import validate_dataset

    return validate_dataset(x, y), eps_rel
