"""Information-theoretic primitives: entropies, mutual information,
total variation and the Gaussian log-density.

Every entropy-like function takes an explicit :class:`LogBase` so callers
never mix bits and nats by accident.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantError, ShapeError

_SUM_TOL = 1e-12


class LogBase(enum.Enum):
    BITS = 2.0
    NATS = math.e

    @property
    def scale(self) -> float:
        """Factor converting a natural-log quantity into this base."""
        return 1.0 / math.log(self.value)

    def log(self, x):
        return np.log(x) * self.scale

    @classmethod
    def parse(cls, name: "str | LogBase") -> "LogBase":
        if isinstance(name, LogBase):
            return name
        key = str(name).strip().lower()
        if key in ("bits", "bit", "2", "base2"):
            return cls.BITS
        if key in ("nats", "nat", "e", "ln"):
            return cls.NATS
        raise DomainError(f"unknown log base {name!r}")


@dataclass(frozen=True)
class Pmf:
    """Probability vector; validated on construction."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvariantError("pmf must be a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvariantError("pmf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise InvariantError(f"pmf sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class JointPmf:
    """Joint distribution of (X, Y) as an |X| x |Y| matrix."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise InvariantError("joint pmf must be a non-empty matrix")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvariantError("joint pmf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise InvariantError(f"joint pmf sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def px(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    @classmethod
    def from_channel(cls, px, p_y_given_x) -> "JointPmf":
        px = np.asarray(px, dtype=float)
        return cls(px[:, None] * np.asarray(p_y_given_x, dtype=float))


def doubly_symmetric_binary_source(mu: float) -> JointPmf:
    """Uniform binary X observed through a BSC with crossover ``mu``."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError("crossover must lie in [0, 1]")
    w = np.array([[1.0 - mu, mu], [mu, 1.0 - mu]])
    return JointPmf.from_channel([0.5, 0.5], w)


def _entropy_nats(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def binary_entropy(p: float, base: LogBase = LogBase.BITS) -> float:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"binary entropy needs p in [0, 1], got {p!r}")
    return _entropy_nats(np.array([p, 1.0 - p])) * base.scale


def entropy(pmf: Pmf, base: LogBase = LogBase.BITS) -> float:
    return _entropy_nats(pmf.probs) * base.scale


def _as_joint(pxy) -> JointPmf:
    return pxy if isinstance(pxy, JointPmf) else JointPmf(pxy)


def mutual_information(pxy: JointPmf, base: LogBase = LogBase.BITS) -> float:
    pxy = _as_joint(pxy)
    p = pxy.probs
    prod = pxy.px[:, None] * pxy.py[None, :]
    mask = p > 0
    val = float(np.sum(p[mask] * np.log(p[mask] / prod[mask])))
    # rounding can leave a -1e-17 residue for independent sources
    return max(val, 0.0) * base.scale


def conditional_entropy(pxy: JointPmf, base: LogBase = LogBase.BITS) -> float:
    """H(X|Y) = H(X,Y) - H(Y)."""
    pxy = _as_joint(pxy)
    val = _entropy_nats(pxy.probs.ravel()) - _entropy_nats(pxy.py)
    return max(val, 0.0) * base.scale


def total_variation(p: Pmf, q: Pmf) -> float:
    """Half-L1 distance, equal to sup over events for discrete measures."""
    a = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"support sizes differ: {a.shape} vs {b.shape}")
    return float(0.5 * np.abs(a - b).sum())


def gaussian_log_density(y, mean, variance):
    """Log of the N(mean, variance) density at ``y`` (vectorized)."""
    if np.any(np.asarray(variance) <= 0):
        raise DomainError("variance must be positive")
    y = np.asarray(y, dtype=float)
    d = y - mean
    out = -0.5 * np.log(2.0 * np.pi * variance) - d * d / (2.0 * variance)
    return float(out) if out.ndim == 0 else out


def js_information(q_i, q_j, base: LogBase = LogBase.BITS) -> float:
    """I(U;Y) for a uniform binary U selecting between laws ``q_i`` and ``q_j``."""
    q_i = np.asarray(q_i, dtype=float).ravel()
    q_j = np.asarray(q_j, dtype=float).ravel()
    if q_i.shape != q_j.shape:
        raise ShapeError("laws must share a support")
    joint = 0.5 * np.stack([q_i, q_j])
    return mutual_information(JointPmf(joint / joint.sum()), base)
