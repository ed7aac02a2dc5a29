"""Sampling models: scalar Gaussian channel, Gaussian wiretap pair and the
MIMO channel with its SVD pre/post-processing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capacity import WiretapParams
from .errors import DomainError, InvariantError, ShapeError

POWER_TOL = 1e-9

# Stream-index layout: 8-bit purpose tag | 16-bit a | 16-bit b | 24-bit counter.
_TAG_SHIFT, _A_SHIFT, _B_SHIFT = 56, 40, 24
_COUNTER_LIMIT = 1 << 24


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed on (seed, stream_index).

    Backed by the counter-based Philox generator; identical keys give
    bit-identical sequences no matter which thread or process draws them.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream_index < 2**64):
            raise DomainError("seed and stream index must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed | (self.stream_index << 64)))

    @classmethod
    def for_trial(cls, seed: int, tag: int, a: int, b: int, counter: int) -> "RngStream":
        if not (0 <= tag < 256 and 0 <= a < 1 << 16 and 0 <= b < 1 << 16):
            raise DomainError("stream tag/indices out of range")
        if not 0 <= counter < _COUNTER_LIMIT:
            raise DomainError("trial counter exceeds 2**24")
        idx = (tag << _TAG_SHIFT) | (a << _A_SHIFT) | (b << _B_SHIFT) | counter
        return cls(seed, idx)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class Codeword:
    """Real codeword x^n with the per-codeword budget sum(x^2) <= n P."""

    samples: np.ndarray
    power: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ShapeError("codeword must be a vector")
        if np.dot(x, x) > x.size * self.power + POWER_TOL:
            raise InvariantError(
                f"codeword energy {np.dot(x, x):.6g} exceeds n*P = {x.size * self.power:.6g}"
            )
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size


def awgn_transmit(x: Codeword, noise_variance: float, rng) -> np.ndarray:
    """y_i = x_i + xi_i with xi_i ~ N(0, noise_variance) i.i.d."""
    if not isinstance(x, Codeword):
        raise TypeError("awgn_transmit expects a Codeword")
    if noise_variance < 0:
        raise DomainError("noise variance must be nonnegative")
    noise = _as_generator(rng).standard_normal(len(x))
    return x.samples + np.sqrt(noise_variance) * noise


def gwc_transmit(x: Codeword, params: WiretapParams, rng) -> tuple[np.ndarray, np.ndarray]:
    """Return (y, z): Bob's and Eve's observations with independent noise."""
    if not isinstance(x, Codeword):
        raise TypeError("gwc_transmit expects a Codeword")
    g = _as_generator(rng)
    xi = g.standard_normal(len(x))
    phi = g.standard_normal(len(x))
    y = x.samples + np.sqrt(params.main_variance) * xi
    z = x.samples + np.sqrt(params.eve_variance) * phi
    return y, z


@dataclass(frozen=True)
class MimoParams:
    H: np.ndarray
    noise_variance: float
    power: float

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        if H.ndim != 2:
            raise ShapeError("channel matrix must be 2-D")
        if self.noise_variance < 0 or self.power < 0:
            raise DomainError("noise variance and power must be nonnegative")
        s = np.linalg.svd(H, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise DomainError("channel matrix is rank deficient")
        object.__setattr__(self, "H", H)

    @property
    def n_rx(self) -> int:
        return self.H.shape[0]

    @property
    def n_tx(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class SvdDecomposition:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        n = self.rank
        return (self.U[:, :n] * self.singular_values) @ self.V[:, :n].conj().T


def svd_decompose(params: MimoParams) -> SvdDecomposition:
    """H = U diag(s) V^H with each column of V phase-fixed so that its
    largest-magnitude entry is real and positive."""
    U, s, Vh = np.linalg.svd(params.H, full_matrices=True)
    V = Vh.conj().T
    n = s.size
    for col in range(V.shape[1]):
        k = int(np.argmax(np.abs(V[:, col])))
        phase = V[k, col] / abs(V[k, col])
        V[:, col] /= phase
        if col < n:
            # keep u_l v_l^H unchanged
            U[:, col] /= phase
    return SvdDecomposition(U, s, V)


def mimo_pre_process(x_tilde, dec: SvdDecomposition) -> np.ndarray:
    """x = V [x_tilde; 0]. Works on a vector or an (n, N) batch of rows."""
    xt = np.asarray(x_tilde, dtype=complex)
    if xt.shape[-1] != dec.rank:
        raise ShapeError(f"expected {dec.rank} eigen-inputs, got {xt.shape[-1]}")
    return xt @ dec.V[:, : dec.rank].T


def mimo_post_process(y, dec: SvdDecomposition) -> np.ndarray:
    """y_tilde = U^H y. The first ``rank`` entries carry lambda_l * x_tilde_l."""
    y = np.asarray(y, dtype=complex)
    if y.shape[-1] != dec.U.shape[0]:
        raise ShapeError(f"expected {dec.U.shape[0]} receive samples, got {y.shape[-1]}")
    return y @ dec.U.conj()


def mimo_transmit(x, params: MimoParams, rng) -> np.ndarray:
    """y_i = H x_i + xi_i for each row x_i of ``x`` (shape (n, N_T) or (N_T,)).

    The noise is circularly-symmetric complex Gaussian with covariance
    sigma^2 I. The average per-symbol energy must not exceed ``power``.
    """
    x = np.asarray(x, dtype=complex)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != params.n_tx:
        raise ShapeError(f"expected {params.n_tx} transmit antennas, got {x.shape[1]}")
    energy = float(np.mean(np.sum(np.abs(x) ** 2, axis=1)))
    if energy > params.power + POWER_TOL:
        raise InvariantError(f"average symbol energy {energy:.6g} exceeds P = {params.power}")
    g = _as_generator(rng)
    shape = (x.shape[0], params.n_rx)
    noise = (g.standard_normal(shape) + 1j * g.standard_normal(shape)) * np.sqrt(
        params.noise_variance / 2.0
    )
    y = x @ params.H.T + noise
    return y[0] if single else y
