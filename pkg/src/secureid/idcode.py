"""Concatenated secure identification code.

A message index ``j`` is drawn uniformly and sent with an inner Gaussian
transmission code; its color ``T_i(j)`` under the identity's coloring is sent
with an outer wiretap code that picks a random codeword inside the color's
bin. The receiver interested in identity ``i`` decodes both parts and accepts
iff the decoded color matches ``T_i`` of the decoded index.

Indices (identities, message indices, colors, bin members) are 0-based.
"""
from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from . import kernels
from .capacity import GaussianChannelParams, WiretapParams, awgn_capacity, gwc_secrecy_capacity
from .channel import POWER_TOL, Codeword, RngStream, _as_generator
from .errors import ConfigurationError, DomainError, InvariantError, ResourceError, ShapeError
from .gf import field, prime_power
from .infotheory import LogBase

EXHAUSTIVE_DOMAIN_LIMIT = 1 << 16
DEFAULT_MAX_CODEWORDS = 1 << 16
DEFAULT_MAX_OUTER_CODEWORDS = 1 << 20
TAG_COLORING, TAG_INNER, TAG_OUTER = 1, 2, 3
VARIANTS = ("pseudorandom", "polynomial", "explicit")


class ColoringFamily:
    """Per-identity colorings T_i: {0..M'-1} -> {0..M''-1}."""

    def __init__(self, n_identities, domain_size, n_colors, seed=0, variant="pseudorandom", table=None):
        if variant not in VARIANTS:
            raise ConfigurationError(f"unknown coloring variant {variant!r}")
        if n_identities < 2 or n_colors < 2 or domain_size < n_colors:
            raise DomainError("need N >= 2, M'' >= 2 and M' >= M''")
        if n_identities > 1 << 16:
            raise ResourceError("at most 2**16 identities supported")
        self.n_identities = int(n_identities)
        self.domain_size = int(domain_size)
        self.n_colors = int(n_colors)
        self.seed = int(seed)
        self.variant = variant
        self._rows: dict[int, np.ndarray] = {}
        self.degree_bound = None
        if variant == "explicit":
            table = np.asarray(table, dtype=np.int64)
            if table.shape != (self.n_identities, self.domain_size):
                raise ShapeError("explicit coloring table must have shape (N, M')")
            if table.min() < 0 or table.max() >= self.n_colors:
                raise DomainError("colors must lie in 0..M''-1")
            self._rows = {i: table[i] for i in range(self.n_identities)}
        elif variant == "polynomial":
            if prime_power(self.n_colors) is None:
                raise ConfigurationError("polynomial colorings need a prime-power color count")
            s = round(math.log(self.domain_size) / math.log(self.n_colors))
            if self.n_colors**s != self.domain_size:
                raise ConfigurationError("polynomial colorings need M' = (M'')**s")
            if self.n_identities > self.domain_size:
                raise ConfigurationError("polynomial colorings support at most (M'')**s identities")
            self.degree_bound = s

    def colors(self, i: int) -> np.ndarray:
        """The full coloring T_i as an array over the domain."""
        if not 0 <= i < self.n_identities:
            raise DomainError(f"identity {i} outside 0..{self.n_identities - 1}")
        row = self._rows.get(i)
        if row is None:
            if self.variant == "pseudorandom":
                g = RngStream.for_trial(self.seed, TAG_COLORING, i & 0xFFFF, 0, 0).generator()
                row = g.integers(0, self.n_colors, size=self.domain_size, dtype=np.int64)
            else:
                row = self._polynomial_row(i)
            row.setflags(write=False)
            self._rows[i] = row
        return row

    def _polynomial_row(self, i: int) -> np.ndarray:
        # identity i <-> polynomial whose coefficients are the base-M'' digits of i;
        # index j is evaluated at the field point j mod M''
        q, s = self.n_colors, self.degree_bound
        coeffs = [(i // q**d) % q for d in range(s)]
        points = np.arange(self.domain_size, dtype=np.int64) % q
        return field(q).evaluate(coeffs, points)

    def color(self, i: int, j) -> np.ndarray | int:
        return self.colors(i)[j]

    def collision_fraction(self, i: int, k: int, samples: int = 1 << 16) -> float:
        """Fraction of indices j with T_i(j) = T_k(j); exhaustive for M' <= 2**16."""
        a, b = self.colors(i), self.colors(k)
        if self.domain_size <= EXHAUSTIVE_DOMAIN_LIMIT:
            return float(np.mean(a == b))
        g = RngStream.for_trial(self.seed, TAG_COLORING, i & 0xFFFF, k & 0xFFFF, 1).generator()
        idx = g.integers(0, self.domain_size, size=samples)
        return float(np.mean(a[idx] == b[idx]))

    @cached_property
    def collision_bound(self) -> float:
        """Bound on the pairwise collision fraction.

        Exact (s-1)/M'' for the polynomial family; otherwise the largest
        measured fraction over all pairs, or over 4096 sampled pairs when the
        exhaustive sweep would be too large.
        """
        if self.variant == "polynomial":
            return (self.degree_bound - 1) / self.n_colors
        N = self.n_identities
        if N * (N - 1) // 2 * self.domain_size <= 1 << 27:
            pairs = combinations(range(N), 2)
        else:
            g = RngStream.for_trial(self.seed, TAG_COLORING, 0, 0, 2).generator()
            raw = g.integers(0, N, size=(4096, 2))
            pairs = [(int(a), int(b)) for a, b in raw if a != b]
        return max(self.collision_fraction(a, b) for a, b in pairs)

    def table(self) -> np.ndarray:
        return np.stack([self.colors(i) for i in range(self.n_identities)])


def build_coloring_family(n_identities, domain_size, n_colors, seed=0, variant="pseudorandom") -> ColoringFamily:
    """Colorings for ``n_identities`` identities over ``domain_size`` indices."""
    return ColoringFamily(n_identities, domain_size, n_colors, seed, variant)


def _ball_codebook(g: np.random.Generator, count: int, length: int, power: float) -> np.ndarray:
    """i.i.d. N(0, P) codewords; any codeword above the n*P budget is scaled onto it."""
    cb = g.standard_normal((count, length)) * math.sqrt(power)
    norms = np.sqrt(np.einsum("ij,ij->i", cb, cb))
    limit = math.sqrt(length * power)
    scale = np.where(norms > limit, limit / np.maximum(norms, 1e-300), 1.0)
    cb *= scale[:, None]
    return cb


def inner_code_size(n: int, rate_fraction: float, noise_variance: float, power: float) -> int:
    """M' = ceil(2^(n * rho * C)) with C in bits."""
    c = awgn_capacity(GaussianChannelParams(noise_variance, power), LogBase.BITS)
    return math.ceil(2.0 ** (n * rate_fraction * c))


def color_count(n: int, outer_rate: float) -> int:
    """M'' = ceil(2^(sqrt(n) * eps))."""
    return math.ceil(2.0 ** (math.sqrt(n) * outer_rate))


@dataclass(frozen=True, eq=False)
class InnerTransmissionCode:
    codebook: np.ndarray  # (M', n)
    power: float
    seed: int = 0
    rate_fraction: float = float("nan")

    @property
    def size(self) -> int:
        return self.codebook.shape[0]

    @property
    def length(self) -> int:
        return self.codebook.shape[1]

    def decode(self, y) -> np.ndarray:
        """Minimum-distance decoding of each row of ``y``."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.length:
            raise ShapeError(f"expected length {self.length}, got {y.shape[1]}")
        return kernels.nearest_codeword(y, self.codebook)[0]


def build_inner_code(
    n: int,
    rate_fraction: float,
    noise_variance: float,
    power: float,
    seed: int = 0,
    max_codewords: int = DEFAULT_MAX_CODEWORDS,
) -> InnerTransmissionCode:
    if n < 2:
        raise DomainError("inner blocklength must be >= 2")
    if not 0 < rate_fraction < 1:
        raise DomainError("rate fraction must lie in (0, 1)")
    c = awgn_capacity(GaussianChannelParams(noise_variance, power), LogBase.BITS)
    log2_size = n * rate_fraction * c
    if log2_size > math.log2(max_codewords):
        raise ResourceError(
            f"inner code needs 2^{log2_size:.2f} codewords, budget is {max_codewords}"
        )
    size = math.ceil(2.0**log2_size)
    if size < 2:
        raise DomainError("inner code would have fewer than two codewords")
    g = RngStream.for_trial(seed, TAG_INNER, 0, 0, 0).generator()
    return InnerTransmissionCode(_ball_codebook(g, size, n, power), power, seed, rate_fraction)


@dataclass(frozen=True, eq=False)
class WiretapColorCode:
    codebook: np.ndarray  # (M'', B, q)
    power: float
    seed: int = 0

    @property
    def n_colors(self) -> int:
        return self.codebook.shape[0]

    @property
    def bin_size(self) -> int:
        return self.codebook.shape[1]

    @property
    def length(self) -> int:
        return self.codebook.shape[2]

    @cached_property
    def flat(self) -> np.ndarray:
        return np.ascontiguousarray(self.codebook.reshape(-1, self.length))

    def encode(self, color: int, rng) -> np.ndarray:
        """Stochastic encoding: a uniformly chosen member of the color's bin."""
        member = _as_generator(rng).integers(self.bin_size)
        return self.codebook[color, member]

    def decode(self, y) -> np.ndarray:
        """Color of the nearest codeword over all bin members."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.length:
            raise ShapeError(f"expected length {self.length}, got {y.shape[1]}")
        return kernels.nearest_codeword(y, self.flat)[0] // self.bin_size


def build_wiretap_color_code(
    q: int,
    n_colors: int,
    main_variance: float,
    eve_variance: float,
    power: float,
    bin_size: int,
    seed: int = 0,
    require_secrecy: bool = True,
    max_codewords: int = DEFAULT_MAX_OUTER_CODEWORDS,
) -> WiretapColorCode:
    """Random binning: ``n_colors`` bins of ``bin_size`` Gaussian codewords of length q."""
    if q < 1 or n_colors < 2 or bin_size < 1:
        raise DomainError("need q >= 1, at least two colors and bin size >= 1")
    if require_secrecy:
        cs = gwc_secrecy_capacity(WiretapParams(main_variance, eve_variance, power))
        if cs <= 0:
            raise ConfigurationError(
                "secrecy capacity is zero for these noise levels; a secure color code cannot exist"
            )
    if n_colors * bin_size > max_codewords:
        raise ResourceError(f"{n_colors * bin_size} outer codewords exceed budget {max_codewords}")
    g = RngStream.for_trial(seed, TAG_OUTER, 0, 0, 0).generator()
    cb = _ball_codebook(g, n_colors * bin_size, q, power)
    return WiretapColorCode(cb.reshape(n_colors, bin_size, q), power, seed)


@dataclass(frozen=True, eq=False)
class IdentificationCode:
    inner: InnerTransmissionCode
    outer: WiretapColorCode
    colorings: ColoringFamily

    def __post_init__(self):
        n, q = self.inner.length, self.outer.length
        if q != math.ceil(math.sqrt(n)):
            raise InvariantError(f"outer length {q} must equal ceil(sqrt({n}))")
        if self.colorings.domain_size != self.inner.size:
            raise InvariantError("coloring domain must match the inner code size")
        if self.colorings.n_colors != self.outer.n_colors:
            raise InvariantError("coloring range must match the number of bins")

    @property
    def n(self) -> int:
        return self.inner.length

    @property
    def q(self) -> int:
        return self.outer.length

    @property
    def m(self) -> int:
        return self.n + self.q

    @property
    def n_identities(self) -> int:
        return self.colorings.n_identities

    @property
    def power(self) -> float:
        return max(self.inner.power, self.outer.power)

    @property
    def rate(self) -> float:
        """log2 log2(N) / m, the identification rate in bits."""
        return math.log2(math.log2(self.n_identities)) / self.m

    def _check_identity(self, i):
        if not 0 <= i < self.n_identities:
            raise DomainError(f"identity {i} outside 0..{self.n_identities - 1}")

    def codewords(self, i: int, index, member) -> np.ndarray:
        """Batch assembly: rows concat(inner[index], outer[T_i(index), member])."""
        self._check_identity(i)
        index = np.asarray(index)
        colors = self.colorings.colors(i)[index]
        return np.concatenate(
            [self.inner.codebook[index], self.outer.codebook[colors, np.asarray(member)]], axis=-1
        )

    def encode(self, i: int, rng) -> Codeword:
        """Draw j uniformly, then send (inner codeword of j, stochastic codeword of T_i(j))."""
        self._check_identity(i)
        g = _as_generator(rng)
        j = g.integers(self.inner.size)
        b = g.integers(self.outer.bin_size)
        return Codeword(self.codewords(i, j, b), self.power)

    def verify(self, i: int, y) -> np.ndarray | bool:
        """Accept iff T_i(decoded index) equals the decoded color. Accepts a batch."""
        self._check_identity(i)
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        y = np.atleast_2d(y)
        if y.shape[1] != self.m:
            raise ShapeError(f"expected received length {self.m}, got {y.shape[1]}")
        j_hat = self.inner.decode(y[:, : self.n])
        c_hat = self.outer.decode(y[:, self.n :])
        ok = self.colorings.colors(i)[j_hat] == c_hat
        return bool(ok[0]) if single else ok

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(dumps(self))

    @classmethod
    def load(cls, path) -> "IdentificationCode":
        with open(path, "rb") as fh:
            return loads(fh.read())


def build_identification_code(
    n: int,
    rate_fraction: float,
    n_colors: int,
    n_identities: int,
    bin_size: int,
    channel: WiretapParams,
    seed: int = 0,
    variant: str = "pseudorandom",
    require_secrecy: bool = True,
    max_codewords: int = DEFAULT_MAX_CODEWORDS,
) -> IdentificationCode:
    inner = build_inner_code(n, rate_fraction, channel.main_variance, channel.power, seed, max_codewords)
    outer = build_wiretap_color_code(
        math.ceil(math.sqrt(n)),
        n_colors,
        channel.main_variance,
        channel.eve_variance,
        channel.power,
        bin_size,
        seed,
        require_secrecy,
    )
    colorings = ColoringFamily(n_identities, inner.size, n_colors, seed, variant)
    return IdentificationCode(inner, outer, colorings)


# --- binary container --------------------------------------------------------
# layout: b"SIDC" | u16 version | u32 header length | UTF-8 JSON header | arrays
# arrays (little-endian float64 / int64, row-major): inner codebook (M', n),
# outer codebook (M'', B, q), then the coloring table (N, M') for "explicit".

MAGIC = b"SIDC"
FORMAT_VERSION = 1


def dumps(code: IdentificationCode) -> bytes:
    c = code.colorings
    header = {
        "m": code.m,
        "n": code.n,
        "q": code.q,
        "N": c.n_identities,
        "M_inner": code.inner.size,
        "M_colors": c.n_colors,
        "bin_size": code.outer.bin_size,
        "seed": c.seed,
        "variant": c.variant,
        "inner_seed": code.inner.seed,
        "outer_seed": code.outer.seed,
        "power": code.inner.power,
        "rate_fraction": code.inner.rate_fraction,
    }
    raw = json.dumps(header, sort_keys=True).encode()
    buf = io.BytesIO()
    buf.write(MAGIC + struct.pack("<HI", FORMAT_VERSION, len(raw)) + raw)
    buf.write(np.ascontiguousarray(code.inner.codebook, dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(code.outer.codebook, dtype="<f8").tobytes())
    if c.variant == "explicit":
        buf.write(np.ascontiguousarray(c.table(), dtype="<i8").tobytes())
    return buf.getvalue()


def loads(data: bytes) -> IdentificationCode:
    if data[:4] != MAGIC:
        raise InvariantError("not an identification-code container")
    version, hlen = struct.unpack_from("<HI", data, 4)
    if version != FORMAT_VERSION:
        raise InvariantError(f"unsupported container version {version}")
    off = 10
    h = json.loads(data[off : off + hlen])
    off += hlen

    def take(shape, dtype):
        nonlocal off
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=off).reshape(shape)
        off += count * 8
        return arr.astype(dtype[1:]).copy()

    inner_cb = take((h["M_inner"], h["n"]), "<f8")
    outer_cb = take((h["M_colors"], h["bin_size"], h["q"]), "<f8")
    table = take((h["N"], h["M_inner"]), "<i8") if h["variant"] == "explicit" else None
    inner = InnerTransmissionCode(inner_cb, h["power"], h["inner_seed"], h["rate_fraction"])
    outer = WiretapColorCode(outer_cb, h["power"], h["outer_seed"])
    col = ColoringFamily(h["N"], h["M_inner"], h["M_colors"], h["seed"], h["variant"], table)
    return IdentificationCode(inner, outer, col)


def check_power(code: IdentificationCode) -> bool:
    """Every concatenated codeword satisfies sum(x^2) <= m P."""
    e_in = np.einsum("ij,ij->i", code.inner.codebook, code.inner.codebook)
    e_out = np.einsum("ij,ij->i", code.outer.flat, code.outer.flat)
    return bool(e_in.max() + e_out.max() <= code.m * code.power + POWER_TOL)
