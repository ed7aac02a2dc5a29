"""Discrete approximation of the Gaussian wiretap channel.

Three stages turn the continuous channel into a finite one: the input is
rounded toward zero onto a lattice of span ``delta_x``, outputs beyond
``z0`` are clipped to the single atom ``z0``, and the clipped noise is
replaced by a piecewise-constant density on cells of width ``eps``. Each
stage moves the output law by at most 2*delta in total variation.

Constants for the Gaussian noise: K = 1/sigma^2, K1 = 1, gamma = 2, alpha = 3.
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import logsumexp, ndtr

from .channel import RngStream
from .errors import ConfigurationError, DomainError, InvariantError, ResourceError

K1, GAMMA, ALPHA = 1.0, 2.0, 3.0
DEFAULT_MAX_ENTRIES = 1 << 24
_LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class QuantizationSpec:
    main_variance: float
    eve_variance: float
    n: int
    delta: float
    a: float
    k_max: float
    delta_x: float
    z0: float
    eps: float
    input_lattice: np.ndarray = field(repr=False)
    output_edges: np.ndarray = field(repr=False)

    @property
    def b(self) -> float:
        return self.z0 - self.a

    @property
    def output_lattice(self) -> np.ndarray:
        """Cell representatives (left edges) followed by the atom z0."""
        return np.append(self.output_edges[:-1], self.z0)

    @property
    def input_bound(self) -> float:
        return 2.0 * self.a / self.delta_x + 2.0

    @property
    def output_bound(self) -> float:
        return 2.0 * self.z0 / self.eps + 4.0

    def variance(self, which: str) -> float:
        if which == "main":
            return self.main_variance
        if which == "eve":
            return self.eve_variance
        raise DomainError(f"channel must be 'main' or 'eve', got {which!r}")


def compute_spans(main_variance, eve_variance, n, delta, a) -> QuantizationSpec:
    """Lattice spans and clipping level for blocklength ``n`` and target ``delta``."""
    for name, v in (("main_variance", main_variance), ("eve_variance", eve_variance), ("n", n), ("delta", delta), ("a", a)):
        if not v > 0:
            raise DomainError(f"{name} must be positive")
    k_max = max(1.0 / main_variance, 1.0 / eve_variance)
    delta_x = (delta**2 / (n * k_max)) ** (1.0 / GAMMA)
    z0 = a + (K1 * n / delta) ** (1.0 / ALPHA)
    eps = (delta**2 / (k_max * n)) ** (1.0 / GAMMA)

    k = math.floor(a / delta_x + _LATTICE_TOL)
    while k * delta_x > a * (1 + 1e-12):
        k -= 1
    lx = np.arange(-k, k + 1) * delta_x

    lo = math.floor(-z0 / eps) + 1
    hi = math.ceil(z0 / eps) - 1
    interior = np.arange(lo, hi + 1) * eps
    # drop lattice points that would leave a sliver cell next to +-z0
    interior = interior[np.abs(interior) < z0 - _LATTICE_TOL * eps]
    edges = np.concatenate([[-z0], interior, [z0]])
    return QuantizationSpec(
        float(main_variance), float(eve_variance), int(n), float(delta), float(a),
        k_max, delta_x, z0, eps, lx, edges,
    )


def quantize_input(x, spec: QuantizationSpec) -> np.ndarray:
    """Nearest lattice point with |x_hat| <= |x| (rounding toward zero)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > spec.a * (1 + 1e-12)):
        raise DomainError(f"inputs must satisfy |x| <= a = {spec.a}")
    mag = np.abs(x)
    k = np.floor(mag / spec.delta_x + _LATTICE_TOL)
    k = np.where(k * spec.delta_x > mag, k - 1, k)
    k = np.minimum(k, (spec.input_lattice.size - 1) // 2)
    return np.sign(x) * k * spec.delta_x


def clip_output(y, z0: float):
    """Identity on [-z0, z0]; every value outside goes to the atom +z0."""
    y = np.asarray(y, dtype=float)
    out = np.where(np.abs(y) <= z0, y, z0)
    return float(out) if out.ndim == 0 else out


def _lattice_index(x, spec):
    x = np.asarray(x, dtype=float)
    k = np.rint(x / spec.delta_x)
    half = (spec.input_lattice.size - 1) // 2
    if np.any(np.abs(x - k * spec.delta_x) > _LATTICE_TOL * spec.delta_x) or np.any(np.abs(k) > half):
        raise DomainError("input is not a point of the input lattice")
    return (k + half).astype(np.int64)


def _row_masses(x, spec, variance, include_density_term=False):
    """Cell masses and atom mass for inputs ``x`` (vector); rows are normalized."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sd = math.sqrt(variance)
    cdf = ndtr((spec.output_edges[None, :] - x[:, None]) / sd)
    cells = np.diff(cdf, axis=1)
    tail = cdf[:, 0] + (1.0 - cdf[:, -1])
    if include_density_term:
        d = spec.z0 - x
        tail = tail + np.exp(-d * d / (2 * variance)) / math.sqrt(2 * math.pi * variance)
    rows = np.concatenate([cells, tail[:, None]], axis=1)
    if include_density_term:
        rows /= rows.sum(axis=1, keepdims=True)
    return rows


def discretized_noise_row(x: float, spec: QuantizationSpec, which: str = "main", include_density_term: bool = False) -> np.ndarray:
    """Transition probabilities from lattice input ``x`` to the output lattice.

    Cell masses are Gaussian integrals over each cell; the atom z0 collects
    the mass on both sides of [-z0, z0]. With ``include_density_term`` the
    atom also receives the density value f(z0 - x), as the original
    construction writes it, and the row is renormalized.
    """
    _lattice_index(x, spec)
    return _row_masses(x, spec, spec.variance(which), include_density_term)[0]


@dataclass(frozen=True, eq=False)
class QuantizedChannel:
    input_lattice: np.ndarray
    output_lattice: np.ndarray
    transition: np.ndarray
    which: str = "main"

    def __post_init__(self):
        T = self.transition
        if T.shape != (self.input_lattice.size, self.output_lattice.size):
            raise InvariantError("transition matrix shape does not match the lattices")
        if np.any(T < 0) or np.max(np.abs(T.sum(axis=1) - 1.0)) > 1e-10:
            raise InvariantError("transition matrix is not row-stochastic")
        for lat in (self.input_lattice, self.output_lattice):
            if np.any(np.diff(lat) <= 0):
                raise InvariantError("lattices must be strictly ascending")


def build_discrete_channel(
    spec: QuantizationSpec,
    which: str = "main",
    include_density_term: bool = False,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> QuantizedChannel:
    lx, ly = spec.input_lattice, spec.output_lattice
    if lx.size * ly.size > max_entries:
        raise ResourceError(f"{lx.size} x {ly.size} transition matrix exceeds {max_entries} entries")
    T = _row_masses(lx, spec, spec.variance(which), include_density_term)
    return QuantizedChannel(lx.copy(), ly.copy(), T, which)


def save_channels(path, spec: QuantizationSpec, channels: list[QuantizedChannel]) -> None:
    """Container: b"SIDQ" | u16 version | u32 header length | JSON header |
    for each channel: input lattice, output lattice, row-major matrix (float64 LE)."""
    header = {
        "spec": {k: getattr(spec, k) for k in ("main_variance", "eve_variance", "n", "delta", "a", "k_max", "delta_x", "z0", "eps")},
        "channels": [{"which": c.which, "L_x": int(c.input_lattice.size), "L_y": int(c.output_lattice.size)} for c in channels],
    }
    raw = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(b"SIDQ" + struct.pack("<HI", 1, len(raw)) + raw)
        for c in channels:
            for arr in (c.input_lattice, c.output_lattice, c.transition):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_channels(path) -> tuple[dict, list[QuantizedChannel]]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != b"SIDQ":
        raise InvariantError("not a quantized-channel container")
    version, hlen = struct.unpack_from("<HI", data, 4)
    if version != 1:
        raise InvariantError(f"unsupported container version {version}")
    header = json.loads(data[10 : 10 + hlen])
    off = 10 + hlen
    out = []
    for c in header["channels"]:
        arrs = []
        for count in (c["L_x"], c["L_y"], c["L_x"] * c["L_y"]):
            arrs.append(np.frombuffer(data, "<f8", count, off).astype(float))
            off += 8 * count
        out.append(QuantizedChannel(arrs[0], arrs[1], arrs[2].reshape(c["L_x"], c["L_y"]), c["which"]))
    return header, out


def lattices_csv(channel: QuantizedChannel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lattice", "index", "value"])
    for name, lat in (("input", channel.input_lattice), ("output", channel.output_lattice)):
        for k, v in enumerate(lat):
            w.writerow([name, k, repr(float(v))])
    return buf.getvalue()


def regularity_lhs(variance: float, u: float, points: int = 200001) -> float:
    """Left side of the square-root-modulus condition for N(0, variance):
    integral over x of (max - min of sqrt(g) on [x-u, x+u])^2."""
    sd = math.sqrt(variance)
    x = np.linspace(-12 * sd - u, 12 * sd + u, points)
    root = lambda t: np.exp(-t * t / (4 * variance)) / (2 * math.pi * variance) ** 0.25
    top = root(np.clip(0.0, x - u, x + u))
    bottom = np.minimum(root(x - u), root(x + u))
    return float(trapezoid((top - bottom) ** 2, x))


# --- total-variation gaps -----------------------------------------------------

@dataclass(frozen=True)
class InputDistribution:
    """Finite-support input law: ``points`` (K x n) with ``weights``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (p.shape[0],) or np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            raise InvariantError("weights must be a probability vector over the points")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @classmethod
    def uniform(cls, points) -> "InputDistribution":
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(p, np.full(p.shape[0], 1.0 / p.shape[0]))


@dataclass(frozen=True)
class GapValue:
    value: float
    bound: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    lower_bound_only: bool = False

    @property
    def passed(self) -> bool:
        v = self.value if self.ci_lo is None else self.ci_lo
        return v <= self.bound


@dataclass(frozen=True)
class TvGapReport:
    mode: str
    input_stage: GapValue
    clip_stage: GapValue
    output_stage: GapValue
    composed: GapValue

    def rows(self):
        for name in ("input_stage", "clip_stage", "output_stage", "composed"):
            g = getattr(self, name)
            yield name, g

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "mode", "tv", "bound", "ci_lo", "ci_hi", "pass"])
        for name, g in self.rows():
            w.writerow([
                name, self.mode, f"{g.value:.10g}", f"{g.bound:.10g}",
                "" if g.ci_lo is None else f"{g.ci_lo:.10g}",
                "" if g.ci_hi is None else f"{g.ci_hi:.10g}",
                "pass" if g.passed else "fail",
            ])
        return buf.getvalue()


# Laws are described per coordinate by a "factor": its density (w.r.t.
# Lebesgue inside the support, counting measure on the atom z0).
CONT, CLIPPED, QUANT = "continuous", "clipped", "quantized"


class _Coordinate:
    """Per-coordinate law helpers for one input value and one law kind."""

    def __init__(self, spec, variance, include_density_term):
        self.spec = spec
        self.var = variance
        self.sd = math.sqrt(variance)
        self.idt = include_density_term

    def density(self, kind, y, x):
        """Densities at continuous points y (G,) for inputs x (K,) -> (K, G)."""
        s = self.spec
        d = (y[None, :] - x[:, None]) / self.sd
        g = np.exp(-0.5 * d * d) / (self.sd * math.sqrt(2 * math.pi))
        if kind == CONT:
            return g
        inside = np.abs(y) < s.z0
        if kind == CLIPPED:
            return g * inside[None, :]
        rows = _row_masses(x, s, self.var, self.idt)
        widths = np.diff(s.output_edges)
        cell = np.clip(np.searchsorted(s.output_edges, y, side="right") - 1, 0, widths.size - 1)
        return (rows[:, cell] / widths[cell]) * inside[None, :]

    def atom(self, kind, x):
        if kind == CONT:
            return np.zeros_like(x)
        if kind == CLIPPED:
            return _row_masses(x, self.spec, self.var, False)[:, -1]
        return _row_masses(x, self.spec, self.var, self.idt)[:, -1]


def _quadrature(spec, variance, points, per_cell):
    """Midpoint nodes/weights: tails on both sides plus ``per_cell`` nodes per output cell."""
    sd = math.sqrt(variance)
    edges = spec.output_edges
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = (hi - lo) / per_cell
        nodes.append(lo + h * (np.arange(per_cell) + 0.5))
        weights.append(np.full(per_cell, h))
    inner_n = np.concatenate(nodes)
    inner_w = np.concatenate(weights)
    reach = max(np.max(np.abs(points)) + 10 * sd - spec.z0, 0.0)
    tails_n, tails_w = [], []
    if reach > 0:
        h = spec.eps / per_cell
        k = max(1, math.ceil(reach / h))
        t = spec.z0 + h * (np.arange(k) + 0.5)
        tails_n = [-t[::-1], t]
        tails_w = [np.full(k, h)] * 2
    node = np.concatenate([tails_n[0], inner_n, tails_n[1]]) if reach > 0 else inner_n
    wt = np.concatenate([tails_w[0], inner_w, tails_w[1]]) if reach > 0 else inner_w
    return node, wt


def _dense_tv(coord, law_p, law_q, dist_p, dist_q, nodes, weights, max_points):
    """0.5 * sum over atom patterns S of the integral of |p_S - q_S|."""
    n = dist_p.n
    G = nodes.size
    total = 0.0
    for r in range(n + 1):
        for S in combinations(range(n), r):
            free = [c for c in range(n) if c not in S]
            if G ** len(free) > max_points:
                raise ConfigurationError(
                    f"dense grid needs {G ** len(free):.3g} points; use Monte Carlo mode"
                )
            acc = None
            for law, dist, sign in ((law_p, dist_p, 1.0), (law_q, dist_q, -1.0)):
                w = dist.weights.copy()
                for c in S:
                    w = w * coord.atom(law, dist.points[:, c])
                if not np.any(w):
                    continue
                facs = [coord.density(law, nodes, dist.points[:, c]) for c in free]
                if not free:
                    val = np.array(sign * w.sum())
                else:
                    val = np.zeros((G,) * len(free))
                    for k in np.nonzero(w)[0]:
                        term = facs[0][k]
                        for f in facs[1:]:
                            term = np.multiply.outer(term, f[k])
                        val += sign * w[k] * term
                acc = val if acc is None else acc + val
            if acc is None:
                continue
            vol = 1.0
            if free:
                vol = weights
                for _ in free[1:]:
                    vol = np.multiply.outer(vol, weights)
            total += float(np.sum(np.abs(acc) * vol))
    return 0.5 * total


def _quantized_input(dist: InputDistribution, spec) -> InputDistribution:
    return InputDistribution(quantize_input(dist.points, spec), dist.weights)


def _clip_gap(dist_hat, spec, variance) -> float:
    """Exact TV between the unclipped and clipped output laws: the mass outside the box."""
    sd = math.sqrt(variance)
    x = dist_hat.points
    inside = ndtr((spec.z0 - x) / sd) - ndtr((-spec.z0 - x) / sd)
    return float(np.sum(dist_hat.weights * (1.0 - np.prod(inside, axis=1))))


def _cell_index(spec, y):
    widths = np.diff(spec.output_edges)
    return np.clip(np.searchsorted(spec.output_edges, y, side="right") - 1, 0, widths.size - 1)


class _LawTable:
    """Per-coordinate row masses of one law, precomputed for every support point."""

    def __init__(self, coord, kind, dist):
        self.coord, self.kind, self.dist = coord, kind, dist
        K, n = dist.points.shape
        if kind == QUANT:
            rows = _row_masses(dist.points.ravel(), coord.spec, coord.var, coord.idt)
            self.rows = rows.reshape(K, n, -1)
        elif kind == CLIPPED:
            self.atoms = _row_masses(dist.points.ravel(), coord.spec, coord.var, False)[:, -1].reshape(K, n)

    def sample(self, count, g):
        """Draw ``count`` samples; returns (values, atom mask)."""
        s, dist = self.coord.spec, self.dist
        k = g.choice(dist.weights.size, size=count, p=dist.weights)
        x = dist.points[k]
        if self.kind in (CONT, CLIPPED):
            y = x + self.coord.sd * g.standard_normal(x.shape)
            if self.kind == CONT:
                return y, np.zeros(y.shape, dtype=bool)
            atom = np.abs(y) > s.z0
            return np.where(atom, s.z0, y), atom
        edges = s.output_edges
        cdf = np.cumsum(self.rows, axis=2)
        last = cdf.shape[2] - 1
        cell = np.empty(x.shape, dtype=np.int64)
        u = g.random(x.shape)
        for kk in np.unique(k):
            sel = k == kk
            for c in range(x.shape[1]):
                cell[sel, c] = np.searchsorted(cdf[kk, c], u[sel, c] * cdf[kk, c, -1], side="right")
        cell = np.minimum(cell, last)
        atom = cell == last
        cc = np.minimum(cell, edges.size - 2)
        y = np.where(atom, s.z0, edges[cc] + g.random(x.shape) * (edges[cc + 1] - edges[cc]))
        return y, atom

    def log_density(self, y, atom):
        """Log density of each sample (Lebesgue inside the box, counting on the atom)."""
        s, dist = self.coord.spec, self.dist
        K = dist.weights.size
        with np.errstate(divide="ignore"):
            terms = np.tile(np.log(dist.weights)[:, None], (1, y.shape[0]))
            if self.kind == QUANT:
                cell = _cell_index(s, y)
                logw = np.log(np.diff(s.output_edges))
                for c in range(y.shape[1]):
                    mass = self.rows[:, c, :][:, np.where(atom[:, c], -1, cell[:, c])]
                    terms += np.log(mass) - np.where(atom[:, c], 0.0, logw[cell[:, c]])[None, :]
            else:
                d = (y[None, :, :] - dist.points[:, None, :]) / self.coord.sd
                logg = -0.5 * d * d - math.log(self.coord.sd * math.sqrt(2 * math.pi))
                if self.kind == CLIPPED:
                    loga = np.log(self.atoms)[:, None, :]
                    logg = np.where(atom[None], loga, logg)
                terms += logg.sum(axis=2)
        out = logsumexp(terms, axis=0)
        # the continuous law puts no mass on the atom, the clipped laws none outside the box
        if self.kind == CONT:
            off = np.any(atom, axis=1)
        else:
            off = np.any(~atom & (np.abs(y) >= s.z0), axis=1)
        return np.where(off, -np.inf, out)


def _mc_tv(coord, law_p, law_q, dist_p, dist_q, trials, g):
    from .simulator import _newcombe

    tp, tq = _LawTable(coord, law_p, dist_p), _LawTable(coord, law_q, dist_q)
    yp, ap = tp.sample(trials, g)
    yq, aq = tq.sample(trials, g)
    in_p = tp.log_density(yp, ap) > tq.log_density(yp, ap)
    in_q = tp.log_density(yq, aq) > tq.log_density(yq, aq)
    d, lo, hi = _newcombe(int(in_p.sum()), int(in_q.sum()), trials)
    return max(d, 0.0), max(lo, 0.0), min(max(hi, 0.0), 1.0)


def tv_gap_estimate(
    dist: InputDistribution,
    spec: QuantizationSpec,
    which: str = "main",
    mode: str = "auto",
    trials: int = 20000,
    seed: int = 0,
    per_cell: int = 10,
    include_density_term: bool = False,
    max_grid_points: int = 1 << 24,
) -> TvGapReport:
    """Total-variation gaps of the three approximation stages and their composition.

    ``mode="dense"`` (n <= 4) integrates |p - q| on a grid with ``per_cell``
    midpoint nodes per output cell (node spacing <= eps/10). ``mode="mc"``
    estimates each gap as the empirical advantage of the likelihood-ratio
    region, a lower bound on the TV, with a Newcombe interval. The clipping
    stage is computed exactly in both modes.
    """
    if dist.n != spec.n:
        raise ConfigurationError(f"input law has length {dist.n}, spec expects n = {spec.n}")
    if per_cell < 10:
        raise ConfigurationError("need at least 10 quadrature nodes per output cell")
    if mode == "auto":
        mode = "dense" if spec.n <= 4 else "mc"
    if mode == "dense" and spec.n > 4:
        raise ConfigurationError("dense integration is limited to n <= 4")
    if mode not in ("dense", "mc"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    var = spec.variance(which)
    coord = _Coordinate(spec, var, include_density_term)
    hat = _quantized_input(dist, spec)
    bound2, bound6 = 2 * spec.delta, 6 * spec.delta
    clip = GapValue(_clip_gap(hat, spec, var), bound2)
    stages = ((CONT, CONT, dist, hat, bound2), (CLIPPED, QUANT, hat, hat, bound2), (CONT, QUANT, dist, hat, bound6))
    out = []
    if mode == "dense":
        nodes, weights = _quadrature(spec, var, dist.points, per_cell)
        for lp, lq, dp, dq, bd in stages:
            out.append(GapValue(_dense_tv(coord, lp, lq, dp, dq, nodes, weights, max_grid_points), bd))
    else:
        g = RngStream(seed, 0).generator()
        for lp, lq, dp, dq, bd in stages:
            v, lo, hi = _mc_tv(coord, lp, lq, dp, dq, trials, g)
            out.append(GapValue(v, bd, lo, hi, lower_bound_only=True))
    return TvGapReport(mode, out[0], clip, out[1], out[2])


def tail_probability_mc(spec: QuantizationSpec, x, which="main", trials=100000, seed=0):
    """Monte Carlo Pr{y^n outside [-z0, z0]^n} for the fixed input ``x``.

    Returns (estimate, ci_lo, ci_hi, union bound K1 n b^-alpha).
    """
    from .simulator import wilson_interval

    x = np.asarray(x, dtype=float)
    g = RngStream(seed, 1).generator()
    y = x[None, :] + math.sqrt(spec.variance(which)) * g.standard_normal((trials, x.size))
    hits = int(np.count_nonzero(np.any(np.abs(y) > spec.z0, axis=1)))
    lo, hi = wilson_interval(hits, trials)
    return hits / trials, lo, hi, K1 * spec.n * spec.b ** (-ALPHA)
