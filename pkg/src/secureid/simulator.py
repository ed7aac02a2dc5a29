"""Monte Carlo estimation of identification errors and eavesdropper
distinguishability, plus exact cross-checks of the converse-lemma bounds on
small quantized systems.

Every trial draws from its own :class:`RngStream` keyed on the base seed, the
estimate being formed and the trial index. Trials are grouped in fixed-size
chunks whose success counts are summed, so results do not depend on how many
workers process the chunks.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from . import kernels
from .capacity import WiretapParams, bob_mi_lower_bound, eve_mi_upper_bound, fano_mi_lower_bound
from .channel import RngStream
from .errors import ConfigurationError, DomainError
from .idcode import IdentificationCode
from .infotheory import js_information, total_variation

TAG_TYPE1, TAG_TYPE2, TAG_EVE_I, TAG_EVE_J, TAG_PAIRS = 10, 11, 12, 13, 14
CSV_HEADER = ("kind", "i", "j", "estimate", "ci_lo", "ci_hi", "trials", "seed")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class Estimate:
    kind: str  # "type1", "type2" or "eve"
    i: int
    j: int
    estimate: float
    ci_lo: float
    ci_hi: float
    trials: int
    successes: int = 0

    @classmethod
    def binomial(cls, kind, i, j, successes, trials):
        lo, hi = wilson_interval(successes, trials)
        return cls(kind, i, j, successes / trials, lo, hi, trials, successes)


@dataclass
class SimConfig:
    code: IdentificationCode
    channel: WiretapParams
    trials: int = 1000
    seed: int = 0
    identities: Sequence[int] = ()
    pairs: Sequence[tuple[int, int]] = ()
    eve_pairs: Sequence[tuple[int, int]] = ()
    random_pairs: int = 0
    workers: int = 1
    chunk_size: int = 256

    def __post_init__(self):
        if self.trials < 100:
            raise ConfigurationError("at least 100 trials per estimate")
        if self.trials > 1 << 24:
            raise ConfigurationError("at most 2**24 trials per estimate")
        if self.chunk_size < 1 or self.workers < 1:
            raise ConfigurationError("chunk size and workers must be positive")
        N = self.code.n_identities
        ids = list(self.identities) + [v for p in (*self.pairs, *self.eve_pairs) for v in p]
        for v in ids:
            if not 0 <= v < N:
                raise ConfigurationError(f"identity {v} outside 0..{N - 1}")
        for a, b in (*self.pairs, *self.eve_pairs):
            if a == b:
                raise ConfigurationError(f"pair ({a}, {b}) must use distinct identities")


def _chunks(config: SimConfig):
    return [(s, min(s + config.chunk_size, config.trials)) for s in range(0, config.trials, config.chunk_size)]


def _reduce(config: SimConfig, work) -> int:
    chunks = _chunks(config)
    if config.workers == 1 or len(chunks) == 1:
        return sum(work(c) for c in chunks)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return sum(pool.map(work, chunks))


def _draw(config: SimConfig, tag, a, b, start, stop, variance):
    """Per-trial draws: message index, bin member and channel noise."""
    code = config.code
    T = stop - start
    index = np.empty(T, dtype=np.int64)
    member = np.empty(T, dtype=np.int64)
    noise = np.empty((T, code.m))
    for k, t in enumerate(range(start, stop)):
        g = RngStream.for_trial(config.seed, tag, a, b, t).generator()
        index[k] = g.integers(code.inner.size)
        member[k] = g.integers(code.outer.bin_size)
        noise[k] = g.standard_normal(code.m)
    return index, member, noise * math.sqrt(variance)


def _accept_count(config: SimConfig, tag, sent, tested, chunk) -> int:
    index, member, noise = _draw(config, tag, sent, tested, *chunk, config.channel.main_variance)
    y = config.code.codewords(sent, index, member) + noise
    return int(np.count_nonzero(config.code.verify(tested, y)))


def estimate_type1(config: SimConfig, i: int) -> Estimate:
    """Probability that identity ``i`` is rejected by its own verifier."""
    accepted = _reduce(config, lambda c: _accept_count(config, TAG_TYPE1, i, i, c))
    return Estimate.binomial("type1", i, i, config.trials - accepted, config.trials)


def estimate_type2(config: SimConfig, sent: int, tested: int) -> Estimate:
    """Probability that a transmission of ``sent`` is accepted by ``tested``."""
    if sent == tested:
        raise DomainError("second-kind error needs two different identities")
    accepted = _reduce(config, lambda c: _accept_count(config, TAG_TYPE2, sent, tested, c))
    return Estimate.binomial("type2", sent, tested, accepted, config.trials)


def eve_log_likelihoods(code: IdentificationCode, z, eve_variance: float, identities) -> np.ndarray:
    """Eve's log-likelihood of each observation row under each identity.

    The mixture runs over the uniform index and the uniform bin member with
    full codebook knowledge. Constants shared by all identities are dropped.
    """
    if not eve_variance > 0:
        raise DomainError("eavesdropper likelihoods need a positive noise variance")
    z = np.atleast_2d(z)
    s = 1.0 / (2.0 * eve_variance)
    l_in = kernels.binned_log_likelihood(z[:, : code.n], code.inner.codebook, 1, s)
    l_out = kernels.binned_log_likelihood(z[:, code.n :], code.outer.flat, code.outer.bin_size, s)
    return np.stack(
        [kernels.identity_log_likelihood(l_in, l_out, code.colorings.colors(u)) for u in identities],
        axis=1,
    )


def _eve_chunk(config: SimConfig, tag, sent, i, j, chunk):
    index, member, noise = _draw(config, tag, i, j, *chunk, config.channel.eve_variance)
    z = config.code.codewords(sent, index, member) + noise
    ll = eve_log_likelihoods(config.code, z, config.channel.eve_variance, (i, j))
    return z, ll[:, 0] - ll[:, 1]


def _newcombe(s1, s2, n):
    p1, p2 = s1 / n, s2 / n
    l1, u1 = wilson_interval(s1, n)
    l2, u2 = wilson_interval(s2, n)
    d = p1 - p2
    return d, d - math.hypot(p1 - l1, u2 - p2), d + math.hypot(u1 - p1, p2 - l2)


def estimate_eve_distinguishability(config: SimConfig, i: int, j: int) -> Estimate:
    """Empirical advantage Pr_i[E] - Pr_j[E] of the likelihood-ratio region
    E = {L_i(z) >= L_j(z)}, an estimate of the total variation between Eve's
    observation laws under identities i and j.

    The interval is Newcombe's hybrid score interval for a difference of
    proportions; estimate and interval are clipped to [0, 1].
    """
    if i == j:
        raise DomainError("distinguishability needs two different identities")

    def count(tag, sent):
        return lambda c: int(np.count_nonzero(_eve_chunk(config, tag, sent, i, j, c)[1] >= 0))

    s_i = _reduce(config, count(TAG_EVE_I, i))
    s_j = _reduce(config, count(TAG_EVE_J, j))
    d, lo, hi = _newcombe(s_i, s_j, config.trials)
    est = min(max(d, 0.0), 1.0)
    return Estimate("eve", i, j, est, min(max(lo, 0.0), est), max(min(hi, 1.0), est), config.trials, s_i - s_j)


def eve_samples(config: SimConfig, i: int, j: int):
    """Eve's observations and log-likelihood ratios under both identities."""
    out = []
    for tag, sent in ((TAG_EVE_I, i), (TAG_EVE_J, j)):
        parts = [_eve_chunk(config, tag, sent, i, j, c) for c in _chunks(config)]
        out.append((np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])))
    return out


def np_optimality_check(config: SimConfig, i: int, j: int, n_regions: int = 100, seed: int = 0):
    """Compare the likelihood-ratio region with random half-space regions.

    Returns (likelihood-ratio advantage, best random-region advantage) on the
    same samples.
    """
    (z_i, llr_i), (z_j, llr_j) = eve_samples(config, i, j)
    lr_adv = np.mean(llr_i >= 0) - np.mean(llr_j >= 0)
    g = np.random.default_rng(seed)
    best = -1.0
    for _ in range(n_regions):
        w = g.standard_normal(z_i.shape[1])
        proj_i, proj_j = z_i @ w, z_j @ w
        tau = g.choice(np.concatenate([proj_i, proj_j]))
        adv = abs(np.mean(proj_i >= tau) - np.mean(proj_j >= tau))
        best = max(best, adv)
    return float(lr_adv), float(best)


@dataclass
class SimReport:
    estimates: list[Estimate]
    seed: int
    trials: int
    wall_clock: float = 0.0
    backend: str = field(default_factory=lambda: kernels.BACKEND)

    def select(self, kind: str) -> list[Estimate]:
        return [e for e in self.estimates if e.kind == kind]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for e in self.estimates:
            w.writerow(
                [e.kind, e.i, e.j, f"{e.estimate:.12g}", f"{e.ci_lo:.12g}", f"{e.ci_hi:.12g}", e.trials, self.seed]
            )
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"seed={self.seed} trials={self.trials} backend={self.backend} wall_clock={self.wall_clock:.2f}s"]
        labels = {"type1": "lambda1", "type2": "lambda2", "eve": "eve_adv"}
        for e in self.estimates:
            who = f"i={e.i}" if e.kind == "type1" else f"sent={e.i} tested={e.j}" if e.kind == "type2" else f"i={e.i} j={e.j}"
            lines.append(f"{labels[e.kind]:8s} {who:22s} {e.estimate:.6f}  95% CI [{e.ci_lo:.6f}, {e.ci_hi:.6f}]")
        return "\n".join(lines) + "\n"


def _random_pairs(config: SimConfig) -> list[tuple[int, int]]:
    if not config.random_pairs:
        return []
    g = RngStream.for_trial(config.seed, TAG_PAIRS, 0, 0, 0).generator()
    N = config.code.n_identities
    pairs = []
    while len(pairs) < config.random_pairs:
        a, b = (int(v) for v in g.integers(0, N, size=2))
        if a != b:
            pairs.append((a, b))
    return pairs


def run_experiment(config: SimConfig) -> SimReport:
    """Type-1 errors for every involved identity, type-2 errors for every
    (sent, tested) pair and Eve's advantage for every eve pair."""
    t0 = time.perf_counter()
    extra = _random_pairs(config)
    pairs = list(config.pairs) + extra
    eve_pairs = list(config.eve_pairs) + (extra if config.channel.eve_variance > 0 else [])
    ids = list(dict.fromkeys([*config.identities, *(v for p in pairs + eve_pairs for v in p)]))
    if not ids:
        ids = [0]
    estimates = [estimate_type1(config, i) for i in ids]
    estimates += [estimate_type2(config, a, b) for a, b in pairs]
    estimates += [estimate_eve_distinguishability(config, a, b) for a, b in eve_pairs]
    return SimReport(estimates, config.seed, config.trials, time.perf_counter() - t0)


# --- exact converse-lemma cross-checks ------------------------------------------

MAX_SMALL_ALPHABET = 64
MAX_SMALL_BLOCK = 2


@dataclass(frozen=True)
class SmallSystem:
    """Quantized wiretap pair with two identity input laws on L_x^m."""

    main: np.ndarray  # |L_x| x |L_y|, row-stochastic
    eve: np.ndarray  # |L_x| x |L_z|
    prior_i: np.ndarray  # shape (|L_x|,) * m
    prior_j: np.ndarray
    m: int = 1

    def __post_init__(self):
        if not 1 <= self.m <= MAX_SMALL_BLOCK:
            raise ConfigurationError(f"exact cross-check supports m <= {MAX_SMALL_BLOCK}")
        for W in (self.main, self.eve):
            if max(W.shape) > MAX_SMALL_ALPHABET:
                raise ConfigurationError(f"alphabets above {MAX_SMALL_ALPHABET} are too large for exact summation")
        shape = (self.main.shape[0],) * self.m
        for p in (self.prior_i, self.prior_j):
            if np.shape(p) != shape:
                raise ConfigurationError(f"input laws must have shape {shape}")


def _output_law(W: np.ndarray, prior: np.ndarray, m: int) -> np.ndarray:
    if m == 1:
        return prior @ W
    return np.einsum("ab,ay,bz->yz", prior, W, W).ravel()


@dataclass(frozen=True)
class CrossCheck:
    eve_tv: float
    eve_mi: float
    eve_bound: float
    bob_error_sum: float
    bob_mi: float
    bob_bound: float
    bob_fano_bound: float

    @property
    def eve_ok(self) -> bool:
        return self.eve_mi <= self.eve_bound + 1e-12

    @property
    def bob_ok(self) -> bool:
        return self.bob_mi >= self.bob_bound - 1e-12

    @property
    def bob_fano_ok(self) -> bool:
        return self.bob_mi >= self.bob_fano_bound - 1e-12


def mi_bound_crosscheck(system: SmallSystem) -> CrossCheck:
    """Exact I(U;Z^m), I(U;Y^m) against the eavesdropper upper bound and the
    legitimate-receiver lower bounds.

    The eavesdropper bound is evaluated at lambda = TV(Q_z,i, Q_z,j), the
    smallest lambda for which every test has summed error above 1 - lambda.
    Bob's bounds use eps = 1 - TV(Q_y,i, Q_y,j), the smallest summed error of
    any test: the printed form H2((1 - eps)/2) and the Fano form 1 - H2(eps/2).
    """
    qz_i = _output_law(system.eve, system.prior_i, system.m)
    qz_j = _output_law(system.eve, system.prior_j, system.m)
    qy_i = _output_law(system.main, system.prior_i, system.m)
    qy_j = _output_law(system.main, system.prior_j, system.m)

    lam = total_variation(qz_i, qz_j)
    eve_mi = js_information(qz_i, qz_j)
    if lam <= 0:
        eve_bound = 0.0
    else:
        eve_bound = eve_mi_upper_bound(min(lam, 1.0 - 1e-12))

    eps = min(max(1.0 - total_variation(qy_i, qy_j), 0.0), 1.0)
    bob_mi = js_information(qy_i, qy_j)
    bob_bound = 0.0 if eps >= 1.0 else bob_mi_lower_bound(eps / 2.0, 0.0)
    return CrossCheck(lam, eve_mi, eve_bound, eps, bob_mi, bob_bound, fano_mi_lower_bound(eps))


def random_small_system(rng: np.random.Generator, m: int = 1, max_states: int = MAX_SMALL_ALPHABET) -> SmallSystem:
    """A random quantized wiretap pair plus two sparse identity input laws."""
    from .quantizer import build_discrete_channel, compute_spans

    while True:
        s2 = float(rng.uniform(0.3, 1.5))
        s2e = s2 * float(rng.uniform(1.0, 4.0))
        spec = compute_spans(s2, s2e, m, float(rng.uniform(0.3, 1.0)), float(rng.uniform(0.3, 1.5)))
        if spec.input_lattice.size <= max_states and spec.output_lattice.size <= max_states:
            break
    W = build_discrete_channel(spec, "main").transition
    V = build_discrete_channel(spec, "eve").transition
    L = W.shape[0]

    def law():
        p = np.zeros((L,) * m)
        for _ in range(int(rng.integers(1, 5))):
            p[tuple(rng.integers(0, L, size=m))] += 1.0
        return p / p.sum()

    return SmallSystem(W, V, law(), law(), m)
