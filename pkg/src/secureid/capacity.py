"""Closed-form capacities and bounds for Gaussian, wiretap and MIMO channels.

All rates are per channel use, in the requested :class:`LogBase`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import DomainError
from .infotheory import (
    JointPmf,
    LogBase,
    binary_entropy,
    conditional_entropy,
    mutual_information,
)


@dataclass(frozen=True)
class GaussianChannelParams:
    noise_variance: float
    power: float
    blocklength: int = 1

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise DomainError("noise variance must be positive")
        if not self.power >= 0:
            raise DomainError("power must be nonnegative")
        if self.blocklength < 1:
            raise DomainError("blocklength must be >= 1")


@dataclass(frozen=True)
class WiretapParams:
    """Main-channel noise ``main_variance`` and eavesdropper noise ``eve_variance``.

    A variance of zero is accepted and means the noiseless limit; it is only
    meaningful for sampling, the capacity functions reject it.
    """

    main_variance: float
    eve_variance: float
    power: float

    def __post_init__(self):
        if self.main_variance < 0 or self.eve_variance < 0:
            raise DomainError("noise variances must be nonnegative")
        if not self.power >= 0:
            raise DomainError("power must be nonnegative")

    @property
    def main(self) -> GaussianChannelParams:
        return GaussianChannelParams(self.main_variance, self.power)

    @property
    def eve(self) -> GaussianChannelParams:
        return GaussianChannelParams(self.eve_variance, self.power)


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    water_level: float


@dataclass(frozen=True)
class CapacityReport:
    value: float
    base: LogBase
    secrecy_positive: bool | None = None


@dataclass(frozen=True)
class CrCapacity:
    """Common-randomness capacity; ``value`` is None outside the closed-form regime."""

    value: float | None
    in_regime: bool
    channel_capacity: float
    conditional_entropy: float
    note: str = ""


def awgn_capacity(params: GaussianChannelParams, base: LogBase = LogBase.BITS) -> float:
    return 0.5 * math.log1p(params.power / params.noise_variance) * base.scale


def id_capacity_awgn(params: GaussianChannelParams, base: LogBase = LogBase.BITS) -> float:
    """Identification capacity with local randomness; equals the Shannon capacity."""
    return awgn_capacity(params, base)


def gwc_secrecy_capacity(params: WiretapParams, base: LogBase = LogBase.BITS) -> float:
    """[C(main) - C(eve)]^+ for the degraded Gaussian wiretap channel."""
    if params.main_variance <= 0 or params.eve_variance <= 0:
        raise DomainError("secrecy capacity needs positive noise variances")
    gap = awgn_capacity(params.main, base) - awgn_capacity(params.eve, base)
    return max(0.0, gap)


def secure_id_capacity(params: WiretapParams, base: LogBase = LogBase.BITS) -> float:
    """Secure identification capacity: C(main) when C_S > 0, else 0."""
    if gwc_secrecy_capacity(params, base) > 0:
        return awgn_capacity(params.main, base)
    return 0.0


def secure_id_report(params: WiretapParams, base: LogBase = LogBase.BITS) -> CapacityReport:
    cs = gwc_secrecy_capacity(params, base)
    return CapacityReport(secure_id_capacity(params, base), base, cs > 0)


def _eve_bound_objective(u: float, lam: float) -> float:
    # substitution u = x*lam/2 maps x in (0, 2/lam) onto u in (0, 1)
    return lam / u - math.log2(1.0 - u)


def eve_mi_upper_bound(lam: float) -> float:
    """inf over x in (0, 2/lam) of 2/x + log2(1/(1 - x*lam/2)), in bits.

    Upper bound on I(U; Z^m) when every test between the two identities
    has summed error above 1 - lam.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam!r}")
    res = minimize_scalar(
        _eve_bound_objective,
        bounds=(1e-300, 1.0 - 1e-16),
        args=(lam,),
        method="bounded",
        options={"xatol": 1e-13, "maxiter": 500},
    )
    return float(res.fun)


def bob_mi_lower_bound(lam: float, delta_prime: float = 0.0) -> float:
    """H2((1 - 2 lam - 2 delta') / 2) in bits, the printed legitimate-receiver bound."""
    s = 2.0 * lam + 2.0 * delta_prime
    if lam < 0 or delta_prime < 0 or not s < 1.0:
        raise DomainError("need lam, delta' >= 0 and 2 lam + 2 delta' < 1")
    arg = 0.5 * (1.0 - s)
    if not 0.0 <= arg <= 1.0:
        raise DomainError("binary-entropy argument outside [0, 1]")
    return binary_entropy(arg, LogBase.BITS)


def fano_mi_lower_bound(error_sum: float) -> float:
    """1 - H2(error_sum / 2): the Fano-type bound for a binary uniform U whose
    best test has summed error ``error_sum``. Tight for two-point laws."""
    if not 0.0 <= error_sum <= 1.0:
        raise DomainError("error sum must lie in [0, 1]")
    return 1.0 - binary_entropy(0.5 * error_sum, LogBase.BITS)


def _check_singular_values(sv) -> np.ndarray:
    sv = np.asarray(sv, dtype=float).ravel()
    if sv.size == 0:
        raise DomainError("need at least one singular value")
    if np.any(sv <= 0) or not np.all(np.isfinite(sv)):
        raise DomainError("singular values must be positive and finite")
    if np.any(np.diff(sv) > 0):
        raise DomainError("singular values must be sorted in descending order")
    return sv


def waterfill(singular_values, noise_variance: float, power: float) -> PowerAllocation:
    """Waterfilling over eigenchannels with gains ``singular_values``."""
    sv = _check_singular_values(singular_values)
    if not noise_variance > 0:
        raise DomainError("noise variance must be positive")
    if not power >= 0:
        raise DomainError("power must be nonnegative")
    floors = noise_variance / sv**2
    lo, hi = floors[0], floors[-1] + power

    def excess(mu):
        return np.maximum(0.0, mu - floors).sum() - power

    if power == 0:
        mu = lo
    elif excess(hi) <= 0:
        # the upper bracket is the root up to rounding (one active channel)
        mu = hi
    else:
        mu = bisect(excess, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=400)
    active = floors < mu
    if power > 0:
        # bisection fixes the active set; solve the level exactly on it
        mu = (power + floors[active].sum()) / np.count_nonzero(active)
    powers = np.where(active, mu - floors, 0.0)
    return PowerAllocation(powers, float(mu))


def parallel_capacity(singular_values, noise_variance, powers, base=LogBase.BITS) -> float:
    """Sum-rate of parallel channels for an arbitrary allocation."""
    sv = np.asarray(singular_values, dtype=float)
    return float(np.sum(np.log1p(sv**2 * np.asarray(powers) / noise_variance)) * base.scale)


def mimo_capacity(singular_values, noise_variance, power, base=LogBase.BITS) -> float:
    alloc = waterfill(singular_values, noise_variance, power)
    return parallel_capacity(singular_values, noise_variance, alloc.powers, base)


def mimo_id_capacity_lower_bound(singular_values, noise_variance, power, base=LogBase.BITS) -> float:
    """Lower bound on the MIMO identification capacity (the transmission capacity)."""
    return mimo_capacity(singular_values, noise_variance, power, base)


def cr_capacity(
    dmms: JointPmf, channel: GaussianChannelParams, base: LogBase = LogBase.BITS
) -> CrCapacity:
    """Common-randomness capacity C + I(X;Y), valid when C >= H(X|Y).

    Outside that regime the general auxiliary-variable maximization is not
    attempted; the result is flagged instead.
    """
    c = awgn_capacity(channel, base)
    h_cond = conditional_entropy(dmms, base)
    if c >= h_cond:
        return CrCapacity(c + mutual_information(dmms, base), True, c, h_cond)
    return CrCapacity(
        None,
        False,
        c,
        h_cond,
        note="C < H(X|Y): needs max over U of I(U;X) s.t. I(U;X) - I(U;Y) <= C; not evaluated",
    )


def correlation_assisted_id_lower_bound(
    dmms: JointPmf,
    channel: GaussianChannelParams,
    cap_base: LogBase = LogBase.BITS,
    mi_base: LogBase = LogBase.BITS,
) -> float:
    """C(g, P) + I(X;Y).

    The two bases may differ: the published curve adds a capacity in nats to a
    mutual information in bits, and passing (NATS, BITS) reproduces it.
    """
    return awgn_capacity(channel, cap_base) + mutual_information(dmms, mi_base)


def fig8_rows(mu: float = 0.1, noise_variance: float = 1.0, consistent_bits: bool = False):
    """Rows (P, lower_bound, capacity) for P = 0, 0.1, ..., 3."""
    from .infotheory import doubly_symmetric_binary_source

    src = doubly_symmetric_binary_source(mu)
    cap_base = LogBase.BITS if consistent_bits else LogBase.NATS
    rows = []
    for k in range(31):
        p = k / 10
        ch = GaussianChannelParams(noise_variance, p)
        rows.append(
            (
                p,
                correlation_assisted_id_lower_bound(src, ch, cap_base, LogBase.BITS),
                id_capacity_awgn(ch, cap_base),
            )
        )
    return rows
