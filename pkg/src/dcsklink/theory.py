"""Analytical link performance: shortage probability, fading-mixture density,
code-index detection error rates, data-symbol error rates (integral and
closed forms), composite system BER, and efficiency metrics."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .channel import ChannelProfile
from .params import SystemParams


class DegenerateMeansError(ValueError):
    """Two mixture mean values coincide, so the partial-fraction coefficients blow up."""

    def __init__(self, pair, values):
        self.pair = pair
        self.values = values
        super().__init__(
            f"mixture means {values[0]!r} and {values[1]!r} (entries {pair[0]}, {pair[1]}) "
            "are not distinct"
        )


class ClampWarning(UserWarning):
    """A probability left [0, 1] by more than numerical noise and was clamped."""


def qfunc(x):
    """Gaussian tail probability via the complementary error function."""
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def mixture_coefficients(means) -> np.ndarray:
    """Partial-fraction coefficients of a sum of independent exponentials.

    Entry l is the product over all other entries j of m_l / (m_l - m_j);
    the coefficients sum to 1.
    """
    means = np.asarray(means, dtype=float)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("means must be a non-empty 1-D sequence")
    if np.any(means <= 0):
        raise ValueError("mixture means must be positive")
    if means.size == 1:
        return np.ones(1)
    diff = means[:, None] - means[None, :]
    scale = np.maximum(np.abs(means[:, None]), np.abs(means[None, :]))
    close = np.abs(diff) <= 1e-9 * scale
    np.fill_diagonal(close, False)
    if np.any(close):
        a, b = np.argwhere(close)[0]
        raise DegenerateMeansError((int(a), int(b)), (float(means[a]), float(means[b])))
    np.fill_diagonal(diff, 1.0)
    ratios = means[:, None] / diff
    np.fill_diagonal(ratios, 1.0)
    return np.prod(ratios, axis=1)


@dataclass(frozen=True)
class FadingMixture:
    """Mixture-of-exponentials model of the summed squared path gains."""

    means: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_means(cls, means) -> "FadingMixture":
        means = np.asarray(means, dtype=float)
        return cls(means=means, coeffs=mixture_coefficients(means))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("the mixture density is supported on x >= 0")
        return np.einsum(
            "l,lx->x" if x.ndim else "l,l->",
            self.coeffs / self.means,
            np.exp(-np.atleast_1d(x)[None, :] / self.means[:, None])
            if x.ndim
            else np.exp(-x / self.means),
        )

    def cdf(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.einsum("l,lx->x", self.coeffs, 1.0 - np.exp(-x[None, :] / self.means[:, None]))
        return np.clip(out, 0.0, 1.0)


def harvest_mixture(profile: ChannelProfile, params: SystemParams) -> FadingMixture:
    """Mixture of (1/N_t) * sum of squared path gains on the harvest scale."""
    return FadingMixture.from_means(profile.mean_powers_flat() / params.n_antennas)


def snr_mixture(profile: ChannelProfile, params: SystemParams, ebn0_db: float) -> FadingMixture:
    """Per-path average bit-SNR mixture."""
    lin = 10.0 ** (ebn0_db / 10.0)
    return FadingMixture.from_means(profile.mean_powers_flat() * lin / params.n_antennas)


def chi_mixture_pdf(x, mixture: FadingMixture):
    return mixture.pdf(x)


def _clamp_probability(value: float, context: str) -> float:
    if value < -1e-9 or value > 1.0 + 1e-9:
        warnings.warn(f"{context} = {value} clamped to [0, 1]", ClampWarning, stacklevel=3)
    return min(1.0, max(0.0, value))


def shortage_probability(
    profile: ChannelProfile, params: SystemParams, e1: float | None = None
) -> float:
    """Probability that the harvested power falls below the decode threshold."""
    if e1 is None:
        e1 = params.sequence_energy
    if params.decode_power <= 0.0:
        return 0.0
    split = params.harvest_eff * (1.0 - params.power_split)
    if split <= 0.0:
        return 1.0
    mixture = harvest_mixture(profile, params)
    scale = 2.0 * params.n_subcarriers * e1 * split
    terms = mixture.coeffs * (1.0 - np.exp(-params.decode_power / (scale * mixture.means)))
    return _clamp_probability(float(terms.sum()), "shortage probability")


def _cim_geometry(gamma_b: float, params: SystemParams):
    bits = params.bits_per_frame
    beta = params.spreading
    load = params.power_split * bits * gamma_b
    gamma1 = load / math.sqrt(4.0 * load + 2.0 * beta)
    eta1 = 1.0 / math.sqrt(2.0 * load / beta + 1.0)
    return gamma1, eta1


def cim_ser_conditional(gamma_b: float, params: SystemParams) -> float:
    """Closed-form code-index symbol error rate at a fixed instantaneous SNR.

    Binomial-expansion form of the Gaussian ordering probability; the n-th
    term carries the coefficient 2*(-1/2)^(n+1) that the expansion of
    (1 - exp/2)^(N-1) produces.
    """
    if gamma_b < 0:
        raise ValueError("instantaneous SNR must be >= 0")
    n_rows = params.n_subcarriers
    gamma1, eta1 = _cim_geometry(gamma_b, params)
    total = 0.0
    for n in range(1, n_rows):
        coeff = 2.0 * (-0.5) ** (n + 1) * math.comb(n_rows - 1, n)
        expo = -(n + eta1 - eta1 * eta1) * gamma1 * gamma1 / (2.0 * (n + eta1))
        total += coeff * eta1 / (n + eta1) * math.exp(expo)
    return min(1.0, max(0.0, total))


_TAIL_FACTOR = 40.0


def _mixture_average(func, mixture: FadingMixture) -> float:
    """Average func(gamma_b) over the exponential mixture by adaptive quadrature."""
    upper = _TAIL_FACTOR * float(np.max(mixture.means))
    if math.exp(-_TAIL_FACTOR) >= 1e-12:
        raise RuntimeError("integration upper limit leaves a non-negligible tail")
    total = 0.0
    for mean, coeff in zip(mixture.means, mixture.coeffs):
        value, abserr = quad(
            lambda g: func(g) * math.exp(-g / mean) / mean,
            0.0,
            upper,
            epsabs=1e-13,
            epsrel=1e-8,
            limit=400,
        )
        if abserr > 1e-6 * max(1e-30, abs(value)) and abserr > 1e-12:
            raise RuntimeError(f"quadrature failed to converge (value {value}, abserr {abserr})")
        total += coeff * value
    return total


def cim_ber(profile: ChannelProfile, params: SystemParams, ebn0_db: float) -> float:
    """Code-index bit error rate averaged over the fading mixture."""
    if math.isinf(ebn0_db):
        return 0.0
    mixture = snr_mixture(profile, params, ebn0_db)
    n = params.n_subcarriers
    ser = _mixture_average(lambda g: cim_ser_conditional(g, params), mixture)
    return _clamp_probability(n / (2.0 * (n - 1)) * ser, "code-index BER")


def mdcsk_gamma(gamma_b: float, params: SystemParams) -> float:
    """Effective decision-variable SNR (twice the mean over the deviation)."""
    bits = params.bits_per_frame
    n = params.n_subcarriers
    load = params.power_split * bits * gamma_b
    return 2.0 * load / math.sqrt(2.0 * n * load + n * n * params.spreading)


def _mdcsk_prefactor(mod_order: int) -> float:
    # The two-boundary count double-counts the single antipodal boundary at M=2.
    return 1.0 if mod_order == 2 else 2.0 / math.log2(mod_order)


def mdcsk_ber_conditional(gamma_b: float, params: SystemParams) -> float:
    sin_m = math.sin(math.pi / params.mod_order)
    return _mdcsk_prefactor(params.mod_order) * float(
        qfunc(mdcsk_gamma(gamma_b, params) * sin_m / 2.0)
    )


def mdcsk_ber_integral(profile: ChannelProfile, params: SystemParams, ebn0_db: float) -> float:
    """Data bit error rate averaged over the fading mixture (integral form)."""
    if math.isinf(ebn0_db):
        return 0.0
    mixture = snr_mixture(profile, params, ebn0_db)
    value = _mixture_average(lambda g: mdcsk_ber_conditional(g, params), mixture)
    return _clamp_probability(value, "data BER (integral)")


def _chord_slope(params: SystemParams) -> float:
    """Slope of the secant line approximating the conditional data error rate.

    The conditional error rate Q(A*x / sqrt(B*x + C)) (A, B, C chosen so the
    argument equals gamma(x)*sin(pi/M)/2) is replaced by a line through
    (0, 1/2): the anchor x0 is where the curve's tangent at 0 reaches zero,
    and the secant from (0, 1/2) to (x0, Q(...)) gives the slope k.  The
    line k*x + 1/2 is truncated at its own zero crossing, so at high SNR the
    averaged closed form undershoots the integral form (it loses the Q tail
    beyond the truncation point).
    """
    bits = params.bits_per_frame
    n = params.n_subcarriers
    beta = params.spreading
    a = params.power_split * bits * math.sin(math.pi / params.mod_order)
    b = 2.0 * params.power_split * n * bits
    c = n * n * beta
    tangent = a / (n * math.sqrt(2.0 * math.pi * beta))
    x0 = 0.5 / tangent
    y0 = float(qfunc(a * x0 / math.sqrt(b * x0 + c)))
    return (y0 - 0.5) / x0


def mdcsk_ber_closed(profile: ChannelProfile, params: SystemParams, ebn0_db: float) -> float:
    """Closed-form data bit error rate from the truncated-secant approximation."""
    if math.isinf(ebn0_db):
        return 0.0
    k = _chord_slope(params)
    if k >= 0:
        raise ValueError("secant slope must be negative")
    mixture = snr_mixture(profile, params, ebn0_db)
    terms = mixture.coeffs * (
        k * mixture.means * (1.0 - np.exp(1.0 / (2.0 * k * mixture.means))) + 0.5
    )
    return _clamp_probability(
        _mdcsk_prefactor(params.mod_order) * float(terms.sum()), "data BER (closed)"
    )


@dataclass(frozen=True)
class TheoryPoint:
    """All analytical quantities at one parameter setting."""

    p_shr: float
    p_cim: float
    p_mdcsk_integral: float
    p_mdcsk_closed: float
    p_sys: float
    se: float
    ee: float


def spectral_efficiency(params: SystemParams) -> float:
    """Transmitted bits per subcarrier use."""
    return params.bits_per_frame / params.n_subcarriers


def se_carrier_index(n_subcarriers: int) -> float:
    """Spectral efficiency of the carrier-index comparison system."""
    return (math.log2(n_subcarriers) + n_subcarriers - 1) / (n_subcarriers + 1)


def energy_efficiency(params: SystemParams, e1: float, p_h: float) -> float:
    """Transmitted bits per unit of net consumed energy."""
    denom = params.n_subcarriers * (
        2.0 * params.n_subcarriers * e1 + params.decode_power - p_h
    )
    if denom <= 0.0:
        raise ValueError(f"net power consumption must be positive, got denominator {denom}")
    return params.bits_per_frame / denom


def mean_harvested_power(
    profile: ChannelProfile, params: SystemParams, e1: float | None = None
) -> float:
    if e1 is None:
        e1 = params.sequence_energy
    gain = float(profile.mean_powers_flat().sum()) / params.n_antennas
    return (
        2.0 * params.n_subcarriers * e1 * params.harvest_eff
        * (1.0 - params.power_split) * gain
    )


def system_ber(profile: ChannelProfile, params: SystemParams, ebn0_db: float) -> TheoryPoint:
    """Composite system BER and efficiencies at one operating point."""
    bits = params.bits_per_frame
    w_cim = params.cim_bits / bits
    w_data = params.data_bits / bits
    p_shr = shortage_probability(profile, params)
    p_cim = cim_ber(profile, params, ebn0_db)
    p_data = mdcsk_ber_integral(profile, params, ebn0_db)
    p_closed = mdcsk_ber_closed(profile, params, ebn0_db)
    p_sys = (1.0 - p_shr) * (w_cim * p_cim + w_data * p_data) + p_shr
    e1 = params.sequence_energy
    return TheoryPoint(
        p_shr=p_shr,
        p_cim=p_cim,
        p_mdcsk_integral=p_data,
        p_mdcsk_closed=p_closed,
        p_sys=_clamp_probability(p_sys, "system BER"),
        se=spectral_efficiency(params),
        ee=energy_efficiency(params, e1, mean_harvested_power(profile, params, e1)),
    )
