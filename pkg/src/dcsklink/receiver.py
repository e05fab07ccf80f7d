"""Non-coherent detection: Walsh-despread energy metrics for the code index,
per-subcarrier differential correlation for the data symbols, and energy
shortage bookkeeping."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .chaos import Constellation, WalshMatrix
from .channel import ChannelRealization, ReceivedFrame, harvested_power
from .params import SystemParams
from .transmitter import FrameSymbols, symbols_to_bits


@dataclass(frozen=True)
class EnergyMetrics:
    """Energy of the Walsh-despread reference, one entry per row hypothesis."""

    z_e: np.ndarray


@dataclass(frozen=True)
class ShortageEvent:
    harvested: float
    threshold: float
    shorted: bool


def cim_detect_batch(reference: np.ndarray, walsh: WalshMatrix):
    """Energy metrics and row decisions for a (F, N, beta) reference batch.

    z_e[f, j] = sum_k (sum_i w[j, i] * ref[f, i, k])^2; the decision is the
    argmax with ties broken toward the smaller index.
    """
    despread = np.einsum("ji,fik->fjk", walsh.rows.astype(float), reference)
    z_e = np.einsum("fjk,fjk->fj", despread, despread)
    return np.argmax(z_e, axis=1), z_e


def cim_detect(rx: ReceivedFrame, walsh: WalshMatrix):
    s0_hat, z_e = cim_detect_batch(rx.reference[None], walsh)
    return int(s0_hat[0]), EnergyMetrics(z_e=z_e[0])


def recover_reference_batch(reference: np.ndarray, s0_hat: np.ndarray, walsh: WalshMatrix):
    """Sign-correct each subcarrier's reference branch and derive its quadrature.

    The receiver keeps one recovered reference per subcarrier (row i of the
    output) rather than averaging across subcarriers: the data correlator of
    subcarrier i uses that subcarrier's own despread reference, which is the
    noise model the detection statistics are built on.
    """
    signs = walsh.rows[s0_hat].astype(float)
    ref = signs[:, :, None] * reference
    ref_quad = np.imag(hilbert(ref, axis=-1))
    return ref, ref_quad


def recover_reference(rx: ReceivedFrame, s0_hat: int, walsh: WalshMatrix):
    ref, ref_quad = recover_reference_batch(rx.reference[None], np.array([s0_hat]), walsh)
    return ref[0], ref_quad[0]


def decision_pairs_batch(data: np.ndarray, ref: np.ndarray, ref_quad: np.ndarray):
    """Per-subcarrier correlator outputs (z_a, z_b), each shaped (F, N)."""
    z_a = np.einsum("fik,fik->fi", ref, data)
    z_b = np.einsum("fik,fik->fi", ref_quad, data)
    return z_a, z_b


def sector_decision(z_a: np.ndarray, z_b: np.ndarray, order: int) -> np.ndarray:
    """Nearest constellation index to atan2(z_b, z_a); boundaries go to the
    smaller index."""
    angle = np.arctan2(z_b, z_a)
    idx = np.ceil(angle * order / (2.0 * np.pi) - 0.5).astype(np.int64)
    return np.mod(idx, order)


def mdcsk_detect_batch(data, ref, ref_quad, constellation: Constellation):
    z_a, z_b = decision_pairs_batch(data, ref, ref_quad)
    return sector_decision(z_a, z_b, constellation.order)


def mdcsk_detect(rx: ReceivedFrame, ref, ref_quad, constellation: Constellation) -> np.ndarray:
    return mdcsk_detect_batch(rx.data[None], ref[None], ref_quad[None], constellation)[0]


def detect_frame_batch(reference, data, walsh: WalshMatrix, constellation: Constellation):
    """Full detection of a batch: code-index decisions and data decisions."""
    s0_hat, _ = cim_detect_batch(reference, walsh)
    ref, ref_quad = recover_reference_batch(reference, s0_hat, walsh)
    s_hat = mdcsk_detect_batch(data, ref, ref_quad, constellation)
    return s0_hat, s_hat


def check_shortage(
    realization: ChannelRealization, params: SystemParams, e1: float | None = None
) -> ShortageEvent:
    """Compare the harvested power against the decode threshold."""
    if e1 is None:
        e1 = params.sequence_energy
    harvested = harvested_power(realization, params, e1)
    return ShortageEvent(
        harvested=harvested,
        threshold=params.decode_power,
        shorted=harvested < params.decode_power,
    )


def demodulate_frame(
    rx: ReceivedFrame,
    walsh: WalshMatrix,
    constellation: Constellation,
    params: SystemParams,
    realization: ChannelRealization,
    e1: float | None = None,
):
    """Detect a frame end to end and evaluate the shortage independently.

    Bit decisions are produced whether or not the frame is shorted; the
    caller decides how shorted frames are accounted.
    """
    s0_hat, s_hat = detect_frame_batch(
        rx.reference[None], rx.data[None], walsh, constellation
    )
    bits = symbols_to_bits(FrameSymbols(s0=int(s0_hat[0]), s=s_hat[0]), params)
    return bits, check_shortage(realization, params, e1)
