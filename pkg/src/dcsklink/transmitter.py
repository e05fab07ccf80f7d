"""Bit-to-symbol mapping and assembly of the per-antenna baseband chip matrix."""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chaos import ChipSequence, Constellation, WalshMatrix, gray_decode, gray_encode
from .params import SystemParams

REFERENCE, DATA = 0, 1


@dataclass(frozen=True)
class FrameSymbols:
    """One frame's information: the code-index symbol and N data symbols."""

    s0: int
    s: np.ndarray

    def validate(self, params: SystemParams):
        if not 0 <= self.s0 < params.n_subcarriers:
            raise ValueError(f"code-index symbol {self.s0} outside 0..{params.n_subcarriers - 1}")
        s = np.asarray(self.s)
        if s.shape != (params.n_subcarriers,):
            raise ValueError(f"expected {params.n_subcarriers} data symbols, got shape {s.shape}")
        if np.any(s < 0) or np.any(s >= params.mod_order):
            raise ValueError("data symbol outside constellation range")


def bits_to_symbols(bits: Sequence[int], params: SystemParams) -> FrameSymbols:
    """Map a frame's bits to symbols.

    The first log2(N) bits select the Walsh row in natural binary; each
    following log2(M)-bit group selects a constellation point through the
    Gray labeling, so adjacent sectors differ in a single bit.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (params.bits_per_frame,):
        raise ValueError(
            f"frame needs {params.bits_per_frame} bits, got {bits.shape}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    nb = params.cim_bits
    mb = int(math.log2(params.mod_order))
    s0 = int(bits[:nb] @ (1 << np.arange(nb - 1, -1, -1)))
    groups = bits[nb:].reshape(params.n_subcarriers, mb)
    labels = groups @ (1 << np.arange(mb - 1, -1, -1))
    s = np.array([gray_decode(int(v)) for v in labels], dtype=np.int64)
    return FrameSymbols(s0=s0, s=s)


def symbols_to_bits(symbols: FrameSymbols, params: SystemParams) -> np.ndarray:
    """Exact inverse of :func:`bits_to_symbols`."""
    symbols.validate(params)
    nb = params.cim_bits
    mb = int(math.log2(params.mod_order))
    out = np.empty(params.bits_per_frame, dtype=np.int64)
    out[:nb] = (symbols.s0 >> np.arange(nb - 1, -1, -1)) & 1
    labels = np.array([gray_encode(int(v)) for v in symbols.s], dtype=np.int64)
    out[nb:] = ((labels[:, None] >> np.arange(mb - 1, -1, -1)) & 1).ravel()
    return out


@dataclass(frozen=True)
class TxFrame:
    """Per-antenna, per-subcarrier chip matrix, shape (N_t, N, 2, beta).

    Branch 0 carries the Walsh-coded reference sequence, branch 1 the
    constellation-weighted data sequence; the 1/sqrt(N_t) normalization keeps
    the total transmitted symbol energy independent of the antenna count.
    """

    chips: np.ndarray

    @property
    def reference(self) -> np.ndarray:
        return self.chips[:, :, REFERENCE, :]

    @property
    def data(self) -> np.ndarray:
        return self.chips[:, :, DATA, :]


def modulate(
    symbols: FrameSymbols,
    sequences: Sequence[ChipSequence],
    walsh: WalshMatrix,
    constellation: Constellation,
    params: SystemParams,
) -> TxFrame:
    symbols.validate(params)
    n, nt, beta = params.n_subcarriers, params.n_antennas, params.spreading
    if len(sequences) != nt:
        raise ValueError(f"need {nt} chip sequences, got {len(sequences)}")
    if walsh.order != n or constellation.order != params.mod_order:
        raise ValueError("Walsh/constellation order does not match the system parameters")
    scale = 1.0 / math.sqrt(nt)
    chips = np.empty((nt, n, 2, beta))
    row = walsh.rows[symbols.s0]
    a = constellation.cosines[symbols.s]
    b = constellation.sines[symbols.s]
    for t, seq in enumerate(sequences):
        if seq.inphase.shape != (beta,):
            raise ValueError(f"chip sequence {t} has length {seq.inphase.shape}, expected {beta}")
        chips[t, :, REFERENCE, :] = scale * row[:, None] * seq.inphase[None, :]
        chips[t, :, DATA, :] = scale * (
            a[:, None] * seq.inphase[None, :] + b[:, None] * seq.quadrature[None, :]
        )
    return TxFrame(chips=chips)
