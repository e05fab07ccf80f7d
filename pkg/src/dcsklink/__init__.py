"""Link-level simulator and analytical evaluator for a code-index modulated
multi-carrier M-ary DCSK system with MISO power-splitting energy harvesting."""

from .chaos import (
    ChaoticMap,
    ChipSequence,
    ChipStream,
    Constellation,
    WalshMatrix,
    constellation,
    generate_sequence,
    next_chip,
    quadrature_companion,
    walsh,
)
from .channel import (
    ChannelProfile,
    ChannelRealization,
    ChannelState,
    ReceivedFrame,
    TABLE1,
    draw_realization,
    harvested_power,
    make_profile,
    propagate,
)
from .harness import ExperimentConfig, emit, preset, run_grid, run_point, theory_rows
from .params import SystemParams, default_decode_power
from .receiver import (
    check_shortage,
    cim_detect,
    demodulate_frame,
    mdcsk_detect,
    recover_reference,
)
from .theory import (
    DegenerateMeansError,
    FadingMixture,
    TheoryPoint,
    chi_mixture_pdf,
    cim_ber,
    cim_ser_conditional,
    energy_efficiency,
    mdcsk_ber_closed,
    mdcsk_ber_integral,
    mixture_coefficients,
    shortage_probability,
    spectral_efficiency,
    system_ber,
)
from .transmitter import FrameSymbols, TxFrame, bits_to_symbols, modulate, symbols_to_bits

__all__ = [name for name in dir() if not name.startswith("_")]
