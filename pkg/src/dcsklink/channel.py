"""Multipath Rayleigh block-fading channel with chip-delay memory and power splitting.

Fading is block-constant per frame and independent across frames and
antennas.  Delays are integer chips; chips delayed past the frame edge are
taken from the previous frame's transmitted chips, which is what produces
real inter-frame interference in simulation.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import SystemParams
from .transmitter import TxFrame


@dataclass(frozen=True)
class AntennaPaths:
    powers: tuple
    delays: tuple

    def __post_init__(self):
        if len(self.powers) != len(self.delays):
            raise ValueError("path powers and delays must have equal length")
        if any(p < 0 for p in self.powers):
            raise ValueError("path mean powers must be >= 0")
        if abs(sum(self.powers) - 1.0) > 1e-9:
            raise ValueError(f"per-antenna mean powers must sum to 1, got {sum(self.powers)}")
        if any(d != int(d) or d < 0 for d in self.delays):
            raise ValueError("path delays must be nonnegative integers")
        if any(b <= a for a, b in zip(self.delays, self.delays[1:])):
            raise ValueError("path delays must be strictly increasing")


@dataclass(frozen=True)
class ChannelProfile:
    antennas: tuple
    fading: bool = True

    @property
    def n_antennas(self) -> int:
        return len(self.antennas)

    @property
    def max_delay(self) -> int:
        return max(max(a.delays) for a in self.antennas)

    def mean_powers_flat(self) -> np.ndarray:
        return np.concatenate([np.asarray(a.powers, dtype=float) for a in self.antennas])


TABLE1 = ChannelProfile(
    antennas=(
        AntennaPaths(powers=(0.7, 0.2, 0.1), delays=(0, 2, 5)),
        AntennaPaths(powers=(0.6, 0.25, 0.15), delays=(0, 3, 6)),
        AntennaPaths(powers=(0.8, 0.12, 0.08), delays=(0, 1, 2)),
        AntennaPaths(powers=(0.28, 0.42, 0.3), delays=(0, 2, 4)),
    )
)


def make_profile(spec, n_antennas: int) -> ChannelProfile:
    """Resolve a profile preset name or inline description for N_t antennas."""
    if isinstance(spec, ChannelProfile):
        profile = spec
    elif spec == "table1":
        if n_antennas > TABLE1.n_antennas:
            raise ValueError(f"table1 profile defines {TABLE1.n_antennas} antennas, requested {n_antennas}")
        profile = ChannelProfile(antennas=TABLE1.antennas[:n_antennas])
    elif spec == "ideal":
        profile = ChannelProfile(
            antennas=tuple(AntennaPaths(powers=(1.0,), delays=(0,)) for _ in range(n_antennas)),
            fading=False,
        )
    elif isinstance(spec, dict):
        profile = ChannelProfile(
            antennas=tuple(
                AntennaPaths(powers=tuple(a["powers"]), delays=tuple(a["delays"]))
                for a in spec["antennas"]
            ),
            fading=bool(spec.get("fading", True)),
        )
    else:
        raise ValueError(f"unknown channel profile {spec!r}")
    if profile.n_antennas != n_antennas:
        raise ValueError(
            f"profile defines {profile.n_antennas} antennas, system uses {n_antennas}"
        )
    return profile


@dataclass(frozen=True)
class ChannelRealization:
    """Per-antenna path amplitudes for one frame; delays copied from the profile."""

    amplitudes: tuple
    profile: ChannelProfile

    def gain_sum(self) -> float:
        """Sum over antennas and paths of the squared amplitudes."""
        return float(sum(float(a @ a) for a in self.amplitudes))


def draw_realizations(profile: ChannelProfile, count: int, rng) -> list:
    """Draw ``count`` independent block-fading realizations per antenna.

    Returns one (count, L) amplitude array per antenna; E[alpha^2] equals the
    profile mean power of each path.
    """
    out = []
    for ant in profile.antennas:
        powers = np.asarray(ant.powers, dtype=float)
        if profile.fading:
            scale = np.sqrt(powers / 2.0)
            out.append(rng.rayleigh(scale=np.broadcast_to(scale, (count, len(powers)))))
        else:
            out.append(np.broadcast_to(np.sqrt(powers), (count, len(powers))).copy())
    return out


def draw_realization(profile: ChannelProfile, rng) -> ChannelRealization:
    batches = draw_realizations(profile, 1, rng)
    return ChannelRealization(amplitudes=tuple(b[0] for b in batches), profile=profile)


def realization_at(batches: list, index: int, profile: ChannelProfile) -> ChannelRealization:
    return ChannelRealization(amplitudes=tuple(b[index] for b in batches), profile=profile)


class ChannelState:
    """Per-antenna tail of previously transmitted chips, one per subcarrier branch."""

    def __init__(self, profile: ChannelProfile, params: SystemParams):
        if profile.n_antennas != params.n_antennas:
            raise ValueError("profile antenna count does not match system parameters")
        if profile.max_delay > params.spreading // 8:
            raise ValueError(
                f"max path delay {profile.max_delay} exceeds spreading/8 = {params.spreading // 8}"
            )
        self.max_delay = profile.max_delay
        self.tail = np.zeros((params.n_antennas, params.n_subcarriers, 2, self.max_delay))

    def check(self, n_antennas: int, n_subcarriers: int):
        if self.tail.shape[:3] != (n_antennas, n_subcarriers, 2):
            raise ValueError(
                f"channel state shaped {self.tail.shape} does not match "
                f"({n_antennas}, {n_subcarriers}, 2, max_delay)"
            )


@dataclass(frozen=True)
class ReceivedFrame:
    """Post-splitter, post-matched-filter chips of one frame.

    ``reference``/``data`` are (N, beta) information-branch chips carrying the
    sqrt(phi) split; ``harvester_power`` is the total power of the (1-phi)
    splitter copy before RF-to-DC conversion.
    """

    reference: np.ndarray
    data: np.ndarray
    harvester_power: float


def propagate_batch(
    chips: np.ndarray,
    alphas: Sequence[np.ndarray],
    profile: ChannelProfile,
    state: ChannelState,
    params: SystemParams,
    rng,
):
    """Propagate a batch of frames, maintaining inter-frame chip history.

    Parameters
    ----------
    chips : (F, N_t, N, 2, beta) transmitted chip matrix.
    alphas : per-antenna (F, L) fading amplitudes for each frame.
    Returns (rx, harvester_power): (F, N, 2, beta) information-branch chips
    and the (F,) harvester-copy power.
    """
    frames, nt, n, _, beta = chips.shape
    if nt != params.n_antennas or n != params.n_subcarriers or beta != params.spreading:
        raise ValueError("transmitted chip matrix does not match system parameters")
    state.check(nt, n)
    tau_max = state.max_delay
    total = frames * beta
    signal = np.zeros((frames, n, 2, beta))
    for t, ant in enumerate(profile.antennas):
        stream = np.concatenate(
            [state.tail[t], chips[:, t].transpose(1, 2, 0, 3).reshape(n, 2, total)],
            axis=-1,
        )
        for l, delay in enumerate(ant.delays):
            start = tau_max - delay
            delayed = stream[..., start:start + total].reshape(n, 2, frames, beta)
            signal += alphas[t][:, l][:, None, None, None] * delayed.transpose(2, 0, 1, 3)
        if tau_max > 0:
            state.tail[t] = stream[..., -tau_max:]
    harvester_power = (1.0 - params.power_split) * np.einsum("fibk,fibk->f", signal, signal)
    rx = math.sqrt(params.power_split) * signal
    sigma = math.sqrt(params.noise_density / 2.0) if params.noise_density > 0 else 0.0
    if sigma > 0.0:
        rx += sigma * rng.standard_normal(rx.shape)
    return rx, harvester_power


def propagate(
    tx: TxFrame,
    realization: ChannelRealization,
    state: ChannelState,
    params: SystemParams,
    rng,
) -> ReceivedFrame:
    """Single-frame wrapper around :func:`propagate_batch`."""
    alphas = [a[None, :] for a in realization.amplitudes]
    rx, harvester_power = propagate_batch(
        tx.chips[None], alphas, realization.profile, state, params, rng
    )
    return ReceivedFrame(
        reference=rx[0, :, 0, :], data=rx[0, :, 1, :], harvester_power=float(harvester_power[0])
    )


def harvested_power(realization: ChannelRealization, params: SystemParams, e1: float) -> float:
    """Linear-harvester output power for one channel realization."""
    return (
        2.0
        * params.n_subcarriers
        * e1
        * params.harvest_eff
        * (1.0 - params.power_split)
        / params.n_antennas
        * realization.gain_sum()
    )
