"""Shared Monte Carlo helpers for the oracle and pipeline tests."""

import math

import numpy as np

from dcsklink.chaos import (
    ChaoticMap,
    ChipStream,
    constellation,
    default_seed,
    quadrature_companion,
    walsh,
)
from dcsklink.channel import ChannelState, draw_realizations, propagate_batch
from dcsklink.receiver import detect_frame_batch
from dcsklink.transmitter import DATA, REFERENCE


class CompositeSampler:
    """Draws trial blocks of the delayed multipath composite signals.

    Each trial takes a fresh window of the continuous chaotic streams and
    slices the delayed copies out of the window interior, so no delayed chip
    ever crosses a block edge; the quadrature companion is computed over the
    whole window, which keeps its edge leakage negligible relative to the
    spreading block.
    """

    def __init__(self, realization, beta, map_kind="logistic", quadrature=False, window=1024):
        profile = realization.profile
        self.realization = realization
        self.beta = beta
        self.quadrature = quadrature
        self.window = window
        self.margin = profile.max_delay
        if window < beta + self.margin:
            raise ValueError("window too short for the requested block and delays")
        self.streams = [
            ChipStream(ChaoticMap(map_kind, default_seed(t + 1)))
            for t in range(profile.n_antennas)
        ]

    def take(self, n_trials):
        """Return composites X (and Z when quadrature is on), shaped (n_trials, beta)."""
        nt = len(self.streams)
        scale = 1.0 / math.sqrt(nt)
        x = np.zeros((n_trials, self.beta))
        z = np.zeros((n_trials, self.beta)) if self.quadrature else None
        for t, stream in enumerate(self.streams):
            w = stream.take(n_trials * self.window).reshape(n_trials, self.window)
            wq = quadrature_companion(w) if self.quadrature else None
            delays = self.realization.profile.antennas[t].delays
            for amp, delay in zip(self.realization.amplitudes[t], delays):
                lo = self.margin - delay
                x += scale * amp * w[:, lo:lo + self.beta]
                if self.quadrature:
                    z += scale * amp * wq[:, lo:lo + self.beta]
        return x, z


def simulate_frames(params, profile, frames, seed, map_kind="logistic", symbols=None, batch=256):
    """Run the transmit/channel/receive pipeline and return per-frame records.

    ``symbols`` may be a callable (count, rng) -> (s0, s) to pin the
    transmitted symbols; by default they are drawn uniformly.
    """
    n, m, nt, beta = params.n_subcarriers, params.mod_order, params.n_antennas, params.spreading
    wal = walsh(n)
    const = constellation(m)
    rng_channel = np.random.default_rng((seed, 1))
    rng_noise = np.random.default_rng((seed, 2))
    rng_data = np.random.default_rng((seed, 3))
    streams = [ChipStream(ChaoticMap(map_kind, default_seed(t + 1))) for t in range(nt)]
    state = ChannelState(profile, params)
    scale = 1.0 / math.sqrt(nt)
    harvest_scale = 2.0 * n * params.harvest_eff * (1.0 - params.power_split) / nt
    records = {k: [] for k in ("s0", "s", "s0_hat", "s_hat", "shorted")}
    done = 0
    while done < frames:
        f = min(batch, frames - done)
        if symbols is None:
            s0 = rng_data.integers(0, n, size=f)
            s = rng_data.integers(0, m, size=(f, n))
        else:
            s0, s = symbols(f, rng_data)
        a = const.cosines[s]
        b = const.sines[s]
        chips = np.empty((f, nt, n, 2, beta))
        e1 = np.zeros(f)
        for t in range(nt):
            cx = streams[t].take(f * beta).reshape(f, beta)
            cy = quadrature_companion(cx)
            e1 += np.einsum("fk,fk->f", cx, cx)
            chips[:, t, :, REFERENCE, :] = scale * wal.rows[s0][:, :, None] * cx[:, None, :]
            chips[:, t, :, DATA, :] = scale * (
                a[:, :, None] * cx[:, None, :] + b[:, :, None] * cy[:, None, :]
            )
        e1 /= nt
        alphas = draw_realizations(profile, f, rng_channel)
        rx, _ = propagate_batch(chips, alphas, profile, state, params, rng_noise)
        gain = np.zeros(f)
        for t in range(nt):
            gain += np.einsum("fl,fl->f", alphas[t], alphas[t])
        s0_hat, s_hat = detect_frame_batch(rx[:, :, REFERENCE, :], rx[:, :, DATA, :], wal, const)
        records["s0"].append(s0)
        records["s"].append(s)
        records["s0_hat"].append(s0_hat)
        records["s_hat"].append(s_hat)
        records["shorted"].append(harvest_scale * e1 * gain < params.decode_power)
        done += f
    return {k: np.concatenate(v) for k, v in records.items()}


def crossing_db(grid_db, bers, target):
    """Log-linear interpolation of the SNR at which a BER curve hits ``target``."""
    grid_db = np.asarray(grid_db, dtype=float)
    bers = np.asarray(bers, dtype=float)
    for i in range(len(bers) - 1):
        if bers[i] >= target >= bers[i + 1] and bers[i] > 0 and bers[i + 1] > 0:
            f = (math.log(target) - math.log(bers[i])) / (
                math.log(bers[i + 1]) - math.log(bers[i])
            )
            return float(grid_db[i] + f * (grid_db[i + 1] - grid_db[i]))
    raise AssertionError(f"BER curve never crosses {target}: {list(zip(grid_db, bers))}")
