"""Dev check of the Appendix-style moment oracles (not shipped)."""
import math

import numpy as np

from dcsklink.chaos import ChaoticMap, ChipStream, default_seed, quadrature_companion, walsh
from dcsklink.channel import draw_realization, make_profile
from dcsklink.params import SystemParams, default_decode_power
from dcsklink.receiver import cim_detect_batch, decision_pairs_batch

WINDOW = 1024


class CompositeSampler:
    def __init__(self, realization, beta, map_kind="logistic", quadrature=False):
        profile = realization.profile
        self.realization = realization
        self.beta = beta
        self.quadrature = quadrature
        self.margin = profile.max_delay
        self.streams = [
            ChipStream(ChaoticMap(map_kind, default_seed(t + 1)))
            for t in range(profile.n_antennas)
        ]

    def take(self, n):
        nt = len(self.streams)
        scale = 1.0 / math.sqrt(nt)
        x = np.zeros((n, self.beta))
        z = np.zeros((n, self.beta)) if self.quadrature else None
        for t, stream in enumerate(self.streams):
            w = stream.take(n * WINDOW).reshape(n, WINDOW)
            wq = quadrature_companion(w) if self.quadrature else None
            delays = self.realization.profile.antennas[t].delays
            for amp, delay in zip(self.realization.amplitudes[t], delays):
                lo = self.margin - delay
                x += scale * amp * w[:, lo:lo + self.beta]
                if self.quadrature:
                    z += scale * amp * wq[:, lo:lo + self.beta]
        return x, z


def run_crit2(ebn0, trials=200_000, chunk=4000, seed=42):
    params = SystemParams(4, 8, 2, 160, 0.5, 0.5, default_decode_power(4, 160), ebn0)
    profile = make_profile("table1", 2)
    realization = draw_realization(profile, np.random.default_rng(2024))
    a_sum = realization.gain_sum() / params.n_antennas
    n0 = params.noise_density
    beta, n = params.spreading, params.n_subcarriers
    e1 = params.sequence_energy
    phi = params.power_split
    wal = walsh(n)
    sampler = CompositeSampler(realization, beta)
    rng = np.random.default_rng(seed)
    s0, j_mis = 1, 3
    row = wal.rows[s0].astype(float)
    matched, mismatched = [], []
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        x, _ = sampler.take(c)
        ref = math.sqrt(phi) * row[None, :, None] * x[:, None, :]
        ref = ref + rng.normal(0.0, math.sqrt(n0 / 2.0), size=(c, n, beta))
        _, z = cim_detect_batch(ref, wal)
        matched.append(z[:, s0])
        mismatched.append(z[:, j_mis])
        done += c
    zm = np.concatenate(matched)
    zx = np.concatenate(mismatched)
    mu1 = phi * n * n * e1 * a_sum + beta * n * n0 / 2.0
    var1 = 2.0 * phi * n**3 * e1 * n0 * a_sum + beta * n * n * n0 * n0 / 2.0
    mu2 = beta * n * n0 / 2.0
    var2 = beta * n * n * n0 * n0 / 2.0
    print(f"crit2 @ {ebn0} dB  (A={a_sum:.4f}, N0={n0:.3f})")
    for name, mc, th in [
        ("E[matched]", zm.mean(), mu1), ("Var[matched]", zm.var(ddof=1), var1),
        ("E[mismatch]", zx.mean(), mu2), ("Var[mismatch]", zx.var(ddof=1), var2),
    ]:
        print(f"  {name:13s} mc={mc:.5e} th={th:.5e} rel={(mc - th) / th:+.4f}")


def run_crit3(ebn0, trials=400_000, chunk=4000, seed=43):
    params = SystemParams(4, 8, 2, 160, 0.5, 0.5, default_decode_power(4, 160), ebn0)
    profile = make_profile("table1", 2)
    realization = draw_realization(profile, np.random.default_rng(2024))
    a_sum = realization.gain_sum() / params.n_antennas
    n0 = params.noise_density
    beta = params.spreading
    e1 = params.sequence_energy
    phi = params.power_split
    a, b = math.cos(2 * math.pi / 8), math.sin(2 * math.pi / 8)
    sampler = CompositeSampler(realization, beta, quadrature=True)
    rng = np.random.default_rng(seed)
    za, zb = [], []
    done = 0
    sig = math.sqrt(n0 / 2.0)
    while done < trials:
        c = min(chunk, trials - done)
        x, z = sampler.take(c)
        ref = math.sqrt(phi) * x + rng.normal(0, sig, size=(c, beta))
        quad = math.sqrt(phi) * z + rng.normal(0, sig, size=(c, beta))
        data = math.sqrt(phi) * (a * x + b * z) + rng.normal(0, sig, size=(c, beta))
        pa, pb = decision_pairs_batch(data[:, None, :], ref[:, None, :], quad[:, None, :])
        za.append(pa[:, 0])
        zb.append(pb[:, 0])
        done += c
    za = np.concatenate(za)
    zb = np.concatenate(zb)
    mean_a = phi * a * e1 * a_sum
    mean_b = phi * b * e1 * a_sum
    var = phi * e1 * n0 * a_sum + beta * n0 * n0 / 4.0
    print(f"crit3 @ {ebn0} dB  (A={a_sum:.4f}, N0={n0:.3f})")
    for name, mc, th in [
        ("E[z_a]", za.mean(), mean_a), ("E[z_b]", zb.mean(), mean_b),
        ("Var[z_a]", za.var(ddof=1), var), ("Var[z_b]", zb.var(ddof=1), var),
    ]:
        print(f"  {name:9s} mc={mc:.5e} th={th:.5e} rel={(mc - th) / th:+.4f}")


run_crit2(3.0)
run_crit2(5.0)
run_crit3(10.0)
run_crit3(8.0)
