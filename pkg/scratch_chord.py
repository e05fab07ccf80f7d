"""Adjudicate the secant-line construction variants for the closed-form data BER."""
import math

import numpy as np

from dcsklink.channel import make_profile
from dcsklink.params import SystemParams, default_decode_power
from dcsklink.theory import mdcsk_ber_integral, qfunc, snr_mixture


def closed_with(params, profile, ebn0, variant):
    bits = params.bits_per_frame
    n = params.n_subcarriers
    beta = params.spreading
    phi = params.power_split
    a = phi * bits * math.sin(math.pi / params.mod_order)
    if variant in ("printed_tiny", "printed_tangent0"):
        b = 4.0 * phi * n * bits
        c = 4.0 * n * n * beta
        slope0 = a / (2.0 * n * math.sqrt(2 * math.pi * beta))
    else:
        b = 2.0 * phi * n * bits
        c = n * n * beta
        slope0 = a / (n * math.sqrt(2 * math.pi * beta))
    if variant.endswith("tiny"):
        x0 = a / (4.0 * n * math.sqrt(2 * math.pi * beta))
    else:
        x0 = 0.5 / slope0  # tangent's zero crossing
    y0 = float(qfunc(a * x0 / math.sqrt(b * x0 + c)))
    k = (y0 - 0.5) / x0
    mx = snr_mixture(profile, params, ebn0)
    pf = 1.0 if params.mod_order == 2 else 2.0 / math.log2(params.mod_order)
    terms = mx.coeffs * (k * mx.means * (1.0 - np.exp(1.0 / (2.0 * k * mx.means))) + 0.5)
    return min(1.0, max(0.0, pf * float(terms.sum())))


params = SystemParams(4, 4, 2, 160, 0.5, 0.5, default_decode_power(4, 160), 20.0)
profile = make_profile("table1", 2)
grid = np.arange(0.0, 32.0, 0.5)
ber_int = np.array([mdcsk_ber_integral(profile, params, db) for db in grid])


def crossing(vals, target=1e-3):
    vals = np.asarray(vals)
    for i in range(len(vals) - 1):
        if vals[i] >= target >= vals[i + 1]:
            f = (math.log(target) - math.log(vals[i])) / (math.log(vals[i + 1]) - math.log(vals[i]))
            return grid[i] + f * (grid[i + 1] - grid[i])
    return float("nan")


ci = crossing(ber_int)
print(f"integral crosses 1e-3 at {ci:.2f} dB")
for variant in ("printed_tiny", "printed_tangent0", "consistent_tiny", "consistent_tangent0"):
    vals = np.array([closed_with(params, profile, db, variant) for db in grid])
    cc = crossing(vals)
    lows = [(vals[i] - ber_int[i]) / ber_int[i] for i, db in enumerate(grid) if db <= 5.0]
    print(
        f"{variant:22s} crosses at {cc:6.2f} dB  offset {cc - ci:+.2f} dB  "
        f"max|gap| below 5dB {max(abs(g) for g in lows):.3f}  "
        f"gap@20dB {(vals[grid == 20.0][0] - ber_int[grid == 20.0][0]) / ber_int[grid == 20.0][0]:+.3f}"
    )
