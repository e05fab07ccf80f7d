"""Dev-time numeric adjudication of the contested closed forms (not shipped)."""
import math

import numpy as np
from scipy.integrate import quad

from dcsklink.channel import make_profile
from dcsklink.params import SystemParams, default_decode_power
from dcsklink.theory import (
    _cim_geometry,
    cim_ser_conditional,
    cim_ber,
    mdcsk_ber_integral,
    mdcsk_ber_closed,
    qfunc,
    snr_mixture,
    _mixture_average,
)


def cim_ser_exact(gamma_b, params):
    """Exact ordering-probability SER (inner CDF evaluated exactly)."""
    n = params.n_subcarriers
    gamma1, eta1 = _cim_geometry(gamma_b, params)

    def integrand(u):
        v = (u + gamma1) / eta1
        return (1.0 - (1.0 - qfunc(v)) ** (n - 1)) * math.exp(-u * u / 2.0) / math.sqrt(2 * math.pi)

    val, err = quad(integrand, -12, 12, epsabs=1e-300, epsrel=1e-10, limit=400)
    return val


params44 = SystemParams(
    n_subcarriers=4, mod_order=4, n_antennas=2, spreading=160,
    power_split=0.5, harvest_eff=0.5,
    decode_power=default_decode_power(4, 160), ebn0_db=20.0,
)

print("== CIM SER closed form vs exact quadrature (N=4, M=4, phi=0.5, beta=160) ==")
for gb in [0.0, 1.0, 10.0, 50.0, 100.0, 200.0]:
    exact = cim_ser_exact(gb, params44)
    closed = cim_ser_conditional(gb, params44)
    print(f"gamma_b={gb:7.1f}  exact={exact:.6e}  closed={closed:.6e}  ratio={closed/max(exact,1e-300):.4f}")

print()
print("== N=2 at gamma_b=0 (spec example: 1/4) ==")
params2 = SystemParams(
    n_subcarriers=2, mod_order=4, n_antennas=1, spreading=160,
    power_split=0.5, harvest_eff=0.5, decode_power=0.0, ebn0_db=0.0,
)
print("closed:", cim_ser_conditional(0.0, params2), " exact:", cim_ser_exact(0.0, params2))

print()
print("== M-DCSK closed vs integral (criterion 8) N_t=2 table1, N=4, M=4, phi=0.5 ==")
profile = make_profile("table1", 2)
grid = np.arange(0.0, 31.0, 1.0)
ints, closes = [], []
for db in grid:
    pi = mdcsk_ber_integral(profile, params44, db)
    pc = mdcsk_ber_closed(profile, params44, db)
    ints.append(pi)
    closes.append(pc)
    if db <= 6 or db % 5 == 0:
        print(f"  {db:4.0f} dB: integral={pi:.4e} closed={pc:.4e} rel_gap={(pc-pi)/pi:+.3f}")

def crossing_db(vals, target=1e-3):
    vals = np.array(vals)
    for i in range(len(vals) - 1):
        if vals[i] >= target >= vals[i + 1]:
            # log-linear interpolation in dB
            f = (math.log(target) - math.log(vals[i])) / (math.log(vals[i + 1]) - math.log(vals[i]))
            return grid[i] + f * (grid[i + 1] - grid[i])
    return None

ci = crossing_db(ints)
cc = crossing_db(closes)
print(f"  dB @ BER 1e-3: integral={ci:.2f} closed={cc:.2f} offset={cc-ci:+.2f} dB")

print()
print("== CIM BER theory at fig4a points ==")
for db in [10, 15, 20, 25]:
    print(f"  {db} dB: P_b,CIM={cim_ber(profile, params44, db):.4e}")
