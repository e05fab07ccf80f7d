"""End-to-end smoke checks during development (not shipped)."""
import math
import time

import numpy as np

from dcsklink.harness import ExperimentConfig, grid_points, run_point
from dcsklink.params import SystemParams, default_decode_power

# 1) Noiseless, no fading, no shortage -> zero errors.
cfg = ExperimentConfig(
    ebn0_db=(math.inf,), phi=(1.0,), nt=(2,), n=(4,), m=(4,), beta=(160,),
    profile="ideal", decode_power=0.0, min_errors=100, max_frames=1000, seed=7,
)
spec = grid_points(cfg)[0]
t0 = time.perf_counter()
res = run_point(spec, cfg.seed)
print("noiseless:", res.failure or f"frames={res.frames} errors={res.errors} ber={res.ber}")
print(f"  wall {res.wall_time:.2f}s  ({res.frames * 160 * 2 / res.wall_time:.2e} chips/s)")

# 2) A fig4a-style point at 20 dB: compare sim vs theory.
cfg2 = ExperimentConfig(
    ebn0_db=(20.0,), phi=(0.5,), nt=(2,), n=(4,), m=(4,), beta=(160,),
    profile="table1", min_errors=200, max_frames=400_000, seed=11,
)
spec2 = grid_points(cfg2)[0]
res2 = run_point(spec2, cfg2.seed)
print("fig4a@20dB:", res2.failure or "")
print(f"  frames={res2.frames} errors={res2.errors:.0f} shortage={res2.shortage_rate:.2e}")
print(f"  sim: ber={res2.ber:.3e} cim={res2.ber_cim:.3e} mdcsk={res2.ber_mdcsk:.3e}")
t = res2.theory
print(f"  thy: sys={t.p_sys:.3e} cim={t.p_cim:.3e} mdcsk={t.p_mdcsk_integral:.3e} shr={t.p_shr:.3e}")
print(f"  ratio sys={res2.ber / t.p_sys:.2f} cim={res2.ber_cim / t.p_cim:.2f} mdcsk={res2.ber_mdcsk / t.p_mdcsk_integral:.2f}")
print(f"  wall {res2.wall_time:.1f}s ({res2.frames / res2.wall_time:.0f} frames/s)")
