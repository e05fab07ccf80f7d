"""Experiment runner: parameter grids, seeded substreams, the Monte Carlo frame
loop, theory evaluation, and reproducible CSV/manifest emission."""

import csv
import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path

import numpy as np

from .chaos import ChaoticMap, ChipStream, MAP_KINDS, constellation, default_seed, quadrature_companion, walsh
from .channel import ChannelProfile, ChannelState, draw_realizations, make_profile, propagate_batch
from .params import SystemParams, default_decode_power
from .receiver import detect_frame_batch
from .theory import DegenerateMeansError, TheoryPoint, system_ber
from .transmitter import DATA, REFERENCE

# Frames per vectorized batch.  Part of the reproducibility contract: noise is
# drawn batch-wise, so the same config and seed always replay the same batches.
BATCH_FRAMES = 256

_ROLE_CHANNEL, _ROLE_NOISE, _ROLE_DATA = 1, 2, 3

SHORTAGE_MODES = ("paper", "half")

RESULT_COLUMNS = (
    "ebn0_db", "phi", "nt", "n", "m", "beta",
    "ber_sim", "ber_cim_sim", "ber_mdcsk_sim", "shortage_sim",
    "ber_theory", "pshr_theory", "se", "ee", "frames", "errors",
)

THEORY_COLUMNS = (
    "EbN0_dB", "P_Shr", "P_b_CIM", "P_b_MDCSK_int", "P_b_MDCSK_closed",
    "P_sys", "SE", "EE", "phi", "nt", "n", "m", "beta",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of operating points plus everything needed to reproduce a run."""

    ebn0_db: tuple = (0.0,)
    phi: tuple = (0.5,)
    nt: tuple = (2,)
    n: tuple = (4,)
    m: tuple = (4,)
    beta: tuple = (160,)
    harvest_eff: float = 0.5
    decode_power: float | None = None  # None selects 2*N*E1/100
    profile: object = "table1"
    map_kind: str = "logistic"
    min_errors: int = 200
    max_frames: int = 1_000_000
    seed: int = 1
    shortage_mode: str = "paper"
    label: str = ""

    def __post_init__(self):
        for name in ("ebn0_db", "phi", "nt", "n", "m", "beta"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"grid axis {name} must be non-empty")
        if self.min_errors < 100:
            raise ValueError(f"stop rule needs at least 100 bit errors, got {self.min_errors}")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.shortage_mode not in SHORTAGE_MODES:
            raise ValueError(f"shortage mode must be one of {SHORTAGE_MODES}")
        if self.map_kind not in MAP_KINDS:
            raise ValueError(f"unknown chaotic map {self.map_kind!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        for name in ("ebn0_db", "phi", "nt", "n", "m", "beta"):
            out[name] = list(out[name])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        kwargs = dict(data)
        for name in ("ebn0_db", "phi", "nt", "n", "m", "beta"):
            if name in kwargs:
                value = kwargs[name]
                kwargs[name] = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        if isinstance(kwargs.get("profile"), list):
            raise ValueError("profile must be a preset name or a mapping")
        return cls(**kwargs)


@dataclass(frozen=True)
class PointSpec:
    """One resolved grid point."""

    params: SystemParams
    profile: ChannelProfile
    map_kind: str
    min_errors: int
    max_frames: int
    shortage_mode: str
    label: str

    def key(self) -> str:
        p = self.params
        prof = [(a.powers, a.delays) for a in self.profile.antennas]
        return "|".join(
            str(v)
            for v in (
                p.ebn0_db, p.power_split, p.n_antennas, p.n_subcarriers, p.mod_order,
                p.spreading, p.harvest_eff, p.decode_power, self.map_kind, prof,
                self.profile.fading, self.shortage_mode,
            )
        )


def grid_points(cfg: ExperimentConfig) -> list:
    points = []
    for ebn0, phi, nt, n, m, beta in itertools.product(
        cfg.ebn0_db, cfg.phi, cfg.nt, cfg.n, cfg.m, cfg.beta
    ):
        decode_power = cfg.decode_power
        if decode_power is None:
            decode_power = default_decode_power(n, beta)
        params = SystemParams(
            n_subcarriers=n, mod_order=m, n_antennas=nt, spreading=beta,
            power_split=phi, harvest_eff=cfg.harvest_eff,
            decode_power=decode_power, ebn0_db=ebn0,
        )
        points.append(
            PointSpec(
                params=params,
                profile=make_profile(cfg.profile, nt),
                map_kind=cfg.map_kind,
                min_errors=cfg.min_errors,
                max_frames=cfg.max_frames,
                shortage_mode=cfg.shortage_mode,
                label=cfg.label,
            )
        )
    return points


def _substream(master_seed: int, key: str, role: int):
    """Independent generator per (master seed, point content, stream role).

    Seeding hashes the point's parameters rather than its grid position, so
    adding or permuting grid points never perturbs existing points' streams.
    """
    digest = hashlib.sha256(key.encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *words, role]))


@dataclass
class PointResult:
    """Per-point Monte Carlo tallies with the matching theory point attached."""

    spec: PointSpec
    frames: int = 0
    shorted_frames: int = 0
    errors: float = 0.0
    cim_errors: int = 0
    mdcsk_errors: int = 0
    decoded_frames: int = 0
    theory: TheoryPoint | None = None
    wall_time: float = 0.0
    failure: str = ""

    @property
    def ber(self) -> float:
        bits = self.spec.params.bits_per_frame * self.frames
        return self.errors / bits if bits else math.nan

    @property
    def ber_cim(self) -> float:
        bits = self.spec.params.cim_bits * self.decoded_frames
        return self.cim_errors / bits if bits else math.nan

    @property
    def ber_mdcsk(self) -> float:
        bits = self.spec.params.data_bits * self.decoded_frames
        return self.mdcsk_errors / bits if bits else math.nan

    @property
    def shortage_rate(self) -> float:
        return self.shorted_frames / self.frames if self.frames else math.nan


_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


def run_point(spec: PointSpec, master_seed: int) -> PointResult:
    """Stream frames through the transmit/channel/receive pipeline until the
    stop rule fires: ``min_errors`` accumulated bit errors or ``max_frames``."""
    start = time.perf_counter()
    params = spec.params
    n, m, nt, beta = params.n_subcarriers, params.mod_order, params.n_antennas, params.spreading
    result = PointResult(spec=spec)
    try:
        wal = walsh(n)
        const = constellation(m)
        rng_channel = _substream(master_seed, spec.key(), _ROLE_CHANNEL)
        rng_noise = _substream(master_seed, spec.key(), _ROLE_NOISE)
        rng_data = _substream(master_seed, spec.key(), _ROLE_DATA)
        streams = [
            ChipStream(ChaoticMap(spec.map_kind, default_seed(t + 1))) for t in range(nt)
        ]
        state = ChannelState(spec.profile, params)
        scale = 1.0 / math.sqrt(nt)
        labels = const.labels
        harvest_scale = (
            2.0 * n * params.harvest_eff * (1.0 - params.power_split) / nt
        )
        while result.frames < spec.max_frames and result.errors < spec.min_errors:
            f = min(BATCH_FRAMES, spec.max_frames - result.frames)
            s0 = rng_data.integers(0, n, size=f)
            s = rng_data.integers(0, m, size=(f, n))
            chips = np.empty((f, nt, n, 2, beta))
            e1 = np.zeros(f)
            a = const.cosines[s]
            b = const.sines[s]
            for t in range(nt):
                cx = streams[t].take(f * beta).reshape(f, beta)
                cy = quadrature_companion(cx)
                e1 += np.einsum("fk,fk->f", cx, cx)
                chips[:, t, :, REFERENCE, :] = (
                    scale * wal.rows[s0][:, :, None] * cx[:, None, :]
                )
                chips[:, t, :, DATA, :] = scale * (
                    a[:, :, None] * cx[:, None, :] + b[:, :, None] * cy[:, None, :]
                )
            e1 /= nt
            alphas = draw_realizations(spec.profile, f, rng_channel)
            rx, _ = propagate_batch(chips, alphas, spec.profile, state, params, rng_noise)
            gain = np.zeros(f)
            for t in range(nt):
                gain += np.einsum("fl,fl->f", alphas[t], alphas[t])
            harvested = harvest_scale * e1 * gain
            shorted = harvested < params.decode_power
            s0_hat, s_hat = detect_frame_batch(
                rx[:, :, REFERENCE, :], rx[:, :, DATA, :], wal, const
            )
            cim_err = _POPCOUNT[s0 ^ s0_hat]
            data_err = _POPCOUNT[labels[s] ^ labels[s_hat]].sum(axis=1)
            ok = ~shorted
            result.cim_errors += int(cim_err[ok].sum())
            result.mdcsk_errors += int(data_err[ok].sum())
            result.decoded_frames += int(ok.sum())
            result.shorted_frames += int(shorted.sum())
            decoded_errors = float((cim_err[ok] + data_err[ok]).sum())
            shortage_weight = 1.0 if spec.shortage_mode == "paper" else 0.5
            result.errors += decoded_errors
            result.errors += shortage_weight * params.bits_per_frame * int(shorted.sum())
            result.frames += f
        result.theory = system_ber(spec.profile, params, params.ebn0_db)
    except Exception as exc:  # per-point failures must not abort the grid
        result.failure = f"{type(exc).__name__}: {exc}"
    result.wall_time = time.perf_counter() - start
    return result


def _run_point_args(args):
    return run_point(*args)


def run_grid(cfg: ExperimentConfig, workers: int = 1) -> list:
    specs = grid_points(cfg)
    if workers <= 1:
        return [run_point(spec, cfg.seed) for spec in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point_args, [(spec, cfg.seed) for spec in specs]))


def theory_rows(cfg: ExperimentConfig, jitter_degenerate: bool = False) -> list:
    """Evaluate the analytical quantities over the grid (no simulation)."""
    rows = []
    for spec in grid_points(cfg):
        profile = spec.profile
        try:
            point = system_ber(profile, spec.params, spec.params.ebn0_db)
        except DegenerateMeansError:
            if not jitter_degenerate:
                raise
            point = system_ber(_jitter_profile(profile), spec.params, spec.params.ebn0_db)
        rows.append((spec, point))
    return rows


def _jitter_profile(profile: ChannelProfile) -> ChannelProfile:
    """Separate coinciding mean powers by a 1e-6 relative stagger."""
    from .channel import AntennaPaths

    antennas = []
    index = 0
    for ant in profile.antennas:
        powers = []
        for p in ant.powers:
            powers.append(p * (1.0 + 1e-6 * index))
            index += 1
        total = sum(powers)
        antennas.append(
            AntennaPaths(powers=tuple(p / total for p in powers), delays=ant.delays)
        )
    return ChannelProfile(antennas=tuple(antennas), fading=profile.fading)


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def results_table(results: list) -> list:
    rows = []
    for r in results:
        p = r.spec.params
        t = r.theory
        rows.append({
            "ebn0_db": p.ebn0_db, "phi": p.power_split, "nt": p.n_antennas,
            "n": p.n_subcarriers, "m": p.mod_order, "beta": p.spreading,
            "ber_sim": r.ber, "ber_cim_sim": r.ber_cim, "ber_mdcsk_sim": r.ber_mdcsk,
            "shortage_sim": r.shortage_rate,
            "ber_theory": t.p_sys if t else math.nan,
            "pshr_theory": t.p_shr if t else math.nan,
            "se": t.se if t else math.nan, "ee": t.ee if t else math.nan,
            "frames": r.frames, "errors": r.errors,
        })
    return rows


def emit(results: list, cfg: ExperimentConfig, out_dir, fmt: str = "csv") -> dict:
    """Write the results CSV and the run manifest; returns the written paths."""
    if fmt != "csv":
        raise ValueError(f"unsupported output format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        for row in results_table(results):
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    failures = {
        i: r.failure for i, r in enumerate(results) if r.failure
    }
    manifest_path = out / "manifest.json"
    manifest = {
        "artifact": "dcsklink",
        "version": _version(),
        "master_seed": cfg.seed,
        "config": cfg.to_dict(),
        "outputs": [csv_path.name],
        "failures": failures,
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"results": csv_path, "manifest": manifest_path}


def emit_theory(rows: list, out_dir, fmt: str = "csv") -> dict:
    if fmt != "csv":
        raise ValueError(f"unsupported output format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "theory.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=THEORY_COLUMNS)
        writer.writeheader()
        for spec, point in rows:
            p = spec.params
            writer.writerow({
                "EbN0_dB": _fmt(p.ebn0_db), "P_Shr": _fmt(point.p_shr),
                "P_b_CIM": _fmt(point.p_cim), "P_b_MDCSK_int": _fmt(point.p_mdcsk_integral),
                "P_b_MDCSK_closed": _fmt(point.p_mdcsk_closed), "P_sys": _fmt(point.p_sys),
                "SE": _fmt(point.se), "EE": _fmt(point.ee),
                "phi": _fmt(p.power_split), "nt": p.n_antennas, "n": p.n_subcarriers,
                "m": p.mod_order, "beta": p.spreading,
            })
    return {"theory": csv_path}


def read_results_csv(path) -> list:
    """Parse a results CSV back into typed rows (round-trip companion of emit)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, value in row.items():
                if key in ("nt", "n", "m", "beta", "frames"):
                    parsed[key] = int(value)
                else:
                    parsed[key] = float(value)
            rows.append(parsed)
    return rows


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]  # accept a manifest as a config for exact reruns
    return ExperimentConfig.from_dict(data)


def _version() -> str:
    from importlib.metadata import version

    try:
        return version("dcsklink")
    except Exception:
        return "unknown"


def _preset_base(**overrides) -> ExperimentConfig:
    base = dict(
        ebn0_db=tuple(float(x) for x in range(0, 31, 2)),
        phi=(0.5,), nt=(2,), n=(4,), m=(4,), beta=(160,),
        harvest_eff=0.5, decode_power=None, profile="table1", map_kind="logistic",
        min_errors=200, max_frames=1_000_000, seed=1, shortage_mode="paper",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def preset(name: str) -> list:
    """Built-in experiment presets reproducing the reference result sets."""
    makers = {
        "fig4a": lambda: [_preset_base(label="fig4a")],
        "fig4b": lambda: [_preset_base(n=(8,), m=(8,), label="fig4b")],
        "fig5a": lambda: [_preset_base(nt=(4,), label="fig5a")],
        "fig5b": lambda: [_preset_base(nt=(4,), n=(8,), m=(8,), label="fig5b")],
        "fig5-1": lambda: [
            _preset_base(
                beta=(40, 80, 160, 320, 640),
                ebn0_db=tuple(float(x) for x in range(10, 31, 4)),
                label="fig5-1",
            )
        ],
        "fig6": lambda: [
            _preset_base(
                ebn0_db=(15.0, 20.0, 25.0),
                phi=tuple(round(0.1 * i, 1) for i in range(1, 10)),
                label="fig6",
            )
        ],
        "fig7": lambda: [_preset_base(nt=(2, 3, 4), m=(4, 8), label="fig7")],
        "fig8": lambda: [_preset_base(n=(4, 8, 16), m=(4, 8), label="fig8")],
        "fig8-1": lambda: [
            _preset_base(map_kind=kind, nt=(2, 4), label=f"fig8-1-{kind}")
            for kind in MAP_KINDS
        ],
        "fig9": lambda: [
            _preset_base(label="fig9-swipt"),
            _preset_base(phi=(1.0,), decode_power=0.0, label="fig9-miso"),
            _preset_base(nt=(1,), phi=(1.0,), decode_power=0.0, label="fig9-single"),
        ],
    }
    if name not in makers:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(makers)}")
    return makers[name]()


PRESET_NAMES = (
    "fig4a", "fig4b", "fig5a", "fig5b", "fig5-1", "fig6", "fig7", "fig8", "fig8-1", "fig9",
)
