import math

import numpy as np
import pytest

from support import simulate_frames

from dcsklink.chaos import ChaoticMap, constellation, generate_sequence, walsh
from dcsklink.channel import (
    ChannelRealization,
    ChannelState,
    draw_realization,
    make_profile,
    propagate,
)
from dcsklink.params import SystemParams, default_decode_power
from dcsklink.receiver import (
    check_shortage,
    cim_detect,
    demodulate_frame,
    mdcsk_detect,
    recover_reference,
    sector_decision,
)
from dcsklink.transmitter import FrameSymbols, modulate, symbols_to_bits


def make_params(n=4, m=4, nt=1, beta=160, phi=0.5, ebn0=math.inf, lam=0.5, p_r=None):
    if p_r is None:
        p_r = default_decode_power(n, beta)
    return SystemParams(n, m, nt, beta, phi, lam, p_r, ebn0)


def noiseless_rx(params, s0, s, rng_seed=0):
    from dcsklink.chaos import default_seed

    seqs = [
        generate_sequence(ChaoticMap("logistic", default_seed(t + 1)), params.spreading)
        for t in range(params.n_antennas)
    ]
    frame = modulate(
        FrameSymbols(s0=s0, s=np.asarray(s)),
        seqs, walsh(params.n_subcarriers), constellation(params.mod_order), params,
    )
    profile = make_profile("ideal", params.n_antennas)
    state = ChannelState(profile, params)
    realization = draw_realization(profile, np.random.default_rng(rng_seed))
    rx = propagate(frame, realization, state, params, np.random.default_rng(rng_seed))
    return rx, seqs, realization


def test_cim_detect_noiseless_magnitude():
    params = make_params(phi=0.5)
    rx, seqs, _ = noiseless_rx(params, s0=2, s=[0, 0, 0, 0])
    s0_hat, metrics = cim_detect(rx, walsh(4))
    assert s0_hat == 2
    expected = 0.5 * 16 * seqs[0].energy
    assert metrics.z_e[2] == pytest.approx(expected, rel=1e-12)
    others = np.delete(metrics.z_e, 2)
    assert np.max(np.abs(others)) < 1e-18 * expected


def test_cim_detect_all_zero_frame():
    params = make_params()
    from dcsklink.channel import ReceivedFrame

    rx = ReceivedFrame(reference=np.zeros((4, 160)), data=np.zeros((4, 160)), harvester_power=0.0)
    s0_hat, metrics = cim_detect(rx, walsh(4))
    assert s0_hat == 0
    assert np.array_equal(metrics.z_e, np.zeros(4))


def test_scale_invariance_of_decisions():
    params = make_params(n=4, m=8, phi=0.5, ebn0=10.0)
    profile = make_profile("table1", 1)
    state = ChannelState(profile, params)
    from dcsklink.chaos import default_seed

    seqs = [generate_sequence(ChaoticMap("logistic", default_seed(1)), 160)]
    frame = modulate(FrameSymbols(s0=1, s=np.array([0, 5, 2, 7])), seqs, walsh(4), constellation(8), params)
    realization = draw_realization(profile, np.random.default_rng(4))
    rx = propagate(frame, realization, state, params, np.random.default_rng(9))
    wal, const = walsh(4), constellation(8)
    from dcsklink.channel import ReceivedFrame

    for c in (1e-3, 7.0, 1e3):
        scaled = ReceivedFrame(reference=c * rx.reference, data=c * rx.data, harvester_power=rx.harvester_power)
        s0_a, metrics_a = cim_detect(rx, wal)
        s0_b, metrics_b = cim_detect(scaled, wal)
        assert s0_a == s0_b
        assert np.allclose(metrics_b.z_e, c * c * metrics_a.z_e, rtol=1e-9)
        ref_a, quad_a = recover_reference(rx, s0_a, wal)
        ref_b, quad_b = recover_reference(scaled, s0_b, wal)
        assert np.array_equal(mdcsk_detect(rx, ref_a, quad_a, const), mdcsk_detect(scaled, ref_b, quad_b, const))


def test_recover_reference_noiseless():
    params = make_params(phi=0.5)
    rx, seqs, _ = noiseless_rx(params, s0=1, s=[0, 0, 0, 0])
    ref, ref_quad = recover_reference(rx, 1, walsh(4))
    expected = math.sqrt(0.5) * seqs[0].inphase
    for i in range(4):
        assert np.allclose(ref[i], expected, atol=1e-12)
    # quadrature of the recovered reference approximates the transmitted companion
    expected_quad = math.sqrt(0.5) * seqs[0].quadrature
    assert np.allclose(ref_quad[0], expected_quad, atol=1e-9)


def test_recover_reference_wrong_row_is_orthogonal():
    params = make_params(phi=0.5)
    rx, seqs, _ = noiseless_rx(params, s0=1, s=[0, 0, 0, 0])
    despread = walsh(4).rows[3].astype(float) @ rx.reference / 4.0
    assert np.max(np.abs(despread)) < 1e-14


def test_mdcsk_noiseless_phase_and_decision():
    params = make_params(m=8, phi=0.5)
    rx, _, _ = noiseless_rx(params, s0=0, s=[0, 1, 4, 7])
    wal, const = walsh(4), constellation(8)
    s0_hat, _ = cim_detect(rx, wal)
    ref, quad = recover_reference(rx, s0_hat, wal)
    from dcsklink.receiver import decision_pairs_batch

    z_a, z_b = decision_pairs_batch(rx.data[None], ref[None], quad[None])
    angle = math.atan2(z_b[0, 0], z_a[0, 0])
    assert abs(angle) < 0.05
    assert np.array_equal(mdcsk_detect(rx, ref, quad, const), np.array([0, 1, 4, 7]))


def test_rotating_data_branch_shifts_decision():
    params = make_params(m=8, phi=0.5)
    base, _, _ = noiseless_rx(params, s0=0, s=[3, 3, 3, 3])
    shifted, _, _ = noiseless_rx(params, s0=0, s=[4, 4, 4, 4])
    wal, const = walsh(4), constellation(8)
    ref, quad = recover_reference(base, 0, wal)
    assert np.array_equal(mdcsk_detect(base, ref, quad, const) + 1, mdcsk_detect(shifted, ref, quad, const))


def test_sector_boundary_goes_to_smaller_index():
    # z_a = z_b lands exactly on the 0/1 boundary for M=4
    idx = sector_decision(np.array([1.0]), np.array([1.0]), 4)
    assert idx[0] == 0
    just_past = math.pi / 4 + 1e-9
    idx = sector_decision(np.array([math.cos(just_past)]), np.array([math.sin(just_past)]), 4)
    assert idx[0] == 1
    just_short = math.pi / 4 - 1e-9
    idx = sector_decision(np.array([math.cos(just_short)]), np.array([math.sin(just_short)]), 4)
    assert idx[0] == 0


def test_check_shortage_extremes():
    params = make_params(p_r=0.0)
    realization = ChannelRealization(
        amplitudes=(np.array([1.0]),), profile=make_profile("ideal", 1)
    )
    assert not check_shortage(realization, params, 80.0).shorted
    always = make_params(phi=1.0, p_r=1e-6)
    event = check_shortage(realization, always, 80.0)
    assert event.shorted and event.harvested == 0.0


def test_demodulate_frame_identity():
    params = make_params(m=8, phi=0.8)
    rng = np.random.default_rng(3)
    for _ in range(10):
        s0 = int(rng.integers(0, 4))
        s = rng.integers(0, 8, size=4)
        rx, _, realization = noiseless_rx(params, s0=s0, s=s)
        bits, shortage = demodulate_frame(
            rx, walsh(4), constellation(8), params, realization
        )
        expected = symbols_to_bits(FrameSymbols(s0=s0, s=s), params)
        assert np.array_equal(bits, expected)
        assert not shortage.shorted


def test_demodulate_shorted_frame_still_decodes():
    params = make_params(phi=0.5, lam=0.0, p_r=1.0)
    rx, _, realization = noiseless_rx(params, s0=1, s=[0, 1, 2, 3])
    bits, shortage = demodulate_frame(rx, walsh(4), constellation(4), params, realization)
    assert shortage.shorted
    expected = symbols_to_bits(FrameSymbols(s0=1, s=np.array([0, 1, 2, 3])), params)
    assert np.array_equal(bits, expected)


def test_rotational_symmetry_of_data_ber():
    params = make_params(nt=2, ebn0=12.0)
    profile = make_profile("table1", 2)
    errors = {}
    for offset in (0, 1):
        def symbols(f, rng, offset=offset):
            s0 = rng.integers(0, 4, size=f)
            s = (rng.integers(0, 4, size=(f, 4)) + offset) % 4
            return s0, s

        rec = simulate_frames(params, profile, frames=6000, seed=77, symbols=symbols)
        errors[offset] = np.mean(rec["s_hat"] != rec["s"])
    p = (errors[0] + errors[1]) / 2
    se = math.sqrt(2 * p * (1 - p) / (6000 * 4))
    assert abs(errors[0] - errors[1]) <= 3 * se


def test_high_snr_frame_error_rate():
    params = make_params(nt=2, ebn0=30.0)
    profile = make_profile("table1", 2)
    rec = simulate_frames(params, profile, frames=10_000, seed=5)
    frame_errors = np.mean(
        (rec["s0_hat"] != rec["s0"]) | np.any(rec["s_hat"] != rec["s"], axis=1)
    )
    assert frame_errors < 1e-2
