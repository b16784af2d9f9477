import json

import numpy as np
import pytest

from afdm_isac.channel import (DelayExceedsCppError, Scene, Target, add_noise, apply_channel,
                               apply_channel_interpolated, gen_scene, split_shift)
from afdm_isac.daft import add_cpp, daft, idaft
from afdm_isac.frame import assemble_frame, build_layout
from afdm_isac.params import small

from oracles import received_direct

SYS = small()
P = SYS.chirp_params()
DT, T, M = P.delta_t, P.T, SYS.M
LAYOUT = build_layout(SYS.frame_config(), P)


def qpsk_frame(rng):
    return assemble_frame(LAYOUT, rng=rng)


def one(h=1.0, l=0.0, k=0.0, h0=0.0):
    return Scene([Target(h, l * DT, k / T)], h0=h0)


def test_split_shift():
    assert split_shift(2.3) == (2, pytest.approx(0.3))
    assert split_shift(2.5) == (2, pytest.approx(0.5))
    assert split_shift(2.7) == (3, pytest.approx(-0.3))
    assert split_shift(-0.4) == (0, pytest.approx(-0.4))


def test_identity_channel(rng):
    fr = qpsk_frame(rng)
    r = apply_channel(fr, one(), P, M)
    assert np.max(np.abs(r - idaft(fr.x, P).s)) < 1e-12


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_integer_delay_is_cpp_shift(rng, l):
    fr = qpsk_frame(rng)
    ext = add_cpp(idaft(fr.x, P), M).samples()
    r = apply_channel(fr, one(0.7 - 0.2j, l), P, M)
    assert np.max(np.abs(r - (0.7 - 0.2j) * ext[M - l:M - l + 64])) < 1e-12


def test_cpp_absorbs_previous_frame(rng):
    # the receive window sees only this frame's CPP-extended samples, whatever came before
    fr = qpsk_frame(rng)
    stream = np.concatenate([rng.standard_normal(50) * 9, add_cpp(idaft(fr.x, P), M).samples()])
    start = 50 + M
    for l in range(M + 1):
        r = apply_channel(fr, one(1.0, l), P, M)
        assert np.max(np.abs(r - stream[start - l:start - l + 64])) < 1e-12


@pytest.mark.parametrize("l,k", [(0, 0), (1, -1), (3, 1), (4, 0), (2, -1)])
def test_integer_pilot_peak_position(l, k):
    fr = assemble_frame(LAYOUT, np.zeros(LAYOUT.d_data.size))
    h = 0.6 + 0.8j
    y = daft(apply_channel(fr, one(h, l, k), P, M), P)
    l_eq = k + int(P.C) * l
    peak = (LAYOUT.m0 - l_eq) % 64
    assert abs(abs(y[peak]) - abs(h) * abs(fr.pilot)) < 1e-10
    rest = np.delete(y, peak)
    assert np.max(np.abs(rest)) < 1e-10


def test_linearity_in_targets(rng):
    fr = qpsk_frame(rng)
    a = Target(0.3 + 0.1j, 1.37 * DT, 0.42 / T)
    b = Target(-0.5j, 3.81 * DT, -0.77 / T)
    both = apply_channel(fr, Scene([a, b], h0=2.0), P, M)
    parts = (apply_channel(fr, Scene([a]), P, M) + apply_channel(fr, Scene([b]), P, M)
             + apply_channel(fr, Scene([], h0=2.0), P, M))
    assert np.max(np.abs(both - parts)) < 1e-12
    assert np.max(np.abs(apply_channel(fr, Scene([a, b], h0=2.0), P, M, include_direct=False)
                         - both + 2.0 * idaft(fr.x, P).s)) < 1e-12


def test_matches_direct_oracle(rng):
    fr = qpsk_frame(rng)
    taus = [0.0, 1.5, 2.37, 3.99]
    nus = [0.3, -0.8, 1.0, 0.05]
    gains = [1.0, 0.5j, -0.3, 0.2 + 0.2j]
    scene = Scene([Target(g, t * DT, v / T) for t, v, g in zip(taus, nus, gains)])
    want = received_direct(fr.x, taus, nus, gains, 64, P.c1, P.c2, M)
    assert np.max(np.abs(apply_channel(fr, scene, P, M) - want)) < 1e-10


def test_interpolated_route_agrees_roughly(rng):
    # chirp wraps make s(t) not band-limited, so only loose agreement is expected
    fr = qpsk_frame(rng)
    scene = Scene([Target(1.0, 2.4 * DT, 0.3 / T)])
    exact = apply_channel(fr, scene, P, M)
    approx = apply_channel_interpolated(fr, scene, P, M)
    rel = np.linalg.norm(exact - approx) / np.linalg.norm(exact)
    assert rel < 0.2
    integer = Scene([Target(1.0, 2 * DT, 0.3 / T)])
    assert np.allclose(apply_channel(fr, integer, P, M), apply_channel_interpolated(fr, integer, P, M),
                       atol=1e-10)


def test_delay_beyond_cpp(rng):
    fr = qpsk_frame(rng)
    with pytest.raises(DelayExceedsCppError):
        apply_channel(fr, one(1.0, M + 0.5), P, M)
    with pytest.raises(DelayExceedsCppError):
        apply_channel(fr, one(1.0, -0.5), P, M)
    apply_channel(fr, one(1.0, M), P, M)


def test_noise_zero_power_is_identity(rng):
    r = rng.standard_normal(64) + 0j
    assert np.array_equal(add_noise(r, 0.0, rng), r)
    with pytest.raises(ValueError):
        add_noise(r, -1.0, rng)


def test_noise_variance_and_circularity():
    w = add_noise(np.zeros(10 ** 6, complex), 0.37, np.random.default_rng(3))
    assert np.mean(np.abs(w) ** 2) == pytest.approx(0.37, rel=0.01)
    assert abs(np.mean(w * w)) < 0.01 * 0.37
    assert np.var(w.real) == pytest.approx(np.var(w.imag), rel=0.02)


def test_noise_deterministic():
    r = np.ones(64, complex)
    a = add_noise(r, 0.1, np.random.default_rng(11))
    b = add_noise(r, 0.1, np.random.default_rng(11))
    assert np.array_equal(a, b)


def test_gen_scene_statistics():
    rng = np.random.default_rng(5)
    tau_max, f_max = 0.65e-6, 45e3
    taus, fs, hs = [], [], []
    for _ in range(10 ** 5 // 4):
        sc = gen_scene(4, tau_max, f_max, rng)
        taus += [t.tau for t in sc.targets]
        fs += [t.f for t in sc.targets]
        hs += [t.h for t in sc.targets]
    taus, fs, hs = map(np.asarray, (taus, fs, hs))
    assert np.all((taus >= 0) & (taus <= tau_max))
    assert np.all(np.abs(fs) <= f_max)
    assert np.mean(taus) == pytest.approx(tau_max / 2, rel=0.01)
    assert np.mean(np.abs(hs) ** 2) == pytest.approx(1.0, rel=0.02)
    with pytest.raises(ValueError):
        gen_scene(0, tau_max, f_max, rng)


def test_scene_json_roundtrip():
    sc = Scene([Target(0.1 - 2j, 3e-7, -1234.5)], h0=31.6 + 0j, N0=0.01)
    back = Scene.from_dict(json.loads(json.dumps(sc.to_dict())))
    assert back.targets == sc.targets
    assert back.h0 == sc.h0 and back.N0 == sc.N0
    assert sc.without_direct().h0 == 0


def test_normalized_shifts():
    t = Target(1.0, 2.3 * DT, -0.6 / T)
    d = t.normalized(P)
    assert (d["l"], d["k"]) == (2, -1)
    assert d["iota"] == pytest.approx(0.3) and d["kappa"] == pytest.approx(0.4)
    assert d["l_eq"] == pytest.approx(-0.6 + 4 * 2.3)
