import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afdm_isac.frame import (InfeasibleOverheadError, InvalidPilotIndexError, assemble_frame,
                             build_layout, extract_pilot_slice, qpsk, scatter_pilot_slice)
from afdm_isac.params import ChirpParams, FrameConfig, table1

from oracles import FROZEN, enumerate_layout


def n64(m0=23, overhead=None):
    cfg = FrameConfig(64, k_f=1, l_max=4, k_max=1, m0=m0, overhead=overhead)
    return cfg, cfg.chirp_params()


def table1_layout(overhead="inherit"):
    sysc = table1()
    return build_layout(sysc.frame_config(overhead), sysc.chirp_params())


def test_table1_layout_sizes():
    lay = table1_layout()
    f = FROZEN["table1"]
    assert (lay.m0, lay.Q) == (f["m0"], f["Q"])
    assert lay.p_gi.size == f["p_gi"] and lay.d_gi.size == f["d_gi"]
    assert lay.d_data.size == f["d_data"]
    assert lay.boost == f["boost"]
    assert lay.overhead == pytest.approx(f["overhead"], abs=0)


def test_n64_layout_matches_enumeration():
    cfg, p = n64()
    assert p.c1 == 1 / 32 and p.C == 4
    lay = build_layout(cfg, p)
    assert lay.p_gi.tolist() == FROZEN["n64"]["p_gi"]
    assert lay.pilot_window.tolist() == FROZEN["n64"]["window"]
    assert lay.d_gi.size == 20
    ref = enumerate_layout(64, 1, 1, 4, 1 / 32, m0=23)
    assert lay.d_gi.tolist() == ref["d_gi"]
    assert lay.d_data.tolist() == ref["d_data"]


def test_overhead_below_minimum_is_infeasible():
    with pytest.raises(InfeasibleOverheadError):
        table1_layout(0.1)


@pytest.mark.parametrize("m0", [-1, 64, 100])
def test_invalid_pilot_index(m0):
    cfg, p = n64(m0=m0)
    with pytest.raises(InvalidPilotIndexError):
        build_layout(cfg, p)


def test_wrapped_window_is_modular():
    cfg, p = n64(m0=3)
    lay = build_layout(cfg, p)
    assert lay.pilot_window[0] == (3 - 18) % 64
    assert np.all(np.diff(lay.pilot_window) % 64 == 1)
    ref = enumerate_layout(64, 1, 1, 4, 1 / 32, m0=3)
    assert lay.pilot_window.tolist() == ref["window"]
    assert lay.d_gi.tolist() == ref["d_gi"]


def test_extra_overhead_widens_guard_and_doubles_boost():
    cfg, p = n64()
    base = build_layout(cfg, p)
    # the N=64 minimum has 40 nulls; doubling needs 80 > 63, so use a larger frame
    big = FrameConfig(256, k_f=1, l_max=4, k_max=1)
    bp = ChirpParams(256, 2 * 2 / 512)
    lo = build_layout(big, bp)
    hi = build_layout(FrameConfig(256, k_f=1, l_max=4, k_max=1, overhead=(2 * lo.boost + 1) / 256), bp)
    assert hi.boost == 2 * lo.boost
    assert np.array_equal(hi.pilot_window, lo.pilot_window)
    assert set(lo.d_gi) <= set(hi.d_gi)
    assert base.boost == 40


@st.composite
def configs(draw):
    N = draw(st.sampled_from([16, 32, 64, 128, 256]))
    k_f = draw(st.integers(0, 3))
    k_max = draw(st.integers(0, 3))
    l_max = draw(st.integers(0, 6))
    W = k_f + k_max
    cfg = FrameConfig(N, k_f=k_f, l_max=l_max, k_max=k_max)
    p = cfg.chirp_params()
    D = int(round(p.C * l_max))
    if 2 * (2 * W + D) + 1 > N or W == 0:
        return None
    m0 = draw(st.integers(0, N - 1))
    extra = draw(st.integers(0, N - 1 - 2 * (2 * W + D)))
    ov = None if extra == 0 else (2 * (2 * W + D) + extra + 1) / N
    return FrameConfig(N, k_f=k_f, l_max=l_max, k_max=k_max, m0=m0, overhead=ov), p


@settings(max_examples=150, deadline=None)
@given(configs())
def test_partition_and_pilot_rule(cp):
    if cp is None:
        return
    cfg, p = cp
    lay = build_layout(cfg, p)
    sets = [np.array([lay.m0]), lay.p_gi, lay.d_gi, lay.d_data]
    allidx = np.concatenate(sets)
    assert np.array_equal(np.sort(allidx), np.arange(cfg.N))
    assert lay.boost == lay.p_gi.size + lay.d_gi.size
    assert lay.overhead == (lay.boost + 1) / cfg.N
    ref = enumerate_layout(cfg.N, cfg.k_f, cfg.k_max, cfg.l_max, p.c1, m0=lay.m0,
                           extra_nulls=lay.d_gi.size - lay.p_gi.size)
    assert lay.pilot_window.tolist() == ref["window"]
    assert lay.d_gi.tolist() == ref["d_gi"]


def test_minimum_guard_equal_lengths():
    lay = table1_layout()
    assert lay.d_gi.size == lay.p_gi.size


def test_echo_containment_exhaustive_n64():
    cfg, p = n64()
    lay = build_layout(cfg, p)
    W = cfg.doppler_span
    protected = set(lay.pilot_window.tolist())
    for mp in lay.d_data:
        for l in range(cfg.l_max + 1):
            lo = mp - W - int(p.C * l)
            span = {(lo + j) % 64 for j in range(mp + W - lo + 1)}
            assert not span & protected, (mp, l)


def test_assemble_frame_pilot_and_nulls(rng):
    lay = table1_layout()
    data = qpsk(lay.d_data.size, rng)
    fr = assemble_frame(lay, data)
    x = fr.x
    assert x[lay.m0] == pytest.approx(np.sqrt(588))
    assert np.all(x[lay.p_gi] == 0) and np.all(x[lay.d_gi] == 0)
    assert np.allclose(x[lay.d_data], data)
    assert np.sum(np.abs(x) ** 2) / 2048 == pytest.approx((1459 + 588) / 2048)
    assert np.sum(np.abs(x) ** 2) / 2048 == pytest.approx(1.0, abs=1e-3)


def test_pilot_only_frame_has_one_nonzero():
    lay = table1_layout()
    fr = assemble_frame(lay, np.zeros(lay.d_data.size))
    nz = np.flatnonzero(fr.x)
    assert nz.tolist() == [lay.m0]
    assert abs(fr.x[lay.m0]) == pytest.approx(np.sqrt(lay.boost))


def test_assemble_frame_wrong_length():
    lay = table1_layout()
    with pytest.raises(ValueError):
        assemble_frame(lay, np.ones(3))


def test_qpsk_constellation(rng):
    s = qpsk(40000, rng)
    assert np.allclose(np.abs(s), 1.0)
    pts, counts = np.unique(np.round(s * np.sqrt(2)), return_counts=True)
    assert len(pts) == 4
    assert np.all(np.abs(counts / 40000 - 0.25) < 0.01)


def test_extract_pilot_slice_examples():
    lay = table1_layout()
    y = extract_pilot_slice(np.ones(2048), lay)
    assert y.shape == (295,) and np.all(y == 1)
    cfg, p = n64()
    small = build_layout(cfg, p)
    assert extract_pilot_slice(np.zeros(64), small).size == 21
    l_eq = 2 + 4 * 3
    yt = np.zeros(64, complex)
    yt[(small.m0 - l_eq) % 64] = 3 - 1j
    yp = extract_pilot_slice(yt, small)
    pos = np.flatnonzero(yp)
    assert pos.tolist() == [small.pilot_window.tolist().index((small.m0 - l_eq) % 64)]
    assert np.array_equal(scatter_pilot_slice(yp, small), yt)
