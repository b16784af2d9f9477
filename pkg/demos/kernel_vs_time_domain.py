"""The DAFT-domain channel operator against the time-domain channel.

For a handful of fractional delay/Doppler pairs on the N=64 toy frame,
builds H(tau, f) from the kernel and compares H x with the DAFT of the
analytically delayed received samples. Also shows what goes wrong when
the wrap phase is indexed by the received row instead of the column.

    python3 demos/kernel_vs_time_domain.py
"""
import numpy as np

from afdm_isac.channel import Scene, Target, apply_channel, split_shift
from afdm_isac.chirp_time import segment
from afdm_isac.daft import daft
from afdm_isac.frame import assemble_frame, build_layout
from afdm_isac.params import small
from afdm_isac.sensing import build_H


def row_indexed_H(l, k, p):
    # same kernel, but the segment index follows the row m
    N = p.N
    _, iota = split_shift(l)
    l_eq = k + p.C * l
    n = np.arange(N)
    u = np.mod(n - l, N)
    H = np.empty((N, N), complex)
    for m in range(N):
        q = segment(m, u, p)
        mp = np.arange(N)[:, None]
        F = np.exp(2j * np.pi * (n[None, :] * (mp - m - l_eq) / N + iota * q[None, :])).sum(axis=1)
        ph = p.c1 * l * l - p.c2 * (m * m - mp[:, 0] ** 2) - l * mp[:, 0] / N
        H[m] = np.exp(2j * np.pi * ph) * F / N
    return H


def main():
    sysc = small()
    p = sysc.chirp_params()
    lay = build_layout(sysc.frame_config(), p)
    rng = np.random.default_rng(0)
    fr = assemble_frame(lay, rng=rng)

    print(f"{'delay':>6} {'Doppler':>8} {'column index':>13} {'row index':>10}")
    for l, k in [(1.0, 0.0), (2.37, 0.41), (0.5, -0.8), (3.9, 0.95)]:
        y = daft(apply_channel(fr, Scene([Target(1.0, l * p.delta_t, k / p.T)]), p, sysc.M), p)
        good = build_H(l * p.delta_t, k / p.T, p) @ fr.x
        bad = row_indexed_H(l, k, p) @ fr.x
        e1 = np.linalg.norm(good - y) / np.linalg.norm(y)
        e2 = np.linalg.norm(bad - y) / np.linalg.norm(y)
        print(f"{l:6.2f} {k:8.2f} {e1:13.2e} {e2:10.2e}")


if __name__ == "__main__":
    main()
