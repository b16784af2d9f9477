"""Independent reference computations and frozen values for the test-suite.

Nothing here imports the package's transform, layout or kernel code; each
oracle is written straight from the defining formulas.
"""
import numpy as np

C_LIGHT = 299_792_458.0

# values computed once by hand / by the enumeration below and frozen here
FROZEN = {
    "table1": {
        "N": 2048, "k_f": 4, "k_max": 3, "l_max": 20, "C": 14, "M": 20,
        "m0": 287, "Q": 295, "p_gi": 294, "d_gi": 294, "d_data": 1459, "boost": 588,
        "overhead": 589 / 2048,
        "throughput_bps": 43346692.45647969,
    },
    "desk": {"N": 1024, "l_max": 10, "k_max": 3, "Q": 155, "boost": 308, "d_data": 715, "M": 10},
    # N=64, k_f=1, k_max=1, l_max=4, c1=1/32, m0=23
    "n64": {"p_gi": list(range(5, 23)) + [24, 25], "window": list(range(5, 26))},
    "breakpoints_n64_m16": [12.0, 28.0, 44.0, 60.0],
    "range_0p65us_m": 97.43254885,
    "velocity_45khz_79ghz_mps": 85.3839279113924,
}


def idaft_direct(x, N, c1, c2):
    """s[n] = N^-1/2 sum_m x[m] exp(i2pi(c2 m^2 + m n / N + c1 n^2)), by explicit double sum."""
    n = np.arange(N)[:, None].astype(float)
    m = np.arange(N)[None, :].astype(float)
    # exact rational arithmetic would be nicer; reducing each term mod 1 is enough here
    ph = np.mod(c2 * m * m, 1.0) + np.mod(m * n / N, 1.0) + np.mod(c1 * n * n, 1.0)
    return (np.exp(2j * np.pi * ph) @ np.asarray(x, complex)) / np.sqrt(N)


def daft_direct(r, N, c1, c2):
    m = np.arange(N)[:, None].astype(float)
    n = np.arange(N)[None, :].astype(float)
    ph = np.mod(c2 * m * m, 1.0) + np.mod(m * n / N, 1.0) + np.mod(c1 * n * n, 1.0)
    return (np.exp(-2j * np.pi * ph) @ np.asarray(r, complex)) / np.sqrt(N)


def enumerate_layout(N, k_f, k_max, l_max, c1, m0=None, extra_nulls=0):
    """Guard sets from first principles by walking the index circle.

    Returns a dict with the window (in modular order), P_GI, D_GI, D_data.
    """
    W = k_f + k_max
    D = int(round(2 * N * c1 * l_max))
    if m0 is None:
        m0 = W + D
    window = []
    i = m0 - W - D
    while len(window) < 2 * W + D + 1:
        window.append(i % N)
        i += 1
    p_gi = sorted(set(window) - {m0})
    left_w = W + extra_nulls // 2
    right_w = W + D + (extra_nulls - extra_nulls // 2)
    left = [(m0 - W - D - 1 - j) % N for j in range(left_w)]
    right = [(m0 + W + 1 + j) % N for j in range(right_w)]
    d_gi = sorted(set(left) | set(right))
    taken = set(window) | set(d_gi)
    d_data = [m for m in range(N) if m not in taken]
    return {"m0": m0, "window": window, "p_gi": p_gi, "d_gi": d_gi, "d_data": d_data,
            "boost": len(p_gi) + len(d_gi)}


def table1_arithmetic():
    """Full-scale (table1 preset) frame numbers from plain arithmetic (no package code)."""
    N, bw, M, bits = 2048, 30.72e6, 20, 2
    dt = 1 / bw
    T = N * dt
    l_max = int(np.ceil(0.65e-6 / dt - 1e-9))
    k_max = int(np.ceil(T * 45e3 - 1e-9))
    k_f = 4
    c1 = 2 * (k_f + k_max) / (2 * N)
    lay = enumerate_layout(N, k_f, k_max, l_max, c1)
    rate = len(lay["d_data"]) * bits / ((N + M) * dt)
    return {"l_max": l_max, "k_max": k_max, "C": 2 * N * c1, "Q": len(lay["window"]),
            "p_gi": len(lay["p_gi"]), "d_gi": len(lay["d_gi"]), "d_data": len(lay["d_data"]),
            "boost": lay["boost"], "overhead": (lay["boost"] + 1) / N, "throughput_bps": rate}


def chirp_sample(m, u, N, c1):
    """exp(i2pi Phi_m(u dt)) for a single chirp from the piecewise phase law (u in samples)."""
    C = 2 * N * c1
    # segment index: number of breakpoints t_{m,q} = ((N - m) + (q - 1) N) / C at or before u
    q = 0
    while q < C and ((N - m) + q * N) / C <= u + 1e-12:
        q += 1
    phase = c1 * u * u + m * u / N - q * u
    return np.exp(2j * np.pi * phase)


def received_direct(x, taus, nus, gains, N, c1, c2, M):
    """sqrt(dt)-normalized r[n] of a multi-target channel, from the chirp definition.

    Delays and Dopplers are in samples and bins; unit sample period. The
    prefix rule continues each sample before t = 0 with the chirp-periodic law.
    """
    x = np.asarray(x, complex)
    r = np.zeros(N, complex)
    for tau, nu, h in zip(taus, nus, gains):
        for n in range(N):
            u = n - tau
            extra = 1.0
            if u < 0:
                extra = np.exp(-2j * np.pi * c1 * (N * N + 2 * N * u))
                u = u + N
            s = sum(x[m] * np.exp(2j * np.pi * c2 * m * m) * chirp_sample(m, u, N, c1)
                    for m in np.flatnonzero(x))
            r[n] += h * np.exp(-2j * np.pi * nu * n / N) * extra * s / np.sqrt(N)
    return r
