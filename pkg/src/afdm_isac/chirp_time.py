"""Continuous-time AFDM signal with frequency-wrapped chirps.

Chirp ``m`` has instantaneous frequency ``2 c1' t + m/T - q/dt`` on the
segment ``[t_{m,q}, t_{m,q+1})``; every wrap drops the frequency by the
sampling rate so it stays inside ``[0, 1/dt)``. Times are in seconds, phases
in cycles.
"""
from __future__ import annotations

import numpy as np

from .params import ChirpParams

# evaluation chunk: time points per block of the (time x chirp) phase matrix
_CHUNK = 1 << 20

# tolerance (in wraps) so that a time exactly on a breakpoint lands in the later segment
_EDGE = 1e-9


def breakpoints(m: int, params: ChirpParams) -> np.ndarray:
    """Segment start times t_{m,q} (s) inside [0, T), q = 0, 1, ..."""
    N, dt = params.N, params.delta_t
    C = params.C
    qmax = int(np.ceil(C)) + 1
    q = np.arange(1, qmax + 1)
    t = (N - m) / (2 * N * params.c1) * dt + (q - 1) / (2 * params.c1) * dt
    t = t[t < params.T * (1 - 1e-12)]
    return np.concatenate([[0.0], t])


def sample_breakpoints(m: int, params: ChirpParams) -> np.ndarray:
    """n_{m,q} = floor(t_{m,q} / dt)."""
    return np.floor(breakpoints(m, params) / params.delta_t + 1e-9).astype(int)


def segment(m, u, params: ChirpParams) -> np.ndarray:
    """Segment index q of chirp(s) ``m`` at normalized time(s) ``u = t/dt`` in [0, N)."""
    val = (params.C * np.asarray(u, dtype=np.float64) + np.asarray(m, dtype=np.float64)) / params.N
    return np.maximum(np.floor(val + _EDGE), 0.0)


def _check_domain(t: np.ndarray, lo: float, hi: float) -> None:
    if np.any(t < lo) or np.any(t >= hi):
        raise ValueError(f"time outside [{lo}, {hi})")


def phi(m, t, params: ChirpParams):
    """Instantaneous phase Phi_m(t) in cycles, 0 <= t < T.

    Phi_m(t) = c1' t^2 + (m/T) t - (q/dt) t with q the active segment.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    _check_domain(t_arr, 0.0, params.T)
    u = t_arr / params.delta_t
    m_arr = np.asarray(m, dtype=np.float64)
    q = segment(m_arr, u, params)
    out = params.c1 * u * u + m_arr * u / params.N - q * u
    return out if out.ndim else float(out)


def _phase_mod1(m: np.ndarray, u: np.ndarray, params: ChirpParams) -> np.ndarray:
    """(c2 m^2 + Phi_m(u dt)) mod 1 on the outer grid u x m."""
    u = u[:, None]
    q = segment(m[None, :], u, params)
    ph = (np.mod(params.c2 * m * m, 1.0)[None, :]
          + np.mod(params.c1 * u * u, 1.0)
          + np.mod(m[None, :] * u / params.N - q * u, 1.0))
    return np.mod(ph, 1.0)


def _sum_chirps(u: np.ndarray, x: np.ndarray, params: ChirpParams) -> np.ndarray:
    idx = np.flatnonzero(x)
    out = np.zeros(u.size, dtype=np.complex128)
    if idx.size == 0:
        return out
    m = idx.astype(np.float64)
    coef = x[idx]
    step = max(1, _CHUNK // idx.size)
    for lo in range(0, u.size, step):
        ph = _phase_mod1(m, u[lo:lo + step], params)
        out[lo:lo + step] = np.exp(2j * np.pi * ph) @ coef
    return out / np.sqrt(params.T)


def eval_s(t, x: np.ndarray, params: ChirpParams):
    """s(t) = T^-1/2 sum_m x[m] exp(i2pi(c2 m^2 + Phi_m(t))) for 0 <= t < T."""
    t_arr = np.asarray(t, dtype=np.float64)
    _check_domain(t_arr, 0.0, params.T)
    x = np.asarray(x, dtype=np.complex128)
    out = _sum_chirps(t_arr.ravel() / params.delta_t, x, params).reshape(t_arr.shape)
    return out if out.ndim else complex(out)


def eval_s_cpp(t, x: np.ndarray, params: ChirpParams, M: int):
    """Chirp-periodic extension of s(t) to [-M dt, T).

    For t < 0 the value is s(t + T) exp(-i2pi c1' (T^2 + 2 T t)).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    _check_domain(t_arr, -M * params.delta_t * (1 + 1e-12), params.T)
    x = np.asarray(x, dtype=np.complex128)
    u = t_arr.ravel() / params.delta_t
    neg = u < 0
    u_wrapped = np.where(neg, u + params.N, u)
    # guard against u + N rounding up to exactly N
    u_wrapped = np.minimum(u_wrapped, np.nextafter(float(params.N), 0.0))
    out = _sum_chirps(u_wrapped, x, params)
    if np.any(neg):
        N = params.N
        ph = np.mod(params.c1 * (N * N + 2.0 * N * u[neg]), 1.0)
        out[neg] *= np.exp(-2j * np.pi * ph)
    out = out.reshape(t_arr.shape)
    return out if out.ndim else complex(out)


def instantaneous_frequency(m: int, t, params: ChirpParams):
    """Analytic instantaneous frequency (Hz) of chirp m, in [0, 1/dt)."""
    t_arr = np.asarray(t, dtype=np.float64)
    u = t_arr / params.delta_t
    q = segment(m, u, params)
    return (2 * params.c1 * u + m / params.N - q) / params.delta_t
