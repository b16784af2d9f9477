"""Discrete affine Fourier transform pair and chirp-periodic prefix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChirpParams


def _quadratic_phase(coef: float, N: int) -> np.ndarray:
    """exp(i*2*pi*coef*k^2) for k = 0..N-1, phase reduced modulo one first."""
    k = np.arange(N, dtype=np.float64)
    return np.exp(2j * np.pi * np.mod(coef * k * k, 1.0))


def _check_len(v: np.ndarray, N: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[-1] != N:
        raise ValueError(f"expected length {N} along the last axis, got {v.shape[-1]}")
    return v


@dataclass(frozen=True, eq=False)
class TimeFrame:
    s: np.ndarray
    params: ChirpParams


@dataclass(frozen=True, eq=False)
class CppFrame:
    body: np.ndarray
    prefix: np.ndarray
    params: ChirpParams

    @property
    def M(self) -> int:
        return int(self.prefix.size)

    def samples(self) -> np.ndarray:
        """Transmitted order: prefix then body."""
        return np.concatenate([self.prefix, self.body])


def idaft(x: np.ndarray, params: ChirpParams) -> TimeFrame:
    """Modulate DAFT-domain symbols onto N chirps.

    s[n] = N^-1/2 sum_m x[m] exp(i2pi(c2 m^2 + m n / N + c1 n^2)), computed
    as chirp, inverse DFT, chirp. Works along the last axis.
    """
    N = params.N
    x = _check_len(x, N)
    s = _quadratic_phase(params.c1, N) * np.fft.ifft(x * _quadratic_phase(params.c2, N), norm="ortho")
    return TimeFrame(s, params)


def daft(r: np.ndarray, params: ChirpParams) -> np.ndarray:
    """Exact inverse of :func:`idaft` (unitary)."""
    N = params.N
    r = _check_len(r, N)
    return np.conj(_quadratic_phase(params.c2, N)) * np.fft.fft(
        r * np.conj(_quadratic_phase(params.c1, N)), norm="ortho")


def idaft_matrix(params: ChirpParams) -> np.ndarray:
    """Dense N x N modulation matrix, direct evaluation of the defining sum."""
    N = params.N
    n = np.arange(N, dtype=np.float64)[:, None]
    m = np.arange(N, dtype=np.float64)[None, :]
    phase = params.c2 * m * m + m * n / N + params.c1 * n * n
    return np.exp(2j * np.pi * np.mod(phase, 1.0)) / np.sqrt(N)


def cpp_phase(params: ChirpParams, M: int) -> np.ndarray:
    """exp(-i2pi c1 (N^2 + 2 N n)) for n = -M..-1."""
    N = params.N
    n = np.arange(-M, 0, dtype=np.float64)
    return np.exp(-2j * np.pi * np.mod(params.c1 * (N * N + 2.0 * N * n), 1.0))


def add_cpp(frame: TimeFrame, M: int) -> CppFrame:
    """Prepend M chirp-periodic prefix samples s[N+n] exp(-i2pi c1 (N^2 + 2Nn))."""
    N = frame.params.N
    if not 0 < M < N:
        raise ValueError(f"CPP length must satisfy 0 < M < N, got M={M}")
    prefix = frame.s[N - M:] * cpp_phase(frame.params, M)
    return CppFrame(frame.s.copy(), prefix, frame.params)


def remove_cpp(cpp: CppFrame) -> TimeFrame:
    return TimeFrame(cpp.body.copy(), cpp.params)
