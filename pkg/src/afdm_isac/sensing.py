"""Approximate-ML delay/Doppler estimation from a known AFDM frame.

Two independent routes compute the same matched-filter statistic
``|x^H H^H(tau, f) y|^2``:

* the DAFT-domain operator ``H`` built column by column from the kernel
  ``F(m, m')`` (:func:`build_H`, :func:`metric`);
* a time-domain correlation against the delayed, Doppler-shifted replica of
  the frame (:func:`delayed_replica`, :func:`metric_surface`), which shares
  one replica across all Doppler hypotheses and drives :func:`estimate`.

The fractional-delay phase in ``F`` follows the chirp segment of the
*transmitted* (column) index ``m'``; indexing it by the received row index
does not reproduce the time-domain channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import split_shift
from .chirp_time import _EDGE, segment
from .daft import _quadratic_phase, idaft
from .frame import FrameLayout, scatter_pilot_slice
from .params import SPEED_OF_LIGHT, ChirpParams

MODES = ("full", "pilot")

# frames with at most this many active chirps use the direct replica sum
_SPARSE_LIMIT = 32


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Search region and steps, in samples (delay) and bins (Doppler).

    The coarse stage uses unit steps over ``[0, l_max] x [-k_max, k_max]``;
    each selected peak is refined over ``+-window`` coarse bins with steps
    ``delta_tau`` and ``delta_f``.
    """

    l_max: int
    k_max: int
    delta_tau: float = 1.0
    delta_f: float = 1.0
    window: int = 1

    def __post_init__(self):
        for name in ("delta_tau", "delta_f"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    def coarse_axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.arange(self.l_max + 1, dtype=np.float64),
                np.arange(-self.k_max, self.k_max + 1, dtype=np.float64))

    def fine_axes(self, l: float, k: float) -> tuple[np.ndarray, np.ndarray]:
        return (_local_axis(l, self.delta_tau, self.window, 0.0, self.l_max),
                _local_axis(k, self.delta_f, self.window, -self.k_max, self.k_max))

    def to_dict(self) -> dict:
        return {"l_max": self.l_max, "k_max": self.k_max, "delta_tau": self.delta_tau,
                "delta_f": self.delta_f, "window": self.window}


def _local_axis(center: float, step: float, window: int, lo: float, hi: float) -> np.ndarray:
    J = int(np.floor(window / step + 1e-9))
    axis = np.round(center + step * np.arange(-J, J + 1), 12)
    return axis[(axis >= lo - 1e-12) & (axis <= hi + 1e-12)]


@dataclass
class SensingEstimate:
    """Per-target delay (s), Doppler (Hz) and metric, strongest first."""

    tau: np.ndarray
    f: np.ndarray
    metric: np.ndarray
    params: ChirpParams
    grid: GridSpec
    degraded: bool = False
    coarse: list = field(default_factory=list)

    @property
    def P(self) -> int:
        return int(self.tau.size)

    @property
    def delay_samples(self) -> np.ndarray:
        return self.tau / self.params.delta_t

    @property
    def doppler_bins(self) -> np.ndarray:
        return self.f * self.params.T

    def to_dict(self, carrier_hz: float | None = None) -> dict:
        targets = []
        rv = to_range_velocity(self, carrier_hz) if carrier_hz else None
        for i in range(self.P):
            d = {"tau_s": float(self.tau[i]), "f_hz": float(self.f[i]), "metric": float(self.metric[i])}
            if rv is not None:
                d["range_m"] = float(rv[0][i])
                d["velocity_mps"] = float(rv[1][i])
            targets.append(d)
        return {"targets": targets, "degraded": self.degraded, "grid": self.grid.to_dict()}


def to_range_velocity(est: SensingEstimate, f_c: float) -> tuple[np.ndarray, np.ndarray]:
    """Range c*tau/2 (m) and radial velocity c*f/(2 f_c) (m/s)."""
    if f_c <= 0:
        raise ValueError("carrier frequency must be positive")
    return SPEED_OF_LIGHT * est.tau / 2.0, SPEED_OF_LIGHT * est.f / (2.0 * f_c)


# ---------------------------------------------------------------- kernel route

def _normalized(tau: float, f: float, params: ChirpParams) -> tuple[float, float]:
    return tau / params.delta_t, f * params.T


def _check_bounds(tau_n: float, nu: float, bounds) -> None:
    if bounds is None:
        return
    l_max, k_max = bounds
    if not (-1e-9 <= tau_n <= l_max + 1e-9 and abs(nu) <= k_max + 1e-9):
        raise BoundsError(f"(delay {tau_n}, Doppler {nu}) outside [0, {l_max}] x [-{k_max}, {k_max}]")


def _column_kernel(m_prime: np.ndarray, tau_n: float, nu: float, params: ChirpParams) -> np.ndarray:
    """F(:, m') for each requested column, shape (N, len(m_prime)), via one FFT per column."""
    N = params.N
    n = np.arange(N, dtype=np.float64)
    _, iota = split_shift(tau_n)
    l_eq = nu + params.C * tau_n
    u = np.mod(n - tau_n, N)
    mp = np.asarray(m_prime, dtype=np.float64)[None, :]
    q = segment(mp, u[:, None], params)
    g = np.exp(2j * np.pi * np.mod(n[:, None] * (mp - l_eq) / N + iota * q, 1.0))
    return np.fft.fft(g, axis=0)


def kernel_F(m: int, m_prime: int, tau: float, f: float, params: ChirpParams) -> complex:
    """Kernel F(m, m') for a path of delay ``tau`` (s) and Doppler ``f`` (Hz).

    Sum over n of exp(i2pi n (m' - m - l_eq)/N) * exp(i2pi iota q_{m'}((n - l - iota) mod N)).
    For zero fractional delay the sum is a Dirichlet kernel in closed form.
    """
    N = params.N
    tau_n, nu = _normalized(tau, f, params)
    _, iota = split_shift(tau_n)
    l_eq = nu + params.C * tau_n
    delta = m_prime - m - l_eq
    if iota == 0.0:
        frac = np.mod(delta, N)
        if min(frac, N - frac) < 1e-12:
            return complex(N)
        return complex((np.exp(2j * np.pi * delta) - 1) / (np.exp(2j * np.pi * delta / N) - 1))
    n = np.arange(N, dtype=np.float64)
    q = segment(m_prime, np.mod(n - tau_n, N), params)
    return complex(np.sum(np.exp(2j * np.pi * np.mod(n * delta / N + iota * q, 1.0))))


def _prefactor(rows: np.ndarray, cols: np.ndarray, tau_n: float, params: ChirpParams) -> np.ndarray:
    N, c1, c2 = params.N, params.c1, params.c2
    r = rows.astype(np.float64)[:, None]
    c = cols.astype(np.float64)[None, :]
    ph = c1 * tau_n * tau_n - c2 * (r * r - c * c) - tau_n * c / N
    return np.exp(2j * np.pi * np.mod(ph, 1.0)) / N


def build_H(tau: float, f: float, params: ChirpParams, mode: str = "full",
            layout: FrameLayout | None = None, bounds=None) -> np.ndarray:
    """DAFT-domain channel matrix of a unit-gain path.

    ``mode="full"`` returns the N x N operator. ``mode="pilot"`` returns the
    Q x 1 column of the pilot ``m0`` restricted to the pilot window.
    """
    tau_n, nu = _normalized(tau, f, params)
    _check_bounds(tau_n, nu, bounds)
    N = params.N
    if mode == "full":
        rows = cols = np.arange(N)
        F = _column_kernel(cols, tau_n, nu, params)
    elif mode == "pilot":
        if layout is None:
            raise ValueError("pilot mode needs the frame layout")
        rows, cols = layout.pilot_window, np.array([layout.m0])
        F = _column_kernel(cols, tau_n, nu, params)[rows]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _prefactor(rows, cols, tau_n, params) * F


def metric(y: np.ndarray, x: np.ndarray, tau: float, f: float, params: ChirpParams,
           mode: str = "full", layout: FrameLayout | None = None) -> float:
    """|x^H H^H(tau, f) y|^2 with H from :func:`build_H`.

    In pilot mode ``y`` is the pilot-window slice and only ``x[m0]`` enters.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    H = build_H(tau, f, params, mode, layout)
    if mode == "full":
        if y.shape != (params.N,) or x.shape != (params.N,):
            raise ValueError("full mode expects length-N y and x")
        return float(abs(np.vdot(H @ x, y)) ** 2)
    if y.shape != (layout.Q,):
        raise ValueError(f"pilot mode expects y of length {layout.Q}, got {y.shape}")
    return float(abs(np.conj(x[layout.m0]) * np.vdot(H[:, 0], y)) ** 2)


# ---------------------------------------------------------- correlation route

@lru_cache(maxsize=4)
def _dft_matrix(N: int) -> np.ndarray:
    n = np.arange(N)
    return np.exp(2j * np.pi * np.outer(n, n) / N)


def delayed_replica(x: np.ndarray, tau_n: float, params: ChirpParams) -> np.ndarray:
    """sqrt(dt) * s_cpp((n - tau_n) dt) for n = 0..N-1, delay given in samples.

    Integer delays reduce to a chirp-weighted circular shift. Fractional
    delays split each sample's chirp sum at the one index where the chirps'
    wrap counts step up, so the dense case costs one masked N x N product.
    """
    N = params.N
    x = np.asarray(x, dtype=np.complex128)
    n = np.arange(N, dtype=np.float64)
    u = n - tau_n
    quad = np.exp(2j * np.pi * np.mod(params.c1 * u * u, 1.0))
    xp = x * _quadratic_phase(params.c2, N)
    l, iota = split_shift(tau_n)
    if iota == 0.0:
        return quad * np.roll(np.fft.ifft(xp, norm="ortho"), l)

    u_w = np.mod(u, N)
    active = np.flatnonzero(xp)
    if active.size <= _SPARSE_LIMIT:
        m = active.astype(np.float64)[None, :]
        q = segment(m, u_w[:, None], params)
        ph = np.mod(m * u[:, None] / N + iota * q, 1.0)
        return quad * (np.exp(2j * np.pi * ph) @ xp[active]) / np.sqrt(N)

    C = params.C
    q0 = np.floor(C * u_w / N + _EDGE)
    threshold = np.ceil(N * (q0 + 1 - _EDGE) - C * u_w).astype(np.int64)
    b = xp * np.exp(-2j * np.pi * np.mod(np.arange(N) * tau_n / N, 1.0))
    W = _dft_matrix(N)
    full = W @ b
    mask = np.arange(N)[None, :] >= threshold[:, None]
    tail = np.where(mask, W, 0.0) @ b
    core = full + (np.exp(2j * np.pi * iota) - 1.0) * tail
    return quad * np.exp(2j * np.pi * np.mod(iota * q0, 1.0)) * core / np.sqrt(N)


def _observation(y: np.ndarray, x: np.ndarray, params: ChirpParams, mode: str,
                 layout: FrameLayout | None) -> tuple[np.ndarray, np.ndarray]:
    """Time-domain observation and the frame whose echo is matched."""
    y = np.asarray(y, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if mode == "full":
        if y.shape != (params.N,):
            raise ValueError(f"full mode expects y of length {params.N}, got {y.shape}")
        return idaft(y, params).s, x
    if mode == "pilot":
        if layout is None:
            raise ValueError("pilot mode needs the frame layout")
        if y.shape != (layout.Q,):
            raise ValueError(f"pilot mode expects y of length {layout.Q}, got {y.shape}")
        xp = np.zeros(params.N, dtype=np.complex128)
        xp[layout.m0] = x[layout.m0]
        return idaft(scatter_pilot_slice(y, layout), params).s, xp
    raise ValueError(f"unknown mode {mode!r}")


def _surface(y_time: np.ndarray, x_eff: np.ndarray, taus: np.ndarray, nus: np.ndarray,
             params: ChirpParams) -> np.ndarray:
    N = params.N
    n = np.arange(N, dtype=np.float64)
    steer = np.exp(2j * np.pi * np.mod(np.outer(n, nus) / N, 1.0))
    Z = np.empty((taus.size, N), dtype=np.complex128)
    for i, tau_n in enumerate(taus):
        Z[i] = np.conj(delayed_replica(x_eff, float(tau_n), params)) * y_time
    return np.abs(Z @ steer) ** 2


def metric_surface(y: np.ndarray, x: np.ndarray, taus: np.ndarray, nus: np.ndarray,
                   params: ChirpParams, mode: str = "full",
                   layout: FrameLayout | None = None) -> np.ndarray:
    """Metric on the grid ``taus`` (samples) x ``nus`` (bins), via time-domain correlation."""
    y_time, x_eff = _observation(y, x, params, mode, layout)
    return _surface(y_time, x_eff, np.atleast_1d(np.asarray(taus, float)),
                    np.atleast_1d(np.asarray(nus, float)), params)


def _pick_peaks(surface: np.ndarray, P: int, guard: int) -> tuple[list[tuple[int, int]], bool]:
    work = surface.copy()
    picked: list[tuple[int, int]] = []
    degraded = False
    for _ in range(P):
        if not np.isfinite(work).any():
            degraded = True
            # best effort: strongest cell not yet chosen, ignoring exclusion
            rest = surface.copy()
            for i, j in picked:
                rest[i, j] = -np.inf
            work = rest
        i, j = np.unravel_index(int(np.argmax(work)), work.shape)
        picked.append((int(i), int(j)))
        work[max(0, i - guard):i + guard + 1, max(0, j - guard):j + guard + 1] = -np.inf
    return picked, degraded


def estimate(y: np.ndarray, x: np.ndarray, grid: GridSpec, P: int, params: ChirpParams,
             mode: str = "full", layout: FrameLayout | None = None) -> SensingEstimate:
    """Coarse-then-fine grid search for the P strongest paths.

    Stage one evaluates the metric on the integer grid and keeps the P
    highest cells, each excluding its +-1 neighbourhood. Stage two searches
    +-``grid.window`` bins around every kept cell with the fine steps. Ties
    resolve toward smaller delay, then smaller Doppler.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    y_time, x_eff = _observation(y, x, params, mode, layout)
    taus, nus = grid.coarse_axes()
    coarse = _surface(y_time, x_eff, taus, nus, params)
    peaks, degraded = _pick_peaks(coarse, P, 1)

    tau_hat, nu_hat, val = [], [], []
    for i, j in peaks:
        ft, fn = grid.fine_axes(taus[i], nus[j])
        s = _surface(y_time, x_eff, ft, fn, params)
        a, b = np.unravel_index(int(np.argmax(s)), s.shape)
        tau_hat.append(ft[a])
        nu_hat.append(fn[b])
        val.append(s[a, b])
    order = np.argsort(-np.asarray(val), kind="stable")
    tau_hat = np.asarray(tau_hat)[order]
    nu_hat = np.asarray(nu_hat)[order]
    return SensingEstimate(tau_hat * params.delta_t, nu_hat / params.T, np.asarray(val)[order],
                           params, grid, degraded, [peaks[k] for k in order])
