"""Doubly dispersive point-target channel, noise and random scenes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chirp_time import eval_s, eval_s_cpp
from .frame import DaftFrame
from .params import ChirpParams


class DelayExceedsCppError(ValueError):
    pass


def split_shift(value: float) -> tuple[int, float]:
    """Split a normalized shift into integer part and fraction in (-1/2, 1/2]."""
    integer = math.ceil(value - 0.5)
    return int(integer), float(value - integer)


@dataclass(frozen=True)
class Target:
    """Point target: complex gain ``h``, delay ``tau`` (s) and Doppler ``f`` (Hz)."""

    h: complex
    tau: float
    f: float

    def delay_samples(self, params: ChirpParams) -> float:
        return self.tau / params.delta_t

    def doppler_bins(self, params: ChirpParams) -> float:
        return params.T * self.f

    def normalized(self, params: ChirpParams) -> dict:
        """Integer/fractional delay and Doppler plus the equivalent delay l_eq."""
        l, iota = split_shift(self.delay_samples(params))
        k, kappa = split_shift(self.doppler_bins(params))
        l_eq = (k + kappa) + params.C * (l + iota)
        return {"l": l, "iota": iota, "k": k, "kappa": kappa, "l_eq": l_eq}


@dataclass
class Scene:
    targets: list[Target]
    h0: complex = 0.0
    N0: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def P(self) -> int:
        return len(self.targets)

    def without_direct(self) -> "Scene":
        return Scene(list(self.targets), 0.0, self.N0, dict(self.meta))

    def to_dict(self) -> dict:
        return {
            "targets": [{"h_re": float(np.real(t.h)), "h_im": float(np.imag(t.h)),
                         "tau_s": float(t.tau), "f_hz": float(t.f)} for t in self.targets],
            "N0": float(self.N0),
            "h0": {"re": float(np.real(self.h0)), "im": float(np.imag(self.h0))},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        targets = [Target(complex(t["h_re"], t["h_im"]), t["tau_s"], t["f_hz"]) for t in d["targets"]]
        h0 = d.get("h0", 0.0)
        if isinstance(h0, dict):
            h0 = complex(h0["re"], h0["im"])
        return cls(targets, complex(h0), float(d.get("N0", 0.0)))


def _samples(x) -> np.ndarray:
    return x.x if isinstance(x, DaftFrame) else np.asarray(x, dtype=np.complex128)


def apply_channel(x, scene: Scene, params: ChirpParams, M: int, include_direct: bool = True) -> np.ndarray:
    """Noiseless received samples after CPP removal.

    r[n] = sqrt(dt) * (h0 s(n dt) + sum_i h_i exp(-i2pi f_i n dt) s_cpp(n dt - tau_i)),
    with s_cpp evaluated in closed form so fractional delays are exact.
    """
    xs = _samples(x)
    N, dt = params.N, params.delta_t
    t = np.arange(N) * dt
    r = np.zeros(N, dtype=np.complex128)
    for tgt in scene.targets:
        if tgt.tau > M * dt * (1 + 1e-12) or tgt.tau < 0:
            raise DelayExceedsCppError(f"delay {tgt.tau} s outside [0, M*dt] with M={M}")
        doppler = np.exp(-2j * np.pi * np.mod(tgt.f * t, 1.0))
        r += tgt.h * doppler * eval_s_cpp(t - tgt.tau, xs, params, M)
    if include_direct and scene.h0 != 0:
        r += scene.h0 * eval_s(t, xs, params)
    return np.sqrt(dt) * r


def add_noise(r: np.ndarray, N0: float, rng: np.random.Generator) -> np.ndarray:
    """Add circularly symmetric Gaussian noise of variance N0 per complex sample."""
    if N0 < 0:
        raise ValueError("noise power must be non-negative")
    w = rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)
    if N0 == 0:
        return np.array(r, dtype=np.complex128, copy=True)
    return r + np.sqrt(N0 / 2.0) * w


def gen_scene(P: int, tau_max: float, f_max: float, rng: np.random.Generator,
              h0: complex = 0.0, N0: float = 0.0) -> Scene:
    """P targets with uniform delay/Doppler and standard complex Gaussian gains."""
    if P < 1:
        raise ValueError("need at least one target")
    tau = rng.uniform(0.0, tau_max, P)
    f = rng.uniform(-f_max, f_max, P)
    h = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) / np.sqrt(2.0)
    return Scene([Target(complex(h[i]), float(tau[i]), float(f[i])) for i in range(P)], h0, N0)


def _eval_extended(u: np.ndarray, xs: np.ndarray, params: ChirpParams) -> np.ndarray:
    """s at normalized times u in [-N, 2N) via chirp periodicity (unscaled by sqrt(dt))."""
    N, dt = params.N, params.delta_t
    out = np.empty(u.size, dtype=np.complex128)
    lo, hi = u < 0, u >= N
    mid = ~(lo | hi)
    out[mid] = eval_s(u[mid] * dt, xs, params)
    if lo.any():
        base = np.minimum(u[lo] + N, np.nextafter(float(N), 0.0))
        ph = np.mod(params.c1 * (N * N + 2.0 * N * u[lo]), 1.0)
        out[lo] = eval_s(base * dt, xs, params) * np.exp(-2j * np.pi * ph)
    if hi.any():
        base = u[hi] - N
        ph = np.mod(params.c1 * (N * N + 2.0 * N * base), 1.0)
        out[hi] = eval_s(base * dt, xs, params) * np.exp(2j * np.pi * ph)
    return out


def apply_channel_interpolated(x, scene: Scene, params: ChirpParams, M: int,
                               factor: int = 8, half_width: int = 64) -> np.ndarray:
    """Cross-check path: fractional delays by windowed-sinc interpolation of an oversampled s.

    The signal is evaluated on a grid ``factor`` times finer than the sample
    rate and each delayed sample is interpolated from that grid. Only
    approximate (the chirp wraps make s(t) not strictly band-limited), but it
    shares no delay arithmetic with :func:`apply_channel`.
    """
    xs = _samples(x)
    N, dt = params.N, params.delta_t
    r = np.zeros(N, dtype=np.complex128)
    n = np.arange(N)
    pad = half_width / factor + 1
    j0 = int(np.floor((-M - pad) * factor))
    j1 = int(np.ceil((N + pad) * factor))
    grid = np.arange(j0, j1)
    fine = _eval_extended(grid / factor, xs, params)
    taps = np.arange(-half_width, half_width + 1)
    window = 0.5 * (1 + np.cos(np.pi * taps / (half_width + 1)))
    for tgt in scene.targets:
        if tgt.tau > M * dt * (1 + 1e-12) or tgt.tau < 0:
            raise DelayExceedsCppError(f"delay {tgt.tau} s outside [0, M*dt] with M={M}")
        pos = (n - tgt.tau / dt) * factor
        base = np.round(pos).astype(int)
        frac = pos - base
        idx = base[:, None] + taps[None, :] - j0
        kern = np.sinc(taps[None, :] - frac[:, None]) * window[None, :]
        vals = np.sum(fine[idx] * kern, axis=1)
        r += tgt.h * np.exp(-2j * np.pi * np.mod(tgt.f * n * dt, 1.0)) * vals
    if scene.h0 != 0:
        r += scene.h0 * eval_s(n * dt, xs, params)
    return np.sqrt(dt) * r
