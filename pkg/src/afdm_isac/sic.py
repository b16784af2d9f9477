"""Analog self-interference cancellation front-end, modelled digitally.

The analog domain is stood in for by an ``L``-times oversampled copy of the
received waveform. The chain is: dechirp with the pilot chirp, block DC,
keep three pass bands with an ideal mask, decimate to the sample rate (which
folds the edge bands back onto the central one) and take an N-point DFT
whose bins map onto the pilot window of the DAFT domain.

Frequencies are counted in bins of ``1/T`` throughout, so the oversampled
spectrum spans offsets ``[-L N / 2, L N / 2)`` and the sample rate is ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .channel import Scene
from .chirp_time import _phase_mod1, eval_s_cpp
from .frame import DaftFrame, FrameLayout
from .params import ChirpParams
from .sensing import delayed_replica

REPORT_FLOOR_DB = -150.0

# At twice the sample rate the three pass bands hold every alias of the pilot
# window, so decimation reproduces the sample-rate receiver exactly. Larger
# factors also see the wideband splatter from the chirps' phase steps at the
# wrap instants, which an ideal mask then discards before folding.
DEFAULT_OVERSAMPLING = 2


class BandOverlapError(ValueError):
    pass


@dataclass(frozen=True)
class OversampledFrame:
    """``L (N + M)`` samples of ``sqrt(dt) r(t)`` at spacing ``dt / L``, starting at ``t = -M dt``."""

    samples: np.ndarray
    L: int
    M: int
    params: ChirpParams

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("oversampling factor must be positive")
        want = self.L * (self.params.N + self.M)
        if self.samples.shape != (want,):
            raise ValueError(f"expected {want} samples, got {self.samples.shape}")

    @property
    def sample_period(self) -> float:
        return self.params.delta_t / self.L

    @property
    def body(self) -> np.ndarray:
        return self.samples[self.L * self.M:]

    def times(self) -> np.ndarray:
        return (np.arange(self.samples.size) / self.L - self.M) * self.params.delta_t

    def decimate(self) -> np.ndarray:
        """Samples at ``n dt`` for ``n = 0..N-1``."""
        return self.body[::self.L].copy()

    def energy(self) -> float:
        """Body energy in sample-rate units (sum |.|^2 / L)."""
        return float(np.vdot(self.body, self.body).real) / self.L

    def with_body(self, body: np.ndarray) -> "OversampledFrame":
        s = self.samples.copy()
        s[self.L * self.M:] = body
        return replace(self, samples=s)

    def __add__(self, other: "OversampledFrame") -> "OversampledFrame":
        if (self.L, self.M, self.params) != (other.L, other.M, other.params):
            raise ValueError("cannot add frames sampled differently")
        return replace(self, samples=self.samples + other.samples)


# ------------------------------------------------------------------ generator

def _path(xs: np.ndarray, tau_n: float, nu: float, params: ChirpParams, M: int, L: int) -> np.ndarray:
    """sqrt(dt) exp(-i2pi nu u / N) s_cpp((u - tau_n) dt) on the oversampled grid.

    Body samples come from the polyphase split ``u = n + j / L``, each phase
    being a delayed replica with delay ``tau_n - j / L``. The prefix region is
    evaluated directly and left at zero where it would reach the previous frame.
    """
    N, dt = params.N, params.delta_t
    body = np.empty((N, L), dtype=np.complex128)
    for j in range(L):
        body[:, j] = delayed_replica(xs, tau_n - j / L, params)
    out = np.zeros(L * (N + M), dtype=np.complex128)
    out[L * M:] = body.ravel()
    if M:
        u = np.arange(-L * M, 0) / L
        arg = u - tau_n
        ok = arg >= -M
        if ok.any():
            out[:L * M][ok] = np.sqrt(dt) * eval_s_cpp(arg[ok] * dt, xs, params, M)
    u_all = np.arange(out.size) / L - M
    return out * np.exp(-2j * np.pi * np.mod(nu * u_all / N, 1.0))


def receive_parts(frame: DaftFrame, scene: Scene, params: ChirpParams, M: int, L: int = DEFAULT_OVERSAMPLING,
                  rng: np.random.Generator | None = None) -> dict[str, OversampledFrame]:
    """Oversampled received waveform split into its physical contributions.

    Keys are ``si_pilot`` and ``si_data`` (direct path), ``echo_pilot`` and
    ``echo_data`` (targets) and ``noise``. Noise is white over the
    oversampled band with the same spectral density as a per-sample variance
    ``scene.N0`` at the sample rate, i.e. ``L * N0`` per oversampled sample.
    """
    if L < 1:
        raise ValueError("oversampling factor must be positive")
    pilot = frame.pilot_only().x
    data = frame.data_only().x
    size = L * (params.N + M)
    zero = np.zeros(size, dtype=np.complex128)
    parts = {k: zero.copy() for k in ("si_pilot", "si_data", "echo_pilot", "echo_data")}
    if scene.h0 != 0:
        parts["si_pilot"] += scene.h0 * _path(pilot, 0.0, 0.0, params, M, L)
        parts["si_data"] += scene.h0 * _path(data, 0.0, 0.0, params, M, L)
    for tgt in scene.targets:
        tau_n, nu = tgt.delay_samples(params), tgt.doppler_bins(params)
        parts["echo_pilot"] += tgt.h * _path(pilot, tau_n, nu, params, M, L)
        if np.any(data):
            parts["echo_data"] += tgt.h * _path(data, tau_n, nu, params, M, L)
    noise = zero.copy()
    if rng is not None:
        w = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        noise = np.sqrt(L * scene.N0 / 2.0) * w
    parts["noise"] = noise
    return {k: OversampledFrame(v, L, M, params) for k, v in parts.items()}


def receive_oversampled(frame: DaftFrame, scene: Scene, params: ChirpParams, M: int, L: int = DEFAULT_OVERSAMPLING,
                        rng: np.random.Generator | None = None) -> OversampledFrame:
    parts = receive_parts(frame, scene, params, M, L, rng)
    total = parts.pop("noise")
    for p in parts.values():
        total = total + p
    return total


# ------------------------------------------------------------------ band plan

@dataclass(frozen=True)
class BandPlan:
    """Pass bands of the tri-band filter, in bins of ``1/T``.

    ``central`` is the closed interval of pilot-window offsets ``m - m0``.
    An echo whose delayed pilot chirp has already wrapped while the
    reference has not sits one sample rate higher, so the edge band is the
    central band shifted by ``+N``. Its part below ``+N`` mirrors the
    negative half of the central band and its part above ``+N`` aliases to
    just above ``-N`` once the sampling rate is ``2N``.
    """

    N: int
    L: int
    central: tuple[int, int]
    data_offsets: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        lo, hi = self.central
        return hi - lo + 1

    @property
    def total_width(self) -> int:
        return int(self.mask().sum())

    def offsets(self) -> np.ndarray:
        """Signed bin offset of each oversampled DFT bin."""
        return np.fft.fftfreq(self.L * self.N, 1.0 / (self.L * self.N)).round().astype(np.int64)

    def pass_offsets(self) -> np.ndarray:
        lo, hi = self.central
        c = np.arange(lo, hi + 1)
        return np.concatenate([c, c + self.N])

    def mask(self) -> np.ndarray:
        K = self.L * self.N
        m = np.zeros(K, dtype=bool)
        m[np.mod(self.pass_offsets(), K)] = True
        return m

    def data_mask(self) -> np.ndarray:
        """Bins occupied by direct-path data chirps, with their wrap images."""
        K = self.L * self.N
        d = self.data_offsets
        m = np.zeros(K, dtype=bool)
        m[np.mod(d, K)] = True
        m[np.mod(np.where(d > 0, d - self.N, d + self.N), K)] = True
        return m

    def check(self) -> None:
        if self.L < 2:
            raise BandOverlapError("edge bands need an oversampling factor of at least 2")
        overlap = self.mask() & self.data_mask()
        if overlap.any():
            bad = self.offsets()[overlap]
            raise BandOverlapError(f"pass bands overlap the data band at offsets {bad[:8].tolist()}")


def band_plan(layout: FrameLayout, L: int) -> BandPlan:
    """Band plan for ``layout``; raises :class:`BandOverlapError` if infeasible."""
    w = layout.window_offsets
    lo, hi = int(w[0]), int(w[-1])
    data = np.concatenate([layout.d_data, layout.d_gi]).astype(np.int64) - layout.m0
    plan = BandPlan(layout.N, L, (lo, hi), np.sort(data))
    plan.check()
    return plan


# ------------------------------------------------------------------ stages

def reference_chirp(m0: int, sig: OversampledFrame) -> np.ndarray:
    """exp(i2pi Phi_m0(t)) / sqrt(T) on the body grid of ``sig``."""
    p = sig.params
    u = np.arange(sig.L * p.N) / sig.L
    ph = _phase_mod1(np.array([float(m0)]), u, replace(p, c2=0.0))[:, 0]
    return np.exp(2j * np.pi * ph) / np.sqrt(p.T)


def dechirp(sig: OversampledFrame, m0: int, params: ChirpParams | None = None) -> OversampledFrame:
    """Multiply the frame body by the conjugate pilot chirp; the prefix is zeroed."""
    if params is not None and params != sig.params:
        raise ValueError("params do not match the frame")
    ref = reference_chirp(m0, sig)
    out = np.zeros_like(sig.samples)
    out[sig.L * sig.M:] = sig.body * np.conj(ref)
    return replace(sig, samples=out)


def tri_band_filter(sig: OversampledFrame, plan: BandPlan) -> OversampledFrame:
    """DC block, then keep only the pass bands of ``plan`` (ideal mask).

    The blocker removes every component that lands on DC after decimation,
    i.e. the zero bin and its images at multiples of the sample rate.
    """
    if sig.L != plan.L or sig.params.N != plan.N:
        raise ValueError("band plan does not match the frame sampling")
    plan.check()
    spec = np.fft.fft(sig.body)
    spec[np.mod(plan.offsets(), plan.N) == 0] = 0.0
    spec[~plan.mask()] = 0.0
    return sig.with_body(np.fft.ifft(spec))


@dataclass
class PilotDiagnostics:
    """Energy bookkeeping for one pass through the chain (sample-rate units)."""

    input_energy: float
    output_energy: float
    components: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"input_energy": self.input_energy, "output_energy": self.output_energy,
                "components": self.components}


def _pilot_bins(sig: OversampledFrame, layout: FrameLayout) -> np.ndarray:
    p = sig.params
    z = sig.decimate()
    Z = np.fft.fft(z)
    k = np.asarray(layout.pilot_window) - layout.m0
    m = np.asarray(layout.pilot_window)
    # DFT of the dechirped samples equals sqrt(N / T) exp(i2pi c2 m^2) y[m0 + k]
    scale = np.sqrt(p.T / p.N) * np.exp(-2j * np.pi * np.mod(p.c2 * m.astype(float) ** 2, 1.0))
    return scale * Z[np.mod(k, p.N)]


def to_pilot_vector(sig: OversampledFrame, layout: FrameLayout,
                    params: ChirpParams | None = None) -> tuple[np.ndarray, PilotDiagnostics]:
    """Decimate a dechirped, filtered frame and read out the pilot window.

    The result lines up with ``extract_pilot_slice(daft(r))`` of the sample-rate
    receive chain, apart from the DC bin (offset 0) removed by the blocker.
    """
    if params is not None and params != sig.params:
        raise ValueError("params do not match the frame")
    y_p = _pilot_bins(sig, layout)
    return y_p, PilotDiagnostics(sig.energy(), float(np.vdot(y_p, y_p).real))


@dataclass
class SicResult:
    y_p: np.ndarray
    diagnostics: PilotDiagnostics
    stages: dict = field(default_factory=dict)


def run_chain(sig: OversampledFrame, layout: FrameLayout, plan: BandPlan | None = None,
              parts: Mapping[str, OversampledFrame] | None = None,
              keep_stages: bool = False) -> SicResult:
    """Full front-end on ``sig``; ``parts`` (optional) are traced separately for diagnostics.

    Each traced component records its body energy at the input and the energy
    it leaves in ``y_p``. The chain is linear, so the traces add up to the total.
    """
    plan = plan or band_plan(layout, sig.L)
    d = dechirp(sig, layout.m0)
    f = tri_band_filter(d, plan)
    y_p, diag = to_pilot_vector(f, layout)
    diag.input_energy = sig.energy()
    for name, part in (parts or {}).items():
        yp_i, _ = to_pilot_vector(tri_band_filter(dechirp(part, layout.m0), plan), layout)
        diag.components[name] = {"input_energy": part.energy(),
                                 "output_energy": float(np.vdot(yp_i, yp_i).real)}
    stages = {"received": sig, "dechirped": d, "filtered": f} if keep_stages else {}
    return SicResult(y_p, diag, stages)


# ------------------------------------------------------------------ reporting

def _ratio_db(num: float, den: float) -> float:
    if den <= 0:
        return REPORT_FLOOR_DB if num <= 0 else float("inf")
    if num <= 0:
        return REPORT_FLOOR_DB
    return max(REPORT_FLOOR_DB, 10.0 * np.log10(num / den))


def si_report(diag: PilotDiagnostics, interference: tuple[str, ...] = ("si_pilot", "si_data", "echo_data"),
              desired: tuple[str, ...] = ("echo_pilot",)) -> dict:
    """Residual levels in dB relative to the input (floored at -150 dB).

    ``suppression_db`` is the negated residual of the summed interference
    components. Without traced components the whole input is treated as
    interference.
    """
    comps = diag.components
    rep: dict = {"floor_db": REPORT_FLOOR_DB, "components": {}}
    for name, c in comps.items():
        rep["components"][name] = {"residual_db": _ratio_db(c["output_energy"], c["input_energy"])}
    if comps:
        names = [n for n in interference if n in comps]
        e_in = sum(comps[n]["input_energy"] for n in names)
        e_out = sum(comps[n]["output_energy"] for n in names)
        want = [n for n in desired if n in comps]
        if want:
            rep["desired_retained_db"] = _ratio_db(sum(comps[n]["output_energy"] for n in want),
                                                   sum(comps[n]["input_energy"] for n in want))
    else:
        e_in, e_out = diag.input_energy, diag.output_energy
    rep["residual_db"] = _ratio_db(e_out, e_in)
    rep["suppression_db"] = -rep["residual_db"]
    return rep


def spectrum_db(sig: OversampledFrame) -> tuple[np.ndarray, np.ndarray]:
    """(frequency in Hz, power in dB) of the body, fftshifted."""
    K = sig.body.size
    S = np.fft.fftshift(np.abs(np.fft.fft(sig.body)) ** 2 / K)
    freq = np.fft.fftshift(np.fft.fftfreq(K, sig.sample_period))
    with np.errstate(divide="ignore"):
        p = 10.0 * np.log10(S)
    return freq, np.maximum(p, REPORT_FLOOR_DB)
