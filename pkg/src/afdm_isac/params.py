"""System parameters: chirp constants, frame configuration and physical presets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

SPEED_OF_LIGHT = 299_792_458.0

# slack for ceil() of quantities that are integral up to rounding (e.g. T*f_max = 3.0000000000000004)
_CEIL_SLACK = 1e-9


def _robust_ceil(value: float) -> int:
    return int(math.ceil(value - _CEIL_SLACK))


@dataclass(frozen=True)
class ChirpParams:
    """Constants of the discrete affine Fourier transform.

    Parameters
    ----------
    N : int
        Frame size in samples (even, >= 16).
    c1 : float
        First chirp parameter, normalized per sample squared.
    c2 : float
        Second chirp parameter.
    delta_t : float
        Sample period in seconds.
    """

    N: int
    c1: float
    c2: float = 0.0
    delta_t: float = 1.0

    def __post_init__(self):
        if self.N < 16 or self.N % 2:
            raise ValueError(f"N must be even and >= 16, got {self.N}")
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")

    @property
    def C(self) -> float:
        """Number of frequency wraps per frame, 2*c1*N."""
        return 2.0 * self.c1 * self.N

    @property
    def T(self) -> float:
        return self.N * self.delta_t

    @property
    def C_is_integer(self) -> bool:
        return abs(self.C - round(self.C)) < 1e-9


@dataclass(frozen=True)
class FrameConfig:
    """Guard and pilot sizing of one embedded-pilot frame.

    ``overhead`` is the target fraction of pilot plus null symbols. ``None``
    selects the smallest layout that isolates the pilot.
    """

    N: int
    k_f: int
    l_max: int
    k_max: int
    m0: int | None = None
    overhead: float | None = None
    modulation_bits: int = 2

    def __post_init__(self):
        if self.k_f < 0 or self.l_max < 0 or self.k_max < 0:
            raise ValueError("k_f, l_max and k_max must be non-negative")
        if self.overhead is not None and not 0.0 < self.overhead <= 1.0:
            raise ValueError(f"overhead must lie in (0, 1], got {self.overhead}")

    @property
    def doppler_span(self) -> int:
        """k_f + k_max, the one-sided Doppler guard width."""
        return self.k_f + self.k_max

    def default_c1(self) -> float:
        return 2.0 * (self.k_f + self.k_max) / (2.0 * self.N)

    def chirp_params(self, delta_t: float = 1.0, c2: float = 0.0, c1: float | None = None) -> ChirpParams:
        return ChirpParams(self.N, self.default_c1() if c1 is None else c1, c2, delta_t)


@dataclass(frozen=True)
class SystemConfig:
    """Physical description of an ISAC link, from which frame and chirp constants follow."""

    N: int
    bandwidth_hz: float
    carrier_hz: float
    tau_max_s: float
    f_max_hz: float
    k_f: int = 4
    overhead: float | None = None
    m0: int | None = None
    cpp_len: int | None = None
    c1: float | None = None
    c2: float = 0.0
    modulation_bits: int = 2
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def delta_t(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def T(self) -> float:
        return self.N * self.delta_t

    @property
    def l_max(self) -> int:
        return _robust_ceil(self.tau_max_s / self.delta_t)

    @property
    def k_max(self) -> int:
        return _robust_ceil(self.T * self.f_max_hz)

    @property
    def M(self) -> int:
        """CPP length in samples; defaults to l_max."""
        return self.l_max if self.cpp_len is None else self.cpp_len

    def frame_config(self, overhead: float | None | str = "inherit") -> FrameConfig:
        ov = self.overhead if overhead == "inherit" else overhead
        return FrameConfig(self.N, self.k_f, self.l_max, self.k_max, m0=self.m0,
                           overhead=ov, modulation_bits=self.modulation_bits)

    def chirp_params(self) -> ChirpParams:
        return self.frame_config().chirp_params(self.delta_t, self.c2, self.c1)


def table1() -> SystemConfig:
    """Full-scale setting: N=2048, 30.72 MHz, 79 GHz, 98 m / 308 km/h targets, k_f=4."""
    return SystemConfig(N=2048, bandwidth_hz=30.72e6, carrier_hz=79e9,
                        tau_max_s=0.65e-6, f_max_hz=45e3, k_f=4)


def desk() -> SystemConfig:
    """Half-bandwidth reduction of :func:`table1` with N=1024 (same T, ~30% overhead)."""
    return SystemConfig(N=1024, bandwidth_hz=15.36e6, carrier_hz=79e9,
                        tau_max_s=0.65e-6, f_max_hz=45e3, k_f=4)


def small() -> SystemConfig:
    """N=64 toy setting with k_f=1, k_max=1, l_max=4 (c1 = 1/32)."""
    bw = 1.0e6
    T = 64 / bw
    return SystemConfig(N=64, bandwidth_hz=bw, carrier_hz=79e9,
                        tau_max_s=4 / bw, f_max_hz=1.0 / T, k_f=1)
