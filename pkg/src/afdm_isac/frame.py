"""Embedded-pilot frame: guard index sets, pilot boosting and pilot-window slicing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ChirpParams, FrameConfig


class LayoutError(ValueError):
    """Raised for frame configurations that cannot be laid out."""


class InfeasibleOverheadError(LayoutError):
    pass


class InvalidPilotIndexError(LayoutError):
    pass


@dataclass(frozen=True, eq=False)
class FrameLayout:
    """Index bookkeeping of one frame.

    ``pilot_window`` lists the pilot guard interval including ``m0`` in
    increasing modular order, starting at the leftmost delay/Doppler echo
    position. ``p_gi``, ``d_gi`` and ``d_data`` are sorted ascending.
    """

    N: int
    m0: int
    p_gi: np.ndarray
    d_gi: np.ndarray
    d_data: np.ndarray
    pilot_window: np.ndarray
    doppler_span: int
    delay_span: int

    @property
    def boost(self) -> int:
        return int(self.p_gi.size + self.d_gi.size)

    @property
    def Q(self) -> int:
        """Length of the pilot observation window, |P_GI| + 1."""
        return int(self.pilot_window.size)

    @property
    def overhead(self) -> float:
        return (self.boost + 1) / self.N

    @property
    def window_offsets(self) -> np.ndarray:
        """Signed offsets of the pilot window relative to m0."""
        return np.arange(-(self.doppler_span + self.delay_span), self.doppler_span + 1)

    def to_dict(self) -> dict:
        return {
            "m0": self.m0,
            "p_gi": self.p_gi.tolist(),
            "d_gi": self.d_gi.tolist(),
            "d_data": self.d_data.tolist(),
            "boost": self.boost,
            "overhead": self.overhead,
        }


@dataclass(frozen=True, eq=False)
class DaftFrame:
    x: np.ndarray
    layout: FrameLayout

    @property
    def pilot(self) -> complex:
        return complex(self.x[self.layout.m0])

    def pilot_only(self) -> "DaftFrame":
        x = np.zeros_like(self.x)
        x[self.layout.m0] = self.x[self.layout.m0]
        return DaftFrame(x, self.layout)

    def data_only(self) -> "DaftFrame":
        x = self.x.copy()
        x[self.layout.m0] = 0.0
        return DaftFrame(x, self.layout)


def delay_span(cfg: FrameConfig, params: ChirpParams) -> int:
    """2*N*c1*l_max as an integer; the delay part of the pilot guard."""
    span = 2.0 * params.N * params.c1 * cfg.l_max
    if abs(span - round(span)) > 1e-9:
        raise LayoutError(f"2*N*c1*l_max = {span} is not an integer")
    return int(round(span))


def build_layout(cfg: FrameConfig, params: ChirpParams) -> FrameLayout:
    """Place the pilot, its guard interval and the data-isolating guard.

    The pilot window covers ``[m0 - W - D, m0 + W]`` (mod N) with
    ``W = k_f + k_max`` and ``D = 2*N*c1*l_max``. The data guard puts ``W``
    nulls left of the window and ``W + D`` nulls right of it, so no
    data echo within the delay/Doppler bounds reaches the window. Extra
    nulls requested through ``cfg.overhead`` widen both data guard blocks.
    """
    N = cfg.N
    if params.N != N:
        raise LayoutError(f"frame size {N} does not match chirp parameters N={params.N}")
    W = cfg.doppler_span
    D = delay_span(cfg, params)
    width = 2 * W + D + 1
    min_nulls = 2 * (width - 1)

    m0 = W + D if cfg.m0 is None else cfg.m0
    if not 0 <= m0 < N:
        raise InvalidPilotIndexError(f"m0={m0} outside [0, {N - 1}]")

    if cfg.overhead is None:
        nulls = min_nulls
    else:
        nulls = int(round(cfg.overhead * N)) - 1
        if nulls < min_nulls:
            raise InfeasibleOverheadError(
                f"overhead {cfg.overhead} gives {nulls} nulls, at least {min_nulls} are required "
                f"(overhead >= {(min_nulls + 1) / N:.4f})")
    if nulls + 1 > N:
        raise InfeasibleOverheadError(f"{nulls} nulls plus pilot exceed N={N}")

    extra = nulls - min_nulls
    left_extra = extra // 2
    right_extra = extra - left_extra

    start = m0 - W - D
    window = (start + np.arange(width)) % N
    left = (start - W - left_extra + np.arange(W + left_extra)) % N
    right = (m0 + W + 1 + np.arange(W + D + right_extra)) % N

    p_gi = np.sort(window[window != m0])
    d_gi = np.sort(np.concatenate([left, right]))
    used = np.zeros(N, dtype=bool)
    used[window] = True
    used[d_gi] = True
    d_data = np.flatnonzero(~used)
    return FrameLayout(N, m0, p_gi, d_gi, d_data, window, W, D)


def qpsk(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-power QPSK symbols drawn uniformly from the four constellation points."""
    bits = rng.integers(0, 2, size=(n, 2))
    return ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])) / np.sqrt(2.0)


def assemble_frame(layout: FrameLayout, data: np.ndarray | None = None,
                   rng: np.random.Generator | int | None = None) -> DaftFrame:
    """Fill a frame: boosted real pilot at m0, data on ``d_data``, nulls elsewhere.

    ``data`` defaults to fresh QPSK symbols drawn from ``rng``.
    """
    if data is None:
        data = qpsk(layout.d_data.size, np.random.default_rng(rng))
    data = np.asarray(data, dtype=np.complex128).ravel()
    if data.size != layout.d_data.size:
        raise ValueError(f"expected {layout.d_data.size} data symbols, got {data.size}")
    x = np.zeros(layout.N, dtype=np.complex128)
    x[layout.d_data] = data
    x[layout.m0] = np.sqrt(layout.boost)
    return DaftFrame(x, layout)


def extract_pilot_slice(y_tot: np.ndarray, layout: FrameLayout) -> np.ndarray:
    """Samples of ``y_tot`` over the pilot window, in window order."""
    return np.asarray(y_tot)[layout.pilot_window]


def scatter_pilot_slice(y_p: np.ndarray, layout: FrameLayout) -> np.ndarray:
    """Inverse of :func:`extract_pilot_slice`, zero outside the window."""
    y = np.zeros(layout.N, dtype=np.complex128)
    y[layout.pilot_window] = y_p
    return y
