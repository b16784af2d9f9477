"""Seeded Monte Carlo runner for sensing RMSE and link throughput.

Every trial owns an rng stream derived from ``(seed, trial_index)``, so a
sweep gives the same numbers regardless of worker count, and each trial
index sees the same scene, data and noise realisation at every SNR point
(only the noise scale changes).
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .channel import Scene, Target, apply_channel, gen_scene
from .daft import daft
from .frame import DaftFrame, FrameLayout, assemble_frame, build_layout, extract_pilot_slice
from .params import SPEED_OF_LIGHT, ChirpParams, SystemConfig
from .sensing import MODES, GridSpec, SensingEstimate, estimate
from .sic import OversampledFrame, band_plan, receive_oversampled, run_chain

MAX_MATCH_TARGETS = 4


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; together with ``seed`` it fixes every output."""

    system: SystemConfig
    snr_db: tuple = (-10.0, 0.0, 10.0, 20.0, 30.0)
    trials: int = 100
    P: int = 1
    mode: str = "pilot"
    sic: bool = False
    seed: int = 0
    delta_tau: float = 0.1
    delta_f: float = 0.1
    window: int = 1
    integer_shifts: bool = False
    si_db: float = 30.0
    oversampling: int = 2

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        self.validate()

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.snr_db:
            raise ConfigError("SNR grid is empty")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 1 <= self.P <= MAX_MATCH_TARGETS:
            raise ConfigError(f"P must lie in [1, {MAX_MATCH_TARGETS}], got {self.P}")
        if self.sic and self.mode != "pilot":
            raise ConfigError("the SIC front-end only produces the pilot observation; use mode=pilot")
        if self.sic and self.oversampling < 2:
            raise ConfigError("SIC needs an oversampling factor of at least 2")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        sysc = self.system
        if sysc.M < sysc.l_max:
            raise ConfigError(f"CPP length {sysc.M} is shorter than the maximum delay {sysc.l_max}")
        try:
            GridSpec(sysc.l_max, sysc.k_max, self.delta_tau, self.delta_f, self.window)
            self.layout()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # derived objects
    def params(self) -> ChirpParams:
        return self.system.chirp_params()

    def layout(self) -> FrameLayout:
        return build_layout(self.system.frame_config(), self.params())

    def grid(self) -> GridSpec:
        return GridSpec(self.system.l_max, self.system.k_max, self.delta_tau, self.delta_f, self.window)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["system"].pop("extra", None)
        d["snr_db"] = list(self.snr_db)
        return d


@dataclass
class TrialResult:
    """Matched per-target errors of one trial (estimate minus truth)."""

    trial: int
    snr_db: float
    range_err: np.ndarray
    velocity_err: np.ndarray
    delay_err: np.ndarray
    doppler_err: np.ndarray
    degraded: bool = False
    scene: Scene | None = None
    est: SensingEstimate | None = None


def noise_power(snr_db: float, frame: DaftFrame) -> float:
    """N0 giving the requested per-sample SNR for a unit-power target."""
    return float(np.vdot(frame.x, frame.x).real) / frame.x.size / 10.0 ** (snr_db / 10.0)


def integer_scene(P: int, l_max: int, k_max: int, params: ChirpParams, rng: np.random.Generator) -> Scene:
    """P targets on integer (delay, Doppler) cells with delay >= 1.

    Cells are at least two steps apart in delay or Doppler, so no target
    hides inside another's peak-exclusion zone. Zero delay is left out
    because a target there coincides with the direct path.
    """
    cells = [(l, k) for l in range(1, l_max + 1) for k in range(-k_max, k_max + 1)]
    chosen: list[tuple[int, int]] = []
    for c in rng.permutation(len(cells)):
        l, k = cells[c]
        if all(max(abs(l - a), abs(k - b)) >= 2 for a, b in chosen):
            chosen.append((l, k))
            if len(chosen) == P:
                break
    if len(chosen) < P:
        raise ConfigError("not enough separated integer cells for the requested targets")
    h = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) / np.sqrt(2.0)
    return Scene([Target(complex(h[i]), l * params.delta_t, k / params.T)
                  for i, (l, k) in enumerate(chosen)])


def match_targets(tau_hat, nu_hat, tau, nu) -> np.ndarray:
    """Permutation of the estimates minimising the total squared normalized error."""
    tau_hat, nu_hat = np.asarray(tau_hat, float), np.asarray(nu_hat, float)
    tau, nu = np.asarray(tau, float), np.asarray(nu, float)
    P = tau.size
    if P > MAX_MATCH_TARGETS:
        raise ValueError(f"exhaustive matching supports at most {MAX_MATCH_TARGETS} targets")
    best, best_cost = None, math.inf
    for perm in itertools.permutations(range(P)):
        p = np.asarray(perm)
        cost = float(np.sum((tau_hat[p] - tau) ** 2 + (nu_hat[p] - nu) ** 2))
        if cost < best_cost:
            best, best_cost = p, cost
    return best


def _draw(cfg: ExperimentConfig, trial_index: int):
    """Scene, frame and unit-power noise of one trial, from independent child streams.

    Separate streams keep the scene and noise of a trial index identical
    across overheads and modes, whose frames consume different numbers of
    data draws.
    """
    s_scene, s_data, s_noise = np.random.SeedSequence([int(cfg.seed), int(trial_index)]).spawn(3)
    params, sysc = cfg.params(), cfg.system
    rng = np.random.default_rng(s_scene)
    if cfg.integer_shifts:
        scene = integer_scene(cfg.P, sysc.l_max, sysc.k_max, params, rng)
    else:
        scene = gen_scene(cfg.P, sysc.tau_max_s, sysc.f_max_hz, rng)
    frame = assemble_frame(cfg.layout(), rng=np.random.default_rng(s_data))
    size = params.N * (cfg.oversampling if cfg.sic else 1)
    if cfg.sic:
        size += cfg.oversampling * sysc.M
    g = np.random.default_rng(s_noise)
    unit = (g.standard_normal(size) + 1j * g.standard_normal(size)) / np.sqrt(2.0)
    return scene, frame, unit


class _Observer:
    """Noiseless receive path of one trial, reused across SNR points."""

    def __init__(self, cfg: ExperimentConfig, frame: DaftFrame, scene: Scene):
        self.cfg, self.frame = cfg, frame
        params, M = cfg.params(), cfg.system.M
        if cfg.sic:
            h0 = np.sqrt(10.0 ** (cfg.si_db / 10.0))
            self._plan = band_plan(frame.layout, cfg.oversampling)
            self.clean = receive_oversampled(frame, replace(scene, h0=h0), params, M, cfg.oversampling)
        else:
            self.clean = apply_channel(frame, scene, params, M, include_direct=False)

    def __call__(self, snr_db: float, unit_noise: np.ndarray) -> np.ndarray:
        cfg, frame = self.cfg, self.frame
        N0 = noise_power(snr_db, frame)
        if cfg.sic:
            L = cfg.oversampling
            r_os = OversampledFrame(self.clean.samples + np.sqrt(L * N0) * unit_noise, L,
                                    cfg.system.M, self.clean.params)
            return run_chain(r_os, frame.layout, self._plan).y_p
        y = daft(self.clean + np.sqrt(N0) * unit_noise, cfg.params())
        return extract_pilot_slice(y, frame.layout) if cfg.mode == "pilot" else y


def run_trial(cfg: ExperimentConfig, trial_index: int, snr_db=None) -> TrialResult | list:
    """One scene, one frame, one estimate per SNR; errors matched to the ground truth.

    ``snr_db`` may be a number (one result) or a sequence (one result per
    point, sharing scene, data and noise shape). Defaults to the highest
    point of the grid.
    """
    many = snr_db is not None and np.ndim(snr_db) == 1
    snrs = [float(s) for s in np.atleast_1d(cfg.snr_db[-1] if snr_db is None else snr_db)]
    scene, frame, unit = _draw(cfg, trial_index)
    params, grid = cfg.params(), cfg.grid()
    obs = _Observer(cfg, frame, scene)
    tau = np.array([t.tau for t in scene.targets])
    f = np.array([t.f for t in scene.targets])
    fc = cfg.system.carrier_hz
    out = []
    for snr in snrs:
        est = estimate(obs(snr, unit), frame.x, grid, cfg.P, params, cfg.mode, frame.layout)
        perm = match_targets(est.delay_samples, est.doppler_bins, tau / params.delta_t, f * params.T)
        dtau = est.tau[perm] - tau
        df = est.f[perm] - f
        out.append(TrialResult(trial_index, snr, SPEED_OF_LIGHT * dtau / 2.0,
                               SPEED_OF_LIGHT * df / (2.0 * fc), dtau / params.delta_t,
                               df * params.T, est.degraded, scene, est))
    return out if many else out[0]


def rmse(errors) -> float:
    """sqrt(mean(e^2)) over all trials and targets."""
    e = np.concatenate([np.ravel(np.asarray(x, float)) for x in errors]) if len(errors) else np.zeros(0)
    return float(np.sqrt(np.mean(e ** 2))) if e.size else 0.0


@dataclass
class RmseRow:
    snr_db: float
    range_rmse_m: float
    velocity_rmse_mps: float
    delay_rmse_samples: float
    doppler_rmse_bins: float
    trials: int
    mode: str
    overhead: float
    degraded: int = 0


@dataclass
class RmseTable:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    FIELDS = ("snr_db", "range_rmse_m", "velocity_rmse_mps", "delay_rmse_samples",
              "doppler_rmse_bins", "trials", "mode", "overhead", "degraded")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, k)) for k in self.FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"version": f"artifact {__version__}", "config": self.config,
               "seed": self.config.get("seed"),
               "rows": [{k: getattr(r, k) for k in self.FIELDS} for r in self.rows]}
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o)}")


def aggregate(results: list, snr_db: float, mode: str, overhead: float) -> RmseRow:
    return RmseRow(snr_db,
                   rmse([r.range_err for r in results]), rmse([r.velocity_err for r in results]),
                   rmse([r.delay_err for r in results]), rmse([r.doppler_err for r in results]),
                   len(results), mode, overhead, sum(bool(r.degraded) for r in results))


def run_sweep(cfg: ExperimentConfig, threads: int = 1, progress=None) -> RmseTable:
    """RMSE table over the SNR grid; identical output for any ``threads``."""
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    overhead = cfg.layout().overhead
    table = RmseTable(config=cfg.to_dict())

    def work(i):
        res = run_trial(cfg, i, list(cfg.snr_db))
        for r in res:
            r.scene = r.est = None
        return res

    if threads == 1:
        results = [work(i) for i in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(cfg.trials)))
    for k, snr in enumerate(cfg.snr_db):
        chunk = [res[k] for res in results]
        table.rows.append(aggregate(chunk, snr, cfg.mode, overhead))
        if progress:
            progress(table.rows[-1])
    return table


def throughput(system: SystemConfig, overhead: float | None | str = "inherit") -> float:
    """Overhead-limited data rate |D_data| * bits / ((N + M) dt), in bit/s.

    Counts every data symbol as delivered; detection errors are not modelled.
    """
    layout = build_layout(system.frame_config(overhead), system.chirp_params())
    return layout.d_data.size * system.modulation_bits / ((system.N + system.M) * system.delta_t)


def throughput_table(system: SystemConfig, overheads) -> list[dict]:
    rows = []
    for ov in overheads:
        fc = system.frame_config(ov)
        layout = build_layout(fc, system.chirp_params())
        rows.append({"target_overhead": ov, "overhead": layout.overhead, "boost": layout.boost,
                     "data_symbols": int(layout.d_data.size),
                     "throughput_bps": throughput(system, ov)})
    return rows
