"""Command-line front-end: layout, simulate, sweep, sic-demo, throughput.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import Scene, Target
from .config import ConfigError, RunConfig, default_config, load_config, override
from .frame import assemble_frame
from .harness import run_sweep, run_trial, throughput, throughput_table, _json_default
from .sic import band_plan, receive_parts, run_chain, si_report, spectrum_db

log = logging.getLogger("afdm_isac")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="INI configuration file")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--mode", choices=("pilot", "full"), help="pilot window or whole frame")
    p.add_argument("--sic", choices=("on", "off"), help="route the receive path through the SIC front-end")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="afdm-isac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("layout", parents=[common], help="dump the frame layout")
    sp = sub.add_parser("simulate", parents=[common], help="run one trial, dump scene and estimates")
    sp.add_argument("--trial", type=int, default=0)
    sp.add_argument("--snr", type=float, help="SNR in dB (default: highest grid point)")
    sub.add_parser("sweep", parents=[common], help="RMSE table over the SNR grid")
    sd = sub.add_parser("sic-demo", parents=[common], help="spectra and suppression report of the SIC chain")
    sd.add_argument("--targets", type=int, default=2)
    sub.add_parser("throughput", parents=[common], help="rate table over the overhead grid")
    return ap


def _resolve(args) -> RunConfig:
    run = load_config(args.config) if args.config else default_config()
    sic = None if args.sic is None else args.sic == "on"
    run = override(run, seed=args.seed, mode=args.mode, sic=sic)
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return run


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def cmd_layout(run: RunConfig, args) -> None:
    exp = run.experiment
    layout = exp.layout()
    p = exp.params()
    doc = layout.to_dict()
    doc.update({"N": layout.N, "Q": layout.Q, "pilot_window": layout.pilot_window.tolist(),
                "c1": p.c1, "c2": p.c2, "M": exp.system.M, "l_max": exp.system.l_max,
                "k_max": exp.system.k_max})
    text = _dump(doc)
    _write(args.out, "layout.json", text)
    print(json.dumps({k: doc[k] for k in ("N", "m0", "Q", "boost", "overhead", "M")}))


def cmd_simulate(run: RunConfig, args) -> None:
    exp = run.experiment
    res = run_trial(exp, args.trial, args.snr)
    p = exp.params()
    doc = {"trial": args.trial, "snr_db": res.snr_db, "scene": res.scene.to_dict(),
           "estimate": res.est.to_dict(exp.system.carrier_hz),
           "errors": {"range_m": res.range_err, "velocity_mps": res.velocity_err,
                      "delay_samples": res.delay_err, "doppler_bins": res.doppler_err},
           "truth_normalized": [t.normalized(p) for t in res.scene.targets],
           "config": exp.to_dict()}
    text = _dump(doc)
    _write(args.out, "simulate.json", text)
    print(text, end="")


def cmd_sweep(run: RunConfig, args) -> None:
    exp = run.experiment
    table = run_sweep(exp, threads=args.threads,
                      progress=lambda r: log.info("SNR %+.1f dB: range %.4g m, velocity %.4g m/s",
                                                  r.snr_db, r.range_rmse_m, r.velocity_rmse_mps))
    _write(args.out, "rmse.csv", table.to_csv())
    _write(args.out, "rmse.json", table.to_json())
    print(table.to_csv(), end="")


def _spectrum_csv(sig) -> str:
    freq, pdb = spectrum_db(sig)
    lines = ["freq_hz,power_db"] + [f"{f!r},{p!r}" for f, p in zip(freq.tolist(), pdb.tolist())]
    return "\n".join(lines) + "\n"


def cmd_sic_demo(run: RunConfig, args) -> None:
    exp = run.experiment
    p, layout, sysc = exp.params(), exp.layout(), exp.system
    rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 0]))
    frame = assemble_frame(layout, rng=rng)
    cells = rng.choice(np.arange(1, sysc.l_max + 1), size=args.targets)
    dops = rng.integers(-sysc.k_max, sysc.k_max + 1, size=args.targets)
    h = (rng.standard_normal(args.targets) + 1j * rng.standard_normal(args.targets)) / np.sqrt(2)
    scene = Scene([Target(complex(h[i]), cells[i] * p.delta_t, dops[i] / p.T) for i in range(args.targets)],
                  h0=np.sqrt(10.0 ** (exp.si_db / 10.0)))
    parts = receive_parts(frame, scene, p, sysc.M, exp.oversampling)
    total = parts["noise"]
    for k in ("si_pilot", "si_data", "echo_pilot", "echo_data"):
        total = total + parts[k]
    res = run_chain(total, layout, band_plan(layout, exp.oversampling), parts, keep_stages=True)
    report = si_report(res.diagnostics)
    report["scene"] = scene.to_dict()
    report["oversampling"] = exp.oversampling
    for name, sig in res.stages.items():
        _write(args.out, f"spectrum_{name}.csv", _spectrum_csv(sig))
    _write(args.out, "sic_report.json", _dump(report))
    rows = ["m,re,im"] + [f"{m},{v.real!r},{v.imag!r}" for m, v in zip(layout.pilot_window.tolist(), res.y_p)]
    _write(args.out, "y_p.csv", "\n".join(rows) + "\n")
    print(json.dumps({"suppression_db": report["suppression_db"],
                      "desired_retained_db": report.get("desired_retained_db")}))


def cmd_throughput(run: RunConfig, args) -> None:
    sysc = run.experiment.system
    rows = throughput_table(sysc, run.overheads)
    fields = ("target_overhead", "overhead", "boost", "data_symbols", "throughput_bps")
    lines = [",".join(fields)]
    for r in rows:
        lines.append(",".join("min" if r[f] is None else repr(r[f]) for f in fields))
    text = "\n".join(lines) + "\n"
    _write(args.out, "throughput.csv", text)
    _write(args.out, "throughput.json", _dump({
        "definition": "overhead-limited rate |D_data| * bits / ((N + M) dt); detection errors not counted",
        "rows": rows}))
    print(text, end="")


COMMANDS = {"layout": cmd_layout, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "sic-demo": cmd_sic_demo, "throughput": cmd_throughput}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        run = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
