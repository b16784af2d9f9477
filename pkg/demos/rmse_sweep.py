"""Range/velocity RMSE against SNR for the desk-scale frame.

Pilot-only processing at the minimum (~30%) overhead, compared with
whole-frame processing and with a 50% overhead frame. A few hundred trials
take a couple of minutes on one core; pass a smaller count to go faster.

    python3 demos/rmse_sweep.py [trials]
"""
import sys
from dataclasses import replace

from afdm_isac.harness import ExperimentConfig, run_sweep
from afdm_isac.params import desk


def show(label, table):
    print(label)
    print(f"  {'SNR':>5} {'range m':>9} {'vel m/s':>9}")
    for r in table.rows:
        print(f"  {r.snr_db:5.0f} {r.range_rmse_m:9.3f} {r.velocity_rmse_mps:9.3f}")


def main(trials=100):
    cfg = ExperimentConfig(desk(), trials=trials, seed=1)
    show(f"pilot only, overhead {cfg.layout().overhead:.3f}", run_sweep(cfg))
    show("whole frame", run_sweep(replace(cfg, mode="full")))
    hi = replace(cfg, system=replace(desk(), overhead=0.5))
    show(f"pilot only, overhead {hi.layout().overhead:.3f}", run_sweep(hi))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 100)
