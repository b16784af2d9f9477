"""Frame layout of the full-scale setting and the rate it leaves for data.

Prints the guard sets around the pilot and the overhead/throughput trade
as the number of nulls grows.

    python3 demos/layout_and_throughput.py
"""
from afdm_isac.frame import build_layout
from afdm_isac.harness import throughput_table
from afdm_isac.params import table1


def main():
    sysc = table1()
    p = sysc.chirp_params()
    lay = build_layout(sysc.frame_config(), p)

    print(f"N={sysc.N}  dt={sysc.delta_t * 1e9:.2f} ns  l_max={sysc.l_max}  k_max={sysc.k_max}  C={p.C:g}")
    print(f"pilot m0={lay.m0}  window [{lay.pilot_window[0]}, {lay.pilot_window[-1]}]  Q={lay.Q}")
    print(f"|P_GI|={lay.p_gi.size}  |D_GI|={lay.d_gi.size}  |D_data|={lay.d_data.size}")
    print(f"pilot boost {lay.boost} (|x_pilot|^2), overhead {lay.overhead:.4f}")
    print()
    print(f"{'target':>8} {'overhead':>9} {'boost':>6} {'data':>6} {'Mb/s':>8}")
    for row in throughput_table(sysc, [None, 0.35, 0.4, 0.5, 0.6]):
        tgt = "min" if row["target_overhead"] is None else f"{row['target_overhead']:.2f}"
        print(f"{tgt:>8} {row['overhead']:9.4f} {row['boost']:6d} {row['data_symbols']:6d} "
              f"{row['throughput_bps'] / 1e6:8.3f}")


if __name__ == "__main__":
    main()
