"""Spatial and temporal convergence tables of the manufactured-solution benchmark.

    python3 scripts/mms_tables.py                # both tables, both schemes
    python3 scripts/mms_tables.py --study time   # temporal table only

The spatial ladder at dt=0.001 takes several minutes.
"""

import argparse
import logging
import math

from npe_adi.mms import BenchmarkSpec, run_spatial_study, run_temporal_study


def show(label, rows):
    print(f"{label:>10} {'Linf':>10} {'order':>6} {'L2':>10} {'order':>6}")
    for r in rows:
        o1 = "" if r.linf_order is None else f"{r.linf_order:.2f}"
        o2 = "" if r.l2_order is None else f"{r.l2_order:.2f}"
        print(f"{r.step:>10.5f} {r.linf:>10.3e} {o1:>6} {r.l2:>10.3e} {o2:>6}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--study", choices=["space", "time", "both"], default="both")
    ap.add_argument("--forcing", choices=["consistent", "printed"], default="consistent")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    spec = BenchmarkSpec(forcing=args.forcing)
    for scheme in ("eps1", "eps2"):
        if args.study in ("space", "both"):
            print(f"\nspace, {scheme}, dt=0.001")
            show("h", run_spatial_study(spec, 0.001, [math.pi / 2**k for k in (2, 3, 4, 5)], scheme))
        if args.study in ("time", "both"):
            rows, s_inf, s_2 = run_temporal_study(spec, math.pi / 48, (0.8, 0.4, 0.2, 0.1, 0.05), scheme)
            print(f"\ntime, {scheme}, h=pi/48")
            show("dt", rows)
            print(f"least-squares slope: Linf {s_inf:.3f}, L2 {s_2:.3f}")


if __name__ == "__main__":
    main()
