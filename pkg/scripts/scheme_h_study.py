"""Half-node scheme gap (eps_I against eps_II) for the unit atom under grid refinement.

Uses the alternating BVP solver so that no pseudo-time step enters the comparison,
then repeats the two ADI runs at the given step.

    python3 scripts/scheme_h_study.py --h-list 0.5,0.25,0.2 --dt 0.01
"""

import argparse

from npe_adi.charges import ChargeSystem
from npe_adi.workflow import SolvationConfig, build_problem, run_adi, run_bvp


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h-list", default="0.5,0.25")
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--alpha", type=float, default=40.0)
    ap.add_argument("--grad-scale", type=float, default=20.0, help="field scale in Bjerrum lengths")
    args = ap.parse_args()
    atom = ChargeSystem.single()
    print(f"{'h':>6} {'bvp eps1':>10} {'bvp eps2':>10} {'gap %':>6} {'adi eps1':>10} {'adi eps2':>10} {'gap %':>6}")
    for h in (float(v) for v in args.h_list.split(",")):
        row = {}
        for scheme in ("eps1", "eps2"):
            cfg = SolvationConfig(h=h, dt=args.dt, alpha=args.alpha, scheme=scheme,
                                  grad_scale_bjerrum=args.grad_scale)
            p = build_problem(atom, cfg)
            row[scheme] = (run_bvp(p).report.dG_p, run_adi(p).report.dG_p)
        b1, a1 = row["eps1"]
        b2, a2 = row["eps2"]
        print(f"{h:>6g} {b1:>10.3f} {b2:>10.3f} {100 * abs(b1 - b2) / abs(b1):>6.1f} "
              f"{a1:>10.3f} {a2:>10.3f} {100 * abs(a1 - a2) / abs(a1):>6.1f}")


if __name__ == "__main__":
    main()
