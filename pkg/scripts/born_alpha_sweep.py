"""Unit-atom alpha sweep with both solvers: energy, area, volume and wall time per alpha.

    python3 scripts/born_alpha_sweep.py --alphas 1,10,40,100 --dt 0.01
"""

import argparse

from npe_adi.charges import ChargeSystem
from npe_adi.workflow import SolvationConfig, build_problem, run_adi, run_bvp


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", default="1,10,40,100")
    ap.add_argument("--h", type=float, default=0.25)
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--t-final", type=float, default=5.0)
    ap.add_argument("--scheme", default="eps1")
    args = ap.parse_args()
    atom = ChargeSystem.single()
    print(f"{'alpha':>6} {'solver':>6} {'dG_p':>10} {'area':>8} {'volume':>8} {'iters':>6} {'wall s':>7}")
    for a in (float(v) for v in args.alphas.split(",")):
        cfg = SolvationConfig(h=args.h, dt=args.dt, t_final=args.t_final, alpha=a, scheme=args.scheme)
        problem = build_problem(atom, cfg)
        for run in (run_adi(problem), run_bvp(problem)):
            r = run.report
            print(f"{a:>6g} {run.solver:>6} {r.dG_p:>10.3f} {r.area:>8.3f} {r.volume:>8.3f} "
                  f"{run.iterations:>6d} {run.wall_time:>7.2f}")


if __name__ == "__main__":
    main()
