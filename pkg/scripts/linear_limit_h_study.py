"""Uniform-permittivity point charge: grid self-energy against h.

With eps = 80 everywhere and a vacuum reference at eps = 1, the difference of the
two regularized self-energies grows like 1/h, while adding a dielectric cavity
around the charge makes the solvation energy converge.

    python3 scripts/linear_limit_h_study.py --h-list 0.5,0.25,0.2
"""

import argparse

from npe_adi.charges import ChargeSystem
from npe_adi.bvp import piecewise_halves
from npe_adi.workflow import SolvationConfig, build_problem, initial_state, linear_potential


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h-list", default="0.5,0.25,0.2")
    args = ap.parse_args()
    atom = ChargeSystem.single()
    print(f"{'h':>6} {'G_0':>10} {'dG_p eps=80':>12} {'h * dG_p':>10} {'dG_p cavity':>12}")
    for h in (float(v) for v in args.h_list.split(",")):
        flat = build_problem(atom, SolvationConfig(h=h, eps_m=80.0, eps_s=80.0))
        dg_flat = flat.energy(initial_state(flat, "piecewise"))
        # sharp cavity: eps_m = 1 inside the radius, eps_s = 80 outside
        cav = build_problem(atom, SolvationConfig(h=h))
        halves = piecewise_halves(atom, cav.grid, cav.model)
        dg_cav = cav.energy(linear_potential(cav.grid, cav.Q, cav.boundary, halves, 1e-10, 20000))
        print(f"{h:>6g} {flat.G_0:>10.2f} {dg_flat:>12.3f} {h * dg_flat:>10.3f} {dg_cav:>12.3f}")


if __name__ == "__main__":
    main()
