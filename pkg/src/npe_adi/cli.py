"""Command-line front end: ``npe-adi {mms-convergence,born,solvate,compare}``.

Result files (CSV/JSON) are deterministic for a given configuration and start
with the configuration hash. Wall-clock measurements go to separate
``*.timing.json`` files, which are the only outputs that vary between reruns.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure,
4 input/output error. ``NPE_ADI_THREADS`` caps the BLAS/OpenMP thread pools.
"""

from __future__ import annotations

import os

_THREADS = os.environ.get("NPE_ADI_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__
from .adi import BlowUpError
from .bvp import InnerSolverError
from .charges import EmptySystemError, PlacementError, PQRParseError, ChargeSystem, SingularBoundaryError, read_pqr
from .energy import mean_abs_error, rmse
from .mms import BenchmarkSpec, run_spatial_study, run_temporal_study
from .reference import lookup
from .tridiag import SingularSystemError
from .workflow import SolvationConfig, build_problem, config_hash, finite_report, run_adi, run_bvp

log = logging.getLogger("npe_adi")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# compound-set and protein runs
PRESETS = {
    "compound": {"h": 0.25, "dt": 0.1, "t_final": 2.0, "alpha": 40.0},
    "protein": {"h": 0.5, "dt": 0.15, "t_final": 3.0, "alpha": 40.0},
}


class NumericalFailure(RuntimeError):
    pass


# -- parsing helpers ------------------------------------------------------------------

_EXPR = re.compile(r"^[0-9eE+\-*/.() pi]+$")


def parse_length(text: str) -> float:
    """A positive number, optionally written with ``pi`` (``pi/8``, ``3.14``, ``2*pi/48``)."""
    t = text.strip().lower().replace("π", "pi")
    if not t or not _EXPR.match(t):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    try:
        val = float(eval(t, {"__builtins__": {}}, {"pi": math.pi}))
    except Exception:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(val) and val > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return val


def parse_list(text: str) -> list[float]:
    return [parse_length(p) for p in text.split(",") if p.strip()]


def parse_alphas(text: str) -> list[float]:
    out = []
    for p in text.split(","):
        try:
            v = float(p)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad alpha {p!r}") from None
        if v < 0:
            raise argparse.ArgumentTypeError("alpha must be non-negative")
        out.append(v)
    return out


# -- output ------------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: Path, digest: str, header: list[str], rows: list[list], comments=()) -> None:
    lines = [f"# config_hash={digest}"] + [f"# {c}" for c in comments]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    _atomic_write(path, "\n".join(lines) + "\n" + buf.getvalue())


def write_json(path: Path, digest: str, payload: dict) -> None:
    body = {"config_hash": digest, **payload}
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialize {type(o)}")


def _clean(v):
    """JSON-safe float (non-finite values become strings)."""
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# -- subcommands -------------------------------------------------------------------------


def cmd_mms_convergence(args) -> int:
    spec = BenchmarkSpec(forcing=args.forcing)
    schemes = ["eps1", "eps2"] if args.scheme == "both" else [args.scheme]
    if args.study == "space":
        steps = args.h_list or [math.pi / 4, math.pi / 8, math.pi / 16, math.pi / 32]
        for h in steps:
            try:
                spec.grid(h)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        fixed = {"dt": args.dt if args.dt is not None else 0.001}
    else:
        steps = args.dt_list or [0.8, 0.4, 0.2, 0.1, 0.05]
        steps = sorted(steps, reverse=True)
        fixed = {"h": args.h if args.h is not None else math.pi / 48}
        try:
            spec.grid(fixed["h"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cfg = {"subcommand": "mms-convergence", "study": args.study, "schemes": schemes, "steps": steps,
           "benchmark": spec.__dict__, **fixed}
    digest = config_hash(cfg)
    results, slopes, timing = {}, {}, {}
    for s in schemes:
        if args.study == "space":
            rows = run_spatial_study(spec, fixed["dt"], steps, s)
        else:
            rows, si, s2 = run_temporal_study(spec, fixed["h"], steps, s)
            slopes[s] = {"linf": si, "l2": s2}
        results[s] = rows
        timing[s] = [r.wall_time for r in rows]
        for r in rows:
            if r.error:
                log.warning("%s step %s failed: %s", s, r.step, r.error)
    header = ["h" if args.study == "space" else "dt"]
    for s in schemes:
        header += [f"{s}_linf", f"{s}_linf_order", f"{s}_l2", f"{s}_l2_order"]
    table = []
    for n, step in enumerate(steps):
        row = [step]
        for s in schemes:
            r = results[s][n]
            row += [r.linf, r.linf_order, r.l2, r.l2_order]
        table.append(row)
    comments = [f"{s} fitted slope linf={v['linf']!r} l2={v['l2']!r}" for s, v in slopes.items()]
    out = Path(args.out_dir)
    write_csv(out / f"mms_{args.study}.csv", digest, header, table, comments)
    write_json(out / f"mms_{args.study}.timing.json", digest, {"wall_time": timing})
    for line in _render(header, table):
        print(line)
    for c in comments:
        print(c)
    failed = any(r.error for rows in results.values() for r in rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def _render(header, rows):
    yield "  ".join(f"{h:>14}" for h in header)
    for r in rows:
        yield "  ".join(f"{'-':>14}" if v is None else f"{v:>14.6g}" for v in r)


def _solvation_config(args, **over) -> SolvationConfig:
    base = {}
    preset = getattr(args, "preset", None)
    if preset:
        base.update(PRESETS[preset])
    for key in ("h", "padding", "temperature", "dt", "t_final", "alpha", "eps_s", "eps_m", "scheme",
                "monitor_every", "init", "grad_scale_bjerrum"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "tol", None) is not None:
        base["energy_tol"] = args.tol
    if getattr(args, "bvp_tol", None) is not None:
        base["bvp_tol"] = args.bvp_tol
    base.update(over)
    try:
        return SolvationConfig(**base)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _run_solver(problem, which: str):
    run = run_adi(problem) if which == "adi" else run_bvp(problem)
    if not finite_report(run):
        raise NumericalFailure(f"{which} produced non-finite energies")
    return run


def _trace_rows(run):
    if run.solver == "adi":
        return (["step", "t", "dG_p", "delta", "max_abs_phi"],
                [[r["step"], r["t"], r["energy"], r["delta"], r["max_abs_phi"]] for r in run.trace])
    return (["iteration", "dG_p", "delta", "inner_iterations"],
            [[r["iteration"], r["energy"], _clean(r["delta"]), r["inner_iterations"]] for r in run.trace])


def _result_dict(run) -> dict:
    d = run.summary()
    d.pop("wall_time")
    return {k: _clean(v) for k, v in d.items()}


def cmd_born(args) -> int:
    system = ChargeSystem.single()
    out = Path(args.out_dir)
    alphas = args.alpha_sweep or [args.alpha if args.alpha is not None else 40.0]
    solvers = ["adi", "bvp"] if args.both_solvers else ["adi"]
    base = _solvation_config(args, alpha=alphas[0])
    cfg = {"subcommand": "born", "solvation": base.to_dict(), "alphas": alphas, "solvers": solvers}
    digest = config_hash(cfg)
    sweep_rows, timing, reports = [], {}, []
    for a in alphas:
        sc = replace(base, alpha=a)
        problem = build_problem(system, sc)
        for which in solvers:
            run = _run_solver(problem, which)
            timing[f"{which}_alpha_{a!r}"] = run.wall_time
            rep = run.report
            sweep_rows.append([a, which, rep.dG_p, rep.area, rep.volume, run.iterations, run.converged])
            reports.append({"alpha": a, **_result_dict(run)})
            header, rows = _trace_rows(run)
            if len(alphas) == 1:
                write_csv(out / f"born_trace_{which}.csv", digest, header, rows)
            print(f"alpha={a:g} {which}: dG_p={rep.dG_p:.4f} kcal/mol area={rep.area:.3f} "
                  f"volume={rep.volume:.3f} converged={run.converged} ({run.wall_time:.1f}s)")
    write_csv(out / "born_sweep.csv", digest,
              ["alpha", "solver", "dG_p", "area", "volume", "iterations", "converged"], sweep_rows)
    write_json(out / "born_report.json", digest, {"config": cfg, "results": reports})
    write_json(out / "born.timing.json", digest, {"wall_time": timing})
    return EXIT_OK


def _load_systems(paths):
    systems = []
    for p in paths:
        try:
            systems.append((Path(p), read_pqr(p)))
        except FileNotFoundError:
            raise InputError(f"{p}: no such file") from None
        except (PQRParseError, EmptySystemError, OSError) as exc:
            raise InputError(f"{p}: {exc}") from None
    return systems


def cmd_solvate(args) -> int:
    systems = _load_systems(args.pqr)
    sc = _solvation_config(args)
    out = Path(args.out_dir)
    outputs, summary, timing = [], [], {}
    for path, system in systems:
        cfg = {"subcommand": "solvate", "pqr": path.name, "n_atoms": len(system.atoms),
               "solvation": sc.to_dict(), "system_hash": config_hash({"pqr": _system_payload(system)}),
               "constants": sc.constants().to_dict()}
        digest = config_hash(cfg)
        problem = build_problem(system, sc)
        run = _run_solver(problem, "adi")
        timing[path.name] = run.wall_time
        result = _result_dict(run)
        header, rows = _trace_rows(run)
        outputs.append((out / f"{path.stem}.json", digest, {"config": cfg, "result": result}))
        outputs.append((out / f"{path.stem}_trace.csv", digest, (header, rows)))
        ref = lookup(path)
        value = run.report.dG_total if args.with_nonpolar else run.report.dG_p
        summary.append((path.stem, value, None if ref is None else ref[0]))
        print(f"{path.name}: dG_p={run.report.dG_p:.4f} G_np={run.report.G_np:.4f} "
              f"dG_total={run.report.dG_total:.4f} kcal/mol converged={run.converged}")
    # nothing is written until every system has been solved
    for path, digest, payload in outputs:
        if path.suffix == ".csv":
            write_csv(path, digest, *payload)
        else:
            write_json(path, digest, payload)
    if len(systems) > 1 or any(r is not None for _, _, r in summary):
        batch = {"solvation": sc.to_dict(), "files": [p.name for p, _ in systems]}
        digest = config_hash(batch)
        matched = [(n, v, r) for n, v, r in summary if r is not None]
        stats = {}
        if matched:
            stats = {"n_matched": len(matched), "quantity": "dG_total" if args.with_nonpolar else "dG_p",
                     "rmse": rmse([v for _, v, _ in matched], [r for _, _, r in matched]),
                     "mean_abs_error": mean_abs_error([v for _, v, _ in matched], [r for _, _, r in matched])}
            print(f"RMSE vs experiment over {len(matched)} compounds: {stats['rmse']:.4f} kcal/mol")
        write_csv(out / "solvate_summary.csv", digest, ["name", "dG", "experimental"],
                  [list(t) for t in summary])
        write_json(out / "solvate_summary.json", digest, {"config": batch, "statistics": stats})
    write_json(out / "solvate.timing.json", config_hash({"files": sorted(timing)}), {"wall_time": timing})
    return EXIT_OK


def _system_payload(system: ChargeSystem):
    return [[list(map(float, a.position)), float(a.charge), float(a.radius)] for a in system.atoms]


def cmd_compare(args) -> int:
    if args.pqr:
        (path, system), = _load_systems([args.pqr])
        name = path.name
    else:
        system, name = ChargeSystem.single(), "unit-atom"
    sc = _solvation_config(args)
    cfg = {"subcommand": "compare", "system": name, "solvation": sc.to_dict(), "solver": args.solver,
           "system_hash": config_hash({"pqr": _system_payload(system)})}
    digest = config_hash(cfg)
    problem = build_problem(system, sc)
    runs = {"adi": _run_solver(problem, "adi")}
    if args.solver == "both":
        runs["bvp"] = _run_solver(problem, "bvp")
    result = {k: _result_dict(r) for k, r in runs.items()}
    timing = {k: r.wall_time for k, r in runs.items()}
    if "bvp" in runs:
        result["dG_p_difference"] = runs["adi"].report.dG_p - runs["bvp"].report.dG_p
        timing["speedup_bvp_over_adi"] = runs["bvp"].wall_time / runs["adi"].wall_time
    out = Path(args.out_dir)
    write_json(out / "compare.json", digest, {"config": cfg, "result": result})
    write_json(out / "compare.timing.json", digest, {"wall_time": timing})
    for k, r in runs.items():
        print(f"{k}: dG_p={r.report.dG_p:.4f} kcal/mol iterations={r.iterations} "
              f"converged={r.converged} wall={r.wall_time:.2f}s")
    if "speedup_bvp_over_adi" in timing:
        print(f"measured time ratio bvp/adi: {timing['speedup_bvp_over_adi']:.2f}")
    return EXIT_OK


# -- argument parser ------------------------------------------------------------------


class UsageError(ValueError):
    pass


class InputError(OSError):
    pass


def _solver_flags(p, with_alpha=True):
    p.add_argument("--h", type=parse_length, help="grid spacing (Angstrom)")
    p.add_argument("--padding", type=float, help="clearance around the atoms (Angstrom)")
    p.add_argument("--temperature", type=float, help="Kelvin")
    p.add_argument("--dt", type=parse_length, help="pseudo-time step")
    p.add_argument("--t-final", dest="t_final", type=parse_length, help="pseudo-time horizon")
    p.add_argument("--tol", type=parse_length, help="successive-energy tolerance (kcal/mol)")
    p.add_argument("--bvp-tol", dest="bvp_tol", type=parse_length, help="oracle energy tolerance (kcal/mol)")
    p.add_argument("--scheme", choices=["eps1", "eps2"])
    p.add_argument("--monitor-every", dest="monitor_every", type=int)
    p.add_argument("--init", choices=["piecewise", "coulomb", "vacuum"], help="ADI starting state")
    p.add_argument("--eps-m", dest="eps_m", type=float)
    p.add_argument("--eps-s", dest="eps_s", type=float)
    p.add_argument("--grad-scale", dest="grad_scale_bjerrum", type=parse_length,
                   help="field scale of the dielectric model, in Bjerrum lengths")
    if with_alpha:
        p.add_argument("--alpha", type=float)
    p.add_argument("--out-dir", default="results")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="npe-adi", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mms-convergence", help="manufactured-solution convergence tables")
    m.add_argument("--study", choices=["space", "time"], required=True)
    m.add_argument("--scheme", choices=["eps1", "eps2", "both"], default="both")
    m.add_argument("--h-list", dest="h_list", type=parse_list, help="comma list, e.g. pi/4,pi/8")
    m.add_argument("--dt-list", dest="dt_list", type=parse_list)
    m.add_argument("--dt", type=parse_length, help="fixed step of the space study (default 0.001)")
    m.add_argument("--h", type=parse_length, help="fixed spacing of the time study (default pi/48)")
    m.add_argument("--forcing", choices=["consistent", "printed"], default="consistent")
    m.add_argument("--out-dir", default="results")
    m.set_defaults(func=cmd_mms_convergence)

    b = sub.add_parser("born", help="unit charge in a unit sphere")
    _solver_flags(b)
    b.add_argument("--alpha-sweep", dest="alpha_sweep", type=parse_alphas)
    b.add_argument("--both-solvers", dest="both_solvers", action="store_true")
    b.set_defaults(func=cmd_born)

    s = sub.add_parser("solvate", help="solvation energies of PQR structures")
    s.add_argument("--pqr", nargs="+", required=True)
    s.add_argument("--preset", choices=sorted(PRESETS), default="compound")
    s.add_argument("--with-nonpolar", dest="with_nonpolar", action="store_true",
                   help="compare dG_total instead of dG_p against the reference")
    _solver_flags(s)
    s.set_defaults(func=cmd_solvate)

    c = sub.add_parser("compare", help="ADI against the alternating BVP solver")
    c.add_argument("--pqr")
    c.add_argument("--solver", choices=["both", "adi-only"], default="both")
    _solver_flags(c)
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PlacementError, SingularBoundaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BlowUpError, InnerSolverError, SingularSystemError, NumericalFailure, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
