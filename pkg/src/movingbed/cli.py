"""Command-line surface wiring the analysis modules to CSV/JSON artifacts.

Subcommands: analyze, spectrum, simulate, sensitivity, limit, steady,
delta-scan.  Every run writes a manifest.json into the output directory
echoing the command, parameters, and tolerances, so artifacts are
reproducible byte for byte (nothing in the toolkit is randomized).

Exit codes: 0 success, 2 parameter/validation problems (including
malformed JSON), 3 numerical failures (no bracket, singular system),
4 I/O errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import sim as simmod
from .charfun import return_map
from .eigfun import (adjoint_eigenfunction, eigenfunction, evaluate,
                     steady_state)
from .errors import (InsufficientSamples, NumericalError, ValidationError)
from .params import (ModelParams, case_study, limit_params, load_params,
                     params_to_dict)
from .sensitivity import full_report
from .spectrum import (collocation_spectrum, dominant_eigenvalue,
                       imaginary_vanishing_k, limit_residual, limit_spectrum,
                       real_root_scan, threads_from_env)

_PRESETS = {"case-study": case_study, "limit": limit_params}


def _fmt(x) -> str:
    """Full double precision, stable across runs."""
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row) + "\n")


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _load_params(args) -> ModelParams:
    if args.params is not None:
        p = load_params(args.params)
    else:
        p = _PRESETS[args.preset]()
    if args.f0 is not None:
        p = replace(p, f0=args.f0)
    return p


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(args, out: Path, command: str, tolerances: dict) -> None:
    flags = {k: v for k, v in sorted(vars(args).items())
             if k != "func" and v is not None}
    _write_json(out / "manifest.json", {
        "command": command,
        "version": __version__,
        "params": params_to_dict(_load_params(args)),
        "params_path": args.params,
        "output_dir": str(out),
        "deterministic": True,
        "tolerances": tolerances,
        "flags": flags,
    })


def _profile_rows(samples):
    return [(_fmt(x), _fmt(c.real), _fmt(c.imag), _fmt(q.real),
             _fmt(q.imag), side)
            for x, c, q, side in zip(samples.x, samples.c, samples.q,
                                     samples.side)]


_PROFILE_HEADER = ["x", "c_re", "c_im", "q_re", "q_im", "side"]


def _solution_json(sol) -> dict:
    return {
        "lambda": _pair(sol.lam),
        "kind": sol.kind,
        "residual": float(sol.residual),
        "normalization": sol.normalization,
        "coeffs": [_pair(z) for z in sol.coeffs],
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    summary: dict = {"version": __version__}
    if params.limit_case:
        lam0 = 0.0
        summary["note"] = ("equal velocities: dominant eigenvalue is 0 "
                           "exactly; sensitivities skipped")
        summary["sensitivities"] = None
    else:
        lam0 = dominant_eigenvalue(params, tol=args.tol)
    summary["lambda0"] = lam0
    if params.physical is not None:
        summary["time_constant_min"] = (
            params.physical.L_column
            / (params.physical.u_s * abs(lam0))) if lam0 != 0 else None
    direct = eigenfunction(lam0, params)
    adjoint = adjoint_eigenfunction(lam0, params)
    summary["direct"] = _solution_json(direct)
    summary["adjoint"] = _solution_json(adjoint)
    _write_csv(out / "direct_profile.csv", _PROFILE_HEADER,
               _profile_rows(evaluate(direct, args.grid)))
    _write_csv(out / "adjoint_profile.csv", _PROFILE_HEADER,
               _profile_rows(evaluate(adjoint, args.grid)))
    if not params.limit_case:
        rep = full_report(params, tol=args.tol)
        summary["sensitivities"] = {
            "dv": [z.real for z in rep.dv],
            "dR": rep.dR.real,
            "dP": rep.dP.real,
            "fd_rel_err": list(rep.fd_check),
        }
    _write_json(out / "analyze_summary.json", summary)
    _manifest(args, out, "analyze", {"tol": args.tol})
    return 0


def cmd_spectrum(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    lo, hi = args.range
    threads = threads_from_env()
    rows = []
    for root, blo, bhi in real_root_scan(params, (lo, hi), grid_n=args.grid,
                                         tol=args.tol, threads=threads,
                                         with_brackets=True):
        residual = abs(return_map(root, params)._delta_parts[0])
        rows.append((root, residual, blo, bhi))
    _write_csv(out / "real_roots.csv",
               ["lambda", "residual", "bracket_lo", "bracket_hi"], rows)
    crows = []
    for N in (30, 45):
        for z in collocation_spectrum(params, N=N):
            crows.append((z.real, z.imag, N))
    _write_csv(out / "collocation.csv", ["re", "im", "N"], crows)
    _manifest(args, out, "spectrum",
              {"tol": args.tol, "range": [lo, hi], "grid": args.grid})
    return 0


def cmd_limit(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    table = limit_spectrum(params, k_max=args.grid)
    _write_csv(out / "limit_spectrum.csv",
               ["k", "re_plus", "im_plus", "re_minus", "im_minus"],
               [(e.k, e.lambda_plus.real, e.lambda_plus.imag,
                 e.lambda_minus.real, e.lambda_minus.imag) for e in table])
    k0 = next(e for e in table if e.k == 0)
    _write_json(out / "limit_summary.json", {
        "lambda0_plus": _pair(k0.lambda_plus),
        "lambda0_minus": _pair(k0.lambda_minus),
        "k_star": imaginary_vanishing_k(params),
        "max_residual": max(
            max(limit_residual(e.lambda_plus, params),
                limit_residual(e.lambda_minus, params))
            for e in table if abs(e.k) <= min(args.grid, 20)),
    })
    _manifest(args, out, "limit", {"k_max": args.grid})
    return 0


def cmd_sensitivity(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    rep = full_report(params, tol=args.tol)
    _write_json(out / "sensitivity.json", {
        "lambda0": rep.lam.real,
        "dv": [z.real for z in rep.dv],
        "dR": rep.dR.real,
        "dP": rep.dP.real,
        "fd_rel_err": list(rep.fd_check),
    })
    _manifest(args, out, "sensitivity", {"tol": args.tol})
    return 0


def cmd_steady(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    sol = steady_state(params)
    samples = evaluate(sol, args.grid)
    _write_csv(out / "steady_profile.csv", _PROFILE_HEADER,
               _profile_rows(samples))
    _write_json(out / "steady_summary.json", {
        "f0": params.f0,
        "c_min": float(samples.c.real.min()),
        "c_max": float(samples.c.real.max()),
        "q_min": float(samples.q.real.min()),
        "q_max": float(samples.q.real.max()),
        "residual": float(sol.residual),
    })
    _manifest(args, out, "steady", {})
    return 0


def cmd_simulate(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    config = simmod.SimConfig(Nx=args.Nx, p=args.p, T=args.T,
                              record_every=args.record_every,
                              strang=args.strang)
    eigen_profile = None
    if params.strict_ports and params.f0 == 0.0:
        eigen_profile = simmod.sample_eigenfunction(params, args.Nx)
    state = simmod.init(config, params, args.initial)
    state, rows = simmod.run(state, config, params,
                             eigen_profile=eigen_profile)
    _write_csv(out / "diagnostics.csv",
               ["t", "energy", "mass", "sup_norm", "profile_rms"],
               [(r.t, r.energy, r.mass, r.sup_norm,
                 "" if r.profile_rms is None else _fmt(r.profile_rms))
                for r in rows])
    xs = simmod.cell_centers(args.Nx)
    snap = [(zone + 1, j + 1, xs[zone, j], state.c[zone, j + 1],
             state.q[zone, j + 1])
            for zone in range(4) for j in range(args.Nx)]
    _write_csv(out / "snapshot_final.csv", ["zone", "cell", "x", "c", "q"],
               snap)
    summary = {"T": args.T, "Nx": args.Nx, "dt": state.dt,
               "steps": len(rows), "final_sup_norm": rows[-1].sup_norm,
               "final_energy": rows[-1].energy, "final_mass": rows[-1].mass}
    try:
        summary["decay_rate"] = simmod.decay_rate(
            rows, (args.T / 3.0, args.T))
    except InsufficientSamples:
        summary["decay_rate"] = None
    _write_json(out / "simulate_summary.json", summary)
    _manifest(args, out, "simulate",
              {"Nx": args.Nx, "p": args.p, "T": args.T,
               "record_every": args.record_every})
    return 0


def cmd_delta_scan(args) -> int:
    params = _load_params(args)
    out = _outdir(args)
    lo, hi = args.range
    if args.grid < 1:
        raise ValidationError(f"need at least one scan point, got {args.grid}")
    lams = np.linspace(lo, hi, args.grid) if args.grid > 1 \
        else np.array([lo])
    rows = []
    for lam in lams:
        ev = return_map(float(lam), params)
        sign = ev.delta_sign
        log_abs = ev.log_abs_delta
        if log_abs > 700.0:
            d = math.inf * sign
        else:
            d = sign * math.exp(log_abs)
        atan_delta = (2.0 / math.pi) * math.atan(d)
        rows.append((lam, d, atan_delta, sign, log_abs, ev.trace_log,
                     ev.det_log.real))
    _write_csv(out / "delta_scan.csv",
               ["lambda", "delta", "atan_delta", "sign", "log_abs_delta",
                "trace_log", "det_log"], rows)
    _manifest(args, out, "delta-scan",
              {"range": [lo, hi], "grid": args.grid})
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def _range_arg(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected lo:hi, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="movingbed",
        description="Spectral analysis and simulation of a four-zone "
                    "countercurrent adsorption loop.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON parameter file")
    common.add_argument("--preset", choices=sorted(_PRESETS),
                        default="case-study",
                        help="built-in parameter set (default: case-study)")
    common.add_argument("--out", default="tmb_out",
                        help="output directory (default: tmb_out)")
    common.add_argument("--f0", type=float, default=None,
                        help="override the feed strength")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="root-finding tolerance (default: 1e-10)")

    p = sub.add_parser("analyze", parents=[common],
                       help="eigenvalue, eigenfunctions, sensitivities")
    p.add_argument("--grid", type=int, default=101,
                   help="profile samples per zone")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", parents=[common],
                       help="real-axis root scan + collocation spectrum")
    p.add_argument("--range", type=_range_arg, default=(-30.0, 0.0),
                   help="real-axis scan interval lo:hi (default -30:0)")
    p.add_argument("--grid", type=int, default=400,
                   help="scan grid density")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("limit", parents=[common],
                       help="closed-form equal-velocity spectrum")
    p.add_argument("--grid", type=int, default=80, help="max branch index k")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("sensitivity", parents=[common],
                       help="adjoint-method parameter derivatives")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("steady", parents=[common],
                       help="forced steady-state profile")
    p.add_argument("--grid", type=int, default=101,
                   help="profile samples per zone")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("simulate", parents=[common],
                       help="operator-splitting time integration")
    p.add_argument("--Nx", type=int, default=400, help="cells per zone")
    p.add_argument("--p", type=float, default=None,
                   help="Courant parameter (default 0.9/max(v,1))")
    p.add_argument("--T", type=float, default=60.0, help="final time")
    p.add_argument("--record-every", type=int, default=50,
                   help="steps between diagnostics rows")
    p.add_argument("--initial", default="constant",
                   choices=["constant", "zero", "eigenfunction"],
                   help="initial condition preset")
    p.add_argument("--strang", action="store_true",
                   help="symmetrized splitting")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("delta-scan", parents=[common],
                       help="characteristic function along the real axis")
    p.add_argument("--range", type=_range_arg, default=(-30.0, 10.0),
                   help="lambda interval lo:hi (default -30:10)")
    p.add_argument("--grid", type=int, default=601, help="number of points")
    p.set_defaults(func=cmd_delta_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed parameter file: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
