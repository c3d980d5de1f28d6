"""Command-line front end.

    fewbody solve run.json [--format json|csv] [--out PATH]
    fewbody bench run.json --nmax-list 6,10,20,30 [--format ...] [--out PATH]

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunSpec, build_observ, build_params, parse_config
from .errors import NumericalFailure, ValidationError
from .gem2b import (
    csm_resonances,
    density_on_grid,
    fit_potential_and_ranges,
    optimize_ranges,
    scale_potential_to_energy,
    solve_2b,
    wavefunction_on_grid,
)
from .gem3b1d import solve_3b1d
from .isgl3d import solve_3b3d

__all__ = ["run", "emit_report", "bench", "main"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _floats(values) -> list:
    return [float(v) for v in values]


def _energy_fields(energies, limit) -> dict:
    E = np.asarray(energies)[:limit]
    if np.iscomplexobj(E):
        return {"energies": _floats(E.real), "widths": _floats(-2.0 * E.imag)}
    return {"energies": _floats(E)}


def _run_two_body(spec: RunSpec, pp, np_, report: dict) -> None:
    flags = spec.flags
    if flags["optimize"]:
        k = flags["optimize"]["stateindex"]
        r1, rn, e = optimize_ranges(pp, np_, k)
        np_ = replace(np_, r1=r1, rnmax=rn)
        report["optimized"] = {"stateindex": k, "r1": r1, "rnmax": rn, "energy": e}
    if flags["invert"]:
        inv = flags["invert"]
        if inv["optimize_ranges"]:
            pp, np_, scale = fit_potential_and_ranges(pp, np_, inv["stateindex"], inv["target_E"])
        else:
            scale = scale_potential_to_energy(pp, np_, inv["stateindex"], inv["target_E"])
            pp = pp.scaled(scale)
        report["inverted"] = {"stateindex": inv["stateindex"], "target_E": inv["target_E"], "scale": scale,
                              "r1": np_.r1, "rnmax": np_.rnmax}
    limit = spec.output["nstates"]
    if flags["csm"]:
        opts = flags["csm"]
        emax = math.inf if opts["emax"] is None else opts["emax"]
        spectrum, res = csm_resonances(pp, np_, np_.theta_csm, opts["delta_arg"], emax, cr=flags["cr"])
        report.update(_energy_fields(spectrum.energies, limit))
        report["resonances"] = [[float(e.real), float(-2.0 * e.imag)] for e in res]
    else:
        spectrum = solve_2b(pp, np_, wf=flags["wf"], cr=flags["cr"])
        report.update(_energy_fields(spectrum.energies, limit))
        report["l"] = [int(t) for t in spectrum.channels[:limit]]
    report["kept_dim"] = int(spectrum.kept_dim)
    if flags["wf"] and not flags["csm"]:
        grid = spec.grid
        rmax = grid["rmax"] or np_.rnmax
        r = np.linspace(0.0, rmax, grid["npts"])
        nstates = min(grid["nstates"], len(spectrum.energies))
        dens = []
        for k in range(nstates):
            psi = wavefunction_on_grid(r, pp, np_, spectrum.vectors[:, k], flags["cr"], int(spectrum.channels[k]))
            dens.append(density_on_grid(r, pp, psi))
        step = r[1] - r[0]
        report["wavefunctions"] = {
            "r": _floats(r),
            "densities": [_floats(d) for d in dens],
            "norms": [float(np.sum(d) * step) for d in dens],
        }


def _channel_list(channels) -> list:
    return [{"set": c.set_index, "l": c.l, "L": c.L, "terms": [[s, w] for s, w in c.terms]} for c in channels]


def _run_three_body(spec: RunSpec, pp, np_, report: dict) -> None:
    flags = spec.flags
    csm = bool(flags["csm"])
    limit = spec.output["nstates"]
    if spec.problem == "three_body_1d":
        spectrum = solve_3b1d(pp, np_, csm=csm, want_vectors=flags["wf"])
        obs = None
    else:
        spectrum, obs = solve_3b3d(pp, np_, build_observ(spec), want_wf=flags["wf"], csm=csm)
    report.update(_energy_fields(spectrum.energies, limit))
    report["kept_dim"] = int(spectrum.kept_dim)
    report["basis_size"] = int(spectrum.extra["basis_size"])
    report["channels"] = _channel_list(spectrum.extra["channels"])
    if obs is not None:
        obs["labels"] = spec.observ["centobs"]
        report["observables"] = obs
    if flags["wf"]:
        n = min(spec.grid["nstates"], spectrum.vectors.shape[1])
        V = spectrum.vectors[:, :n]
        report["coefficients"] = [_floats(V[:, k].real) for k in range(n)]


def run(spec: RunSpec, base_dir: str | Path | None = None) -> dict:
    """Solve ``spec`` and return a report dictionary."""
    start = time.perf_counter()
    pp, np_ = build_params(spec, Path(base_dir) if base_dir is not None else None)
    report: dict = {"problem": spec.problem}
    if spec.problem == "two_body":
        _run_two_body(spec, pp, np_, report)
    else:
        _run_three_body(spec, pp, np_, report)
    report["wall_time"] = time.perf_counter() - start
    return report


def _csv_rows(report: dict) -> tuple[list, list]:
    if "rows" in report:  # benchmark table
        cols = ["nmax", "basis_size", "kept_dim", "runtime", "eigenvalue"]
        return cols, [[row[c] for c in cols] for row in report["rows"]]
    cols = ["state", "energy"]
    extra = [k for k in ("widths", "l") if k in report]
    cols += ["width" if k == "widths" else k for k in extra]
    rows = []
    for i, e in enumerate(report["energies"]):
        rows.append([i + 1, e] + [report[k][i] for k in extra])
    return cols, rows


def _density_files(report: dict, path: Path) -> list[Path]:
    wf = report.get("wavefunctions")
    if not wf:
        return []
    written = []
    for k, dens in enumerate(wf["densities"], start=1):
        target = path.with_name(f"{path.stem}.density{k}.dat")
        lines = ["# r density"] + [f"{r!r} {d!r}" for r, d in zip(wf["r"], dens)]
        target.write_text("\n".join(lines) + "\n")
        written.append(target)
    return written


def emit_report(report: dict, fmt: str = "json", path: str | Path | None = None) -> str:
    """Serialize ``report``; write it to ``path`` (plus density files) when given."""
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        cols, rows = _csv_rows(report)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
        text = buf.getvalue()
    else:
        raise ValidationError(f"unknown output format {fmt!r}")
    if path is not None:
        path = Path(path)
        path.write_text(text)
        _density_files(report, path)
    return text


def bench(spec: RunSpec, nmax_list, base_dir=None) -> dict:
    """Lowest eigenvalue and runtime for each ``nmax`` (``Nmax`` follows for three bodies)."""
    rows = []
    for n in nmax_list:
        num = dict(spec.num, nmax=int(n))
        if spec.problem != "two_body":
            num["Nmax"] = int(n)
        trial = replace(spec, num=num, flags=dict(spec.flags, wf=False), observ=None)
        report = run(trial, base_dir)
        size = report.get("basis_size", len(report["energies"]))
        rows.append({
            "nmax": int(n),
            "basis_size": int(size),
            "kept_dim": report["kept_dim"],
            "runtime": report["wall_time"],
            "eigenvalue": report["energies"][0],
        })
    return {"problem": spec.problem, "rows": rows}


def _parse_nmax_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"--nmax-list must be comma-separated integers, got {text!r}") from exc
    if not values or any(v < 2 for v in values):
        raise ValidationError("--nmax-list needs integers >= 2")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fewbody", description="Gaussian-expansion few-body solvers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "bench"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        if name == "bench":
            p.add_argument("--nmax-list", default="6,10,20,30")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
        spec = parse_config(text, path.parent)
        fmt = args.format or spec.output["format"]
        out = args.out or spec.output["path"]
        if args.command == "solve":
            report = run(spec, path.parent)
        else:
            report = bench(spec, _parse_nmax_list(args.nmax_list), path.parent)
        text = emit_report(report, fmt, out)
        if out is None:
            sys.stdout.write(text)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
