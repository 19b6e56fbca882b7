"""Command line front end.

Subcommands::

    spectrum DATA                       spectrum, group generators and Q-basis
    nd-check FLUX (--group G | --data D) non-degeneracy verdict (exit 2 if it fails)
    solve --config CFG                  snapshots, decay.csv, plot script, manifest
    decay --config CFG                  decay experiment verdict (plus solve outputs)
    fejer DATA -r R                     Fejér weights at every spectral line
    counterexample FLUX (--group G | --data D)  traveling wave along a degenerate direction

Exit codes: 0 success, 1 error (stage-tagged message on stderr), 2 negative
verdict (ND fails, no counterexample exists, or a decay claim not confirmed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .apcore import TrigPoly
from .diagnostics import decay_experiment, decay_trace
from .errors import BohrLawError
from .fejer import FejerPlan, FejerWeights
from .flux import PiecewiseFlux, make_counterexample, nd_check
from .lift import LiftSpec
from .schema import (flux_from_json, frequency_from_json, frequency_to_json,
                     group_from_json, group_to_json, nd_report_to_json, qbasis_to_json,
                     rat_to_json, trigpoly_from_json, trigpoly_to_json)
from .solver import CellField, RunConfig, solve
from .specgroup import QBasis, group_generated, qlinear_basis, sorted_spectrum, spectrum

log = logging.getLogger("bohrlaw")

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2
MIN_GRID, MAX_GRID = 16, 8192
BUILTIN_FLUXES = {"burgers": PiecewiseFlux.burgers, "linear": PiecewiseFlux.linear,
                  "cubic": PiecewiseFlux.cubic}


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


# ---------------------------------------------------------------------------
# Config


def _load_json(path: Path, stage: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise StageError(stage, f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise StageError(stage, f"{path}: invalid JSON ({exc})") from exc


def _resolve(obj, root: Path, stage: str):
    """Inline object or a path relative to the config file."""
    if isinstance(obj, str):
        return _load_json(root / obj, stage)
    return obj


def load_flux(obj, root: Path = Path(".")) -> PiecewiseFlux:
    if isinstance(obj, str) and obj in BUILTIN_FLUXES:
        return BUILTIN_FLUXES[obj]()
    try:
        return flux_from_json(_resolve(obj, root, "flux"))
    except (BohrLawError, ValueError, KeyError, TypeError) as exc:
        raise StageError("flux", str(exc)) from exc


def load_data(obj, root: Path = Path("."), base=None) -> TrigPoly:
    d = _resolve(obj, root, "data")
    if base is not None and isinstance(d, dict) and "base" not in d:
        d = dict(d, base=base)
    try:
        return trigpoly_from_json(d)
    except (BohrLawError, ValueError, KeyError, TypeError) as exc:
        raise StageError("data", str(exc)) from exc


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass
class ExperimentConfig:
    flux: PiecewiseFlux
    data: TrigPoly
    grid: tuple[int, ...]
    T: float
    cfl: float = 0.45
    snapshots: tuple[float, ...] = ()
    snapshot_format: str = "csv"
    entropy_k: int = 32
    lift: LiftSpec | None = None
    group: Any = None
    threshold: float = 0.1
    refinement: tuple[int, ...] = (256, 512, 1024)
    sample_times: tuple[float, ...] = (1.0, 5.0, 10.0)
    out: str | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(_load_json(path, "config"), path.parent)

    @classmethod
    def from_dict(cls, d: dict, root: Path = Path(".")) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise StageError("config", "config must be a JSON object")
        for key in ("flux", "data", "T"):
            if key not in d:
                raise StageError("config", f"missing required key {key!r}")
        flux = load_flux(d["flux"], root)
        data = load_data(d["data"], root, d.get("base"))
        grid = d.get("grid", 256)
        grid = tuple(grid) if isinstance(grid, list) else (int(grid),)
        for N in list(grid) + list(d.get("decay", {}).get("refinement", [])):
            if not isinstance(N, int) or not _is_pow2(N) or not MIN_GRID <= N <= MAX_GRID:
                raise StageError("config", f"grid size {N} must be a power of two in [{MIN_GRID}, {MAX_GRID}]")
        T = float(d["T"])
        if not T >= 0:
            raise StageError("config", "T must be nonnegative")
        lift = None
        if "lift" in d:
            try:
                lift = LiftSpec([frequency_from_json(v, data.base, data.dims) for v in d["lift"]])
            except BohrLawError as exc:
                raise StageError("config", f"lift: {exc}") from exc
        group = None
        if "group" in d:
            try:
                group = group_from_json(_resolve(d["group"], root, "group"))
            except BohrLawError as exc:
                raise StageError("config", f"group: {exc}") from exc
        dec = d.get("decay", {})
        fmt = d.get("snapshot_format", "csv")
        if fmt not in ("csv", "bin"):
            raise StageError("config", f"snapshot_format must be 'csv' or 'bin', got {fmt!r}")
        return cls(
            flux=flux, data=data, grid=grid, T=T, cfl=float(d.get("cfl", 0.45)),
            snapshots=tuple(float(t) for t in d.get("snapshots", ())), snapshot_format=fmt,
            entropy_k=int(d.get("entropy_k", 32)), lift=lift, group=group,
            threshold=float(dec.get("threshold", 0.1)),
            refinement=tuple(dec.get("refinement", (256, 512, 1024))),
            sample_times=tuple(float(t) for t in dec.get("sample_times", (1.0, 5.0, 10.0))),
            out=d.get("out"), raw=d,
        )

    def run_config(self, m: int) -> RunConfig:
        grid = self.grid * m if len(self.grid) == 1 else self.grid
        try:
            return RunConfig(grid=grid, T=self.T, cfl=self.cfl, snapshots=self.snapshots,
                             entropy_k=self.entropy_k)
        except BohrLawError as exc:
            raise StageError("config", str(exc)) from exc

    def echo(self) -> dict:
        """Fully resolved config (files inlined) for the manifest."""
        out = {k: v for k, v in self.raw.items() if k not in ("flux", "data", "group", "out")}
        from .schema import flux_to_json
        out["flux"] = flux_to_json(self.flux)
        out["data"] = trigpoly_to_json(self.data)
        if self.group is not None:
            out["group"] = group_to_json(self.group)
        return out


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(v: float) -> str:
    return "%.17g" % v


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"], cwd=here,
                             capture_output=True, text=True, timeout=5, check=False)
        if res.returncode == 0 and res.stdout.strip():
            return f"{__version__}+g{res.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def snapshot_csv(f: CellField) -> str:
    lines = [f"# grid={'x'.join(map(str, f.shape))} t={_fmt(f.t)} u_min={_fmt(f.bounds[0])} "
             f"u_max={_fmt(f.bounds[1])}"]
    idx_cols = [f"i{j}" for j in range(f.m)]
    lines.append(",".join(idx_cols + ["value"]))
    for idx in np.ndindex(*f.shape):
        lines.append(",".join([str(i) for i in idx] + [_fmt(f.values[idx])]))
    return "\n".join(lines) + "\n"


def snapshot_bin(f: CellField) -> bytes:
    header = json.dumps({"grid": list(f.shape), "t": f.t, "bounds": list(f.bounds),
                         "dtype": "<f8", "order": "C"}, sort_keys=True)
    return header.encode() + b"\n" + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def plot_script(csv_name: str) -> str:
    return (
        "# gnuplot script: decay of the mean deviation\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 't'\n"
        "set ylabel 'D(t)'\n"
        "set logscale y\n"
        f"plot '{csv_name}' using 1:2 with lines title 'D(t)'\n"
    )


class OutputDir:
    """Collects files written by one command and hashes them for the manifest."""

    def __init__(self, path: Path):
        self.path = path
        self.files: dict[str, str] = {}
        path.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, content: str | bytes):
        data = content.encode() if isinstance(content, str) else content
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "wb") as fh:
            fh.write(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj):
        self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def manifest(self, command: str, cfg: ExperimentConfig | None, seed: int):
        self.write_json("manifest.json", {
            "command": command,
            "version": version_string(),
            "seed": seed,
            "config": cfg.echo() if cfg else None,
            "files": dict(sorted(self.files.items())),
        })


def _print_json(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Commands


def _basis_for(p: TrigPoly) -> QBasis:
    return qlinear_basis(lam for lam in sorted_spectrum(p) if lam.is_positive())


def cmd_spectrum(args) -> int:
    p = load_data(args.data)
    lines = sorted_spectrum(p)
    G = group_generated(spectrum(p), p.base, p.dims)
    result = {
        "spectrum": [frequency_to_json(l) for l in lines],
        "spectrum_real": [[float(v) for v in l.real] for l in lines],
        "group": group_to_json(G),
        "basis": qbasis_to_json(_basis_for(p)),
    }
    _print_json(result)
    if args.out:
        OutputDir(Path(args.out)).write_json("spectrum.json", result)
    return EXIT_OK


def _group_arg(args, n: int):
    if args.group:
        try:
            return group_from_json(_load_json(Path(args.group), "group"))
        except BohrLawError as exc:
            raise StageError("group", str(exc)) from exc
    if args.data:
        p = load_data(args.data)
        return group_generated(spectrum(p), p.base, p.dims)
    raise StageError("args", "give --group or --data")


def cmd_ndcheck(args) -> int:
    phi = load_flux(args.flux)
    G = _group_arg(args, phi.dims)
    if G.n != phi.dims:
        raise StageError("nd-check", f"flux has {phi.dims} components but the group lives in R^{G.n}")
    report = nd_check(phi, G)
    _print_json(nd_report_to_json(report))
    if args.out:
        OutputDir(Path(args.out)).write_json("nd.json", nd_report_to_json(report))
    return EXIT_OK if report.holds else EXIT_NEGATIVE


def _config(args) -> ExperimentConfig:
    if not args.config:
        raise StageError("config", "this command needs --config")
    return ExperimentConfig.from_file(args.config)


def _out_dir(args, cfg: ExperimentConfig | None) -> OutputDir:
    out = args.out or os.environ.get("BOHRLAW_OUT") or (cfg.out if cfg else None) or "out"
    return OutputDir(Path(out))


def _write_run(out: OutputDir, run, fmt: str):
    for i, snap in enumerate(run.snapshots):
        if fmt == "csv":
            out.write(f"snapshots/snap_{i:04d}.csv", snapshot_csv(snap))
        else:
            out.write(f"snapshots/snap_{i:04d}.bin", snapshot_bin(snap))
    out.write("decay.csv", decay_trace(run).to_csv())
    out.write("plot_decay.gp", plot_script("decay.csv"))


def _lift(cfg: ExperimentConfig) -> LiftSpec:
    try:
        return cfg.lift or LiftSpec.for_poly(cfg.data)
    except BohrLawError as exc:
        raise StageError("lift", str(exc)) from exc


def cmd_solve(args) -> int:
    cfg = _config(args)
    lift = _lift(cfg)
    try:
        run = solve(cfg.data, lift, cfg.flux, cfg.run_config(lift.m))
    except BohrLawError as exc:
        raise StageError("solve", str(exc)) from exc
    out = _out_dir(args, cfg)
    _write_run(out, run, cfg.snapshot_format)
    out.manifest("solve", cfg, args.seed)
    last = run.steps[-1]
    sys.stdout.write(f"t={_fmt(last.t)} D={_fmt(last.D)} steps={len(run.steps) - 1}\n")
    return EXIT_OK


def cmd_decay(args) -> int:
    cfg = _config(args)
    p = cfg.data
    G = cfg.group or group_generated(spectrum(p), p.base, p.dims)
    lift = _lift(cfg)
    try:
        v = decay_experiment(cfg.flux, G, p, cfg.run_config(lift.m), cfg.threshold,
                             cfg.refinement, cfg.sample_times)
    except BohrLawError as exc:
        raise StageError("decay", str(exc)) from exc
    out = _out_dir(args, cfg)
    if v.trace is not None:
        out.write("decay.csv", v.trace.to_csv())
        out.write("plot_decay.gp", plot_script("decay.csv"))
    out.write_json("verdict.json", v.to_dict())
    out.manifest("decay", cfg, args.seed)
    sys.stdout.write(f"{v.verdict}\n")
    return EXIT_OK if v.passed else EXIT_NEGATIVE


def cmd_fejer(args) -> int:
    p = load_data(args.data)
    try:
        if args.basis:
            raw = _load_json(Path(args.basis), "basis")
            basis = QBasis([frequency_from_json(v, p.base, p.dims) for v in raw])
        else:
            basis = _basis_for(p)
        if not len(basis):
            basis = QBasis([LiftSpec.from_group(group_generated([], p.base, p.dims)).vectors[0]])
        W = FejerWeights(FejerPlan(basis, args.r))
    except BohrLawError as exc:
        raise StageError("fejer", str(exc)) from exc
    rows = []
    lines = sorted_spectrum(p) or [group_generated([], p.base, p.dims).element([])]
    for lam in lines:
        lk = W.lookup(lam)
        rows.append({
            "frequency": frequency_to_json(lam),
            "frequency_real": [float(v) for v in lam.real],
            "index": [rat_to_json(k) for k in lk.index],
            "weight": rat_to_json(lk.weight),
            "weight_decimal": float(lk.weight),
            "status": "ok" if lk.in_range else "outside index range",
        })
    result = {"r": args.r, "basis": qbasis_to_json(basis), "lines": rows}
    _print_json(result)
    if args.out:
        OutputDir(Path(args.out)).write_json("fejer.json", result)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    phi = load_flux(args.flux)
    G = _group_arg(args, phi.dims)
    if G.n != phi.dims:
        raise StageError("counterexample", f"flux has {phi.dims} components but the group lives in R^{G.n}")
    report = nd_check(phi, G)
    if report.holds:
        _print_json({"nd": nd_report_to_json(report), "counterexample": None})
        return EXIT_NEGATIVE
    from .diagnostics import _default_profile, exact_decay
    try:
        u0, wave = make_counterexample(phi, report, _default_profile(report.witness.interval))
    except BohrLawError as exc:
        raise StageError("counterexample", str(exc)) from exc
    times = [0.0] + [float(t) for t in args.times]
    result = {
        "nd": nd_report_to_json(report),
        "counterexample": trigpoly_to_json(u0),
        "speed": wave.alpha,
        "exact": [{"t": t, "D": d} for t, d in exact_decay(wave, times)],
    }
    _print_json(result)
    if args.out:
        OutputDir(Path(args.out)).write_json("counterexample.json", result)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="experiment config JSON")
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--threads", type=int, default=d if suppress else 1, help="BLAS/OpenMP thread cap")
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="seed for randomized batteries")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bohrlaw", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        _global_flags(sp, suppress=True)
        sp.set_defaults(func=fn)
        return sp

    sp = add("spectrum", cmd_spectrum, "spectrum, group and Q-basis of a polynomial")
    sp.add_argument("data")
    sp = add("nd-check", cmd_ndcheck, "non-degeneracy check (exit 2 if it fails)")
    sp.add_argument("flux")
    sp.add_argument("--group")
    sp.add_argument("--data")
    add("solve", cmd_solve, "run the lifted solver")
    add("decay", cmd_decay, "decay experiment verdict")
    sp = add("fejer", cmd_fejer, "Fejér weights at the spectral lines")
    sp.add_argument("data")
    sp.add_argument("-r", type=int, required=True)
    sp.add_argument("--basis", help="JSON list of basis frequencies")
    sp = add("counterexample", cmd_counterexample, "traveling wave along a degenerate direction")
    sp.add_argument("flux")
    sp.add_argument("--group")
    sp.add_argument("--data")
    sp.add_argument("--times", type=float, nargs="*", default=[1.0, 5.0, 10.0])
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.seed < 0 or args.seed >= 2**64:
        sys.stderr.write("error [args]: --seed must be an unsigned 64-bit integer\n")
        return EXIT_ERROR
    if args.threads < 1:
        sys.stderr.write("error [args]: --threads must be positive\n")
        return EXIT_ERROR
    from threadpoolctl import threadpool_limits
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except StageError as exc:
        sys.stderr.write(f"error [{exc.stage}]: {exc}\n")
    except BohrLawError as exc:
        sys.stderr.write(f"error [{args.command}]: {exc}\n")
    except OSError as exc:
        sys.stderr.write(f"error [output]: {exc}\n")
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
