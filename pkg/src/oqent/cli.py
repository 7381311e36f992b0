"""Command-line entry point: calibration, sweeps, basis optimization and table dumps.

Exit codes: 0 success, 1 bad arguments or config, 2 I/O failure, 3 calibration
or search failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dqd
from .circuits import ideal_sweep, psi_alpha
from .measure import rotated_pair
from .oq import marginal_oq, oq_table
from .optimize import optimize_basis, strength_sweep
from .qcore import density_matrix
from .records import FIDELITY_COLUMNS, IDEAL_COLUMNS, STRENGTH_COLUMNS, SURFACE_COLUMNS, write_csv, write_records

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CALIBRATION = 0, 1, 2, 3
DEFAULT_DELTA_J = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    config_path: Path | None
    out_dir: Path
    alpha_steps: int = 181
    tau_steps: int = 41
    delta_j: tuple[float, ...] = DEFAULT_DELTA_J
    angles: tuple[float, float] | None = None  # None means optimize per delta_j
    dt: float | None = None
    workers: int = 1
    rwa: bool = False
    alpha: float = math.pi / 2
    surface: bool = False

    def __post_init__(self):
        if self.alpha_steps < 2 or self.tau_steps < 2:
            raise UsageError("grid sizes must be at least 2")
        if not self.delta_j:
            raise UsageError("--delta-j needs at least one value")
        if any(not 0.0 <= d <= 1.0 for d in self.delta_j):
            raise UsageError("--delta-j values must lie in [0, 1]")
        if self.workers < 1:
            raise UsageError("--workers must be positive")
        if self.dt is not None and not self.dt > 0:
            raise UsageError("--dt must be positive")


def percent_tag(delta_j: float) -> str:
    """``0.1 -> 'dJ10'``, ``0.125 -> 'dJ12p5'``."""
    return "dJ" + f"{round(delta_j * 100, 6):g}".replace(".", "p")


def _parse_angles(text: str) -> tuple[float, float] | None:
    if text == "auto":
        return None
    try:
        t1, t2 = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--angles must be 'auto' or 'theta1,theta2', got {text!r}") from None
    for t in (t1, t2):
        if not 0.0 <= t <= math.pi / 2:
            raise UsageError("angles must lie in [0, pi/2]")
    return t1, t2


def _parse_delta_j(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--delta-j must be a comma-separated list of numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="device parameter file (key = value lines)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--alpha-steps", type=int, default=181)
    common.add_argument("--tau-steps", type=int, default=41)
    common.add_argument("--delta-j", default=",".join(f"{d:g}" for d in DEFAULT_DELTA_J), help="comma-separated exchange errors")
    common.add_argument("--angles", default="auto", help="'auto' or 'theta1,theta2' in radians")
    common.add_argument("--dt", type=float, help="integration step in seconds")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--rwa", action="store_true", help="integrate in the rotating frame (fast path)")

    parser = _Parser(prog="oqent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ideal-sweep", parents=[common], help="marginal OQ vs negativity for the ideal state family")
    sub.add_parser("dqd-sweep", parents=[common], help="noisy DQD strength and fidelity sweeps")
    opt = sub.add_parser("optimize-basis", parents=[common], help="optimal measurement angles per delta_j")
    opt.add_argument("--surface", action="store_true", help="also dump the coarse strength surface")
    sub.add_parser("calibrate", parents=[common], help="calibrate drives and write them back to --config")
    dump = sub.add_parser("dump-oq", parents=[common], help="print OQ and marginal tables of |psi(alpha)>")
    dump.add_argument("--alpha", type=float, default=math.pi / 2)
    return parser


def _run_config(args) -> RunConfig:
    angles = _parse_angles(args.angles)
    return RunConfig(
        config_path=args.config,
        out_dir=args.out,
        alpha_steps=args.alpha_steps,
        tau_steps=args.tau_steps,
        delta_j=_parse_delta_j(args.delta_j),
        angles=angles,
        dt=args.dt,
        workers=args.workers,
        rwa=args.rwa,
        alpha=getattr(args, "alpha", math.pi / 2),
        surface=getattr(args, "surface", False),
    )


def _load_params(cfg: RunConfig) -> dqd.DqdParams:
    if cfg.config_path is None:
        return dqd.DqdParams()
    return dqd.load_params(cfg.config_path)


def _calibrated(cfg: RunConfig) -> dqd.DqdParams:
    params = _load_params(cfg)
    if not params.rx_calibrated:
        params = dqd.calibrate_rx(params, rwa=cfg.rwa, dt=cfg.dt)
    if not params.cnot_calibrated:
        params = dqd.calibrate_cnot(params, rwa=cfg.rwa, dt=cfg.dt)
    return params


def _out_dir(cfg: RunConfig) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir


def cmd_ideal_sweep(cfg: RunConfig) -> Path:
    records = ideal_sweep(cfg.alpha_steps)
    path = write_records(_out_dir(cfg) / "ideal_sweep.csv", IDEAL_COLUMNS, records)
    peak = max(records, key=lambda r: r.raw)
    print(f"wrote {path} ({len(records)} rows; max raw {peak.raw:.6f} at alpha {peak.alpha_rad:.6f} rad)")
    return path


def _optimum_at_tau(params, cfg: RunConfig, delta_j: float, keep_surface: bool = False):
    rho, _, _ = dqd.run_circuit(params, params.rx_time, dqd.NoiseSetting(delta_j), rwa=cfg.rwa, dt=cfg.dt)
    return optimize_basis(rho, keep_surface=keep_surface, workers=cfg.workers)


def cmd_dqd_sweep(cfg: RunConfig) -> list[Path]:
    params = _calibrated(cfg)
    out = _out_dir(cfg)
    taus = np.linspace(0.0, 2 * params.rx_time, cfg.tau_steps)
    alphas = [min(dqd.rx_angle(params, t), math.pi) for t in taus]
    written = []
    for dj in cfg.delta_j:
        if cfg.angles is None:
            opt = _optimum_at_tau(params, cfg, dj)
            theta1, theta2 = opt.theta1, opt.theta2
        else:
            theta1, theta2 = cfg.angles
        states = dqd.output_states(params, taus, dj, rwa=cfg.rwa, dt=cfg.dt, workers=cfg.workers)
        records = strength_sweep(states, theta1, theta2, alphas=alphas)
        path = write_records(out / f"strength_{percent_tag(dj)}.csv", STRENGTH_COLUMNS, records)
        peak = max(records, key=lambda r: r.raw)
        print(
            f"delta_j={dj:g}: angles ({theta1:.4f}, {theta2:.4f}) rad, "
            f"peak raw {peak.raw:.4f} at tau {peak.tau_s:.4g} s -> {path}"
        )
        written.append(path)
    fid = dqd.fidelity_sweep(params, params.rx_time, cfg.delta_j, rwa=cfg.rwa, dt=cfg.dt, workers=cfg.workers)
    written.append(write_records(out / "fidelity_vs_dj.csv", FIDELITY_COLUMNS, fid))
    print(f"wrote {written[-1]}")
    return written


def _matrix_pairs(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def cmd_optimize_basis(cfg: RunConfig) -> list[Path]:
    params = _calibrated(cfg)
    out = _out_dir(cfg)
    written = []
    for dj in cfg.delta_j:
        opt = _optimum_at_tau(params, cfg, dj, keep_surface=cfg.surface)
        first, second = rotated_pair(opt.theta1, opt.theta2)
        payload = {
            "delta_j": dj,
            "tau_s": params.rx_time,
            "theta1_rad": opt.theta1,
            "theta2_rad": opt.theta2,
            "strength": opt.strength,
            "sigma1": _matrix_pairs(first.matrix),
            "sigma2": _matrix_pairs(second.matrix),
        }
        path = out / f"basis_{percent_tag(dj)}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        written.append(path)
        if cfg.surface:
            written.append(write_csv(out / f"surface_{percent_tag(dj)}.csv", SURFACE_COLUMNS, opt.surface.tolist()))
        print(f"delta_j={dj:g}: theta1={opt.theta1:.4f} theta2={opt.theta2:.4f} strength={opt.strength:.4f} -> {path}")
    return written


def cmd_calibrate(cfg: RunConfig) -> Path:
    if cfg.config_path is None:
        raise UsageError("calibrate needs --config")
    base = dqd.load_params(cfg.config_path)
    params = dqd.calibrate(base, rwa=cfg.rwa, dt=cfg.dt)
    comments = [
        "calibrated by `oqent calibrate`" + (" (rotating-wave integration)" if cfg.rwa else " (lab-frame integration)"),
        f"Rx: resonant right-spin drive, pi/2 at rx_time_s; CNOT: first peak at {params.cnot_time:.6g} s",
        f"CNOT gate fidelity with virtual-Z corrections: {params.cnot_fidelity:.6f}",
    ]
    dqd.save_params(params, cfg.config_path, comments)
    print(f"lambda = {params.cnot_time:.6g} s")
    print(f"cnot_gate_fidelity = {params.cnot_fidelity:.6f}")
    print(f"drive_amp_rx = {params.drive_amp_rx:.6g} Hz, drive_amp_cnot = {params.drive_amp_cnot:.6g} Hz")
    return cfg.config_path


def cmd_dump_oq(cfg: RunConfig) -> None:
    theta1, theta2 = cfg.angles if cfg.angles is not None else (0.0, 0.0)
    rho = density_matrix(psi_alpha(cfg.alpha))
    pair = rotated_pair(theta1, theta2)
    table = oq_table(rho, [pair, pair])
    print(f"# OQ table, alpha={cfg.alpha!r}, theta1={theta1!r}, theta2={theta2!r}")
    print("index,value")
    for idx, v in table.rows():
        print(f"{idx},{v!r}")
    print("# marginal table")
    print("index,value")
    for idx, v in marginal_oq(table).rows():
        print(f"{idx},{v!r}")


COMMANDS = {
    "ideal-sweep": cmd_ideal_sweep,
    "dqd-sweep": cmd_dqd_sweep,
    "optimize-basis": cmd_optimize_basis,
    "calibrate": cmd_calibrate,
    "dump-oq": cmd_dump_oq,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _run_config(args)
        COMMANDS[args.command](cfg)
    except (UsageError, dqd.ConfigError) as exc:
        print(f"oqent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except dqd.CalibrationError as exc:
        print(f"oqent: calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"oqent: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
