"""Command-line interface: one subcommand per analysis artifact.

    lamsa <subcommand> --config <file> [--out <dir>] [--variant printed|derived]
          [--fl <value> | --fl-range a:b:step] [--grid NxM] [--seed N] [--t-end T]

Every subcommand writes its CSV/JSON artifacts plus a ``manifest.json``
into the output directory.  Exit status: 0 on success, 1 on a
configuration/validation problem, 2 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bifurcation import (
    NominalFormula,
    design_feasibility,
    in_region_U,
    nominal_rhs,
    saddle_region_map,
    trace_path,
)
from .config import RunConfig, apply_overrides, build_config, parse_config, parse_fl_range, parse_grid, sweep_values
from .equilibria import fixed_points, unlatched_fixed_point
from .errors import ConfigError, LamsaError, SingularDenominatorError
from .io import flag, fmt, write_csv, write_events, write_manifest, write_trajectory
from .model import ModelVariant, SystemState, latch_from_projectile
from .simulate import simulate
from .stability import stability_report

__all__ = [
    "main",
    "cmd_simulate",
    "cmd_equilibria",
    "cmd_classify",
    "cmd_trace",
    "cmd_region_map",
    "cmd_quiver",
    "cmd_design_check",
    "phase_portrait",
]

FIXEDPOINT_HEADER = ["F_L", "p_star", "l_star", "origin_flag", "valid"]
CLASSIFY_HEADER = ["F_L", "p_star", "A", "B", "Gamma", "Delta", "h1", "h2", "class"]
PATH_HEADER = ["F_L", "p_star", "in_S"]
REGION_HEADER = ["p", "F_L", "h1", "h2", "in_S", "in_U"]
QUIVER_HEADER = ["p", "F_L", "dp_dFL"]


def _ensure_out(cfg: RunConfig) -> Path:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _interior_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n points strictly inside (lo, hi), evenly spaced."""
    return np.linspace(lo, hi, n + 2)[1:-1]


def cmd_simulate(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    traj = simulate(cfg.params, cfg.x0, cfg.F_L, cfg.t_end, cfg.integrator)
    n = write_trajectory(out / "trajectory.csv", traj)
    n_ev = write_events(out / "events.json", traj)
    write_manifest(out, cfg.echo(), {"trajectory.csv": n, "events.json": n_ev})
    return 0


def cmd_equilibria(cfg: RunConfig) -> int:
    """Sweep of the moving fixed point; at F_L = 0 it collapses onto the origin."""
    out = _ensure_out(cfg)
    rows = []
    for fl in sweep_values(cfg.F_L_range):
        pts = fixed_points(cfg.params, fl)
        movers = [p for p in pts if not p.origin_flag] or [p for p in pts]
        if not movers:
            continue  # F_L > 0: no latched fixed point exists
        fp = movers[0]
        rows.append(
            [
                fmt(fl),
                fmt(fp.p_star),
                fmt(fp.l_star if fp.l_star is not None else float("nan")),
                flag(fp.origin_flag),
                flag(True),
            ]
        )
    n = write_csv(out / "fixedpoints.csv", FIXEDPOINT_HEADER, rows)
    write_manifest(out, cfg.echo(), {"fixedpoints.csv": n})
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    rows = []
    for fl in sweep_values(cfg.F_L_range):
        for fp in fixed_points(cfg.params, fl):
            if fp.origin_flag:
                continue
            rep = stability_report(cfg.params, fp)
            rows.append(
                [
                    fmt(fl),
                    fmt(fp.p_star),
                    fmt(rep.A),
                    fmt(rep.B),
                    fmt(rep.Gamma),
                    fmt(rep.Delta),
                    fmt(rep.h1),
                    fmt(rep.h2),
                    rep.classification.value,
                ]
            )
    n = write_csv(out / "classification.csv", CLASSIFY_HEADER, rows)
    write_manifest(out, cfg.echo(), {"classification.csv": n})
    return 0


def cmd_trace(cfg: RunConfig) -> int:
    """Continue the saddle from the interior fixed point at the configured F_L."""
    out = _ensure_out(cfg)
    pts = [p for p in fixed_points(cfg.params, cfg.F_L) if not p.origin_flag]
    if not pts:
        raise ConfigError(f"no interior fixed point exists at F_L={cfg.F_L}")
    path = trace_path(cfg.params, (pts[0].p_star, cfg.F_L), F_L_end=0.0)
    rows = [[fmt(s.F_L), fmt(s.p_star), flag(s.in_S)] for s in path.samples]
    n = write_csv(out / "path.csv", PATH_HEADER, rows)
    write_manifest(
        out, cfg.echo(), {"path.csv": n}, results={"terminal": path.terminal.value}
    )
    return 0


def cmd_region_map(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    n_p, n_f = cfg.grid
    p_grid = _interior_grid(0.0, cfg.params.R, n_p)
    fl_stop = min(0.0, cfg.F_L_range.stop)
    fl_grid = np.linspace(cfg.F_L_range.start, fl_stop, n_f)
    rmap = saddle_region_map(cfg.params, p_grid, fl_grid)
    rows = []
    for i, p in enumerate(p_grid):
        for j, fl in enumerate(fl_grid):
            u = in_region_U(cfg.params, float(p), float(fl))
            rows.append(
                [
                    fmt(p),
                    fmt(fl),
                    fmt(rmap.h1[i, j]),
                    fmt(rmap.h2[i, j]),
                    flag(bool(rmap.in_S[i, j])),
                    flag(u.in_u),
                ]
            )
    n = write_csv(out / "region.csv", REGION_HEADER, rows)
    write_manifest(out, cfg.echo(), {"region.csv": n})
    return 0


def cmd_quiver(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    n_p, n_f = cfg.grid
    p_grid = _interior_grid(0.0, cfg.params.R, n_p)
    fl_stop = min(0.0, cfg.F_L_range.stop)
    fl_grid = np.linspace(cfg.F_L_range.start, fl_stop, n_f)
    rows = []
    for p in p_grid:
        for fl in fl_grid:
            try:
                slope = nominal_rhs(
                    cfg.params, float(p), float(fl), formula=NominalFormula.IMPLICIT_DIFF
                )
            except SingularDenominatorError:
                slope = float("nan")
            rows.append([fmt(p), fmt(fl), fmt(slope)])
    n = write_csv(out / "quiver.csv", QUIVER_HEADER, rows)
    write_manifest(out, cfg.echo(), {"quiver.csv": n})
    return 0


def cmd_design_check(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    report = design_feasibility(cfg.params)
    payload = {
        "p0_window_ok": report.p0_window_ok,
        "p0_bound": report.p0_bound,
        "p0_bound_ok": report.p0_bound_ok,
        "h1_at_origin": report.h1_at_origin,
        "h1_fd_origin": report.h1_fd_origin,
        "feasible": report.feasible,
    }
    (out / "design.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    write_manifest(
        out, cfg.echo(), {"design.json": 1}, results={"feasible": report.feasible}
    )
    return 0


def _portrait_initial_states(cfg: RunConfig) -> list[SystemState]:
    n_p, n_v = cfg.grid
    p0 = cfg.params.p0
    R = cfg.params.R
    ps = _interior_grid(0.0, 2.0 * p0, n_p)
    vs = np.linspace(-cfg.v_max, cfg.v_max, n_v)
    if cfg.jitter:
        rng = np.random.default_rng(cfg.seed)
        dp = 0.25 * (ps[1] - ps[0]) if len(ps) > 1 else 0.0
        dv = 0.25 * (vs[1] - vs[0]) if len(vs) > 1 else 0.0
        ps = ps + rng.uniform(-dp, dp, size=ps.shape)
        vs = vs + rng.uniform(-dv, dv, size=vs.shape)
    states = []
    for p in ps:
        for v in vs:
            p = float(p)
            v = float(v)
            if 0.0 < p < R:
                l = latch_from_projectile(cfg.params, p)
                l_dot = (R - p) * v / l if l > 0.0 else 0.0
                states.append(SystemState(p, v, l, l_dot))
            else:
                # latch parked off-contact: these starts are unlatched
                states.append(SystemState(p, v, 0.5 * R, 0.0))
    return states


def phase_portrait(cfg: RunConfig) -> int:
    """Simulate a grid of initial conditions and dump one CSV per trajectory.

    Emits ``traj_NNNN.csv`` files, an ``index.csv`` describing each run
    (failures are recorded there, not fatal), and ``overlay.csv`` with the
    fixed points at the configured F_L plus the unlatched rest point.
    """
    out = _ensure_out(cfg)
    outputs: dict[str, int] = {}
    index_rows = []
    for i, x0 in enumerate(_portrait_initial_states(cfg)):
        name = f"traj_{i:04d}.csv"
        try:
            traj = simulate(cfg.params, x0, cfg.F_L, cfg.t_end, cfg.integrator)
            n = write_trajectory(out / name, traj)
            outputs[name] = n
            status, detail = "ok", ""
            n_samples, n_events = len(traj.samples), len(traj.events)
        except LamsaError as exc:
            status, detail = "error", str(exc)
            n_samples = n_events = 0
        index_rows.append(
            [
                str(i),
                fmt(x0.p),
                fmt(x0.p_dot),
                fmt(x0.l),
                fmt(x0.l_dot),
                name,
                status,
                str(n_samples),
                str(n_events),
                detail,
            ]
        )
    outputs["index.csv"] = write_csv(
        out / "index.csv",
        ["idx", "p", "p_dot", "l", "l_dot", "file", "status", "n_samples", "n_events", "detail"],
        index_rows,
    )

    overlay_rows = []
    for fp in fixed_points(cfg.params, cfg.F_L):
        overlay_rows.append(
            [
                fmt(fp.F_L_star),
                fmt(fp.p_star),
                fmt(fp.l_star if fp.l_star is not None else float("nan")),
                flag(fp.origin_flag),
                flag(True),
            ]
        )
    ufp = unlatched_fixed_point(cfg.params)
    overlay_rows.append(
        [fmt(ufp.F_L_star), fmt(ufp.p_star), fmt(float("nan")), flag(False), flag(True)]
    )
    outputs["overlay.csv"] = write_csv(out / "overlay.csv", FIXEDPOINT_HEADER, overlay_rows)
    write_manifest(out, cfg.echo(), outputs)
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "classify": cmd_classify,
    "trace": cmd_trace,
    "region-map": cmd_region_map,
    "quiver": cmd_quiver,
    "design-check": cmd_design_check,
    "phase-portrait": phase_portrait,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamsa",
        description="Simulation and bifurcation analysis of a contact-latch spring actuator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="flat key=value config file")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--variant", choices=["printed", "derived"])
        p.add_argument("--fl", type=float, help="latch force for single-force commands")
        p.add_argument("--fl-range", help="sweep as start:stop:step")
        p.add_argument("--grid", help="grid dimensions as NxM")
        p.add_argument("--seed", type=int)
        p.add_argument("--t-end", type=float)
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = parse_config(text)
    else:
        cfg = build_config({})
    variant = None
    if args.variant is not None:
        variant = (
            ModelVariant.AS_PRINTED if args.variant == "printed" else ModelVariant.CONSTRAINT_CONSISTENT
        )
    return apply_overrides(
        cfg,
        variant=variant,
        F_L=args.fl,
        F_L_range=parse_fl_range(args.fl_range) if args.fl_range else None,
        grid=parse_grid(args.grid) if args.grid else None,
        output_dir=args.out,
        seed=args.seed,
        t_end=args.t_end,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"lamsa: configuration error: {exc}", file=sys.stderr)
        return 1
    except LamsaError as exc:
        print(f"lamsa: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"lamsa: invalid input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
