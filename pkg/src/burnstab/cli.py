"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure
(partial output is kept).  Output files go to ``--out``, else to the
directory named by ``BURNSTAB_OUT``, else to ``./burnstab_out``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import Axis, Family, SweepSpec, hopf_boundary, sign_family, sweep, write_sweep_csv
from .exceptions import (
    BranchConditionUnmet,
    DegenerateSpectrum,
    GridTooLarge,
    IntegrationFailure,
    InvalidParams,
    NoRootInInterval,
    NotSaddleRegime,
)
from .feedback import design_gains, feedback_design, initial_augmented_state, schur_at_equilibrium
from .model import PARAM_NAMES, Params, equilibrium, feasibility
from .simulate import (
    IntegratorConfig,
    Method,
    crossing_experiment,
    ensemble,
    integrate,
    integrate_augmented,
    invariance_monitor,
    perturbations,
    streamline_grid,
    write_trajectory_csv,
)
from .stability import classify

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
DEFAULT_OUT = "burnstab_out"
CROSSING_CONFIG = IntegratorConfig(t_end=1.0, step=1e-9)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument parsing


def _param_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("parameters (all flags, or --params FILE)")
    for name in PARAM_NAMES:
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--vartheta", type=float, help="proactive strength; sets theta = -vartheta")
    g.add_argument("--params", type=Path, metavar="FILE", help="flat JSON object with the seven parameters")


def _io_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--svg", action="store_true", help="also render SVG figures")


def _integrator_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("integrator (unset flags keep the command's defaults)")
    g.add_argument("--t-end", type=float)
    g.add_argument("--method", choices=[m.value for m in Method])
    g.add_argument("--step", type=float, help="RK4 step / RK45 initial step")
    g.add_argument("--rel-tol", type=float)
    g.add_argument("--abs-tol", type=float)
    g.add_argument("--terminate-on-event", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burnstab", description="Bushfire / prescribed-burning model toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", help="equilibrium and feasibility window")
    _param_flags(p)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("classify", help="linear stability verdict")
    _param_flags(p)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("simulate", help="integrate one trajectory")
    _param_flags(p)
    _io_flags(p)
    _integrator_flags(p)
    p.add_argument("--init", type=str, help="initial state 'a,f,b' (default: the equilibrium)")
    p.add_argument("--perturb", type=str, help="offset 'da,df,db' added to the initial state")
    p.add_argument("--crossing-experiment", action="store_true", help="start from a(0) = b(0) = level, f(0) = f0")
    p.add_argument("--level", type=float, help="a(0) = b(0) for the crossing experiment")

    p = sub.add_parser("ensemble", help="perturbations of the equilibrium")
    _param_flags(p)
    _io_flags(p)
    _integrator_flags(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--amplitude", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="classify a parameter grid")
    _param_flags(p)
    p.add_argument("--out", type=Path)
    p.add_argument(
        "--axis",
        action="append",
        default=[],
        metavar="NAME:LO:HI:COUNT[:log]",
        help="swept parameter (repeatable); replaces its base value",
    )
    p.add_argument("--cap", type=int, default=1_000_000)

    p = sub.add_parser("feedback-design", help="gains for the dynamic-extension controller")
    _param_flags(p)
    _io_flags(p)
    _integrator_flags(p)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--closed-loop", action="store_true", help="also simulate the closed loop")
    p.add_argument("--amplitude", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("streamlines", help="vector field on a 2-D slice through the equilibrium")
    _param_flags(p)
    _io_flags(p)
    p.add_argument("--plane", default="a,f", help="two of a,f,b")
    p.add_argument("--count", type=int, default=21)
    p.add_argument("--trace-time", type=float, default=0.0)

    p = sub.add_parser("hopf", help="locate the Hopf balance in one free parameter")
    _param_flags(p)
    p.add_argument("--out", type=Path)
    p.add_argument("--free", required=True, choices=[*PARAM_NAMES, "vartheta"])
    p.add_argument("--lo", type=float, default=1e-6)
    p.add_argument("--hi", type=float, default=1e6)

    p = sub.add_parser("family", help="discriminant-sign witness from a constructive family")
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--knob", type=float)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--out", type=Path)
    return parser


def params_from_args(args) -> Params:
    given = {n: getattr(args, n) for n in (*PARAM_NAMES, "vartheta") if getattr(args, n, None) is not None}
    if args.params is not None:
        if given:
            raise UsageError("give parameters either as flags or via --params, not both")
        try:
            data = json.loads(Path(args.params).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.params}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("--params file must hold a JSON object")
        return Params.from_dict(data)
    if "theta" in given and "vartheta" in given:
        raise UsageError("give either --theta or --vartheta")
    missing = [n for n in PARAM_NAMES if n not in given and not (n == "theta" and "vartheta" in given)]
    if missing:
        raise UsageError("missing parameter flag(s): " + " ".join(f"--{m}" for m in missing))
    return Params.from_dict(given)


def _vector(text: str, what: str) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"{what} must be three comma-separated numbers") from exc
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise UsageError(f"{what} must be three finite comma-separated numbers")
    return v


def _config(args, base: IntegratorConfig) -> IntegratorConfig:
    names = ("t_end", "method", "step", "rel_tol", "abs_tol", "terminate_on_event")
    changes = {n: getattr(args, n) for n in names if getattr(args, n) is not None}
    try:
        return replace(base, **changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _out_dir(args, create: bool = True) -> Path:
    out = args.out or Path(os.environ.get("BURNSTAB_OUT") or DEFAULT_OUT)
    if create:
        out.mkdir(parents=True, exist_ok=True)
    return out


def _explicit_out(args):
    if getattr(args, "out", None) is not None or os.environ.get("BURNSTAB_OUT"):
        return _out_dir(args)
    return None


def _clean(obj):
    """Make a value JSON-safe: numpy scalars to floats, non-finite to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return _clean(np.real(obj).tolist())
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(doc: dict, out: Path | None, name: str) -> None:
    text = json.dumps(_clean(doc), indent=2)
    print(text)
    if out is not None:
        (out / name).write_text(text + "\n")


def _events_doc(traj) -> list[dict]:
    return [
        {
            "kind": e.kind.value,
            "time": e.time,
            "direction": e.direction,
            "state_after": [float(np.real(v)) for v in e.state_after],
        }
        for e in traj.events
    ]


def _svg_trajectories(path: Path, trajs, p: Params, title: str) -> None:
    from .plotting import save_svg, trajectory_figure

    series = [(tr.times, tr.states) for tr in trajs]
    save_svg(trajectory_figure(series, equilibrium(p), title), path)


# ---------------------------------------------------------------- commands


def cmd_equilibrium(args) -> int:
    p = params_from_args(args)
    eq = equilibrium(p)
    doc = {"params": p.to_dict(), **eq._asdict(), "feasibility": feasibility(p).to_dict()}
    _emit(doc, _explicit_out(args), "equilibrium.json")
    return EXIT_OK


def cmd_classify(args) -> int:
    p = params_from_args(args)
    doc = {"params": p.to_dict(), **classify(p).to_dict()}
    _emit(doc, _explicit_out(args), "classify.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    p = params_from_args(args)
    cfg = _config(args, CROSSING_CONFIG if args.crossing_experiment else IntegratorConfig())
    out = _out_dir(args)
    csv_path = out / "trajectory.csv"
    doc = {"params": p.to_dict(), "config": {"t_end": cfg.t_end, "method": cfg.method.value}}
    code = EXIT_OK
    try:
        if args.crossing_experiment:
            if args.init is not None:
                raise UsageError("--init cannot be combined with --crossing-experiment")
            res = crossing_experiment(p, args.level, cfg)
            traj = res.trajectory
            doc["crossing"] = {
                "threshold": res.threshold,
                "level": res.level,
                "initial_gap_rate": res.initial_gap_rate,
                "crossed": res.crossed,
                "event_time": res.event.time if res.event else None,
                "event_in_unit_box": res.event_in_unit_box,
            }
        else:
            s0 = _vector(args.init, "--init") if args.init else np.array(equilibrium(p))
            if args.perturb:
                s0 = s0 + _vector(args.perturb, "--perturb")
            traj = integrate(p, s0, cfg)
    except IntegrationFailure as exc:
        traj = exc.trajectory
        doc["error"] = str(exc)
        code = EXIT_NUMERIC
    if traj is not None:
        write_trajectory_csv(traj, csv_path)
        rep = invariance_monitor(traj)
        doc.update(
            status=traj.status,
            truncated=traj.truncated,
            final_state=traj.final_state,
            events=_events_doc(traj),
            invariance={
                "ok": rep.ok,
                "violations": len(rep.violations),
                "precondition_broken_at": rep.precondition_broken_at,
                "precondition_break_reason": rep.precondition_break_reason,
            },
            csv=str(csv_path),
        )
        if args.svg:
            _svg_trajectories(out / "trajectory.svg", [traj], p, f"theta = {p.theta:g}")
    _emit(doc, out, "simulate.json")
    return code


def cmd_ensemble(args) -> int:
    p = params_from_args(args)
    cfg = _config(args, IntegratorConfig())
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if not args.amplitude >= 0:
        raise UsageError("--amplitude must be >= 0")
    out = _out_dir(args)
    try:
        res = ensemble(p, args.n, args.amplitude, args.seed, cfg)
    except IntegrationFailure as exc:
        if exc.trajectory is not None:
            write_trajectory_csv(exc.trajectory, out / "failed_member.csv")
        _emit({"params": p.to_dict(), "error": str(exc)}, out, "ensemble.json")
        return EXIT_NUMERIC
    width = max(3, len(str(args.n - 1)))
    violations = 0
    for i, tr in enumerate(res.trajectories):
        write_trajectory_csv(tr, out / f"member_{i:0{width}d}.csv")
        violations += len(invariance_monitor(tr).violations)
    doc = {
        "params": p.to_dict(),
        "seed": args.seed,
        "amplitude": args.amplitude,
        "regime": classify(p).regime.value,
        **res.summary(),
        "invariance_violations": violations,
    }
    if args.svg:
        _svg_trajectories(out / "ensemble.svg", res.trajectories, p, f"{args.n} perturbations, theta = {p.theta:g}")
    _emit(doc, out, "ensemble.json")
    return EXIT_OK


def _axis(text: str) -> Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "log"):
        raise UsageError(f"bad --axis {text!r}; expected NAME:LO:HI:COUNT[:log]")
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), len(parts) == 5)
    except ValueError as exc:
        raise UsageError(f"bad --axis {text!r}: {exc}") from exc


def cmd_sweep(args) -> int:
    p = params_from_args(args)
    spec = SweepSpec(p, tuple(_axis(a) for a in args.axis), args.cap)
    out = _out_dir(args)
    n = write_sweep_csv(sweep(spec), out / "sweep.csv")
    _emit({"params": p.to_dict(), "rows": n, "csv": str(out / "sweep.csv")}, out, "sweep.json")
    return EXIT_OK


def cmd_feedback_design(args) -> int:
    p = params_from_args(args)
    doc = feedback_design(p, args.margin)
    out = _explicit_out(args)
    code = EXIT_OK
    if args.closed_loop:
        out = out or _out_dir(args)
        cfg = _config(args, IntegratorConfig(t_end=200.0))
        sf = schur_at_equilibrium(p)
        gains = design_gains(sf.lambda1, args.margin)
        s0 = np.array(equilibrium(p)) + perturbations(1, args.amplitude, args.seed)[0]
        try:
            traj = integrate_augmented(p, sf, gains, initial_augmented_state(sf, s0), cfg)
        except IntegrationFailure as exc:
            traj = exc.trajectory
            doc["error"] = str(exc)
            code = EXIT_NUMERIC
        if traj is not None:
            write_trajectory_csv(traj, out / "closed_loop.csv")
            doc["closed_loop"] = {"status": traj.status, "csv": str(out / "closed_loop.csv")}
            if args.svg:
                model_states = np.array([sf.to_y(x[:3]) for x in traj.states])
                from .plotting import save_svg, trajectory_figure

                fig = trajectory_figure([(traj.times, model_states)], equilibrium(p), "closed loop")
                save_svg(fig, out / "closed_loop.svg")
    _emit(doc, out, "feedback.json")
    return code


def cmd_streamlines(args) -> int:
    p = params_from_args(args)
    plane = tuple(args.plane.split(","))
    if len(plane) != 2 or not set(plane) <= {"a", "f", "b"} or plane[0] == plane[1]:
        raise UsageError("--plane must name two different coordinates among a,f,b")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    grid = streamline_grid(p, plane, counts=(args.count, args.count), trace_time=args.trace_time)
    out = _out_dir(args)
    path = out / "streamlines.csv"
    with open(path, "w") as fh:
        fh.write(f"{plane[0]},{plane[1]},d{plane[0]},d{plane[1]}\n")
        for x, y, u, v in zip(grid.X.ravel(), grid.Y.ravel(), grid.U.ravel(), grid.V.ravel()):
            fh.write(",".join(format(float(z), ".17g") for z in (x, y, u, v)) + "\n")
    if args.svg:
        from .plotting import save_svg, streamline_figure

        save_svg(streamline_figure(grid, equilibrium(p)), out / "streamlines.svg")
    _emit({"params": p.to_dict(), "plane": list(plane), "fixed": grid.fixed, "samples": grid.X.size, "csv": str(path)}, out, "streamlines.json")
    return EXIT_OK


def cmd_hopf(args) -> int:
    p = params_from_args(args)
    points = hopf_boundary(p, args.free, args.lo, args.hi)
    doc = {
        "params": p.to_dict(),
        "free": args.free,
        "roots": [{"value": h.value, "pair_real_part": h.pair_real_part, "params": h.params.to_dict()} for h in points],
    }
    _emit(doc, _explicit_out(args), "hopf.json")
    return EXIT_OK


def cmd_family(args) -> int:
    fp = sign_family(args.family, args.knob, theta=args.theta)
    doc = {
        "family": fp.family.value,
        "branch": fp.branch.value,
        "knob": fp.knob,
        "discriminant": fp.discriminant,
        "params": fp.params.to_dict(),
        "feasibility": feasibility(fp.params).to_dict(),
        "regime": classify(fp.params).regime.value,
    }
    _emit(doc, _explicit_out(args), "family.json")
    return EXIT_OK


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "sweep": cmd_sweep,
    "feedback-design": cmd_feedback_design,
    "streamlines": cmd_streamlines,
    "hopf": cmd_hopf,
    "family": cmd_family,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParams, GridTooLarge, NotSaddleRegime) as exc:
        print(f"burnstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BranchConditionUnmet, NoRootInInterval, DegenerateSpectrum, IntegrationFailure) as exc:
        print(f"burnstab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"burnstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
