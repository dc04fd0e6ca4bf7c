"""Time integration, event monitoring, perturbation ensembles and streamlines.

Two explicit integrators are provided: classical RK4 with a fixed step and
the Dormand-Prince 5(4) pair with step-size control.  Both work on real or
complex state vectors, so the augmented feedback system can be integrated in
its complex Schur coordinates.

Event monitors watch a scalar ``g(y)`` and fire whenever the predicate
``g(y) > 0`` changes value across an accepted step.  The crossing time is
refined by safeguarded false position, re-taking a single step of the same
method from the start of the step, until the bracket is shorter than
``event_tol``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import NonFiniteState, StepSizeUnderflow
from .model import Params, equilibrium, vector_field

MODEL_COLUMNS = ("a", "f", "b")
AUGMENTED_COLUMNS = ("x1", "re_x2", "im_x2", "re_x3", "im_x3", "omega")


class Method(str, enum.Enum):
    RK4 = "rk4"
    RK45 = "rk45"


class EventKind(str, enum.Enum):
    B_CROSSES_A = "BCrossesA"
    A_LEAVES_UNIT_INTERVAL = "ALeavesUnitInterval"
    F_HITS_ZERO = "FHitsZero"
    B_LEAVES_ZERO_TO_A = "BLeavesZeroToA"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``step`` is the fixed step for RK4 and the first trial step for RK45.
    Trajectories stop (``truncated=True``) once any coordinate exceeds
    ``blowup`` in magnitude.
    """

    t_end: float = 100.0
    method: Method = Method.RK45
    step: float = 1e-2
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    min_step: float = 1e-13
    event_tol: float = 1e-10
    blowup: float = 1e6
    terminate_on_event: bool = False
    max_steps: int = 5_000_000

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.t_end > 0:
            raise ValueError("t_end must be > 0")
        for name in ("step", "rel_tol", "abs_tol", "max_step", "min_step", "event_tol", "blowup"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class Event:
    kind: EventKind
    time: float
    state_before: np.ndarray
    state_after: np.ndarray
    direction: int  # +1: g became positive, -1: g stopped being positive


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    events: list[Event] = field(default_factory=list)
    columns: tuple[str, ...] = MODEL_COLUMNS
    truncated: bool = False
    status: str = "completed"

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind(kind)]


Monitor = tuple[EventKind, Callable[[np.ndarray], float]]

MODEL_MONITORS: tuple[Monitor, ...] = (
    (EventKind.B_CROSSES_A, lambda y: y[2] - y[0]),
    (EventKind.A_LEAVES_UNIT_INTERVAL, lambda y: min(y[0], 1.0 - y[0])),
    (EventKind.F_HITS_ZERO, lambda y: y[1]),
    (EventKind.B_LEAVES_ZERO_TO_A, lambda y: min(y[2], y[0] - y[2])),
)

# Dormand-Prince 5(4) tableau
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_BERR = _B5 - _B4


def rk4_step(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def dp45_step(rhs, y, h, k1=None):
    """One Dormand-Prince step: (5th-order solution, error estimate, last stage).

    The last stage equals the first stage of the next step (FSAL).
    """
    K = np.empty((7, y.shape[0]), dtype=y.dtype)
    K[0] = rhs(y) if k1 is None else k1
    for i in range(1, 7):
        K[i] = rhs(y + h * (_A[i, :i] @ K[:i]))
    y5 = y + h * (_B5 @ K)
    err = h * (_BERR @ K)
    return y5, err, K[6]


def _error_norm(err, y0, y1, cfg):
    r = np.abs(err) / (cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1)))
    return math.sqrt(float(r @ r) / r.shape[0])


def _refine(rhs, method, y0, y1, h, g, was_positive, tol):
    """Shrink ``[0, h]`` around the predicate flip to width <= ``tol``.

    Illinois false position on ``g``, every third iterate a plain bisection,
    and trial points kept ``tol/2`` inside the bracket so it always shrinks.
    """
    def step(s):
        return rk4_step(rhs, y0, s) if method is Method.RK4 else dp45_step(rhs, y0, s)[0]

    lo, hi = 0.0, h
    y_lo, y_hi = y0, y1
    g_lo, g_hi = g(y0), g(y1)
    last = 0
    it = 0
    while hi - lo > tol:
        it += 1
        denom = g_hi - g_lo
        if it % 3 == 0 or denom == 0 or not math.isfinite(denom):
            s = 0.5 * (lo + hi)
        else:
            s = lo - g_lo * (hi - lo) / denom
        s = min(max(s, lo + 0.5 * tol), hi - 0.5 * tol)
        y_s = step(s)
        g_s = g(y_s)
        if (g_s > 0) == was_positive:
            lo, y_lo, g_lo = s, y_s, g_s
            if last == -1:
                g_hi *= 0.5
            last = -1
        else:
            hi, y_hi, g_hi = s, y_s, g_s
            if last == 1:
                g_lo *= 0.5
            last = 1
    return lo, hi, y_lo, y_hi


def integrate_system(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0,
    cfg: IntegratorConfig,
    monitors: Sequence[Monitor] = (),
    columns: tuple[str, ...] = MODEL_COLUMNS,
) -> Trajectory:
    """Integrate the autonomous system ``dy/dt = rhs(y)`` over ``[0, cfg.t_end]``.

    One output row per accepted step.  Raises ``NonFiniteState`` (carrying
    the partial trajectory) when a fixed RK4 step overflows, and
    ``StepSizeUnderflow`` when adaptive control cannot make progress.
    """
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state must be finite")
    t = 0.0
    times, states, events = [0.0], [y.copy()], []
    signs = [g(y) > 0 for _, g in monitors]
    h = min(cfg.step, cfg.max_step, cfg.t_end)
    k1 = None
    status, truncated = "completed", False

    def partial(status):
        return Trajectory(np.array(times), np.array(states), events, columns, True, status)

    steps = 0
    while t < cfg.t_end:
        steps += 1
        if steps > cfg.max_steps:
            status, truncated = "max-steps", True
            break
        h = min(h, cfg.t_end - t)
        if cfg.method is Method.RK4:
            with np.errstate(over="ignore", invalid="ignore"):
                y_new = rk4_step(rhs, y, h)
            if not np.all(np.isfinite(y_new)):
                raise NonFiniteState(f"non-finite state at t={t + h:.6g}", partial("non-finite"))
            h_taken, h_next = h, cfg.step
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                y_new, err, k_last = dp45_step(rhs, y, h, k1)
            en = _error_norm(err, y, y_new, cfg) if np.all(np.isfinite(y_new)) else math.inf
            if en > 1.0:
                h *= max(0.2, 0.9 * en ** -0.2) if math.isfinite(en) else 0.2
                if h < cfg.min_step:
                    raise StepSizeUnderflow(f"step size underflow at t={t:.6g}", partial("step-underflow"))
                continue
            h_taken = h
            h_next = min(cfg.max_step, h * (min(5.0, 0.9 * en ** -0.2) if en > 0 else 5.0))
            k1 = k_last

        stop_at = None
        step_events = []
        for i, (kind, g) in enumerate(monitors):
            now = g(y_new) > 0
            if now != signs[i]:
                lo, hi, y_lo, y_hi = _refine(rhs, cfg.method, y, y_new, h_taken, g, signs[i], cfg.event_tol)
                step_events.append(Event(kind, t + hi, y_lo, y_hi, 1 if now else -1))
                signs[i] = now
        step_events.sort(key=lambda e: e.time)
        events.extend(step_events)
        if cfg.terminate_on_event and step_events:
            stop_at = step_events[0]

        if stop_at is not None:
            times.append(stop_at.time)
            states.append(np.array(stop_at.state_after))
            status, truncated = "event", True
            break
        t += h_taken
        y = y_new
        times.append(t)
        states.append(y.copy())
        if np.max(np.abs(y)) > cfg.blowup:
            status, truncated = "diverged", True
            break
        h = h_next

    return Trajectory(np.array(times), np.array(states), events, columns, truncated, status)


def model_rhs(p: Params):
    def rhs(y):
        return np.array(vector_field(p, y.tolist()))

    return rhs


def integrate(
    p: Params,
    s0,
    cfg: IntegratorConfig = IntegratorConfig(),
    monitors: Sequence[Monitor] = MODEL_MONITORS,
) -> Trajectory:
    return integrate_system(model_rhs(p), np.asarray(s0, dtype=float), cfg, monitors, MODEL_COLUMNS)


def integrate_augmented(p: Params, sf, gains, xs0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the feedback-augmented system in complex Schur coordinates."""
    from .feedback import augmented_vector_field

    def rhs(xs):
        return augmented_vector_field(p, sf, gains, xs)

    return integrate_system(rhs, np.asarray(xs0, dtype=complex), cfg, (), AUGMENTED_COLUMNS)


@dataclass
class CrossingResult:
    trajectory: Trajectory
    threshold: float
    level: float
    initial_gap_rate: float
    event: Optional[Event]

    @property
    def crossed(self) -> bool:
        return self.event is not None

    @property
    def event_in_unit_box(self) -> bool:
        if self.event is None:
            return False
        a, _, b = self.event.state_after
        return 0.0 < a < b < 1.0


def crossing_threshold(p: Params) -> float:
    return p.gamma / (p.alpha * p.f0 + p.beta + p.gamma)


def crossing_experiment(p: Params, level: Optional[float] = None, cfg: Optional[IntegratorConfig] = None) -> CrossingResult:
    """Start from ``a(0) = b(0) = level``, ``f(0) = f0`` and watch ``b - a``.

    Above ``gamma/(alpha*f0 + beta + gamma)`` the gap ``b - a`` starts
    growing at rate ``(alpha*f0 + beta + gamma)*level - gamma > 0``, so
    ``b`` overtakes ``a`` immediately.  ``level`` defaults to the midpoint
    of ``(threshold, 1)``.
    """
    threshold = crossing_threshold(p)
    if level is None:
        level = 0.5 * (threshold + 1.0)
    cfg = cfg or IntegratorConfig(t_end=1.0, step=1e-9)
    traj = integrate(p, (level, p.f0, level), cfg)
    rate = (p.alpha * p.f0 + p.beta + p.gamma) * level - p.gamma
    up = [e for e in traj.events_of(EventKind.B_CROSSES_A) if e.direction > 0]
    return CrossingResult(traj, threshold, level, rate, up[0] if up else None)


@dataclass(frozen=True)
class Violation:
    time: float
    state: tuple[float, float, float]
    reason: str
    precondition_held: bool


@dataclass
class InvarianceReport:
    samples_checked: int
    violations: list[Violation]
    precondition_broken_at: Optional[float]
    precondition_break_reason: Optional[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def invariance_monitor(traj: Trajectory, tol: float = 1e-9) -> InvarianceReport:
    """Check persistence of ``0 < a < 1`` and ``f > 0`` while ``0 <= b <= a``.

    As long as every earlier sample had ``0 < a < 1``, ``f > 0`` and
    ``-tol <= b <= a + tol``, the current sample must again satisfy
    ``0 < a < 1`` and ``f > 0``; failures are reported as violations (they
    can only come from integration error).  After the first sample where the
    hypothesis fails, nothing more is asserted and the break is recorded.
    """
    violations = []
    broken_at, reason = None, None
    checked = 0
    for t, y in zip(traj.times, traj.states):
        a, f, b = (float(np.real(v)) for v in y[:3])
        checked += 1
        bad = []
        if not a > 0.0:
            bad.append("a <= 0")
        if not a < 1.0:
            bad.append("a >= 1")
        if not f > 0.0:
            bad.append("f <= 0")
        if bad:
            violations.append(Violation(float(t), (a, f, b), ", ".join(bad), True))
        if b < -tol:
            bad.append("b < 0")
        if b > a + tol:
            bad.append("b > a")
        if bad:
            broken_at, reason = float(t), ", ".join(bad)
            break
    return InvarianceReport(checked, violations, broken_at, reason)


@dataclass
class EnsembleResult:
    trajectories: list[Trajectory]
    perturbations: np.ndarray
    initial_deviation: np.ndarray
    terminal_deviation: np.ndarray

    @property
    def growth(self) -> np.ndarray:
        return self.terminal_deviation / self.initial_deviation

    def summary(self) -> dict:
        growth = self.growth
        return {
            "n": len(self.trajectories),
            "max_initial_deviation": float(self.initial_deviation.max()),
            "mean_initial_deviation": float(self.initial_deviation.mean()),
            "max_terminal_deviation": float(self.terminal_deviation.max()),
            "mean_terminal_deviation": float(self.terminal_deviation.mean()),
            "min_growth": float(growth.min()),
            "max_growth": float(growth.max()),
            "all_contract": bool(np.all(self.terminal_deviation < self.initial_deviation)),
            "truncated": int(sum(tr.truncated for tr in self.trajectories)),
        }


def perturbations(n: int, amplitude: float, seed: int) -> np.ndarray:
    """``n x 3`` uniform draws on ``[-amplitude, amplitude]``.

    Generator: ``numpy.random.default_rng(seed)`` (PCG64), a single call to
    ``uniform(-amplitude, amplitude, size=(n, 3))`` in row-major (a, f, b)
    order, so member ``i`` is row ``i``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    rng = np.random.default_rng(seed)
    return rng.uniform(-amplitude, amplitude, size=(n, 3))


def ensemble(
    p: Params,
    n: int = 100,
    amplitude: float = 1e-4,
    seed: int = 0,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> EnsembleResult:
    """Integrate ``n`` uniformly perturbed copies of the equilibrium."""
    eq = np.array(equilibrium(p))
    dy = perturbations(n, amplitude, seed)
    trajs = []
    for row in dy:
        trajs.append(integrate(p, eq + row, cfg))
    init = np.linalg.norm(dy, axis=1)
    term = np.array([np.linalg.norm(tr.final_state - eq) for tr in trajs])
    return EnsembleResult(trajs, dy, init, term)


@dataclass
class StreamlineGrid:
    plane: tuple[str, str]
    fixed: dict
    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    V: np.ndarray
    field: np.ndarray  # (ny, nx, 3) full derivative
    traces: list[np.ndarray]  # projected short trajectories


def streamline_grid(
    p: Params,
    plane: tuple[str, str] = ("a", "f"),
    ranges: Optional[tuple[tuple[float, float], tuple[float, float]]] = None,
    counts: tuple[int, int] = (21, 21),
    fixed: Optional[dict] = None,
    trace_time: float = 0.0,
    trace_step: float = 1e-2,
) -> StreamlineGrid:
    """Sample the vector field on an axis-aligned slice through the equilibrium.

    The third coordinate is held at its equilibrium value unless given in
    ``fixed``.  With ``trace_time > 0`` a short RK4 trajectory is launched
    from every grid point and its projection kept in ``traces``.
    """
    idx = {name: i for i, name in enumerate(MODEL_COLUMNS)}
    i, j = idx[plane[0]], idx[plane[1]]
    if i == j:
        raise ValueError("plane axes must differ")
    (k,) = set(range(3)) - {i, j}
    eq = np.array(equilibrium(p))
    base = eq.copy()
    for name, value in (fixed or {}).items():
        base[idx[name]] = value
    if ranges is None:
        ranges = tuple((eq[m] - 0.5 * max(abs(eq[m]), 0.2), eq[m] + 0.5 * max(abs(eq[m]), 0.2)) for m in (i, j))
    nx, ny = counts
    if nx < 1 or ny < 1:
        raise ValueError("grid counts must be >= 1")
    xs = np.linspace(*ranges[0], nx) if nx > 1 else np.array([0.5 * sum(ranges[0])])
    ys = np.linspace(*ranges[1], ny) if ny > 1 else np.array([0.5 * sum(ranges[1])])
    X, Y = np.meshgrid(xs, ys)
    S = np.empty(X.shape + (3,))
    S[..., i] = X
    S[..., j] = Y
    S[..., k] = base[k]
    F = np.stack(vector_field(p, (S[..., 0], S[..., 1], S[..., 2])), axis=-1)
    traces = []
    if trace_time > 0:
        cfg = IntegratorConfig(t_end=trace_time, method=Method.RK4, step=trace_step)
        for s in S.reshape(-1, 3):
            tr = integrate(p, s, cfg, monitors=())
            traces.append(tr.states[:, [i, j]])
    return StreamlineGrid((plane[0], plane[1]), {MODEL_COLUMNS[k]: float(base[k])}, X, Y, F[..., i], F[..., j], F, traces)


def _row(t, y, columns):
    if columns == AUGMENTED_COLUMNS:
        vals = (t, y[0].real, y[1].real, y[1].imag, y[2].real, y[2].imag, y[3].real)
    else:
        vals = (t, *np.real(y))
    return [format(float(v), ".17g") for v in vals]


def write_trajectory_csv(traj: Trajectory, target) -> None:
    """Header ``t,<columns>``, one row per accepted step (17 significant digits),
    then one ``# event,<kind>,<t>`` comment line per event."""
    own = isinstance(target, (str, Path))
    fh = open(target, "w", newline="") if own else target
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", *traj.columns))
        for t, y in zip(traj.times, traj.states):
            w.writerow(_row(t, y, traj.columns))
        for e in traj.events:
            fh.write(f"# event,{e.kind.value},{format(e.time, '.17g')}\n")
    finally:
        if own:
            fh.close()


def read_trajectory_csv(source) -> tuple[list[str], np.ndarray, list[tuple[str, float]]]:
    """Inverse of ``write_trajectory_csv``: (header, data rows, events)."""
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    lines = text.splitlines()
    events = []
    data_lines = []
    for line in lines:
        if line.startswith("# event,"):
            _, kind, t = line.split(",")
            events.append((kind, float(t)))
        elif line and not line.startswith("#"):
            data_lines.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(data_lines))))
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return header, data, events
