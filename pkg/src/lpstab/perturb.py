"""Forced trajectories x' = A(t) x + d(t) and disturbance diagnostics.

The simulator is fixed-step RK4 with whole-trajectory step doubling, and by
default it audits itself: at a few randomly chosen sample times the state is
recomputed through the variation-of-constants form

    x(t) = Phi(t, t0) x0 + integral of Phi(t, s) d(s) ds over [t0, t]

using per-panel transition matrices and Simpson weights, a route that shares
no code with the stepper.  A disagreement beyond the tolerance raises, since
it means at least one of the two integrators cannot be trusted.

windowed_drift summarizes a disturbance by the windowed supremum of its
running integral, which is the quantity whose decay transfers to the
perturbed state when the unforced system is uniformly exponentially stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import TOL
from .errors import BlowupError, ConvergenceError, InputError, NumericError
from .expr import Expression, Num, ParseError, compile_expr, parse, to_string
from .floquet import integrate_transition
from .linalg import NormKind, mat_norm, vec_norm
from .lognorm import INF, TWO
from .periodic import SystemDef, integrate


@dataclass(frozen=True)
class Disturbance:
    """A vector of time expressions added to the right-hand side."""

    entries: tuple[Expression, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise InputError("disturbance has no entries")
        object.__setattr__(self, "_compiled", tuple(compile_expr(e) for e in self.entries))

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def zero(cls, n: int) -> "Disturbance":
        return cls(tuple(Num(0.0) for _ in range(n)))

    def vector(self, t: float) -> np.ndarray:
        out = np.empty(len(self.entries))
        for i, fn in enumerate(self._compiled):
            out[i] = fn(t)
        return out

    def as_strings(self) -> tuple[str, ...]:
        return tuple(to_string(e) for e in self.entries)


def disturbance_from_strings(items: Sequence[str]) -> Disturbance:
    parsed = []
    for i, text in enumerate(items):
        try:
            parsed.append(parse(text))
        except ParseError as exc:
            raise InputError(f"disturbance entry {i + 1}: {exc}") from exc
    return Disturbance(tuple(parsed))


@dataclass(frozen=True)
class Trajectory:
    """Sampled forced trajectory with integration and audit metadata.

    error_estimate is the largest sample difference between the last two
    step-doubling passes divided by 15; check_error is the worst relative
    disagreement with the variation-of-constants recomputation (None when
    the audit was skipped).  A state magnitude beyond the overflow cap does
    not raise: the trajectory is truncated at the last finite sample and
    flagged through overflowed / t_overflow, because unbounded growth is a
    legitimate finding about the system, not an integrator failure.
    """

    times: np.ndarray
    states: np.ndarray
    steps_per_interval: int
    error_estimate: float
    check_times: tuple[float, ...]
    check_error: float | None
    overflowed: bool = False
    t_overflow: float | None = None


def _rk4_pass(sys: SystemDef, d: Disturbance, x0: np.ndarray, ts: np.ndarray,
              m: int) -> tuple[np.ndarray, int | None]:
    """One fixed-substep sweep.  Returns (states, blow_index): samples from
    blow_index on are invalid because the state left the overflow cap."""
    states = np.empty((len(ts), sys.n))
    states[0] = x0
    x = np.array(x0, dtype=float)
    mat = sys.matrix
    dv = d.vector
    cap = TOL.overflow
    for i in range(1, len(ts)):
        a = float(ts[i - 1])
        h = (float(ts[i]) - a) / m
        for k in range(m):
            t = a + k * h
            tm = t + 0.5 * h
            te = t + h
            A2 = mat(tm)
            d2 = dv(tm)
            k1 = mat(t) @ x + dv(t)
            k2 = A2 @ (x + (0.5 * h) * k1) + d2
            k3 = A2 @ (x + (0.5 * h) * k2) + d2
            k4 = mat(te) @ (x + h * k3) + dv(te)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(x).all() or float(np.abs(x).max()) > cap:
            return states, i
        states[i] = x
    return states, None


def _voc_states(sys: SystemDef, d: Disturbance, x0: np.ndarray, ts: np.ndarray,
                check_idx: Sequence[int]) -> list[np.ndarray]:
    # shared panel grid: every sample interval split so panels are finer
    # than period/128, each panel carrying two half-span transitions
    i_max = max(check_idx)
    panels = []  # (a, mid, b, first_half, second_half)
    for i in range(i_max):
        a = float(ts[i])
        b = float(ts[i + 1])
        q = max(1, int(math.ceil(128.0 * (b - a) / sys.period)))
        for k in range(q):
            pa = a + (b - a) * k / q
            pb = a + (b - a) * (k + 1) / q
            pm = 0.5 * (pa + pb)
            first = integrate_transition(sys, pa, pm, tol=1e-9).value
            second = integrate_transition(sys, pm, pb, tol=1e-9).value
            panels.append((pa, pm, pb, first, second))
    ends = np.array([p[2] for p in panels])
    out = []
    for idx in check_idx:
        t_c = float(ts[idx])
        last = int(np.searchsorted(ends, t_c - 1e-12, side="left"))
        R = np.eye(sys.n)
        total = np.zeros(sys.n)
        for k in range(last, -1, -1):
            pa, pm, pb, first, second = panels[k]
            h = pb - pa
            phi_mid = R @ second
            phi_a = phi_mid @ first
            total += (h / 6.0) * (phi_a @ d.vector(pa)
                                  + 4.0 * (phi_mid @ d.vector(pm))
                                  + R @ d.vector(pb))
            R = phi_a
        out.append(R @ x0 + total)
    return out


def simulate_perturbed(sys: SystemDef, d: Disturbance, x0, t_end: float,
                       samples: int = 256, tol: float | None = None,
                       cross_check: bool = True, seed: int = 1729) -> Trajectory:
    """Integrate x' = A(t) x + d(t) from x(t0) = x0 up to t_end.

    The whole trajectory is recomputed with doubled substep counts until the
    sampled states settle to tol; with cross_check=True three random sample
    times are then audited against the variation-of-constants form, and a
    relative disagreement above 1e-5 raises NumericError.  Genuine unbounded
    growth comes back as a truncated trajectory with overflowed=True.
    """
    if tol is None:
        tol = TOL.ode_tol
    if d.n != sys.n:
        raise ValueError(f"disturbance dimension {d.n} does not match system dimension {sys.n}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 must have shape ({sys.n},), got {x0.shape}")
    if not math.isfinite(t_end) or t_end <= sys.t0:
        raise ValueError(f"t_end must exceed the initial time {sys.t0:g}")
    if samples < 2:
        raise ValueError("samples must be at least 2")
    ts = np.linspace(sys.t0, t_end, samples)
    m = max(1, int(math.ceil(TOL.ode_start_steps * (ts[1] - ts[0]) / sys.period)))
    prev = None
    while True:
        cur, blow = _rk4_pass(sys, d, x0, ts, m)
        if blow is not None:
            # RK4 itself diverges when the substep is too coarse against |A|,
            # so only believe an overflow once the step resolves the system
            h = (float(ts[blow]) - float(ts[blow - 1])) / m
            coarse = h * mat_norm(sys.matrix(float(ts[blow])), INF) >= 0.5
            if coarse and 2 * m * (samples - 1) <= TOL.ode_max_steps:
                m *= 2
                prev = None
                continue
            if blow < 2:
                raise BlowupError(f"state exceeded {TOL.overflow:.1e} on the first sample interval",
                                  t_reached=float(ts[blow]))
            t_cut = ts[:blow].copy()
            s_cut = cur[:blow].copy()
            t_cut.flags.writeable = False
            s_cut.flags.writeable = False
            return Trajectory(t_cut, s_cut, m, float("inf"), (), None,
                              overflowed=True, t_overflow=float(ts[blow]))
        if prev is not None:
            diff = float(np.abs(cur - prev).max())
            if diff <= tol * (1.0 + float(np.abs(cur).max())):
                break
        if 2 * m * (samples - 1) > TOL.ode_max_steps:
            raise ConvergenceError(f"trajectory did not settle within {TOL.ode_max_steps} total steps")
        prev = cur
        m *= 2
    err = diff / 15.0
    check_times: tuple[float, ...] = ()
    check_error = None
    if cross_check:
        rng = np.random.default_rng(seed)
        idx = sorted(int(i) for i in rng.choice(np.arange(1, samples), size=min(3, samples - 1),
                                                replace=False))
        voc = _voc_states(sys, d, x0, ts, idx)
        check_error = 0.0
        for i, xv in zip(idx, voc):
            rel = float(np.abs(cur[i] - xv).max()) / (1.0 + float(np.abs(xv).max()))
            check_error = max(check_error, rel)
        check_times = tuple(float(ts[i]) for i in idx)
        if check_error > 1e-5:
            raise NumericError(
                f"stepper and variation-of-constants disagree: relative error {check_error:.3e}")
    ts.flags.writeable = False
    cur.flags.writeable = False
    return Trajectory(ts, cur, m, err, check_times, check_error)


@dataclass(frozen=True)
class ConvergenceReport:
    """Tail behaviour of a trajectory in a chosen norm."""

    tail_start: float
    tail_max_norm: float
    decreasing_tail: bool


def convergence_report(traj: Trajectory, kind: NormKind = TWO) -> ConvergenceReport:
    """Maximum norm over the last quarter of the samples, plus a coarse
    monotonicity check: block maxima over the last half must not increase."""
    if len(traj.times) < 16:
        raise ValueError("convergence report needs at least 16 trajectory samples")
    ns = np.array([vec_norm(traj.states[i], kind) for i in range(len(traj.times))])
    q = len(ns) // 4
    tail = ns[-q:] if q > 0 else ns
    half = ns[len(ns) // 2:]
    blocks = np.array_split(half, 4)
    maxima = [float(b.max()) for b in blocks if len(b)]
    decreasing = all(maxima[i + 1] <= maxima[i] * (1.0 + 1e-9) for i in range(len(maxima) - 1))
    return ConvergenceReport(float(traj.times[len(ns) - len(tail)]), float(tail.max()), decreasing)


@dataclass(frozen=True)
class DriftReport:
    """Windowed suprema of the running disturbance integral and the log
    slope of their tail."""

    times: np.ndarray
    sups: np.ndarray
    window: float
    tail_log_slope: float


def windowed_drift(d: Disturbance, t_grid, window: float = 1.0,
                   eta_samples: int = 64) -> DriftReport:
    """sup over eta in [0, window] of |integral of d over [t, t + eta]|_2,
    for each grid time t.

    This is weaker than asking |d| itself to vanish: a persistent but ever
    faster oscillating disturbance integrates away to nothing, and it is
    the integral form whose decay transfers to the forced state of a
    uniformly exponentially stable system.  The sup is taken over an eta
    refinement with eta_samples subintervals, each integrated adaptively
    per component; tail_log_slope is the least squares slope of the log of
    the sups over the last third of the grid.
    """
    if window <= 0.0 or eta_samples < 8:
        raise ValueError("window must be positive and eta_samples at least 8")
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size < 3:
        raise ValueError("t_grid must be a 1-d grid with at least 3 points")
    edges = np.linspace(0.0, window, eta_samples + 1)
    sups = np.empty(ts.size)
    for i, t in enumerate(ts):
        t = float(t)
        cum = np.zeros(d.n)
        sup = 0.0
        for j in range(1, edges.size):
            for c, fn in enumerate(d._compiled):
                cum[c] += integrate(fn, t + float(edges[j - 1]), t + float(edges[j]))[0]
            sup = max(sup, vec_norm(cum, TWO))
        sups[i] = sup
    third = max(2, ts.size // 3)
    logs = np.log(np.maximum(sups[-third:], 1e-300))
    slope = float(np.polyfit(ts[-third:], logs, 1)[0])
    return DriftReport(ts, sups, window, slope)
