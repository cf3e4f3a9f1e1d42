"""Periodic linear systems and their one-period contraction certificates.

A system x' = A(t) x with T-periodic entries is described symbolically so
A(t) can be evaluated exactly at any time.  For a chosen vector norm the
running integrals

    pi_plus(t)  = integral of mu[ A(s)] over [t0, t]
    pi_minus(t) = integral of mu[-A(s)] over [t0, t]

bound the state transition factor from above by exp(pi_plus) and from below
by exp(-pi_minus).  Both are sandwiched between straight lines with the
common slope lambda = pi(T)/T and offsets delta_lower/delta_upper, the
extreme deviations over one period.  Everything downstream (stability
verdicts, Floquet-exponent strips, decay envelopes) is read off these five
numbers per direction; rate_summary computes them and classify turns them
into a certificate:

    pi_plus(T) < 0  -> uniformly exponentially stable, with explicit
                       overshoot K and decay rate alpha
    pi_plus(T) = 0  -> uniformly stable
    pi_minus(T) < 0 -> unstable (the lower bound grows)
    otherwise       -> inconclusive in this norm

Quadrature is adaptive Simpson; the integrands are continuous but can have
kinks where off-diagonal entries or symmetric-part eigenvalues cross, so
error estimates are carried through and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import linalg, lognorm
from .config import TOL
from .errors import InputError
from .expr import Expression, ParseError, compile_expr, contains_time, parse, to_string
from .linalg import NormKind

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SystemDef:
    """A square matrix of time expressions with a declared period.

    entries holds parsed expression trees, row-major; period is the declared
    T > 0 and t0 the initial time.  Instances are immutable and hashable, so
    derived quantities can be cached on the system itself.  Use
    system_from_strings for the common construction from text.
    """

    entries: tuple[tuple[Expression, ...], ...]
    period: float
    t0: float = 0.0

    def __post_init__(self):
        n = len(self.entries)
        if n == 0:
            raise InputError("system has no rows")
        if n > TOL.max_dim:
            raise InputError(f"system dimension {n} exceeds the cap {TOL.max_dim}")
        for row in self.entries:
            if len(row) != n:
                raise InputError(f"matrix is not square: {n} rows but a row of length {len(row)}")
        if not (isinstance(self.period, float) and math.isfinite(self.period) and self.period > 0.0):
            raise InputError(f"period must be a positive finite number, got {self.period!r}")
        if not (isinstance(self.t0, float) and math.isfinite(self.t0) and self.t0 >= 0.0):
            raise InputError(f"initial time must be finite and >= 0, got {self.t0!r}")
        flat = tuple(compile_expr(e) for row in self.entries for e in row)
        object.__setattr__(self, "_flat", flat)
        constant = not any(contains_time(e) for row in self.entries for e in row)
        object.__setattr__(self, "_constant", constant)
        if constant:
            A = np.array([fn(0.0) for fn in flat], dtype=float).reshape(n, n)
            A.flags.writeable = False
            object.__setattr__(self, "_const_matrix", A)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_constant(self) -> bool:
        return self._constant

    def matrix(self, t: float) -> np.ndarray:
        """Evaluate A(t).  Constant systems return a shared read-only array."""
        if self._constant:
            return self._const_matrix
        n = len(self.entries)
        out = np.empty(n * n)
        for idx, fn in enumerate(self._flat):
            out[idx] = fn(t)
        return out.reshape(n, n)

    def as_strings(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(to_string(e) for e in row) for row in self.entries)


def system_from_strings(rows: Sequence[Sequence[str]], period: float, t0: float = 0.0) -> SystemDef:
    """Parse a row-major matrix of expression strings into a SystemDef."""
    parsed = []
    for i, row in enumerate(rows):
        prow = []
        for j, text in enumerate(row):
            try:
                prow.append(parse(text))
            except ParseError as exc:
                raise InputError(f"entry ({i + 1},{j + 1}): {exc}") from exc
        parsed.append(tuple(prow))
    return SystemDef(tuple(parsed), float(period), float(t0))


def validate_periodicity(sys: SystemDef, grid: int | None = None) -> float:
    """Compare A(t) with A(t + T) on a sample grid.

    Returns the largest entrywise deviation found; raises InputError when it
    exceeds the configured tolerance relative to the sampled magnitude.  A
    declared period that divides the true one passes, which is harmless:
    every certificate below remains valid for it.
    """
    if sys.is_constant:
        return 0.0
    g = grid if grid is not None else TOL.periodicity_grid
    worst = 0.0
    scale = 1.0
    for j in range(g):
        t = sys.t0 + sys.period * j / g
        a = sys.matrix(t)
        b = sys.matrix(t + sys.period)
        worst = max(worst, float(np.abs(a - b).max()))
        scale = max(scale, float(np.abs(a).max()))
    if worst > TOL.periodicity_tol * scale:
        raise InputError(
            f"entries are not {sys.period:g}-periodic: deviation {worst:.3e} "
            f"exceeds {TOL.periodicity_tol * scale:.3e}")
    return worst


# ---------------------------------------------------------------- quadrature

def _adapt(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    flm = f(0.5 * (a + m))
    frm = f(0.5 * (m + b))
    h12 = (b - a) / 12.0
    left = h12 * (fa + 4.0 * flm + fm)
    right = h12 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0, abs(delta) / 15.0
    lv, le = _adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
    rv, re = _adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    return lv + rv, le + re


def integrate(f: Callable[[float], float], a: float, b: float,
              abs_tol: float | None = None, max_depth: int | None = None) -> tuple[float, float]:
    """Adaptive Simpson quadrature of f over [a, b].

    Returns (value, error_estimate).  The estimate is the accumulated
    Richardson correction; when the depth cap is hit it simply comes out
    larger, nothing raises.
    """
    if abs_tol is None:
        abs_tol = TOL.quad_abs
    if max_depth is None:
        max_depth = TOL.quad_max_depth
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    value, err = _adapt(f, a, b, fa, fm, fb, whole, abs_tol, max_depth)
    return sign * value, err


# ------------------------------------------------------------ running rates

def _mu_fn(sys: SystemDef, kind: NormKind, sign: int) -> Callable[[float], float]:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    mu = lognorm.mu
    mat = sys.matrix
    if sign > 0:
        return lambda s: mu(mat(s), kind)
    return lambda s: mu(-mat(s), kind)


@lru_cache(maxsize=64)
def _scan(sys: SystemDef, kind: NormKind, sign: int):
    # cumulative one-period integral of mu[sign A] at scan grid points
    f = _mu_fn(sys, kind, sign)
    N = TOL.scan_points
    ts = np.linspace(sys.t0, sys.t0 + sys.period, N + 1)
    cum = np.empty(N + 1)
    cum[0] = 0.0
    total = 0.0
    err = 0.0
    for j in range(N):
        v, e = integrate(f, float(ts[j]), float(ts[j + 1]), TOL.quad_abs)
        total += v
        err += e
        cum[j + 1] = total
    ts.flags.writeable = False
    cum.flags.writeable = False
    return ts, cum, err


def pi_integral(sys: SystemDef, kind: NormKind, sign: int, t: float) -> tuple[float, float]:
    """Integral of mu[sign A(s)] over [t0, t], reduced modulo the period.

    Whole periods reuse one cached period integral; only the fractional tail
    is integrated fresh.  Returns (value, error_estimate).
    """
    if t < sys.t0:
        if t < sys.t0 - 1e-12 * (1.0 + abs(sys.t0)):
            raise ValueError(f"t={t:g} precedes the initial time {sys.t0:g}")
        t = sys.t0
    if sys.is_constant:
        m = lognorm.mu(sign * sys.matrix(sys.t0), kind)
        return m * (t - sys.t0), 0.0
    T = sys.period
    tau = t - sys.t0
    k = int(tau // T)
    r = tau - k * T
    if r < 0.0:
        k -= 1
        r += T
    ts, cum, scan_err = _scan(sys, kind, sign)
    per = float(cum[-1])
    if r == 0.0:
        return k * per, k * scan_err
    N = TOL.scan_points
    j = min(int(r / T * N), N - 1)
    target = sys.t0 + r
    if target < float(ts[j]):
        j -= 1
    part, perr = integrate(_mu_fn(sys, kind, sign), float(ts[j]), target, TOL.quad_abs)
    err = k * scan_err + (j / N) * scan_err + perr
    return k * per + float(cum[j]) + part, err


@dataclass(frozen=True)
class RateSummary:
    """Per-period rates and envelope offsets for both field directions.

    lambda_* are the period averages pi_*(T)/T; delta_upper_*/delta_lower_*
    are the largest and smallest values of pi_*(t) - lambda_* (t - t0) over
    one period, so that within [t0, t0 + T] (and by periodicity, forever)

        lambda (t - t0) + delta_lower <= pi(t) <= lambda (t - t0) + delta_upper.

    quadrature_error is the summed Simpson error estimate behind them.
    """

    kind: NormKind
    t0: float
    period: float
    lambda_plus: float
    lambda_minus: float
    delta_upper_plus: float
    delta_lower_plus: float
    delta_upper_minus: float
    delta_lower_minus: float
    pi_plus_period: float
    pi_minus_period: float
    quadrature_error: float


def _golden_max(fn, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = fn(c)
    fd = fn(d)
    best = max(fc, fd)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
        best = max(best, fc, fd)
    return best


def _refine_extremum(phi, ts, g, j, want_max):
    # golden-section polish inside the bracket of grid neighbours
    a = float(ts[max(j - 1, 0)])
    b = float(ts[min(j + 1, len(ts) - 1)])
    tol = TOL.refine_width * (float(ts[-1]) - float(ts[0]))
    grid_val = float(g[j])
    if want_max:
        return max(grid_val, _golden_max(phi, a, b, tol))
    return min(grid_val, -_golden_max(lambda t: -phi(t), a, b, tol))


@lru_cache(maxsize=128)
def rate_summary(sys: SystemDef, kind: NormKind) -> RateSummary:
    """Compute the RateSummary for a system and norm (cached).

    The deviation pi(t) - lambda (t - t0) is scanned on a uniform grid of
    per-segment adaptive integrals, then each candidate extremum is polished
    by golden-section search on the continuous deviation.  Constant systems
    short-circuit: pi is exactly linear and every delta is zero.
    """
    T = sys.period
    t0 = sys.t0
    if sys.is_constant:
        A = sys.matrix(t0)
        mp = lognorm.mu(A, kind)
        mm = lognorm.mu(-A, kind)
        return RateSummary(kind, t0, T, mp, mm, 0.0, 0.0, 0.0, 0.0, mp * T, mm * T, 0.0)
    N = TOL.scan_points
    per_sign = {}
    err_total = 0.0
    for sign in (1, -1):
        ts, cum, err = _scan(sys, kind, sign)
        err_total += err
        per = float(cum[-1])
        lam = per / T
        g = cum - lam * (ts - t0)
        f = _mu_fn(sys, kind, sign)

        def phi(t, _f=f, _ts=ts, _cum=cum, _lam=lam):
            j = min(int((t - t0) / T * N), N - 1)
            if t < float(_ts[j]):
                j -= 1
            v, _ = integrate(_f, float(_ts[j]), t, TOL.quad_abs)
            return float(_cum[j]) + v - _lam * (t - t0)

        du = _refine_extremum(phi, ts, g, int(np.argmax(g)), True)
        dl = _refine_extremum(phi, ts, g, int(np.argmin(g)), False)
        per_sign[sign] = (lam, du, dl, per)
    lam_p, du_p, dl_p, per_p = per_sign[1]
    lam_m, du_m, dl_m, per_m = per_sign[-1]
    return RateSummary(kind, t0, T, lam_p, lam_m, du_p, dl_p, du_m, dl_m, per_p, per_m, err_total)


# ------------------------------------------------------------ certification

@dataclass(frozen=True)
class Verdict:
    """Outcome of the one-period drift test in a fixed norm.

    classification is one of "UES", "US", "unstable", "inconclusive".  For
    the two stable outcomes K bounds the overshoot and alpha_tilde the decay
    rate (zero for plain uniform stability):

        |x(t)| <= K exp(-alpha_tilde (t - s)) |x(s)|   for t >= s >= t0.

    strip = (-lambda_minus, lambda_plus) brackets the real parts of every
    Floquet characteristic exponent regardless of the outcome.
    """

    classification: str
    kind: NormKind
    rates: RateSummary
    strip: tuple[float, float]
    K: float | None
    alpha_tilde: float | None
    message: str


def classify(sys: SystemDef, kind: NormKind, zero_tol: float | None = None) -> Verdict:
    """Stability verdict for x' = A(t) x from one-period drift integrals.

    The test is sufficient, not necessary: "inconclusive" means this norm
    does not decide, and another norm or the transition-matrix route may
    still settle it.  Verdicts depending on the sign of a near-zero drift
    use a resolution band: zero_tol if given, else a default tied to the
    quadrature error estimate.
    """
    rates = rate_summary(sys, kind)
    T = sys.period
    if zero_tol is None:
        band = max(TOL.zero_band, 10.0 * rates.quadrature_error)
    else:
        if not (math.isfinite(zero_tol) and zero_tol >= 0.0):
            raise InputError(f"zero_tol must be a finite number >= 0, got {zero_tol!r}")
        band = zero_tol
    strip = (-rates.lambda_minus, rates.lambda_plus)
    pi_p = rates.pi_plus_period
    pi_m = rates.pi_minus_period
    if pi_p < -band:
        K = math.exp(rates.delta_upper_plus - rates.delta_lower_plus)
        alpha = -pi_p / T
        msg = (f"uniformly exponentially stable: one-period drift {pi_p:.6g} < 0; "
               f"|x(t)| <= {K:.6g} exp(-{alpha:.6g} (t-s)) |x(s)|")
        return Verdict("UES", kind, rates, strip, K, alpha, msg)
    if pi_p <= band:
        K = math.exp(rates.delta_upper_plus - rates.delta_lower_plus)
        msg = (f"uniformly stable: one-period drift {pi_p:.6g} vanishes within the "
               f"resolution band {band:.2g}; |x(t)| <= {K:.6g} |x(s)|")
        return Verdict("US", kind, rates, strip, K, 0.0, msg)
    if pi_m < -band:
        rate = -pi_m / T
        msg = (f"unstable: reversed-field one-period drift {pi_m:.6g} < 0 forces "
               f"|x(t)| >= c exp({rate:.6g} (t-s)) |x(s)|")
        return Verdict("unstable", kind, rates, strip, None, None, msg)
    msg = (f"inconclusive in this norm: both one-period drifts are positive "
           f"({pi_p:.6g} and {pi_m:.6g}); try another norm or the transition-matrix route")
    return Verdict("inconclusive", kind, rates, strip, None, None, msg)


def fce_strip(sys: SystemDef, kind: NormKind) -> tuple[float, float]:
    """Closed real-part strip [-lambda_minus, lambda_plus] that contains
    every Floquet characteristic exponent of the system."""
    rates = rate_summary(sys, kind)
    return (-rates.lambda_minus, rates.lambda_plus)


# ------------------------------------------------------- frozen-time route

@dataclass(frozen=True)
class FrozenTimeReport:
    """Slowly-varying sufficient conditions evaluated on a frozen-time grid.

    applicable requires every sampled frozen matrix to be Hurwitz; alpha is
    the worst stability margin -max Re eig A(t) and m_bound the sampled sup
    of |A(t)|_2 (m_margin adds 5 percent headroom for the grid gap).  The
    first condition asks alpha > 4 m_margin; the second bounds the sampled
    sup of |A'(t)|_2 by c2_bound = (2/(2n-1)) alpha^(4n-2) / (2 m^(4n-4)).
    c2_bound_alt replaces the denominator by (2m)^(4n-4), the tighter
    reading; both are reported.
    """

    applicable: bool
    grid_points: int
    m_bound: float
    m_margin: float
    worst_abscissa: float
    alpha: float
    sup_adot: float
    c1_satisfied: bool
    c2_satisfied: bool
    c2_bound: float
    c2_bound_alt: float


def frozen_time_check(sys: SystemDef, grid_points: int = 64) -> FrozenTimeReport:
    """Evaluate the frozen-time conditions for x' = A(t) x on a grid.

    This route is independent of the drift integrals: it certifies stability
    from pointwise spectra plus a bound on how fast A may move.  It is very
    conservative; the report exists mainly to show when it cannot apply.
    """
    if grid_points < 16:
        raise InputError("grid_points must be at least 16")
    n = sys.n
    T = sys.period
    h = TOL.fd_step * T
    m_bound = 0.0
    worst = -math.inf
    sup_adot = 0.0
    for j in range(grid_points):
        t = sys.t0 + T * j / grid_points
        A = sys.matrix(t)
        m_bound = max(m_bound, linalg.mat_norm(A, lognorm.TWO))
        worst = max(worst, max(z.real for z in linalg.gen_eigs(A)))
        if not sys.is_constant:
            dA = (sys.matrix(t + h) - sys.matrix(t - h)) / (2.0 * h)
            sup_adot = max(sup_adot, linalg.mat_norm(dA, lognorm.TWO))
    m_margin = 1.05 * m_bound
    alpha = -worst
    applicable = worst < 0.0
    c1 = applicable and alpha > 4.0 * m_margin
    if applicable and m_margin > 0.0:
        c2_bound = (2.0 / (2 * n - 1)) * alpha ** (4 * n - 2) / (2.0 * m_margin ** (4 * n - 4))
        c2_bound_alt = (2.0 / (2 * n - 1)) * alpha ** (4 * n - 2) / ((2.0 * m_margin) ** (4 * n - 4))
        c2 = sup_adot < c2_bound
    else:
        c2_bound = 0.0
        c2_bound_alt = 0.0
        c2 = False
    return FrozenTimeReport(applicable, grid_points, m_bound, m_margin, worst,
                            alpha, sup_adot, c1, c2, c2_bound, c2_bound_alt)


def barrier_series(sys: SystemDef, kind: NormKind, t_end: float, samples: int = 512) -> np.ndarray:
    """Sample the running integrals and their linear envelopes on [t0, t_end].

    Returns an array of shape (samples, 7) with columns t, pi_plus,
    pi_minus, low_plus, up_plus, low_minus, up_minus, where low/up are the
    sandwich lines lambda (t - t0) + delta_lower / delta_upper per sign.
    """
    if not math.isfinite(t_end) or t_end <= sys.t0:
        raise ValueError(f"t_end must exceed the initial time {sys.t0:g}")
    if samples < 2:
        raise ValueError("samples must be at least 2")
    rates = rate_summary(sys, kind)
    out = np.empty((samples, 7))
    for idx, t in enumerate(np.linspace(sys.t0, t_end, samples)):
        tf = float(t)
        pp, _ = pi_integral(sys, kind, 1, tf)
        pm, _ = pi_integral(sys, kind, -1, tf)
        dt = tf - sys.t0
        out[idx, 0] = tf
        out[idx, 1] = pp
        out[idx, 2] = pm
        out[idx, 3] = rates.lambda_plus * dt + rates.delta_lower_plus
        out[idx, 4] = rates.lambda_plus * dt + rates.delta_upper_plus
        out[idx, 5] = rates.lambda_minus * dt + rates.delta_lower_minus
        out[idx, 6] = rates.lambda_minus * dt + rates.delta_upper_minus
    return out
