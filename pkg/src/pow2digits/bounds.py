"""The normalized log generating function, its upper bounds, and the
zero-digit large-deviation apparatus built on top of it."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .digits import WeightFunction, omega_size
from .transfer import (
    DEFAULT_MEMORY_BUDGET,
    DEFAULT_SPARSE_CAP,
    InfeasiblePlan,
    MeetPlan,
    _resolve_plan,
    weighted_omega_sum_exact,
    weighted_omega_sum_scaled,
)

LOG5 = math.log(5.0)
P_ZERO = 0.1  # chance of a zero digit under uniform digits


def log_fraction(x: Fraction) -> float:
    """Natural log of a positive rational without overflowing float range."""
    if x <= 0:
        return -math.inf
    k = x.numerator.bit_length() - x.denominator.bit_length()
    return math.log(float(x / Fraction(2) ** k)) + k * math.log(2.0)


def log_omega_size(n: int) -> float:
    return math.log(4.0) + (n - 1) * LOG5


@dataclass(frozen=True)
class PsiResult:
    n: int
    log_sum: float
    psi: float
    bound_1norm: float  # log(max(E, O) / 5), proved limsup bound
    bound_conjectured: float  # log(sum_j h(j) / 10)
    finite_n_bound: float  # the 1-norm chain at this n, normalized like psi
    equal_parity_log_sum: float | None  # closed form when E == O

    @property
    def gap_1norm(self) -> float:
        return self.bound_1norm - self.psi

    @property
    def gap_conjectured(self) -> float:
        return self.bound_conjectured - self.psi

    @property
    def active_bound(self) -> str:
        """The tightest bound psi currently sits under."""
        if self.psi <= self.bound_conjectured:
            return "conjectured"
        if self.psi <= self.bound_1norm:
            return "1norm"
        return "finite_n"

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "log_sum": self.log_sum,
            "psi": self.psi,
            "bound_1norm": self.bound_1norm,
            "bound_conjectured": self.bound_conjectured,
            "finite_n_bound": self.finite_n_bound,
            "equal_parity_log_sum": self.equal_parity_log_sum,
            "gap_1norm": self.gap_1norm,
            "gap_conjectured": self.gap_conjectured,
            "active_bound": self.active_bound,
        }


def _log(x) -> float:
    if isinstance(x, Fraction):
        return log_fraction(x)
    return math.log(x) if x > 0 else -math.inf


def finite_n_log_bound(n: int, h: WeightFunction) -> float:
    """log[(h(2)+h(4)+h(6)+h(8)) max(E, O)^(n-1)], the induced 1-norm chain."""
    return _log(h.boundary_mass) + (n - 1) * _log(max(h.even_sum, h.odd_sum))


def psi(
    n: int,
    h: WeightFunction,
    plan: MeetPlan | None = None,
    exact: bool = False,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
) -> PsiResult:
    """Psi_n(h) = (1/n) log(|Omega_n|^-1 sum prod h(w_j)), with both bounds.

    ``psi`` is formed from an exact ratio against |Omega_n| so that h = 1
    gives 0 exactly. ``log_sum`` and ``psi`` are ``-inf`` when the sum is 0.
    """
    if exact:
        total = weighted_omega_sum_exact(n, h, plan, memory_budget, sparse_cap)
        ratio = total / omega_size(n)
    else:
        mant, exp2 = weighted_omega_sum_scaled(n, h, plan, memory_budget, sparse_cap)
        total = Fraction(mant) * Fraction(2) ** exp2
        ratio = total / omega_size(n)
    log_sum = log_fraction(total)
    value = log_fraction(ratio) / n
    E, O = h.even_sum, h.odd_sum
    closed = None
    if E == O:
        closed = (n - 1) * _log(E) + _log(h.boundary_mass)
    return PsiResult(
        n=n,
        log_sum=log_sum,
        psi=value,
        bound_1norm=_log(max(E, O)) - LOG5,
        bound_conjectured=_log(h.total) - math.log(10.0),
        finite_n_bound=(finite_n_log_bound(n, h) - log_omega_size(n)) / n,
        equal_parity_log_sum=closed,
    )


# ---------------------------------------------------------------- rate function


def rate(a: float) -> float:
    """Upper-tail Cramer rate function of Bernoulli(1/10).

    sup over t >= 0 of a t - log((e^t + 9) / 10), in closed form.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError(f"rate function domain is [0, 1), got {a}")
    if a <= P_ZERO:
        return 0.0
    return a * math.log(10.0 * a) + (1.0 - a) * math.log(10.0 * (1.0 - a) / 9.0)


def rate_grid_sup(a: float, t_max: float = 40.0, step: float = 1e-4) -> float:
    """The same supremum taken over a uniform grid of t in [0, t_max]."""
    t = np.arange(0.0, t_max + step / 2, step)
    vals = a * t - (np.logaddexp(t, math.log(9.0)) - math.log(10.0))
    return float(vals.max())


def find_a0(tol: float = 1e-12) -> float:
    """The unique a in (1/10, 1) with rate(a) = log 5."""
    return brentq(lambda a: rate(a) - LOG5, P_ZERO, 1.0 - 1e-15, xtol=tol)


@dataclass(frozen=True)
class ChernoffBound:
    n: int
    a: float
    x: float
    log_bound: float  # log of x^(-a n) sum x^N0, bounds log #{N0 >= a n}
    slope: float  # log 5 - (a log x - log((x+9)/10))


def chernoff_count_bound(
    n: int,
    a: float,
    x: float,
    plan: MeetPlan | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> ChernoffBound:
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    mant, exp2 = weighted_omega_sum_scaled(
        n, WeightFunction.zero_weight(float(x)), plan, memory_budget
    )
    log_sum = log_fraction(Fraction(mant) * Fraction(2) ** exp2)
    log_x = math.log(x)
    return ChernoffBound(
        n=n,
        a=a,
        x=x,
        log_bound=log_sum - a * n * log_x,
        slope=LOG5 - (a * log_x - f1(x)),
    )


# -------------------------------------------------------------------- envelopes

F3_EXPONENT = 7.2
F3_SHIFT = 3.224e9
F3_SCALE = 1.157e9


def f1(x):
    """Conjectured envelope log((x + 9) / 10)."""
    return np.log((np.asarray(x, dtype=float) + 9.0) / 10.0)[()]


def f2(x):
    """Proved envelope log((x + 4) / 5)."""
    return np.log((np.asarray(x, dtype=float) + 4.0) / 5.0)[()]


def f3(x, exponent=F3_EXPONENT, shift=F3_SHIFT, scale=F3_SCALE):
    """Relaxed envelope log((x^7.2 + 3.224e9) / 1.157e9), evaluated in log space."""
    x = np.asarray(x, dtype=float)
    return (np.logaddexp(exponent * np.log(x), math.log(shift)) - math.log(scale))[()]


@dataclass(frozen=True)
class EnvelopeSet:
    lo: float
    hi: float
    exponent: float = F3_EXPONENT
    shift: float = F3_SHIFT
    scale: float = F3_SCALE

    def f3(self, x):
        return f3(x, self.exponent, self.shift, self.scale)

    def table(self, xs: Iterable[float]) -> list[tuple[float, float, float, float]]:
        xs = np.asarray(list(xs), dtype=float)
        return list(zip(xs.tolist(), f1(xs).tolist(), f2(xs).tolist(), self.f3(xs).tolist()))


def interval_A(
    tol: float = 1e-12,
    x_max: float = 1e4,
    samples: int = 20001,
    exponent=F3_EXPONENT,
    shift=F3_SHIFT,
    scale=F3_SCALE,
) -> tuple[float, float]:
    """Endpoints of {x >= 1 : f3(x) <= f2(x)}, located by bracketing and bisection.

    Raises ValueError unless the set is a single interval inside [1, x_max]
    at the pre-scan resolution.
    """
    def gap(x):
        return float(f3(x, exponent, shift, scale) - f2(x))

    xs = np.geomspace(1.0, x_max, samples)
    g = f3(xs, exponent, shift, scale) - f2(xs)
    inside = g <= 0
    if not inside.any():
        raise ValueError(f"f3 stays above f2 on [1, {x_max}]")
    edges = np.flatnonzero(np.diff(inside.astype(np.int8)))
    if inside[0] or inside[-1] or len(edges) != 2:
        raise ValueError(f"{{f3 <= f2}} is not one interval inside [1, {x_max}]")
    lo = brentq(gap, xs[edges[0]], xs[edges[0] + 1], xtol=tol)
    hi = brentq(gap, xs[edges[1]], xs[edges[1] + 1], xtol=tol)
    return lo, hi


def envelopes(tol: float = 1e-12, x_max: float = 1e4) -> EnvelopeSet:
    lo, hi = interval_A(tol, x_max)
    return EnvelopeSet(lo, hi)


# ------------------------------------------------------------------- r_n(x) scan

DEFAULT_X_LIST = (1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 100)


def default_x_grid() -> list[float]:
    dense = [1.0 + 0.25 * k for k in range(77)]  # 1 .. 20
    return sorted(set(float(x) for x in DEFAULT_X_LIST) | set(dense))


@dataclass(frozen=True)
class ScanRow:
    n: int
    x: float
    r: float
    log_sum: float
    status: str = "ok"
    runtime_ms: float | None = None


def r_value(n: int, x: float, plan: MeetPlan | None = None, **kw) -> tuple[float, float]:
    """(r_n(x), log_sum) with r_n(x) = f1(x) - Psi_n(h0=x)."""
    res = psi(n, WeightFunction.zero_weight(float(x)), plan, **kw)
    return float(f1(x)) - res.psi, res.log_sum


def r_scan(
    n_list: Sequence[int],
    x_grid: Sequence[float],
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
    threads: int = 1,
    timing: bool = False,
) -> list[ScanRow]:
    """r_n(x) for every (n, x); infeasible n yield marker rows, the rest still run.

    Rows come back ordered by (n, x) whatever the thread count.
    """
    for x in x_grid:
        if x < 1:
            raise ValueError(f"x grid must satisfy x >= 1, got {x}")

    plans: dict = {}
    for n in n_list:
        try:
            plans[n] = _resolve_plan(n, None, memory_budget, sparse_cap)
        except InfeasiblePlan as exc:
            plans[n] = exc

    def cell(key):
        n, x = key
        plan = plans[n]
        if isinstance(plan, InfeasiblePlan):
            return ScanRow(n, x, math.nan, math.nan, "infeasible")
        t0 = time.perf_counter()
        r, log_sum = r_value(n, x, plan)
        ms = (time.perf_counter() - t0) * 1e3 if timing else None
        return ScanRow(n, x, r, log_sum, "ok", ms)

    keys = sorted({(int(n), float(x)) for n in n_list for x in x_grid})
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(cell, keys))
    return [cell(k) for k in keys]
