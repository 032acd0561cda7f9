"""Matrix-free transfer operator and meet-in-the-middle chain evaluation.

``M_m^[h]`` is the 2^(m-1) x 2^m matrix with ``h(j)`` in row ``i`` at column
``(10 i + j) mod 2^m``. It is never stored (except by the small debug helper
:func:`materialize_matrix`). Row vectors are pushed through it by
:func:`forward_step` (appending a more significant digit) and column vectors
are pulled back by :func:`backward_step`.

The weighted sum over the length-n endings of powers of two equals::

    M_1^[h_n] M_2^[h_(n-1)] ... M_(n-1)^[h_2] b^(n-1,[h_1])

which is evaluated as (dense forward prefix up to level K) . (backward
suffix from the four-sparse boundary vector down to level K).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import kernels
from .digits import WeightFunction, boundary_vector

LOG2 = math.log(2.0)
BYTES_PER_ENTRY = 8
DEFAULT_MEMORY_BUDGET = 4 * 2**30
DEFAULT_SPARSE_CAP = 2**24
DEBUG_DENSE_THRESHOLD = 12

# rough peak-to-payload ratios of the kernels, including numpy temporaries
_FORWARD_FACTOR = 3.5
_DENSE_BACKWARD_FACTOR = 3.0
_SPARSE_BYTES_PER_ENTRY = 48

Weights = Union[WeightFunction, Sequence[WeightFunction]]


class InfeasiblePlan(RuntimeError):
    """No meeting level fits the memory budget."""

    def __init__(self, n, needed_bytes, memory_budget, meet=None):
        self.n = n
        self.needed_bytes = int(needed_bytes)
        self.memory_budget = int(memory_budget)
        self.meet = meet
        super().__init__(
            f"n={n}: cheapest plan needs ~{self.needed_bytes / 2**30:.2f} GiB "
            f"(meet={meet}), budget is {self.memory_budget / 2**30:.2f} GiB"
        )

    def report(self) -> dict:
        return {
            "n": self.n,
            "needed_bytes": self.needed_bytes,
            "memory_budget": self.memory_budget,
            "meet": self.meet,
        }


def _normalize(arr):
    """Rescale a float vector by a power of two so its sum lies in [1/2, 1).

    Power-of-two scaling is exact, so normalization adds no rounding error.
    Returns the new array and the binary exponent removed.
    """
    if arr.dtype == object:
        return arr, 0
    total = float(arr.sum())
    if total == 0.0 or not math.isfinite(total):
        return arr, 0
    _, e = math.frexp(total)
    if e:
        arr = np.ldexp(arr, -e)
    return arr, e


@dataclass(frozen=True)
class TransferState:
    """Dense nonnegative vector over residues mod 2^m, stored as mantissa * 2**exp2.

    In exact mode the mantissa is an ``object`` array of ``Fraction`` and
    ``exp2`` stays 0.
    """

    m: int
    mantissa: np.ndarray
    exp2: int = 0

    def __post_init__(self):
        if self.mantissa.shape != (2**self.m,):
            raise ValueError(
                f"level {self.m} needs {2**self.m} entries, got {self.mantissa.shape}"
            )

    @property
    def exact(self) -> bool:
        return self.mantissa.dtype == object

    @property
    def log_scale(self) -> float:
        return self.exp2 * LOG2

    def check(self):
        if any(x < 0 for x in self.mantissa):
            raise AssertionError("negative mantissa entry")
        if not any(x > 0 for x in self.mantissa):
            raise AssertionError("state is identically zero")

    def values(self) -> np.ndarray:
        if self.exact:
            return self.mantissa.copy()
        return np.ldexp(self.mantissa, self.exp2)

    def log_total(self) -> float:
        total = self.mantissa.sum()
        if total == 0:
            return -math.inf
        return math.log(total) + self.log_scale


@dataclass(frozen=True)
class SparseState:
    """Sparse column vector over residues mod 2^m: positions -> positive weights."""

    m: int
    positions: np.ndarray  # sorted, int64
    values: np.ndarray
    exp2: int = 0

    def __post_init__(self):
        if self.positions.shape != self.values.shape:
            raise ValueError("positions and values differ in length")
        if len(self.positions) and (
            self.positions.min() < 0 or self.positions.max() >= 2**self.m
        ):
            raise ValueError(f"positions outside [0, 2^{self.m})")

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def log_scale(self) -> float:
        return self.exp2 * LOG2

    @property
    def nnz(self) -> int:
        return len(self.positions)

    def as_dict(self) -> dict:
        return {int(p): v for p, v in zip(self.positions, self.values)}

    @classmethod
    def from_dict(cls, m, entries, exact=False, exp2=0) -> SparseState:
        items = sorted((int(p), v) for p, v in entries.items() if v != 0)
        dtype = object if exact else np.float64
        return cls(
            m=m,
            positions=np.array([p for p, _ in items], dtype=np.int64),
            values=np.array([v for _, v in items], dtype=dtype),
            exp2=exp2,
        )

    def to_dense(self) -> TransferState:
        dense = np.zeros(2**self.m, dtype=self.values.dtype)
        dense[self.positions] = self.values
        return TransferState(self.m, dense, self.exp2)


def _weight_vector(h: WeightFunction, exact: bool):
    if exact:
        return tuple(x if isinstance(x, int) else Fraction(x) for x in h.w)
    return tuple(float(x) for x in h.w)


def initial_state(h: WeightFunction, exact: bool = False) -> TransferState:
    """v^1 = M_1 = [E, O]."""
    w = _weight_vector(h, exact)
    even, odd = sum(w[0::2]), sum(w[1::2])
    if exact:
        return TransferState(1, np.array([even, odd], dtype=object))
    arr, shift = _normalize(np.array([even, odd], dtype=np.float64))
    return TransferState(1, arr, shift)


def forward_step(v: TransferState, h: WeightFunction) -> TransferState:
    """v M_(m)^[h] for a state ``v`` at level m-1."""
    w = kernels.forward_dense(v.mantissa, _weight_vector(h, v.exact))
    w, shift = _normalize(w)
    return TransferState(v.m + 1, w, v.exp2 + shift)


def _weight_list(weights: Weights, n: int) -> tuple[WeightFunction, ...]:
    """Per-digit weights h_1..h_n (h_1 weighs the units digit)."""
    if isinstance(weights, WeightFunction):
        return (weights,) * n
    weights = tuple(weights)
    if len(weights) != n:
        raise ValueError(f"expected {n} weight functions, got {len(weights)}")
    return weights


def forward_vector(m: int, weights: Weights, exact: bool = False) -> TransferState:
    """v^(m,[h_1..h_m]): total weight of m-digit words per residue mod 2^m.

    Built as v^1 = [E, O] for h_m, then one step per remaining digit,
    ending with M_m^[h_1].
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    hs = _weight_list(weights, m)
    state = initial_state(hs[-1], exact)
    for level in range(2, m + 1):
        state = forward_step(state, hs[m - level])
    return state


def _densify(nnz_bound: int, out_len: int, sparse_cap: int) -> bool:
    # a sparse entry costs two words against one for a dense slot
    return 2 * nnz_bound > out_len or nnz_bound > sparse_cap


def _sparse_gather(w: SparseState, h):
    """Unreduced (row, contribution) pairs of M_m^[h] w."""
    m = w.m
    half = 2 ** (m - 1)
    inv5 = np.uint64(pow(5, -1, half) if half > 1 else 0)
    mask2 = np.uint64(2 * half - 1)
    mask = np.uint64(half - 1)
    pos = w.positions.astype(np.uint64)
    parity = (w.positions & 1).astype(bool)
    rows, contrib = [], []
    for j in range(10):
        if h[j] == 0:
            continue
        sel = parity if j & 1 else ~parity
        s = pos[sel]
        q = ((s - np.uint64(j)) & mask2) >> np.uint64(1)
        rows.append(((inv5 * q) & mask).astype(np.int64))
        contrib.append(h[j] * w.values[sel])
    if not rows:
        return np.zeros(0, np.int64), np.zeros(0, w.values.dtype)
    return np.concatenate(rows), np.concatenate(contrib)


def backward_step(
    w: Union[SparseState, TransferState],
    h: WeightFunction,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
) -> Union[SparseState, TransferState]:
    """M_m^[h] w for a column vector ``w`` at level m; result at level m-1.

    Row i collects sum_j h(j) w[(10 i + j) mod 2^m]. A sparse input stays
    sparse until its support would crowd the output space or pass
    ``sparse_cap``; the returned type signals the switch to dense.
    """
    if w.m < 2:
        raise ValueError("backward_step needs a level >= 2")
    exact = w.exact
    hv = _weight_vector(h, exact)
    out_len = 2 ** (w.m - 1)
    if isinstance(w, TransferState):
        out = kernels.backward_dense(w.mantissa, hv)
        out, shift = _normalize(out)
        return TransferState(w.m - 1, out, w.exp2 + shift)

    rows, contrib = _sparse_gather(w, hv)
    if exact:
        acc: dict = {}
        for r, c in zip(rows.tolist(), contrib):
            acc[r] = acc.get(r, 0) + c
        if _densify(len(acc), out_len, sparse_cap):
            return SparseState.from_dict(w.m - 1, acc, exact=True).to_dense()
        return SparseState.from_dict(w.m - 1, acc, exact=True)

    if _densify(5 * w.nnz, out_len, sparse_cap):
        out = np.bincount(rows, weights=contrib, minlength=out_len)
        out, shift = _normalize(out)
        return TransferState(w.m - 1, out, w.exp2 + shift)
    uniq, inverse = np.unique(rows, return_inverse=True)
    vals = np.bincount(inverse, weights=contrib, minlength=len(uniq))
    keep = vals > 0
    vals, shift = _normalize(vals[keep])
    return SparseState(w.m - 1, uniq[keep], vals, w.exp2 + shift)


def boundary_state(m: int, h: WeightFunction, exact: bool = False) -> SparseState:
    """b^(m,[h]) as a sparse column vector."""
    hv = WeightFunction(_weight_vector(h, exact)) if exact else h.as_floats()
    entries = boundary_vector(m, hv).as_dict()
    state = SparseState.from_dict(m, entries, exact=exact)
    if exact:
        return state
    vals, shift = _normalize(state.values)
    return SparseState(m, state.positions, vals, shift)


@dataclass(frozen=True)
class MeetPlan:
    """Where the forward prefix meets the backward suffix."""

    n: int
    meet: int
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    sparse_cap: int = DEFAULT_SPARSE_CAP
    peak_bytes: int = field(default=0, compare=False)

    def validate(self):
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if not 1 <= self.meet <= self.n - 1:
            raise ValueError(f"meet must lie in [1, {self.n - 1}], got {self.meet}")
        if 2**self.meet * BYTES_PER_ENTRY > self.memory_budget:
            raise InfeasiblePlan(
                self.n, 2**self.meet * BYTES_PER_ENTRY, self.memory_budget, self.meet
            )


def plan_cost(n: int, meet: int, sparse_cap: int = DEFAULT_SPARSE_CAP) -> int:
    """Estimated peak bytes of evaluating the chain for ``n`` split at ``meet``."""
    fwd = _FORWARD_FACTOR * 2**meet * BYTES_PER_ENTRY
    peak = 0.0
    dense = False
    nnz = 4
    held = 4 * _SPARSE_BYTES_PER_ENTRY
    for m in range(n - 1, meet, -1):
        out_len = 2 ** (m - 1)
        if dense:
            step = _DENSE_BACKWARD_FACTOR * 2**m * BYTES_PER_ENTRY
            held = out_len * BYTES_PER_ENTRY
        elif _densify(5 * nnz, out_len, sparse_cap):
            step = 5 * nnz * _SPARSE_BYTES_PER_ENTRY + 2 * out_len * BYTES_PER_ENTRY
            held = out_len * BYTES_PER_ENTRY
            dense = True
        else:
            step = 5 * nnz * _SPARSE_BYTES_PER_ENTRY
            nnz = min(5 * nnz, out_len)
            held = nnz * 2 * BYTES_PER_ENTRY
        peak = max(peak, step)
    return int(max(peak, held + fwd))


def choose_meet(
    n: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
) -> MeetPlan:
    """Pick the meeting level: pure forward (K = n-1) when it fits, else the cheapest K.

    Raises :class:`InfeasiblePlan` when no K fits ``memory_budget``.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    full = plan_cost(n, n - 1, sparse_cap)
    if full <= memory_budget:
        return MeetPlan(n, n - 1, memory_budget, sparse_cap, full)
    costs = {k: plan_cost(n, k, sparse_cap) for k in range(1, n - 1)}
    best = min(costs, key=lambda k: (costs[k], -k))
    if costs[best] > memory_budget:
        raise InfeasiblePlan(n, costs[best], memory_budget, best)
    return MeetPlan(n, best, memory_budget, sparse_cap, costs[best])


def exact_meet(n: int) -> int:
    """Meeting level minimizing the number of big-number operations in exact mode."""
    def work(k):
        fwd = sum(2**m for m in range(1, k + 1))
        bwd = sum(min(4 * 5 ** (n - 1 - m), 2**m) for m in range(k, n))
        return fwd + bwd
    return min(range(1, n), key=lambda k: (work(k), -k))


def _resolve_plan(n, plan, memory_budget, sparse_cap, exact=False) -> MeetPlan:
    if plan is None:
        if exact:
            plan = MeetPlan(n, exact_meet(n), memory_budget, sparse_cap)
        else:
            plan = choose_meet(n, memory_budget, sparse_cap)
    if plan.n != n:
        raise ValueError(f"plan is for n={plan.n}, asked for n={n}")
    plan.validate()
    return plan


def _integer_weights(hs):
    """Rational weights over a common denominator: (integer tables, denominator)."""
    fr = [h.as_fractions().w for h in hs]
    den = math.lcm(*(x.denominator for table in fr for x in table))
    return [WeightFunction(tuple(int(x * den) for x in table)) for table in fr], den


def _chain(n, weights, plan, exact):
    """Forward prefix and backward suffix; exact mode runs on integers.

    Returns (forward state, backward state, denominator) where the chain
    value is their contraction divided by denominator**n.
    """
    hs = _weight_list(weights, n)
    den = 1
    if exact:
        if not all(h.exact for h in hs):
            raise ValueError("exact evaluation needs rational weights")
        hs, den = _integer_weights(hs)
    K = plan.meet
    # forward: M_1^[h_n] ... M_K^[h_(n+1-K)]
    fwd = initial_state(hs[n - 1], exact)
    for level in range(2, K + 1):
        fwd = forward_step(fwd, hs[n - level])
    # backward: M_(K+1)^[h_(n-K)] ... M_(n-1)^[h_2] b^(n-1,[h_1])
    bwd = boundary_state(n - 1, hs[0], exact)
    for level in range(n - 1, K, -1):
        bwd = backward_step(bwd, hs[n - level], plan.sparse_cap)
    return fwd, bwd, den


def _contract(fwd: TransferState, bwd):
    if isinstance(bwd, SparseState):
        if bwd.nnz == 0:
            return 0
        return (fwd.mantissa[bwd.positions] * bwd.values).sum()
    return (fwd.mantissa * bwd.mantissa).sum()


def weighted_omega_sum_scaled(
    n: int,
    weights: Weights,
    plan: MeetPlan | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
) -> tuple[float, int]:
    """The weighted sum as ``(mantissa, exp2)`` with value ``mantissa * 2**exp2``."""
    plan = _resolve_plan(n, plan, memory_budget, sparse_cap)
    fwd, bwd, _ = _chain(n, weights, plan, exact=False)
    return float(_contract(fwd, bwd)), fwd.exp2 + bwd.exp2


def weighted_omega_sum(
    n: int,
    weights: Weights,
    plan: MeetPlan | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
) -> float:
    """log of sum over length-n endings w of 2^k of prod_j h_j(w_j), in float64.

    ``weights`` is one :class:`WeightFunction` or a sequence h_1..h_n in digit
    order (h_1 weighs the units digit). Returns ``-inf`` when the sum is 0.
    """
    total, exp2 = weighted_omega_sum_scaled(n, weights, plan, memory_budget, sparse_cap)
    if total == 0.0:
        return -math.inf
    return math.log(total) + exp2 * LOG2


def weighted_omega_sum_exact(
    n: int,
    weights: Weights,
    plan: MeetPlan | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    sparse_cap: int = DEFAULT_SPARSE_CAP,
):
    """The same sum as :func:`weighted_omega_sum`, as an exact ``Fraction``."""
    plan = _resolve_plan(n, plan, memory_budget, sparse_cap, exact=True)
    fwd, bwd, den = _chain(n, weights, plan, exact=True)
    return Fraction(_contract(fwd, bwd)) / den**n


def materialize_matrix(m: int, h: WeightFunction, threshold: int = DEBUG_DENSE_THRESHOLD):
    """Dense M_m^[h] for small m; debug and test use only."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > threshold:
        raise ValueError(f"refusing to materialize M_{m} (threshold {threshold})")
    dtype = object if h.exact else np.float64
    mat = np.zeros((2 ** (m - 1), 2**m), dtype=dtype)
    for i in range(2 ** (m - 1)):
        for j in range(10):
            mat[i, (10 * i + j) % 2**m] += h(j)
    return mat
