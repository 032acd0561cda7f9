"""Brute-force ground truth from actual powers of two.

Nothing here touches the transfer operator: endings are produced by
repeated doubling mod 10^n and residue vectors by enumerating every word.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .digits import WeightFunction, digit_word, omega_size

DEFAULT_CAP = 8
HARD_CAP = 10
DIRECT_V_CAP = 6


class OracleCapExceeded(ValueError):
    pass


def _check_cap(n, cap):
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > min(cap, HARD_CAP):
        raise OracleCapExceeded(f"n={n} exceeds the brute-force cap {min(cap, HARD_CAP)}")


@dataclass(frozen=True)
class OmegaEnumeration:
    n: int
    residues: tuple[int, ...]  # 2^k mod 10^n for k = n, n+1, ... over one period

    @property
    def words(self):
        return [digit_word(r, self.n) for r in self.residues]


def enumerate_omega(n: int, cap: int = DEFAULT_CAP) -> OmegaEnumeration:
    """All length-n endings of 2^k, k >= n, by doubling through one full period."""
    _check_cap(n, cap)
    return _enumerate(n)


@lru_cache(maxsize=None)
def _enumerate(n: int) -> OmegaEnumeration:
    mod = 10**n
    period = omega_size(n)
    c = pow(2, n, mod)
    out = []
    for _ in range(period):
        out.append(c)
        c = 2 * c % mod
    if c != out[0]:
        raise AssertionError(f"doubling mod 10^{n} did not close after {period} steps")
    if len(set(out)) != period:
        raise AssertionError(f"repeated residue within one period for n={n}")
    return OmegaEnumeration(n, tuple(out))


@lru_cache(maxsize=None)
def _digit_histograms(n: int) -> Counter:
    """Counter of per-digit count vectors over the endings; enough for a single h."""
    hist: Counter = Counter()
    for word in enumerate_omega(n, HARD_CAP).words:
        counts = [0] * 10
        for d in word:
            counts[d] += 1
        hist[tuple(counts)] += 1
    return hist


def oracle_weighted_sum(
    n: int,
    weights: Union[WeightFunction, Sequence[WeightFunction]],
    cap: int = DEFAULT_CAP,
):
    """sum over endings w of prod_j h_j(w_j); exact for rational weights.

    A single weight function goes through digit histograms (the product only
    depends on how often each digit occurs); a per-position list is summed
    word by word.
    """
    _check_cap(n, cap)
    if isinstance(weights, WeightFunction):
        w = weights.as_fractions().w if weights.exact else weights.w
        total = 0
        for counts, mult in _digit_histograms(n).items():
            term = mult
            for d, c in enumerate(counts):
                if c:
                    term *= w[d] ** c
            total += term
        return total
    hs = tuple(weights)
    if len(hs) != n:
        raise ValueError(f"expected {n} weight functions, got {len(hs)}")
    exact = all(h.exact for h in hs)
    tables = [h.as_fractions().w if exact else h.w for h in hs]
    total = 0
    for word in enumerate_omega(n, cap).words:
        term = 1
        for table, d in zip(tables, word):
            term *= table[d]
        total += term
    return total


def direct_v(m: int, weights: Union[WeightFunction, Sequence[WeightFunction]]) -> np.ndarray:
    """v_t = sum of prod_j h_j(x_j) over all m-digit words x with value = t mod 2^m.

    Enumerates all 10^m words. Rational weights are put over a common
    denominator and accumulated as Python integers, so the result (an
    object array of Fraction) is exact.
    """
    if m < 1 or m > DIRECT_V_CAP:
        raise OracleCapExceeded(f"direct_v needs 1 <= m <= {DIRECT_V_CAP}, got {m}")
    hs = (weights,) * m if isinstance(weights, WeightFunction) else tuple(weights)
    if len(hs) != m:
        raise ValueError(f"expected {m} weight functions, got {len(hs)}")
    exact = all(h.exact for h in hs)

    values = np.zeros(1, dtype=np.int64)
    if exact:
        fr = [h.as_fractions().w for h in hs]
        den = math.lcm(*(x.denominator for table in fr for x in table))
        nums = [[int(x * den) for x in table] for table in fr]
        prod = np.ones(1, dtype=object)
    else:
        prod = np.ones(1, dtype=np.float64)
    digits = np.arange(10)
    for j in range(m):
        table = np.array(nums[j] if exact else hs[j].w, dtype=prod.dtype)
        values = (values[:, None] + 10**j * digits[None, :]).ravel()
        prod = (prod[:, None] * table[None, :]).ravel()
    residues = values % 2**m
    if not exact:
        return np.bincount(residues, weights=prod, minlength=2**m)
    out = [0] * 2**m
    for r, p in zip(residues.tolist(), prod.tolist()):
        out[r] += p
    scale = Fraction(1, den**m)
    return np.array([x * scale for x in out], dtype=object)


def digit_sum(value: int) -> int:
    return sum(int(c) for c in str(value))


@dataclass(frozen=True)
class ZeroCountStats:
    n: int
    histogram: dict  # N0 -> number of endings with that many zeros
    max_zeros: int
    power_digit_sum: int  # decimal digit sum of 2^n itself

    def exceedance(self, threshold: float) -> int:
        """Number of endings with N0 >= threshold."""
        return sum(c for z, c in self.histogram.items() if z >= threshold)


def zero_count_stats(n: int, cap: int = DEFAULT_CAP) -> ZeroCountStats:
    _check_cap(n, cap)
    hist: Counter = Counter()
    for counts, mult in _digit_histograms(n).items():
        hist[counts[0]] += mult
    return ZeroCountStats(
        n=n,
        histogram=dict(sorted(hist.items())),
        max_zeros=max(hist),
        power_digit_sum=digit_sum(2**n),
    )
