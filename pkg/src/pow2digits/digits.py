"""Residue-class combinatorics for the trailing decimal digits of 2^k.

Digit words are stored least-significant digit first, so ``word[0]`` is the
units digit and ``decimal_value(word) = sum(10**j * word[j])``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Sequence

DIGITS = tuple(range(10))
EVEN_NONZERO = (2, 4, 6, 8)

# delta_i for i = 1..4, keyed by m mod 4
DELTA_TABLE = {
    0: (2, 4, 6, 8),
    1: (4, 8, 2, 6),
    2: (8, 6, 4, 2),
    3: (6, 2, 8, 4),
}


def check_word(word: Sequence[int]) -> tuple[int, ...]:
    word = tuple(int(d) for d in word)
    if not word:
        raise ValueError("digit word must have length >= 1")
    if any(d < 0 or d > 9 for d in word):
        raise ValueError(f"digits must lie in 0..9, got {word}")
    return word


def decimal_value(word: Sequence[int]) -> int:
    """Integer whose decimal digits, least significant first, are ``word``."""
    word = check_word(word)
    return sum(d * 10**j for j, d in enumerate(word))


def digit_word(value: int, n: int) -> tuple[int, ...]:
    """The last ``n`` decimal digits of ``value``, least significant first."""
    if n < 1:
        raise ValueError("n must be >= 1")
    value %= 10**n
    out = []
    for _ in range(n):
        value, d = divmod(value, 10)
        out.append(d)
    return tuple(out)


def omega_size(n: int) -> int:
    """Number of distinct length-n endings of 2^k with k >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 4 * 5 ** (n - 1)


@dataclass(frozen=True)
class WeightFunction:
    """Nonnegative digit weights h(0), ..., h(9).

    Entries may be floats or exact rationals (``int``/``Fraction``); a
    function whose entries are all rational is treated as exact.
    """

    w: tuple

    def __post_init__(self):
        w = tuple(self.w)
        if len(w) != 10:
            raise ValueError(f"need exactly 10 weights, got {len(w)}")
        for x in w:
            if not isinstance(x, Real):
                raise TypeError(f"weight {x!r} is not a real number")
            if x != x or x < 0:
                raise ValueError(f"weights must be nonnegative, got {w}")
        if all(x == 0 for x in w):
            raise ValueError("weights must not all be zero")
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, value=1) -> WeightFunction:
        return cls((value,) * 10)

    @classmethod
    def zero_weight(cls, x) -> WeightFunction:
        """h(0) = x, h(k) = 1 otherwise; the weighted sum becomes sum x**N0."""
        return cls((x,) + (1,) * 9)

    @classmethod
    def indicator(cls, digits) -> WeightFunction:
        digits = set(digits)
        return cls(tuple(1 if j in digits else 0 for j in DIGITS))

    def __call__(self, j: int):
        return self.w[j]

    def __iter__(self):
        return iter(self.w)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.w)

    @property
    def even_sum(self):
        return sum(self.w[0::2])

    @property
    def odd_sum(self):
        return sum(self.w[1::2])

    @property
    def total(self):
        return sum(self.w)

    @property
    def boundary_mass(self):
        """h(2) + h(4) + h(6) + h(8)."""
        return sum(self.w[d] for d in EVEN_NONZERO)

    def as_fractions(self) -> WeightFunction:
        return WeightFunction(tuple(Fraction(x) for x in self.w))

    def as_floats(self) -> WeightFunction:
        return WeightFunction(tuple(float(x) for x in self.w))

    def scaled(self, lam) -> WeightFunction:
        return WeightFunction(tuple(lam * x for x in self.w))


@dataclass(frozen=True)
class CongruenceSolution:
    i: int
    r: int
    u: int
    delta: int
    m: int

    def check(self) -> bool:
        return (
            5 * self.r + self.u == self.i * 2**self.m
            and self.delta == 2 * self.u
            and (10 * self.r + self.delta) % 2 ** (self.m + 1) == 0
        )


def congruence_solutions(m: int) -> tuple[CongruenceSolution, ...]:
    """The four pairs (r, delta) with 10 r + delta = 0 mod 2^(m+1), i = 1..4.

    ``r = floor(i 2^m / 5)``, ``u = i 2^m mod 5`` and ``delta = 2 u``.
    """
    if m < 2:
        raise ValueError(f"level m must be >= 2, got {m}")
    out = []
    for i in range(1, 5):
        r, u = divmod(i << m, 5)
        out.append(CongruenceSolution(i=i, r=r, u=u, delta=2 * u, m=m))
    return tuple(out)


@dataclass(frozen=True)
class BoundaryVector:
    """Four-sparse column vector: value h(delta_i) at position r_i."""

    m: int
    entries: tuple  # ((r_1, h(delta_1)), ..., (r_4, h(delta_4)))

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.entries)

    def as_dict(self) -> dict:
        return dict(self.entries)


def boundary_vector(m: int, h: WeightFunction) -> BoundaryVector:
    sols = congruence_solutions(m)
    return BoundaryVector(m=m, entries=tuple((s.r, h(s.delta)) for s in sols))
