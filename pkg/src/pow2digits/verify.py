"""Oracle cross-checks behind ``pow2digits verify``.

Each check returns a :class:`CheckResult`; a failing check carries the first
counterexample it found.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .digits import DELTA_TABLE, CongruenceSolution, WeightFunction, congruence_solutions, omega_size
from .oracle import direct_v, enumerate_omega, oracle_weighted_sum
from .transfer import (
    MeetPlan,
    TransferState,
    forward_step,
    forward_vector,
    materialize_matrix,
    weighted_omega_sum_exact,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness: dict = field(default_factory=dict)


def random_rational_weights(rng: random.Random, max_num=12, max_den=6) -> WeightFunction:
    while True:
        w = tuple(Fraction(rng.randint(0, max_num), rng.randint(1, max_den)) for _ in range(10))
        if any(w):
            return WeightFunction(w)


def swapped_solutions(m: int) -> tuple[CongruenceSolution, ...]:
    """Deliberately wrong solutions (delta_1 and delta_2 swapped), for fault injection."""
    s = congruence_solutions(m)
    return (
        CongruenceSolution(s[0].i, s[0].r, s[1].u, s[1].delta, m),
        CongruenceSolution(s[1].i, s[1].r, s[0].u, s[0].delta, m),
    ) + s[2:]


def check_omega_counts(max_n=7) -> CheckResult:
    for n in range(1, max_n + 1):
        res = enumerate_omega(n, cap=max_n).residues
        bad = [r for r in res if r % 2**n or r % 10 not in (2, 4, 6, 8)]
        if len(set(res)) != omega_size(n) or bad:
            return CheckResult(
                "omega_counts", False, f"n={n}",
                {"n": n, "count": len(set(res)), "expected": omega_size(n), "bad": bad[:5]},
            )
    return CheckResult("omega_counts", True, f"n=1..{max_n}: |Omega_n| = 4*5^(n-1)")


def exhaustive_congruence(m: int) -> set[tuple[int, int]]:
    r = np.arange(2**m, dtype=np.int64)
    out = set()
    for delta in (2, 4, 6, 8):
        for x in r[(10 * r + delta) % 2 ** (m + 1) == 0].tolist():
            out.add((x, delta))
    return out


def check_congruence(max_m=20, solutions=congruence_solutions) -> CheckResult:
    for m in range(2, max_m + 1):
        sols = solutions(m)
        found = {(s.r, s.delta) for s in sols}
        brute = exhaustive_congruence(m)
        deltas = tuple(s.delta for s in sols)
        if found != brute or deltas != DELTA_TABLE[m % 4] or not all(s.check() for s in sols):
            return CheckResult(
                "congruence_solutions", False, f"m={m}",
                {"m": m, "returned": sorted(found), "exhaustive": sorted(brute),
                 "deltas": deltas, "table": DELTA_TABLE[m % 4]},
            )
    return CheckResult("congruence_solutions", True, f"m=2..{max_m} match exhaustive search")


def check_column_parity(max_m=12, trials=20, seed=0, dense_m=8) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(trials):
        h = random_rational_weights(rng)
        E, O = h.even_sum, h.odd_sum
        for m in range(2, max_m + 1):
            ones = TransferState(m - 1, np.array([Fraction(1)] * 2 ** (m - 1), dtype=object))
            got = forward_step(ones, h).mantissa
            want = [E if s % 2 == 0 else O for s in range(2**m)]
            if list(got) != want:
                return CheckResult("column_parity", False, f"m={m}", {"m": m, "h": [str(x) for x in h]})
            if m <= dense_m:
                cols = materialize_matrix(m, h).sum(axis=0)
                if list(cols) != want:
                    return CheckResult("column_parity", False, f"dense m={m}", {"m": m})
    return CheckResult("column_parity", True, f"m=2..{max_m}, {trials} weight vectors")


def check_matrix_representation(max_n=7, trials=10, seed=0) -> CheckResult:
    rng = random.Random(seed)
    for n in range(3, max_n + 1):
        for _ in range(trials):
            h = random_rational_weights(rng)
            want = oracle_weighted_sum(n, h, cap=max_n)
            for meet in {1, n // 2, n - 1}:
                got = weighted_omega_sum_exact(n, h, MeetPlan(n, meet))
                if got != want:
                    return CheckResult(
                        "matrix_representation", False, f"n={n}",
                        {"n": n, "meet": meet, "h": [str(x) for x in h],
                         "transfer": str(got), "oracle": str(want)},
                    )
    return CheckResult("matrix_representation", True, f"n=3..{max_n}, {trials} weights, exact")


def check_forward_vs_direct(max_m=5, trials=5, seed=0) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(trials):
        h = random_rational_weights(rng)
        for m in range(1, max_m + 1):
            if list(forward_vector(m, h, exact=True).mantissa) != list(direct_v(m, h)):
                return CheckResult("forward_vs_direct", False, f"m={m}", {"m": m})
    return CheckResult("forward_vs_direct", True, f"m=1..{max_m}")


def check_equal_parity(max_n=20) -> CheckResult:
    families = [
        WeightFunction((2, 2, 1, 1, 1, 1, 1, 1, 1, 1)),
        WeightFunction((0, 1, 1, 0, 1, 1, 0, 1, 1, 0)),
        WeightFunction((Fraction(3), 1, 0, 2, 1, 1, 0, 0, 0, 0)),
    ]
    for h in families:
        E = h.even_sum
        assert E == h.odd_sum
        for n in range(3, max_n + 1):
            got = weighted_omega_sum_exact(n, h)
            want = Fraction(E) ** (n - 1) * h.boundary_mass
            if got != want:
                return CheckResult("equal_parity", False, f"n={n}",
                                   {"n": n, "h": list(map(str, h)), "got": str(got), "want": str(want)})
    return CheckResult("equal_parity", True, f"E=O closed form exact for n=3..{max_n}")


def run_all(seed=0, trials=10, inject_bad_delta=False) -> list[CheckResult]:
    return [
        check_omega_counts(),
        check_congruence(solutions=swapped_solutions if inject_bad_delta else congruence_solutions),
        check_column_parity(trials=max(1, trials // 2), seed=seed),
        check_forward_vs_direct(seed=seed),
        check_matrix_representation(trials=trials, seed=seed),
        check_equal_parity(),
    ]
