"""Command-line interface: ``pow2digits {psi,scan,envelopes,verify,rate,oracle}``.

Tables go out as CSV (``# config:`` comment line, header, rows) or JSON.
Floats are written with 17 significant digits so they parse back exactly.
Exit codes: 0 success, 1 config error, 2 infeasible plan, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds, oracle, verify
from .digits import WeightFunction
from .kernels import BACKEND
from .transfer import (
    DEBUG_DENSE_THRESHOLD,
    DEFAULT_MEMORY_BUDGET,
    DEFAULT_SPARSE_CAP,
    InfeasiblePlan,
    choose_meet,
    exact_meet,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    n_list: list[int] | None = None
    weights: list[str] | None = None
    x: float | None = None
    x_grid: list[float] | None = None
    a: float | None = None
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    sparse_cap: int = DEFAULT_SPARSE_CAP
    exact: bool = False
    format: str = "csv"
    threads: int = 1
    seed: int = 0
    trials: int = 10
    timing: bool = False
    inject_bad_delta: bool = False
    debug_dense_threshold: int = DEBUG_DENSE_THRESHOLD
    backend: str = field(default=BACKEND)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def weight_function(self) -> WeightFunction:
        if self.weights is not None:
            return WeightFunction(tuple(_parse_number(w, self.exact) for w in self.weights))
        if self.x is not None:
            if self.x < 1:
                raise ConfigError(f"--x must be >= 1, got {self.x}")
            return WeightFunction.zero_weight(Fraction(str(self.x)) if self.exact else self.x)
        return WeightFunction.uniform()


def _parse_number(text: str, exact: bool):
    text = text.strip()
    if exact:
        return Fraction(text)
    return float(Fraction(text)) if "/" in text else float(text)


def parse_int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def parse_x_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        lo, hi, step = (float(p) for p in text.split(":"))
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad grid {text!r}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + k * step for k in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def render(rows: list[dict], config: RunConfig, meta: dict | None = None) -> str:
    columns = list(rows[0]) if rows else []
    if config.format == "json":
        doc = {
            "config": json.loads(config.to_json()),
            "meta": {k: _jsonable(v) for k, v in (meta or {}).items()},
            "rows": [{k: _jsonable(v) for k, v in r.items()} for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# config: {config.to_json()}\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {_fmt(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Parse output of :func:`render` back into (config, rows of strings)."""
    lines = text.splitlines()
    config = json.loads(lines[0].removeprefix("# config: "))
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return config, list(csv.DictReader(body))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands


def cmd_psi(cfg: RunConfig) -> tuple[list[dict], dict]:
    if cfg.n is None or cfg.n < 3:
        raise ConfigError("psi needs --n >= 3")
    h = cfg.weight_function()
    if cfg.exact and not h.exact:
        raise ConfigError("--exact needs rational weights")
    if cfg.exact:
        meet = exact_meet(cfg.n)
    else:
        meet = choose_meet(cfg.n, cfg.memory_budget, cfg.sparse_cap).meet
    res = bounds.psi(cfg.n, h, exact=cfg.exact, memory_budget=cfg.memory_budget,
                     sparse_cap=cfg.sparse_cap)
    row = {"even_sum": h.even_sum, "odd_sum": h.odd_sum, "meet": meet}
    row.update(res.as_dict())
    if res.equal_parity_log_sum is not None:
        row["equal_parity_error"] = res.log_sum - res.equal_parity_log_sum
    row["even_sum"] = float(row["even_sum"])
    row["odd_sum"] = float(row["odd_sum"])
    return [row], {}


def cmd_scan(cfg: RunConfig) -> tuple[list[dict], dict]:
    n_list = cfg.n_list or ([cfg.n] if cfg.n else [10, 20])
    if any(n < 3 for n in n_list):
        raise ConfigError("scan needs every n >= 3")
    grid = cfg.x_grid or bounds.default_x_grid()
    if any(x < 1 for x in grid):
        raise ConfigError("x grid must satisfy x >= 1")
    rows = []
    for r in bounds.r_scan(n_list, grid, cfg.memory_budget, cfg.sparse_cap, cfg.threads, cfg.timing):
        row = {"n": r.n, "x": r.x, "r": r.r, "log_sum": r.log_sum, "status": r.status}
        if cfg.timing:
            row["runtime_ms"] = r.runtime_ms
        rows.append(row)
    ok = [r for r in rows if r["status"] == "ok"]
    meta = {
        "min_r": min((r["r"] for r in ok), default=math.nan),
        "violations": sum(r["r"] < 0 for r in ok),
        "infeasible_n": ",".join(str(n) for n in sorted({r["n"] for r in rows if r["status"] != "ok"})),
    }
    return rows, meta


def cmd_envelopes(cfg: RunConfig) -> tuple[list[dict], dict]:
    env = bounds.envelopes()
    grid = cfg.x_grid or np.geomspace(1.0, 1e4, 201).tolist()
    rows = [
        {"x": x, "f1": a, "f2": b, "f3": c, "f3_le_f2": c <= b}
        for x, a, b, c in env.table(grid)
    ]
    meta = {
        "interval_A_lo": env.lo,
        "interval_A_hi": env.hi,
        "gap_at_lo": float(env.f3(env.lo) - bounds.f2(env.lo)),
        "gap_at_hi": float(env.f3(env.hi) - bounds.f2(env.hi)),
    }
    return rows, meta


def cmd_verify(cfg: RunConfig) -> tuple[list[dict], dict]:
    results = verify.run_all(seed=cfg.seed, trials=cfg.trials, inject_bad_delta=cfg.inject_bad_delta)
    rows = [
        {"check": c.name, "passed": c.passed, "detail": c.detail,
         "witness": json.dumps(c.witness, sort_keys=True) if c.witness else ""}
        for c in results
    ]
    return rows, {"all_passed": all(c.passed for c in results)}


def cmd_rate(cfg: RunConfig) -> tuple[list[dict], dict]:
    a0 = bounds.find_a0()
    a = cfg.a if cfg.a is not None else 0.9
    x = cfg.x if cfg.x is not None else 4.0
    rows = []
    for ai in [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99]:
        rows.append({"kind": "rate", "n": "", "a": ai, "x": "", "value": bounds.rate(ai),
                     "oracle_count": "", "max_zero_fraction": ""})
    for n in cfg.n_list or range(4, 9):
        cb = bounds.chernoff_count_bound(n, a, x, memory_budget=cfg.memory_budget)
        row = {"kind": "chernoff", "n": n, "a": a, "x": x, "value": cb.log_bound,
               "oracle_count": "", "max_zero_fraction": ""}
        if n <= oracle.DEFAULT_CAP:
            st = oracle.zero_count_stats(n)
            row["oracle_count"] = st.exceedance(a * n)
            row["max_zero_fraction"] = st.max_zeros / n
        rows.append(row)
    return rows, {"a0": a0, "rate_at_a0_minus_log5": bounds.rate(a0) - bounds.LOG5,
                  "chernoff_slope": bounds.LOG5 - (a * math.log(x) - float(bounds.f1(x)))}


def cmd_oracle(cfg: RunConfig) -> tuple[list[dict], dict]:
    n = cfg.n if cfg.n is not None else 4
    try:
        st = oracle.zero_count_stats(n)
    except oracle.OracleCapExceeded as exc:
        raise ConfigError(str(exc)) from exc
    enum = oracle.enumerate_omega(n)
    rows = [{"zeros": z, "count": c} for z, c in st.histogram.items()]
    meta = {
        "n": n,
        "omega_size": len(enum.residues),
        "distinct": len(set(enum.residues)),
        "max_zeros": st.max_zeros,
        "digit_sum_of_2^n": st.power_digit_sum,
    }
    return rows, meta


COMMANDS = {
    "psi": cmd_psi,
    "scan": cmd_scan,
    "envelopes": cmd_envelopes,
    "verify": cmd_verify,
    "rate": cmd_rate,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pow2digits", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--n", type=int)
    p.add_argument("--n-list", type=parse_int_list, help="e.g. 10,16,20 or 4-8")
    w = p.add_mutually_exclusive_group()
    w.add_argument("--weights", help="ten comma-separated weights h(0),...,h(9)")
    w.add_argument("--x", type=float, help="h(0)=x, h(k)=1 otherwise")
    w.add_argument("--uniform", action="store_true", help="h = 1 (default)")
    p.add_argument("--a", type=float, help="zero-fraction threshold for rate (default 0.9)")
    p.add_argument("--x-grid", type=parse_x_grid, help="lo:hi:step or comma list")
    p.add_argument("--mem-budget", type=int, default=DEFAULT_MEMORY_BUDGET, help="bytes")
    p.add_argument("--sparse-cap", type=int, default=DEFAULT_SPARSE_CAP)
    p.add_argument("--exact", action="store_true", help="rational arithmetic")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--timing", action="store_true", help="add runtime_ms to scan rows")
    p.add_argument("--inject-bad-delta", action="store_true", help=argparse.SUPPRESS)
    return p


def config_from_args(args) -> RunConfig:
    weights = None
    if args.weights:
        weights = [s.strip() for s in args.weights.split(",")]
        if len(weights) != 10:
            raise ConfigError(f"--weights needs 10 values, got {len(weights)}")
    return RunConfig(
        command=args.command,
        n=args.n,
        n_list=args.n_list,
        weights=weights,
        x=args.x,
        x_grid=args.x_grid,
        a=args.a,
        memory_budget=args.mem_budget,
        sparse_cap=args.sparse_cap,
        exact=args.exact,
        format=args.format,
        threads=args.threads,
        seed=args.seed,
        trials=args.trials,
        timing=args.timing,
        inject_bad_delta=args.inject_bad_delta,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        cfg = config_from_args(args)
        rows, meta = COMMANDS[cfg.command](cfg)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasiblePlan as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        print(json.dumps(exc.report()), file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(render(rows, cfg, meta), args.out)
    if cfg.command == "verify" and not meta["all_passed"]:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
