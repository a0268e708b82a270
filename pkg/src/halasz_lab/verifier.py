"""Verification suites: each asymptotic statement becomes a measured quantity and a bound.

Every suite returns a :class:`SuiteReport` whose rows carry
``(family, x, quantity, measured, bound, relation, passed)``.  ``passed`` is
computed once, from the recorded numbers, so it can always be re-derived from
the row itself.  The implied constants are :class:`SuiteConfig` fields; the
shipped defaults were calibrated on the built-in corpus and are pinned by the
regression tests.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import LOG_EXPONENT
from .errors import InvalidArgumentError, OutOfRangeError
from .functionals import KAPPA, M_functional, hall_tenenbaum_residual, pretentious_distance, prime_sample
from .multfun import FunctionSpec, construct_section6, construct_section7, materialize, section6_defaults, spec
from .primes import PrimeTable, sieve
from .search import greedy_delta_pm
from .sums import (CHECKPOINT_RATIO, default_checkpoints, friable_log_sum, log_sum, shifted_floor,
                   stream_series, sum_series)
from .zeta import oscillation_main_term

SUITES = ("main_formula", "lip_error", "neg_trunc", "improve_neg", "gold",
          "section6_converse", "section7_oscillation", "hall_tenenbaum")


@dataclass
class SuiteConfig:
    """Suite constants and sampling choices."""

    x_min: float = 1e3
    checkpoint_ratio: float = CHECKPOINT_RATIO
    kappa: float = KAPPA
    threads: int = 1
    # main_formula: |Delta| <= A[(loglog x/log x) e^{-M} + log(2T)/T] + B/log x, T = (log x)^2
    main_A: float = 1.0
    main_B: float = 1.0
    main_x_min: float = 1e4
    main_ratio: float = 10.0
    # lip_error / neg_trunc
    lip_C: float = 10.0
    neg_C: float = 10.0
    greedy_points: tuple = (10**4, 10**5, 10**6)
    # improve_neg: -L_f(x) log x / exp(c2 (loglog x)^{2/3} (v log(v loglog x))^{1/3}) <= c1
    improve_v: float = 8.0
    improve_eps: float = 0.1
    improve_c1: float = 1.0
    improve_c2: float = 1.0
    # gold: |friable sum| <= C[(log y) e^{-D(f,1;y)^2} + (log x)^{-(1-2/pi)}], y = x^{1/u}
    gold_C: float = 4.0
    gold_u: tuple = (1.0, 2.0, 3.0)
    # section6_converse
    s6_points: tuple = (10**5, 10**6, 10**7)
    s6_a: float = 1.0
    s6_b: float = 8.0
    s6_C: float = 5.0
    # section7_oscillation: sampled on (X, X e^{span}], span = 2pi/t0 covers one phase period
    s7_t0: float = 1.0
    s7_eps: float = 0.05
    s7_points: int = 64
    s7_factor: float = 0.5
    # hall_tenenbaum spot check
    ht_w: float = 1e3
    ht_z: float = 1e7
    ht_ts: tuple = (0.25, 0.5, 1.0, 2.0)
    ht_phis: tuple = ("cos", "neg_cos", "indicator")
    ht_bound: float = 1.0

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass
class SuiteRow:
    family: str
    x: float
    quantity: str
    measured: float
    bound: float
    relation: str = "<="
    passed: bool = field(init=False)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise InvalidArgumentError(f"bad relation {self.relation!r}")
        m, b = float(self.measured), float(self.bound)
        self.passed = bool(m <= b) if self.relation == "<=" else bool(m >= b)

    def margin(self) -> float:
        """measured/bound for '<=' rows, bound/measured for '>=' rows (pass iff <= 1)."""
        m, b = float(self.measured), float(self.bound)
        num, den = (m, b) if self.relation == "<=" else (b, m)
        if den > 0 or den < 0:
            return num / den
        return math.inf if num > 0 else 0.0


@dataclass
class SuiteReport:
    name: str
    X: int
    rows: list
    config: dict
    extra: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def summary(self) -> dict:
        ms = [float(r.measured) for r in self.rows]
        return {"rows": len(self.rows), "passed": sum(r.passed for r in self.rows), "all_pass": self.all_pass,
                "max_measured": max(ms) if ms else None, "min_measured": min(ms) if ms else None,
                "max_margin": max((r.margin() for r in self.rows), default=None)}

    def to_dict(self) -> dict:
        return {"suite": self.name, "X": self.X, "summary": self.summary, "config": self.config,
                "rows": [asdict(r) for r in self.rows], "extra": self.extra}

    def to_json(self, header: dict | None = None) -> str:
        d = self.to_dict()
        if header:
            d = {"header": header, **d}
        return json.dumps(d, indent=1, sort_keys=True, default=_json_default)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for h in header_lines:
            buf.write(f"# {h}\n")
        buf.write(f"# suite {self.name} X={self.X} all_pass={self.all_pass}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "x", "quantity", "measured", "relation", "bound", "pass"])
        for r in self.rows:
            w.writerow([r.family, f"{float(r.x):.12g}", r.quantity, f"{float(r.measured):.12g}", r.relation,
                        f"{float(r.bound):.12g}", int(r.passed)])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o).__name__}")


def builtin_corpus(rademacher_seeds=range(1, 11)) -> list[FunctionSpec]:
    """one, liouville, character4, cos_sign(0.25, 0.5, 1.0) and Rademacher seeds."""
    c = [spec("one"), spec("liouville"), spec("character4")]
    c += [spec("cos_sign", t0=t) for t in (0.25, 0.5, 1.0)]
    c += [spec("rademacher", seed=int(s), stream=0) for s in rademacher_seeds]
    return c


# ---------------------------------------------------------------------------
# helpers

def _table_for(X: int, table: PrimeTable | None) -> PrimeTable:
    need, _ = shifted_floor(X)
    if table is None:
        return sieve(need)
    if table.limit < need:
        raise OutOfRangeError(f"the corpus must be materializable to floor(w0*X) = {need}; "
                              f"the prime table stops at {table.limit}")
    return table


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _flatten(groups) -> list:
    return [r for g in groups for r in g]


def _series(fs: FunctionSpec, X: int, table: PrimeTable, x_min: float, ratio: float):
    Y, _ = shifted_floor(X)
    vt = materialize(fs, table, Y)
    return vt, sum_series(vt, default_checkpoints(X, x_min, ratio))


def main_formula_bound(x: float, M: float, T: float, A: float, B: float) -> float:
    lx = math.log(x)
    return A * (math.log(lx) / lx * math.exp(-M) + math.log(2 * T) / T) + B / lx


def improve_neg_scale(x: float, v: float, c2: float) -> float:
    """exp(c2 (loglog x)^{2/3} (v log(v loglog x))^{1/3}) / log x."""
    ll = math.log(math.log(x))
    return math.exp(c2 * ll ** (2 / 3) * (v * math.log(v * ll)) ** (1 / 3)) / math.log(x)


def fplus1_sum(fs: FunctionSpec, x: float, v: float, table: PrimeTable) -> float:
    """Sum of 1/p over x^{1/v} < p <= x with f(p) = +1."""
    ps = table.primes_in(x ** (1.0 / v), x)
    idx = np.searchsorted(table.primes, ps)
    fp = np.real(fs.prime_values(ps, idx))
    return float(math.fsum((1.0 / ps[fp == 1]).tolist()))


# ---------------------------------------------------------------------------
# suites

def _main_formula(corpus, X, cfg, table):
    def run(fs):
        vt, ser = _series(fs, X, table, cfg.main_x_min, cfg.main_ratio)
        samp = prime_sample(vt, float(ser.checkpoints[-1]))
        rows = []
        for x, d in zip(ser.checkpoints.tolist(), ser.delta.tolist()):
            T = math.log(x) ** 2
            M = M_functional(samp, float(x), T, cfg.kappa)
            rows.append(SuiteRow(fs.label(), x, "|Delta(x)|", abs(d),
                                 main_formula_bound(x, M, T, cfg.main_A, cfg.main_B), info={"M": M, "T": T}))
        return rows
    return _flatten(_map(run, corpus, cfg.threads)), {}


def _lip_error(corpus, X, cfg, table):
    def run(fs):
        _, ser = _series(fs, X, table, cfg.x_min, cfg.checkpoint_ratio)
        return [SuiteRow(fs.label(), x, "|Delta(x)|(log x)^(1-2/pi)", abs(v), cfg.lip_C)
                for x, v in zip(ser.checkpoints.tolist(), ser.delta_scaled.tolist())]
    rows = _flatten(_map(run, corpus, cfg.threads))
    # running maximum over x <= checkpoint, across the corpus
    byx = {}
    for r in rows:
        byx[r.x] = max(byx.get(r.x, 0.0), r.measured)
    running, m = {}, 0.0
    for x in sorted(byx):
        m = max(m, byx[x])
        running[x] = m
    return rows, {"running_max": [[x, running[x]] for x in sorted(running)]}


def _neg_trunc(corpus, X, cfg, table):
    def run(fs):
        _, ser = _series(fs, X, table, cfg.x_min, cfg.checkpoint_ratio)
        sc = np.log(ser.checkpoints.astype(float)) ** LOG_EXPONENT
        return [SuiteRow(fs.label(), x, "-L_f(x)(log x)^(1-2/pi)", -L * s, cfg.neg_C)
                for x, L, s in zip(ser.checkpoints.tolist(), ser.L.tolist(), sc.tolist())]
    rows = _flatten(_map(run, corpus, cfg.threads))
    greedy = []
    for x in cfg.greedy_points:
        if x > X:
            continue
        res = greedy_delta_pm(int(x), table)
        greedy.append({"x": int(x), "L_f": res.value})
        rows.append(SuiteRow(f"greedy_pm@{int(x)}", int(x), "-L_f(x)(log x)^(1-2/pi)",
                             -res.value * math.log(x) ** LOG_EXPONENT, cfg.neg_C))
    return rows, {"greedy": greedy}


def _improve_neg(corpus, X, cfg, table):
    rows = []
    skipped = []
    for fs in corpus:
        if fs.is_complex or not fs.is_integer or fs.family == "character4":
            skipped.append(fs.label())  # the statement is for f: N -> {-1, +1}
            continue
        _, ser = _series(fs, X, table, cfg.x_min, cfg.checkpoint_ratio)
        for x, L in zip(ser.checkpoints.tolist(), ser.L.tolist()):
            s = fplus1_sum(fs, x, cfg.improve_v, table)
            held = s >= 1.0 + cfg.improve_eps
            c1 = max(0.0, -L) / improve_neg_scale(x, cfg.improve_v, cfg.improve_c2)
            rows.append(SuiteRow(fs.label(), x, "implied c1", c1, cfg.improve_c1 if held else math.inf,
                                 info={"fplus1_sum": s, "hypothesis_held": held, "v": cfg.improve_v}))
    return rows, {"skipped_not_pm1": skipped}


def _gold(corpus, X, cfg, table):
    def run(fs):
        Y, _ = shifted_floor(X)
        vt = materialize(fs, table, Y)
        rows = []
        for x in default_checkpoints(X, cfg.x_min, cfg.checkpoint_ratio).tolist():
            for u in cfg.gold_u:
                y = x ** (1.0 / u)
                if y < 2:
                    continue
                S = abs(friable_log_sum(vt, x, y))
                D2 = pretentious_distance(vt, 0.0, y)
                b = cfg.gold_C * (math.log(y) * math.exp(-D2) + math.log(x) ** (-LOG_EXPONENT))
                rows.append(SuiteRow(fs.label(), x, f"|friable sum| y=x^(1/{u:g})", S, b, info={"y": y, "D2": D2}))
        return rows
    return _flatten(_map(run, corpus, cfg.threads)), {}


def _section6(corpus, X, cfg, table):
    rows = []
    for x in cfg.s6_points:
        if x > X:
            continue
        d = section6_defaults(x)
        fs = construct_section6(int(x), d["v"], d["t0"], d["theta"], table)
        vt = materialize(fs, table, int(x))
        L = log_sum(vt, x)
        ll = math.log(math.log(x))
        D2 = pretentious_distance(vt, 0.0, x, "liouville")
        ratio = D2 / ll ** (2 / 3)
        lab = fs.label()
        rows.append(SuiteRow(lab, x, "D^2(f,lambda;x)/(loglog x)^(2/3)", ratio, cfg.s6_a, ">=", info={"D2": D2}))
        rows.append(SuiteRow(lab, x, "D^2(f,lambda;x)/(loglog x)^(2/3)", ratio, cfg.s6_b, "<="))
        rows.append(SuiteRow(lab, x, "|L_f(x)| log x", abs(L) * math.log(x), math.exp(cfg.s6_C * ll ** (2 / 3)),
                             info={"L_f": L}))
    return rows, {}


def section7_sample_points(X: float, t0: float, count: int) -> np.ndarray:
    """``count`` log-spaced integers in (X, min(X^2, X e^{2pi/|t0|})]."""
    top = min(X * X, X * math.exp(2 * math.pi / abs(t0)))
    pts = np.ceil(np.exp(np.linspace(math.log(X), math.log(top), count + 1)[1:]))
    pts = np.unique(np.minimum(pts, math.floor(top)).astype(np.int64))
    return pts[pts > X]


def _section7(corpus, X, cfg, table):
    fs = construct_section7(cfg.s7_t0, cfg.s7_eps)
    xs = section7_sample_points(float(X), cfg.s7_t0, cfg.s7_points)
    ser = stream_series(fs, xs)
    term = oscillation_main_term(cfg.s7_t0, cfg.s7_eps, X=float(X))
    P = term.prediction(xs.astype(float))
    i = int(np.argmax(np.abs(ser.delta)))
    dmax, pmax = float(np.abs(ser.delta).max()), float(np.abs(P).max())
    rows = [SuiteRow(fs.label(), int(xs[i]), "max |Delta(x)| over samples", dmax, cfg.s7_factor * pmax, ">=",
                     info={"max_prediction": pmax, "amplitude_at_X": float(term.amplitude(float(X)))})]
    extra = {"samples": [[int(x), float(d), float(p)] for x, d, p in zip(xs, ser.delta, P)],
             "mu": [term.mu.real, term.mu.imag], "hhat1": term.hhat1, "n_max": term.n_max,
             "gamma_factor": term.gamma_factor, "gamma_factor_literal": term.gamma_factor_literal}
    return rows, extra


def _hall_tenenbaum(corpus, X, cfg, table):
    if table.limit < cfg.ht_z:
        table = sieve(int(cfg.ht_z))
    rows = []
    for phi in cfg.ht_phis:
        for t in cfg.ht_ts:
            r = hall_tenenbaum_residual(phi, t, cfg.ht_w, cfg.ht_z, table, 0.25 if phi == "indicator" else None)
            rows.append(SuiteRow(f"phi={phi}", cfg.ht_z, f"|residual| t={t:g}", abs(r), cfg.ht_bound,
                                 info={"residual": r, "w": cfg.ht_w}))
    return rows, {}


_RUNNERS = {"main_formula": _main_formula, "lip_error": _lip_error, "neg_trunc": _neg_trunc,
            "improve_neg": _improve_neg, "gold": _gold, "section6_converse": _section6,
            "section7_oscillation": _section7, "hall_tenenbaum": _hall_tenenbaum}

_NEEDS_TABLE = {"main_formula", "lip_error", "neg_trunc", "improve_neg", "gold", "section6_converse"}


def run_suite(name: str, corpus=None, X: int = 10**6, config: SuiteConfig | None = None,
              table: PrimeTable | None = None) -> SuiteReport:
    """Run one named suite over ``corpus`` (default: the built-in corpus) up to X."""
    if name not in _RUNNERS:
        raise InvalidArgumentError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    cfg = config or SuiteConfig()
    X = int(X)
    if X < 10:
        raise InvalidArgumentError("X must be >= 10")
    corpus = builtin_corpus() if corpus is None else list(corpus)
    if name in _NEEDS_TABLE:
        table = _table_for(X, table)
    elif name == "hall_tenenbaum" and table is None:
        table = sieve(int(cfg.ht_z))
    rows, extra = _RUNNERS[name](corpus, X, cfg, table)
    rows.sort(key=lambda r: (r.family, float(r.x), r.quantity, r.relation))
    return SuiteReport(name, X, rows, cfg.to_dict(), extra)


__all__ = ["SUITES", "SuiteConfig", "SuiteRow", "SuiteReport", "builtin_corpus", "run_suite",
           "main_formula_bound", "improve_neg_scale", "fplus1_sum", "section7_sample_points"]
