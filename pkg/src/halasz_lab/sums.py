"""Partial sums of multiplicative functions and the shifted discrepancy.

``M_g(y)`` for ``g = 1 * f`` is computed from ``M_g(y) = sum_{n<=y} f(n) floor(y/n)``
by the Dirichlet hyperbola method in O(sqrt y) operations from the prefix
sums of ``f``; direct and divisor-sieve paths exist as cross-checks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

import numpy as np

from ._numerics import accurate_sum, compensated_cumsum
from .constants import LOG_EXPONENT, W0, W0_DEC
from .errors import InvalidArgumentError, OutOfRangeError
from .multfun import FunctionSpec, ValueTable
from .primes import small_primes

TIE_TOL = 1e-9
CHECKPOINT_RATIO = 10.0 ** 0.125


def _check(vt: ValueTable, n: int, what: str) -> None:
    if n > vt.limit:
        raise OutOfRangeError(f"{what} = {n} exceeds the materialized limit {vt.limit}")


def log_sum(vt: ValueTable, x: float) -> float:
    """L_f(x) = sum_{n <= x} f(n)/n."""
    n = int(math.floor(x))
    _check(vt, n, "x")
    return complex(vt.log_prefix[n]) if vt.values.dtype.kind == "c" else float(vt.log_prefix[n])


def cesaro_sum(vt: ValueTable, x: float):
    """M_f(x) = sum_{n <= x} f(n)."""
    n = int(math.floor(x))
    _check(vt, n, "x")
    return vt.prefix[n].item()


def shifted_floor(x: float, w: Decimal = W0_DEC) -> tuple[int, bool]:
    """floor(w*x) computed in 50-digit arithmetic, and whether w*x is within 1e-9 of an integer."""
    with localcontext() as ctx:
        ctx.prec = 50
        y = w * Decimal(x)
        fl = int(y.to_integral_value(rounding="ROUND_FLOOR"))
        frac = y - fl
        tie = frac < Decimal(TIE_TOL) or (1 - frac) < Decimal(TIE_TOL)
    return fl, bool(tie)


def mg_floor(vt: ValueTable, y: float):
    """M_g(y) = sum_{n <= y} f(n) floor(y/n), by the hyperbola method.

    With ``Y = floor(y)`` and ``s = isqrt(Y)``::

        M_g(Y) = sum_{d<=s} f(d) floor(Y/d) + sum_{m<=s} F(floor(Y/m)) - s F(s)

    where ``F`` is the prefix sum of ``f``.  Exact in integer arithmetic for
    integer-valued families.
    """
    Y = int(math.floor(y))
    _check(vt, Y, "floor(y)")
    if Y < 1:
        return 0
    s = math.isqrt(Y)
    d = np.arange(1, s + 1, dtype=np.int64)
    q = Y // d
    F = vt.prefix
    f = vt.values[1:s + 1]
    if vt.values.dtype == np.int8:
        return int((f.astype(np.int64) * q).sum() + F[q].sum() - s * F[s])
    a = accurate_sum(f * q)
    b = accurate_sum(F[q])
    return a + b - s * F[s]


def mg_floor_direct(vt: ValueTable, y: float):
    """O(y) reference: sum_{n <= y} f(n) floor(y/n)."""
    Y = int(math.floor(y))
    _check(vt, Y, "floor(y)")
    n = np.arange(1, Y + 1, dtype=np.int64)
    f = vt.values[1:Y + 1]
    if vt.values.dtype == np.int8:
        return int((f.astype(np.int64) * (Y // n)).sum())
    return accurate_sum(f * (Y // n))


def divisor_convolution(vt: ValueTable, limit: int | None = None) -> np.ndarray:
    """g = 1 * f on 0..limit by the divisor sieve (g[0] = 0)."""
    N = vt.limit if limit is None else int(limit)
    _check(vt, N, "limit")
    dt = np.int64 if vt.values.dtype == np.int8 else vt.values.dtype
    g = np.zeros(N + 1, dtype=dt)
    f = vt.values
    for d in range(1, N + 1):
        if f[d] != 0:
            g[d::d] += f[d]
    return g


def mg_tilde(vt: ValueTable, y: float) -> float:
    """M~_g(y) = M_g(y)/y."""
    return mg_floor(vt, y) / y


def delta(vt: ValueTable, x: float, w: float | Decimal = W0_DEC) -> float:
    """Delta(x) = L_f(x) - M_g(w0 x)/(w0 x)."""
    wd = w if isinstance(w, Decimal) else Decimal(w)
    Y, _ = shifted_floor(x, wd)
    if Y > vt.limit:
        raise OutOfRangeError(
            f"Delta({x}) needs f up to floor(w0*x) = {Y} (w0 = {float(wd):.6f}); "
            f"materialized limit is {vt.limit}")
    wx = float(wd) * x
    return log_sum(vt, x) - mg_floor(vt, Y) / wx


def friable_log_sum(vt: ValueTable, x: float, y: float) -> float:
    """Sum of f(n)/n over n <= x with P+(n) <= y."""
    n = int(math.floor(x))
    _check(vt, n, "x")
    if y < 1:
        raise InvalidArgumentError("y must be >= 1")
    if y >= n:
        return log_sum(vt, n)
    lpf = vt.largest_prime_factor[1:n + 1]
    idx = np.flatnonzero(lpf <= y) + 1
    return accurate_sum(vt.values[idx] / idx)


def _restricted_log_sum(vt: ValueTable, x: int, p: int) -> float:
    """Sum of f(m)/m over m <= x with P+(m) <= p."""
    if x < 1:
        return 0.0
    if p >= x:
        return float(vt.log_prefix[x])
    lpf = vt.largest_prime_factor[1:x + 1]
    idx = np.flatnonzero(lpf <= p) + 1
    return accurate_sum(vt.values[idx] / idx)


def split_identity_check(vt: ValueTable, x: int, theta: float) -> float:
    """Residual of the large-prime splitting of L_f(x).

    Each n <= x with P+(n) = p > x^{1-theta} is written n = p m with P+(m) <= p,
    so ``L_f(x) = sum_p f(p)/p * S_p + L_{f_theta}(x)`` with
    ``S_p = sum_{m <= x/p, P+(m) <= p} f(m)/m``.  When p^2 > x the restriction is
    vacuous and ``S_p = L_f(x/p)``; for p^2 <= x (possible only when
    theta > 1/2) the restricted sum is used, since the unrestricted form would
    count n once per distinct large prime factor.
    """
    x = int(x)
    _check(vt, x, "x")
    if not 0.0 < theta < 1.0:
        raise InvalidArgumentError("theta must lie in (0, 1)")
    cut = x ** (1.0 - theta)
    ps = vt.table.primes_in(cut, x)
    lhs = log_sum(vt, x)
    fp = vt.values[ps].astype(np.float64 if vt.values.dtype.kind != "c" else np.complex128)
    s = vt.log_prefix[x // ps].copy()
    small = np.flatnonzero(ps.astype(np.float64) ** 2 <= x)
    for i in small.tolist():
        s[i] = _restricted_log_sum(vt, x // int(ps[i]), int(ps[i]))
    rhs = accurate_sum(fp / ps * s) + friable_log_sum(vt, x, cut)
    return abs(lhs - rhs)


def lipschitz_ratio(vt: ValueTable, x: float, w: float) -> float:
    """|M~_g(x) - M~_g(x/w)| / log(2w)."""
    if w < 1:
        raise InvalidArgumentError("w must be >= 1")
    _check(vt, int(math.floor(x)), "floor(x)")
    if w == 1:
        return 0.0
    lo = x / w
    a = mg_tilde(vt, x)
    b = mg_tilde(vt, lo) if lo >= 1 else 0.0
    return abs(a - b) / math.log(2.0 * w)


# ---------------------------------------------------------------------------
# checkpoint series

def default_checkpoints(X: float, x_min: float = 10.0, ratio: float = CHECKPOINT_RATIO) -> np.ndarray:
    """Geometric grid ceil(X r^{-j}) >= x_min, ascending."""
    if X < 1:
        raise InvalidArgumentError("X must be >= 1")
    pts = []
    j = 0
    while True:
        v = math.ceil(X * ratio ** (-j) - 1e-9)
        if v < x_min and pts:
            break
        pts.append(v)
        if v <= x_min:
            break
        j += 1
    return np.array(sorted(set(pts)), dtype=np.int64)


@dataclass
class SumSeries:
    spec: FunctionSpec
    checkpoints: np.ndarray
    L: np.ndarray
    M_f: np.ndarray
    Mg_w0: np.ndarray
    Mg_tilde: np.ndarray
    delta: np.ndarray
    ties: np.ndarray = field(repr=False)
    w0: float = W0

    @property
    def delta_scaled(self) -> np.ndarray:
        return self.delta * np.log(self.checkpoints.astype(float)) ** LOG_EXPONENT

    def rows(self):
        label = self.spec.label()
        for i, x in enumerate(self.checkpoints.tolist()):
            yield {"family": label, "x": x, "L_f": self.L[i], "M_g_w0": self.Mg_w0[i],
                   "Mg_tilde": self.Mg_tilde[i], "delta": self.delta[i],
                   "delta_scaled": self.delta_scaled[i], "w0x_tie": bool(self.ties[i])}

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for h in header_lines:
            buf.write(f"# {h}\n")
        cols = ["family", "x", "L_f", "M_g_w0", "Mg_tilde", "delta", "delta_scaled"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows():
            w.writerow([r["family"], r["x"]] + [f"{float(np.real(r[c])):.12g}" for c in cols[2:]])
        return buf.getvalue()


def sum_series(vt: ValueTable, checkpoints) -> SumSeries:
    """All checkpoint quantities from one materialized table (one prefix pass)."""
    xs = np.asarray(checkpoints, dtype=np.int64)
    L, Mf, Mg, Mt, D, ties = ([] for _ in range(6))
    for x in xs.tolist():
        Y, tie = shifted_floor(x)
        if Y > vt.limit:
            raise OutOfRangeError(f"checkpoint {x} needs the table up to floor(w0*x) = {Y}")
        mg = mg_floor(vt, Y)
        lx = log_sum(vt, x)
        L.append(lx)
        Mf.append(cesaro_sum(vt, x))
        Mg.append(mg)
        Mt.append(mg / (W0 * x))
        D.append(lx - mg / (W0 * x))
        ties.append(tie)
    return SumSeries(vt.spec, xs, np.array(L), np.array(Mf, dtype=float), np.array(Mg, dtype=float),
                     np.array(Mt), np.array(D), np.array(ties, dtype=bool))


# ---------------------------------------------------------------------------
# streaming evaluation beyond memory

def _segment_values(fs: FunctionSpec, lo: int, hi: int, base: np.ndarray, base_vals: np.ndarray) -> np.ndarray:
    """f(n) for lo <= n < hi (lo >= 1), by trial division with the base primes <= sqrt(hi)."""
    n = np.arange(lo, hi, dtype=np.int64)
    rem = n.copy()
    val = np.ones(hi - lo, dtype=np.complex128 if fs.is_complex else np.float64)
    for p, fp in zip(base.tolist(), base_vals.tolist()):
        pk = p
        while pk < hi:
            start = (-lo) % pk
            if start >= hi - lo:
                break
            rem[start::pk] //= p
            val[start::pk] *= fp
            pk *= p
    big = rem > 1
    if big.any():
        val[big] *= fs.prime_values(rem[big])
    return val


def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


def stream_series(fs: FunctionSpec, checkpoints, segment_size: int = 1 << 21) -> SumSeries:
    """SumSeries computed without materializing f, in one pass up to floor(w0*max x).

    Suited to index-free families at scales where a value table does not fit
    in memory.  The running sums of f(n) and f(n)/n are carried with exact
    (fsum) segment offsets.
    """
    if fs.needs_index:
        raise InvalidArgumentError("streaming needs an index-free family")
    xs = np.asarray(checkpoints, dtype=np.int64)
    shifted = [shifted_floor(int(x)) for x in xs.tolist()]
    Ys = np.array([s[0] for s in shifted], dtype=np.int64)
    top = int(max(Ys.max(), xs.max()))
    base = small_primes(math.isqrt(top) + 1)
    base_vals = fs.prime_values(base)
    smax = math.isqrt(int(Ys.max()))
    # small table of f(d), d <= smax, for the first hyperbola sum
    f_small = _segment_values(fs, 1, smax + 1, base, base_vals)
    # query points for F
    qs = []
    for Y in Ys.tolist():
        s = math.isqrt(Y)
        qs.append(Y // np.arange(1, s + 1, dtype=np.int64))
        qs.append(np.array([s], dtype=np.int64))
    qs.append(xs)
    qall = np.unique(np.concatenate(qs))
    Fq = np.zeros(qall.shape, dtype=f_small.dtype)
    Lq = {int(x): 0.0 for x in xs.tolist()}
    xs_sorted = np.sort(xs)
    F_off = L_off = 0.0
    F_c = L_c = 0.0  # Neumaier compensation for the running offsets
    for lo in range(1, top + 1, segment_size):
        hi = min(lo + segment_size, top + 1)
        vals = _segment_values(fs, lo, hi, base, base_vals)
        loc = compensated_cumsum(vals)
        locL = compensated_cumsum(vals / np.arange(lo, hi, dtype=np.float64))
        i, j = np.searchsorted(qall, [lo, hi])
        if j > i:
            Fq[i:j] = (F_off + F_c) + loc[qall[i:j] - lo]
        a, b = np.searchsorted(xs_sorted, [lo, hi])
        for x in xs_sorted[a:b].tolist():
            Lq[x] = (L_off + L_c) + locL[x - lo]
        F_off, F_c = _neumaier(F_off, F_c, loc[-1])
        L_off, L_c = _neumaier(L_off, L_c, locL[-1])

    def F(q):
        return Fq[np.searchsorted(qall, q)]

    L, Mf, Mg, Mt, D = [], [], [], [], []
    for x, Y in zip(xs.tolist(), Ys.tolist()):
        s = math.isqrt(Y)
        d = np.arange(1, s + 1, dtype=np.int64)
        mg = accurate_sum(f_small[:s] * (Y // d)) + accurate_sum(F(Y // d)) - s * F(np.array([s]))[0]
        if not fs.is_complex:
            mg = float(np.real(mg))
        lx = Lq[x]
        L.append(lx)
        Mf.append(F(np.array([x]))[0])
        Mg.append(mg)
        Mt.append(mg / (W0 * x))
        D.append(lx - mg / (W0 * x))
    return SumSeries(fs, xs, np.array(L), np.array(Mf), np.array(Mg), np.array(Mt), np.array(D),
                     np.array([s[1] for s in shifted], dtype=bool))
