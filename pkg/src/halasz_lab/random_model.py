"""Monte Carlo experiments on Rademacher random completely multiplicative functions.

Trial ``i`` of a run with master seed ``s`` uses the Philox stream keyed by
``(s, i)`` (see :func:`halasz_lab.multfun.rademacher_signs`), so every result
is a pure function of ``(x, trials, seed)``.  Trials are processed in fixed
batches; the thread count only changes how batches are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .constants import W0
from .errors import InvalidArgumentError, TooLargeError
from .functionals import y_k
from .multfun import rademacher_signs
from .primes import PrimeTable
from .sums import shifted_floor

Z95 = 1.959963984540054
MAX_EXACT_PRIMES = 22
NEAR_ZERO = 1e-12


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise InvalidArgumentError("n must be positive")
    phat = k / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # clamp so that rounding never pushes an end past the estimate
    lo = 0.0 if k == 0 else min(phat, max(0.0, centre - half))
    hi = 1.0 if k == n else max(phat, min(1.0, centre + half))
    return lo, hi


@dataclass
class MCResult:
    x: int
    trials: int
    seed: int
    negatives: int
    estimate: float
    interval: tuple[float, float]
    min_Lf: float
    near_zero: int = 0
    negative_trials: list = field(default_factory=list)
    tail_histogram: dict | None = None

    @property
    def wilson_sigma(self) -> float:
        """Half-width of the Wilson 95% interval divided by z."""
        return (self.interval[1] - self.interval[0]) / (2 * Z95)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval"] = list(self.interval)
        d["wilson_sigma"] = self.wilson_sigma
        return d


# ---------------------------------------------------------------------------
# batched evaluation

def trial_signs(seed: int, trials: range, count: int) -> np.ndarray:
    """(len(trials), count) int8 matrix of prime signs, one Philox stream per trial."""
    out = np.empty((len(trials), count), dtype=np.int8)
    for r, i in enumerate(trials):
        out[r] = rademacher_signs(seed, count, stream=i)
    return out


def batch_values(signs: np.ndarray, table: PrimeTable, limit: int, prime_cut: float | None = None) -> np.ndarray:
    """Rows of f(0..limit) for each sign row; primes above ``prime_cut`` are sent to 0."""
    B = signs.shape[0]
    npr = table.pi(limit)
    ps = table.primes[:npr]
    f = np.zeros((B, limit + 1), dtype=np.int8)
    if limit >= 1:
        f[:, 1] = 1
    vals = signs[:, :npr]
    if prime_cut is not None:
        vals = np.where(ps[None, :] <= prime_cut, vals, 0).astype(np.int8)
    f[:, ps] = vals
    spf = table.spf
    b = 2
    while b <= limit:
        e = min(2 * b, limit + 1)
        n = np.arange(b, e, dtype=np.int64)
        p = spf[b:e].astype(np.int64)
        comp = p != n
        nc, pc = n[comp], p[comp]
        f[:, nc] = f[:, pc] * f[:, nc // pc]
        b = e
    return f


def _batches(trials: int, batch: int):
    return [range(a, min(a + batch, trials)) for a in range(0, trials, batch)]


def _run(fn, jobs, threads: int):
    if threads <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, jobs))


def _default_batch(x: int) -> int:
    return int(max(1, min(4096, (1 << 24) // max(x, 1))))


def mc_negative_probability(x: int, trials: int, seed: int, table: PrimeTable, threads: int = 1,
                            batch: int | None = None, keep: int = 20) -> MCResult:
    """Frequency of L_f(x) < 0 over ``trials`` independent Rademacher samples."""
    x = int(x)
    table.check(x, "x")
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    npr = table.pi(x)
    inv = 1.0 / np.arange(1, x + 1, dtype=np.float64)
    batch = batch or _default_batch(x)

    def job(rng: range):
        f = batch_values(trial_signs(seed, rng, npr), table, x)
        L = f[:, 1:].astype(np.float64) @ inv
        return rng.start, L

    parts = _run(job, _batches(trials, batch), threads)
    L = np.concatenate([p[1] for p in sorted(parts, key=lambda t: t[0])])
    neg = np.flatnonzero(L < 0)
    k = int(neg.shape[0])
    return MCResult(x, trials, seed, k, k / trials, wilson_interval(k, trials), float(L.min()),
                    int(np.count_nonzero(np.abs(L) < NEAR_ZERO)), neg[:keep].tolist())


def mc_log_sums(x: int, trials: int, seed: int, table: PrimeTable, batch: int | None = None) -> np.ndarray:
    """L_f(x) for every trial (trial order)."""
    npr = table.pi(x)
    inv = 1.0 / np.arange(1, x + 1, dtype=np.float64)
    out = []
    for rng in _batches(trials, batch or _default_batch(x)):
        f = batch_values(trial_signs(seed, rng, npr), table, x)
        out.append(f[:, 1:].astype(np.float64) @ inv)
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# exact oracle

def _walsh_hadamard(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        top = v[:, 0, :] + v[:, 1, :]
        bot = v[:, 0, :] - v[:, 1, :]
        v[:, 0, :] = top
        v[:, 1, :] = bot
        h *= 2
    return a


def all_pattern_log_sums(x: int, table: PrimeTable) -> tuple[np.ndarray, np.ndarray]:
    """L_f(x) for every sign pattern on the primes <= x.

    Bit i of the pattern index set means f(p_i) = -1.  Since f(n) depends only
    on the set of primes dividing n to an odd power, L over all patterns is the
    Walsh-Hadamard transform of the weights ``c[m] = sum 1/n`` over n with
    odd-exponent set m.  Returns ``(primes, L)``.
    """
    x = int(x)
    table.check(x, "x")
    ps = table.primes_in(0, x)
    k = ps.shape[0]
    if k > MAX_EXACT_PRIMES:
        raise TooLargeError(f"pi({x}) = {k} exceeds the exhaustive cap of {MAX_EXACT_PRIMES} primes")
    mask = np.zeros(x + 1, dtype=np.int64)
    bit = {int(p): 1 << i for i, p in enumerate(ps.tolist())}
    for n in range(2, x + 1):
        p = int(table.spf[n])
        mask[n] = mask[n // p] ^ bit[p]
    c = np.zeros(1 << k, dtype=np.float64)
    np.add.at(c, mask[1:], 1.0 / np.arange(1, x + 1, dtype=np.float64))
    return ps, _walsh_hadamard(c)


def exact_negative_probability(x: int, table: PrimeTable, return_flags: bool = False):
    """Exact P(L_f(x) < 0) over the 2^{pi(x)} equally likely sign patterns, as a Fraction."""
    ps, L = all_pattern_log_sums(x, table)
    neg = int(np.count_nonzero(L < 0))
    frac = Fraction(neg, L.shape[0])
    if return_flags:
        return frac, int(np.count_nonzero(np.abs(L) < NEAR_ZERO))
    return frac


# ---------------------------------------------------------------------------
# tails

def tail_distribution(functional: str, x: int, trials: int, seed: int, thresholds, table: PrimeTable,
                      t: float = 1.0, k: int = 0, theta: float = 0.5, lambdas=(1.0, 2.0, 3.0),
                      batch: int | None = None) -> dict:
    """Empirical exceedance frequencies P(value >= threshold).

    ``neg_euler``: ``-sum_{y_k < p <= x} f(p)(1 - cos(t log p))/p`` with ``y_0 = 1``.
    ``split_sum``: ``sum_{x^{1-theta} < p <= x} f(p) L_f(x/p)/p``; also reports,
    for each lambda, the frequency of ``|value| >= lambda*sigma`` against the
    Hoeffding bound ``2 exp(-lambda^2/2)``, where
    ``sigma^2 = sum (log(x/p)/p)^2`` over the same primes.
    """
    x = int(x)
    table.check(x, "x")
    ps = table.primes_in(0, x)
    npr = ps.shape[0]
    pf = ps.astype(np.float64)
    thresholds = [float(v) for v in thresholds]
    values = []
    extra: dict = {}
    if functional == "neg_euler":
        lo = 1.0 if k == 0 else y_k(k)
        w = np.where(pf > lo, (1.0 - np.cos(t * np.log(pf))) / pf, 0.0)
        for rng in _batches(trials, batch or 4096):
            values.append(-(trial_signs(seed, rng, npr).astype(np.float64) @ w))
    elif functional == "split_sum":
        if not 0 < theta <= 0.5:
            raise InvalidArgumentError("split_sum needs 0 < theta <= 1/2 so that x/p < x^theta")
        cut = x ** (1.0 - theta)
        big = pf > cut
        small_lim = int(x // int(ps[big][0])) if big.any() else 1
        qs = x // ps[big]
        inv = 1.0 / np.arange(1, small_lim + 1, dtype=np.float64)
        for rng in _batches(trials, batch or _default_batch(small_lim)):
            sg = trial_signs(seed, rng, npr)
            f = batch_values(sg, table, small_lim)
            Lp = np.cumsum(f[:, 1:] * inv, axis=1)
            Lq = Lp[:, qs - 1]
            values.append((sg[:, big].astype(np.float64) / pf[big] * Lq).sum(axis=1))
        sigma = math.sqrt(float(np.sum((np.log(x / pf[big]) / pf[big]) ** 2)))
        extra["sigma"] = sigma
    else:
        raise InvalidArgumentError(f"unknown functional {functional!r}")
    v = np.concatenate(values) if values else np.zeros(0)
    out = {"functional": functional, "x": x, "trials": trials, "seed": seed,
           "thresholds": thresholds,
           "exceedance": [float(np.mean(v >= th)) for th in thresholds],
           "quantiles": {q: float(np.quantile(v, q)) for q in (0.5, 0.9, 0.99)}}
    if functional == "split_sum":
        sigma = extra["sigma"]
        out["sigma"] = sigma
        out["hoeffding"] = [{"lambda": float(lam), "empirical": float(np.mean(np.abs(v) >= lam * sigma)),
                             "bound": 2.0 * math.exp(-lam * lam / 2.0)} for lam in lambdas]
    return out


# ---------------------------------------------------------------------------
# shifted mean floor

@dataclass
class ShiftedMeanSummary:
    x: int
    trials: int
    seed: int
    min_ratio: float
    median_ratio: float
    max_ratio: float
    control_ratio: float


def _hyperbola_rows(f: np.ndarray, Y: int) -> np.ndarray:
    s = math.isqrt(Y)
    q = Y // np.arange(1, s + 1, dtype=np.int64)
    F = np.cumsum(f, axis=1, dtype=np.int64)
    return (f[:, 1:s + 1].astype(np.int64) @ q) + F[:, q].sum(axis=1) - s * F[:, s]


def mc_shifted_mean_floor(x: int, trials: int, seed: int, table: PrimeTable, batch: int | None = None) -> ShiftedMeanSummary:
    """Ratio M~_{g_1/2}(w0 x) / exp(sum_{p <= x} f_1/2(p)/p), f_1/2 = f on p <= sqrt(x), 0 above."""
    x = int(x)
    Y, _ = shifted_floor(x)
    table.check(Y, "floor(w0*x)")
    npr = table.pi(Y)
    ps = table.primes[:npr].astype(np.float64)
    cut = math.sqrt(x)
    wsmall = np.where(ps <= cut, 1.0 / ps, 0.0)
    ratios = []
    for rng in _batches(trials, batch or _default_batch(Y)):
        sg = trial_signs(seed, rng, npr)
        f = batch_values(sg, table, Y, prime_cut=cut)
        mg = _hyperbola_rows(f, Y) / (W0 * x)
        ratios.append(mg / np.exp(sg.astype(np.float64) @ wsmall))
    r = np.concatenate(ratios)
    one = batch_values(np.ones((1, npr), dtype=np.int8), table, Y, prime_cut=cut)
    ctrl = float(_hyperbola_rows(one, Y)[0] / (W0 * x) / math.exp(wsmall.sum()))
    return ShiftedMeanSummary(x, trials, seed, float(r.min()), float(np.median(r)), float(r.max()), ctrl)
