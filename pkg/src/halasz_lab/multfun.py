"""Completely multiplicative functions: declarative specs and bulk evaluation.

A :class:`FunctionSpec` fixes ``f`` by its values at the primes.  Evaluation at
all ``n <= N`` (:func:`materialize`) uses ``f(n) = f(spf(n)) * f(n / spf(n))``,
processed over dyadic blocks ``[b, 2b)`` so each block only reads values that
are already known.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from ._numerics import compensated_cumsum
from .errors import DegenerateParametersError, IncompleteSpecError, InvalidArgumentError
from .primes import PrimeTable

FAMILIES = ("one", "liouville", "character4", "cos_sign", "section6", "section7",
            "rademacher", "custom", "custom_complex")
INTEGER_FAMILIES = {"one", "liouville", "character4", "cos_sign", "section6", "rademacher"}
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# smooth step used by the section-7 construction

_STEP_INTERVALS = 4096


def _bump(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _step_table():
    nodes, weights = np.polynomial.legendre.leggauss(20)
    r = np.linspace(0.0, 1.0, _STEP_INTERVALS + 1)
    s = 2.0 * r - 1.0
    a, b = s[:-1], s[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pieces = (_bump(mid[:, None] + half[:, None] * nodes[None, :]) * weights).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    total = cum[-1]
    values = cum / total
    slopes = 2.0 * _bump(s) / total
    return r, values, slopes


def smooth_step(r) -> np.ndarray:
    """C-infinity step from 0 (r <= 0) to 1 (r >= 1): the normalised integral of exp(-1/(1-s^2)).

    Tabulated once with 20-point Gauss-Legendre panels and evaluated by cubic
    Hermite interpolation (interpolation error below 1e-15).
    """
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    grid, vals, slopes = _step_table()
    h = 1.0 / _STEP_INTERVALS
    i = np.minimum((r * _STEP_INTERVALS).astype(np.int64), _STEP_INTERVALS - 1)
    u = (r - grid[i]) / h
    u2, u3 = u * u, u * u * u
    return ((2 * u3 - 3 * u2 + 1) * vals[i] + (u3 - 2 * u2 + u) * h * slopes[i]
            + (-2 * u3 + 3 * u2) * vals[i + 1] + (u3 - u2) * h * slopes[i + 1])


def section7_profile(u, eps: float) -> np.ndarray:
    """The 1-periodic even profile: +1 on |u| <= 1/4 - eps, -1 on 1/4 + eps <= |u| <= 1/2."""
    u = np.asarray(u, dtype=float)
    a = np.abs(u - np.round(u))
    return 1.0 - 2.0 * smooth_step((a - (0.25 - eps)) / (2.0 * eps))


def fourier_coefficients(eps: float, n_max: int, quadrature_points: int | None = None) -> np.ndarray:
    """Coefficients of the section-7 profile, ``int_0^1 h(u) e^{-2 pi i n u} du`` for ``-n_max <= n <= n_max``.

    Trapezoid rule on a power-of-two grid via the real FFT; the grid has at
    least ``64/eps`` and ``8*n_max`` points.  Entry ``k`` holds ``n = k - n_max``.
    """
    _check_eps(eps)
    need = max(int(math.ceil(64.0 / eps)), 8 * n_max, 1024)
    if quadrature_points is not None and quadrature_points < int(math.ceil(64.0 / eps)):
        raise InvalidArgumentError(f"quadrature_points must be >= 64/eps = {64.0 / eps:.1f}")
    m = 1 << int(math.ceil(math.log2(max(need, quadrature_points or 0))))
    u = np.arange(m) / m
    spectrum = np.fft.rfft(section7_profile(u, eps)).real / m
    pos = spectrum[: n_max + 1]
    return np.concatenate([pos[:0:-1], pos])


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 0.25:
        raise InvalidArgumentError(f"eps must lie in (0, 1/4), got {eps}")


# ---------------------------------------------------------------------------
# Rademacher signs from a counter-based generator

def rademacher_signs(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """±1 values for prime indices ``0..count-1``.

    Bit ``i`` of the raw Philox output stream keyed by ``(seed, stream)`` decides
    the sign at prime index ``i``, so any prefix is reproducible on its own.
    """
    if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
        raise InvalidArgumentError("seed and stream must be unsigned 64-bit integers")
    words = -(-count // 64)
    raw = np.random.Philox(key=seed | (stream << 64)).random_raw(words)
    bits = np.unpackbits(np.asarray(raw, dtype="<u8").view(np.uint8), bitorder="little")[:count]
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


# ---------------------------------------------------------------------------
# specs

def _params(d: Mapping[str, float]) -> tuple[tuple[str, float], ...]:
    return tuple(sorted((k, float(v)) for k, v in d.items()))


@dataclass(frozen=True)
class FunctionSpec:
    """Values of a completely multiplicative ``f`` at the primes.

    ``params`` is a sorted tuple of named parameters; ``values`` holds explicit
    ``(p, f(p))`` pairs for the custom families; ``data`` carries derived
    per-prime data that is a pure function of ``params`` (so it is excluded
    from equality to keep comparisons cheap).
    """

    family: str
    params: tuple[tuple[str, float], ...] = ()
    overrides: tuple[tuple[int, complex], ...] = ()
    values: tuple[tuple[int, complex], ...] = ()
    data: bytes = field(default=b"", compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        for p, v in self.overrides + self.values:
            if abs(v) > 1.0 + 1e-15:
                raise InvalidArgumentError(f"|f({p})| = {abs(v)} exceeds 1")
            if self.family != "custom_complex" and complex(v).imag != 0.0:
                raise InvalidArgumentError(f"complex value at {p} in real family {self.family}")

    # -- convenience -------------------------------------------------------
    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def is_complex(self) -> bool:
        return self.family == "custom_complex"

    @property
    def is_integer(self) -> bool:
        if self.family in INTEGER_FAMILIES:
            ok = True
        elif self.family == "custom":
            ok = all(float(v.real) in (-1.0, 0.0, 1.0) for _, v in self.values)
            d = self.p.get("default")
            ok = ok and (d is None or d in (-1.0, 0.0, 1.0))
        else:
            ok = False
        return ok and all(complex(v).real in (-1.0, 0.0, 1.0) for _, v in self.overrides)

    @property
    def dtype(self):
        if self.is_complex:
            return np.complex128
        return np.int8 if self.is_integer else np.float64

    @property
    def needs_index(self) -> bool:
        return self.family == "rademacher"

    def label(self) -> str:
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(f"{k}={v:g}" for k, v in self.params)

    def with_overrides(self, overrides: Mapping[int, float]) -> "FunctionSpec":
        merged = dict(self.overrides)
        merged.update({int(p): v for p, v in overrides.items()})
        return FunctionSpec(self.family, self.params, tuple(sorted(merged.items())), self.values, self.data)

    @cached_property
    def _explicit(self):
        if not self.values:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        ps = np.array([p for p, _ in self.values], dtype=np.int64)
        vs = np.array([v for _, v in self.values], dtype=np.complex128 if self.is_complex else np.float64)
        order = np.argsort(ps)
        return ps[order], vs[order]

    @cached_property
    def _section6_arrays(self):
        prm = self.p
        x, v = prm["x"], prm["v"]
        lo = x ** (1.0 - 1.0 / v)
        signs = np.frombuffer(self.data, dtype=np.int8)
        return lo, signs

    def prime_values(self, primes: np.ndarray, index: np.ndarray | None = None) -> np.ndarray:
        """Vectorised ``f(p)`` for an array of primes.

        ``index`` (0-based prime indices) is required by the Rademacher family.
        """
        primes = np.asarray(primes, dtype=np.int64)
        fam, prm = self.family, self.p
        lp = np.log(primes.astype(np.float64))
        if fam == "one":
            out = np.ones(primes.shape, dtype=np.float64)
        elif fam == "liouville":
            out = -np.ones(primes.shape, dtype=np.float64)
        elif fam == "character4":
            r = primes % 4
            out = np.where(r == 1, 1.0, np.where(r == 3, -1.0, 0.0))
        elif fam == "cos_sign":
            out = np.where(np.cos(prm["t0"] * lp) >= 0.0, 1.0, -1.0)
        elif fam == "section7":
            out = section7_profile(prm["t0"] * lp / TWO_PI, prm["eps"])
        elif fam == "section6":
            out = self._section6_values(primes, lp)
        elif fam == "rademacher":
            if index is None:
                raise InvalidArgumentError("rademacher values need prime indices")
            index = np.asarray(index, dtype=np.int64)
            n = int(index.max()) + 1 if index.size else 0
            out = rademacher_signs(int(prm["seed"]), n, int(prm.get("stream", 0)))[index].astype(np.float64)
        else:
            ps, vs = self._explicit
            pos = np.searchsorted(ps, primes)
            pos_c = np.minimum(pos, max(len(ps) - 1, 0))
            hit = (pos < len(ps)) & (ps[pos_c] == primes) if len(ps) else np.zeros(primes.shape, bool)
            default = prm.get("default")
            if not hit.all() and default is None:
                missing = primes[~hit]
                raise IncompleteSpecError(int(missing.min()))
            out = np.full(primes.shape, 0.0 if default is None else default,
                          dtype=np.complex128 if self.is_complex else np.float64)
            if len(ps):
                out[hit] = vs[pos_c[hit]]
        if self.overrides:
            for p, v in self.overrides:
                out = out.astype(np.complex128) if (self.is_complex and not np.iscomplexobj(out)) else out
                out[primes == p] = v if self.is_complex else complex(v).real
        return out

    def _section6_values(self, primes, lp):
        prm = self.p
        x, v, t0, theta = prm["x"], prm["v"], prm["t0"], prm["theta"]
        small = x ** (1.0 / v)
        mid_hi, signs = self._section6_arrays
        u = t0 * lp / TWO_PI
        dist = np.abs(u - np.round(u))
        out = np.where(dist <= theta, 1.0, -1.0)
        out = np.where((primes > small) & (primes <= mid_hi), 1.0, out)
        out = np.where(primes > x, -1.0, out)
        big = (primes > mid_hi) & (primes <= x)
        if big.any():
            large = _section6_large_primes(x, v)
            pos = np.searchsorted(large, primes[big])
            out[big] = signs[pos]
        return out


@lru_cache(maxsize=8)
def _section6_large_primes(x: float, v: float) -> np.ndarray:
    lo = x ** (1.0 - 1.0 / v)
    from .primes import small_primes  # sieve up to x once per parameter set
    ps = small_primes(int(x))
    return ps[ps > lo]


def spec(family: str, **params) -> FunctionSpec:
    """Shorthand: ``spec("cos_sign", t0=0.5)``."""
    return FunctionSpec(family, _params(params))


def custom(values: Mapping[int, complex], default: float | None = None, complex_values: bool = False) -> FunctionSpec:
    prm = {} if default is None else {"default": default}
    fam = "custom_complex" if complex_values else "custom"
    vals = tuple(sorted((int(p), complex(v) if complex_values else float(np.real(v))) for p, v in values.items()))
    return FunctionSpec(fam, _params(prm), (), vals)


# ---------------------------------------------------------------------------
# value tables

@dataclass(frozen=True, eq=False)
class ValueTable:
    spec: FunctionSpec
    limit: int
    values: np.ndarray = field(repr=False)
    table: PrimeTable = field(repr=False)

    def __getitem__(self, n):
        return self.values[n]

    @cached_property
    def prefix(self) -> np.ndarray:
        """prefix[n] = sum_{m <= n} f(m); exact integers for integer families."""
        if self.values.dtype == np.int8:
            return np.cumsum(self.values, dtype=np.int64)
        return compensated_cumsum(self.values)

    @cached_property
    def log_prefix(self) -> np.ndarray:
        """log_prefix[n] = L_f(n) = sum_{m <= n} f(m)/m, with log_prefix[0] = 0."""
        n = np.arange(self.limit + 1, dtype=np.float64)
        n[0] = 1.0
        terms = self.values / n
        terms[0] = 0
        return compensated_cumsum(terms)

    @cached_property
    def largest_prime_factor(self) -> np.ndarray:
        return self.table.largest_prime_factor[: self.limit + 1]

    def prime_values(self, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """(primes <= hi, f at those primes)."""
        ps = self.table.primes_in(0, min(hi, self.limit))
        return ps, self.values[ps]


def extend_completely_multiplicative(spf: np.ndarray, prime_idx: np.ndarray, prime_vals: np.ndarray,
                                     limit: int, dtype) -> np.ndarray:
    f = np.zeros(limit + 1, dtype=dtype)
    if limit >= 1:
        f[1] = 1
    f[prime_idx] = prime_vals
    b = 2
    while b <= limit:
        e = min(2 * b, limit + 1)
        n = np.arange(b, e, dtype=np.int64)
        p = spf[b:e].astype(np.int64)
        comp = p != n
        nc, pc = n[comp], p[comp]
        f[nc] = f[pc] * f[nc // pc]
        b = e
    return f


def materialize(fs: FunctionSpec, table: PrimeTable, limit: int | None = None) -> ValueTable:
    """Evaluate ``f(1..limit)``; ``values[0]`` is 0 by convention."""
    limit = table.limit if limit is None else int(limit)
    table.check(limit, "materialize limit")
    npr = table.pi(limit)
    ps = table.primes[:npr]
    pv = fs.prime_values(ps, np.arange(npr))
    if fs.dtype == np.int8:
        pv = np.rint(np.real(pv)).astype(np.int8)
    values = extend_completely_multiplicative(table.spf, ps, pv, limit, fs.dtype)
    values.flags.writeable = False
    return ValueTable(fs, limit, values, table)


# ---------------------------------------------------------------------------
# constructions

def section6_default_theta(x: float) -> float:
    return math.log(math.log(x)) ** (-1.0 / 3.0)


def section6_defaults(x: float) -> dict[str, float]:
    return {"v": 3.0 * math.e, "t0": 0.5, "theta": min(0.5, section6_default_theta(x)), "eps": math.log(1.5)}


def construct_section6(x: int, v: float = 3.0 * math.e, t0: float = 0.5, theta: float | None = None,
                       table: PrimeTable | None = None) -> FunctionSpec:
    """The ±1 example whose large primes take ``-sign(L_f(x/p))``.

    Small primes ``p <= x^{1/v}`` get +1 iff ``||t0 log p / 2pi|| <= theta``; the
    middle range ``(x^{1/v}, x^{1-1/v}]`` gets +1; each large prime
    ``p in (x^{1-1/v}, x]`` gets ``-sign(L_f(x/p))`` computed from small primes
    only, with ``sign(0) = +1`` (so such a prime gets -1); primes above ``x`` get -1.
    ``theta`` defaults to ``(log log x)^{-1/3}`` and is clamped to 1/2.
    """
    x = int(x)
    if table is not None:
        table.check(x, "x")
    if v <= 2:
        raise InvalidArgumentError(f"v must exceed 2, got {v}")
    if abs(t0) > 1:
        raise InvalidArgumentError(f"|t0| must be <= 1, got {t0}")
    if theta is None:
        theta = section6_default_theta(x)
    if theta <= 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    theta = min(theta, 0.5)
    small = x ** (1.0 / v)
    if small < 2:
        raise DegenerateParametersError(f"x^(1/v) = {small:.3f} < 2: no small primes")
    probe = FunctionSpec("section6", _params({"x": x, "v": v, "t0": t0, "theta": theta}), data=b"")
    large = _section6_large_primes(float(x), float(v))
    d_max = int(x // int(large[0])) if large.size else 1
    from .primes import sieve as _sieve
    small_table = _sieve(max(d_max, 2))
    sp = small_table.primes
    sv = probe._section6_values(sp, np.log(sp.astype(np.float64)))
    f_small = extend_completely_multiplicative(small_table.spf, sp, sv.astype(np.int8), small_table.limit, np.int8)
    n = np.arange(small_table.limit + 1, dtype=np.float64)
    n[0] = 1.0
    terms = f_small / n
    terms[0] = 0.0
    L = compensated_cumsum(terms)
    signs = np.where(L[x // large] >= 0.0, -1, 1).astype(np.int8)
    return FunctionSpec("section6", probe.params, data=signs.tobytes())


def construct_section7(t0: float, eps: float) -> FunctionSpec:
    """``f(p) = h(t0 log p / 2pi)`` with the smooth square-wave profile ``h``."""
    _check_eps(eps)
    if t0 == 0:
        raise InvalidArgumentError("t0 must be non-zero")
    return spec("section7", t0=t0, eps=eps)


def sample_rademacher(seed: int, table: PrimeTable | None = None, stream: int = 0) -> FunctionSpec:
    """A Rademacher random completely multiplicative function keyed by ``(seed, stream)``.

    Values are drawn lazily per prime index, so the spec is valid for any table.
    """
    rademacher_signs(seed, 1, stream)  # validates the key
    return spec("rademacher", seed=seed, stream=stream)


# ---------------------------------------------------------------------------
# text formats

def read_custom(path: str | Path, default: float | None = None) -> FunctionSpec:
    """Parse the ``p value`` per line format (``#`` starts a comment)."""
    vals: dict[int, complex] = {}
    is_complex = False
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidArgumentError(f"{path}:{lineno}: expected 'p value'")
        p = int(parts[0])
        v = complex(parts[1].replace("i", "j"))
        is_complex |= v.imag != 0.0
        vals[p] = v
    return custom(vals, default=default, complex_values=is_complex)


def format_custom(primes: Iterable[int], values: Iterable[complex], header: str | None = None) -> str:
    lines = [] if header is None else [f"# {h}" for h in header.splitlines()]
    for p, v in zip(primes, values):
        v = complex(v)
        lines.append(f"{int(p)} {v.real:.17g}" if v.imag == 0 else f"{int(p)} {v.real:.17g}{v.imag:+.17g}j")
    return "\n".join(lines) + "\n"


def parse_function_arg(text: str) -> tuple[str, dict[str, str]]:
    """Split ``family[:k=v,...]`` into the family name and raw parameter strings."""
    fam, _, rest = text.partition(":")
    fam = fam.strip()
    if fam not in FAMILIES:
        raise InvalidArgumentError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            k, eq, val = item.partition("=")
            if not eq:
                raise InvalidArgumentError(f"bad parameter {item!r} in {text!r}")
            params[k.strip()] = val.strip()
    return fam, params


def build_spec(text: str, table: PrimeTable | None = None) -> FunctionSpec:
    """Build a spec from a CLI string such as ``section7:t0=0.1,eps=0.05``."""
    fam, raw = parse_function_arg(text)
    try:
        num = {k: float(v) for k, v in raw.items() if k != "path"}
    except ValueError as exc:
        raise InvalidArgumentError(f"non-numeric parameter in {text!r}") from exc
    if fam in ("custom", "custom_complex"):
        if "path" not in raw:
            raise InvalidArgumentError("custom family needs path=<file>")
        return read_custom(raw["path"], default=num.get("default"))
    if fam == "section7":
        return construct_section7(num.get("t0", 0.1), num.get("eps", 0.05))
    if fam == "section6":
        x = int(num.get("x", 10**6))
        d = section6_defaults(x)
        theta = num.get("theta", section6_default_theta(x))
        if theta >= 0.5:
            warnings.warn(f"theta = {theta:.4f} >= 1/2: clamped to 1/2, the small-prime window is vacuous",
                          stacklevel=2)
        return construct_section6(x, num.get("v", d["v"]), num.get("t0", d["t0"]), theta, table)
    if fam == "rademacher":
        return sample_rademacher(int(num.get("seed", 0)), table, int(num.get("stream", 0)))
    if fam == "cos_sign":
        return spec("cos_sign", t0=num.get("t0", 0.5))
    if num:
        raise InvalidArgumentError(f"family {fam} takes no parameters")
    return spec(fam)
