"""Sieve-backed prime infrastructure.

The central object is :class:`PrimeTable`, holding the primes up to ``limit``
and the smallest-prime-factor array ``spf`` (``spf[n] == n`` exactly when ``n``
is prime; ``spf[0] = spf[1] = 0``).  Every other module reads primes and
factorisations from a table.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from ._numerics import accurate_sum
from .errors import InvalidArgumentError, OutOfRangeError

SPF_MAGIC = b"SPF1"
MAX_LIMIT = 2**32 - 1
DEFAULT_SEGMENT = 1 << 22
CACHE_ENV = "HALASZ_LAB_CACHE"


def small_primes(n: int) -> np.ndarray:
    """All primes <= n by a plain bytearray sieve (used for the base primes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = bytes(len(range(p * p, n + 1, p)))
    return np.flatnonzero(np.frombuffer(bytes(flags), dtype=np.uint8)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray = field(repr=False)
    spf: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.primes.shape[0])

    def check(self, hi: float, what: str = "argument") -> None:
        if hi > self.limit:
            raise OutOfRangeError(f"{what} {hi} exceeds sieve limit {self.limit}")

    def primes_in(self, lo: float, hi: float) -> np.ndarray:
        """Primes p with lo < p <= hi."""
        self.check(hi, "upper bound")
        i = np.searchsorted(self.primes, lo, side="right")
        j = np.searchsorted(self.primes, hi, side="right")
        return self.primes[i:j]

    def pi(self, x: float) -> int:
        self.check(x)
        return int(np.searchsorted(self.primes, x, side="right"))

    def factorize(self, n: int) -> list[tuple[int, int]]:
        self.check(n)
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.spf[n])
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        return out

    @cached_property
    def largest_prime_factor(self) -> np.ndarray:
        """P+(n) for 0 <= n <= limit, with P+(1) = 1 and P+(0) = 0."""
        lpf = np.zeros(self.limit + 1, dtype=np.uint32)
        if self.limit >= 1:
            lpf[1] = 1
        b = 2
        while b <= self.limit:
            e = min(2 * b, self.limit + 1)
            n = np.arange(b, e, dtype=np.int64)
            p = self.spf[b:e].astype(np.int64)
            lpf[b:e] = np.maximum(p, lpf[n // p])
            b = e
        return lpf


def sieve(limit: int, segment_size: int = DEFAULT_SEGMENT, cache: str | os.PathLike | None = None) -> PrimeTable:
    """Build a :class:`PrimeTable` for ``2 <= limit <= 2**32 - 1``.

    The spf array is filled segment by segment (base primes up to ``sqrt(limit)``,
    ascending, each writing only still-unmarked cells), so peak extra memory
    per segment is O(segment_size).  The output does not depend on
    ``segment_size``.

    If ``cache`` names an existing SPF1 file with a large enough limit, the
    table is loaded from it; otherwise the table is computed and written there.
    """
    limit = int(limit)
    if limit < 2:
        raise InvalidArgumentError(f"sieve limit must be >= 2, got {limit}")
    if limit > MAX_LIMIT:
        raise InvalidArgumentError(f"sieve limit {limit} exceeds 32-bit spf range")
    if segment_size < 1:
        raise InvalidArgumentError("segment_size must be positive")
    if cache is not None and Path(cache).is_file():
        table = load_spf_cache(cache, limit)
        if table is not None:
            return table
    try:
        spf = np.zeros(limit + 1, dtype=np.uint32)
    except MemoryError as exc:  # pragma: no cover - depends on host
        raise MemoryError(f"cannot allocate spf array for limit {limit}") from exc
    base = small_primes(math.isqrt(limit))
    for lo in range(0, limit + 1, segment_size):
        hi = min(lo + segment_size, limit + 1)
        seg = spf[lo:hi]
        for p in base.tolist():
            start = p * p
            if start >= hi:
                break
            if start < lo:
                start = lo + (-lo) % p
            cells = seg[start - lo::p]
            cells[cells == 0] = p
    unmarked = np.flatnonzero(spf[2:] == 0) + 2
    spf[unmarked] = unmarked
    table = PrimeTable(limit=limit, primes=unmarked.astype(np.int64), spf=spf)
    if cache is not None:
        write_spf_cache(table, cache)
    return table


def write_spf_cache(table: PrimeTable, path: str | os.PathLike) -> None:
    """Write ``SPF1`` + little-endian u64 limit + raw little-endian u32 spf entries."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(SPF_MAGIC)
        fh.write(struct.pack("<Q", table.limit))
        fh.write(table.spf.astype("<u4", copy=False).tobytes())
    os.replace(tmp, path)


def load_spf_cache(path: str | os.PathLike, limit: int | None = None) -> PrimeTable | None:
    """Load a cache file; returns None if it is too small for ``limit``."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SPF_MAGIC:
            raise InvalidArgumentError(f"{path}: not an SPF1 cache file")
        (stored,) = struct.unpack("<Q", fh.read(8))
        if limit is not None and stored < limit:
            return None
        n = stored if limit is None else limit
        spf = np.fromfile(fh, dtype="<u4", count=n + 1).astype(np.uint32, copy=False)
    if spf.shape[0] != n + 1:
        raise InvalidArgumentError(f"{path}: truncated cache file")
    primes = np.flatnonzero(spf == np.arange(n + 1, dtype=np.uint32))
    primes = primes[primes >= 2].astype(np.int64)
    return PrimeTable(limit=n, primes=primes, spf=spf)


def default_cache_path(limit: int) -> Path | None:
    d = os.environ.get(CACHE_ENV)
    if not d:
        return None
    return Path(d) / f"spf_{limit}.bin"


def prime_recip_sum(table: PrimeTable, lo: float, hi: float,
                    weight: Callable[[np.ndarray], np.ndarray] | None = None,
                    t: float = 1.0) -> float:
    """Sum of ``weight(t * log p) / p`` over primes ``lo < p <= hi``.

    ``weight`` is any vectorised function (e.g. ``np.cos``); ``None`` means the
    unit weight.  The result is correctly rounded.
    """
    if hi < lo:
        return 0.0
    p = table.primes_in(lo, hi).astype(np.float64)
    if p.size == 0:
        return 0.0
    terms = 1.0 / p if weight is None else np.asarray(weight(t * np.log(p)), dtype=float) / p
    return float(accurate_sum(terms))


def chebyshev_theta(table: PrimeTable, t: float) -> float:
    """theta(t) = sum of log p over p <= t."""
    p = table.primes_in(0, t)
    return float(accurate_sum(np.log(p.astype(np.float64))))


def chebyshev_R(table: PrimeTable, t: float) -> float:
    """R(t) = theta(t)/t - 1."""
    return chebyshev_theta(table, t) / t - 1.0
