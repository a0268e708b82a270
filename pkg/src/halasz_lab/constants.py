"""Constants computed at import time from Euler-Maclaurin tail formulas.

Nothing here is read from a table: Euler's constant and the first Stieltjes
constant come from the Euler-Maclaurin expansions of the harmonic sums
``sum 1/k`` and ``sum log(k)/k`` in 50-digit decimal arithmetic, and are then
checked against fixed reference windows.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

from ._numerics import adaptive_simpson

_DIGITS = 50
_EM_N = 60
_EM_TERMS = 14


@lru_cache(maxsize=None)
def bernoulli_numbers(m: int) -> tuple[Fraction, ...]:
    """B_0..B_m (with B_1 = -1/2) from the Akiyama-Tanigawa recurrence."""
    out = []
    a = [Fraction(0)] * (m + 1)
    for k in range(m + 1):
        a[k] = Fraction(1, k + 1)
        for j in range(k, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    if m >= 1:
        out[1] = -out[1]
    return tuple(out)


def _dec(fr: Fraction) -> Decimal:
    return Decimal(fr.numerator) / Decimal(fr.denominator)


def _euler_gamma_decimal() -> Decimal:
    B = bernoulli_numbers(2 * _EM_TERMS)
    N = _EM_N
    with localcontext() as ctx:
        ctx.prec = _DIGITS
        h = sum((Decimal(1) / Decimal(k) for k in range(1, N + 1)), Decimal(0))
        g = h - Decimal(N).ln() - Decimal(1) / Decimal(2 * N)
        for j in range(1, _EM_TERMS + 1):
            g += _dec(B[2 * j]) / (Decimal(2 * j) * Decimal(N) ** (2 * j))
        return +g


def _stieltjes_gamma1_decimal() -> Decimal:
    # sum_{k<=N} log k / k - (log N)^2/2 - log N/(2N) + sum_j B_2j (log N - H_{2j-1}) / (2j N^2j)
    B = bernoulli_numbers(2 * _EM_TERMS)
    N = _EM_N
    with localcontext() as ctx:
        ctx.prec = _DIGITS
        logN = Decimal(N).ln()
        s = sum((Decimal(k).ln() / Decimal(k) for k in range(2, N + 1)), Decimal(0))
        g = s - logN * logN / 2 - logN / Decimal(2 * N)
        for j in range(1, _EM_TERMS + 1):
            h = sum((Decimal(1) / Decimal(i) for i in range(1, 2 * j)), Decimal(0))
            g += _dec(B[2 * j]) * (logN - h) / (Decimal(2 * j) * Decimal(N) ** (2 * j))
        return +g


def _hall_montgomery_delta1() -> float:
    r = math.sqrt(math.e)
    integral = adaptive_simpson(lambda t: math.log(t) / (t + 1.0), 1.0, r, tol=1e-13)
    return 1.0 - 2.0 * math.log(1.0 + r) + 4.0 * integral


EULER_GAMMA_DEC = _euler_gamma_decimal()
with localcontext() as _ctx:
    _ctx.prec = _DIGITS
    W0_DEC = +((Decimal(1) - EULER_GAMMA_DEC).exp())

EULER_GAMMA = float(EULER_GAMMA_DEC)
STIELTJES_GAMMA1 = float(_stieltjes_gamma1_decimal())
W0 = float(W0_DEC)
LOG_EXPONENT = 1.0 - 2.0 / math.pi
DELTA1 = _hall_montgomery_delta1()
BRACKET_COEFFICIENT = 1.0 - EULER_GAMMA - (1.0 - EULER_GAMMA) ** 2 / 2.0 - STIELTJES_GAMMA1

if not 0.5772156 < EULER_GAMMA < 0.5772157:
    raise RuntimeError(f"Euler gamma out of window: {EULER_GAMMA!r}")
if not -0.07282 < STIELTJES_GAMMA1 < -0.07281:
    raise RuntimeError(f"gamma_1 out of window: {STIELTJES_GAMMA1!r}")


def as_dict() -> dict[str, float]:
    return {
        "w0": W0,
        "euler_gamma": EULER_GAMMA,
        "stieltjes_gamma1": STIELTJES_GAMMA1,
        "delta_scaling_exponent": LOG_EXPONENT,
        "two_over_pi": 2.0 / math.pi,
        "hall_montgomery_delta1": DELTA1,
        "w0_bracket_coefficient": BRACKET_COEFFICIENT,
    }
