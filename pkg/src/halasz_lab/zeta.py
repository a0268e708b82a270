"""Riemann zeta near the line Re(s) = 1 and the oscillation main term.

zeta is evaluated by Euler-Maclaurin summation::

    zeta(s) = sum_{n<N} n^-s + N^{1-s}/(s-1) + N^-s/2
              + sum_{k=1}^{K} B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}

with ``N = max(20, 2|Im s|)`` and ``K = 12``.  Accuracy degrades only through
the cost of the head sum, which grows linearly in ``|Im s|``; inputs with
``|Im s| > 10^6`` are refused.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .constants import BRACKET_COEFFICIENT, EULER_GAMMA, STIELTJES_GAMMA1, W0, bernoulli_numbers
from .errors import InvalidArgumentError, PoleError
from .multfun import _check_eps, fourier_coefficients, section7_profile
from .primes import small_primes

MAX_IM = 1e6
LOG_W0 = math.log(W0)


@dataclass(frozen=True)
class ZetaContext:
    euler_maclaurin_terms: int = 12
    min_cutoff: int = 20
    gamma_euler: float = EULER_GAMMA
    gamma1_stieltjes: float = STIELTJES_GAMMA1
    bernoulli: tuple = field(default=(), repr=False, compare=False)

    @cached_property
    def _coeffs(self) -> np.ndarray:
        B = bernoulli_numbers(2 * self.euler_maclaurin_terms)
        return np.array([float(B[2 * k]) / math.factorial(2 * k)
                         for k in range(1, self.euler_maclaurin_terms + 1)])

    def cutoff(self, s: complex) -> int:
        return max(self.min_cutoff, int(math.ceil(2.0 * abs(s.imag))))

    def _check(self, s: complex) -> complex:
        s = complex(s)
        if s == 1:
            raise PoleError("zeta has a pole at s = 1")
        if s.real <= 0:
            raise InvalidArgumentError("zeta is implemented for Re(s) > 0 only")
        if abs(s.imag) > MAX_IM:
            raise InvalidArgumentError(f"|Im s| > {MAX_IM:g} not supported")
        return s

    def zeta(self, s: complex, cutoff: int | None = None) -> complex:
        s = self._check(s)
        N = self.cutoff(s) if cutoff is None else int(cutoff)
        n = np.arange(1, N, dtype=np.float64)
        head = np.exp(-s * np.log(n)).sum()
        logN = math.log(N)
        Ns = cmath.exp(-s * logN)
        total = head + N * Ns / (s - 1) + Ns / 2
        poch = s  # s(s+1)...(s+2k-2)
        Npow = Ns / N
        for k, c in enumerate(self._coeffs, start=1):
            total += c * poch * Npow
            poch *= (s + 2 * k - 1) * (s + 2 * k)
            Npow /= N * N
        return complex(total)

    def zeta_prime(self, s: complex, cutoff: int | None = None) -> complex:
        """Term-by-term derivative of the Euler-Maclaurin formula."""
        s = self._check(s)
        N = self.cutoff(s) if cutoff is None else int(cutoff)
        logn = np.log(np.arange(1, N, dtype=np.float64))
        head = -(logn * np.exp(-s * logn)).sum()
        logN = math.log(N)
        Ns = cmath.exp(-s * logN)
        total = head - N * Ns * (logN / (s - 1) + 1 / (s - 1) ** 2) - logN * Ns / 2
        for k, c in enumerate(self._coeffs, start=1):
            terms = [s + j for j in range(2 * k - 1)]
            poch = complex(np.prod(terms))
            dpoch = poch * sum(1 / t for t in terms)
            Npow = cmath.exp(-(s + 2 * k - 1) * logN)
            total += c * Npow * (dpoch - logN * poch)
        return complex(total)

    def zeta_prime_numeric(self, s: complex) -> complex:
        h = 1e-6 * max(1.0, abs(s))
        return (self.zeta(s + h) - self.zeta(s - h)) / (2 * h)

    def laurent(self, s: complex) -> complex:
        """Three-term Laurent expansion 1/(s-1) + gamma - gamma_1 (s-1)."""
        s = complex(s)
        return 1 / (s - 1) + self.gamma_euler - self.gamma1_stieltjes * (s - 1)


DEFAULT = ZetaContext()


def zeta(s: complex) -> complex:
    return DEFAULT.zeta(s)


def zeta_prime(s: complex) -> complex:
    return DEFAULT.zeta_prime(s)


def w0_bracket(s: complex) -> complex:
    """(s/(s-1)) w0^{1-s} - zeta(s); the removable singularity at s = 1 gives 0."""
    s = complex(s)
    if s == 1:
        return 0j
    return s / (s - 1) * cmath.exp((1 - s) * LOG_W0) - zeta(s)


def w0_bracket_ratio(s: complex) -> float:
    """|w0_bracket(s)| / |s - 1|; at s = 1 the limit |1 - g - (1-g)^2/2 - g1|."""
    s = complex(s)
    if s == 1:
        return abs(BRACKET_COEFFICIENT)
    return abs(w0_bracket(s)) / abs(s - 1)


def zetaprime_bracket(s: complex) -> complex:
    """zeta'(s) + s/(s-1)^2 - zeta(s)/s."""
    s = complex(s)
    if s == 1:
        raise PoleError("zetaprime_bracket is evaluated on 0 < |s-1|")
    return zeta_prime(s) + s / (s - 1) ** 2 - zeta(s) / s


# ---------------------------------------------------------------------------
# oscillation main term for the section-7 construction

def _cpow(z: complex, a: float) -> complex:
    return cmath.exp(a * cmath.log(z))


def prime_power_correction(t0: float, eps: float, s: complex, prime_limit: int = 10**6, k_max: int = 60) -> complex:
    """sum_p sum_{k>=2} (f(p)^k - h(k u_p)) / (k p^{ks}) with u_p = t0 log p / 2pi.

    The Euler product of the completely multiplicative f differs from the
    product of zeta powers only through prime powers; this is the logarithm of
    that (holomorphic, O(1)) ratio.  The tail over p > prime_limit is below
    ``2/prime_limit``.
    """
    p = small_primes(prime_limit).astype(np.float64)
    lp = np.log(p)
    u = t0 * lp / (2 * math.pi)
    fp = section7_profile(u, eps)
    total = 0j
    for k in range(2, k_max + 1):
        w = np.exp(-k * s * lp)
        if np.abs(w).max() < 1e-18:
            break
        total += complex(((fp ** k - section7_profile(k * u, eps)) * w).sum()) / k
    return total


@dataclass
class OscillationTerm:
    t0: float
    eps: float
    n_max: int
    hhat0: float
    hhat1: float
    mu: complex
    correction: complex
    gamma_factor: float
    gamma_factor_literal: float
    implied_A: float | None = None

    def prediction(self, x):
        """2 Re((w0 x)^{i t0} mu) (log w0 x)^{hhat1 - 1} / Gamma(hhat1)."""
        x = np.asarray(x, dtype=float)
        lw = np.log(W0 * x)
        phase = np.exp(1j * self.t0 * lw)
        return 2.0 * np.real(phase * self.mu) * lw ** (self.hhat1 - 1.0) / self.gamma_factor

    def amplitude(self, x):
        """2 |mu| (log w0 x)^{hhat1 - 1} / Gamma(hhat1): the envelope of prediction()."""
        lw = np.log(W0 * np.asarray(x, dtype=float))
        return 2.0 * abs(self.mu) * lw ** (self.hhat1 - 1.0) / self.gamma_factor


def mu_10(t0: float, eps: float, n_max: int, hhat: np.ndarray | None = None) -> complex:
    """H(1+it0)/(1+it0) * prod_{|m|<=2N, m != 0,1} zeta(1 - i(m-1)t0)^{hhat(m)} (principal branches)."""
    if hhat is None:
        hhat = fourier_coefficients(eps, 2 * n_max)
    M = 2 * n_max
    s1 = complex(1.0, t0)
    h0 = float(hhat[M])
    H = _cpow(zeta(s1), h0) * w0_bracket(s1)
    log_prod = 0j
    for m in range(-M, M + 1):
        if m in (0, 1):
            continue
        a = float(hhat[m + M])
        if abs(a) >= 1.0:
            raise AssertionError(f"Fourier coefficient hhat({m}) = {a} has modulus >= 1")
        if a == 0.0:
            continue
        log_prod += a * cmath.log(zeta(complex(1.0, -(m - 1) * t0)))
    return H / s1 * cmath.exp(log_prod)


def oscillation_main_term(t0: float, eps: float, n_max: int | None = None, x: float | None = None,
                          prime_power: bool = True, X: float | None = None):
    """Main term of L_f(x) - M~_g(w0 x) for the section-7 construction.

    Returns an :class:`OscillationTerm` (or, when ``x`` is given, the prediction
    at ``x``).  The Hankel integral of ``(s-1)^{-a} y^{s-1}`` is
    ``(log y)^{a-1}/Gamma(a)``, so the factor is ``1/Gamma(hhat(1))``; the
    value with ``Gamma(hhat(1) - 1)`` is kept for comparison.  With
    ``prime_power=True`` mu includes the factor ``exp(D(1+it0))`` from
    :func:`prime_power_correction`.
    """
    if t0 == 0:
        raise InvalidArgumentError("t0 must be non-zero")
    _check_eps(eps)
    if n_max is None:
        n_max = max(int(math.ceil(1 / abs(t0))), int(math.ceil(8 / eps)))
    if n_max < 1 / abs(t0):
        raise InvalidArgumentError("n_max must be >= 1/|t0|")
    hhat = fourier_coefficients(eps, 2 * n_max)
    h0, h1 = float(hhat[2 * n_max]), float(hhat[2 * n_max + 1])
    mu = mu_10(t0, eps, n_max, hhat)
    corr = prime_power_correction(t0, eps, complex(1.0, t0)) if prime_power else 0j
    mu *= cmath.exp(corr)
    implied = None
    if X is not None and X > math.e:
        implied = math.log(n_max * abs(t0)) / math.log(math.log(X))
    term = OscillationTerm(t0, eps, n_max, h0, h1, mu, corr, math.gamma(h1), math.gamma(h1 - 1.0), implied)
    if x is not None:
        return complex(term.prediction(x))
    return term
