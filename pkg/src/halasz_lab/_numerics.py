"""Small numerical kernels shared by the modules: accurate summation and 1-D minimisation."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_BLOCK = 1024
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def accurate_sum(a) -> float | complex:
    """Correctly rounded sum of a real (or complex) array."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if np.iscomplexobj(a):
        return complex(math.fsum(a.real.tolist()), math.fsum(a.imag.tolist()))
    return math.fsum(a.tolist())


def compensated_cumsum(a: np.ndarray, offset: float = 0.0) -> np.ndarray:
    """Inclusive running sum with error independent of the array length.

    Blocks of ``_BLOCK`` terms are summed naively; the block offsets are carried
    with Neumaier compensation, so the absolute error stays within a few ulps of
    the running total plus ``_BLOCK * eps`` times the block magnitude.
    """
    a = np.asarray(a)
    n = a.shape[0]
    out = np.empty(n, dtype=np.result_type(a.dtype, np.float64))
    if n == 0:
        return out
    if np.iscomplexobj(out):
        out.real = compensated_cumsum(a.real, float(np.real(offset)))
        out.imag = compensated_cumsum(a.imag, float(np.imag(offset)))
        return out
    m = -(-n // _BLOCK)
    padded = np.zeros(m * _BLOCK, dtype=np.float64)
    padded[:n] = a
    blocks = padded.reshape(m, _BLOCK)
    inner = np.cumsum(blocks, axis=1)
    totals = blocks.sum(axis=1)
    starts = np.empty(m, dtype=np.float64)
    s, c = float(offset), 0.0
    for i, v in enumerate(totals.tolist()):
        starts[i] = s + c
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    out[:] = (inner + starts[:, None]).reshape(-1)[:n]
    return out


def golden_section_min(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6):
    """Minimise a unimodal-on-bracket function on [a, b]; returns (t, f(t))."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def grid_refine_min(f_vec: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                    spacing: float, tol: float = 1e-6):
    """Coarse grid minimisation followed by golden-section refinement.

    ``f_vec`` maps an array of abscissae to objective values. The returned value
    never exceeds the best grid value; ties on the grid go to the point with the
    smallest absolute abscissa.

    Returns ``(t_star, value, grid_min)``.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        v = float(f_vec(np.array([lo]))[0])
        return lo, v, v
    count = max(2, int(math.ceil((hi - lo) / spacing)) + 1)
    grid = np.linspace(lo, hi, count)
    vals = np.asarray(f_vec(grid), dtype=float)
    best = vals.min()
    tied = np.flatnonzero(vals <= best)
    i = int(tied[np.argmin(np.abs(grid[tied]))])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, count - 1)]
    t_ref, v_ref = golden_section_min(lambda t: float(f_vec(np.array([t]))[0]), a, b, tol)
    if v_ref < best:
        return float(t_ref), float(v_ref), float(best)
    return float(grid[i]), float(best), float(best)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                     max_depth: int = 50) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)
