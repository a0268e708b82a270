import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halasz_lab.errors import InvalidArgumentError, UnsupportedForComplexError
from halasz_lab.functionals import (H1, H2, H2prime, M_functional, T_CAP, functional_report, halasz_gs_bound,
                                    hall_tenenbaum_residual, min_distance_over_t, phi_mean, pretentious_distance,
                                    prime_sample, section6_diagnostics, y_k)
from halasz_lab.multfun import construct_section6, custom, materialize, section6_defaults, spec
from halasz_lab.sums import cesaro_sum


@pytest.fixture(scope="module")
def vt(table_1e6):
    names = {"one": spec("one"), "liouville": spec("liouville"), "character4": spec("character4"),
             "cos_sign": spec("cos_sign", t0=0.5), "cos_sign_quarter": spec("cos_sign", t0=0.25),
             "section7": spec("section7", t0=0.3, eps=0.05)}
    out = {k: materialize(v, table_1e6, 10**6) for k, v in names.items()}
    for s in range(1, 6):
        out[f"rad{s}"] = materialize(spec("rademacher", seed=s, stream=0), table_1e6, 10**6)
    return out


def S_oracle(v, x, t):
    """sum_{p<=x} f(p) cos(t log p)/p and sum cos(t log p)/p, term by term."""
    ps = v.table.primes_in(0, x).tolist()
    fs = [float(v.values[p]) for p in ps]
    C = math.fsum(math.cos(t * math.log(p)) / p for p in ps)
    S = math.fsum(f * math.cos(t * math.log(p)) / p for f, p in zip(fs, ps))
    return C, S, math.fsum(1.0 / p for p in ps)


def test_distance_examples(vt):
    assert pretentious_distance(vt["one"], 0.0, 10**4) == 0.0
    d = pretentious_distance(vt["liouville"], 0.0, 100)
    assert d == pytest.approx(3.60566, abs=1e-4)
    assert d == pytest.approx(2 * S_oracle(vt["liouville"], 100, 0)[2], abs=1e-14)
    assert pretentious_distance(vt["liouville"], 0.0, 100, reference="liouville") == 0.0
    C, S, R = S_oracle(vt["cos_sign"], 5000, 0.7)
    assert pretentious_distance(vt["cos_sign"], 0.7, 5000) == pytest.approx(R - S, abs=1e-13)
    assert pretentious_distance(vt["cos_sign"], 0.7, 5000, "liouville") == pytest.approx(R + S, abs=1e-13)
    with pytest.raises(InvalidArgumentError):
        pretentious_distance(vt["one"], 0.0, 100, reference="other")


@given(t=st.floats(-20, 20), x1=st.integers(2, 5000), dx=st.integers(0, 5000))
@settings(max_examples=60, deadline=None)
def test_distance_nonneg_monotone(vt, t, x1, dx):
    for name in ("liouville", "cos_sign", "rad1", "section7"):
        d1 = pretentious_distance(vt[name], t, x1)
        d2 = pretentious_distance(vt[name], t, x1 + dx)
        assert d1 >= 0 and d2 >= d1 - 1e-9


def test_min_distance_examples(vt):
    t, v = min_distance_over_t(vt["one"], 10**4, 5)
    assert t == 0.0 and v == 0.0
    t, v = min_distance_over_t(vt["cos_sign"], 10**6, 2)
    assert v < pretentious_distance(vt["cos_sign"], 0.0, 10**6)
    assert abs(t - 0.5) < 0.05


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_min_distance_dense_grid(vt, seed, table_1e6):
    x, T = 10**5, 10.0
    s = prime_sample(vt[f"rad{seed}"], x)
    _, val = min_distance_over_t(s, x, T)
    ts = np.arange(0.0, T, 0.025 / math.log(x))
    dense = s.recip_sum - s.trig_sums(ts)[1]
    assert val <= dense.min() + 1e-3
    assert val >= dense.min() - 1e-3


def test_grid_certificate(vt):
    # the refined minimum is below every grid value it started from
    s = prime_sample(vt["rad2"], 10**5)
    t, val = min_distance_over_t(s, 10**5, 5.0)
    ts = np.arange(0.0, 5.0, 0.25 / math.log(10**5))
    assert val <= (s.recip_sum - s.trig_sums(ts)[1]).min() + 1e-12


def test_M_functional(vt):
    assert M_functional(vt["one"], 10**4, 3) == 0.0
    m = M_functional(vt["liouville"], 10**4, 1)
    t0_value = 2 * S_oracle(vt["liouville"], 10**4, 0)[2]
    assert m <= t0_value
    for name in ("liouville", "cos_sign", "rad3"):
        at_zero = pretentious_distance(vt[name], 0.0, 10**5)  # = sum (1 - f(p))/p
        vals = [M_functional(vt[name], 10**5, T) for T in (1, 2, 5, 10)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[0] <= at_zero + 1e-12
    m, t = M_functional(vt["cos_sign"], 10**5, 5, return_t=True)
    C, S, _ = S_oracle(vt["cos_sign"], 10**5, t)
    assert m == pytest.approx(C - S, abs=1e-12)
    cplx = custom({p: 1j for p in vt["one"].table.primes_in(0, 100).tolist()}, complex_values=True)
    with pytest.raises(UnsupportedForComplexError):
        M_functional(materialize(cplx, vt["one"].table, 100), 100, 1)


def test_H1(vt):
    assert H1(vt["one"], 10**4) == 1.0
    y = 10**4
    h = H1(vt["liouville"], y)
    assert h <= 10 * math.log(y) ** (2 / math.pi)
    for name, v in vt.items():
        assert H1(v, 10**5) >= 1e-3, name
    # dense-grid oracle for the maximum over |t| <= 1/2
    s = prime_sample(vt["cos_sign_quarter"], y)
    ts = np.linspace(0, 0.5, 20001)
    C, S = s.trig_sums(ts)
    h = H1(s, y)
    assert math.log(h) == pytest.approx((S - C).max(), abs=1e-6)
    C0, S0, _ = S_oracle(vt["cos_sign_quarter"], y, 0.25)
    assert math.log(h) >= (S0 - C0) - 1e-12


def test_H1_H2_read_only_p_le_y(vt, table_1e6):
    y = 5000
    base = vt["rad4"]
    ps = table_1e6.primes_in(0, y)
    restricted = custom(dict(zip(ps.tolist(), base.values[ps].astype(float).tolist())), default=1.0)
    rt = materialize(restricted, table_1e6, 10**5)
    assert H1(rt, y) == pytest.approx(H1(base, y), rel=1e-14)
    assert H2(rt, y, 6) == pytest.approx(H2(base, y, 6), rel=1e-14)


def window_max_oracle(v, y, k, lo=0.0):
    ps = np.array([p for p in v.table.primes_in(lo, y).tolist()], dtype=float)
    fp = v.values[ps.astype(np.int64)].astype(float)
    if ps.size == 0:
        return 0.0
    ts = np.linspace(k - 0.5, k + 0.5, 8001)
    return (np.cos(np.outer(ts, np.log(ps))) @ (fp / ps)).max()


def test_H2_oracle(vt):
    y, T = 10**4, 4.5
    ks = range(1, int(math.floor(T - 0.5)) + 1)
    sq = sum(math.log(2 * k) ** 4 / k ** 2 * math.exp(2 * window_max_oracle(vt["liouville"], y, k)) for k in ks)
    assert H2(vt["liouville"], y, T) == pytest.approx(math.sqrt(sq), rel=1e-5)


def test_H2prime_oracle(vt):
    y, T = 10**5, 3
    v = vt["rad1"]
    sq = sum(math.log(2 * k) ** 6 / k ** 2 * math.exp(2 * window_max_oracle(v, y, k, y_k(k)))
             for k in range(1, T + 1))
    assert H2prime(v, y, T) == pytest.approx(math.sqrt(sq), rel=1e-5)
    assert H2prime(v, y, 1) >= 0
    # k = 1 has (log 2)^6 > 0 weight, so the T = 1 value is the single k = 1 term
    one_term = math.log(2) ** 6 * math.exp(2 * window_max_oracle(v, y, 1, y_k(1)))
    assert H2prime(v, y, 1) == pytest.approx(math.sqrt(one_term), rel=1e-5)
    assert y_k(1) == pytest.approx(math.exp(math.log(2) ** 2))


def test_gs_bound(vt):
    x = 10**5
    assert halasz_gs_bound(vt["one"], x, 4) == pytest.approx(x + x / 4)
    b = halasz_gs_bound(vt["liouville"], 10**6, 10)
    assert b >= abs(cesaro_sum(vt["liouville"], 10**6))
    # D shrinks as T grows and u -> (1 + u)e^{-u} is decreasing, so the main part grows with T
    main = [halasz_gs_bound(vt["rad1"], x, T) - x / T for T in (1, 10, 100)]
    assert main[0] <= main[1] + 1e-9 <= main[2] + 2e-9
    with pytest.raises(InvalidArgumentError):
        halasz_gs_bound(vt["one"], x, 0.5)


def test_hall_tenenbaum(table_1e6, table_1e7):
    assert abs(hall_tenenbaum_residual("cos", 1.0, 1e3, 1e6, table_1e6)) < 0.3
    assert abs(hall_tenenbaum_residual("neg_cos", 0.5, 1e2, 1e7, table_1e7)) < 0.5
    assert abs(hall_tenenbaum_residual("cos", 1.0, 1000, 1000.5, table_1e6)) < 1e-15
    assert phi_mean(np.cos) == pytest.approx(0.0, abs=1e-15)
    neg = lambda u: np.where(np.cos(u) < 0, -np.cos(u), 0.0)
    assert phi_mean(neg) == pytest.approx(1 / math.pi, abs=1e-6)
    ind = lambda u: (np.abs(u / (2 * math.pi) - np.round(u / (2 * math.pi))) <= 0.1).astype(float)
    assert phi_mean(ind) == pytest.approx(0.2, abs=1e-3)
    # direct evaluation of the prime sum
    ps = table_1e6.primes_in(1e3, 1e5).astype(float)
    lhs = math.fsum((np.cos(0.5 * np.log(ps)) / ps).tolist())
    assert hall_tenenbaum_residual("cos", 0.5, 1e3, 1e5, table_1e6) == pytest.approx(lhs, abs=1e-13)
    with pytest.raises(InvalidArgumentError):
        hall_tenenbaum_residual("cos", 0.0, 10, 100, table_1e6)


def test_section6_diagnostics(vt, table_1e6):
    x = 10**6
    d = section6_diagnostics(vt["one"], x, 0.5, 8.0)
    ps = table_1e6.primes_in(x ** 0.125, x).tolist()
    assert d.sum_fp_ge_minus_delta_over_p == pytest.approx(math.fsum(1.0 / p for p in ps), abs=1e-12)
    assert d.condition_fplus1
    assert section6_diagnostics(vt["liouville"], x, 0.5, 8.0).sum_fp_ge_minus_delta_over_p == 0.0
    prm = section6_defaults(x)
    fs = construct_section6(x, prm["v"], prm["t0"], prm["theta"], table_1e6)
    dd = section6_diagnostics(materialize(fs, table_1e6, x), x, 0.5, prm["v"], prm["eps"])
    assert dd.condition_fplus1
    assert dd.sum_fp_ge_minus_delta_over_p >= math.log(3 * math.e / 2) - 0.05
    w = prm["v"] / 0.5
    assert dd.W == pytest.approx(w ** w * math.log(math.log(x)) ** 2)
    with pytest.raises(InvalidArgumentError):
        section6_diagnostics(vt["one"], x, 1.0, 8.0)


def test_report(vt):
    r = functional_report(vt["liouville"], 10**4, 5)
    d = r.to_dict()
    for key in ("x", "T", "dist_min", "M_xT", "H1", "H2", "H2prime", "hal_gs_bound", "dist_liouville",
                "grid_spacing", "T_capped"):
        assert key in d
    assert d["dist_liouville"] == 0.0
    assert r.grid_spacing == pytest.approx(0.25 / math.log(10**4))
    capped = functional_report(vt["one"], 100, 2 * T_CAP, with_H2=False)
    assert capped.T_capped and capped.notes
