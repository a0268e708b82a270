import math
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halasz_lab.constants import LOG_EXPONENT, W0
from halasz_lab.errors import InvalidArgumentError, OutOfRangeError
from halasz_lab.multfun import custom, materialize, spec
from halasz_lab.sums import (cesaro_sum, default_checkpoints, delta, divisor_convolution, friable_log_sum,
                             lipschitz_ratio, log_sum, mg_floor, mg_floor_direct, shifted_floor, split_identity_check,
                             stream_series, sum_series)


@pytest.fixture(scope="module")
def tabs(table_1e6):
    fams = {"one": spec("one"), "liouville": spec("liouville"), "character4": spec("character4"),
            "cos_sign": spec("cos_sign", t0=0.5), "rademacher": spec("rademacher", seed=1, stream=0),
            "section7": spec("section7", t0=0.3, eps=0.05)}
    return {k: materialize(v, table_1e6) for k, v in fams.items()}


def test_log_sum_examples(tabs):
    assert log_sum(tabs["one"], 3) == pytest.approx(11 / 6, abs=1e-15)
    assert log_sum(tabs["liouville"], 10) == pytest.approx(0.326587, abs=1e-6)
    lam10 = sum(Fraction(v, n) for n, v in zip(range(1, 11), [1, -1, -1, 1, -1, 1, -1, -1, 1, 1]))
    assert log_sum(tabs["liouville"], 10) == pytest.approx(float(lam10), abs=1e-15)
    assert abs(log_sum(tabs["character4"], 10**6) - math.pi / 4) < 1e-5
    assert cesaro_sum(tabs["liouville"], 10) == 0
    with pytest.raises(OutOfRangeError):
        log_sum(tabs["one"], 10**8)


def test_mg_floor_examples(tabs):
    assert mg_floor(tabs["liouville"], 10) == 3
    assert mg_floor(tabs["one"], 4) == 8
    assert mg_floor(tabs["liouville"], 10**6) == 1000
    assert mg_floor(tabs["one"], 10.9) == mg_floor(tabs["one"], 10)


@pytest.mark.parametrize("name", ["one", "liouville", "character4", "cos_sign", "rademacher", "section7"])
def test_mg_floor_vs_divisor_sieve(tabs, name):
    vt = tabs[name]
    g = divisor_convolution(vt, 10**5)
    G = np.cumsum(g)
    rng = np.random.default_rng(17)
    for y in rng.integers(1, 10**5 + 1, 100).tolist():
        a, b = float(mg_floor(vt, y)), float(G[y])
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))
        assert float(mg_floor_direct(vt, y)) == pytest.approx(a, rel=1e-12, abs=1e-9)


def test_g_nonnegative(tabs):
    for name in ("one", "liouville", "cos_sign", "rademacher", "section7"):
        g = divisor_convolution(tabs[name], 20_000)
        assert g[1:].min() >= -1e-12


@given(st.integers(1, 1_500_000))
@settings(max_examples=300, deadline=None)
def test_liouville_square_identity(tabs, y):
    assert mg_floor(tabs["liouville"], y) == math.isqrt(y)


def test_shifted_floor():
    Y, tie = shifted_floor(10**4)
    assert Y == 15262 and not tie
    assert shifted_floor(10, Decimal(1))[0] == 10
    assert shifted_floor(10, Decimal(1))[1]  # exact integer flagged as a tie


def test_delta_examples(tabs):
    assert abs(delta(tabs["one"], 10**4)) < 0.05
    lam = tabs["liouville"]
    second = 123 / (W0 * 10**4)
    assert math.isqrt(15262) == 123
    assert second == pytest.approx(123 / 15262.05, rel=1e-6)
    assert delta(lam, 10**4) == pytest.approx(log_sum(lam, 10**4) - second, abs=1e-15)
    assert abs(delta(tabs["character4"], 10**4)) < 0.02
    with pytest.raises(OutOfRangeError) as ei:
        delta(tabs["one"], 1_100_000)
    assert "w0" in str(ei.value)


def test_delta_one_decays(tabs):
    vt = tabs["one"]
    for x in list(range(100, 2000, 37)) + default_checkpoints(10**6, 100).tolist():
        assert abs(delta(vt, x)) <= 5 / math.sqrt(x)


def test_friable(tabs):
    one = tabs["one"]
    assert friable_log_sum(one, 10, 2) == pytest.approx(1.875, abs=1e-15)
    smooth = [2 ** a * 3 ** b for a in range(7) for b in range(5) if 2 ** a * 3 ** b <= 100]
    assert friable_log_sum(one, 100, 3) == pytest.approx(math.fsum(1 / n for n in smooth), abs=1e-14)
    for name in ("liouville", "cos_sign"):
        assert friable_log_sum(tabs[name], 5000, 5000) == log_sum(tabs[name], 5000)
        assert friable_log_sum(tabs[name], 5000, 10**6) == log_sum(tabs[name], 5000)
    with pytest.raises(InvalidArgumentError):
        friable_log_sum(one, 100, 0.5)


@pytest.mark.parametrize("name", ["one", "liouville", "rademacher"])
@pytest.mark.parametrize("theta", [0.2, 0.5, 0.8])
def test_split_identity(tabs, name, theta):
    for x in (10**3, 10**4):
        assert split_identity_check(tabs[name], x, theta) <= 1e-9 * (1 + abs(log_sum(tabs[name], x)))


def test_split_identity_theta_half_matches_direct_formula(tabs):
    # for theta <= 1/2 the large-prime sum is sum f(p)/p L_f(x/p) directly
    vt, x, theta = tabs["rademacher"], 10**4, 0.3
    ps = vt.table.primes_in(x ** (1 - theta), x)
    large = math.fsum(float(vt.values[p]) / p * log_sum(vt, x // p) for p in ps.tolist())
    assert log_sum(vt, x) == pytest.approx(large + friable_log_sum(vt, x, x ** (1 - theta)), abs=1e-12)
    assert split_identity_check(tabs["one"], 100, 0.5) < 1e-12


def test_lipschitz(tabs):
    assert lipschitz_ratio(tabs["liouville"], 10**6, 1) == 0
    assert lipschitz_ratio(tabs["liouville"], 10**6, 100) < 1
    assert lipschitz_ratio(tabs["one"], 10**6, 10) <= 2
    with pytest.raises(InvalidArgumentError):
        lipschitz_ratio(tabs["one"], 100, 0.5)


def test_checkpoints():
    c = default_checkpoints(10**6)
    assert c[-1] == 10**6 and c[0] >= 10 and np.all(np.diff(c) > 0)
    r = np.exp(np.diff(np.log(c.astype(float))))
    assert np.allclose(r[c[1:] > 1000], 10 ** 0.125, rtol=1e-3)


def test_series_and_csv(tabs):
    ser = sum_series(tabs["liouville"], [10, 100, 1000])
    assert ser.L[0] == pytest.approx(0.326587, abs=1e-6)
    assert np.allclose(ser.delta_scaled, ser.delta * np.log([10, 100, 1000]) ** LOG_EXPONENT)
    assert np.all(ser.Mg_tilde >= 0)
    text = ser.to_csv(["hello"])
    lines = text.strip().splitlines()
    assert lines[0] == "# hello"
    assert lines[1] == "family,x,L_f,M_g_w0,Mg_tilde,delta,delta_scaled"
    assert len(lines) == 5
    assert lines[2].split(",")[2] == f"{ser.L[0]:.12g}"


@pytest.mark.parametrize("fs", [spec("liouville"), spec("section7", t0=0.3, eps=0.05), spec("cos_sign", t0=1.0)],
                         ids=lambda f: f.label())
def test_stream_matches_table(table_1e6, fs):
    xs = default_checkpoints(6 * 10**5, 1000)
    a = sum_series(materialize(fs, table_1e6), xs)
    b = stream_series(fs, xs, segment_size=1 << 16)
    assert np.allclose(a.L, b.L, atol=1e-12)
    assert np.allclose(a.Mg_w0, b.Mg_w0, rtol=1e-12, atol=1e-8)
    assert np.allclose(a.delta, b.delta, atol=1e-11)


def test_stream_refuses_indexed():
    with pytest.raises(InvalidArgumentError):
        stream_series(spec("rademacher", seed=1, stream=0), [100])


def test_complex_custom_sums(small_table):
    fs = custom({p: complex(0, 1) for p in small_table.primes_in(0, 100).tolist()}, complex_values=True)
    vt = materialize(fs, small_table, 100)
    # f(n) = i^Omega(n)
    assert vt.values[4] == pytest.approx(-1)
    L = log_sum(vt, 10)
    oracle = sum(1j ** sum(e for _, e in small_table.factorize(n)) / n for n in range(2, 11)) + 1
    assert L == pytest.approx(oracle, abs=1e-14)
