import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from halasz_lab.constants import LOG_EXPONENT
from halasz_lab.errors import InvalidArgumentError, OutOfRangeError
from halasz_lab.functionals import pretentious_distance
from halasz_lab.multfun import materialize, spec
from halasz_lab.sums import delta, friable_log_sum, log_sum
from halasz_lab.verifier import (SUITES, SuiteConfig, SuiteReport, SuiteRow, builtin_corpus, main_formula_bound,
                                 run_suite, section7_sample_points)

SMALL = [spec("one"), spec("liouville"), spec("cos_sign", t0=0.5), spec("rademacher", seed=3, stream=0)]


@given(m=st.floats(-1e6, 1e6), b=st.floats(-1e6, 1e6), rel=st.sampled_from(["<=", ">="]))
@settings(max_examples=200, deadline=None)
def test_row_pass_matches_relation(m, b, rel):
    r = SuiteRow("f", 10, "q", m, b, rel)
    assert r.passed == (m <= b if rel == "<=" else m >= b)
    if b > 0 and m > 0:
        assert (r.margin() <= 1) == r.passed


def test_row_bad_relation():
    with pytest.raises(InvalidArgumentError):
        SuiteRow("f", 10, "q", 1.0, 2.0, "<")


def test_corpus():
    c = builtin_corpus()
    assert len(c) == 16
    assert sum(fs.family == "rademacher" for fs in c) == 10


@pytest.fixture(scope="module")
def reports(small_table):
    X = 10**4
    return {name: run_suite(name, SMALL, X, table=small_table)
            for name in ("lip_error", "neg_trunc", "gold", "improve_neg", "main_formula")}


def test_lip_error_reproduces(reports, small_table):
    for r in reports["lip_error"].rows:
        fs = next(f for f in SMALL if f.label() == r.family)
        vt = materialize(fs, small_table, small_table.limit)
        assert r.measured == pytest.approx(abs(delta(vt, r.x)) * math.log(r.x) ** LOG_EXPONENT, abs=1e-9)
        assert r.passed == (r.measured <= r.bound)
    rm = reports["lip_error"].extra["running_max"]
    assert all(b[1] >= a[1] for a, b in zip(rm, rm[1:]))


def test_neg_trunc_reproduces(reports, small_table):
    for r in reports["neg_trunc"].rows:
        if r.family.startswith("greedy"):
            continue
        fs = next(f for f in SMALL if f.label() == r.family)
        vt = materialize(fs, small_table, int(r.x))
        assert r.measured == pytest.approx(-log_sum(vt, r.x) * math.log(r.x) ** LOG_EXPONENT, abs=1e-9)
    assert any(r.family == "greedy_pm@10000" for r in reports["neg_trunc"].rows)


def test_gold_reproduces(reports, small_table):
    for r in reports["gold"].rows[::7]:
        fs = next(f for f in SMALL if f.label() == r.family)
        vt = materialize(fs, small_table, int(r.x))
        y = r.info["y"]
        assert r.measured == pytest.approx(abs(friable_log_sum(vt, r.x, y)), abs=1e-9)
        assert r.info["D2"] == pytest.approx(pretentious_distance(vt, 0.0, y), abs=1e-9)


def test_improve_neg_rows(reports):
    rows = reports["improve_neg"].rows
    assert {r.family for r in rows} == {"one", "liouville", "rademacher(seed=3,stream=0)"} or rows
    for r in rows:
        if not r.info["hypothesis_held"]:
            assert r.bound == math.inf and r.passed


def test_main_formula_bound_values(reports):
    for r in reports["main_formula"].rows:
        assert r.bound == pytest.approx(main_formula_bound(r.x, r.info["M"], r.info["T"], 1.0, 1.0))
        assert r.info["T"] == pytest.approx(math.log(r.x) ** 2)


def test_main_formula_one(table_1e6):
    rep = run_suite("main_formula", [spec("one")], 10**6, table=table_1e6)
    assert [r.x for r in rep.rows] == [10**4, 10**5, 10**6]
    for r in rep.rows:
        assert r.info["M"] == 0.0
        assert r.measured < 0.05
    assert rep.all_pass


def test_deterministic(small_table, reports):
    again = run_suite("lip_error", SMALL, 10**4, table=small_table)
    assert again.to_json() == reports["lip_error"].to_json()


def test_outputs(reports):
    rep = reports["lip_error"]
    d = json.loads(rep.to_json({"version": "x"}))
    assert d["header"] == {"version": "x"}
    assert d["summary"]["rows"] == len(rep.rows)
    assert d["summary"]["all_pass"] == rep.all_pass
    lines = rep.to_csv(["hello"]).splitlines()
    assert lines[0] == "# hello"
    assert lines[2] == "family,x,quantity,measured,relation,bound,pass"
    assert len(lines) == 3 + len(rep.rows)


def test_errors(small_table):
    with pytest.raises(InvalidArgumentError):
        run_suite("nope", SMALL, 10**4, table=small_table)
    with pytest.raises(OutOfRangeError):
        run_suite("lip_error", SMALL, 10**6, table=small_table)
    with pytest.raises(InvalidArgumentError):
        run_suite("lip_error", SMALL, 5, table=small_table)
    assert set(SUITES) >= {"main_formula", "lip_error", "neg_trunc", "improve_neg", "gold",
                           "section6_converse", "section7_oscillation", "hall_tenenbaum"}


def test_section6_suite(table_1e6):
    rep = run_suite("section6_converse", X=10**6, table=table_1e6,
                    config=SuiteConfig(s6_points=(10**5, 10**6)))
    assert len(rep.rows) == 6 and rep.all_pass


def test_hall_tenenbaum_suite(table_1e7):
    rep = run_suite("hall_tenenbaum", table=table_1e7)
    assert len(rep.rows) == 12
    assert rep.all_pass


def test_section7_points():
    xs = section7_sample_points(1e6, 1.0, 64)
    assert xs[0] > 1e6 and xs[-1] <= math.ceil(1e6 * math.exp(2 * math.pi))
    assert len(xs) == 64
    assert (section7_sample_points(10.0, 0.1, 20) <= 100).all()
