import csv
import io
import json
import math

import pytest

from halasz_lab.cli import RunConfig, dispatch
from halasz_lab.sums import default_checkpoints


@pytest.fixture(autouse=True)
def cache_dir(tmp_path_factory, monkeypatch):
    monkeypatch.setenv("HALASZ_LAB_CACHE", str(tmp_path_factory.getbasetemp() / "sieve-cache"))


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    c = json.loads(out)["constants"]
    assert c["hall_montgomery_delta1"] == pytest.approx(-0.656999, abs=1e-6)
    assert c["delta_scaling_exponent"] == pytest.approx(0.36338, abs=1e-5)
    assert c["w0"] == pytest.approx(math.exp(1 - 0.5772156649015329))
    assert repr(c["w0"]) in out  # round-trip precision in JSON


def test_sum_csv(capsys):
    code, out, _ = run(capsys, "sum", "--function", "liouville", "--xmax", "1000", "--format", "csv")
    assert code == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    assert rows[0][:2] == ["family", "x"]
    assert len(rows) - 1 == len(default_checkpoints(1000))
    assert [int(float(r[1])) for r in rows[1:]] == default_checkpoints(1000).tolist()


def test_exit_codes(capsys):
    assert run(capsys, "delta", "--x", "10", "--bogus")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2
    assert run(capsys, "mc", "--x", "10", "--threads", "0")[0] == 2
    code, _, err = run(capsys, "delta", "--function", "nosuch", "--x", "100")
    assert code == 1
    msg = json.loads(err.strip().splitlines()[-1])
    assert msg["command"] == "delta" and msg["error"]
    code, _, err = run(capsys, "search", "--x", "1000", "--method", "brute")
    assert code == 1 and "exceeds" in json.loads(err.strip().splitlines()[-1])["message"]
    assert run(capsys, "delta", "--function", "custom:path=/nonexistent/file.txt", "--x", "100")[0] == 1


def test_deterministic_bytes(capsys, tmp_path):
    argv = ["delta", "--function", "cos_sign:t0=0.5", "--x", "5000", "--deterministic", "--format", "json"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b and "timestamp" not in a
    files = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for f in files:
        assert dispatch(argv + ["-o", str(tmp_path / "r.json")]) == 0
        (tmp_path / "r.json").rename(f)
    assert files[0].read_bytes() == files[1].read_bytes()
    assert json.loads(files[0].read_text())["rows"] == json.loads(a)["rows"]


def test_timestamp_without_deterministic(capsys):
    out = run(capsys, "constants")[1]
    assert "timestamp" in json.loads(out)["header"]


def test_run_config_round_trip():
    cfg = RunConfig("sum", {"xmax": 1000, "stream": False}, 1526, 2, 7, None, "csv", ["liouville"])
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg


def test_header_echo_round_trips(capsys):
    out = run(capsys, "delta", "--function", "liouville", "--x", "1000", "--format", "json",
              "--deterministic")[1]
    hdr = json.loads(out)["header"]["config"]
    cfg = RunConfig.from_dict(hdr)
    assert cfg.command == "delta" and cfg.functions == ["liouville"]
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg


def test_search_custom_output(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "--x", "10", "--method", "brute", "--deterministic")
    assert code == 0
    path = tmp_path / "min.txt"
    path.write_text(out)
    # the minimizer only covers p <= 10; Delta(10) also reads primes up to w0*10
    code, out2, _ = run(capsys, "delta", "--function", f"custom:path={path},default=1", "--x", "10",
                        "--format", "json", "--deterministic")
    assert code == 0
    assert json.loads(out2)["rows"][0]["L_f"] == pytest.approx(0.3265873015873016, abs=1e-14)
    assert run(capsys, "delta", "--function", f"custom:path={path}", "--x", "10")[0] == 1


def test_mc_exact(capsys):
    code, out, _ = run(capsys, "mc", "--x", "20", "--trials", "1000", "--seed", "7", "--exact", "--deterministic")
    assert code == 0
    d = json.loads(out)
    assert d["mc"]["negatives"] == 0 and d["exact_negative_probability"] == 0.0


def test_verify_exit(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lip_error", "--xmax", "10000", "--deterministic")
    assert code == 0
    assert json.loads(out)["summary"]["all_pass"] is True


def test_zeta_check(capsys):
    code, out, _ = run(capsys, "zeta-check", "--samples", "5", "--deterministic")
    assert code == 0 and "pass" in out


def test_construct_section6(capsys):
    with pytest.warns(UserWarning, match="clamped"):
        code, out, _ = run(capsys, "construct", "section6", "--x", "10000", "--deterministic")
    assert code == 0
