"""Command-line interface: ``halasz-lab <command> [options]``.

Every report starts with a header carrying the version string and the full
parsed configuration; a timestamp line is added unless ``--deterministic`` is
given.  JSON floats are written with round-trip precision, CSV with 12
significant digits.  Exit codes: 0 success, 1 runtime error (or a failed
``verify`` suite), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import subprocess
import sys
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import constants
from .errors import LabError, InvalidArgumentError

FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    sieve_limit: int | None = None
    threads: int = 1
    seed: int | None = None
    output: str | None = None
    format: str = "json"
    functions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


@lru_cache(maxsize=1)
def version_string() -> str:
    """git-describe of the source tree, falling back to the installed version."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # noqa: BLE001 - metadata missing when run from a source checkout
        return "unknown"


# ---------------------------------------------------------------------------
# output

class Emitter:
    def __init__(self, cfg: RunConfig, deterministic: bool):
        self.cfg = cfg
        self.deterministic = deterministic

    def header(self) -> dict:
        h = {"version": version_string(), "config": self.cfg.to_dict()}
        if not self.deterministic:
            h["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return h

    def header_lines(self) -> list[str]:
        h = self.header()
        lines = [f"version {h['version']}", f"config {self.cfg.to_json()}"]
        if "timestamp" in h:
            lines.append(f"timestamp {h['timestamp']}")
        return lines

    def write(self, text: str) -> None:
        if self.cfg.output:
            Path(self.cfg.output).write_text(text)
        else:
            sys.stdout.write(text)

    def json(self, payload: dict) -> None:
        self.write(json.dumps({"header": self.header(), **payload}, indent=1, sort_keys=True,
                              default=_json_default) + "\n")

    def table(self, columns: list[str], rows: list[list]) -> None:
        """Rows as CSV (with '#' header lines) or as a JSON list of records."""
        if self.cfg.format == "json":
            self.json({"columns": columns, "rows": [dict(zip(columns, r)) for r in rows]})
            return
        buf = io.StringIO()
        for h in self.header_lines():
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])
        self.write(buf.getvalue())


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return v


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _flatten_dict(d: dict, prefix: str = "") -> list[list]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows += _flatten_dict(v, key + ".")
        elif isinstance(v, (list, tuple)) and v and not isinstance(v[0], (dict, list, tuple)):
            rows += [[f"{key}[{i}]", x] for i, x in enumerate(v)]
        else:
            rows.append([key, v if not isinstance(v, (list, tuple, dict)) else json.dumps(v, default=_json_default)])
    return rows


def _record(em: Emitter, payload: dict) -> None:
    """A single record: JSON as is, CSV as key,value pairs."""
    if em.cfg.format == "json":
        em.json(payload)
    else:
        em.table(["key", "value"], _flatten_dict(payload))


# ---------------------------------------------------------------------------
# shared helpers

def _table(args, limit: int):
    from .primes import default_cache_path, sieve
    cache = args.sieve_cache or default_cache_path(int(limit))
    cfg = getattr(args, "_cfg", None)
    if cfg is not None:
        cfg.sieve_limit = max(cfg.sieve_limit or 0, int(limit))
    return sieve(int(limit), cache=cache)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidArgumentError(f"bad number list {text!r}") from exc


def _int_x(text: str) -> int:
    v = float(text)
    if not math.isfinite(v) or v != math.floor(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


# ---------------------------------------------------------------------------
# commands

def cmd_constants(args, em):
    d = constants.as_dict()
    _record(em, {"constants": d})


def cmd_sieve(args, em):
    from .primes import chebyshev_theta
    t = _table(args, args.limit)
    _record(em, {"limit": t.limit, "pi": t.pi(t.limit), "largest_prime": int(t.primes[-1]) if len(t) else None,
                 "theta": chebyshev_theta(t, t.limit),
                 "cache": str(args.sieve_cache) if args.sieve_cache else None})


def cmd_sum(args, em):
    from .multfun import build_spec, materialize
    from .sums import default_checkpoints, shifted_floor, stream_series, sum_series
    xs = (np.array(sorted({_int_x(v) for v in args.checkpoints.split(",")}), dtype=np.int64)
          if args.checkpoints else default_checkpoints(args.xmax, args.xmin))
    if xs.size == 0 or xs.min() < 1:
        raise InvalidArgumentError("checkpoints must be positive integers")
    top, _ = shifted_floor(int(xs.max()))
    table = _table(args, max(top, 2)) if not args.stream else None
    out = []
    for text in args.function:
        if args.stream:
            fs = build_spec(text, _table(args, max(int(xs.max()), 2)) if text.startswith("section6") else None)
            out.append(stream_series(fs, xs))
        else:
            out.append(sum_series(materialize(build_spec(text, table), table, top), xs))
    cols = ["family", "x", "L_f", "M_g_w0", "Mg_tilde", "delta", "delta_scaled"]
    rows = []
    for ser in out:
        for r in ser.rows():
            rows.append([r["family"], r["x"]] + [float(np.real(r[c])) for c in cols[2:]])
    em.table(cols, rows)


def cmd_delta(args, em):
    from decimal import Decimal
    from .multfun import build_spec, materialize
    from .sums import delta, lipschitz_ratio, log_sum, mg_floor, shifted_floor
    w = Decimal(args.w) if args.w else constants.W0_DEC
    Y, tie = shifted_floor(args.x, w)
    table = _table(args, max(Y, args.x, 2))
    rows = []
    for text in args.function:
        vt = materialize(build_spec(text, table), table, max(Y, args.x))
        d = delta(vt, args.x, w)
        rows.append([vt.spec.label(), args.x, float(w), float(np.real(log_sum(vt, args.x))),
                     float(np.real(mg_floor(vt, Y))), float(np.real(d)),
                     float(np.real(d)) * math.log(args.x) ** constants.LOG_EXPONENT, bool(tie)])
        if args.lipschitz:
            rows[-1].append(lipschitz_ratio(vt, args.x, float(w)))
    cols = ["family", "x", "w", "L_f", "M_g_wx", "delta", "delta_scaled", "tie"]
    if args.lipschitz:
        cols.append("lipschitz_ratio")
    em.table(cols, rows)


def cmd_functionals(args, em):
    from .functionals import functional_report
    from .multfun import build_spec
    table = _table(args, max(int(args.x), 2))
    fs = build_spec(args.function[0], table)
    rep = functional_report(fs, args.x, args.T, args.kappa, table, with_H2=not args.no_h2)
    _record(em, {"family": fs.label(), "report": rep.to_dict()})


def cmd_zeta_check(args, em):
    from .constants import BRACKET_COEFFICIENT
    from .zeta import DEFAULT, w0_bracket_ratio, zeta
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    rows = []
    z2 = zeta(2.0)
    rows.append(["zeta(2)", 2.0, 0.0, abs(z2 - math.pi ** 2 / 6), 1e-10])
    for _ in range(args.samples):
        r = rng.uniform(1e-3, 0.1)
        a = rng.uniform(0, 2 * math.pi)
        s = 1 + r * complex(math.cos(a), math.sin(a))
        if s.real <= 0:
            continue
        rows.append(["laurent", s.real, s.imag, abs(DEFAULT.zeta(s) - DEFAULT.laurent(s)), 5 * r * r])
    for eps in (1e-3, 1e-4, 1e-5):
        rows.append(["w0_bracket_ratio", 1 + eps, 0.0, abs(w0_bracket_ratio(1 + eps) - abs(BRACKET_COEFFICIENT)), 1e-3])
    em.table(["check", "re_s", "im_s", "error", "tolerance", "pass"], [r + [r[3] <= r[4]] for r in rows])
    return 0 if all(r[3] <= r[4] for r in rows) else 1


def cmd_mc(args, em):
    from .random_model import (exact_negative_probability, mc_negative_probability, mc_shifted_mean_floor,
                               tail_distribution)
    from .sums import shifted_floor
    seed = args.seed if args.seed is not None else 0
    fn = args.functional
    if fn == "negative":
        table = _table(args, max(args.x, 2))
        res = mc_negative_probability(args.x, args.trials, seed, table, threads=args.threads)
        payload = {"mc": res.to_dict()}
        if args.exact:
            payload["exact_negative_probability"] = float(exact_negative_probability(args.x, table))
    elif fn in ("neg_euler", "split_sum"):
        table = _table(args, max(args.x, 2))
        payload = {"tail": tail_distribution(fn, args.x, args.trials, seed, _float_list(args.thresholds), table,
                                             t=args.t, k=args.k, theta=args.theta)}
    elif fn == "shifted_mean":
        Y, _ = shifted_floor(args.x)
        table = _table(args, max(Y, 2))
        payload = {"shifted_mean": asdict(mc_shifted_mean_floor(args.x, args.trials, seed, table))}
    else:  # pragma: no cover - argparse restricts choices
        raise InvalidArgumentError(fn)
    _record(em, payload)


def cmd_search(args, em):
    from .multfun import build_spec
    from .search import brute_force_delta_pm, coordinate_refine_real, greedy_delta_pm
    table = _table(args, max(args.x, 2))
    if args.method == "brute":
        res = brute_force_delta_pm(args.x, table)
    elif args.method == "greedy":
        res = greedy_delta_pm(args.x, table, args.seed_pattern, args.v)
    else:
        start = build_spec(args.function[0], table) if args.function else greedy_delta_pm(args.x, table).minimizer
        res = coordinate_refine_real(args.x, start, table, sweeps=args.sweeps)
    if args.format == "json" and not args.custom:
        ps, vs = res.prime_values()
        em.json({"x": res.x, "method": res.method, "value": res.value, "certificate": res.certificate,
                 "history": res.history, "primes": ps, "values": vs})
    else:
        head = "".join(f"# {h}\n" for h in em.header_lines())
        em.write(head + res.custom_text())


def cmd_construct(args, em):
    from .multfun import build_spec, format_custom, fourier_coefficients
    from .zeta import oscillation_main_term
    if args.kind == "section7":
        term = oscillation_main_term(args.t0, args.eps, X=args.X)
        M = term.n_max
        hh = fourier_coefficients(args.eps, 2 * M)
        payload = {"t0": args.t0, "eps": args.eps, "n_max": M, "hhat0": term.hhat0, "hhat1": term.hhat1,
                   "hhat": {str(n): float(hh[n + 2 * M]) for n in range(-3, 4)},
                   "mu": term.mu, "prime_power_correction": term.correction,
                   "gamma_factor": term.gamma_factor, "gamma_factor_literal": term.gamma_factor_literal,
                   "implied_A": term.implied_A,
                   "amplitude_at_X": float(term.amplitude(args.X)) if args.X else None}
        _record(em, payload)
        return
    x = int(args.x)
    table = _table(args, max(x, 2))
    text = f"section6:x={x}"
    if args.theta is not None:
        text += f",theta={args.theta!r}"
    if args.v is not None:
        text += f",v={args.v!r}"
    fs = build_spec(text, table)
    ps = table.primes_in(0, x)
    vals = fs.prime_values(ps, np.arange(ps.shape[0]))
    head = "".join(f"# {h}\n" for h in em.header_lines())
    em.write(head + format_custom(ps.tolist(), np.real(vals).tolist(), header=fs.label()))


def cmd_verify(args, em):
    from .multfun import build_spec
    from .verifier import SuiteConfig, builtin_corpus, run_suite
    cfg = SuiteConfig(threads=args.threads)
    if args.corpus == "builtin":
        corpus = builtin_corpus()
    else:
        lines = [ln.split("#", 1)[0].strip() for ln in Path(args.corpus).read_text().splitlines()]
        corpus = [build_spec(ln) for ln in lines if ln]
    rep = run_suite(args.suite, corpus, args.xmax, cfg)
    if args.format == "json":
        em.write(rep.to_json(em.header()) + "\n")
    else:
        em.write(rep.to_csv(em.header_lines()))
    return 0 if rep.all_pass else 1


COMMANDS = {"constants": cmd_constants, "sieve": cmd_sieve, "sum": cmd_sum, "delta": cmd_delta,
            "functionals": cmd_functionals, "zeta-check": cmd_zeta_check, "mc": cmd_mc, "search": cmd_search,
            "construct": cmd_construct, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None, help="report format")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--sieve-cache", default=None, help="SPF1 cache file for the sieve")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp header line")

    p = argparse.ArgumentParser(prog="halasz-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("constants", "print w0, gamma, gamma_1, 1-2/pi and delta_1")

    s = add("sieve", "build (and cache) the smallest-prime-factor table")
    s.add_argument("--limit", type=_int_x, required=True)

    s = add("sum", "L_f, M_f, M_g(w0 x) and Delta on a checkpoint grid")
    s.add_argument("--function", action="append", required=True)
    s.add_argument("--xmax", type=_int_x, default=10**6)
    s.add_argument("--xmin", type=float, default=10.0)
    s.add_argument("--checkpoints", default=None, help="comma-separated x values (overrides the grid)")
    s.add_argument("--stream", action="store_true", help="segmented evaluation without a value table")

    s = add("delta", "Delta(x) for one x, optionally with a different shift w")
    s.add_argument("--function", action="append", required=True)
    s.add_argument("--x", type=_int_x, required=True)
    s.add_argument("--w", default=None, help="shift (default w0 = e^(1-gamma))")
    s.add_argument("--lipschitz", action="store_true")

    s = add("functionals", "pretentious distances, M(x;T), H1, H2, H2'")
    s.add_argument("--function", action="append", required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--T", type=float, default=10.0)
    s.add_argument("--kappa", type=float, default=0.25)
    s.add_argument("--no-h2", action="store_true")

    s = add("zeta-check", "Laurent and w0-bracket checks for zeta")
    s.add_argument("--samples", type=int, default=50)

    s = add("mc", "Monte Carlo over Rademacher completely multiplicative f")
    s.add_argument("--x", type=_int_x, required=True)
    s.add_argument("--trials", type=int, default=10**4)
    s.add_argument("--functional", choices=("negative", "neg_euler", "split_sum", "shifted_mean"),
                   default="negative")
    s.add_argument("--exact", action="store_true", help="also compute the exact probability (pi(x) <= 22)")
    s.add_argument("--thresholds", default="0,1,2")
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--theta", type=float, default=0.5)

    s = add("search", "minimise L_f(x)")
    s.add_argument("--x", type=_int_x, required=True)
    s.add_argument("--method", choices=("brute", "greedy", "refine"), default="greedy")
    s.add_argument("--seed-pattern", default="all_minus", choices=("all_minus", "all_plus", "liouville_like"))
    s.add_argument("--v", type=float, default=4.0)
    s.add_argument("--function", action="append", default=None, help="start point for refine")
    s.add_argument("--sweeps", type=int, default=10)
    s.add_argument("--custom", action="store_true", help="emit the minimizer as a custom function file")

    s = add("construct", "build the section6 / section7 examples")
    s.add_argument("kind", choices=("section6", "section7"))
    s.add_argument("--x", type=_int_x, default=10**6)
    s.add_argument("--v", type=float, default=None)
    s.add_argument("--theta", type=float, default=None)
    s.add_argument("--t0", type=float, default=0.1)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--X", type=float, default=None)

    s = add("verify", "run a verification suite")
    s.add_argument("--suite", required=True)
    s.add_argument("--xmax", type=_int_x, default=10**6)
    s.add_argument("--corpus", default="builtin", help="'builtin' or a file of --function strings")
    return p


_DEFAULT_FORMAT = {"sum": "csv", "delta": "csv", "zeta-check": "csv", "verify": "json", "search": "csv"}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = _DEFAULT_FORMAT.get(args.command, "json")
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("halasz-lab: error: --threads must be >= 1", file=sys.stderr)
        return 2
    skip = {"command", "format", "output", "threads", "seed", "function", "deterministic"}
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg = RunConfig(args.command, opts, threads=args.threads, seed=args.seed, output=args.output,
                    format=args.format, functions=list(getattr(args, "function", None) or []))
    args._cfg = cfg
    em = Emitter(cfg, args.deterministic)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            code = COMMANDS[args.command](args, em)
    except LabError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": args.command}),
              file=sys.stderr)
        return 1
    except (OSError, MemoryError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": args.command}), file=sys.stderr)
        return 1
    return int(code or 0)


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
