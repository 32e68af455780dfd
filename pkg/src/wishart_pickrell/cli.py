"""Command-line front end.

Every command reads one JSON config (complex entries as ``[re, im]`` pairs)
and writes a report.  Exit codes: 0 pass, 1 verification or statistical
failure, 2 config error, 3 dimension error, 4 I/O error.

Example config::

    {
      "params": {"gamma1": 1.0, "gamma2": 0.0, "lambdas": [0.5]},
      "matrices": {"A": [[[1, 0]]], "B": [[[1, 0]]], "S": [[[0.6, 0]]]},
      "m_values": [1, 2, 3, 4],
      "sample": {"dim": 6, "seed": 7, "count": 100000}
    }
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._backend import BACKEND
from .linalg import DimensionError, as_hermitian, support_size
from .measure import MAX_SEED, PickrellParams, SampleConfig, ergodic_cf, mc_cf, sample_truncated
from .polymorphism import (
    EXACT_TOL,
    Z_MAX,
    Contraction,
    VerificationReport,
    compose_check,
    coupled_sample,
    joint_cf_contraction,
    mc_joint_cf,
    mc_nu_s_cf,
    nu_s_cf,
    nu_s_pair_sample,
    verify_corner,
    verify_dilation,
    verify_eventual_constancy,
    verify_gram,
    verify_marginals,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIM, EXIT_IO = 0, 1, 2, 3, 4

CHECKS = ("limit", "dilation", "marginals", "gram", "corner", "compose")
TARGETS = ("cf", "joint", "nu_s")
SAMPLE_MODES = ("measure", "coupled", "nu_s")

DEFAULT_TOL = {
    "limit": EXACT_TOL,
    "dilation": 1e-12,
    "marginals": 1e-12,
    "gram": EXACT_TOL,
    "corner": EXACT_TOL,
    "compose": None,
}


class ConfigError(Exception):
    pass


class OutputError(Exception):
    pass


# -- JSON with 17 significant digits ---------------------------------------

def _encode(obj) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


# -- config parsing ---------------------------------------------------------

class Config:
    def __init__(self, path: Path):
        self.path = path
        try:
            self.text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
        try:
            self.data = json.loads(self.text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(self.data, dict):
            raise ConfigError(f"{path}:1: top level must be an object")

    def _line(self, keys) -> int | None:
        try:
            node = yaml.compose(self.text)
        except yaml.YAMLError:
            node = None
        for key in keys:
            if isinstance(node, yaml.MappingNode):
                node = next((v for k, v in node.value if k.value == key), None)
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
            else:
                node = None
            if node is None:
                break
        if node is not None:
            return node.start_mark.line + 1
        # fall back to the first mention of the outermost named key
        names = [k for k in keys if isinstance(k, str)]
        for name in reversed(names):
            for i, line in enumerate(self.text.splitlines(), 1):
                if f'"{name}"' in line:
                    return i
        return None

    def error(self, keys, msg) -> ConfigError:
        where = "".join(f"[{k}]" if isinstance(k, int) else f".{k}" for k in keys).lstrip(".")
        line = self._line(keys)
        loc = f"{self.path}:{line}" if line else str(self.path)
        return ConfigError(f"{loc}: {where}: {msg}")

    def get(self, *keys, default=None):
        node = self.data
        for k in keys:
            if not isinstance(node, dict) or k not in node:
                return default
            node = node[k]
        return node

    def number(self, *keys, default=None, integer=False):
        val = self.get(*keys, default=default)
        if val is None:
            return None
        ok = isinstance(val, int) if integer else isinstance(val, (int, float))
        if isinstance(val, bool) or not ok:
            kind = "an integer" if integer else "a number"
            raise self.error(keys, f"expected {kind}, got {json.dumps(val)}")
        return val

    def params(self) -> PickrellParams:
        lambdas = self.get("params", "lambdas", default=[])
        if not isinstance(lambdas, list):
            raise self.error(("params", "lambdas"), "expected a list of numbers")
        for i, x in enumerate(lambdas):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise self.error(("params", "lambdas", i), f"expected a number, got {json.dumps(x)}")
        try:
            return PickrellParams(
                self.number("params", "gamma1", default=0.0),
                self.number("params", "gamma2", default=0.0),
                tuple(lambdas),
            )
        except ValueError as exc:
            raise self.error(("params",), str(exc)) from exc

    def matrix(self, name: str, required: bool = True):
        keys = ("matrices", name)
        rows = self.get(*keys)
        if rows is None:
            if required:
                raise self.error(("matrices",), f"matrix {name!r} is required")
            return None
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise self.error(keys, "expected a non-empty list of rows")
        n = len(rows)
        M = np.zeros((n, n), dtype=np.complex128)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise self.error(keys + (i,), f"row has {len(row)} entries, expected {n} (matrix must be square)")
            for j, entry in enumerate(row):
                M[i, j] = self._entry(keys + (i, j), entry)
        return M

    def _entry(self, keys, entry) -> complex:
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            return complex(entry)
        if (isinstance(entry, list) and len(entry) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
            return complex(entry[0], entry[1])
        raise self.error(keys, f"malformed matrix entry {json.dumps(entry)}, expected [re, im]")

    def hermitian(self, name, required=True):
        M = self.matrix(name, required)
        if M is None:
            return None
        if np.max(np.abs(M - M.conj().T)) > 1e-12:
            raise self.error(("matrices", name), "matrix is not Hermitian")
        return as_hermitian(M)

    def contraction(self, name):
        M = self.matrix(name)
        try:
            return Contraction(M)
        except ValueError as exc:
            raise self.error(("matrices", name), str(exc)) from exc

    def int_list(self, key, default):
        val = self.get(key, default=default)
        if not isinstance(val, list):
            raise self.error((key,), "expected a list of integers")
        for i, x in enumerate(val):
            if isinstance(x, bool) or not isinstance(x, int) or x < 0:
                raise self.error((key, i), f"expected a nonnegative integer, got {json.dumps(x)}")
        return val


def _sample_config(cfg: Config, args, dim_default: int | None) -> SampleConfig:
    seed = args.seed if args.seed is not None else cfg.number("sample", "seed", integer=True)
    if seed is None:
        raise cfg.error(("sample",), "a seed is required (sample.seed or --seed)")
    count = args.count if args.count is not None else cfg.number("sample", "count", default=10000, integer=True)
    dim = cfg.number("sample", "dim", default=dim_default, integer=True)
    if dim is None:
        raise cfg.error(("sample",), "sample.dim is required")
    if not 0 <= seed <= MAX_SEED:
        raise cfg.error(("sample", "seed"), "seed must be an unsigned 64-bit integer")
    if count < 1:
        raise cfg.error(("sample", "count"), "count must be positive")
    if dim < 1:
        raise cfg.error(("sample", "dim"), "dim must be positive")
    return SampleConfig(dim=dim, seed=seed, count=count)


def _tolerance(cfg: Config, args, default):
    if args.tol is not None:
        return args.tol
    return cfg.number("tolerance", default=default)


def _format(cfg: Config, args) -> str:
    fmt = args.format or cfg.get("output_format", default="json")
    if fmt not in ("json", "csv"):
        raise cfg.error(("output_format",), f"unknown output format {fmt!r}")
    return fmt


def _overhang(S, *mats) -> int:
    k = max((support_size(M) for M in mats if M is not None), default=0)
    return max(0, k - S.shape[0])


def _header(command, params=None, seed=None, tolerance=None) -> dict:
    out = {"command": command, "version": __version__, "backend": BACKEND}
    if params is not None:
        out["params"] = {"gamma1": params.gamma1, "gamma2": params.gamma2, "lambdas": list(params.lambdas)}
    out["seed"] = seed
    out["tolerance"] = tolerance
    return out


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _value_payload(command, params, z: complex, fmt, extra=None) -> str:
    body = _header(command, params)
    body.update(extra or {})
    body.update({"re": z.real, "im": z.imag, "modulus": abs(z)})
    if fmt == "csv":
        keys = [k for k in body if k != "params"]
        return _csv(keys, [[body[k] for k in keys]])
    return dumps(body)


def _report_payload(report: VerificationReport, params, fmt) -> str:
    body = _header("verify", params, report.seed, report.tolerance)
    body.update(report.to_dict())
    if fmt == "csv":
        rows = []
        for i, c, r, d in report.values:
            c, r = complex(c), complex(r)
            rows.append([report.label, i, c.real, c.imag, r.real, r.imag, d,
                         report.tolerance, report.passed, report.seed, __version__])
        return _csv(["label", "index", "computed_re", "computed_im", "reference_re",
                     "reference_im", "deviation", "tolerance", "passed", "seed", "version"], rows)
    return dumps(body)


# -- commands ---------------------------------------------------------------

def cmd_eval_cf(cfg: Config, args):
    params = cfg.params()
    A = cfg.hermitian(args.matrix)
    return EXIT_OK, _value_payload("eval-cf", params, ergodic_cf(params, A), _format(cfg, args),
                                   {"matrix": args.matrix})


def cmd_joint_cf(cfg: Config, args):
    params = cfg.params()
    S = cfg.contraction("S")
    A, B = cfg.hermitian("A"), cfg.hermitian("B")
    value = joint_cf_contraction(params, S, A, B)
    return EXIT_OK, _value_payload("joint-cf", params, value, _format(cfg, args))


def cmd_verify(cfg: Config, args):
    check = args.check
    tol = _tolerance(cfg, args, DEFAULT_TOL[check])
    params = cfg.params() if check in ("limit", "marginals", "corner", "compose") else None
    if check == "gram":
        report = verify_gram(cfg.matrix("S"), tol)
    elif check == "dilation":
        report = verify_dilation(cfg.matrix("S"), cfg.int_list("m_values", []), tol)
    else:
        S = cfg.contraction("S").matrix
        A = cfg.hermitian("A")
        B = cfg.hermitian("B", required=False)
        if B is None:
            B = np.zeros_like(A)
        if check == "limit":
            beta = _overhang(S, A, B)
            m_values = cfg.int_list("m_values", list(range(beta, beta + 4)))
            report = verify_eventual_constancy(params, S, A, B, m_values, tol)
        elif check == "marginals":
            report = verify_marginals(params, S, A, B, tol)
        elif check == "corner":
            report = verify_corner(params, S, A, B, tol)
        else:
            T = cfg.contraction("T").matrix
            alpha = max(S.shape[0], T.shape[0])
            beta = max(0, max(support_size(A), support_size(B)) - alpha)
            m = cfg.number("m", default=beta, integer=True)
            m2 = cfg.number("m2", default=beta, integer=True)
            sample = _sample_config(cfg, args, max(3 * alpha + 2 * m + m2, A.shape[0], B.shape[0]))
            report = compose_check(params, S, T, A, B, sample, m, m2, tol)
    code = EXIT_OK if report.passed else EXIT_FAIL
    return code, _report_payload(report, params, _format(cfg, args))


def cmd_mc_compare(cfg: Config, args):
    target = args.target
    z_max = args.tol if args.tol is not None else cfg.number("z_max", default=Z_MAX)
    A = cfg.hermitian("A")
    params = None
    extra = {"target": target}
    if target == "cf":
        params = cfg.params()
        sample = _sample_config(cfg, args, A.shape[0])
        est, se = mc_cf(params, A, sample)
        closed = ergodic_cf(params, A)
    else:
        S = cfg.contraction("S").matrix
        B = cfg.hermitian("B", required=False)
        if B is None:
            B = np.zeros_like(A)
        if target == "joint":
            params = cfg.params()
            m = cfg.number("m", default=_overhang(S, A, B), integer=True)
            sample = _sample_config(cfg, args, max(2 * S.shape[0] + 2 * m, A.shape[0], B.shape[0]))
            est, se = mc_joint_cf(params, S, m, A, B, sample)
            closed = joint_cf_contraction(params, S, A, B)
            extra["m"] = m
        else:
            lam = cfg.get("lambda")
            if lam is None:
                lambdas = cfg.get("params", "lambdas", default=[])
                lam = lambdas[0] if lambdas else 1.0
            lam = float(lam)
            sample = _sample_config(cfg, args, max(S.shape[0], A.shape[0], B.shape[0]))
            est, se = mc_nu_s_cf(S, lam, A, B, sample)
            closed = nu_s_cf(S, lam, A, B)
            extra["lambda"] = lam
    diff = abs(est - closed)
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if diff == 0 else math.inf
    body = _header("mc-compare", params, sample.seed, z_max)
    body.update(extra)
    body.update({
        "count": sample.count,
        "dim": sample.dim,
        "estimate": est,
        "closed_form": closed,
        "stderr": se,
        "z": z,
        "passed": z <= z_max,
    })
    fmt = _format(cfg, args)
    if fmt == "csv":
        flat = {k: v for k, v in body.items() if k != "params"}
        for key in ("estimate", "closed_form"):
            c = flat.pop(key)
            flat[f"{key}_re"], flat[f"{key}_im"] = c.real, c.imag
        payload = _csv(list(flat), [list(flat.values())])
    else:
        payload = dumps(body)
    return (EXIT_OK if z <= z_max else EXIT_FAIL), payload


def _matrix_columns(prefix, n):
    cols = []
    for i in range(n):
        for j in range(n):
            cols += [f"{prefix}re_{i}_{j}", f"{prefix}im_{i}_{j}"]
    return cols


def _flatten(X):
    N, n, _ = X.shape
    out = np.empty((N, 2 * n * n))
    out[:, 0::2] = X.real.reshape(N, -1)
    out[:, 1::2] = X.imag.reshape(N, -1)
    return out


def cmd_sample(cfg: Config, args):
    if args.out is None:
        raise ConfigError("sample: --out PATH is required")
    mode = cfg.get("sample", "mode", default="measure")
    if mode not in SAMPLE_MODES:
        raise cfg.error(("sample", "mode"), f"unknown mode {mode!r}, expected one of {SAMPLE_MODES}")
    params = None
    Y = None
    extra = {"mode": mode}
    if mode == "measure":
        params = cfg.params()
        sample = _sample_config(cfg, args, None)
        X = sample_truncated(params, sample)
    elif mode == "coupled":
        params = cfg.params()
        S = cfg.contraction("S").matrix
        m = cfg.number("m", default=0, integer=True)
        sample = _sample_config(cfg, args, 2 * S.shape[0] + 2 * m)
        X, Y = coupled_sample(params, S, m, sample)
        extra["m"] = m
    else:
        S = cfg.contraction("S").matrix
        lam = float(cfg.number("lambda", default=1.0))
        sample = _sample_config(cfg, args, S.shape[0])
        X, Y = nu_s_pair_sample(S, lam, sample)
        extra["lambda"] = lam
    fmt = _format(cfg, args)
    n = sample.dim
    if fmt == "csv":
        if Y is None:
            header, data = _matrix_columns("", n), _flatten(X)
        else:
            header = _matrix_columns("x_", n) + _matrix_columns("y_", n)
            data = np.hstack([_flatten(X), _flatten(Y)])
        lines = [",".join(header)]
        lines += [",".join(format(v, ".17g") for v in row) for row in data.tolist()]
        text = "\n".join(lines) + "\n"
    else:
        body = _header("sample", params, sample.seed)
        body.update(extra)
        body.update({"dim": n, "count": sample.count})
        pairs = lambda M: np.stack([M.real, M.imag], axis=-1)
        if Y is None:
            body["samples"] = pairs(X)
        else:
            body["pairs"] = [{"X": x, "Y": y} for x, y in zip(pairs(X), pairs(Y))]
        text = dumps(body)
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"{args.out}: cannot write output: {exc.strerror or exc}") from exc
    summary = _header("sample", params, sample.seed)
    summary.update(extra)
    summary.update({"dim": n, "count": sample.count, "out": str(args.out), "format": fmt})
    return EXIT_OK, dumps(summary)


COMMANDS = {
    "eval-cf": cmd_eval_cf,
    "joint-cf": cmd_joint_cf,
    "verify": cmd_verify,
    "mc-compare": cmd_mc_compare,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=None, help="output path (required for sample)")
    common.add_argument("--seed", type=int, default=None, help="override sample.seed")
    common.add_argument("--count", type=int, default=None, help="override sample.count")
    common.add_argument("--tol", type=float, default=None, help="override the tolerance / z threshold")
    common.add_argument("--format", choices=["json", "csv"], default=None)

    parser = argparse.ArgumentParser(prog="wishart-pickrell", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-cf", parents=[common], help="closed-form characteristic function")
    p.add_argument("--matrix", default="A", help="name of the matrix in the config (default A)")
    sub.add_parser("joint-cf", parents=[common], help="closed-form joint characteristic function F(S|A,B)")
    sub.add_parser("sample", parents=[common], help="write samples or coupled pairs to --out")
    p = sub.add_parser("mc-compare", parents=[common], help="Monte Carlo estimate vs closed form")
    p.add_argument("target", choices=TARGETS)
    p = sub.add_parser("verify", parents=[common], help="run a verification check")
    p.add_argument("check", choices=CHECKS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = Config(args.config)
        code, payload = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is not None and args.command != "sample":
        try:
            Path(args.out).write_text(payload, encoding="utf-8")
        except OSError as exc:
            print(f"error: {args.out}: cannot write output: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(payload)
    return code


if __name__ == "__main__":
    sys.exit(main())
