"""Command-line interface.

Exit codes: 0 when every check passes, 2 when a verification fails, 1 for
bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BBGKZError, InputError, InteriorRequired, NotABasis
from .exactnum import Cyclotomic
from .fans import FanData, fan_from_json, interior_simplices, lattice_points
from .gamma import (SeriesConfig, check_gkz, gamma_circ_series, gamma_series, is_interior_point,
                    rank_functional)
from .ktheory import (KcMonomial, KMonomial, chc, chi, chi_hrr, pairing_matrix, sectors)
from .pairing import (CandidatePairing, evaluate_candidate_pairing, gamma_family, inverse_euler_check,
                      pair_with_one, verify_volume_identity)

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# --- JSON output ----------------------------------------------------------

def _num(x: float) -> float:
    return float(f"{x:.15g}")


def to_jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Cyclotomic):
        return obj.to_json()
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return str(obj)


def _as_text(data, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(data, dict):
        lines = []
        for k, v in data.items():
            if isinstance(v, (dict, list)) and any(isinstance(x, (dict, list)) for x in
                                                   (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{pad}{k}:")
                lines.append(_as_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
        return "\n".join(lines)
    if isinstance(data, list):
        return "\n".join(f"{pad}-\n" + _as_text(x, indent + 1) if isinstance(x, dict)
                         else f"{pad}- {json.dumps(x)}" for x in data)
    return f"{pad}{json.dumps(data)}"


# --- input ----------------------------------------------------------------

def _resolve(name: str) -> Path | None:
    p = Path(name)
    if p.exists():
        return p
    stem = p.name if p.suffix == ".json" else p.name + ".json"
    ref = resources.files("bbgkz") / "data" / stem
    if ref.is_file():
        return Path(str(ref))
    return None


def _load_json(name: str):
    path = _resolve(name)
    if path is None:
        raise InputError(f"no such file or bundled fixture: {name}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}", str(path)) from None


def load_fan(name: str) -> tuple[FanData, dict]:
    doc = _load_json(name)
    if not isinstance(doc, dict):
        raise InputError("fan description must be a JSON object", name)
    try:
        return fan_from_json(doc), doc
    except BBGKZError as exc:
        exc.location = f"{name}:{exc.location}" if exc.location else name
        raise


def _ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError:
        raise InputError(f"{what} must be comma-separated integers, got {text!r}") from None


def _log_x(text: str, n: int) -> tuple[complex, ...]:
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) != n:
        raise InputError(f"--log-x needs {n} entries separated by ';'")
    out = []
    for p in parts:
        try:
            vals = [float(v) for v in p.split(",")]
        except ValueError:
            raise InputError(f"bad --log-x entry {p!r}") from None
        if len(vals) not in (1, 2):
            raise InputError(f"bad --log-x entry {p!r}")
        out.append(complex(vals[0], vals[1] if len(vals) == 2 else 0.0))
    return tuple(out)


def _samples(args, fan: FanData, doc: dict) -> list[tuple[complex, ...]]:
    if getattr(args, "log_x", None):
        return [_log_x(s, fan.n) for s in args.log_x]
    raw = doc.get("samples")
    if not raw:
        raise InputError("no sample points: pass --log-x or add 'samples' to the input")
    try:
        return [tuple(complex(a, b) for a, b in s) for s in raw]
    except (TypeError, ValueError):
        raise InputError("samples must be lists of [re, im] pairs", "samples") from None


# --- subcommands ----------------------------------------------------------

def cmd_sectors(args, fan, doc):
    out = []
    for s in sectors(fan):
        q = s.quotient
        out.append({
            "gamma": list(s.box.gamma),
            "sigma": list(s.box.sigma),
            "fractional_coords": {str(i): x for i, x in s.box.fractional_coords},
            "box_order": q.box_order,
            "quotient_rank": q.quotient_rank,
            "dim": s.algebra.dim,
            "algebra_basis": s.algebra.labels,
            "module_basis": s.module.labels,
            "D_classes": {f"D{i}": list(d.coeffs) for i, d in s.algebra.d_classes.items()},
            "integral": dict(zip(s.module.labels, s.integral.values)),
        })
    return {"sectors": out, "interior_simplices": [list(I) for I in interior_simplices(fan)]}, True


def cmd_chi(args, fan, doc):
    alpha = _ints(args.alpha, "--alpha") if args.alpha else (0,) * fan.n
    I = _ints(args.simplex, "--simplex")
    value = chi(fan, alpha, I)
    return {"alpha": list(alpha), "simplex": list(I), "chi": value}, True


def _parse_kbasis(text, fan):
    try:
        data = json.loads(text)
        return [KMonomial(tuple(int(a) for a in m)) for m in data]
    except (json.JSONDecodeError, TypeError, ValueError):
        raise InputError("--k-basis must be a JSON list of exponent vectors") from None


def _parse_kcbasis(text, fan):
    try:
        data = json.loads(text)
        return [KcMonomial(tuple(int(a) for a in m["alpha"]), tuple(sorted(int(i) for i in m["I"])))
                for m in data]
    except (json.JSONDecodeError, TypeError, ValueError, KeyError):
        raise InputError('--kc-basis must be a JSON list of {"alpha": [...], "I": [...]}') from None


def cmd_pairing_matrix(args, fan, doc):
    kb = _parse_kbasis(args.k_basis, fan) if args.k_basis else None
    kcb = _parse_kcbasis(args.kc_basis, fan) if args.kc_basis else None
    pm = pairing_matrix(fan, kb, kcb)
    return {"k_basis": [str(m) for m in pm.kbasis], "kc_basis": [str(m) for m in pm.kcbasis],
            "matrix": [list(r) for r in pm.matrix], "det": pm.det}, pm.det != 0


def _term_table(fan: FanData, value, compact: bool) -> list[dict]:
    """Per-term coefficients; 'scaled' multiplies a degree-k entry by (2 pi i)^k."""
    secs = sectors(fan)
    rows = []
    for t in value.terms:
        s = secs[t.sector]
        basis = s.module.basis if compact else s.algebra.basis
        labels = value.labels[t.sector]
        scaled = [complex(c) * (2j * math.pi) ** len(b) for c, b in zip(t.coeff, basis)]
        rows.append({"sector": value.boxes[t.sector], "l": list(t.l), "support": list(t.sigma),
                     "coefficients": dict(zip(labels, t.coeff)),
                     "scaled": dict(zip(labels, scaled))})
    return rows


def cmd_gamma(args, fan, doc):
    c = _ints(args.c, "--c")
    if len(c) != fan.rank:
        raise InputError(f"--c needs {fan.rank} coordinates")
    log_x = _log_x(args.log_x[0], fan.n) if args.log_x else None
    cfg = SeriesConfig(args.truncation if args.truncation is not None else 8, log_x,
                       args.tolerance if args.tolerance is not None else 1e-10)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value = gamma_circ_series(fan, c, cfg) if args.compact else gamma_series(fan, c, cfg)
    terms = _term_table(fan, value, args.compact)
    comps = [{"sector": b, "value": dict(zip(labs, comp))}
             for b, labs, comp in zip(value.boxes, value.labels, value.components)]
    return {"c": list(c), "kind": value.kind, "truncation": cfg.truncation,
            "log_x": list(log_x) if log_x else None, "components": comps, "tail": value.tail,
            "warnings": [str(w.message) for w in caught], "terms": terms}, True


def _default_cs(fan: FanData, compact: bool) -> list[tuple[int, ...]]:
    cs = [c for d in range(0, fan.rank + 1) for c in lattice_points(fan, d)]
    if compact:
        cs = [c for c in cs if is_interior_point(fan, c)]
    return cs


def cmd_verify_gkz(args, fan, doc):
    tol = args.tolerance if args.tolerance is not None else 1e-8
    K = args.truncation if args.truncation is not None else 12
    cs = [_ints(x, "--c") for x in args.c] if args.c else _default_cs(fan, args.compact)
    samples = _samples(args, fan, doc)
    reports = []
    ok = True
    for lx in samples:
        rep = check_gkz(fan, cs, SeriesConfig(K, lx), compact=args.compact)
        ok = ok and rep.passed(tol)
        reports.append({"log_x": list(lx), "shift_residual": rep.shift_residual,
                        "euler_residual": rep.euler_residual,
                        "exponent_sets_match": rep.exponent_sets_match, "checked": rep.checked})
    return {"series": "gamma_circ" if args.compact else "gamma", "c": [list(c) for c in cs],
            "truncation": K, "tolerance": tol, "reports": reports, "passed": ok}, ok


def cmd_verify_hessian_one(args, fan, doc):
    tol = args.tolerance if args.tolerance is not None else 1e-6
    K = args.truncation if args.truncation is not None else 16
    rep = pair_with_one(fan, gamma_family(fan, K, True), _samples(args, fan, doc), tol)
    return {"values": rep.values, "deviation": rep.deviation, "constant": rep.constant,
            "tolerance": tol, "passed": rep.passed}, rep.passed


def cmd_verify_volume(args, fan, doc):
    tol = args.tolerance if args.tolerance is not None else 1e-6
    K = args.truncation if args.truncation is not None else 16
    rep = verify_volume_identity(fan, _samples(args, fan, doc), K, tol)
    return {"constant": rep.constancy.constant, "expected": rep.expected,
            "deviation": rep.constancy.deviation, "error": rep.error,
            "tolerance": tol, "passed": rep.passed}, rep.passed


def cmd_verify_pairing(args, fan, doc):
    tol = args.tolerance if args.tolerance is not None else 1e-6
    K = args.truncation if args.truncation is not None else 16
    tdoc = _load_json(args.table)
    table = CandidatePairing.from_json(tdoc, fan.n)
    scale = None
    if args.scale:
        vals = [float(v) for v in args.scale.split(",")]
        scale = complex(vals[0], vals[1] if len(vals) > 1 else 0.0)
    elif isinstance(tdoc, dict) and "expected_scale" in tdoc:
        re_, im_ = tdoc["expected_scale"]
        scale = complex(re_, im_)
    samples = _samples(args, fan, doc)
    rep = evaluate_candidate_pairing(fan, table, gamma_family(fan, K, False),
                                     gamma_family(fan, K, True), samples, tol)
    inv = inverse_euler_check(fan, rep.constant, scale, tol)
    ok = rep.constancy.passed and inv.passed
    return {"deviation": rep.constancy.deviation, "constant_tensor": rep.constant,
            "monomial_tensor": inv.monomial_tensor, "inverse_pairing": inv.inverse_pairing,
            "best_fit_scale": inv.scale, "expected_scale": scale, "residual": inv.residual,
            "tolerance": tol, "passed": ok}, ok


def cmd_verify_hrr(args, fan, doc):
    pm = pairing_matrix(fan)
    rows = []
    ok = True
    for v in pm.kcbasis:
        for w in pm.kbasis:
            alpha = tuple(b - a for a, b in zip(w.alpha, v.alpha))
            lhs = chi(fan, alpha, v.I)
            rhs = chi_hrr(fan, chc(fan, KcMonomial(alpha, v.I)))
            agree = rhs == lhs
            ok = ok and agree
            rows.append({"k": str(w), "kc": str(v), "chi": lhs, "chi_hrr": rhs, "agree": agree})
    return {"pairs": rows, "passed": ok}, ok


def cmd_verify_rank(args, fan, doc):
    tol = args.tolerance if args.tolerance is not None else 1e-10
    K = args.truncation if args.truncation is not None else 12
    cs = [_ints(x, "--c") for x in args.c] if args.c else _default_cs(fan, False)
    samples = _samples(args, fan, doc)
    rows = []
    ok = True
    for lx in samples:
        cfg = SeriesConfig(K, lx)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals = rank_functional(fan, [gamma_series(fan, c, cfg) for c in cs])
        for c, v in vals.items():
            expected = 1.0 if not any(c) else 0.0
            good = abs(v - expected) < tol
            ok = ok and good
            rows.append({"c": list(c), "log_x": list(lx), "rank": v, "expected": expected, "passed": good})
    return {"values": rows, "tolerance": tol, "passed": ok}, ok


# --- parser ---------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", "-i", default=argparse.SUPPRESS,
                   help="fan JSON file or bundled fixture name (keyexample, keyexample-coarse)")
    p.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write the JSON report here")
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS)
    p.add_argument("--truncation", type=int, default=argparse.SUPPRESS,
                   help="bound K on the positive part of summation indices")
    p.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS,
                   help="report format (default json)")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                   help="accepted for compatibility; evaluation is sequential")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="bbgkz", parents=[common],
                     description="Sector algebras, K-theory pairings and Gamma series of toric cones.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sectors", parents=[common], help="dump every sector: bases and integrals")
    p.set_defaults(func=cmd_sectors)

    p = sub.add_parser("chi", parents=[common], help="Euler characteristic of R^alpha G_I")
    p.add_argument("--alpha", help="exponents, e.g. 0,0,2")
    p.add_argument("--simplex", required=True, help="interior simplex, e.g. 2 or 1,3")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("pairing-matrix", parents=[common], help="Euler pairing on monomial bases")
    p.add_argument("--k-basis", help="JSON list of exponent vectors")
    p.add_argument("--kc-basis", help='JSON list of {"alpha": [...], "I": [...]}')
    p.set_defaults(func=cmd_pairing_matrix)

    p = sub.add_parser("gamma", parents=[common], help="evaluate a Gamma or Gamma-circ series")
    p.add_argument("--c", required=True, help="lattice point, e.g. 0,0")
    p.add_argument("--compact", action="store_true", help="Gamma-circ series (c must be interior)")
    p.add_argument("--log-x", action="append", help="branch values 're,im;re,im;...'")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("verify", parents=[common], help="verification suites")
    vsub = p.add_subparsers(dest="check", required=True, parser_class=_Parser)

    v = vsub.add_parser("gkz", parents=[common], help="shift and Euler equations, term by term")
    v.add_argument("--compact", action="store_true")
    v.add_argument("--c", action="append", help="lattice point (repeatable)")
    v.add_argument("--log-x", action="append")
    v.set_defaults(func=cmd_verify_gkz)

    v = vsub.add_parser("hessian-one", parents=[common], help="constancy of the pairing with 1")
    v.add_argument("--log-x", action="append")
    v.set_defaults(func=cmd_verify_hessian_one)

    v = vsub.add_parser("volume", parents=[common], help="pairing with 1 against the volume")
    v.add_argument("--log-x", action="append")
    v.set_defaults(func=cmd_verify_volume)

    v = vsub.add_parser("pairing", parents=[common], help="candidate pairing table")
    v.add_argument("--table", default="explicit-pairing", help="pairing JSON (default: bundled table)")
    v.add_argument("--scale", help="expected scale 're,im'")
    v.add_argument("--log-x", action="append")
    v.set_defaults(func=cmd_verify_pairing)

    v = vsub.add_parser("hrr", parents=[common], help="chi against the HRR-type formula")
    v.set_defaults(func=cmd_verify_hrr)

    v = vsub.add_parser("rank", parents=[common], help="rank functional of Gamma")
    v.add_argument("--c", action="append")
    v.add_argument("--log-x", action="append")
    v.set_defaults(func=cmd_verify_rank)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("input", "output", "tolerance", "truncation", "jobs", "format"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if args.tolerance is not None and not args.tolerance > 0:
        parser.error("--tolerance must be positive")
    if args.truncation is not None and args.truncation < 0:
        parser.error("--truncation must be nonnegative")
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be positive")
    if args.input is None:
        parser.error("--input is required")
    try:
        fan, doc = load_fan(args.input)
        report, ok = args.func(args, fan, doc)
    except (InputError, InteriorRequired, NotABasis) as exc:
        print(f"bbgkz: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BBGKZError as exc:
        print(f"bbgkz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    data = to_jsonable(report)
    text = _as_text(data) if args.format == "text" else json.dumps(data, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
