"""Command-line interface.

All inputs are JSON files (or inline JSON for single values); all outputs
are JSON on stdout.  Exit codes: 0 success, 1 a certified check or
computation failed, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .bloch_norms import bloch_seminorm_bracket, family_from_dict
from .disc import DiscPoint
from .errors import (
    BlochError,
    CertificationFailure,
    DimensionMismatch,
    Infeasible,
    OutOfDisc,
    OutOfValidity,
    ParseError,
    RankDeficiency,
    Unbounded,
)
from .holo import expr_from_dict, vec_norm
from .molecules import (
    cs_lower_dual,
    cs_upper,
    molecule_from_dict,
    pairing,
    projective_upper,
)
from .summing import (
    domination_check,
    factorize,
    lp_duality_check,
    maurey_extrapolate,
    pietsch_lp,
    summing_estimate,
)
from .verify import _parse_sample, run_scenario, verify_all

_INPUT_ERRORS = (ParseError, OutOfDisc, OutOfValidity, DimensionMismatch,
                 json.JSONDecodeError, OSError, KeyError, ValueError)
_CHECK_ERRORS = (CertificationFailure, Infeasible, Unbounded, RankDeficiency)


def _limit_threads() -> None:
    cap = os.environ.get("BLOCH_MAX_THREADS")
    if not cap:
        return
    try:
        from threadpoolctl import threadpool_limits  # type: ignore

        threadpool_limits(limits=int(cap))
    except Exception:
        pass  # nothing to cap: the solvers here are single-threaded


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_func(path: str):
    return expr_from_dict(_load_json(path))


def _load_points(path: str) -> list[DiscPoint]:
    raw = _load_json(path)
    out = []
    for i, entry in enumerate(raw):
        try:
            z = complex(entry[0], entry[1])
        except (TypeError, IndexError) as exc:
            raise ParseError(f"point {i} malformed: {exc}") from exc
        if abs(z) >= 1.0:
            raise ParseError(f"point {i}: |z| = {abs(z)} is not < 1")
        out.append(DiscPoint(z))
    return out


def _parse_p(text: str) -> float:
    if text in ("inf", "Inf", "oo"):
        return math.inf
    p = float(text)
    if p < 1.0:
        raise ParseError(f"exponent {p} must be >= 1")
    return p


def _emit(args, command: str, result, csv_ok: bool = False) -> None:
    if csv_ok and getattr(args, "csv", False):
        flat = result if isinstance(result, dict) else {"value": result}
        sys.stdout.write("key,value\n")
        for k in sorted(flat):
            v = flat[k]
            if isinstance(v, (int, float, str)):
                sys.stdout.write(f"{k},{v}\n")
        return
    doc = {
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", 0),
        "result": result,
    }
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _cmd_eval(args) -> int:
    f = _load_func(args.func)
    if args.z is not None:
        zs = [complex(*json.loads(args.z))]
    else:
        zs = [p.value for p in _load_points(args.points)]
    out = []
    for z in zs:
        if abs(z) >= 1.0:
            raise ParseError(f"|z| = {abs(z)} is not < 1")
        record = {
            "z": [z.real, z.imag],
            "value": [[c.real, c.imag] for c in f.value(z)],
            "derivative": [[c.real, c.imag] for c in f.derivative(z)],
            "weighted_derivative_norm": float(
                (1.0 - abs(z) ** 2) * vec_norm(f.derivative(z))
            ),
        }
        out.append(record)
    _emit(args, "eval", out)
    return 0


def _cmd_seminorm(args) -> int:
    f = _load_func(args.func)
    bracket = bloch_seminorm_bracket(
        f, resolution=args.resolution, target_rel_width=args.target_width,
        norm=args.norm,
    )
    _emit(args, "seminorm", bracket.to_dict())
    return 0


def _cmd_summing(args) -> int:
    f = _load_func(args.func)
    sample = _parse_sample(_load_json(args.sample))
    fam = family_from_dict(_load_json(args.family))
    est = summing_estimate(f, sample, fam, _parse_p(args.p), norm=args.norm)
    _emit(args, "summing", est.to_dict(), csv_ok=True)
    return 0


def _cmd_pietsch(args) -> int:
    f = _load_func(args.func)
    points = _load_points(args.points)
    fam = family_from_dict(_load_json(args.family))
    p = _parse_p(args.p)
    duality = lp_duality_check(f, points, fam, p, norm=args.norm)
    result = {"duality": duality}
    measure = pietsch_lp(f, points, fam, p, norm=args.norm)
    if args.factorize:
        cert = factorize(f, points, measure, p, norm=args.norm, seed=args.seed)
        result["factorization"] = cert.to_dict()
    if args.check_points:
        extra = _load_points(args.check_points)
        result["domination"] = domination_check(f, extra, measure, norm=args.norm)
    _emit(args, "pietsch", result)
    return 0


def _cmd_maurey(args) -> int:
    f = _load_func(args.func)
    points = _load_points(args.points)
    fam = family_from_dict(_load_json(args.family))
    rep = maurey_extrapolate(
        f, points, fam, _parse_p(args.p), _parse_p(args.q), args.depth,
        norm=args.norm,
    )
    _emit(args, "maurey", rep)
    ok = (rep["interpolation_worst_margin"] >= -1e-12
          and rep["final_worst_margin"] >= 0.0)
    return 0 if ok else 1


def _cmd_molecule(args) -> int:
    mol = molecule_from_dict(_load_json(args.mol))
    p = _parse_p(args.p)
    result = {
        "atoms": len(mol),
        "dimension": mol.dim,
        "projective_upper": projective_upper(mol, norm=args.norm),
    }
    if args.bounds:
        upper = cs_upper(mol, p, norm=args.norm)
        lower = cs_lower_dual(mol, p, seed=args.seed, norm=args.norm)
        result.update({"upper": upper, "lower": lower, "gap": upper - lower})
        if lower > upper + 1e-9:
            _emit(args, "molecule", result, csv_ok=True)
            return 1
    _emit(args, "molecule", result, csv_ok=True)
    return 0


def _cmd_pair(args) -> int:
    mol = molecule_from_dict(_load_json(args.mol))
    f = _load_func(args.func)
    value = pairing(mol, f)
    _emit(args, "pair", {"pairing": [value.real, value.imag]})
    return 0


def _cmd_verify(args) -> int:
    if args.scenario:
        report = run_scenario(_load_json(args.scenario))
    else:
        report = verify_all(seed=args.seed)
    doc = report.to_dict()
    if args.json:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for check in doc["checks"]:
            line = f"{check['status'].upper():5s} {check['name']}"
            line += f"  margin={check['margin']:.3e} tol={check['tolerance']:.1e}"
            sys.stdout.write(line + "\n")
        sys.stdout.write(
            f"{'FAIL' if report.failed else 'PASS'}: "
            f"{len(doc['checks'])} checks in {doc['timing']:.2f}s\n"
        )
    return 1 if report.failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloch",
        description="Summing norms of Bloch functions: certified desk-scale numerics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p, family=False, points=False, sample=False, func=True):
        if func:
            p.add_argument("--func", required=True, help="HoloExpr JSON file")
        if sample:
            p.add_argument("--sample", required=True, help="weighted sample JSON file")
        if points:
            p.add_argument("--points", required=True, help="points JSON file")
        if family:
            p.add_argument("--family", required=True, help="family JSON file")
        p.add_argument("--norm", default="euclidean",
                       choices=("euclidean", "sup", "sum"))
        p.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="evaluate a function and its derivative")
    p_eval.add_argument("--func", required=True)
    p_eval.add_argument("--z", help="inline point as [re,im]")
    p_eval.add_argument("--points", help="points JSON file")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.set_defaults(run=_cmd_eval)

    p_semi = sub.add_parser("seminorm", help="certified Bloch seminorm bracket")
    p_semi.add_argument("--func", required=True)
    p_semi.add_argument("--resolution", type=int, default=64)
    p_semi.add_argument("--target-width", type=float, default=5e-4,
                        dest="target_width")
    p_semi.add_argument("--norm", default="euclidean",
                        choices=("euclidean", "sup", "sum"))
    p_semi.add_argument("--seed", type=int, default=0)
    p_semi.set_defaults(run=_cmd_seminorm)

    p_sum = sub.add_parser("summing", help="summing constant estimates")
    _common(p_sum, family=True, sample=True)
    p_sum.add_argument("--p", required=True)
    p_sum.add_argument("--csv", action="store_true")
    p_sum.set_defaults(run=_cmd_summing)

    p_pie = sub.add_parser("pietsch", help="domination LP, duality, factorization")
    _common(p_pie, family=True, points=True)
    p_pie.add_argument("--p", required=True)
    p_pie.add_argument("--factorize", action="store_true")
    p_pie.add_argument("--check-points", dest="check_points")
    p_pie.set_defaults(run=_cmd_pietsch)

    p_mau = sub.add_parser("maurey", help="exponent extrapolation pipeline")
    _common(p_mau, family=True, points=True)
    p_mau.add_argument("--p", required=True)
    p_mau.add_argument("--q", required=True)
    p_mau.add_argument("--depth", type=int, default=6)
    p_mau.set_defaults(run=_cmd_maurey)

    p_mol = sub.add_parser("molecule", help="molecule norm sandwich bounds")
    p_mol.add_argument("--mol", required=True)
    p_mol.add_argument("--p", required=True)
    p_mol.add_argument("--bounds", action="store_true")
    p_mol.add_argument("--probes", type=int, default=8)
    p_mol.add_argument("--csv", action="store_true")
    p_mol.add_argument("--norm", default="euclidean",
                       choices=("euclidean", "sup", "sum"))
    p_mol.add_argument("--seed", type=int, default=0)
    p_mol.set_defaults(run=_cmd_molecule)

    p_pair = sub.add_parser("pair", help="molecule/function duality pairing")
    p_pair.add_argument("--mol", required=True)
    p_pair.add_argument("--func", required=True)
    p_pair.add_argument("--seed", type=int, default=0)
    p_pair.set_defaults(run=_cmd_pair)

    p_ver = sub.add_parser("verify", help="run the certified check suite")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--json", action="store_true")
    p_ver.add_argument("--scenario", help="scenario JSON file")
    p_ver.set_defaults(run=_cmd_verify)

    return parser


def main(argv=None) -> int:
    _limit_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except _CHECK_ERRORS as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return 1
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except BlochError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
