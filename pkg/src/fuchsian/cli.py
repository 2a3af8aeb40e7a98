"""Command-line interface.

Subcommands: solve, verify, ring, convert, expand.  Numeric I/O is decimal
strings (hex floats opt-in via --hex for bit-exact round trips).  Exit codes:
0 success, 2 numerical failure (no convergence / failed certificate or
identity), 3 invalid input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import complex_to_json, precision_context, to_mpc
from .cache import ResultCache
from .convert import (
    AccessoryData,
    accessory_from_json,
    accessory_to_json,
    closed_forms_four,
    constraint_defect,
    m_infinity,
    rho_to_m,
    transport_rho,
)
from .convert import ConvertError
from .expansion import ExpandConfig, ExpansionError, fit_coefficients, sample_line, verify_relations
from .geometry import DegeneratePuncture, GeometryError, UnsupportedTransform, normalize_domain
from .modular import (
    IdentityViolation,
    ModularError,
    RankDeficient,
    rational_generators,
    ring_basis,
    verify_uniformizing_identities,
)
from .series import series_to_json
from .solver import (
    NoConvergence,
    ResidualCheckFailed,
    SolverConfig,
    SolverError,
    result_from_json,
    result_to_json,
    solve_rho,
)

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_USAGE = 3


def _env_default(name, fallback, cast=str):
    raw = os.environ.get(f"FUCHSIAN_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        return fallback


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fuchsian",
        description="Uniformization of four-punctured spheres: accessory parameter, "
        "group generators, q-expansions, and local-expansion experiments.",
    )
    ap.add_argument("--prec", type=int, default=_env_default("PREC", 512, int),
                    help="working precision in bits (default 512)")
    ap.add_argument("--order", type=int, default=_env_default("ORDER", 150, int),
                    help="series truncation order N (default 150)")
    ap.add_argument("--tol", type=int, default=_env_default("TOL", None, int),
                    help="certified tolerance exponent: tolerance = 2^-TOL (default prec/2)")
    ap.add_argument("--tau", type=str, default=_env_default("TAU", None),
                    help="override tau* probe, e.g. '0.1+0.3i'")
    ap.add_argument("--cache", type=str, default=_env_default("CACHE", None),
                    help="path to a JSONL result cache")
    ap.add_argument("--format", choices=("json", "csv"), default=_env_default("FORMAT", "json"),
                    help="output format (default json)")
    ap.add_argument("--anchor", type=str, default=_env_default("ANCHOR", "0.5"),
                    help="continuation anchor puncture (default 0.5)")
    ap.add_argument("--hex", action="store_true", help="serialize numbers as hex floats too")

    sub = ap.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="compute the accessory value for a puncture w")
    p_solve.add_argument("w", type=str, help="puncture location, e.g. 0.5 or 0.5+0.001i")
    p_solve.add_argument("--output", type=str, default=None)

    p_verify = sub.add_parser("verify", help="re-verify the identities of a stored result")
    p_verify.add_argument("result_file", type=str)

    p_ring = sub.add_parser("ring", help="ring bases and bracket reports for a result")
    p_ring.add_argument("--k", type=int, default=1, help="weight 2k basis (default k=1)")
    p_ring.add_argument("--result", type=str, default=None, help="stored result JSON")
    p_ring.add_argument("--w", type=str, default=None, help="solve this puncture instead")

    p_conv = sub.add_parser("convert", help="modular accessory value -> classical parameters")
    p_conv.add_argument("--alpha", type=str, default=None)
    p_conv.add_argument("--rho", type=str, default=None)
    p_conv.add_argument("--json", dest="json_file", type=str, default=None,
                        help="AccessoryData JSON file (punctures + rho_vec)")

    p_exp = sub.add_parser("expand", help="sample the accessory function near 1/2 and fit")
    p_exp.add_argument("--degree", type=int, default=2)
    p_exp.add_argument("--slopes", type=str, default="1,2,3,4,6,8")
    p_exp.add_argument("--xmax", type=float, default=0.016)
    p_exp.add_argument("--xcount", type=int, default=8)
    p_exp.add_argument("--sample-prec", type=int, default=192)
    p_exp.add_argument("--sample-order", type=int, default=200)
    p_exp.add_argument("--guard-degree", type=int, default=4)
    p_exp.add_argument("--csv", type=str, default=None, help="write samples as CSV here")
    p_exp.add_argument("--output", type=str, default=None)
    return ap


def _emit(payload: dict, args, path=None):
    if args.format == "csv":
        lines = []

        def flat(prefix, obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    flat(f"{prefix}{k}." if prefix else f"{k}.", v) if isinstance(v, (dict, list)) else lines.append(
                        f"{prefix}{k},{v}"
                    )
            elif isinstance(obj, list):
                for i, v in enumerate(obj):
                    flat(f"{prefix}{i}.", v) if isinstance(v, (dict, list)) else lines.append(f"{prefix}{i},{v}")

        flat("", payload)
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2, default=str) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solver_config(args) -> SolverConfig:
    tau = None
    if args.tau:
        tau = args.tau
    return SolverConfig(
        precision_bits=args.prec,
        N=args.order,
        tol_exponent=args.tol,
        tau_star=tau,
    )


def _solve_with_anchor(w_str: str, args):
    prec = args.prec
    with precision_context(prec):
        w = to_mpc(w_str, prec)
    alpha, record = normalize_domain(w, prec)
    config = _solver_config(args)
    cache = ResultCache(args.cache) if args.cache else None
    key = {
        "w": w_str,
        "prec": prec,
        "N": args.order,
        "tol": config.tolerance_bits,
    }
    if cache:
        hit = cache.get("solve", key)
        if hit is not None:
            return result_from_json(hit), record, True
    try:
        res = solve_rho(alpha, config)
    except NoConvergence:
        # walk from the anchor puncture toward w, warm-starting each step
        with precision_context(prec):
            w_anchor = to_mpc(args.anchor, prec)
            steps = 8
            seed = None
            for k in range(1, steps + 1):
                wk = w_anchor + (record.normalized_w - w_anchor) * k / steps
                alpha_k, _ = normalize_domain(wk, prec)
                res = solve_rho(alpha_k, config, seed=seed)
                seed = res.rho_F
    if cache:
        cache.put("solve", key, result_to_json(res, hex_floats=True))
    return res, record, False


def cmd_solve(args) -> int:
    res, record, cached = _solve_with_anchor(args.w, args)
    rho_at_w = transport_rho(record, res.rho_F, args.prec)
    payload = result_to_json(res, hex_floats=args.hex)
    payload["w"] = complex_to_json(record.original_w, args.hex)
    payload["normalization_moves"] = list(record.moves)
    payload["rho_F_at_w"] = complex_to_json(rho_at_w, args.hex)
    payload["cache_hit"] = cached
    _emit(payload, args, getattr(args, "output", None))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        with open(args.result_file, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        res = result_from_json(obj)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: unreadable result file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"checks": {}, "passed": True}
    try:
        checks = verify_uniformizing_identities(res)
        report["checks"]["uniformizing"] = {
            k: {"relative": str(v["relative"]), "worst_index": v["worst_index"]} for k, v in checks.items()
        }
        _, _, gen_report = rational_generators(res)
        report["checks"]["rational_generators"] = {
            k: {"relative": str(v["relative"])} for k, v in gen_report.items()
        }
        for k in (1, 2, 3):
            basis = ring_basis(res, k)
            report["checks"][f"ring_basis_k{k}"] = {"rank": basis.rank, "expected": 2 * k + 1}
    except (IdentityViolation, RankDeficient) as exc:
        report["passed"] = False
        report["failure"] = str(exc)
        _emit(report, args)
        return EXIT_NUMERICAL
    _emit(report, args)
    return EXIT_OK


def cmd_ring(args) -> int:
    if args.result:
        with open(args.result, "r", encoding="utf-8") as fh:
            res = result_from_json(json.load(fh))
    elif args.w:
        res, _, _ = _solve_with_anchor(args.w, args)
    else:
        print("error: ring needs --result or --w", file=sys.stderr)
        return EXIT_USAGE
    basis = ring_basis(res, args.k)
    g, g1, report = rational_generators(res)
    payload = {
        "k": args.k,
        "dimension": 2 * args.k + 1,
        "rank": basis.rank,
        "elements": [
            {"label": e.label, "weight": str(e.weight), "series": series_to_json(e.series.truncate(24), args.hex)}
            for e in basis.elements
        ],
        "generators": {
            "g": series_to_json(g.series.truncate(24), args.hex),
            "g1": series_to_json(g1.series.truncate(24), args.hex),
        },
        "bracket_report": {k: {"relative": str(v["relative"])} for k, v in report.items()},
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_convert(args) -> int:
    prec = args.prec
    if args.json_file:
        with open(args.json_file, "r", encoding="utf-8") as fh:
            data = accessory_from_json(json.load(fh))
    elif args.alpha is not None and args.rho is not None:
        from .convert import four_puncture_data

        data = four_puncture_data(to_mpc(args.alpha, prec), to_mpc(args.rho, prec), prec)
    else:
        print("error: convert needs --alpha and --rho, or --json", file=sys.stderr)
        return EXIT_USAGE
    m = rho_to_m(data)
    d0, d1 = constraint_defect(data, m)
    payload = accessory_to_json(data, m_vec=m, hex_floats=args.hex)
    payload["m_infinity"] = complex_to_json(m_infinity(data, m), args.hex)
    payload["constraint_defects"] = [str(d0), str(d1)]
    if args.alpha is not None and args.rho is not None and len(data.punctures) == 3:
        closed = closed_forms_four(args.alpha, args.rho, prec)
        payload["closed_forms"] = [complex_to_json(x, args.hex) for x in closed]
    _emit(payload, args)
    return EXIT_OK


def cmd_expand(args) -> int:
    slopes = tuple(int(s) for s in args.slopes.split(",") if s)
    mags = tuple((k + 1) * args.xmax / args.xcount for k in range(args.xcount))
    config = ExpandConfig(
        slopes=slopes,
        x_magnitudes=mags,
        degree=args.degree,
        guard_degree=args.guard_degree,
        sample_precision=args.sample_prec,
        sample_N=args.sample_order,
    )
    cache = ResultCache(args.cache) if args.cache else None
    samples = [sample_line(n, config=config, cache=cache) for n in config.slopes]
    fit = fit_coefficients(samples, config.degree, config.guard_degree)
    relations = verify_relations(fit) if config.degree >= 2 else {"relations": []}
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("x,slope,rho_re,rho_im\n")
            for s in samples:
                for x, v in zip(s.xs, s.values):
                    fh.write(f"{float(x):.18g},{s.slope},{v.real:.40g},{v.imag:.40g}\n")
    payload = {
        "degree": fit.degree,
        "coefficients": {f"a_{j}{k}": format(v, ".30g") for (j, k), v in sorted(fit.a.items())},
        "internal_coefficients": {
            f"a_{j}{k}": format(v, ".30g") for (j, k), v in sorted(fit.a_internal.items())
        },
        "residual_norm": format(fit.residual_norm, ".6g"),
        "max_imaginary_part": format(fit.max_imag, ".6g"),
        "condition": format(fit.condition, ".6g"),
        "dropped": [d for s in samples for d in s.dropped],
        "relations": [
            {"name": r["name"], "normalized": format(r["normalized"], ".6g")}
            for r in relations["relations"]
        ],
    }
    _emit(payload, args, getattr(args, "output", None))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "ring":
            return cmd_ring(args)
        if args.command == "convert":
            return cmd_convert(args)
        if args.command == "expand":
            return cmd_expand(args)
        return EXIT_USAGE
    except (DegeneratePuncture, UnsupportedTransform, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoConvergence, ResidualCheckFailed, IdentityViolation, RankDeficient,
            GeometryError, ModularError, SolverError, ExpansionError, ConvertError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
