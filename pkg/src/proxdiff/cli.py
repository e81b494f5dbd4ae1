"""Command-line front end: JSON in, JSON out.

Every subcommand prints one JSON document on stdout.  Exit status is 0 on
success, 2 for malformed input or a violated precondition (with an error
document naming the offending argument) and 1 for internal failures.
Numbers are emitted as decimal strings.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import diffop, oracle, proxorder, series
from ._numbers import (
    ProxDiffError,
    format_real,
    mp,
    parse_scalar,
    set_precision,
    to_mp,
)


class InputError(Exception):
    def __init__(self, argument: str, message: str, line: int | None = None,
                 column: int | None = None):
        super().__init__(message)
        self.argument, self.line, self.column = argument, line, column


def _load_json(text: str, argument: str):
    """Parse an inline JSON document or read it from a file path."""
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        source = text
    else:
        path = Path(text[1:] if text.startswith("@") else text)
        try:
            source = path.read_text()
        except OSError as exc:
            raise InputError(argument, f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise InputError(argument, exc.msg, exc.lineno, exc.colno) from exc


def _number(text: str):
    return parse_scalar(text)


def _order(args, name="order"):
    obj = _load_json(getattr(args, name), f"--{name.replace('_', '-')}")
    return proxorder.order_from_json(obj)


def _norm(args, name="order"):
    return proxorder.normalize(_order(args, name))


def _series(args):
    return series.EntireSeries.from_json(_load_json(args.series, "--series"))


def _symbol(args):
    return diffop.OperatorSymbol.from_json(_load_json(args.symbol, "--symbol"))


def _verdict_bool(v: str):
    return {series.MEMBER: True, series.NOT_MEMBER: False}.get(v)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval_order(args):
    value, deriv = proxorder.eval_order(_order(args), to_mp(_number(args.r)))
    return {"r": args.r, "rho": format_real(value), "rho_prime": format_real(deriv)}


def cmd_normalize(args):
    n = _norm(args)
    return {"order": proxorder.order_to_json(n.base), "r1": format_real(n.r1),
            "discrepancy": format_real(n.discrepancy),
            "slope_at_r1": format_real(n.dlnw_u(n.u1))}


def cmd_growth_scale(args):
    return proxorder.growth_scale(_norm(args), args.qmax).to_json()


def cmd_estimate_type(args):
    return series.estimate_type(_series(args), _norm(args), args.window_frac).to_json()


def cmd_classify_series(args):
    f, order = _series(args), _norm(args)
    scale = proxorder.growth_scale(order, max(f.q_max, 1))
    if args.mode == "normal":
        out = series.classify_normal_type(f, order, scale, args.window_frac)
    else:
        if args.sigma is None:
            raise InputError("--sigma", f"--sigma is required for mode {args.mode}")
        fn = series.classify_minimal_type if args.mode == "minimal" else series.classify_coeff_bound
        out = fn(f, order, _number(args.sigma), scale, args.window_frac)
    return out.to_json()


def cmd_classify_op(args):
    sym = _symbol(args)
    src = _norm(args, "src_order")
    dst = _norm(args, "dst_order") if args.dst_order else src
    probes = [_number(p) for p in args.probes.split(",")] if args.probes else None
    scale = proxorder.growth_scale(src, max(sym.a_max, 1))
    return diffop.classify_symbol(sym, src, dst, args.mode, probes, scale,
                                  args.window_frac).to_json()


def cmd_hom_to_op(args):
    return diffop.hom_to_symbol(
        diffop.HomImageTable.from_json(_load_json(args.images, "--images"))).to_json()


def cmd_op_to_hom(args):
    return diffop.symbol_to_hom(_symbol(args)).to_json()


def cmd_op_apply(args):
    result, tail = diffop.apply_operator(_symbol(args), _series(args), _norm(args),
                                         _number(args.sigma_out))
    return {"result": result.to_json(), "tail_bound": format_real(tail)}


def cmd_verify_lemmas(args):
    order = _norm(args)
    reports = [
        proxorder.verify_subadditivity(order, _number(args.kappa)),
        proxorder.verify_phi_derivative(order, _number(args.delta)),
        proxorder.verify_y_bound(order, _number(args.sigma), _number(args.sigma_prime)),
    ]
    scale = proxorder.growth_scale(order, args.qmax)
    reports.append(series.monomial_norm_check(order, _number(args.sigma),
                                              _number(args.sigma_prime), scale, args.qmax))
    f = series.exp_series(1, 2 * args.qmax)
    reports.append(series.derivative_norm_check(f, order, _number(args.sigma),
                                                _number(args.deriv_kappa), scale, args.qmax))
    rows = [{"lemma": r.lemma_id, "passed": r.passed,
             "max_violation": proxorder._json_num(r.max_violation)} for r in reports]
    width = max(len(r["lemma"]) for r in rows)
    for row in rows:
        print(f"{row['lemma']:<{width}}  {'PASS' if row['passed'] else 'FAIL'}", file=sys.stderr)
    return {"table": rows, "reports": [r.to_json() for r in reports],
            "all_passed": all(r.passed for r in reports)}


def cmd_example_schrodinger(args):
    t, eps = _number(args.t), _number(args.eps)
    j_max = args.jmax
    sym = diffop.schrodinger_symbol(t, j_max)
    varrho = proxorder.normalize(proxorder.ProximateOrder(args.family, 2, _number(args.k)))
    const2 = proxorder.normalize(proxorder.ProximateOrder("constant", 2))
    a = diffop.classify_symbol(sym, varrho, varrho, diffop.NORMAL_TYPE, [eps])
    b = diffop.classify_symbol(sym, const2, const2, diffop.NORMAL_TYPE, [eps])
    c = diffop.classify_symbol(sym, const2, const2, diffop.MINIMAL_TYPE)
    out = {"in_D_varrho": _verdict_bool(a.verdict), "in_D_2": _verdict_bool(b.verdict),
           "in_D_2_minimal": _verdict_bool(c.verdict)}
    if args.verbose:
        ratio = diffop.example_ratio(varrho, t, eps, j_max)
        out["details"] = {"D_varrho": a.to_json(), "D_2": b.to_json(), "D_2_minimal": c.to_json(),
                          "first_j_R_below_1e-8": ratio.first_j_below,
                          "t_over_phi_t_squared_decreasing": ratio.limit_decreasing}
    return out


def _series_from_poly(p: oracle.RationalPoly, q_max=None):
    return series.EntireSeries(p.n, max(p.degree(), 0) if q_max is None else q_max, p.coeffs)


def _symbol_from_table(n, table, a_max):
    return diffop.OperatorSymbol(n, a_max, {a: _series_from_poly(p) for a, p in table.items()})


def cmd_oracle_suite(args):
    seeds = oracle.CORPUS_SEEDS[: args.seeds]
    round_trip = agreement = 0
    unit_order = proxorder.normalize(proxorder.ProximateOrder("constant", 1))
    for seed in seeds:
        n, table = oracle.random_symbol(seed)
        sym = _symbol_from_table(n, table, 6)
        hom = diffop.symbol_to_hom(sym)
        expected = oracle.images_from_symbol(n, table, 6)
        same_images = all(hom.images[b] == _series_from_poly(p) for b, p in expected.items())
        if same_images and diffop.hom_to_symbol(hom) == sym:
            round_trip += 1
        f = oracle.random_poly(random.Random(seed), n, 6, 4)
        mine, _ = diffop.apply_operator(sym, _series_from_poly(f, 6), unit_order, 1)
        if mine == _series_from_poly(oracle.exact_apply(table, f)):
            agreement += 1
    closed = []
    for q, rho, sigma in ((1, 1, 1), (0, 1, 1), (4, 2, 1), (10, 2, "0.5"), (25, 1, 2)):
        order = proxorder.normalize(proxorder.ProximateOrder("constant", rho))
        num = mp.exp(series.ln_monomial_norm(order, q, _number(str(sigma))))
        ref = oracle.closed_form_monomial_norm(q, rho, _number(str(sigma)))
        closed.append(abs(num / ref - 1) <= to_mp(args.tol))
    out = {"seeds": len(seeds), "round_trip_passed": round_trip, "agreement_passed": agreement,
           "closed_form_monomial_norms_passed": all(closed)}
    if args.manifest:
        manifest = _load_json(args.manifest, "--manifest")
        mismatched = [s for s in seeds if manifest["digests"].get(str(s)) != oracle.corpus_digest(s)]
        out["manifest_mismatches"] = mismatched
    out["all_passed"] = (round_trip == agreement == len(seeds) and all(closed)
                         and not out.get("manifest_mismatches"))
    return out


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxdiff", description=__doc__.splitlines()[0],
                                allow_abbrev=False)
    p.add_argument("--prec-bits", type=int, default=None,
                   help="working precision in bits (default: PO_PREC_BITS or 256)")
    p.add_argument("--tol", default="1e-12", help="comparison tolerance for checks")
    p.add_argument("--threads", default="auto",
                   help="accepted for compatibility; computation is single-threaded")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *opts):
        sp = sub.add_parser(name, allow_abbrev=False)
        sp.set_defaults(func=fn)
        for o in opts:
            o(sp)
        return sp

    def order(sp):
        sp.add_argument("--order", required=True, help="order JSON (inline or file path)")

    def series_arg(sp):
        sp.add_argument("--series", required=True, help="series JSON (inline or file path)")

    def window(sp):
        sp.add_argument("--window-frac", type=float, default=series.DEFAULT_WINDOW_FRAC)

    def symbol(sp):
        sp.add_argument("--symbol", required=True, help="symbol JSON (inline or file path)")

    add("eval-order", cmd_eval_order, order, lambda sp: sp.add_argument("--r", required=True))
    add("normalize", cmd_normalize, order)
    add("growth-scale", cmd_growth_scale, order,
        lambda sp: sp.add_argument("--qmax", type=int, required=True))
    add("estimate-type", cmd_estimate_type, order, series_arg, window)
    add("classify-series", cmd_classify_series, order, series_arg, window,
        lambda sp: sp.add_argument("--sigma"),
        lambda sp: sp.add_argument("--mode", choices=("minimal", "coeff", "normal"),
                                   default="minimal"))
    add("classify-op", cmd_classify_op, symbol, window,
        lambda sp: sp.add_argument("--src-order", required=True),
        lambda sp: sp.add_argument("--dst-order"),
        lambda sp: sp.add_argument("--mode", choices=(diffop.NORMAL_TYPE, diffop.MINIMAL_TYPE),
                                   required=True),
        lambda sp: sp.add_argument("--probes", help="comma-separated lambda (or sigma) values"))
    add("hom-to-op", cmd_hom_to_op, lambda sp: sp.add_argument("--images", required=True))
    add("op-to-hom", cmd_op_to_hom, symbol)
    add("op-apply", cmd_op_apply, symbol, series_arg, order,
        lambda sp: sp.add_argument("--sigma-out", default="1"))
    add("verify-lemmas", cmd_verify_lemmas, order,
        lambda sp: sp.add_argument("--kappa", default="4.1"),
        lambda sp: sp.add_argument("--delta", default="0.05"),
        lambda sp: sp.add_argument("--sigma", default="1"),
        lambda sp: sp.add_argument("--sigma-prime", default="0.9"),
        lambda sp: sp.add_argument("--deriv-kappa", default="2.5"),
        lambda sp: sp.add_argument("--qmax", type=int, default=60))
    add("example-schrodinger", cmd_example_schrodinger,
        lambda sp: sp.add_argument("--t", default="1"),
        lambda sp: sp.add_argument("--k", default="-1"),
        lambda sp: sp.add_argument("--eps", default="1"),
        lambda sp: sp.add_argument("--jmax", type=int, default=400),
        lambda sp: sp.add_argument("--family", choices=("loglog", "logloglog"), default="loglog"),
        lambda sp: sp.add_argument("--verbose", action="store_true"))
    add("oracle-suite", cmd_oracle_suite,
        lambda sp: sp.add_argument("--seeds", type=int, default=len(oracle.CORPUS_SEEDS)),
        lambda sp: sp.add_argument("--manifest", help="corpus manifest JSON to compare digests"))
    return p


def _emit(obj, stream=None):
    (stream or sys.stdout).write(json.dumps(obj, indent=2) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.prec_bits is not None:
            set_precision(args.prec_bits)
        _emit(args.func(args))
        return 0
    except InputError as exc:
        loc = {"argument": exc.argument}
        if exc.line is not None:
            loc.update(line=exc.line, column=exc.column)
        _emit({"error": {"type": "MalformedInput", "message": str(exc), "location": loc}})
        return 2
    except (ProxDiffError, NotImplementedError) as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc),
                         "location": {"command": args.command}}})
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort report for the exit-code contract
        _emit({"error": {"type": type(exc).__name__, "message": str(exc),
                         "location": {"command": args.command}}})
        return 1


if __name__ == "__main__":
    sys.exit(main())
