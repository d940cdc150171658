"""Command-line front end: ``pow``, ``analyze``, ``verify`` and ``formula``.

Exit codes: 0 ok, 1 verification failed, 2 parse error, 3 singular matrix or
zero eigenvalue, 4 root-finder non-convergence, 5 relation invalid.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .annihilator import (
    AnnihilatorPolynomial,
    cluster_roots,
    find_roots,
    minimal_polynomial,
    characteristic_polynomial,
    validate_relation,
)
from .basis import build_basis, eval_basis, invert_vandermonde, vandermonde_matrix
from .errors import (
    AmbiguousRank,
    CFlowError,
    MatrixParseError,
    NonConvergence,
    RelationInvalid,
    SingularMatrix,
    ZeroEigenvalue,
)
from .flow import (
    CompanionFlow,
    build_flow,
    evaluate_flow,
    negative_powers,
)
from .matfile import (
    format_complex,
    matrix_document,
    parse_complex,
    parse_relation,
    read_matrix,
)
from .numeric import DEFAULT_TOL, ToleranceConfig, max_norm, power_int

RESIDUAL_LIMIT = 1e-8  # shared pass/fail threshold for all verify categories


def _add_common(sub):
    sub.add_argument("--tol-rank", type=float, default=None, help="rank decision tolerance")
    sub.add_argument("--tol-root", type=float, default=None, help="root-finder step tolerance")
    sub.add_argument("--tol-cluster", type=float, default=None, help="root clustering radius")
    sub.add_argument("--tol-residual", type=float, default=None, help="matrix residual tolerance")
    sub.add_argument("--tol-cond-warn", type=float, default=None, help="condition warning level")
    sub.add_argument(
        "--branch-offset",
        action="append",
        default=[],
        metavar="IDX:K",
        help="add 2*pi*i*K to the branch log of cluster IDX (repeatable)",
    )
    sub.add_argument("--json", action="store_true", help="machine-readable output")


def _tolerances(args) -> ToleranceConfig:
    kw = {}
    for field, attr in [
        ("rank_tol", "tol_rank"),
        ("root_tol", "tol_root"),
        ("cluster_tol", "tol_cluster"),
        ("residual_tol", "tol_residual"),
        ("cond_warn", "tol_cond_warn"),
    ]:
        value = getattr(args, attr)
        if value is not None:
            kw[field] = value
    return ToleranceConfig(**kw) if kw else DEFAULT_TOL


def _branch_offsets(args) -> dict:
    offsets = {}
    for item in args.branch_offset:
        try:
            idx, k = item.split(":")
            offsets[int(idx)] = int(k)
        except ValueError as exc:
            raise MatrixParseError(f"bad --branch-offset {item!r}, expected IDX:K") from exc
    return offsets


def _discover_relation(a, tol: ToleranceConfig) -> AnnihilatorPolynomial:
    """Minimal polynomial, falling back to the characteristic polynomial
    when the rank decision is too close to call."""
    try:
        return minimal_polynomial(a, tol)
    except AmbiguousRank:
        return characteristic_polynomial(a)


def _relation_for(args, a, tol: ToleranceConfig) -> AnnihilatorPolynomial:
    if getattr(args, "relation", None):
        return parse_relation(args.relation)
    return _discover_relation(a, tol)


def _term_text(lam: complex, j: int) -> str:
    base = f"({format_complex(lam)})"
    if j == 0:
        return f"{base}^z"
    return f"g_{j}(z)*{base}^(z-{j})"


def _spectrum_rows(spectrum):
    return [
        {
            "index": i,
            "lambda": [c.value.real, c.value.imag],
            "multiplicity": c.multiplicity,
            "log": [c.log.real, c.log.imag],
        }
        for i, c in enumerate(spectrum.clusters)
    ]


def _print_report(report: dict, as_json: bool, out) -> None:
    if as_json:
        json.dump(report, out)
        out.write("\n")
        return
    p = report["degree"]
    c_desc = report["relation"]
    print(f"relation degree: {p}", file=out)
    print("relation coefficients (c_{p-1},...,c_0): " + ", ".join(c_desc), file=out)
    if "relation_residual" in report:
        print(f"relation residual: {report['relation_residual']:.3e}", file=out)
    print("spectrum (descending |lambda|, ascending arg):", file=out)
    for row in report["spectrum"]:
        lam = complex(*row["lambda"])
        log = complex(*row["log"])
        print(
            f"  [{row['index']}] lambda={format_complex(lam)} "
            f"multiplicity={row['multiplicity']} log={format_complex(log)}",
            file=out,
        )
    print("basis ordering:", file=out)
    for k, text in enumerate(report["basis"]):
        print(f"  f_{k + 1}(z) = {text}", file=out)
    print("coefficient table e_ij (mu_i(z) = sum_j e_ij * f_j(z)):", file=out)
    for i, row in enumerate(report["coefficients"]):
        rendered = ", ".join(format_complex(complex(re, im)) for re, im in row)
        print(f"  mu_{i + 1}: [{rendered}]", file=out)
    print(f"vandermonde condition estimate: {report['condition_estimate']:.3e}", file=out)
    if "mu_terms" in report:
        print("coefficient functions:", file=out)
        for i, terms in enumerate(report["mu_terms"]):
            print(f"  mu_{i + 1}(z) = " + " + ".join(terms), file=out)
    if "mu_at" in report:
        values = ", ".join(format_complex(complex(re, im)) for re, im in report["mu_at"]["values"])
        print(f"mu({report['mu_at']['z']}) = ({values})", file=out)


def _representation_report(q, rep, skip_zero=False, residual=None) -> dict:
    basis = rep.basis
    spectrum = basis.spectrum
    report = {
        "degree": q.degree,
        "relation": [format_complex(c) for c in q.coeffs[::-1]],
        "spectrum": _spectrum_rows(spectrum),
        "basis": [
            _term_text(spectrum.clusters[ci].value, j) for ci, j in basis.terms
        ],
        "coefficients": [
            [[v.real, v.imag] for v in row] for row in np.asarray(rep.coeffs.e)
        ],
        "condition_estimate": rep.coeffs.condition_estimate,
    }
    if residual is not None:
        report["relation_residual"] = residual
    terms = []
    for i in range(q.degree):
        row = []
        for k, (ci, j) in enumerate(basis.terms):
            e = complex(rep.coeffs.e[i, k])
            if skip_zero and e == 0:
                continue
            row.append(f"({format_complex(e)})*" + _term_text(spectrum.clusters[ci].value, j))
        terms.append(row or ["0"])
    report["mu_terms"] = terms
    return report


def cmd_pow(args) -> int:
    tol = _tolerances(args)
    a = read_matrix(args.matrix)
    z = parse_complex(args.z)
    q = _relation_for(args, a, tol)
    offsets = _branch_offsets(args)
    rep = build_flow(a, q, tol, offsets)
    result = evaluate_flow(rep, z)
    if args.method in ("companion", "both"):
        from .flow import evaluate_companion_flow

        comp = evaluate_companion_flow(a, q, z, tol, offsets)
        if args.method == "companion":
            result = comp
        else:
            gap = max_norm(result - comp) / max(1.0, max_norm(result))
            if gap > RESIDUAL_LIMIT:
                print(f"warning: methods disagree by {gap:.3e}", file=sys.stderr)
    cond = rep.evaluation_condition(z)
    if cond > tol.cond_warn:
        print(f"warning: evaluation condition estimate {cond:.3e}", file=sys.stderr)
    json.dump(matrix_document(result), sys.stdout)
    sys.stdout.write("\n")
    return 0


def cmd_analyze(args) -> int:
    tol = _tolerances(args)
    a = read_matrix(args.matrix)
    q = _relation_for(args, a, tol)
    offsets = _branch_offsets(args)
    rep = build_flow(a, q, tol, offsets)
    residual = validate_relation(a, q, tol)
    report = _representation_report(q, rep, residual=residual)
    del report["mu_terms"]
    _print_report(report, args.json, sys.stdout)
    return 0


def cmd_formula(args) -> int:
    tol = _tolerances(args)
    offsets = _branch_offsets(args)
    if args.relation:
        q = parse_relation(args.relation)
    elif args.matrix:
        a = read_matrix(args.matrix)
        q = _discover_relation(a, tol)
    else:
        raise MatrixParseError("formula needs --relation or a matrix file")
    if abs(q.coeffs[0]) == 0.0:
        raise ZeroEigenvalue("constant coefficient is zero; zero is a root of the relation")
    roots = find_roots(q, tol)
    spectrum = cluster_roots(roots, tol, polynomial=q)
    if offsets:
        spectrum = spectrum.with_branch_offsets(offsets)
    basis = build_basis(spectrum)
    table = invert_vandermonde(vandermonde_matrix(basis).T, tol)

    class _Rep:
        pass

    rep = _Rep()
    rep.basis = basis
    rep.coeffs = table
    report = _representation_report(q, rep, skip_zero=args.skip_zero)
    if args.at is not None:
        z = parse_complex(args.at)
        mu = table.e @ eval_basis(basis, z)
        report["mu_at"] = {"z": args.at, "values": [[v.real, v.imag] for v in mu]}
    _print_report(report, args.json, sys.stdout)
    return 0


def cmd_verify(args) -> int:
    tol = _tolerances(args)
    a = read_matrix(args.matrix)
    q = _relation_for(args, a, tol)
    offsets = _branch_offsets(args)
    p = q.degree

    rep = build_flow(a, q, tol, offsets)
    direct = lambda z: evaluate_flow(rep, z)

    cflow_mu = CompanionFlow(q, tol, offsets)
    negs = negative_powers(a, p, tol)

    def companion(z):
        return sum(m * m_pow for m, m_pow in zip(cflow_mu.mu(z), negs))

    rng = np.random.default_rng(args.seed)
    radius = args.z_radius
    pairs = [
        (
            complex(*(radius * rng.uniform(-1, 1, 2) / np.sqrt(2))),
            complex(*(radius * rng.uniform(-1, 1, 2) / np.sqrt(2))),
        )
        for _ in range(args.samples)
    ]

    evaluators = {"vandermonde": direct, "companion": companion}
    active = ["vandermonde", "companion"] if args.method == "both" else [args.method]

    results = {}
    scale = max(1.0, max_norm(a), max_norm(negs[-1]))
    axiom_max = 0.0
    for name in active:
        f = evaluators[name]
        axiom_max = max(axiom_max, max_norm(f(0.0) - np.eye(a.shape[0])) / scale)
        axiom_max = max(axiom_max, max_norm(f(1.0) - a) / scale)
        for z, w in pairs:
            fz, fw = f(z), f(w)
            denom = max(1.0, max_norm(fz) * max_norm(fw))
            axiom_max = max(axiom_max, max_norm(fz @ fw - f(z + w)) / denom)
    results["flow_axioms"] = axiom_max

    integer_max = 0.0
    for k in range(-3, 6):
        target = power_int(a, k, tol)
        denom = max(1.0, max_norm(target))
        for name in active:
            integer_max = max(integer_max, max_norm(evaluators[name](k) - target) / denom)
    results["integer_consistency"] = integer_max

    if args.method == "both":
        cross_max = 0.0
        for z, _ in pairs:
            dv, cv = direct(z), companion(z)
            cross_max = max(cross_max, max_norm(dv - cv) / max(1.0, max_norm(dv)))
        results["cross_agreement"] = cross_max

    ok = all(v <= RESIDUAL_LIMIT for v in results.values())
    if args.json:
        json.dump({"residuals": results, "pass": ok}, sys.stdout)
        sys.stdout.write("\n")
    else:
        for key, value in results.items():
            print(f"{key}: max residual {value:.3e}")
        print("verify: PASS" if ok else "verify: FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cflow",
        description="Compute one-parameter flows A^z of invertible complex matrices.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("pow", help="compute A^z and print it as a matrix document")
    sp.add_argument("matrix", help="matrix file (JSON document)")
    sp.add_argument("--z", required=True, help="exponent, a complex literal")
    sp.add_argument("--relation", default=None, help="coefficients c_{p-1},...,c_0")
    sp.add_argument(
        "--method", choices=["vandermonde", "companion", "both"], default="vandermonde"
    )
    _add_common(sp)
    sp.set_defaults(func=cmd_pow)

    sp = subs.add_parser("analyze", help="report the flow representation")
    sp.add_argument("matrix")
    sp.add_argument("--relation", default=None)
    _add_common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = subs.add_parser("verify", help="check the flow axioms and method agreement")
    sp.add_argument("matrix")
    sp.add_argument("--relation", default=None)
    sp.add_argument(
        "--method", choices=["vandermonde", "companion", "both"], default="both"
    )
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--z-radius", type=float, default=3.0)
    _add_common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = subs.add_parser("formula", help="emit the coefficient functions mu_i(z)")
    sp.add_argument("matrix", nargs="?", default=None)
    sp.add_argument("--relation", default=None)
    sp.add_argument("--at", default=None, help="also evaluate mu at this z")
    sp.add_argument("--skip-zero", action="store_true", help="elide zero coefficients")
    _add_common(sp)
    sp.set_defaults(func=cmd_formula)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MatrixParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SingularMatrix, ZeroEigenvalue, AmbiguousRank) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except RelationInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except CFlowError as exc:  # anything else operational
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
