"""Command-line front end.

Every subcommand writes a JSON report to stdout (or ``--out``) and a short
human-readable summary to stderr.  Exit codes: 0 success (including empty
result lists), 1 computational infeasibility, 2 input error.  All commands
are deterministic given their flags; ``--threads`` caps the parallelism
budget and never changes results (the exact engines run sequentially).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, fixtures
from .io import ParseError, expression_to_document, parse_expression
from .polytope import check_tightness, classical_bounds, root_spectrum
from .quantum import (
    DimensionError,
    NoViolationError,
    QuantumState,
    fixed_state_max,
    isotropic_mixture,
    max_violation,
    schmidt_coefficients,
    threshold_visibility,
)
from .relevance import (
    EquivalenceLimitError,
    OptimizationBudget,
    equivalence_check,
    relevance_search,
)
from .scenario import EnumerationLimitError, ExpressionError, Scenario
from .synthesis import (
    SearchSpaceError,
    SynthesisQuery,
    correlation_ansatz,
    mod_ansatz,
    enumerate_candidates,
)
from .family import family_report

SEE_SAW_TOL = 1e-9


class InputError(ValueError):
    pass


def _rat(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


def _load_expression(ref: str):
    """Fixture name, parametric fixture name, or path to a JSON document."""
    try:
        return fixtures.expression(ref)
    except KeyError:
        pass
    except ValueError as exc:
        raise InputError(f"bad fixture parameter in {ref!r}: {exc}")
    if os.path.exists(ref):
        with open(ref) as fh:
            return parse_expression(fh.read())
    raise InputError(f"unknown fixture and no such file: {ref!r}")


def _load_state(name: str) -> QuantumState:
    try:
        return fixtures.state(name)
    except KeyError:
        raise InputError(f"unknown state fixture {name!r}")


def _emit(args, report: dict, summary: str) -> None:
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(summary, file=sys.stderr)


def _meta(args, **extra) -> dict:
    meta = {"version": __version__, "command": args.command}
    for key in ("seed", "restarts", "limit", "samples", "width"):
        if hasattr(args, key):
            meta[key] = getattr(args, key)
    meta["tolerances"] = {"see_saw_tol": SEE_SAW_TOL}
    meta.update(extra)
    return meta


def _state_to_json(state: QuantumState) -> dict:
    m = state.matrix
    return {
        "dims": list(state.dims),
        "matrix": [
            [{"re": format(x.real, ".17g"), "im": format(x.imag, ".17g")} for x in row]
            for row in m
        ],
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_bounds(args) -> int:
    expr = _load_expression(args.expr)
    lo, hi = classical_bounds(expr, args.limit)
    report = {
        "meta": _meta(args, expression=args.expr),
        "upper": _rat(hi),
        "lower": _rat(lo),
    }
    _emit(args, report, f"{args.expr}: lower {lo}, upper {hi}")
    return 0


def _cmd_spectrum(args) -> int:
    expr = _load_expression(args.expr)
    spectrum = root_spectrum(expr, args.limit, method=args.method)
    report = {
        "meta": _meta(args, expression=args.expr, method=args.method),
        "spectrum": [_rat(v) for v in spectrum.values],
        "uniform": spectrum.uniform,
        "count": spectrum.count,
    }
    _emit(
        args,
        report,
        f"{args.expr}: {spectrum.count} distinct deterministic values, "
        f"uniform={spectrum.uniform}",
    )
    return 0


def _cmd_tight(args) -> int:
    expr = _load_expression(args.expr)
    verdict = check_tightness(expr, args.side, args.limit)
    report = {
        "meta": _meta(args, expression=args.expr, side=args.side),
        "facet": {
            "D": verdict.polytope_dimension,
            "rank": verdict.saturating_rank,
            "tight": verdict.is_tight,
            "saturating_count": verdict.saturating_count,
        },
    }
    _emit(
        args,
        report,
        f"{args.expr} ({args.side}): rank {verdict.saturating_rank} of "
        f"D={verdict.polytope_dimension} -> tight={verdict.is_tight}",
    )
    return 0


def _build_query(args) -> SynthesisQuery:
    if args.query:
        with open(args.query) as fh:
            try:
                q = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"query file is not valid JSON: {exc}")
        scenario = Scenario(
            settings=tuple(q["scenario"]["settings"]),
            outcomes=tuple(q["scenario"]["outcomes"]),
        )
        form = q.get("form", "correlation")
        symmetry = q.get("symmetry", "party-exchange")
        roots = q["roots"]
        cmax = q.get("cmax", 1)
        mode = q.get("mode", "exhaustive")
        budget = q.get("budget", 10000)
        seed = q.get("seed", args.seed)
    else:
        if args.roots is None:
            raise InputError("either --query or --roots is required")
        scenario = Scenario(
            settings=tuple(args.settings), outcomes=tuple(args.outcomes)
        )
        form, symmetry = args.form, args.symmetry
        roots, cmax = args.roots, args.cmax
        mode, budget, seed = args.mode, args.budget, args.seed
    if form == "correlation":
        ansatz = correlation_ansatz(
            scenario, symmetry=symmetry, marginals=not args.no_marginals
        )
    elif form == "mod":
        ansatz = mod_ansatz(scenario, symmetry=symmetry)
    else:
        raise InputError(f"unknown ansatz form {form!r}")
    return SynthesisQuery(
        ansatz=ansatz,
        target_root_count=roots,
        coefficient_max=cmax,
        mode=mode,
        budget=budget,
        seed=seed,
        require_tight=args.require_tight,
        require_nontrivial=args.require_nontrivial,
        dedup_equivalent=not args.keep_equivalent,
    )


def _cmd_synthesize(args) -> int:
    query = _build_query(args)
    found = enumerate_candidates(query)
    results = []
    for expr in found:
        spectrum = root_spectrum(expr)
        verdict = check_tightness(expr, "upper")
        lo, hi = classical_bounds(expr)
        results.append(
            {
                "expression": expression_to_document(expr.with_bounds(lo, hi)),
                "spectrum": [_rat(v) for v in spectrum.values],
                "uniform": spectrum.uniform,
                "facet": {
                    "D": verdict.polytope_dimension,
                    "rank": verdict.saturating_rank,
                    "tight": verdict.is_tight,
                    "saturating_count": verdict.saturating_count,
                },
            }
        )
    report = {
        "meta": _meta(
            args,
            roots=query.target_root_count,
            cmax=query.coefficient_max,
            mode=query.mode,
        ),
        "candidates": results,
    }
    _emit(args, report, f"synthesis: {len(results)} candidate(s)")
    return 0


def _cmd_violate(args) -> int:
    expr = _load_expression(args.expr)
    dims = tuple(args.dims) if args.dims else None
    if args.state:
        state = _load_state(args.state)
        res = fixed_state_max(
            expr, state, restarts=args.restarts, seed=args.seed, tol=SEE_SAW_TOL
        )
    else:
        res = max_violation(
            expr, dims=dims, restarts=args.restarts, seed=args.seed, tol=SEE_SAW_TOL
        )
    bound = expr.upper_bound
    if bound is None:
        _, bound = classical_bounds(expr)
    result = {
        "value": res.value,
        "bound": _rat(bound),
        "violated": res.value > float(bound) + 1e-9,
        "converged": res.converged,
    }
    if res.state.vector is not None:
        result["schmidt"] = [float(c) for c in schmidt_coefficients(res.state)]
    report = {"meta": _meta(args, expression=args.expr, state=args.state), **result}
    _emit(
        args,
        report,
        f"{args.expr}: best value {res.value:.6f} vs bound {bound} "
        f"(violated={result['violated']})",
    )
    return 0


def _cmd_visibility(args) -> int:
    expr = _load_expression(args.expr)
    psi = _load_state(args.state)
    try:
        res = threshold_visibility(
            expr,
            psi,
            width=args.width,
            restarts=args.restarts,
            seed=args.seed,
            tol=SEE_SAW_TOL,
        )
    except NoViolationError as exc:
        report = {
            "meta": _meta(args, expression=args.expr, state=args.state),
            "threshold": None,
            "reason": str(exc),
        }
        _emit(args, report, f"{args.expr} @ {args.state}: no violation, no threshold")
        return 0
    report = {
        "meta": _meta(args, expression=args.expr, state=args.state),
        "threshold": res.threshold,
        "bracket_width": res.bracket_width,
        "value_at_threshold": res.value_at_threshold,
        "bound": res.bound,
    }
    if args.plot:
        _plot_visibility(args, expr, psi, res)
        report["plot"] = args.plot
    _emit(
        args,
        report,
        f"{args.expr} @ {args.state}: threshold visibility {res.threshold:.5f} "
        f"(bracket {res.bracket_width:.1e})",
    )
    return 0


def _plot_visibility(args, expr, psi, res) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    vs = np.linspace(0.0, 1.0, 11)
    vals = [
        fixed_state_max(
            expr, isotropic_mixture(psi, float(v)), restarts=2, seed=args.seed
        ).value
        for v in vs
    ]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(vs, vals, "o-", label="optimized value")
    ax.axhline(res.bound, color="gray", ls="--", label="classical bound")
    ax.axvline(res.threshold, color="firebrick", ls=":", label=f"v* = {res.threshold:.4f}")
    ax.set_xlabel("visibility v")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.plot, dpi=150)
    plt.close(fig)


def _cmd_relevance(args) -> int:
    expr_a = _load_expression(args.expr_a)
    expr_b = _load_expression(args.expr_b)
    budget = OptimizationBudget(restarts=args.restarts, seed=args.seed, tol=SEE_SAW_TOL)
    hits = relevance_search(
        expr_a,
        expr_b,
        ensemble=args.ensemble,
        samples=args.samples,
        seed=args.seed,
        budget=budget,
    )
    witnesses = []
    for direction, w in hits:
        witnesses.append(
            {
                "direction": direction,
                "value_violating": w.value_a,
                "value_other": w.value_b,
                "bound_violating": w.bound_a,
                "bound_other": w.bound_b,
                "exact_other": w.exact_b,
                "budget": w.budget.as_dict(),
                "state": _state_to_json(w.state),
            }
        )
    report = {
        "meta": _meta(args, expr_a=args.expr_a, expr_b=args.expr_b, ensemble=args.ensemble),
        "witnesses": witnesses,
    }
    _emit(
        args,
        report,
        f"relevance {args.expr_a} vs {args.expr_b}: {len(witnesses)} witness(es) "
        f"in {args.samples} samples",
    )
    return 0


def _cmd_equiv(args) -> int:
    expr_a = _load_expression(args.expr_a)
    expr_b = _load_expression(args.expr_b)
    verdict = equivalence_check(expr_a, expr_b)
    rmap = None
    if verdict.witness_map is not None:
        m = verdict.witness_map
        rmap = {
            "party_swap": m.party_swap,
            "setting_perm_a": list(m.setting_perm_a),
            "setting_perm_b": list(m.setting_perm_b),
            "outcome_perms_a": [list(p) for p in m.outcome_perms_a],
            "outcome_perms_b": [list(p) for p in m.outcome_perms_b],
        }
    report = {
        "meta": _meta(args, expr_a=args.expr_a, expr_b=args.expr_b),
        "equivalent": verdict.equivalent,
        "map": rmap,
        "side_a": verdict.side_a,
        "side_b": verdict.side_b,
    }
    _emit(
        args,
        report,
        f"{args.expr_a} vs {args.expr_b}: equivalent={verdict.equivalent}",
    )
    return 0


_FAMILY_COLUMNS = [
    "n",
    "settings",
    "claimed_bound",
    "bound",
    "bound_ok",
    "claimed_roots",
    "roots",
    "uniform",
    "tight",
    "reduced_bound",
    "reduced_tight",
    "note",
]


def _family_text(rows) -> str:
    table = [[str(row.get(c, "")) for c in _FAMILY_COLUMNS] for row in rows]
    widths = [
        max(len(c), *(len(r[k]) for r in table)) for k, c in enumerate(_FAMILY_COLUMNS)
    ]
    lines = ["  ".join(c.ljust(w) for c, w in zip(_FAMILY_COLUMNS, widths))]
    for r in table:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def _cmd_family(args) -> int:
    rows = family_report(n_max=args.n_max, facet_n_max=args.facet_n_max, limit=args.limit)
    report = {"meta": _meta(args, n_max=args.n_max), "rows": rows}
    if args.csv:
        import csv

        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=_FAMILY_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        report["csv"] = args.csv
    if args.plot:
        _plot_family(args, rows)
        report["plot"] = args.plot
    _emit(args, report, _family_text(rows))
    return 0


def _plot_family(args, rows) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = [r["n"] for r in rows if "bound" in r]
    bounds = [int(r["bound"]) for r in rows if "bound" in r]
    roots = [r["roots"] for r in rows if "bound" in r]
    claimed_b = [r["claimed_bound"] for r in rows if "bound" in r]
    claimed_r = [r["claimed_roots"] for r in rows if "bound" in r]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.plot(ns, claimed_b, "-", color="gray", label="n(n+1)")
    ax1.plot(ns, bounds, "o", label="computed bound")
    ax1.set_xlabel("n")
    ax1.set_ylabel("classical bound")
    ax1.legend(fontsize=8)
    ax2.plot(ns, claimed_r, "-", color="gray", label="(n²+n+2)/2")
    ax2.plot(ns, roots, "o", label="computed roots")
    ax2.set_xlabel("n")
    ax2.set_ylabel("distinct values")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.plot, dpi=150)
    plt.close(fig)


def _cmd_catalog(args) -> int:
    if args.verify:
        rows = fixtures.verify_catalog()
        ok = all(r["ok"] for r in rows)
        report = {"meta": _meta(args), "verified": ok, "rows": rows}
        _emit(
            args,
            report,
            "catalog verification: "
            + ("all fixtures reproduce their declared bounds" if ok else "MISMATCH"),
        )
        return 0 if ok else 1
    report = {
        "meta": _meta(args),
        "expressions": sorted(fixtures.EXPRESSIONS) + ["i2n(n)", "i2n1_red(n)"],
        "states": sorted(fixtures.STATES),
    }
    _emit(
        args,
        report,
        f"{len(fixtures.EXPRESSIONS)} named expressions (+2 parametric), "
        f"{len(fixtures.STATES)} states",
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p, seed=True, restarts=None):
    p.add_argument("--out", help="write the JSON report to this file instead of stdout")
    p.add_argument("--limit", type=int, default=None, help="enumeration cap override")
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="parallelism budget (results are independent of this value)",
    )
    if seed:
        p.add_argument("--seed", type=int, default=0)
    if restarts is not None:
        p.add_argument("--restarts", type=int, default=restarts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellforge",
        description="Exact and variational analysis of multi-setting Bell inequalities.",
    )
    parser.add_argument("--version", action="version", version=f"bellforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="exact classical bounds of an expression")
    p.add_argument("--expr", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("spectrum", help="distinct deterministic values")
    p.add_argument("--expr", required=True)
    p.add_argument("--method", choices=["auto", "dp", "enumerate"], default="auto")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("tight", help="facet (tightness) verdict")
    p.add_argument("--expr", required=True)
    p.add_argument("--side", choices=["upper", "lower"], default="upper")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_tight)

    p = sub.add_parser("synthesize", help="root-constrained coefficient search")
    p.add_argument("--query", help="JSON query file")
    p.add_argument("--settings", type=int, nargs=2, default=[3, 3])
    p.add_argument("--outcomes", type=int, nargs=2, default=[2, 2])
    p.add_argument("--form", choices=["correlation", "mod"], default="correlation")
    p.add_argument("--symmetry", choices=["party-exchange", "none"], default="party-exchange")
    p.add_argument("--roots", type=int, default=None)
    p.add_argument("--cmax", type=int, default=1)
    p.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--budget", type=int, default=10000)
    p.add_argument("--no-marginals", action="store_true")
    p.add_argument("--require-tight", action="store_true")
    p.add_argument("--require-nontrivial", action="store_true")
    p.add_argument("--keep-equivalent", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("violate", help="see-saw maximal quantum value")
    p.add_argument("--expr", required=True)
    p.add_argument("--dims", type=int, nargs=2, default=None)
    p.add_argument("--state", default=None, help="optimize measurements for this fixed state")
    _add_common(p, restarts=50)
    p.set_defaults(func=_cmd_violate)

    p = sub.add_parser("visibility", help="threshold visibility by bisection")
    p.add_argument("--expr", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--width", type=float, default=1e-4)
    p.add_argument("--plot", help="render the value-vs-visibility figure to this file")
    _add_common(p, restarts=20)
    p.set_defaults(func=_cmd_visibility)

    p = sub.add_parser("relevance", help="sampled relevance experiment")
    p.add_argument("--expr-a", required=True)
    p.add_argument("--expr-b", required=True)
    p.add_argument(
        "--ensemble",
        choices=["pure-Haar", "mixed-Hilbert-Schmidt", "mixed-Bures"],
        default="mixed-Hilbert-Schmidt",
    )
    p.add_argument("--samples", type=int, default=100)
    _add_common(p, restarts=20)
    p.set_defaults(func=_cmd_relevance)

    p = sub.add_parser("equiv", help="relabeling equivalence check")
    p.add_argument("--expr-a", required=True)
    p.add_argument("--expr-b", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("family", help="verification table for the even-setting family")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--facet-n-max", type=int, default=5)
    p.add_argument("--csv", help="also write the table as CSV to this file")
    p.add_argument("--plot", help="render bound/root figures to this file")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("catalog", help="list or verify the fixture catalog")
    p.add_argument("--verify", action="store_true")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EnumerationLimitError, SearchSpaceError, EquivalenceLimitError, OverflowError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except (InputError, ParseError, ExpressionError, DimensionError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
