"""The even-setting correlation family and its odd-setting reductions.

``generate_even(n)`` builds the 2n-setting member whose joint-coefficient
matrix (rows indexed by B settings, columns by A settings) is all ones above
the anti-diagonal band, carries -1, -2, ..., -n, ..., -2, -1 on the
anti-diagonal k + m = 2n + 2, and zeros below.  The n = 1, 2, 3 instances
are pinned by tests; higher n extrapolates the same pattern.

Claimed invariants, verified (not assumed) by ``family_report``: the LHV
maximum is n(n+1) and the deterministic spectrum is a uniform progression
with (n^2 + n + 2)/2 distinct values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .polytope import check_tightness, classical_bounds, root_spectrum
from .scenario import (
    CorrelationExpression,
    EnumerationLimitError,
    ExpressionError,
    Scenario,
)


@dataclass(frozen=True)
class FamilySpec:
    n: int

    @property
    def settings(self) -> int:
        return 2 * self.n

    @property
    def claimed_bound(self) -> int:
        return self.n * (self.n + 1)

    @property
    def claimed_root_count(self) -> int:
        return (self.n * self.n + self.n + 2) // 2


def family_matrix(n: int) -> list[list[int]]:
    """Joint-coefficient matrix, rows = B settings, columns = A settings."""
    if n < 1:
        raise ExpressionError("family index n must be >= 1")
    size = 2 * n
    rows = []
    for m in range(1, size + 1):
        row = []
        for k in range(1, size + 1):
            if k + m <= size + 1:
                row.append(1)
            elif k + m == size + 2:
                row.append(-min(m - 1, size + 1 - m))
            else:
                row.append(0)
        rows.append(row)
    return rows


def generate_even(n: int) -> CorrelationExpression:
    """The 2n-setting family member; n=1 is CHSH in matrix ordering."""
    spec = FamilySpec(n)
    matrix = family_matrix(n)
    coeffs = {}
    for m, row in enumerate(matrix, start=1):
        for k, c in enumerate(row, start=1):
            if c:
                coeffs[(k, m)] = Fraction(c)
    return CorrelationExpression(
        scenario=Scenario(settings=(spec.settings, spec.settings), outcomes=(2, 2)),
        coeffs=coeffs,
        upper_bound=Fraction(spec.claimed_bound),
        name=f"i2n({n})",
    )


def reduce_odd(expr: CorrelationExpression) -> CorrelationExpression:
    """Pin the last setting of both parties to outcome +1.

    Joint terms with the last setting collapse to marginals (and the
    last-last term to a constant), leaving a (2n-1)-setting inequality with
    the same claimed bound.
    """
    m1, m2 = expr.scenario.settings
    if m1 != m2 or m1 < 2:
        raise ExpressionError("reduction expects a square family member")
    last = m1
    coeffs: dict = {}

    def add(idx, c):
        coeffs[idx] = coeffs.get(idx, Fraction(0)) + c

    for (i, j), c in expr.coeffs.items():
        i2 = 0 if i == last else i
        j2 = 0 if j == last else j
        add((i2, j2), c)
    coeffs = {k: v for k, v in coeffs.items() if v}
    return CorrelationExpression(
        scenario=Scenario(settings=(last - 1, last - 1), outcomes=(2, 2)),
        coeffs=coeffs,
        upper_bound=expr.upper_bound,
        name=(expr.name + "_red") if expr.name else "",
    )


def family_report(
    n_max: int = 10,
    facet_n_max: int = 5,
    limit: Optional[int] = None,
) -> list[dict]:
    """Per-n verification table: computed bound and root count against the
    closed-form claims, plus facet verdicts where enumeration is feasible.

    Rows are independent; infeasible entries are reported as None with a
    note rather than failing the whole table.
    """
    rows = []
    for n in range(1, n_max + 1):
        spec = FamilySpec(n)
        expr = generate_even(n)
        row: dict = {
            "n": n,
            "settings": spec.settings,
            "claimed_bound": spec.claimed_bound,
            "claimed_roots": spec.claimed_root_count,
        }
        try:
            lo, hi = classical_bounds(expr, limit)
            spectrum = root_spectrum(expr, limit)
            row.update(
                {
                    "bound": str(hi),
                    "lower": str(lo),
                    "roots": spectrum.count,
                    "uniform": spectrum.uniform,
                    "bound_ok": hi == spec.claimed_bound,
                    "roots_ok": spectrum.count == spec.claimed_root_count
                    and spectrum.uniform,
                }
            )
        except EnumerationLimitError as exc:
            row["note"] = str(exc)
            rows.append(row)
            continue
        if n <= facet_n_max:
            verdict = check_tightness(expr, "upper", limit)
            row["tight"] = verdict.is_tight
            row["facet_rank"] = verdict.saturating_rank
            row["facet_dim"] = verdict.polytope_dimension
            if n >= 2:
                red = reduce_odd(expr)
                red_verdict = check_tightness(red, "upper", limit)
                red_lo, red_hi = classical_bounds(red, limit)
                row["reduced_bound"] = str(red_hi)
                row["reduced_bound_ok"] = red_hi == spec.claimed_bound
                row["reduced_tight"] = red_verdict.is_tight
        rows.append(row)
    return rows
