"""Exact local-hidden-variable analysis.

Classical bounds, root spectra, saturating vertices and facet verification
for two-party Bell expressions.  Everything here is exact: coefficients are
cleared to integers, comparisons are integer comparisons, and affine ranks
are computed by fraction-free elimination over the integers.  No epsilon
appears anywhere in this module.

The per-strategy cost is kept polynomial by the separable fast path: party-A
assignments are enumerated, and for a fixed A assignment the contribution of
each B setting can be optimized (or accumulated into a reachable-value set)
independently of the other B settings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .scenario import (
    BellExpression,
    CorrelationExpression,
    DeterministicStrategy,
    EnumerationLimitError,
    ProbabilityExpression,
    RootSpectrum,
    Scenario,
    default_limit,
    enumerate_strategies,
)


@dataclass(frozen=True)
class FacetVerdict:
    """Tightness report: a supporting hyperplane is a facet iff the
    bound-saturating vertices have full affine rank ``D``."""

    polytope_dimension: int
    saturating_rank: int
    saturating_count: int

    @property
    def is_tight(self) -> bool:
        return self.saturating_rank == self.polytope_dimension


# ---------------------------------------------------------------------------
# integer tables shared by the exact engines


@dataclass
class _IntTables:
    """Integer-cleared probability-style tables of a two-party expression.

    True value of a strategy = (base + sum_j t_j(b_j)) / den with
    base = const + sum_i marg_a[i][a_i] and
    t_j(b) = marg_b[j][b] + sum_i joint[i][a_i][j][b].
    """

    m1: int
    m2: int
    d1: int
    d2: int
    den: int
    const: int
    marg_a: list  # [i][a] -> int
    marg_b: list  # [j][b] -> int
    joint: list  # [i][a][j][b] -> int


def _int_tables(expr: BellExpression) -> _IntTables:
    if isinstance(expr, CorrelationExpression) and expr.scenario.parties != 2:
        raise NotImplementedError("exact engines support 2 parties")
    m1, m2 = expr.scenario.settings
    d1, d2 = expr.scenario.outcomes
    fracs = []
    if isinstance(expr, CorrelationExpression):
        fracs = list(expr.coeffs.values())
    else:
        fracs = (
            [expr.constant]
            + list(expr.marg_a.values())
            + list(expr.marg_b.values())
            + list(expr.joint.values())
        )
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1

    def ival(f: Fraction) -> int:
        return f.numerator * (den // f.denominator)

    const = 0
    marg_a = [[0] * d1 for _ in range(m1)]
    marg_b = [[0] * d2 for _ in range(m2)]
    joint = [[[[0] * d2 for _ in range(m2)] for _ in range(d1)] for _ in range(m1)]
    if isinstance(expr, CorrelationExpression):
        for (i, j), c in expr.coeffs.items():
            v = ival(c)
            if i and j:
                for a in range(2):
                    for b in range(2):
                        joint[i - 1][a][j - 1][b] += v * (1 - 2 * a) * (1 - 2 * b)
            elif i:
                for a in range(2):
                    marg_a[i - 1][a] += v * (1 - 2 * a)
            elif j:
                for b in range(2):
                    marg_b[j - 1][b] += v * (1 - 2 * b)
            else:
                const += v
    else:
        const = ival(expr.constant)
        for (i, a), c in expr.marg_a.items():
            marg_a[i - 1][a] += ival(c)
        for (j, b), c in expr.marg_b.items():
            marg_b[j - 1][b] += ival(c)
        for (i, a, j, b), c in expr.joint.items():
            joint[i - 1][a][j - 1][b] += ival(c)
    return _IntTables(m1, m2, d1, d2, den, const, marg_a, marg_b, joint)


def _a_assignments(tab: _IntTables, limit: int) -> Iterator[tuple[int, ...]]:
    count = tab.d1**tab.m1
    if count > limit:
        raise EnumerationLimitError(count, limit)
    return itertools.product(range(tab.d1), repeat=tab.m1)


def _b_options(tab: _IntTables, a_assign: tuple[int, ...]):
    """Per-B-setting option values t_j(b) for a fixed A assignment."""
    options = []
    for j in range(tab.m2):
        row = list(tab.marg_b[j])
        for i, a in enumerate(a_assign):
            ja = tab.joint[i][a][j]
            for b in range(tab.d2):
                row[b] += ja[b]
        options.append(row)
    return options


def _base(tab: _IntTables, a_assign: tuple[int, ...]) -> int:
    return tab.const + sum(tab.marg_a[i][a] for i, a in enumerate(a_assign))


# ---------------------------------------------------------------------------
# numpy fast path for binary correlation expressions (exact in int64)


def _correlation_arrays(expr: CorrelationExpression):
    m1, m2 = expr.scenario.settings
    fracs = list(expr.coeffs.values())
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    J = np.zeros((m1, m2), dtype=np.int64)
    ca = np.zeros(m1, dtype=np.int64)
    cb = np.zeros(m2, dtype=np.int64)
    c0 = 0
    for (i, j), c in expr.coeffs.items():
        v = c.numerator * (den // c.denominator)
        if i and j:
            J[i - 1, j - 1] = v
        elif i:
            ca[i - 1] = v
        elif j:
            cb[j - 1] = v
        else:
            c0 = v
    # int64 safety: the largest intermediate is c0 + sum of all |coeffs|
    weight = abs(c0) + int(np.abs(J).sum() + np.abs(ca).sum() + np.abs(cb).sum())
    if weight >= 2**60:
        raise OverflowError("coefficients too large for the int64 fast path")
    return J, ca, cb, c0, den


def _sign_chunks(m1: int, chunk: int = 1 << 15):
    """Yield +-1 matrices covering all 2**m1 A assignments, chunked."""
    total = 1 << m1
    bits = np.arange(m1, dtype=np.uint64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        a = ((idx[:, None] >> bits[None, :]) & 1).astype(np.int64)
        yield 1 - 2 * a  # bit 0 -> +1 (outcome 0), bit 1 -> -1


def _bounds_d2(expr: CorrelationExpression, limit: int) -> tuple[Fraction, Fraction]:
    J, ca, cb, c0, den = _correlation_arrays(expr)
    m1 = expr.scenario.settings[0]
    if (1 << m1) > limit:
        raise EnumerationLimitError(1 << m1, limit)
    hi = None
    lo = None
    for alpha in _sign_chunks(m1):
        S = alpha @ J + cb
        base = c0 + alpha @ ca
        spread = np.abs(S).sum(axis=1)
        chunk_hi = int((base + spread).max())
        chunk_lo = int((base - spread).min())
        hi = chunk_hi if hi is None else max(hi, chunk_hi)
        lo = chunk_lo if lo is None else min(lo, chunk_lo)
    return Fraction(lo, den), Fraction(hi, den)


def _spectrum_d2(expr: CorrelationExpression, limit: int) -> RootSpectrum:
    """Reachable-value dynamic programming over B choices, per A assignment.

    For a fixed A assignment the value is base + sum_j (+-s_j), so the
    reachable set depends only on (base, multiset of |s_j|).  Rows are
    deduplicated before running a bitset subset-sum DP per unique row.
    """
    J, ca, cb, c0, den = _correlation_arrays(expr)
    m1 = expr.scenario.settings[0]
    if (1 << m1) > limit:
        raise EnumerationLimitError(1 << m1, limit)
    unique_rows: set[bytes] = set()
    m2 = expr.scenario.settings[1]
    for alpha in _sign_chunks(m1):
        S = np.sort(np.abs(alpha @ J + cb), axis=1)
        base = (c0 + alpha @ ca)[:, None]
        key = np.unique(np.hstack([base, S]), axis=0).astype(np.int64)
        for row in key:
            unique_rows.add(row.tobytes())
    values: set[int] = set()
    for raw in unique_rows:
        row = np.frombuffer(raw, dtype=np.int64)
        base = int(row[0])
        svals = [int(s) for s in row[1:]]
        total = sum(svals)
        bits = 1
        for s in svals:
            bits |= bits << (2 * s)
        # bit p set  <=>  base - total + p is reachable
        offset = base - total
        p = 0
        while bits:
            if bits & 1:
                values.add(offset + p)
            bits >>= 1
            p += 1
    return RootSpectrum.from_values(Fraction(v, den) for v in values)


# ---------------------------------------------------------------------------
# public operations


def classical_bounds(
    expr: BellExpression, limit: Optional[int] = None
) -> tuple[Fraction, Fraction]:
    """Exact (lower, upper) LHV bounds over all deterministic strategies."""
    limit = default_limit() if limit is None else limit
    if expr.scenario.parties != 2:
        values = [expr.value_on(s) for s in enumerate_strategies(expr.scenario, limit)]
        return min(values), max(values)
    if isinstance(expr, CorrelationExpression) and expr.scenario.settings[0] > 12:
        return _bounds_d2(expr, limit)
    tab = _int_tables(expr)
    hi = None
    lo = None
    for a_assign in _a_assignments(tab, limit):
        base = _base(tab, a_assign)
        up = base
        dn = base
        for row in _b_options(tab, a_assign):
            up += max(row)
            dn += min(row)
        hi = up if hi is None else max(hi, up)
        lo = dn if lo is None else min(lo, dn)
    return Fraction(lo, tab.den), Fraction(hi, tab.den)


def root_spectrum(
    expr: BellExpression, limit: Optional[int] = None, method: str = "auto"
) -> RootSpectrum:
    """Sorted distinct deterministic values, with the uniform-spacing flag.

    ``method`` is ``auto`` (DP fast path for large binary correlation
    expressions), ``dp`` (force the fast path) or ``enumerate`` (full
    strategy enumeration, for cross-checks).
    """
    limit = default_limit() if limit is None else limit
    if expr.scenario.parties != 2 and method != "enumerate":
        method = "enumerate"
    if method == "enumerate":
        values = [expr.value_on(s) for s in enumerate_strategies(expr.scenario, limit)]
        return RootSpectrum.from_values(values)
    if isinstance(expr, CorrelationExpression) and (
        method == "dp" or expr.scenario.settings[0] > 12
    ):
        return _spectrum_d2(expr, limit)
    tab = _int_tables(expr)
    values_set: set[int] = set()
    for a_assign in _a_assignments(tab, limit):
        partial = {_base(tab, a_assign)}
        for row in _b_options(tab, a_assign):
            opts = set(row)
            partial = {v + t for v in partial for t in opts}
        values_set |= partial
    return RootSpectrum.from_values(Fraction(v, tab.den) for v in values_set)


def _saturating_stream(
    expr: BellExpression, side: str, limit: int
) -> tuple[Iterator[DeterministicStrategy], int, Fraction]:
    """(lazy strategy stream, exact count, attained bound) for one side."""
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    lo, hi = classical_bounds(expr, limit)
    target_frac = hi if side == "upper" else lo
    tab = _int_tables(expr)
    target = target_frac.numerator * (tab.den // target_frac.denominator)
    pick = max if side == "upper" else min

    hits: list[tuple[tuple[int, ...], list[list[int]]]] = []
    count = 0
    for a_assign in _a_assignments(tab, limit):
        base = _base(tab, a_assign)
        options = _b_options(tab, a_assign)
        best = base + sum(pick(row) for row in options)
        if best == target:
            choices = [
                [b for b in range(tab.d2) if row[b] == pick(row)] for row in options
            ]
            hits.append((a_assign, choices))
            count += math.prod(len(ch) for ch in choices)

    def stream():
        for a_assign, choices in hits:
            for b_assign in itertools.product(*choices):
                yield DeterministicStrategy(outcomes=(a_assign, b_assign))

    return stream(), count, target_frac


def saturating_vertices(
    expr: BellExpression, side: str = "upper", limit: Optional[int] = None
) -> list[DeterministicStrategy]:
    """All deterministic strategies attaining the chosen classical bound."""
    limit = default_limit() if limit is None else limit
    stream, _, _ = _saturating_stream(expr, side, limit)
    return list(stream)


# ---------------------------------------------------------------------------
# Collins-Gisin embedding and exact rank


def cg_embedding(strategy: DeterministicStrategy, scenario: Scenario) -> tuple[int, ...]:
    """Collins-Gisin coordinates of a deterministic two-party strategy.

    Single-party outcome indicators for outcomes 0..d-2 of every setting,
    then the joint block; normalization and no-signaling redundancy is gone,
    so the coordinate count is the local polytope's true dimension.
    """
    m1, m2 = scenario.settings
    d1, d2 = scenario.outcomes
    av, bv = strategy.outcomes
    pa = [1 if av[i] == a else 0 for i in range(m1) for a in range(d1 - 1)]
    pb = [1 if bv[j] == b else 0 for j in range(m2) for b in range(d2 - 1)]
    pj = [x * y for x in pa for y in pb]
    return tuple(pa + pb + pj)


def polytope_dimension(scenario: Scenario) -> int:
    m1, m2 = scenario.settings
    d1, d2 = scenario.outcomes
    return (m1 * (d1 - 1) + 1) * (m2 * (d2 - 1) + 1) - 1


class IntRankAccumulator:
    """Incremental exact rank of integer rows via fraction-free elimination.

    Rows are reduced against stored pivot rows by cross-multiplication and
    divided by their gcd, so entries stay small and all arithmetic is exact.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, list[int]] = {}  # pivot column -> reduced row

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add(self, row) -> bool:
        """Reduce ``row``; return True when it increased the rank."""
        row = list(row)
        for col in range(self.ncols):
            x = row[col]
            if not x:
                continue
            piv = self.pivots.get(col)
            if piv is None:
                g = math.gcd(*row)
                if g > 1:
                    row = [v // g for v in row]
                self.pivots[col] = row
                return True
            lead = piv[col]
            row = [lead * r - x * p for r, p in zip(row, piv)]
            g = math.gcd(*row)
            if g > 1:
                row = [v // g for v in row]
        return False


def check_tightness(
    expr: BellExpression, side: str = "upper", limit: Optional[int] = None
) -> FacetVerdict:
    """Facet test: affine rank of the bound-saturating vertices vs D.

    The rank is the linear rank of the saturating vertices' Collins-Gisin
    vectors homogenized with a leading 1, computed exactly; the verdict is
    tight iff it reaches the polytope dimension D.
    """
    limit = default_limit() if limit is None else limit
    scenario = expr.scenario
    dim = polytope_dimension(scenario)
    stream, count, _ = _saturating_stream(expr, side, limit)
    acc = IntRankAccumulator(dim + 1)
    for strategy in stream:
        acc.add((1,) + cg_embedding(strategy, scenario))
        if acc.rank > dim:  # cannot happen: affine hull is at most D-dim
            break
        if acc.rank == dim:
            break
    return FacetVerdict(
        polytope_dimension=dim, saturating_rank=acc.rank, saturating_count=count
    )
