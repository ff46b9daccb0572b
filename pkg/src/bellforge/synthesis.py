"""Root-constrained inequality synthesis.

A candidate coefficient assignment is accepted exactly when its
deterministic value set ("root spectrum") consists of n distinct, uniformly
spaced values.  This enumeration check is equivalent to the polynomial
route of forcing prod_j (B - L_j) = 0 after reducing by A_i^2 = B_i^2 = 1:
that product vanishes identically over local deterministic models iff every
deterministic value of B is one of the n prescribed roots, which is
precisely what the spectrum test verifies -- without solving the
underdetermined coefficient equations symbolically.

Candidates are emitted in canonical integer form; optional filters drop
quantum-trivial candidates (no see-saw violation beyond the classical
bound) and relabeling-equivalent duplicates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .polytope import check_tightness, root_spectrum
from .scenario import (
    BellExpression,
    CorrelationExpression,
    ExpressionError,
    ProbabilityExpression,
    RootSpectrum,
    Scenario,
    canonical_key,
    canonicalize,
    mod_form_to_joint,
)

SEARCH_SPACE_LIMIT = 10**7
NONTRIVIAL_MARGIN = 1e-6


class SearchSpaceError(RuntimeError):
    def __init__(self, size: int, limit: int):
        super().__init__(
            f"exhaustive search space of {size} candidates exceeds limit {limit}; "
            "use the random mode"
        )
        self.size = size


@dataclass(frozen=True)
class Ansatz:
    """Parametrized coefficient template with slot sharing.

    ``slots`` is an ordered tuple of slot names; ``members[name]`` lists the
    coefficient indices tied to that slot.  Party-exchange symmetry ties
    (i, j) with (j, i) joint slots and the A/B marginal slots pairwise.
    """

    scenario: Scenario
    form: str  # "correlation" | "mod"
    slots: tuple[str, ...]
    members: dict = field(hash=False)

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def expression(self, values: Iterable) -> BellExpression:
        values = list(values)
        if len(values) != self.slot_count:
            raise ExpressionError("wrong number of slot values")
        coeffs: dict = {}
        for name, v in zip(self.slots, values):
            for idx in self.members[name]:
                coeffs[idx] = coeffs.get(idx, Fraction(0)) + Fraction(v)
        if self.form == "correlation":
            return CorrelationExpression(scenario=self.scenario, coeffs=coeffs)
        return mod_form_to_joint(coeffs, self.scenario)


def correlation_ansatz(
    scenario: Scenario,
    symmetry: str = "party-exchange",
    marginals: bool = True,
    constant: bool = True,
) -> Ansatz:
    """Two-party correlation ansatz, optionally symmetric under A<->B."""
    if scenario.parties != 2 or not scenario.is_binary:
        raise ExpressionError("correlation ansatz needs 2 binary parties")
    m1, m2 = scenario.settings
    if symmetry == "party-exchange" and m1 != m2:
        raise ExpressionError("party-exchange symmetry needs equal setting counts")
    slots: list[str] = []
    members: dict = {}
    if constant:
        slots.append("c0")
        members["c0"] = [(0, 0)]
    if symmetry == "party-exchange":
        if marginals:
            for i in range(1, m1 + 1):
                name = f"m{i}"
                slots.append(name)
                members[name] = [(i, 0), (0, i)]
        for i in range(1, m1 + 1):
            for j in range(i, m2 + 1):
                name = f"j{i}{j}"
                slots.append(name)
                members[name] = [(i, j)] if i == j else [(i, j), (j, i)]
    elif symmetry == "none":
        if marginals:
            for i in range(1, m1 + 1):
                slots.append(f"a{i}")
                members[f"a{i}"] = [(i, 0)]
            for j in range(1, m2 + 1):
                slots.append(f"b{j}")
                members[f"b{j}"] = [(0, j)]
        for i in range(1, m1 + 1):
            for j in range(1, m2 + 1):
                slots.append(f"j{i}{j}")
                members[f"j{i}{j}"] = [(i, j)]
    else:
        raise ExpressionError(f"unknown symmetry {symmetry!r}")
    return Ansatz(scenario=scenario, form="correlation", slots=tuple(slots), members=members)


def mod_ansatz(scenario: Scenario, symmetry: str = "party-exchange") -> Ansatz:
    """Mod-d joint-probability ansatz c_{ijr}, optionally A<->B symmetric."""
    if scenario.parties != 2 or scenario.outcomes[0] != scenario.outcomes[1]:
        raise ExpressionError("mod ansatz needs 2 parties with equal outcomes")
    m1, m2 = scenario.settings
    d = scenario.outcomes[0]
    slots: list[str] = []
    members: dict = {}
    if symmetry == "party-exchange":
        if m1 != m2:
            raise ExpressionError("party-exchange symmetry needs equal setting counts")
        for i in range(1, m1 + 1):
            for j in range(i, m2 + 1):
                for r in range(d):
                    name = f"c{i}{j}{r}"
                    slots.append(name)
                    members[name] = [(i, j, r)] if i == j else [(i, j, r), (j, i, r)]
    elif symmetry == "none":
        for i in range(1, m1 + 1):
            for j in range(1, m2 + 1):
                for r in range(d):
                    name = f"c{i}{j}{r}"
                    slots.append(name)
                    members[name] = [(i, j, r)]
    else:
        raise ExpressionError(f"unknown symmetry {symmetry!r}")
    return Ansatz(scenario=scenario, form="mod", slots=tuple(slots), members=members)


@dataclass
class SynthesisQuery:
    ansatz: Ansatz
    target_root_count: int
    coefficient_max: int = 3
    mode: str = "exhaustive"  # or "random"
    budget: int = 10000  # candidates drawn in random mode
    seed: int = 0
    require_tight: bool = False
    require_nontrivial: bool = False
    dedup_equivalent: bool = True
    restarts: int = 10  # see-saw budget for the nontriviality filter
    search_limit: int = SEARCH_SPACE_LIMIT

    def __post_init__(self):
        if self.target_root_count < 2:
            raise ExpressionError("target root count must be >= 2")
        if self.coefficient_max < 1:
            raise ExpressionError("coefficient range must be >= 1")


def verify_root_membership(
    expr: BellExpression, n: int, limit: Optional[int] = None
) -> tuple[bool, RootSpectrum]:
    """True iff the deterministic spectrum has exactly n uniformly spaced
    distinct values."""
    spectrum = root_spectrum(expr, limit)
    return spectrum.count == n and spectrum.uniform, spectrum


# fast integer spectrum check for correlation candidates ---------------------


def _fast_correlation_check(ansatz: Ansatz, values, alphas, n: int) -> bool:
    """Spectrum test without building an expression; aborts early when the
    candidate exceeds n distinct values."""
    m1, m2 = ansatz.scenario.settings
    c0 = 0
    ca = [0] * (m1 + 1)
    cb = [0] * (m2 + 1)
    J = [[0] * (m2 + 1) for _ in range(m1 + 1)]
    for name, v in zip(ansatz.slots, values):
        for (i, j) in ansatz.members[name]:
            if i and j:
                J[i][j] += v
            elif i:
                ca[i] += v
            elif j:
                cb[j] += v
            else:
                c0 += v
    roots: set[int] = set()
    for alpha in alphas:
        base = c0 + sum(ca[i + 1] * alpha[i] for i in range(m1))
        partial = {base}
        for j in range(1, m2 + 1):
            s = cb[j] + sum(J[i + 1][j] * alpha[i] for i in range(m1))
            if s:
                partial = {v + s for v in partial} | {v - s for v in partial}
        roots |= partial
        if len(roots) > n:
            return False
    if len(roots) != n:
        return False
    vals = sorted(roots)
    step = vals[1] - vals[0]
    return all(b - a == step for a, b in zip(vals, vals[1:]))


def enumerate_candidates(query: SynthesisQuery) -> list[BellExpression]:
    """Search the integer coefficient grid for expressions whose spectrum is
    a uniform n-term progression; deterministic given (query, seed).

    The emission order is defined by sorting accepted candidates on their
    canonical coefficient vectors, not by search order.
    """
    ansatz = query.ansatz
    c = query.coefficient_max
    n = query.target_root_count
    k = ansatz.slot_count
    if query.mode == "exhaustive":
        size = (2 * c + 1) ** k
        if size > query.search_limit:
            raise SearchSpaceError(size, query.search_limit)
        grid = itertools.product(range(-c, c + 1), repeat=k)
    elif query.mode == "random":
        rng = np.random.default_rng(query.seed)
        grid = (
            tuple(int(x) for x in rng.integers(-c, c + 1, size=k))
            for _ in range(query.budget)
        )
    else:
        raise ExpressionError(f"unknown mode {query.mode!r}")

    fast = ansatz.form == "correlation"
    if fast:
        m1 = ansatz.scenario.settings[0]
        alphas = list(itertools.product((1, -1), repeat=m1))

    seen = set()
    accepted: list[BellExpression] = []
    for values in grid:
        if not any(values):
            continue  # spectrum {0} has a single root
        if fast:
            if not _fast_correlation_check(ansatz, values, alphas, n):
                continue
            expr = ansatz.expression(values)
        else:
            expr = ansatz.expression(values)
            ok, _ = verify_root_membership(expr, n)
            if not ok:
                continue
        canon, _ = canonicalize(expr)
        key = canonical_key(canon)
        if key in seen:
            continue
        seen.add(key)
        accepted.append(canon)

    accepted.sort(key=canonical_key)
    if query.require_tight:
        accepted = [e for e in accepted if check_tightness(e, "upper").is_tight]
    if query.require_nontrivial:
        accepted = [e for e in accepted if _is_nontrivial(e, query)]
    if query.dedup_equivalent:
        accepted = _dedup_equivalent(accepted)
    return accepted


def _is_nontrivial(expr: BellExpression, query: SynthesisQuery) -> bool:
    from .polytope import classical_bounds
    from .quantum import max_violation

    _, upper = classical_bounds(expr)
    res = max_violation(expr, restarts=query.restarts, seed=query.seed)
    return res.value > float(upper) + NONTRIVIAL_MARGIN


def _dedup_equivalent(candidates: list[BellExpression]) -> list[BellExpression]:
    reps: list[BellExpression] = []
    seen: set = set()
    rep_sig = []
    from .relevance import EquivalenceLimitError, equivalence_check

    for expr in candidates:
        if isinstance(expr, CorrelationExpression) and expr.scenario.parties == 2:
            from .polytope import classical_bounds

            lo, hi = classical_bounds(expr)
            ku = _orbit_key(expr, hi, "upper")
            kl = _orbit_key(expr, lo, "lower")
            if ku in seen or kl in seen:
                continue
            seen.add(ku)
            seen.add(kl)
            reps.append(expr)
            continue
        spectrum = root_spectrum(expr)
        sig = (spectrum.values, expr.scenario)
        duplicate = False
        for other, other_sig in zip(reps, rep_sig):
            if sig != other_sig:  # the spectrum is a relabeling invariant
                continue
            try:
                if equivalence_check(expr, other).equivalent:
                    duplicate = True
                    break
            except EquivalenceLimitError:
                continue
        if not duplicate:
            reps.append(expr)
            rep_sig.append(sig)
    return reps


# orbit-canonical facet keys for binary correlation expressions -------------
#
# A relabeling acts on the (M1+1) x (M2+1) coefficient matrix of the facet
# functional (constant in slot [0,0], marginals on the border, joint block
# inside) by permuting rows/columns 1..M, flipping their signs (outcome
# relabeling), and transposing (party swap).  Affine re-expression freedom is
# absent in correlation coordinates, so the lexicographic maximum over the
# orbit, after integer normalization, is a complete equivalence invariant
# for facets of the same side combination.

_ORBIT_CACHE: dict = {}


def _orbit_group(m1: int, m2: int):
    key = (m1, m2)
    if key in _ORBIT_CACHE:
        return _ORBIT_CACHE[key]
    n1, n2 = m1 + 1, m2 + 1
    base = np.arange(n1 * n2).reshape(n1, n2)
    perms = []
    signs = []
    mats = [base] if m1 != m2 else [base, base.T]
    for mat in mats:
        for rp in itertools.permutations(range(1, n1)):
            rows = (0,) + rp
            for cp in itertools.permutations(range(1, n2)):
                cols = (0,) + cp
                pmat = mat[np.ix_(rows, cols)]
                for rs in itertools.product((1, -1), repeat=m1):
                    rvec = np.array((1,) + rs)
                    for cs in itertools.product((1, -1), repeat=m2):
                        cvec = np.array((1,) + cs)
                        perms.append(pmat.ravel())
                        signs.append(np.outer(rvec, cvec).ravel())
    group = (np.array(perms), np.array(signs, dtype=np.int64))
    _ORBIT_CACHE[key] = group
    return group


def _orbit_key(expr: CorrelationExpression, bound: Fraction, side: str):
    m1, m2 = expr.scenario.settings
    K = np.zeros((m1 + 1, m2 + 1), dtype=object)
    for (i, j), c in expr.coeffs.items():
        K[i, j] = c
    if side == "upper":  # h = bound - expr >= 0
        K = -K
        K[0, 0] = bound + K[0, 0]
    else:  # h = expr - bound >= 0
        K[0, 0] = K[0, 0] - bound
    flat = [Fraction(x) for x in K.ravel()]
    den = math.lcm(*(f.denominator for f in flat))
    ints = [f.numerator * (den // f.denominator) for f in flat]
    g = math.gcd(*ints)
    if g:
        ints = [v // g for v in ints]
    vec = np.array(ints, dtype=np.int64)
    perms, signs = _orbit_group(m1, m2)
    orbit = vec[perms] * signs
    best = tuple(orbit[np.lexsort(orbit.T[::-1])[-1]])
    return (expr.scenario, best)
