"""Relevance testing, witness verification and relabeling equivalence.

Two inequalities are relevant to each other when some quantum state violates
one but not the other.  Violations are certified by see-saw lower bounds, so
"does not violate" is budget-qualified -- except for CHSH, where the
closed-form criterion is exact.

Equivalence uses the standard notion: a relabeling (party swap, setting
permutations, per-setting outcome permutations) combined with the
no-signaling/normalization affine re-expression and a positive rescaling.
The affine part is handled by expressing both inequalities as facet
functionals in Collins-Gisin coordinates, a complete invariant for it, so
equivalence reduces to vector equality under the finite relabeling group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .polytope import classical_bounds
from .quantum import (
    Measurements,
    QuantumState,
    ViolationResult,
    chsh_horodecki,
    fixed_state_max,
)
from .scenario import (
    BellExpression,
    CorrelationExpression,
    ProbabilityExpression,
    Scenario,
    canonical_key,
    correlation_to_probability,
)

WITNESS_MARGIN = 1e-6

EQUIV_GROUP_LIMIT = 10**7


# ---------------------------------------------------------------------------
# relabeling group


@dataclass(frozen=True)
class RelabelingMap:
    """Scenario symmetry: optional party swap, per-party setting permutation,
    per-setting outcome permutation.  Permutations are 0-based target maps,
    applied before the party swap."""

    party_swap: bool
    setting_perm_a: tuple[int, ...]
    setting_perm_b: tuple[int, ...]
    outcome_perms_a: tuple[tuple[int, ...], ...]  # indexed by old setting
    outcome_perms_b: tuple[tuple[int, ...], ...]


def identity_map(scenario: Scenario) -> RelabelingMap:
    m1, m2 = scenario.settings
    d1, d2 = scenario.outcomes
    return RelabelingMap(
        party_swap=False,
        setting_perm_a=tuple(range(m1)),
        setting_perm_b=tuple(range(m2)),
        outcome_perms_a=tuple(tuple(range(d1)) for _ in range(m1)),
        outcome_perms_b=tuple(tuple(range(d2)) for _ in range(m2)),
    )


def apply_relabeling(expr: BellExpression, rmap: RelabelingMap) -> ProbabilityExpression:
    """Transformed expression; bounds and deterministic spectrum are
    unchanged (only which strategy attains which value is permuted)."""
    if isinstance(expr, CorrelationExpression):
        expr = correlation_to_probability(expr)
    m1, m2 = expr.scenario.settings
    d1, d2 = expr.scenario.outcomes
    if rmap.party_swap and (m1, d1) != (m2, d2):
        raise ValueError("party swap needs symmetric setting/outcome counts")

    def new_a(i: int, a: int) -> tuple[int, int]:
        return rmap.setting_perm_a[i - 1] + 1, rmap.outcome_perms_a[i - 1][a]

    def new_b(j: int, b: int) -> tuple[int, int]:
        return rmap.setting_perm_b[j - 1] + 1, rmap.outcome_perms_b[j - 1][b]

    joint: dict = {}
    marg_a: dict = {}
    marg_b: dict = {}
    for (i, a, j, b), c in expr.joint.items():
        i2, a2 = new_a(i, a)
        j2, b2 = new_b(j, b)
        key = (j2, b2, i2, a2) if rmap.party_swap else (i2, a2, j2, b2)
        joint[key] = joint.get(key, Fraction(0)) + c
    for (i, a), c in expr.marg_a.items():
        i2, a2 = new_a(i, a)
        target = marg_b if rmap.party_swap else marg_a
        target[(i2, a2)] = target.get((i2, a2), Fraction(0)) + c
    for (j, b), c in expr.marg_b.items():
        j2, b2 = new_b(j, b)
        target = marg_a if rmap.party_swap else marg_b
        target[(j2, b2)] = target.get((j2, b2), Fraction(0)) + c
    scenario = (
        Scenario(settings=(m2, m1), outcomes=(d2, d1))
        if rmap.party_swap
        else expr.scenario
    )
    return ProbabilityExpression(
        scenario=scenario,
        joint=joint,
        marg_a=marg_a,
        marg_b=marg_b,
        constant=expr.constant,
        upper_bound=expr.upper_bound,
        lower_bound=expr.lower_bound,
        name=expr.name,
    )


def relabeling_group_size(scenario: Scenario) -> int:
    m1, m2 = scenario.settings
    d1, d2 = scenario.outcomes
    swaps = 2 if (m1, d1) == (m2, d2) else 1
    return (
        swaps
        * math.factorial(m1)
        * math.factorial(m2)
        * math.factorial(d1) ** m1
        * math.factorial(d2) ** m2
    )


def iterate_relabelings(scenario: Scenario) -> Iterator[RelabelingMap]:
    m1, m2 = scenario.settings
    d1, d2 = scenario.outcomes
    swaps = (False, True) if (m1, d1) == (m2, d2) else (False,)
    setting_perms_a = list(itertools.permutations(range(m1)))
    setting_perms_b = list(itertools.permutations(range(m2)))
    outcome_perms_1 = list(itertools.permutations(range(d1)))
    outcome_perms_2 = list(itertools.permutations(range(d2)))
    for swap in swaps:
        for pa in setting_perms_a:
            for pb in setting_perms_b:
                for oa in itertools.product(outcome_perms_1, repeat=m1):
                    for ob in itertools.product(outcome_perms_2, repeat=m2):
                        yield RelabelingMap(
                            party_swap=swap,
                            setting_perm_a=pa,
                            setting_perm_b=pb,
                            outcome_perms_a=oa,
                            outcome_perms_b=ob,
                        )


# ---------------------------------------------------------------------------
# Collins-Gisin facet vectors


def cg_affine_form(expr: BellExpression):
    """(constant, coefficient map) of the expression over CG coordinates.

    Coordinates are ('A', i, a), ('B', j, b) and ('J', i, a, j, b) with
    outcomes restricted to 0..d-2; terms involving the last outcome are
    rewritten through normalization and no-signaling substitutions.  Two
    expressions on the same scenario with equal forms take equal values on
    every behavior, deterministic strategies included.
    """
    if isinstance(expr, CorrelationExpression):
        expr = correlation_to_probability(expr)
    d1, d2 = expr.scenario.outcomes
    const = expr.constant
    coeffs: dict = {}

    def add(key, c):
        coeffs[key] = coeffs.get(key, Fraction(0)) + c

    for (i, a), c in expr.marg_a.items():
        if a < d1 - 1:
            add(("A", i, a), c)
        else:
            const += c
            for a2 in range(d1 - 1):
                add(("A", i, a2), -c)
    for (j, b), c in expr.marg_b.items():
        if b < d2 - 1:
            add(("B", j, b), c)
        else:
            const += c
            for b2 in range(d2 - 1):
                add(("B", j, b2), -c)
    for (i, a, j, b), c in expr.joint.items():
        if a < d1 - 1 and b < d2 - 1:
            add(("J", i, a, j, b), c)
        elif a < d1 - 1:  # b = d2 - 1: P(a, last) = P(a) - sum_b' P(a, b')
            add(("A", i, a), c)
            for b2 in range(d2 - 1):
                add(("J", i, a, j, b2), -c)
        elif b < d2 - 1:
            add(("B", j, b), c)
            for a2 in range(d1 - 1):
                add(("J", i, a2, j, b), -c)
        else:
            const += c
            for a2 in range(d1 - 1):
                add(("A", i, a2), -c)
            for b2 in range(d2 - 1):
                add(("B", j, b2), -c)
            for a2 in range(d1 - 1):
                for b2 in range(d2 - 1):
                    add(("J", i, a2, j, b2), c)
    coeffs = {k: v for k, v in coeffs.items() if v}
    return const, coeffs


def facet_vector(expr: BellExpression, side: str = "upper"):
    """Canonical integer vector of the nonnegative facet functional.

    side "upper": bound - expr >= 0; side "lower": expr - bound >= 0.  Only
    positive rescaling is allowed, so no sign normalization is applied
    beyond the functional's orientation.
    """
    if side == "upper":
        bound = expr.upper_bound
        if bound is None:
            _, bound = classical_bounds(expr)
        sign = -1
    elif side == "lower":
        bound = expr.lower_bound
        if bound is None:
            bound, _ = classical_bounds(expr)
        sign = 1
    else:
        raise ValueError(f"unknown side {side!r}")
    const, coeffs = cg_affine_form(expr)
    # h = sign * (expr - bound): the upper side gives bound - expr via sign=-1
    entries = [(("0",), sign * (const - bound))]
    for key in sorted(coeffs):
        entries.append((key, sign * coeffs[key]))
    nums = [v for _, v in entries if v]
    if not nums:
        return ((("0",), 0),)
    den = math.lcm(*(v.denominator for v in nums))
    g = math.gcd(*(abs(v.numerator * den // v.denominator) for v in nums))
    scale = Fraction(den, g)
    return tuple((k, int(v * scale)) for k, v in entries if v)


# ---------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    witness_map: Optional[RelabelingMap] = None
    side_a: Optional[str] = None
    side_b: Optional[str] = None


class EquivalenceLimitError(RuntimeError):
    def __init__(self, size: int):
        super().__init__(f"relabeling group of size {size} exceeds equivalence-check limit")
        self.size = size


def equivalence_check(
    expr_a: BellExpression,
    expr_b: BellExpression,
    limit: int = EQUIV_GROUP_LIMIT,
) -> EquivalenceVerdict:
    """Search the relabeling group for a map carrying A's facet onto B's."""
    scen_a, scen_b = expr_a.scenario, expr_b.scenario
    compatible = scen_a == scen_b or (
        scen_a.settings == scen_b.settings[::-1]
        and scen_a.outcomes == scen_b.outcomes[::-1]
    )
    if not compatible:
        return EquivalenceVerdict(equivalent=False)
    # the number of distinct deterministic values is invariant under
    # relabelings and affine re-expressions, so unequal counts settle it
    from .polytope import root_spectrum

    if root_spectrum(expr_a).count != root_spectrum(expr_b).count:
        return EquivalenceVerdict(equivalent=False)
    size = relabeling_group_size(scen_a)
    if size > limit:
        raise EquivalenceLimitError(size)
    targets = {}
    for side in ("upper", "lower"):
        targets[facet_vector(expr_b, side)] = side
    # carry A's bounds once; they are invariant under every relabeling
    lo, hi = classical_bounds(expr_a)
    base_a = expr_a.with_bounds(lo, hi) if (
        expr_a.upper_bound is None or expr_a.lower_bound is None
    ) else expr_a
    for rmap in iterate_relabelings(scen_a):
        moved = apply_relabeling(base_a, rmap)
        for side_a in ("upper", "lower"):
            vec = facet_vector(moved, side_a)
            if vec in targets:
                return EquivalenceVerdict(
                    equivalent=True,
                    witness_map=rmap,
                    side_a=side_a,
                    side_b=targets[vec],
                )
    return EquivalenceVerdict(equivalent=False)


# ---------------------------------------------------------------------------
# state sampling


ENSEMBLES = ("pure-Haar", "mixed-Hilbert-Schmidt", "mixed-Bures")


def sample_state(
    dims: tuple[int, int], ensemble: str, seed_or_rng
) -> QuantumState:
    """Random bipartite state; deterministic given the seed."""
    rng = (
        seed_or_rng
        if isinstance(seed_or_rng, np.random.Generator)
        else np.random.default_rng(seed_or_rng)
    )
    d = dims[0] * dims[1]
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if ensemble == "pure-Haar":
        v = g[:, 0]
        rho = np.outer(v, v.conj()) / (v.conj() @ v)
    elif ensemble == "mixed-Hilbert-Schmidt":
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
    elif ensemble == "mixed-Bures":
        u = _haar(d, rng)
        m = (np.eye(d) + u) @ g
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")
    return QuantumState(matrix=rho, dims=dims)


def _haar(d: int, rng) -> np.ndarray:
    from .quantum import haar_unitary

    return haar_unitary(d, rng)


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class OptimizationBudget:
    restarts: int = 20
    max_iters: int = 500
    tol: float = 1e-9
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "seed": self.seed,
        }


@dataclass
class RelevanceWitness:
    """State violating expression A while no violation of B was found."""

    state: QuantumState
    value_a: float
    value_b: float
    bound_a: float
    bound_b: float
    budget: OptimizationBudget
    exact_b: bool = False  # True when the B side is the closed-form CHSH value


_CHSH_KEY = None


def _is_chsh(expr: BellExpression) -> bool:
    global _CHSH_KEY
    if _CHSH_KEY is None:
        chsh = CorrelationExpression(
            scenario=Scenario(settings=(2, 2), outcomes=(2, 2)),
            coeffs={(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): -1},
        )
        _CHSH_KEY = canonical_key(chsh)
    try:
        return canonical_key(expr) == _CHSH_KEY
    except Exception:
        return False


def _upper_bound(expr: BellExpression) -> float:
    if expr.upper_bound is not None:
        return float(expr.upper_bound)
    return float(classical_bounds(expr)[1])


def _state_value(
    expr: BellExpression, state: QuantumState, budget: OptimizationBudget, seed: int
) -> tuple[float, bool]:
    """(best value found, exact?) for a state against an expression."""
    if _is_chsh(expr) and state.dims == (2, 2):
        return chsh_horodecki(state), True
    res = fixed_state_max(
        expr,
        state,
        restarts=budget.restarts,
        seed=seed,
        max_iters=budget.max_iters,
        tol=budget.tol,
    )
    return res.value, False


def verify_witness(
    state: QuantumState,
    expr_a: BellExpression,
    expr_b: BellExpression,
    budget: Optional[OptimizationBudget] = None,
) -> Optional[RelevanceWitness]:
    """Recompute both sides; return the witness when the state violates A
    and no violation of B was found at the budget, else None."""
    budget = budget or OptimizationBudget()
    bound_a = _upper_bound(expr_a)
    bound_b = _upper_bound(expr_b)
    va, _ = _state_value(expr_a, state, budget, budget.seed)
    vb, exact_b = _state_value(expr_b, state, budget, budget.seed + 1)
    if va > bound_a + WITNESS_MARGIN and vb <= bound_b:
        return RelevanceWitness(
            state=state,
            value_a=va,
            value_b=vb,
            bound_a=bound_a,
            bound_b=bound_b,
            budget=budget,
            exact_b=exact_b,
        )
    return None


def relevance_search(
    expr_a: BellExpression,
    expr_b: BellExpression,
    ensemble: str = "mixed-Hilbert-Schmidt",
    samples: int = 100,
    seed: int = 0,
    budget: Optional[OptimizationBudget] = None,
) -> list[tuple[str, RelevanceWitness]]:
    """Sampled relevance experiment between two inequalities.

    Returns direction-tagged witnesses: ("A>B", w) for states violating A
    but not B, and ("B>A", w) for the reverse.  An empty list is a valid
    outcome; it never certifies irrelevance.
    """
    budget = budget or OptimizationBudget()
    dims_a = _expr_dims(expr_a)
    dims_b = _expr_dims(expr_b)
    if dims_a != dims_b:
        raise ValueError(f"expressions live on different dimensions: {dims_a} vs {dims_b}")
    bound_a = _upper_bound(expr_a)
    bound_b = _upper_bound(expr_b)
    hits = []
    rng = np.random.default_rng(seed)
    for s in range(samples):
        state = sample_state(dims_a, ensemble, rng)
        va, _ = _state_value(expr_a, state, budget, budget.seed + 2 * s)
        vb, exact_b = _state_value(expr_b, state, budget, budget.seed + 2 * s + 1)
        if va > bound_a + WITNESS_MARGIN and vb <= bound_b:
            hits.append(
                (
                    "A>B",
                    RelevanceWitness(state, va, vb, bound_a, bound_b, budget, exact_b),
                )
            )
        elif vb > bound_b + WITNESS_MARGIN and va <= bound_a:
            hits.append(
                (
                    "B>A",
                    RelevanceWitness(state, vb, va, bound_b, bound_a, budget, False),
                )
            )
    return hits


def _expr_dims(expr: BellExpression) -> tuple[int, int]:
    if isinstance(expr, CorrelationExpression):
        return (2, 2)
    return tuple(expr.scenario.outcomes)
