"""Core data model: scenarios, deterministic strategies and Bell expressions.

Two coefficient conventions coexist and a pair of conversion routines bridge
them:

* correlation form (binary outcomes, values in {-1,+1}): a coefficient map
  indexed by one setting index per party, where index 0 means "party
  omitted", so marginal and constant terms live in the same map;
* joint-probability form (two parties, outcomes 0..d-1): joint coefficients
  ``(i, a, j, b)`` plus per-party marginal maps and a constant.

All classical-layer coefficients are exact ``Fraction``s.  Floating point is
confined to the quantum layer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence, Union


class ExpressionError(ValueError):
    """Malformed scenario, coefficient index or strategy."""


class EnumerationLimitError(RuntimeError):
    """The deterministic strategy space exceeds the configured cap."""

    def __init__(self, count: int, limit: int):
        super().__init__(
            f"strategy space of size {count} is too large for enumeration "
            f"(limit {limit})"
        )
        self.count = count
        self.limit = limit


Rational = Union[int, Fraction]


def _frac(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Scenario:
    """Measurement scenario: parties, settings per party, outcomes per party.

    All settings of one party share the same number of outcomes.
    """

    settings: tuple[int, ...]
    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(self.settings) != len(self.outcomes):
            raise ExpressionError("settings and outcomes lists differ in length")
        if self.parties < 2:
            raise ExpressionError("need at least 2 parties")
        if any(m < 1 for m in self.settings):
            raise ExpressionError("every party needs at least 1 setting")
        if any(d < 2 for d in self.outcomes):
            raise ExpressionError("every setting needs at least 2 outcomes")

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def strategy_count(self) -> int:
        return math.prod(d**m for d, m in zip(self.outcomes, self.settings))

    @property
    def is_binary(self) -> bool:
        return all(d == 2 for d in self.outcomes)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One outcome (0..d-1) per setting per party; a local polytope vertex.

    Outcomes are stored as 0-based labels.  For binary scenarios the
    correlation-form value of outcome ``a`` is ``1 - 2*a``, i.e. outcome 0
    maps to +1 and outcome 1 to -1.
    """

    outcomes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "outcomes", tuple(tuple(row) for row in self.outcomes)
        )

    def validate(self, scenario: Scenario) -> None:
        if len(self.outcomes) != scenario.parties:
            raise ExpressionError("strategy has wrong number of parties")
        for j, row in enumerate(self.outcomes):
            if len(row) != scenario.settings[j]:
                raise ExpressionError(f"party {j} has wrong number of settings")
            for k, a in enumerate(row):
                if not 0 <= a < scenario.outcomes[j]:
                    raise ExpressionError(
                        f"outcome {a} out of range for party {j} setting {k + 1}"
                    )

    def sign(self, party: int, setting: int) -> int:
        """Correlation-form value (+1/-1) of 1-based ``setting``; binary only."""
        return 1 - 2 * self.outcomes[party][setting - 1]

    def outcome(self, party: int, setting: int) -> int:
        return self.outcomes[party][setting - 1]


@dataclass(frozen=True)
class RootSpectrum:
    """Sorted distinct deterministic values of a Bell expression."""

    values: tuple[Fraction, ...]
    uniform: bool

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def span(self) -> tuple[Fraction, Fraction]:
        return (self.values[0], self.values[-1])

    @staticmethod
    def from_values(values) -> "RootSpectrum":
        vals = tuple(sorted(set(_frac(v) for v in values)))
        if len(vals) <= 2:
            uniform = True
        else:
            step = vals[1] - vals[0]
            uniform = all(b - a == step for a, b in zip(vals, vals[1:]))
        return RootSpectrum(values=vals, uniform=uniform)

    def scaled(self, factor: Fraction) -> "RootSpectrum":
        return RootSpectrum.from_values(v * factor for v in self.values)


@dataclass(frozen=True)
class CorrelationExpression:
    """Bell expression in correlation form (binary outcomes).

    ``coeffs`` maps an index tuple, one entry per party, to a rational
    coefficient.  Setting indices are 1-based; index 0 means the party is
    omitted, so ``(i, 0)`` is a party-A marginal and the all-zero tuple is
    the constant term.
    """

    scenario: Scenario
    coeffs: Mapping[tuple[int, ...], Fraction]
    upper_bound: Optional[Fraction] = None
    lower_bound: Optional[Fraction] = None
    name: str = ""

    def __post_init__(self):
        if not self.scenario.is_binary:
            raise ExpressionError("correlation form requires binary outcomes")
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(idx)
            if len(idx) != self.scenario.parties:
                raise ExpressionError(f"index {idx} has wrong arity")
            for j, k in enumerate(idx):
                if not 0 <= k <= self.scenario.settings[j]:
                    raise ExpressionError(
                        f"setting index {k} out of range for party {j} in {idx}"
                    )
            c = _frac(c)
            if c:
                clean[idx] = c
        object.__setattr__(self, "coeffs", clean)
        for attr in ("upper_bound", "lower_bound"):
            v = getattr(self, attr)
            if v is not None:
                object.__setattr__(self, attr, _frac(v))

    @property
    def form(self) -> str:
        return "correlation"

    def value_on(self, strategy: DeterministicStrategy) -> Fraction:
        total = Fraction(0)
        for idx, c in self.coeffs.items():
            prod = 1
            for party, k in enumerate(idx):
                if k:
                    prod *= strategy.sign(party, k)
            total += c * prod
        return total

    def with_bounds(self, lower: Rational, upper: Rational) -> "CorrelationExpression":
        return replace(self, lower_bound=_frac(lower), upper_bound=_frac(upper))

    def scaled(self, factor: Rational) -> "CorrelationExpression":
        f = _frac(factor)
        up, lo = _scaled_bounds(self.upper_bound, self.lower_bound, f)
        return replace(
            self,
            coeffs={k: c * f for k, c in self.coeffs.items()},
            upper_bound=up,
            lower_bound=lo,
        )


@dataclass(frozen=True)
class ProbabilityExpression:
    """Two-party Bell expression over joint and marginal probabilities.

    ``joint`` maps ``(i, a, j, b)`` to the coefficient of
    ``P(A_i = a, B_j = b)``; ``marg_a`` maps ``(i, a)`` to the coefficient of
    ``P(A_i = a)`` and likewise ``marg_b``.  Setting indices are 1-based,
    outcomes 0-based.
    """

    scenario: Scenario
    joint: Mapping[tuple[int, int, int, int], Fraction]
    marg_a: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    marg_b: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)
    upper_bound: Optional[Fraction] = None
    lower_bound: Optional[Fraction] = None
    name: str = ""

    def __post_init__(self):
        if self.scenario.parties != 2:
            raise ExpressionError("probability form supports exactly 2 parties")
        m1, m2 = self.scenario.settings
        d1, d2 = self.scenario.outcomes
        joint = {}
        for (i, a, j, b), c in self.joint.items():
            if not (1 <= i <= m1 and 1 <= j <= m2 and 0 <= a < d1 and 0 <= b < d2):
                raise ExpressionError(f"joint index {(i, a, j, b)} out of range")
            c = _frac(c)
            if c:
                joint[(i, a, j, b)] = c
        marg_a = {}
        for (i, a), c in self.marg_a.items():
            if not (1 <= i <= m1 and 0 <= a < d1):
                raise ExpressionError(f"A-marginal index {(i, a)} out of range")
            c = _frac(c)
            if c:
                marg_a[(i, a)] = c
        marg_b = {}
        for (j, b), c in self.marg_b.items():
            if not (1 <= j <= m2 and 0 <= b < d2):
                raise ExpressionError(f"B-marginal index {(j, b)} out of range")
            c = _frac(c)
            if c:
                marg_b[(j, b)] = c
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "marg_a", marg_a)
        object.__setattr__(self, "marg_b", marg_b)
        object.__setattr__(self, "constant", _frac(self.constant))
        for attr in ("upper_bound", "lower_bound"):
            v = getattr(self, attr)
            if v is not None:
                object.__setattr__(self, attr, _frac(v))

    @property
    def form(self) -> str:
        return "probability"

    def value_on(self, strategy: DeterministicStrategy) -> Fraction:
        total = self.constant
        av, bv = strategy.outcomes
        for (i, a), c in self.marg_a.items():
            if av[i - 1] == a:
                total += c
        for (j, b), c in self.marg_b.items():
            if bv[j - 1] == b:
                total += c
        for (i, a, j, b), c in self.joint.items():
            if av[i - 1] == a and bv[j - 1] == b:
                total += c
        return total

    def with_bounds(self, lower: Rational, upper: Rational) -> "ProbabilityExpression":
        return replace(self, lower_bound=_frac(lower), upper_bound=_frac(upper))

    def scaled(self, factor: Rational) -> "ProbabilityExpression":
        f = _frac(factor)
        up, lo = _scaled_bounds(self.upper_bound, self.lower_bound, f)
        return replace(
            self,
            joint={k: c * f for k, c in self.joint.items()},
            marg_a={k: c * f for k, c in self.marg_a.items()},
            marg_b={k: c * f for k, c in self.marg_b.items()},
            constant=self.constant * f,
            upper_bound=up,
            lower_bound=lo,
        )


BellExpression = Union[CorrelationExpression, ProbabilityExpression]


def _scaled_bounds(upper, lower, f: Fraction):
    """Scale declared bounds; a negative factor swaps their roles."""
    up = None if upper is None else upper * f
    lo = None if lower is None else lower * f
    if f < 0:
        up, lo = lo, up
    return up, lo


# ---------------------------------------------------------------------------
# strategy enumeration


def enumerate_strategies(
    scenario: Scenario, limit: Optional[int] = None
) -> Iterator[DeterministicStrategy]:
    """Yield every deterministic strategy exactly once, lexicographically.

    Order: outcome tuples of party 0 vary slowest, within a party the first
    setting varies slowest.  Raises :class:`EnumerationLimitError` when the
    strategy space exceeds ``limit`` (default 2**30, overridable).
    """
    limit = default_limit() if limit is None else limit
    count = scenario.strategy_count
    if count > limit:
        raise EnumerationLimitError(count, limit)
    per_party = [
        itertools.product(range(d), repeat=m)
        for d, m in zip(scenario.outcomes, scenario.settings)
    ]
    for combo in itertools.product(*per_party):
        yield DeterministicStrategy(outcomes=combo)


def default_limit() -> int:
    """Enumeration cap; the BELLFORGE_LIMIT environment variable overrides."""
    import os

    raw = os.environ.get("BELLFORGE_LIMIT")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ExpressionError(f"BELLFORGE_LIMIT is not an integer: {raw!r}")
    return 2**30


# ---------------------------------------------------------------------------
# conversions


def mod_form_to_joint(
    mod_coeffs: Mapping[tuple[int, int, int], Rational],
    scenario: Scenario,
    **kwargs,
) -> ProbabilityExpression:
    """Expand a mod-d coefficient map into a joint-probability expression.

    ``mod_coeffs`` maps ``(i, j, r)`` to the coefficient of the probability
    that the outcomes of ``A_i`` and ``B_j`` sum to ``r`` modulo ``d``.  Each
    such event is the disjoint union of the joint events
    ``(A_i = a, B_j = (r - a) mod d)`` over all outcomes ``a``, so each mod
    coefficient distributes over ``d`` joint coefficients.
    """
    if scenario.parties != 2:
        raise ExpressionError("mod form supports exactly 2 parties")
    d1, d2 = scenario.outcomes
    if d1 != d2:
        raise ExpressionError("mod form requires equal outcome counts")
    d = d1
    m1, m2 = scenario.settings
    joint: dict[tuple[int, int, int, int], Fraction] = {}
    for (i, j, r), c in mod_coeffs.items():
        if not (1 <= i <= m1 and 1 <= j <= m2 and 0 <= r < d):
            raise ExpressionError(f"mod index {(i, j, r)} out of range")
        c = _frac(c)
        for a in range(d):
            key = (i, a, j, (r - a) % d)
            joint[key] = joint.get(key, Fraction(0)) + c
    return ProbabilityExpression(scenario=scenario, joint=joint, **kwargs)


def correlation_to_probability(expr: CorrelationExpression) -> ProbabilityExpression:
    """Rewrite a two-party correlation expression over joint probabilities.

    Substitutes each dichotomic observable by the difference of its outcome
    projectors (outcome 0 -> +1, outcome 1 -> -1), so both forms take the
    same value on every deterministic strategy.  Declared bounds carry over.
    """
    if expr.scenario.parties != 2:
        raise ExpressionError("conversion implemented for 2 parties only")
    joint: dict[tuple[int, int, int, int], Fraction] = {}
    marg_a: dict[tuple[int, int], Fraction] = {}
    marg_b: dict[tuple[int, int], Fraction] = {}
    constant = Fraction(0)
    for (i, j), c in expr.coeffs.items():
        if i and j:
            for a in range(2):
                for b in range(2):
                    sgn = (1 - 2 * a) * (1 - 2 * b)
                    key = (i, a, j, b)
                    joint[key] = joint.get(key, Fraction(0)) + c * sgn
        elif i:
            for a in range(2):
                key = (i, a)
                marg_a[key] = marg_a.get(key, Fraction(0)) + c * (1 - 2 * a)
        elif j:
            for b in range(2):
                key = (j, b)
                marg_b[key] = marg_b.get(key, Fraction(0)) + c * (1 - 2 * b)
        else:
            constant += c
    return ProbabilityExpression(
        scenario=expr.scenario,
        joint=joint,
        marg_a=marg_a,
        marg_b=marg_b,
        constant=constant,
        upper_bound=expr.upper_bound,
        lower_bound=expr.lower_bound,
        name=expr.name,
    )


def correlation_from_matrix(
    matrix: Sequence[Sequence[Rational]],
    marg_a: Optional[Mapping[int, Rational]] = None,
    marg_b: Optional[Mapping[int, Rational]] = None,
    constant: Rational = 0,
    **kwargs,
) -> CorrelationExpression:
    """Build a correlation expression from the row-B / column-A matrix shorthand.

    ``matrix[m-1][k-1]`` is the coefficient of the joint term ``A_k B_m``.
    The matrix covers joint terms only; marginals, when present, are given
    explicitly as ``{setting: coeff}`` maps.
    """
    m2 = len(matrix)
    m1 = len(matrix[0])
    if any(len(row) != m1 for row in matrix):
        raise ExpressionError("ragged coefficient matrix")
    scenario = Scenario(settings=(m1, m2), outcomes=(2, 2))
    coeffs: dict[tuple[int, int], Fraction] = {}
    for m, row in enumerate(matrix, start=1):
        for k, c in enumerate(row, start=1):
            if c:
                coeffs[(k, m)] = _frac(c)
    for i, c in (marg_a or {}).items():
        coeffs[(i, 0)] = _frac(c)
    for j, c in (marg_b or {}).items():
        coeffs[(0, j)] = _frac(c)
    if constant:
        coeffs[(0, 0)] = _frac(constant)
    return CorrelationExpression(scenario=scenario, coeffs=coeffs, **kwargs)


# ---------------------------------------------------------------------------
# canonical form


def _coeff_items(expr: BellExpression):
    """All coefficients of an expression as (sort_key, value) pairs."""
    if isinstance(expr, CorrelationExpression):
        for idx in sorted(expr.coeffs):
            yield (0, idx), expr.coeffs[idx]
    else:
        if expr.constant:
            yield (0, ()), expr.constant
        for idx in sorted(expr.marg_a):
            yield (1, idx), expr.marg_a[idx]
        for idx in sorted(expr.marg_b):
            yield (2, idx), expr.marg_b[idx]
        for idx in sorted(expr.joint):
            yield (3, idx), expr.joint[idx]


def canonicalize(expr: BellExpression) -> tuple[BellExpression, Fraction]:
    """Return the canonical integer-normalized form and the scale taken out.

    Denominators are cleared, the gcd of the numerators divided out, and the
    overall sign fixed so the first nonzero coefficient in lexicographic
    index order is positive.  ``expr == scale * canonical`` (scale may be
    negative when the sign was flipped).
    """
    items = list(_coeff_items(expr))
    if not items:
        return expr, Fraction(1)
    den = math.lcm(*(c.denominator for _, c in items))
    num_gcd = math.gcd(*(abs(c.numerator * den // c.denominator) for _, c in items))
    scale = Fraction(num_gcd, den)
    if items[0][1] < 0:
        scale = -scale
    return expr.scaled(1 / scale), scale


def canonical_key(expr: BellExpression):
    """Hashable identity of the canonical form, for deduplication."""
    canon, _ = canonicalize(expr)
    return (canon.scenario, canon.form, tuple(_coeff_items(canon)))
