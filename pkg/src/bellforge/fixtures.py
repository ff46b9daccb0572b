"""Named inequality and state fixtures used by the CLI and the test suite.

Expression fixtures carry their declared classical bounds; ``verify_catalog``
recomputes every declared bound exactly and reports mismatches.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from .family import generate_even, reduce_odd
from .polytope import classical_bounds
from .quantum import QuantumState, max_entangled, pure_state, schmidt_state
from .scenario import (
    BellExpression,
    CorrelationExpression,
    ProbabilityExpression,
    Scenario,
    mod_form_to_joint,
)


def _diff_form_to_joint(diff_coeffs, scenario, **kwargs) -> ProbabilityExpression:
    """Coefficient map over P(a_i - b_j = m mod d) expanded to joint terms."""
    d = scenario.outcomes[0]
    joint: dict = {}
    for (i, j, m), c in diff_coeffs.items():
        for a in range(d):
            key = (i, a, j, (a - m) % d)
            joint[key] = joint.get(key, Fraction(0)) + Fraction(c)
    return ProbabilityExpression(scenario=scenario, joint=joint, **kwargs)


def chsh() -> CorrelationExpression:
    return CorrelationExpression(
        scenario=Scenario(settings=(2, 2), outcomes=(2, 2)),
        coeffs={(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): -1},
        upper_bound=2,
        lower_bound=-2,
        name="chsh",
    )


def cg() -> ProbabilityExpression:
    """Three-setting two-qubit inequality in joint-probability form."""
    joint = {
        (1, 0, 1, 0): 1,
        (1, 0, 2, 0): 1,
        (1, 0, 3, 0): 1,
        (2, 0, 1, 0): 1,
        (3, 0, 1, 0): 1,
        (2, 0, 2, 0): 1,
        (2, 0, 3, 0): -1,
        (3, 0, 2, 0): -1,
    }
    return ProbabilityExpression(
        scenario=Scenario(settings=(3, 3), outcomes=(2, 2)),
        joint=joint,
        marg_a={(1, 0): -1},
        marg_b={(1, 0): -2, (2, 0): -1},
        upper_bound=0,
        name="cg",
    )


def i3_4() -> CorrelationExpression:
    """Three-setting inequality with the four-term uniform spectrum."""
    coeffs = {
        (2, 1): 1,
        (1, 2): 1,
        (3, 1): 1,
        (1, 3): 1,
        (3, 2): 1,
        (2, 3): 1,
        (1, 1): -1,
        (2, 2): -1,
        (1, 0): 1,
        (0, 1): 1,
        (2, 0): -1,
        (0, 2): -1,
    }
    return CorrelationExpression(
        scenario=Scenario(settings=(3, 3), outcomes=(2, 2)),
        coeffs=coeffs,
        upper_bound=4,
        lower_bound=-8,
        name="i3_4",
    )


def i4_4() -> CorrelationExpression:
    coeffs = {
        (1, 1): 1,
        (2, 2): 1,
        (1, 2): 1,
        (2, 1): 1,
        (1, 4): 1,
        (4, 1): 1,
        (2, 4): -1,
        (4, 2): -1,
        (3, 3): -2,
        (3, 1): 1,
        (1, 3): 1,
        (3, 2): 1,
        (2, 3): 1,
    }
    return CorrelationExpression(
        scenario=Scenario(settings=(4, 4), outcomes=(2, 2)),
        coeffs=coeffs,
        upper_bound=6,
        lower_bound=-6,
        name="i4_4",
    )


def i4_5() -> CorrelationExpression:
    coeffs = {
        (1, 0): 1,
        (0, 1): 1,
        (1, 2): -1,
        (2, 1): -1,
        (3, 3): 1,
        (4, 4): -1,
        (3, 1): 1,
        (1, 3): 1,
        (3, 2): 1,
        (2, 3): 1,
        (0, 4): -1,
        (4, 0): -1,
        (4, 1): 1,
        (1, 4): 1,
        (4, 3): 1,
        (3, 4): 1,
    }
    return CorrelationExpression(
        scenario=Scenario(settings=(4, 4), outcomes=(2, 2)),
        coeffs=coeffs,
        upper_bound=6,
        lower_bound=-10,
        name="i4_5",
    )


def i6() -> CorrelationExpression:
    expr = generate_even(3)
    return CorrelationExpression(
        scenario=expr.scenario, coeffs=expr.coeffs, upper_bound=12, name="i6"
    )


def i2n(n: int) -> CorrelationExpression:
    return generate_even(n)


def i2n1_red(n: int) -> CorrelationExpression:
    return reduce_odd(generate_even(n))


def i5_red() -> CorrelationExpression:
    expr = i2n1_red(3)
    return CorrelationExpression(
        scenario=expr.scenario, coeffs=expr.coeffs, upper_bound=12, name="i5_red"
    )


def i3_red() -> CorrelationExpression:
    expr = i2n1_red(2)
    return CorrelationExpression(
        scenario=expr.scenario, coeffs=expr.coeffs, upper_bound=6, name="i3_red"
    )


def cglmp3() -> ProbabilityExpression:
    """Two-setting two-qutrit inequality (d = 3 member of the standard
    two-setting qudit family), in joint-probability form."""
    diff = {
        (1, 1, 0): 1,
        (1, 1, 2): -1,
        (2, 1, 2): 1,
        (2, 1, 0): -1,
        (2, 2, 0): 1,
        (2, 2, 2): -1,
        (1, 2, 0): 1,
        (1, 2, 1): -1,
    }
    return _diff_form_to_joint(
        diff,
        Scenario(settings=(2, 2), outcomes=(3, 3)),
        upper_bound=2,
        name="cglmp3",
    )


def i3_qutrit() -> ProbabilityExpression:
    """Three-setting two-qutrit inequality with a four-term spectrum."""
    mod = {
        (1, 1, 0): -2,
        (1, 1, 1): 1,
        (1, 1, 2): 1,
        (1, 2, 0): 1,
        (1, 2, 2): -1,
        (2, 1, 0): 1,
        (2, 1, 2): -1,
        (1, 3, 1): 1,
        (1, 3, 2): -1,
        (3, 1, 1): 1,
        (3, 1, 2): -1,
        (2, 3, 1): 1,
        (2, 3, 2): -1,
        (3, 2, 1): 1,
        (3, 2, 2): -1,
        (3, 3, 0): 1,
        (3, 3, 1): -1,
    }
    return mod_form_to_joint(
        mod,
        Scenario(settings=(3, 3), outcomes=(3, 3)),
        upper_bound=4,
        name="i3_qutrit",
    )


def i3p_qutrit() -> ProbabilityExpression:
    """Three-setting two-qutrit inequality, not tight, bound 14."""
    mod = {
        (1, 1, 0): -1,
        (1, 1, 1): 1,
        (1, 2, 0): 4,
        (1, 2, 1): -4,
        (2, 1, 0): 4,
        (2, 1, 1): -4,
        (1, 3, 1): -3,
        (1, 3, 2): 3,
        (3, 1, 1): -3,
        (3, 1, 2): 3,
        (2, 2, 0): 7,
        (2, 2, 2): -7,
        (2, 3, 1): 3,
        (2, 3, 2): -3,
        (3, 2, 1): 3,
        (3, 2, 2): -3,
    }
    return mod_form_to_joint(
        mod,
        Scenario(settings=(3, 3), outcomes=(3, 3)),
        upper_bound=14,
        name="i3p_qutrit",
    )


EXPRESSIONS: dict[str, Callable[[], BellExpression]] = {
    "chsh": chsh,
    "cg": cg,
    "i3_4": i3_4,
    "i4_4": i4_4,
    "i4_5": i4_5,
    "i6": i6,
    "i5_red": i5_red,
    "i3_red": i3_red,
    "cglmp3": cglmp3,
    "i3_qutrit": i3_qutrit,
    "i3p_qutrit": i3p_qutrit,
}


def expression(name: str) -> BellExpression:
    """Look up a fixture; parametric names: i2n(n), i2n1_red(n)."""
    if name in EXPRESSIONS:
        return EXPRESSIONS[name]()
    for prefix, fn in (("i2n1_red(", i2n1_red), ("i2n(", i2n)):
        if name.startswith(prefix) and name.endswith(")"):
            return fn(int(name[len(prefix):-1]))
    raise KeyError(f"unknown expression fixture {name!r}")


# ---------------------------------------------------------------------------
# states


def rho_cg() -> QuantumState:
    psi = np.array([2, 0, 0, 1], dtype=complex) / np.sqrt(5)
    p01 = np.zeros(4, dtype=complex)
    p01[1] = 1.0
    rho = 0.85 * np.outer(psi, psi.conj()) + 0.15 * np.outer(p01, p01.conj())
    return QuantumState(matrix=rho, dims=(2, 2))


def rho_1() -> QuantumState:
    m = np.array(
        [
            [0.046125, -0.057737 + 0.017786j, -0.000649 - 0.092414j, 0.054845 + 0.071287j],
            [-0.057737 - 0.017786j, 0.146863, -0.039254 + 0.242031j, -0.103099 - 0.199746j],
            [-0.000649 + 0.092414j, -0.039254 - 0.242031j, 0.428573, -0.307414 + 0.244118j],
            [0.054845 - 0.071287j, -0.103099 + 0.199746j, -0.307414 - 0.244118j, 0.378439],
        ]
    )
    return QuantumState(matrix=m, dims=(2, 2))


STATES: dict[str, Callable[[], QuantumState]] = {
    "rho_cg": rho_cg,
    "rho_1": rho_1,
    "max_ent_2": lambda: max_entangled(2),
    "max_ent_3": lambda: max_entangled(3),
    "nonmax_2": lambda: schmidt_state([0.718824, 0.695192], 2),
    "nonmax_3a": lambda: schmidt_state([0.60297, 0.5641, 0.5641], 3),
    "nonmax_3b": lambda: schmidt_state([0.48876, 0.61689, 0.61689], 3),
}


def state(name: str) -> QuantumState:
    if name in STATES:
        return STATES[name]()
    raise KeyError(f"unknown state fixture {name!r}")


def verify_catalog() -> list[dict]:
    """Recompute every declared bound; a mismatch marks the row ok=False."""
    rows = []
    for name in EXPRESSIONS:
        expr = expression(name)
        lo, hi = classical_bounds(expr)
        ok = True
        if expr.upper_bound is not None and expr.upper_bound != hi:
            ok = False
        if expr.lower_bound is not None and expr.lower_bound != lo:
            ok = False
        rows.append(
            {
                "name": name,
                "declared_upper": None if expr.upper_bound is None else str(expr.upper_bound),
                "declared_lower": None if expr.lower_bound is None else str(expr.lower_bound),
                "computed_upper": str(hi),
                "computed_lower": str(lo),
                "ok": ok,
            }
        )
    for name in STATES:
        st = state(name)  # construction runs the validity checks
        rows.append({"name": name, "dims": list(st.dims), "ok": True})
    return rows
