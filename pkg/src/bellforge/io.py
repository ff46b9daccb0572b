"""JSON interchange for Bell expressions.

The document format is exact: every coefficient and bound is a rational
encoded as ``{"num": int, "den": int}``; floats are rejected.  Index coding
per form:

* ``correlation`` -- ``idx`` has one setting index per party, 0 = omitted;
* ``probability`` -- ``idx`` is ``[i, a, j, b]``; ``j == 0`` marks an
  A-marginal ``[i, a, 0, 0]``, ``i == 0`` a B-marginal ``[0, 0, j, b]`` and
  ``[0, 0, 0, 0]`` the constant term;
* ``mod`` -- ``idx`` is ``[i, j, r]``; parsed documents expand to the
  probability form.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .scenario import (
    BellExpression,
    CorrelationExpression,
    ExpressionError,
    ProbabilityExpression,
    Scenario,
    mod_form_to_joint,
)


class ParseError(ValueError):
    """Document violates the interchange schema; carries a location path."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _require(cond: bool, location: str, message: str) -> None:
    if not cond:
        raise ParseError(location, message)


def _parse_rational(obj: Any, location: str) -> Fraction:
    _require(isinstance(obj, dict), location, "rational must be {num, den}")
    _require("num" in obj and "den" in obj, location, "rational must have num and den")
    num, den = obj["num"], obj["den"]
    _require(
        isinstance(num, int) and not isinstance(num, bool), location, "num must be int"
    )
    _require(
        isinstance(den, int) and not isinstance(den, bool), location, "den must be int"
    )
    _require(den != 0, location, "zero denominator")
    return Fraction(num, den)


def _emit_rational(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


def parse_expression(document: str | dict) -> BellExpression:
    """Parse an interchange document (JSON text or loaded dict)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError("$", f"invalid JSON: {exc}") from exc
    _require(isinstance(document, dict), "$", "top level must be an object")
    sc = document.get("scenario")
    _require(isinstance(sc, dict), "scenario", "missing scenario object")
    settings = sc.get("settings")
    outcomes = sc.get("outcomes")
    _require(
        isinstance(settings, list) and all(isinstance(x, int) for x in settings),
        "scenario.settings",
        "must be a list of ints",
    )
    _require(
        isinstance(outcomes, list) and all(isinstance(x, int) for x in outcomes),
        "scenario.outcomes",
        "must be a list of ints",
    )
    if "parties" in sc:
        _require(
            sc["parties"] == len(settings),
            "scenario.parties",
            "does not match settings length",
        )
    try:
        scenario = Scenario(settings=tuple(settings), outcomes=tuple(outcomes))
    except ExpressionError as exc:
        raise ParseError("scenario", str(exc)) from exc

    form = document.get("form")
    _require(
        form in ("correlation", "probability", "mod"),
        "form",
        f"unknown form {form!r}",
    )
    raw_coeffs = document.get("coeffs", [])
    _require(isinstance(raw_coeffs, list), "coeffs", "must be a list")

    bounds = document.get("bounds") or {}
    _require(isinstance(bounds, dict), "bounds", "must be an object or null")
    upper = bounds.get("upper")
    lower = bounds.get("lower")
    upper = None if upper is None else _parse_rational(upper, "bounds.upper")
    lower = None if lower is None else _parse_rational(lower, "bounds.lower")
    name = document.get("name", "")
    _require(isinstance(name, str), "name", "must be a string")

    entries = []
    for pos, entry in enumerate(raw_coeffs):
        loc = f"coeffs[{pos}]"
        _require(isinstance(entry, dict), loc, "entry must be an object")
        idx = entry.get("idx")
        _require(
            isinstance(idx, list) and all(isinstance(x, int) for x in idx),
            f"{loc}.idx",
            "must be a list of ints",
        )
        value = _parse_rational(entry, loc)
        entries.append((loc, tuple(idx), value))

    common = dict(upper_bound=upper, lower_bound=lower, name=name)
    try:
        if form == "correlation":
            coeffs: dict = {}
            for loc, idx, value in entries:
                _require(
                    len(idx) == scenario.parties,
                    f"{loc}.idx",
                    f"expected {scenario.parties} entries",
                )
                coeffs[idx] = coeffs.get(idx, Fraction(0)) + value
            return CorrelationExpression(scenario=scenario, coeffs=coeffs, **common)
        if form == "mod":
            mod: dict = {}
            for loc, idx, value in entries:
                _require(len(idx) == 3, f"{loc}.idx", "expected [i, j, r]")
                mod[idx] = mod.get(idx, Fraction(0)) + value
            return mod_form_to_joint(mod, scenario, **common)
        joint: dict = {}
        marg_a: dict = {}
        marg_b: dict = {}
        constant = Fraction(0)
        for loc, idx, value in entries:
            _require(len(idx) == 4, f"{loc}.idx", "expected [i, a, j, b]")
            i, a, j, b = idx
            if i == 0 and j == 0:
                _require(a == 0 and b == 0, f"{loc}.idx", "constant term is [0,0,0,0]")
                constant += value
            elif j == 0:
                _require(b == 0, f"{loc}.idx", "A-marginal is [i, a, 0, 0]")
                marg_a[(i, a)] = marg_a.get((i, a), Fraction(0)) + value
            elif i == 0:
                _require(a == 0, f"{loc}.idx", "B-marginal is [0, 0, j, b]")
                marg_b[(j, b)] = marg_b.get((j, b), Fraction(0)) + value
            else:
                joint[idx] = joint.get(idx, Fraction(0)) + value
        return ProbabilityExpression(
            scenario=scenario,
            joint=joint,
            marg_a=marg_a,
            marg_b=marg_b,
            constant=constant,
            **common,
        )
    except ExpressionError as exc:
        raise ParseError("coeffs", str(exc)) from exc


def expression_to_document(expr: BellExpression) -> dict:
    """Serialize to the interchange dict with a deterministic entry order."""
    doc: dict[str, Any] = {
        "scenario": {
            "parties": expr.scenario.parties,
            "settings": list(expr.scenario.settings),
            "outcomes": list(expr.scenario.outcomes),
        },
        "form": expr.form,
        "coeffs": [],
        "bounds": {
            "upper": None if expr.upper_bound is None else _emit_rational(expr.upper_bound),
            "lower": None if expr.lower_bound is None else _emit_rational(expr.lower_bound),
        },
        "name": expr.name,
    }
    if isinstance(expr, CorrelationExpression):
        for idx in sorted(expr.coeffs):
            doc["coeffs"].append({"idx": list(idx), **_emit_rational(expr.coeffs[idx])})
    else:
        if expr.constant:
            doc["coeffs"].append({"idx": [0, 0, 0, 0], **_emit_rational(expr.constant)})
        for (i, a) in sorted(expr.marg_a):
            doc["coeffs"].append(
                {"idx": [i, a, 0, 0], **_emit_rational(expr.marg_a[(i, a)])}
            )
        for (j, b) in sorted(expr.marg_b):
            doc["coeffs"].append(
                {"idx": [0, 0, j, b], **_emit_rational(expr.marg_b[(j, b)])}
            )
        for idx in sorted(expr.joint):
            doc["coeffs"].append({"idx": list(idx), **_emit_rational(expr.joint[idx])})
    return doc


def serialize_expression(expr: BellExpression, indent: Optional[int] = None) -> str:
    return json.dumps(expression_to_document(expr), indent=indent)
