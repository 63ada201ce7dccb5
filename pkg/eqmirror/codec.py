"""
JSON encodings shared by the command line and the tests.

Novikov literals are ``{"precision": [num, den], "terms": [[exp_num, exp_den, re, im], ...]}``.
A ``null`` precision marks an exactly known scalar. Shorthand literals such as ``T``,
``2T^{1/2}``, ``iT`` or ``1 - T^{3/4}`` are accepted on input; only the canonical JSON form
is ever emitted.
"""

import json
import math
import numbers
import re
from fractions import Fraction

import sympy

from eqmirror.config import NovikovDefaults, setting
from eqmirror.errors import InputError
from eqmirror.novikov import INFINITY, NovikovScalar

_TERM = re.compile(
    r"^(?P<coefficient>.*?)"
    r"(?P<variable>\*?T(?:\^\{(?P<braced>[^}]+)\}|\^(?P<bare>[-+]?[0-9]+(?:/[0-9]+)?))?)?$"
)


def rational_to_json(value):
    value = Fraction(value)
    return [value.numerator, value.denominator]


def rational_from_json(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InputError("rationals are [num, den] pairs, got {}".format(value))
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1_000_000)
    try:
        return Fraction(value)
    except (TypeError, ValueError) as e:
        raise InputError("not a rational: {}".format(value)) from e


def complex_to_json(value):
    value = complex(value)
    return [value.real, value.imag]


def scalar_to_json(a):
    return {
        "precision": None if a.precision == INFINITY else rational_to_json(a.precision),
        "terms": [rational_to_json(e) + complex_to_json(c) for (e, c) in a.terms],
    }


def scalar_from_json(obj, precision=None):
    try:
        if "precision" in obj and obj["precision"] is None:
            limit = INFINITY
        elif "precision" in obj:
            limit = rational_from_json(obj["precision"])
        else:
            limit = setting(NovikovDefaults, "precision", precision)
        terms = [
            (Fraction(int(en), int(ed)), complex(float(re_), float(im)))
            for (en, ed, re_, im) in obj.get("terms", [])
        ]
    except (TypeError, ValueError, KeyError) as e:
        raise InputError("malformed Novikov literal: {}".format(obj)) from e
    return NovikovScalar(terms, precision=limit)


def _split_top_level(text, separators):
    parts = []
    depth = 0
    current = ""
    for (i, char) in enumerate(text):
        if char in "({[":
            depth += 1
        elif char in ")}]":
            depth -= 1
        if (
            depth == 0
            and char in separators
            and current.strip()
            and not current.rstrip().endswith(("^", "e", "E", "*"))
        ):
            parts.append(current)
            current = "" if char == "," else char
            continue
        current += char
    if current.strip():
        parts.append(current)
    return [p.strip() for p in parts]


def _parse_coefficient(text):
    text = text.strip().rstrip("*")
    if text in ("", "+"):
        return 1
    if text == "-":
        return -1
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    if text in ("i", "+i"):
        return 1j
    if text == "-i":
        return -1j
    if "i" in text or "j" in text:
        return complex(text.replace(" ", "").replace("i", "j"))
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def parse_shorthand(text, precision=None):
    terms = []
    for part in _split_top_level(text.replace(" ", ""), "+-"):
        match = _TERM.match(part)
        if match is None:
            raise InputError("cannot parse term '{}'".format(part))
        try:
            coefficient = _parse_coefficient(match.group("coefficient"))
        except ValueError as e:
            raise InputError("cannot parse coefficient in '{}'".format(part)) from e
        if match.group("variable"):
            exponent = Fraction(match.group("braced") or match.group("bare") or 1)
        else:
            exponent = Fraction(0)
        terms.append((exponent, coefficient))

    if not terms:
        raise InputError("empty scalar literal")
    return NovikovScalar(terms, precision=setting(NovikovDefaults, "precision", precision))


def parse_scalar(value, precision=None):
    if isinstance(value, NovikovScalar):
        return value
    if isinstance(value, dict):
        return scalar_from_json(value, precision)
    if isinstance(value, numbers.Number):
        precision = setting(NovikovDefaults, "precision", precision)
        return NovikovScalar.constant(value, precision=precision)
    if isinstance(value, str):
        text = value.strip()
        if text.startswith("{"):
            try:
                return scalar_from_json(json.loads(text), precision)
            except json.JSONDecodeError as e:
                raise InputError("malformed Novikov literal: {}".format(text)) from e
        return parse_shorthand(text, precision)
    raise InputError("cannot read a Novikov scalar from {!r}".format(value))


def parse_scalar_list(value, precision=None):
    if isinstance(value, str):
        text = value.strip()
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            if not (text.startswith("[") and text.endswith("]")):
                raise InputError("expected a bracketed list of scalars, got {}".format(text))
            value = _split_top_level(text[1:-1], ",")
    if not isinstance(value, list):
        raise InputError("expected a list of scalars")
    return [parse_scalar(v, precision) for v in value]


def parse_polynomial(value, variables):
    """Reads a polynomial given as a sympy-parsable string or as [[exponents, coefficient], ...]"""
    from eqmirror.mf import Polynomial

    if isinstance(value, Polynomial):
        return value
    if isinstance(value, list):
        terms = {}
        for (exponents, coefficient) in value:
            if isinstance(coefficient, str):
                coefficient = parse_scalar(coefficient)
            else:
                coefficient = value_from_json(coefficient)
            terms[tuple(int(e) for e in exponents)] = coefficient
        return Polynomial(terms, len(variables))

    try:
        symbols = sympy.symbols(list(variables))
        expression = sympy.sympify(str(value), locals={str(s): s for s in symbols})
        poly = sympy.Poly(expression, *symbols)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as e:
        raise InputError("cannot parse polynomial '{}'".format(value)) from e

    terms = {}
    for (exponents, coefficient) in poly.terms():
        if not coefficient.is_Rational:
            raise InputError("polynomial coefficients must be rational: {}".format(coefficient))
        terms[tuple(exponents)] = Fraction(int(coefficient.p), int(coefficient.q))
    return Polynomial(terms, len(variables))


def _default(value):
    if isinstance(value, NovikovScalar):
        return scalar_to_json(value)
    if isinstance(value, Fraction):
        return rational_to_json(value)
    if isinstance(value, sympy.Rational):
        return [int(value.p), int(value.q)]
    if isinstance(value, complex):
        return complex_to_json(value)
    if isinstance(value, float) and math.isinf(value):
        return None
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError("cannot serialize {!r}".format(value))


def _normalize(value):
    # json.dumps only calls default for unknown types; floats inf and tuples need a pass first
    if isinstance(value, dict):
        return {str(k): _normalize(v) for (k, v) in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return None
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value
    return _normalize(_default(value))


def dumps(report, indent=None):
    return json.dumps(_normalize(report), sort_keys=True, indent=indent)


def value_to_json(value):
    """Operation values: ints stay ints, rationals are [num, den], complex is tagged"""
    if isinstance(value, NovikovScalar):
        return scalar_to_json(value)
    if isinstance(value, complex):
        return {"complex": [value.real, value.imag]}
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, sympy.Rational):
        return [int(value.p), int(value.q)]
    return rational_to_json(value)


def value_from_json(value):
    if isinstance(value, dict) and "terms" in value:
        return scalar_from_json(value)
    if isinstance(value, dict) and "complex" in value:
        (re_, im) = value["complex"]
        return complex(re_, im)
    if isinstance(value, list):
        return rational_from_json(value)
    if isinstance(value, (int, float)):
        return value
    raise InputError("cannot read a value from {!r}".format(value))
