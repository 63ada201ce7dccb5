"""
Truncated arithmetic in the Novikov field.

A scalar is a finite sum of terms a_i T^{e_i} with exact rational exponents and complex
coefficients, known up to a precision E: every exponent at or above E is unknown and is
never stored. Exactly known finite sums carry precision ``INFINITY``.
"""

import logging
import math
import numbers
from collections import namedtuple
from fractions import Fraction

import numpy as np

from eqmirror.config import NovikovDefaults, setting
from eqmirror.errors import ConvergenceError, InputError, NovikovZeroDivisionError

logger = logging.getLogger(__name__)

INFINITY = math.inf

NewtonSegment = namedtuple("NewtonSegment", ["valuation", "multiplicity", "leading_equation"])
LeadingRoot = namedtuple("LeadingRoot", ["coefficient", "multiplicity"])
NovikovRoot = namedtuple("NovikovRoot", ["value", "multiplicity"])


def as_exponent(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1_000_000)
    return Fraction(value)


def as_precision(value):
    if value == INFINITY:
        return INFINITY
    return as_exponent(value)


class NovikovScalar:
    """
    ``noise`` bounds the accumulated floating error of each coefficient, exponent by exponent.
    A coefficient within tolerance plus noise of zero is indistinguishable from zero.
    """

    __slots__ = ("terms", "precision", "tolerance", "noise")

    def __init__(self, terms=(), precision=None, tolerance=None, noise=None):
        self.tolerance = setting(NovikovDefaults, "zeroTolerance", tolerance)
        self.precision = as_precision(setting(NovikovDefaults, "precision", precision))

        if isinstance(terms, dict):
            terms = terms.items()

        collected = {}
        for (exponent, coefficient) in terms:
            exponent = as_exponent(exponent)
            if exponent >= self.precision:
                continue
            collected[exponent] = collected.get(exponent, 0) + complex(coefficient)

        bounds = {}
        for (exponent, bound) in (noise or {}).items():
            if exponent < self.precision and bound > 0:
                bounds[exponent] = bounds.get(exponent, 0.0) + bound
        for (exponent, c) in collected.items():
            if 0 < abs(c) <= self.tolerance:
                bounds[exponent] = bounds.get(exponent, 0.0) + abs(c)

        self.terms = tuple(
            (e, c) for (e, c) in sorted(collected.items()) if abs(c) > self.tolerance
        )
        self.noise = bounds

    @classmethod
    def constant(cls, value, precision=INFINITY, tolerance=None):
        return cls([(0, value)], precision=precision, tolerance=tolerance)

    @classmethod
    def monomial(cls, coefficient, exponent, precision=INFINITY, tolerance=None):
        return cls([(exponent, coefficient)], precision=precision, tolerance=tolerance)

    @classmethod
    def zero(cls, precision=INFINITY, tolerance=None):
        return cls([], precision=precision, tolerance=tolerance)

    @property
    def is_zero(self):
        return len(self.terms) == 0

    @property
    def valuation(self):
        return self.terms[0][0] if self.terms else INFINITY

    @property
    def leading(self):
        return self.terms[0][1] if self.terms else None

    def in_lambda0(self):
        return self.valuation >= 0

    def in_lambda_plus(self):
        return self.valuation > 0

    def is_negligible(self, tolerance=None):
        tolerance = self.tolerance if tolerance is None else tolerance
        return all(abs(c) < tolerance + self.noise.get(e, 0.0) for (e, c) in self.terms)

    def settled(self):
        """Drops every exponent from the first one whose rounding noise exceeds the tolerance"""
        unreliable = [e for (e, bound) in self.noise.items() if bound > self.tolerance]
        if not unreliable:
            return self
        precision = min(unreliable)
        logger.debug("rounding noise cuts T^%s down to T^%s", self.precision, precision)
        return NovikovScalar(
            self.terms, precision=precision, tolerance=self.tolerance, noise=self.noise
        )

    def without_noise(self):
        return NovikovScalar(self.terms, precision=self.precision, tolerance=self.tolerance)

    def magnitude(self):
        """Largest retained coefficient modulus, zero for the zero scalar"""
        return max((abs(c) for (_, c) in self.terms), default=0.0)

    def coefficient(self, exponent):
        exponent = as_exponent(exponent)
        if exponent >= self.precision:
            raise InputError(
                "exponent {} is beyond the precision {}".format(exponent, self.precision)
            )
        for (e, c) in self.terms:
            if e == exponent:
                return c
        return 0j

    def shift(self, exponent):
        """Multiplies by T^exponent"""
        exponent = as_exponent(exponent)
        return NovikovScalar(
            [(e + exponent, c) for (e, c) in self.terms],
            precision=self.precision + exponent,
            tolerance=self.tolerance,
            noise={e + exponent: bound for (e, bound) in self.noise.items()},
        )

    def scale(self, factor):
        roundoff = setting(NovikovDefaults, "roundoff")
        size = abs(complex(factor))
        noise = {e: bound * size for (e, bound) in self.noise.items()}
        for (e, c) in self.terms:
            noise[e] = noise.get(e, 0.0) + roundoff * abs(c) * size
        return NovikovScalar(
            [(e, c * factor) for (e, c) in self.terms],
            precision=self.precision,
            tolerance=self.tolerance,
            noise=noise,
        )

    def truncate(self, precision):
        return truncate(self, precision)

    def approx(self, other, tolerance=None):
        return (self - other).is_negligible(tolerance)

    def _coerce(self, other):
        if isinstance(other, NovikovScalar):
            return other
        if isinstance(other, numbers.Number):
            return NovikovScalar.constant(other, tolerance=self.tolerance)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith(self, other, "sub")

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith(other, self, "sub")

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return arith(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return divide(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return divide(other, self)

    def __neg__(self):
        return arith(self, None, "neg")

    def __pow__(self, exponent):
        return power(self, exponent)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms and self.precision == other.precision

    __hash__ = None

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return "NovikovScalar({})".format(self)

    def __str__(self):
        parts = [_format_term(e, c) for (e, c) in self.terms]
        if self.precision != INFINITY:
            parts.append("O(T^{{{}}})".format(self.precision))
        return " + ".join(parts) if parts else "0"


def _format_term(exponent, coefficient):
    if abs(coefficient.imag) <= 1e-15:
        text = "{:g}".format(coefficient.real)
    else:
        text = "({:g}{:+g}i)".format(coefficient.real, coefficient.imag)
    if exponent == 0:
        return text
    return "{}T^{{{}}}".format(text, exponent)


def _spread(a):
    magnitude = {e: abs(c) for (e, c) in a.terms}
    return [(e, magnitude.get(e, 0.0), a.noise.get(e, 0.0)) for e in set(magnitude) | set(a.noise)]


def _sum_noise(a, b, roundoff):
    noise = dict(a.noise)
    for (e, bound) in b.noise.items():
        noise[e] = noise.get(e, 0.0) + bound
    left = dict(a.terms)
    for (e, c) in b.terms:
        if e in left:
            noise[e] = noise.get(e, 0.0) + roundoff * (abs(left[e]) + abs(c))
    return noise


def _product_noise(a, b, precision, noise):
    # first order in either factor's noise, plus their product
    for (ea, ma, na) in _spread(a):
        for (eb, mb, nb) in _spread(b):
            exponent = ea + eb
            if exponent < precision and (na or nb):
                noise[exponent] = noise.get(exponent, 0.0) + na * mb + ma * nb + na * nb
    return noise


def arith(a, b, op):
    if op == "neg":
        return NovikovScalar(
            [(e, -c) for (e, c) in a.terms],
            precision=a.precision,
            tolerance=a.tolerance,
            noise=a.noise,
        )

    roundoff = setting(NovikovDefaults, "roundoff")
    if op in ("add", "sub"):
        sign = 1 if op == "add" else -1
        terms = list(a.terms) + [(e, sign * c) for (e, c) in b.terms]
        return NovikovScalar(
            terms,
            precision=min(a.precision, b.precision),
            tolerance=a.tolerance,
            noise=_sum_noise(a, b, roundoff),
        )

    if op == "mul":
        if a.is_zero and b.is_zero:
            precision = a.precision + b.precision
        else:
            precision = min(a.precision + b.valuation, b.precision + a.valuation)

        products = {}
        sizes = {}
        for (ea, ca) in a.terms:
            for (eb, cb) in b.terms:
                exponent = ea + eb
                if exponent < precision:
                    products[exponent] = products.get(exponent, 0) + ca * cb
                    (count, size) = sizes.get(exponent, (0, 0.0))
                    sizes[exponent] = (count + 1, size + abs(ca * cb))
        # a running sum of n products rounds n times
        noise = {e: roundoff * count * size for (e, (count, size)) in sizes.items()}
        if a.noise or b.noise:
            noise = _product_noise(a, b, precision, noise)
        return NovikovScalar(products, precision=precision, tolerance=a.tolerance, noise=noise)

    raise InputError("unknown operation {}".format(op))


def valuation_leading(a):
    """Returns the valuation and the leading coefficient; the zero scalar gives (inf, None)"""
    return (a.valuation, a.leading)


def truncate(a, precision):
    precision = as_precision(precision)
    if precision > a.precision:
        raise InputError("cannot refine by truncation")
    return NovikovScalar(a.terms, precision=precision, tolerance=a.tolerance, noise=a.noise)


def _working_precision(precision, cap=None):
    if precision == INFINITY:
        return as_precision(setting(NovikovDefaults, "precision", cap))
    return precision


def inverse(a, cap=None):
    if a.is_zero:
        raise NovikovZeroDivisionError("division by zero scalar")

    (v, c) = a.terms[0]
    relative = _working_precision(a.precision - v, cap)
    # a = c T^v (1 + r) with val(r) > 0
    unit = a.shift(-v).scale(1 / c)
    r = NovikovScalar(
        [(e, coefficient) for (e, coefficient) in unit.terms if e > 0],
        precision=relative,
        tolerance=a.tolerance,
        noise=unit.noise,
    )

    total = NovikovScalar.constant(1, precision=relative, tolerance=a.tolerance)
    term = total
    while not r.is_zero:
        term = term * -r
        if term.is_zero or term.valuation >= relative:
            break
        total = total + term

    return total.scale(1 / c).shift(-v)


def divide(a, b):
    return a * inverse(b)


def power(a, n):
    if n < 0:
        return power(inverse(a), -n)

    result = NovikovScalar.constant(1, tolerance=a.tolerance)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _series(a, coefficient, start, cap=None):
    precision = _working_precision(a.precision, cap)
    a = NovikovScalar(a.terms, precision=precision, tolerance=a.tolerance, noise=a.noise)
    total = NovikovScalar.zero(precision=precision, tolerance=a.tolerance)
    if start == 0:
        total = total + coefficient(0)
    if a.is_zero:
        return total

    term = NovikovScalar.constant(1, precision=precision, tolerance=a.tolerance)
    k = 0
    while True:
        k += 1
        term = term * a
        if term.is_zero or term.valuation >= precision:
            return total
        total = total + term.scale(coefficient(k))


def exp_log(a, op, cap=None):
    if not a.in_lambda_plus():
        raise InputError("argument not in Λ₊")

    if op == "exp_plus":
        return _series(a, lambda k: 1 / math.factorial(k), 0, cap)
    if op == "log_one_plus":
        return _series(a, lambda k: (-1) ** (k - 1) / k, 1, cap)
    raise InputError("unknown series {}".format(op))


def exp_plus(a, cap=None):
    return exp_log(a, "exp_plus", cap)


def log_one_plus(a, cap=None):
    return exp_log(a, "log_one_plus", cap)


def as_scalar(value):
    if isinstance(value, NovikovScalar):
        return value
    return NovikovScalar.constant(value)


class NovikovPolynomial:
    """Polynomial in one variable X over the Novikov field, coefficients indexed by degree"""

    def __init__(self, coefficients):
        coefficients = [as_scalar(c) for c in coefficients]
        while coefficients and coefficients[-1].is_zero:
            coefficients.pop()
        self.coefficients = tuple(coefficients)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def evaluate(self, x):
        x = as_scalar(x)
        if not self.coefficients:
            return NovikovScalar.zero()
        result = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            result = result * x + c
        return result

    __call__ = evaluate

    def derivative(self):
        return NovikovPolynomial([c.scale(i) for (i, c) in enumerate(self.coefficients)][1:])

    def __repr__(self):
        terms = ["({})X^{}".format(c, i) for (i, c) in enumerate(self.coefficients) if c]
        return "NovikovPolynomial({})".format(" + ".join(terms) or "0")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_convex_hull(points):
    hull = []
    for point in sorted(points):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) <= 0:
            hull.pop()
        hull.append(point)
    return hull


def newton_polygon(p):
    """
    Lower Newton polygon of p. Each segment reports the valuation of the roots it accounts
    for, their number, and the leading equation whose nonzero roots are the candidate
    leading coefficients (ascending coefficient list).
    """
    points = [(i, c.valuation) for (i, c) in enumerate(p.coefficients) if not c.is_zero]
    if p.degree < 1 or not points:
        raise InputError("zero or constant polynomial has no Newton polygon")

    hull = lower_convex_hull(points)
    segments = []
    for ((i, vi), (j, vj)) in zip(hull, hull[1:]):
        valuation = Fraction(vi - vj) / (j - i)
        leading = [0j] * (j - i + 1)
        for k in range(i, j + 1):
            c = p.coefficients[k]
            if not c.is_zero and c.valuation + k * valuation == vi + i * valuation:
                leading[k - i] = c.leading
        segments.append(NewtonSegment(valuation, j - i, tuple(leading)))

    if points[0][0] > 0:
        logger.debug("polynomial has a root at zero of multiplicity %s", points[0][0])

    return segments


def leading_roots(segment, tolerance=None):
    """
    Roots of a segment's leading equation from the eigenvalues of its companion matrix.
    Roots closer than the merge tolerance are reported once with their multiplicity.
    """
    tolerance = setting(NovikovDefaults, "rootMergeTolerance", tolerance)
    coefficients = np.array(segment.leading_equation, dtype=complex)
    degree = len(coefficients) - 1
    monic = coefficients[:-1] / coefficients[-1]

    companion = np.zeros((degree, degree), dtype=complex)
    companion[1:, :-1] = np.eye(degree - 1)
    companion[:, -1] = -monic
    eigenvalues = np.linalg.eigvals(companion)

    clusters = []
    for root in sorted(eigenvalues, key=lambda z: (-round(z.real, 9), -round(z.imag, 9))):
        for cluster in clusters:
            if abs(cluster[0] - root) < tolerance:
                cluster.append(root)
                break
        else:
            clusters.append([root])

    return [LeadingRoot(complex(np.mean(c)), len(c)) for c in clusters]


def _seed_segment(p, exponent):
    for segment in newton_polygon(p):
        if segment.valuation == exponent:
            return segment
    return None


def newton_root(p, seed, target_precision=None, tolerance=None, max_iterations=None):
    """
    Lifts a simple root of a leading equation, given as (exponent, coefficient), to a root
    of p known up to target_precision.
    """
    target = as_precision(setting(NovikovDefaults, "precision", target_precision))
    max_iterations = setting(NovikovDefaults, "maxNewtonIterations", max_iterations)
    merge = setting(NovikovDefaults, "rootMergeTolerance", None)
    (exponent, coefficient) = (as_exponent(seed[0]), complex(seed[1]))

    segment = _seed_segment(p, exponent)
    if segment is None:
        raise ConvergenceError("seed not Hensel-liftable: no root of valuation {}".format(exponent))
    matches = [r for r in leading_roots(segment) if abs(r.coefficient - coefficient) < merge]
    if len(matches) != 1 or matches[0].multiplicity != 1:
        raise ConvergenceError("seed not Hensel-liftable")

    x = NovikovScalar.monomial(coefficient, exponent, precision=target, tolerance=tolerance)
    slope = p.derivative()
    for iteration in range(max_iterations):
        # only the latest step's rounding bounds the error of the iterate
        x = x.without_noise()
        step = divide(p(x), slope(x))
        x = x - step
        if step.is_negligible():
            logger.debug("newton root converged after %s iterations", iteration)
            break
    else:
        raise ConvergenceError("no convergence within {} iterations".format(max_iterations))

    x = x.settled()

    if x.precision > target:
        x = truncate(x, target)
    elif x.precision < target:
        logger.warning("root is only known up to T^%s, requested T^%s", x.precision, target)

    if x.valuation != exponent or abs(x.leading - coefficient) > merge * max(1, abs(coefficient)):
        raise ConvergenceError("newton iteration left the seed's basin")

    return x


def polynomial_roots(p, target_precision=None, merge_tolerance=None):
    """
    Nonzero roots of p with their multiplicities. A repeated leading root is lifted on the
    derivative in which it is simple, and must then annihilate p itself.
    """
    roots = []
    for segment in newton_polygon(p):
        for leading in leading_roots(segment, merge_tolerance):
            q = p
            for _ in range(leading.multiplicity - 1):
                q = q.derivative()
            x = newton_root(q, (segment.valuation, leading.coefficient), target_precision)
            if leading.multiplicity > 1 and not p(x).is_negligible():
                raise ConvergenceError(
                    "{} roots near {}T^{} do not coincide".format(
                        leading.multiplicity, leading.coefficient, segment.valuation
                    )
                )
            roots.append(NovikovRoot(x, leading.multiplicity))
    return roots
