"""
Equivariant Floer model algebras of the circle fibers of CP1 and C, and the matching of their
branes with critical points of the equivariant potential.

A disk class is recorded by its boundary pairing a = <e1, d beta> and the constant part of its
energy, so that omega(beta) = offset + a u on the fiber at u. With the variable
X = T^u c0 exp(b_+) the class contributes T^offset X^a to the potential W, and with d = X d/dX

    d^k W = sum_beta a^k T^offset X^a,    F = W - lambda log X.
"""

import cmath
import logging
import math
from collections import namedtuple
from fractions import Fraction

from eqmirror.ainfty import (
    ZERO_CLASS,
    BoundingCochainCandidate,
    GappedAInfty,
    GappedMonoid,
    curvature,
    deform,
    evaluate_lambda,
)
from eqmirror.codec import rational_to_json
from eqmirror.config import MirrorDefaults, setting
from eqmirror.equivariant import GDiffSpace
from eqmirror.errors import HypothesisViolation, InputError
from eqmirror.mf import clifford_algebra
from eqmirror.novikov import (
    NovikovPolynomial,
    NovikovScalar,
    as_exponent,
    as_scalar,
    exp_plus,
    log_one_plus,
    polynomial_roots,
    power,
    truncate,
)

logger = logging.getLogger(__name__)

DiskClass = namedtuple("DiskClass", ["name", "pairing", "offset"])
PotentialValue = namedtuple("PotentialValue", ["X", "lam"])
CliffordMatch = namedtuple("CliffordMatch", ["product", "parameter", "match"])
BraneCategory = namedtuple("BraneCategory", ["homs", "endomorphisms", "curvatures"])

# Unit first, then the invariant one-form of the circle
UNIT = 0
E1 = 1


class ToricMirrorGeometry:
    def __init__(self, kind, classes, bounded):
        self.kind = kind
        self.classes = tuple(classes)
        # Moment interval (0, 1) for CP1, (0, inf) for C
        self.bounded = bounded

    @classmethod
    def cp1(cls):
        classes = [DiskClass("beta1", 1, Fraction(0)), DiskClass("beta2", -1, Fraction(1))]
        return cls("CP1", classes, True)

    @classmethod
    def c(cls):
        return cls("C", [DiskClass("beta", 1, Fraction(0))], False)

    @classmethod
    def from_name(cls, name):
        presets = {"cp1": cls.cp1, "c": cls.c}
        if name.lower() not in presets:
            raise InputError("unknown geometry '{}', expected cp1 or c".format(name))
        return presets[name.lower()]()

    def energy(self, beta, u):
        return beta.offset + beta.pairing * as_exponent(u)

    def admits(self, u):
        return u > 0 and (u < 1 if self.bounded else True)

    @property
    def clearing(self):
        """Power of X clearing denominators of dF"""
        return max(0, -min(beta.pairing for beta in self.classes))

    def to_json(self):
        return {
            "kind": self.kind,
            "classes": [
                {"name": b.name, "pairing": b.pairing, "offset": rational_to_json(b.offset)}
                for b in self.classes
            ],
        }


def _clean(value):
    tolerance = setting(MirrorDefaults, "degenerateTolerance")
    value = complex(value)
    (re_, im) = (value.real, value.imag)
    if abs(im) < tolerance:
        im = 0.0
    if abs(re_) < tolerance:
        re_ = 0.0
    return complex(re_ + 0.0, im + 0.0)


class Brane:
    """The fiber at u with flat connection of holonomy c0 and bounding cochain (b0 + b_+) e1"""

    def __init__(self, geometry, u, c0, b_plus=None, b0=None):
        self.geometry = geometry
        self.u = as_exponent(u)
        self.c0 = _clean(c0)
        self.b_plus = as_scalar(b_plus if b_plus is not None else 0)
        self.b0 = cmath.log(self.c0) if b0 is None and self.c0 != 0 else b0

        if not geometry.admits(self.u):
            raise InputError("no {} fiber at u = {}".format(geometry.kind, self.u))
        if self.c0 == 0:
            raise InputError("the holonomy c0 must be nonzero")
        if not (self.b_plus.is_zero or self.b_plus.in_lambda_plus()):
            raise InputError("b₊ must have positive valuation, got {}".format(self.b_plus))
        tolerance = setting(MirrorDefaults, "degenerateTolerance")
        if abs(cmath.exp(self.b0) - self.c0) > tolerance * max(1, abs(self.c0)):
            raise InputError("e^b₀ differs from c₀ = {}".format(self.c0))

    @classmethod
    def from_root(cls, geometry, X):
        u = X.valuation
        c0 = _clean(X.leading)
        # X = T^u c0 (1 + c_+) and b_+ = log(1 + c_+)
        ratio = X.shift(-u).scale(1 / c0)
        b_plus = log_one_plus(ratio - 1) if not (ratio - 1).is_zero else ratio - 1
        return cls(geometry, u, c0, b_plus)

    def coordinate(self):
        """X = T^u c0 exp(b_+)"""
        if self.b_plus.is_zero:
            return NovikovScalar.monomial(self.c0, self.u, precision=self.b_plus.precision + self.u)
        return exp_plus(self.b_plus).scale(self.c0).shift(self.u)

    def potential_value(self, lam):
        return PotentialValue(self.coordinate(), as_scalar(lam))

    def pairing(self):
        """i_{e_1}(b) = b0 + b_+"""
        return self.b_plus + self.b0

    def bounding_cochain(self):
        return BoundingCochainCandidate({E1: self.b_plus})

    def holonomy(self, beta):
        return self.c0 ** beta.pairing

    def to_json(self):
        return {
            "u": self.u,
            "c0": self.c0,
            "b0": self.b0,
            "bPlus": self.b_plus,
        }


def _check_lambda(lam):
    lam = as_scalar(lam)
    if not lam.in_lambda_plus():
        raise HypothesisViolation(
            "Lagrangians collapse to points when val(λ) ≤ 0, got {}".format(lam.valuation)
        )
    return lam


def critical_equation(geom, lam):
    """X^s dF with s clearing the negative powers of X"""
    lam = _check_lambda(lam)
    shift = geom.clearing
    degree = shift + max(beta.pairing for beta in geom.classes)
    coefficients = [NovikovScalar.zero() for _ in range(degree + 1)]
    for beta in geom.classes:
        monomial = NovikovScalar.monomial(beta.pairing, beta.offset)
        coefficients[beta.pairing + shift] = coefficients[beta.pairing + shift] + monomial
    coefficients[shift] = coefficients[shift] - lam
    return NovikovPolynomial(coefficients)


def solve_mirror(geom, lam, precision=None, degenerate=False):
    """Critical points of F and the branes they name, ordered by valuation"""
    precision = setting(MirrorDefaults, "precision", precision)
    p = critical_equation(geom, lam)
    roots = polynomial_roots(p, precision)

    solutions = []
    for root in roots:
        if root.multiplicity > 1 and not degenerate:
            raise HypothesisViolation(
                "degenerate critical point of multiplicity {} at {}; "
                "pass the degenerate flag for the derivative ladder".format(
                    root.multiplicity, root.value
                )
            )
        solutions.append((root.value, Brane.from_root(geom, root.value)))
    solutions.sort(key=lambda s: (s[0].valuation, -s[0].leading.real, -s[0].leading.imag))
    logger.debug("%s critical points of F on %s", len(solutions), geom.kind)
    return solutions


def _weight(pairing, arity, holonomy):
    weight = Fraction(pairing ** arity, math.factorial(arity))
    holonomy = complex(holonomy)
    if holonomy.imag == 0 and float(holonomy.real).is_integer():
        return weight * int(holonomy.real)
    return complex(weight) * holonomy


def model_algebra(geom, brane, lam=None, cutoff=None, max_arity=None):
    """
    The gapped algebra on {1, e1}: m_{l,beta}(e1, .., e1) = rho(d beta) a^l / l! times the unit,
    summed over classes with the same (Maslov index, energy), with m_{0,beta}(1) = 1 before the
    holonomy twist and the wedge product as m_{2,0}.
    """
    if lam is not None:
        _check_lambda(lam)
    cutoff = as_exponent(setting(MirrorDefaults, "precision", cutoff))
    circle = GDiffSpace.circle_on_itself()

    images = {}
    for beta in geom.classes:
        energy = geom.energy(beta, brane.u)
        if energy <= cutoff:
            images.setdefault((2, energy), []).append(beta)
    monoid = GappedMonoid(list(images), cutoff)
    max_arity = max_arity if max_arity is not None else setting(MirrorDefaults, "ladderDepth")

    operations = {(k, beta): {} for k in range(max_arity + 1) for beta in monoid.elements}
    operations.pop((0, ZERO_CLASS))
    operations[(2, ZERO_CLASS)] = {
        (UNIT, UNIT): {UNIT: 1},
        (UNIT, E1): {E1: 1},
        (E1, UNIT): {E1: -1},
    }
    for (image, classes) in images.items():
        for arity in range(max_arity + 1):
            total = 0
            for beta in classes:
                total = total + _weight(beta.pairing, arity, brane.holonomy(beta))
            operations[(arity, image)] = {(E1,) * arity: {UNIT: total}}

    return GappedAInfty(
        [0, 1],
        UNIT,
        monoid,
        operations,
        max_arity=max_arity,
        interior=circle.interior,
        lie=circle.lie,
        algebra=circle.algebra,
        labels=circle.labels,
    )


def _insertions(brane, cutoff):
    if brane.b_plus.is_zero:
        return 0
    return int(math.floor(cutoff / brane.b_plus.valuation))


def deformed_model(geom, brane, lam, cutoff=None, depth=None):
    """The lambda-evaluated model deformed by b_+, carrying m_0 .. m_depth"""
    lam = _check_lambda(lam)
    cutoff = as_exponent(setting(MirrorDefaults, "precision", cutoff))
    depth = setting(MirrorDefaults, "ladderDepth", depth)
    arity = _insertions(brane, cutoff) + depth
    A = model_algebra(geom, brane, lam, cutoff, max_arity=arity)
    return deform(evaluate_lambda(A, [lam]), brane.bounding_cochain(), cutoff=cutoff, verify=False)


def ladder_value(deformed, k):
    """m_k(e1, .., e1) of a deformed model as a multiple of the unit"""
    outs = deformed.operations.get((k, ZERO_CLASS), {}).get((E1,) * k, {})
    return as_scalar(outs.get(UNIT, NovikovScalar.zero(precision=deformed.monoid.cutoff)))


def potential_derivatives(geom, X, lam, k, b_plus=None):
    """d^k F at X; for k = 0 the potential W(X) - lambda <b, e_1>"""
    X = as_scalar(X)
    lam = as_scalar(lam)
    total = NovikovScalar.zero()
    for beta in geom.classes:
        term = power(X, beta.pairing).shift(beta.offset)
        total = total + term.scale(beta.pairing ** k)
    if k == 0 and b_plus is not None:
        total = total - lam * b_plus
    if k == 1:
        total = total - lam
    return total


def structure_constants(geom, brane, lam, k, precision=None):
    """m_k^{b,lambda}(e1, .., e1) read off the deformed model, equal to d^k F(X) / k!"""
    if k < 0:
        raise InputError("arity must be nonnegative")
    deformed = deformed_model(geom, brane, lam, cutoff=precision, depth=max(k, 2))
    return ladder_value(deformed, k)


def clifford_match(geom, brane, lam, hessian=None, cutoff=None, tolerance=None):
    """
    Compares [e1].[e1] = -m_2(e1, e1) in the deformed model with the square of the Clifford
    generator attached to the Hessian d^2 F(X).
    """
    tolerance = setting(MirrorDefaults, "degenerateTolerance", tolerance)
    deformed = deformed_model(geom, brane, lam, cutoff, depth=2)
    m2 = ladder_value(deformed, 2)
    if m2.is_negligible(tolerance):
        raise HypothesisViolation("Clifford comparison undefined at a degenerate critical point")

    # (-1)^{|e1|} m_2(e1, e1)
    product = -m2
    if hessian is None:
        hessian = potential_derivatives(geom, brane.coordinate(), lam, 2)
    parameter = clifford_algebra([[as_scalar(hessian)]]).q[0][0]
    precision = min(product.precision, parameter.precision)
    match = truncate(product, precision).approx(truncate(parameter, precision), tolerance)
    return CliffordMatch(product, parameter, match)


def brane_category(geom, branes, lam, cutoff=None):
    """
    Hom supports between branes: nonzero exactly when the fibers agree, the pairings
    i_{e_1}(b) agree and the curvatures agree. Diagonal entries carry the model algebras.
    """
    lam = _check_lambda(lam)
    cutoff = as_exponent(setting(MirrorDefaults, "precision", cutoff))
    tolerance = setting(MirrorDefaults, "degenerateTolerance")

    curvatures = []
    endomorphisms = []
    for brane in branes:
        A = model_algebra(geom, brane, lam, cutoff, max_arity=max(2, _insertions(brane, cutoff)))
        endomorphisms.append(A)
        scalar = curvature(A, brane.bounding_cochain(), [lam], cutoff=cutoff).scalar
        if scalar is None:
            raise HypothesisViolation("curvature is not a multiple of the unit")
        curvatures.append(scalar)

    def close(a, b):
        precision = min(a.precision, b.precision)
        return truncate(a, precision).approx(truncate(b, precision), tolerance)

    homs = []
    for (i, left) in enumerate(branes):
        row = []
        for (j, right) in enumerate(branes):
            if i == j:
                row.append(True)
                continue
            row.append(
                left.u == right.u
                and close(left.pairing(), right.pairing())
                and close(curvatures[i], curvatures[j])
            )
        homs.append(row)
    return BraneCategory(homs, endomorphisms, curvatures)


def correspondence_report(geom, lam, precision=None, degenerate=False):
    """Object-level mirror data: one row per critical point of F"""
    precision = setting(MirrorDefaults, "precision", precision)
    lam = _check_lambda(lam)
    solutions = solve_mirror(geom, lam, precision, degenerate)
    branes = [brane for (_, brane) in solutions]
    category = brane_category(geom, branes, lam, precision)
    depth = setting(MirrorDefaults, "ladderDepth")

    rows = []
    for (index, (X, brane)) in enumerate(solutions):
        row = {
            "root": X,
            "u": brane.u,
            "brane": brane.to_json(),
            "curvature": category.curvatures[index],
            "m1": structure_constants(geom, brane, lam, 1, precision),
            "m2": structure_constants(geom, brane, lam, 2, precision),
            "homs": category.homs[index],
        }
        if row["m2"].is_negligible(setting(MirrorDefaults, "degenerateTolerance")):
            row["ladder"] = [
                potential_derivatives(geom, X, lam, k, brane.b_plus) for k in range(depth + 1)
            ]
        else:
            match = clifford_match(geom, brane, lam, cutoff=precision)
            row["clifford"] = {
                "product": match.product,
                "parameter": match.parameter,
                "match": match.match,
            }
        rows.append(row)

    report = {"geometry": geom.kind, "lambda": lam, "precision": precision, "rows": rows}
    if geom.kind == "CP1" and len(solutions) == 2:
        (X1, X2) = (solutions[0][0], solutions[1][0])
        report["vieta"] = {
            "sum": (X1 + X2 - lam).magnitude(),
            "product": (X1 * X2 + NovikovScalar.monomial(1, 1)).magnitude(),
        }
    return report
