"""
Matrix factorizations and local algebra on jets.

Polynomials are sparse dictionaries from exponent tuples to coefficients. Coefficients are
exact numbers (int, Fraction, complex) or Novikov scalars; negative exponents are allowed so
that Laurent potentials such as x + T/x can be written down and cleared. Local dimensions at a
point are computed on jets: the polynomial ring modulo m^{D+1}, with D raised until two
consecutive orders agree.
"""

import itertools
import logging
import math
import numbers
from collections import namedtuple
from fractions import Fraction

import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from eqmirror.codec import parse_polynomial, value_from_json, value_to_json
from eqmirror.config import MFDefaults, setting
from eqmirror.errors import HypothesisViolation, InputError, TruncationError
from eqmirror.novikov import NovikovPolynomial, NovikovScalar, as_scalar, polynomial_roots

logger = logging.getLogger(__name__)

MFCheck = namedtuple("MFCheck", ["passed", "residual"])
LocalizedElement = namedtuple("LocalizedElement", ["numerator", "denominator"])
LagrangeLift = namedtuple("LagrangeLift", ["point", "lam", "dimensions", "matches"])


def _vanishes(value):
    if isinstance(value, NovikovScalar):
        return value.is_zero or value.is_negligible()
    return value == 0


def _magnitude(value):
    if isinstance(value, NovikovScalar):
        return value.magnitude()
    return abs(value)


def _is_rational(value):
    return isinstance(value, (int, Fraction)) or (
        isinstance(value, complex) and value.imag == 0 and float(value.real).is_integer()
    )


def _rational(value):
    if isinstance(value, complex):
        return Fraction(int(value.real))
    return Fraction(value)


class Polynomial:
    __slots__ = ("terms", "nvars")

    def __init__(self, terms=None, nvars=1):
        self.nvars = nvars
        collected = {}
        for (exponents, coefficient) in (terms or {}).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != nvars:
                raise InputError("monomial {} needs {} exponents".format(exponents, nvars))
            collected[exponents] = collected.get(exponents, 0) + coefficient
        self.terms = {e: c for (e, c) in collected.items() if not _vanishes(c)}

    @classmethod
    def constant(cls, value, nvars=1):
        return cls({(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, index, nvars=1):
        return cls({tuple(1 if i == index else 0 for i in range(nvars)): 1}, nvars)

    @classmethod
    def monomial(cls, exponents, coefficient=1):
        return cls({tuple(exponents): coefficient}, len(exponents))

    @property
    def is_zero(self):
        return not self.terms

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    @property
    def order(self):
        return min((sum(e) for e in self.terms), default=math.inf)

    @property
    def is_laurent(self):
        return any(x < 0 for e in self.terms for x in e)

    @property
    def is_exact(self):
        return not any(isinstance(c, NovikovScalar) for c in self.terms.values())

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, 0)

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise InputError("polynomials live in different rings")
            return other
        if isinstance(other, (numbers.Number, NovikovScalar)):
            return Polynomial.constant(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for (e, c) in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for (e, c) in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = {}
        for (ea, ca) in self.terms.items():
            for (eb, cb) in other.terms.items():
                e = tuple(x + y for (x, y) in zip(ea, eb))
                terms[e] = terms.get(e, 0) + ca * cb
        return Polynomial(terms, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise InputError("negative powers of polynomials are not polynomials")
        result = Polynomial.constant(1, self.nvars)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero

    __hash__ = None

    def derivative(self, index):
        terms = {}
        for (e, c) in self.terms.items():
            if e[index] == 0:
                continue
            lowered = tuple(x - 1 if i == index else x for (i, x) in enumerate(e))
            terms[lowered] = c * e[index]
        return Polynomial(terms, self.nvars)

    def gradient(self):
        return [self.derivative(i) for i in range(self.nvars)]

    def evaluate(self, point):
        total = 0
        for (e, c) in self.terms.items():
            value = c
            for (x, k) in zip(point, e):
                if k:
                    value = value * x ** k
            total = total + value
        return total

    def translate(self, point):
        """p(x + point), so that the point moves to the origin"""
        if self.is_laurent:
            raise InputError("cannot re-center a Laurent polynomial")
        if all(_vanishes(x) for x in point):
            return self
        shifted = [Polynomial.variable(i, self.nvars) + x for (i, x) in enumerate(point)]
        result = Polynomial({}, self.nvars)
        for (e, c) in self.terms.items():
            term = Polynomial.constant(c, self.nvars)
            for (factor, k) in zip(shifted, e):
                term = term * factor ** k
            result = result + term
        return result

    def truncate(self, order):
        return Polynomial({e: c for (e, c) in self.terms.items() if sum(e) <= order}, self.nvars)

    def extend(self, nvars, offset=0):
        """Embeds into a ring with more variables, placing these at offset, offset + 1, ..."""
        after = nvars - offset - self.nvars
        if after < 0:
            raise InputError("cannot embed {} variables into {}".format(self.nvars, nvars))
        return Polynomial(
            {(0,) * offset + e + (0,) * after: c for (e, c) in self.terms.items()}, nvars
        )

    def substitute(self, index, value):
        """Fixes one variable to a value and drops it from the ring"""
        terms = {}
        for (e, c) in self.terms.items():
            kept = e[:index] + e[index + 1 :]
            terms[kept] = terms.get(kept, 0) + c * value ** e[index]
        return Polynomial(terms, self.nvars - 1)

    def clear_negative_powers(self):
        """Returns (x^s p, s) with s the smallest exponent vector making x^s p a polynomial"""
        shift = tuple(
            max(0, -min((e[i] for e in self.terms), default=0)) for i in range(self.nvars)
        )
        if not any(shift):
            return (self, shift)
        return (self * Polynomial.monomial(shift), shift)

    def to_json(self):
        return [[list(e), value_to_json(c)] for (e, c) in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, obj, nvars):
        return cls({tuple(e): value_from_json(c) for (e, c) in obj}, nvars)

    def __repr__(self):
        return "Polynomial({})".format(PolyRing.default(self.nvars).format(self))


class PolyRing:
    """Variable names for reading and printing polynomials"""

    def __init__(self, variables):
        self.variables = list(variables)

    @classmethod
    def default(cls, nvars):
        if nvars <= 3:
            return cls(["x", "y", "z"][:nvars])
        return cls(["x{}".format(i + 1) for i in range(nvars)])

    @property
    def nvars(self):
        return len(self.variables)

    def parse(self, value):
        return parse_polynomial(value, self.variables)

    def variable(self, name):
        return Polynomial.variable(self.variables.index(name), self.nvars)

    def format(self, p):
        if p.is_zero:
            return "0"
        parts = []
        for (e, c) in sorted(p.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            factors = [
                name if k == 1 else "{}^{}".format(name, k)
                for (name, k) in zip(self.variables, e)
                if k
            ]
            text = str(c) if not isinstance(c, NovikovScalar) else "({})".format(c)
            parts.append("*".join([text] + factors) if factors else text)
        return " + ".join(parts)


def _matmul(A, B, nvars):
    rows = len(A)
    inner = len(B)
    cols = len(B[0]) if B else 0
    result = []
    for i in range(rows):
        row = []
        for j in range(cols):
            entry = Polynomial({}, nvars)
            for k in range(inner):
                if not A[i][k].is_zero and not B[k][j].is_zero:
                    entry = entry + A[i][k] * B[k][j]
            row.append(entry)
        result.append(row)
    return result


class MatrixFactorization:
    """
    Z/2-graded free module P0 + P1 with phi: P1 -> P0 and psi: P0 -> P1 such that
    phi psi = w and psi phi = w. Matrices are lists of rows of polynomials.
    """

    def __init__(self, w, phi, psi):
        self.w = w
        self.nvars = w.nvars
        self.phi = [list(row) for row in phi]
        self.psi = [list(row) for row in psi]
        (r0, r1) = (len(self.phi), len(self.psi))
        if any(len(row) != r1 for row in self.phi) or any(len(row) != r0 for row in self.psi):
            raise InputError("phi must be {0}x{1} and psi {1}x{0}".format(r0, r1))
        if any(p.nvars != self.nvars for row in self.phi + self.psi for p in row):
            raise InputError("matrix entries and w live in different rings")

    @property
    def ranks(self):
        return (len(self.phi), len(self.psi))

    def parities(self):
        (r0, r1) = self.ranks
        return [0] * r0 + [1] * r1

    def differential(self):
        """d = s0 + s1 as one odd block matrix, P0 basis first"""
        (r0, r1) = self.ranks
        zero = Polynomial({}, self.nvars)
        D = [[zero] * (r0 + r1) for _ in range(r0 + r1)]
        for i in range(r0):
            for j in range(r1):
                D[i][r0 + j] = self.phi[i][j]
        for i in range(r1):
            for j in range(r0):
                D[r0 + i][j] = self.psi[i][j]
        return D

    def entries(self):
        return [p for row in self.phi + self.psi for p in row]

    def map_entries(self, transform, w):
        return MatrixFactorization(
            w,
            [[transform(p) for p in row] for row in self.phi],
            [[transform(p) for p in row] for row in self.psi],
        )

    def translate(self, point):
        return self.map_entries(lambda p: p.translate(point), self.w.translate(point))

    def extend(self, nvars, offset=0):
        return self.map_entries(lambda p: p.extend(nvars, offset), self.w.extend(nvars, offset))

    def to_json(self):
        return {
            "w": self.w.to_json(),
            "phi": [[p.to_json() for p in row] for row in self.phi],
            "psi": [[p.to_json() for p in row] for row in self.psi],
            "nvars": self.nvars,
        }

    @classmethod
    def from_json(cls, obj, variables=None):
        try:
            if variables is None:
                variables = obj.get("variables") or PolyRing.default(obj["nvars"]).variables
            ring = PolyRing(variables)
            return cls(
                ring.parse(obj["w"]),
                [[ring.parse(p) for p in row] for row in obj["phi"]],
                [[ring.parse(p) for p in row] for row in obj["psi"]],
            )
        except (KeyError, TypeError) as e:
            raise InputError("malformed matrix factorization: {}".format(e)) from e


def mf_verify(M, tolerance=None):
    tolerance = setting(MFDefaults, "tolerance", tolerance)
    (r0, r1) = M.ranks
    residual = 0.0
    exact = M.w.is_exact and all(p.is_exact for p in M.entries())
    for (product, size) in (
        (_matmul(M.phi, M.psi, M.nvars), r0),
        (_matmul(M.psi, M.phi, M.nvars), r1),
    ):
        for i in range(size):
            for j in range(size):
                difference = product[i][j] - (M.w if i == j else 0)
                for c in difference.terms.values():
                    residual = max(residual, _magnitude(c))
    passed = residual == 0 if exact else residual <= tolerance
    return MFCheck(passed, residual)


def _wedge(i, subset):
    if i in subset:
        return (0, None)
    sign = (-1) ** sum(1 for s in subset if s < i)
    return (sign, tuple(sorted(subset + (i,))))


def _contract(i, subset):
    if i not in subset:
        return (0, None)
    sign = (-1) ** sum(1 for s in subset if s < i)
    return (sign, tuple(s for s in subset if s != i))


def koszul_stabilization(f_list, w_list, w=None):
    """d = sum f_i iota_i + sum w_i e_i on the exterior algebra, factorizing sum f_i w_i"""
    if len(f_list) != len(w_list) or not f_list:
        raise InputError("need matching nonempty lists f and w")
    nvars = f_list[0].nvars
    total = Polynomial({}, nvars)
    for (f, g) in zip(f_list, w_list):
        total = total + f * g
    if w is None:
        w = total
    elif not (w - total).is_zero:
        raise InputError("Σfᵢwᵢ does not match the declared w")

    m = len(f_list)
    subsets = [s for size in range(m + 1) for s in itertools.combinations(range(m), size)]
    even = [s for s in subsets if len(s) % 2 == 0]
    odd = [s for s in subsets if len(s) % 2 == 1]
    position = {s: i for (i, s) in enumerate(even)}
    position.update({s: i for (i, s) in enumerate(odd)})

    zero = Polynomial({}, nvars)
    phi = [[zero] * len(odd) for _ in even]
    psi = [[zero] * len(even) for _ in odd]
    for (source, target) in ((odd, phi), (even, psi)):
        for (col, s) in enumerate(source):
            for i in range(m):
                for (operation, coefficient) in ((_contract, f_list[i]), (_wedge, w_list[i])):
                    (sign, image) = operation(i, s)
                    if sign:
                        row = position[image]
                        target[row][col] = target[row][col] + coefficient * sign
    return MatrixFactorization(w, phi, psi)


def residue_field_stabilization(w, point=None):
    """
    The stabilization k^stab of the residue field at a point of w = 0, built from the
    coordinate sequence x_i - p_i.
    """
    point = tuple(point) if point is not None else (0,) * w.nvars
    if not _vanishes(w.evaluate(point)):
        raise HypothesisViolation("the expansion point does not lie on w = 0")
    local = w.translate(point)
    parts = [Polynomial({}, w.nvars) for _ in range(w.nvars)]
    for (e, c) in local.terms.items():
        first = next(i for (i, k) in enumerate(e) if k > 0)
        lowered = tuple(k - 1 if i == first else k for (i, k) in enumerate(e))
        parts[first] = parts[first] + Polynomial({lowered: c}, w.nvars)

    back = tuple(-x for x in point)
    f_list = [Polynomial.variable(i, w.nvars) - point[i] for i in range(w.nvars)]
    w_list = [p.translate(back) for p in parts]
    return koszul_stabilization(f_list, w_list, w)


def tensor_product(M, N):
    """Graded tensor product, a factorization of w_M + w_N"""
    if M.nvars != N.nvars:
        raise InputError("factorizations live in different rings")
    (DM, DN) = (M.differential(), N.differential())
    (pM, pN) = (M.parities(), N.parities())
    pairs = [(a, b) for a in range(len(pM)) for b in range(len(pN))]
    even = [p for p in pairs if (pM[p[0]] + pN[p[1]]) % 2 == 0]
    odd = [p for p in pairs if (pM[p[0]] + pN[p[1]]) % 2 == 1]
    zero = Polynomial({}, M.nvars)

    def entry(target, source):
        ((a2, b2), (a1, b1)) = (target, source)
        value = zero
        if b1 == b2:
            value = value + DM[a2][a1]
        if a1 == a2:
            value = value + DN[b2][b1] * (-1) ** pM[a1]
        return value

    phi = [[entry(t, s) for s in odd] for t in even]
    psi = [[entry(t, s) for s in even] for t in odd]
    return MatrixFactorization(M.w + N.w, phi, psi)


def knorrer_image(M, r):
    """M (x) (lambda_i, -t_i) for i = 1..r, in the ring with variables (x, lambda, t)"""
    n = M.nvars
    nvars = n + 2 * r
    image = M.extend(nvars)
    for i in range(r):
        lam = Polynomial.variable(n + i, nvars)
        t = Polynomial.variable(n + r + i, nvars)
        image = tensor_product(image, MatrixFactorization(-(lam * t), [[lam]], [[-t]]))
    return image


class JetWindow:
    """Expansion point and the first jet order tried"""

    def __init__(self, point=None, order=None):
        self.point = None if point is None else tuple(point)
        self.order = setting(MFDefaults, "jetOrder", order)
        if self.order < 1:
            raise InputError("jet order must be at least 1")

    def at(self, nvars):
        point = self.point if self.point is not None else (0,) * nvars
        if len(point) != nvars:
            raise InputError("expansion point needs {} coordinates".format(nvars))
        return point


def _monomials(nvars, order):
    return [
        e
        for total in range(order + 1)
        for e in itertools.product(range(total + 1), repeat=nvars)
        if sum(e) == total
    ]


def _exact_rank(rows, ncols):
    if not rows or not ncols:
        return 0
    matrix = DomainMatrix(
        {
            i: {j: QQ(v.numerator, v.denominator) for (j, v) in row.items()}
            for (i, row) in enumerate(rows)
        },
        (len(rows), ncols),
        QQ,
    )
    return matrix.rank()


def _novikov_rank(rows):
    pivots = []
    for row in rows:
        row = {j: as_scalar(v) for (j, v) in row.items() if not _vanishes(v)}
        for (col, pivot) in pivots:
            if col in row:
                factor = row[col]
                for (j, v) in pivot.items():
                    row[j] = row.get(j, 0) - factor * v
                row = {j: v for (j, v) in row.items() if not _vanishes(v)}
        if not row:
            continue
        col = min(row, key=lambda j: (row[j].valuation, -abs(row[j].leading)))
        value = row[col]
        pivots.append((col, {j: v / value for (j, v) in row.items()}))
    return len(pivots)


def _rank(rows, ncols):
    if all(_is_rational(v) for row in rows for v in row.values()):
        return _exact_rank([{j: _rational(v) for (j, v) in row.items()} for row in rows], ncols)
    return _novikov_rank(rows)


def _quotient_dim(generators, order):
    """dim of (jets of order <= order) modulo the ideal generated by the generators"""
    nvars = generators[0].nvars
    basis = _monomials(nvars, order)
    index = {e: i for (i, e) in enumerate(basis)}
    rows = []
    for g in generators:
        for m in basis:
            row = {}
            for (e, c) in g.terms.items():
                shifted = tuple(x + y for (x, y) in zip(e, m))
                if sum(shifted) <= order:
                    row[index[shifted]] = c
            if row:
                rows.append(row)
    return len(basis) - _rank(rows, len(basis))


def _stabilized(compute, window, what):
    order = window.order
    limit = setting(MFDefaults, "maxJetOrder", None)
    previous = compute(order)
    while order < limit:
        current = compute(order + 1)
        if current == previous:
            logger.debug("%s stabilized at jet order %s", what, order)
            return current
        (previous, order) = (current, order + 1)
    return None


def local_multiplicity(generators, window=None):
    generators = list(generators)
    if not generators:
        raise InputError("need at least one generator")
    window = window or JetWindow()
    point = window.at(generators[0].nvars)
    local = [g.translate(point) for g in generators]
    if any(not _vanishes(g.constant_term()) for g in local):
        return 0

    result = _stabilized(lambda order: _quotient_dim(local, order), window, "local multiplicity")
    if result is None:
        raise TruncationError("not an isolated point at this order")
    return result


def jacobian_dim(h, window=None):
    return local_multiplicity(h.gradient(), window)


def tyurina_dim(h, window=None):
    return local_multiplicity([h] + h.gradient(), window)


def _hom_dims_at(M, N, order, margin):
    """(even, odd) cohomology of Hom(M, N) at the origin computed on jets of the given order"""
    (DM, DN) = (M.differential(), N.differential())
    (pM, pN) = (M.parities(), N.parities())
    nvars = M.nvars
    low = _monomials(nvars, order)
    high = _monomials(nvars, order + margin)

    def unknowns(parity, monomials):
        return [
            (a, b, m)
            for a in range(len(pN))
            for b in range(len(pM))
            if (pN[a] + pM[b]) % 2 == parity
            for m in monomials
        ]

    def image(a, b, m, parity, cutoff):
        """d(x^m E_ab) = DN x^m E_ab - (-1)^parity x^m E_ab DM, jets of order <= cutoff"""
        out = {}
        for c in range(len(pN)):
            for (e, v) in DN[c][a].terms.items():
                shifted = tuple(x + y for (x, y) in zip(e, m))
                if sum(shifted) <= cutoff:
                    key = (c, b, shifted)
                    out[key] = out.get(key, 0) + v
        sign = -((-1) ** parity)
        for c in range(len(pM)):
            for (e, v) in DM[b][c].terms.items():
                shifted = tuple(x + y for (x, y) in zip(e, m))
                if sum(shifted) <= cutoff:
                    key = (a, c, shifted)
                    out[key] = out.get(key, 0) + sign * v
        return out

    def matrix(columns, parity, cutoff):
        rowIndex = {}
        entries = {}
        for (j, (a, b, m)) in enumerate(columns):
            for (key, v) in image(a, b, m, parity, cutoff).items():
                if v == 0:
                    continue
                i = rowIndex.setdefault(key, len(rowIndex))
                entries.setdefault(i, {})[j] = QQ(_rational(v).numerator, _rational(v).denominator)
        return DomainMatrix(entries, (max(len(rowIndex), 1), max(len(columns), 1)), QQ)

    dims = []
    for parity in (0, 1):
        cocycles = unknowns(parity, high)
        kernel = matrix(cocycles, parity, order + margin).nullspace()
        lowColumns = [j for (j, (_, _, m)) in enumerate(cocycles) if sum(m) <= order]
        kernelRows = kernel.shape[0]
        if kernelRows and lowColumns and len(cocycles):
            projected = kernel.extract(list(range(kernelRows)), lowColumns).rank()
        else:
            projected = 0

        sources = unknowns(1 - parity, low)
        boundaries = matrix(sources, 1 - parity, order).rank() if sources else 0
        dims.append(projected - boundaries)
    return tuple(dims)


def hom_cohomology_dim(M, N, window=None):
    """(even, odd) dimensions of H(Hom(M, N)) localized at the window's point"""
    if not (M.w - N.w).is_zero:
        raise InputError("factorizations of different potentials")
    entries = M.entries() + N.entries() + [M.w]
    if not all(_is_rational(c) for p in entries for c in p.terms.values()):
        raise InputError("hom dimensions need rational coefficients")

    window = window or JetWindow()
    point = window.at(M.nvars)
    (M, N) = (M.translate(point), N.translate(point))
    margin = max([1] + [p.degree for p in M.entries() + N.entries()])

    result = _stabilized(lambda order: _hom_dims_at(M, N, order, margin), window, "hom dims")
    if result is None:
        raise TruncationError("increase jet order")
    return result


class CliffordAlgebra:
    """Generators theta_i with theta_i theta_j + theta_j theta_i = 2 q_ij, basis of sorted words"""

    def __init__(self, q):
        self.q = [list(row) for row in q]
        self.rank = len(self.q)

    @property
    def dimension(self):
        return 2 ** self.rank

    def basis(self):
        generators = range(self.rank)
        return [
            s for size in range(self.rank + 1) for s in itertools.combinations(generators, size)
        ]

    def normal_form(self, word, coefficient=1):
        """Reduces a word in the generators to sorted monomials"""
        result = {}
        pending = [(tuple(word), coefficient)]
        while pending:
            (word, c) = pending.pop()
            for i in range(len(word) - 1):
                (a, b) = (word[i], word[i + 1])
                if a == b:
                    pending.append((word[:i] + word[i + 2 :], c * self.q[a][a]))
                    break
                if a > b:
                    swapped = word[:i] + (b, a) + word[i + 2 :]
                    pending.append((swapped, -c))
                    pending.append((word[:i] + word[i + 2 :], c * 2 * self.q[a][b]))
                    break
            else:
                result[word] = result.get(word, 0) + c
        return {w: c for (w, c) in result.items() if not _vanishes(c)}

    def product(self, left, right):
        return self.normal_form(tuple(left) + tuple(right))

    def structure_constants(self):
        basis = self.basis()
        return {(a, b): self.product(a, b) for a in basis for b in basis}

    def anticommutator(self, i, j):
        return self.normal_form((i, j)).get((), 0) + self.normal_form((j, i)).get((), 0)

    def to_json(self):
        return {"rank": self.rank, "dimension": self.dimension, "q": self.q}


def clifford_algebra(H):
    """Clifford algebra of the quadratic form q = -H/2 attached to a Hessian H"""
    n = len(H)
    for i in range(n):
        for j in range(i):
            if _magnitude(H[i][j] - H[j][i]) > setting(MFDefaults, "tolerance", None):
                raise InputError("Hessian must be symmetric")
    q = [[H[i][j] * Fraction(-1, 2) for j in range(n)] for i in range(n)]
    return CliffordAlgebra(q)


class GiventalPotential:
    """F = f - sum_i lambda_i log g_i, with differential df - sum_i lambda_i dg_i / g_i"""

    def __init__(self, f, g_list=(), lam=()):
        self.f = f
        self.g_list = list(g_list)
        self.lam = [as_scalar(v) if isinstance(v, NovikovScalar) else v for v in lam]
        if len(self.g_list) != len(self.lam):
            raise InputError("one equivariant parameter per function g")
        for g in self.g_list:
            if g.is_zero:
                raise InputError("g not invertible")
            if g.nvars != f.nvars:
                raise InputError("f and g live in different rings")

    @property
    def nvars(self):
        return self.f.nvars


def _directional(p, direction):
    result = Polynomial({}, p.nvars)
    for (i, v) in enumerate(direction):
        if v != 0:
            result = result + p.derivative(i) * v
    return result


def givental_dlog(F, directions=None):
    """
    Components of dF along the directions, each written as numerator / denominator with the
    denominator a product of the g's and a monomial.
    """
    n = F.nvars
    if directions is None:
        directions = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    product = Polynomial.constant(1, n)
    for g in F.g_list:
        product = product * g

    components = []
    for direction in directions:
        numerator = _directional(F.f, direction) * product
        for (k, (g, lam)) in enumerate(zip(F.g_list, F.lam)):
            others = Polynomial.constant(1, n)
            for (l, h) in enumerate(F.g_list):
                if l != k:
                    others = others * h
            numerator = numerator - _directional(g, direction) * others * lam
        (numerator, shift) = numerator.clear_negative_powers()
        denominator = product * Polynomial.monomial(shift) if any(shift) else product
        components.append(LocalizedElement(numerator, denominator))
    return components


def givental_critical_points(F, precision=None):
    """Critical points of a one-variable Givental potential over the Novikov field"""
    if F.nvars != 1:
        raise InputError("critical points are solved in one variable only")
    numerator = givental_dlog(F)[0].numerator
    top = max((e[0] for e in numerator.terms), default=0)
    coefficients = [numerator.terms.get((k,), 0) for k in range(top + 1)]
    roots = polynomial_roots(NovikovPolynomial(coefficients), precision)

    kept = []
    for root in roots:
        if any(_vanishes(as_scalar(g.evaluate((root.value,)))) for g in F.g_list):
            logger.debug("dropping root %s where some g vanishes", root.value)
            continue
        kept.append(root)
    return (kept, numerator)


def _determinant(matrix):
    if len(matrix) == 1:
        return matrix[0][0]
    total = None
    for (j, entry) in enumerate(matrix[0]):
        if entry.is_zero:
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = entry * _determinant(minor) * (-1) ** j
        total = term if total is None else total + term
    return total if total is not None else Polynomial({}, matrix[0][0].nvars)


def _coordinate_slice(g_list, point):
    """(index, value) per g when g - 1 vanishes exactly on a coordinate hyperplane"""
    fixed = []
    for g in g_list:
        linear = g - 1
        if linear.degree != 1 or len([e for e in linear.terms if sum(e) == 1]) != 1:
            return None
        index = next(e.index(1) for e in linear.terms if sum(e) == 1)
        if any(e[index] == 0 and sum(e) > 0 for e in linear.terms):
            return None
        fixed.append((index, point[index]))
    if len({i for (i, _) in fixed}) != len(fixed):
        return None
    return fixed


def lagrange_lift(y, f, g_list=(), window=None):
    """
    Lifts a critical point y of f restricted to T = {g = 1} to the critical point (y, lambda)
    of F = f - sum lambda_i log g_i, and compares local invariants on both sides.
    """
    n = f.nvars
    r = len(g_list)
    y = tuple(y)
    window = window or JetWindow()
    for g in g_list:
        if not _vanishes(g.evaluate(y) - 1):
            raise HypothesisViolation("y does not lie on T = {g = 1}")

    gradient = [_rational(p.evaluate(y)) for p in f.gradient()]
    jacobian = sympy.Matrix(
        [[sympy.Rational(str(_rational(p.evaluate(y)))) for p in g.gradient()] for g in g_list]
    ) if r else sympy.zeros(0, n)
    if r and jacobian.rank() < r:
        raise InputError("dg₁, …, dg_r are linearly dependent at y")

    if r:
        try:
            (solution, params) = jacobian.T.gauss_jordan_solve(
                sympy.Matrix([sympy.Rational(str(v)) for v in gradient])
            )
        except ValueError as e:
            raise HypothesisViolation("y is not critical for the restriction of f") from e
        lam = [Fraction(int(v.p), int(v.q)) for v in solution]
    else:
        if any(v != 0 for v in gradient):
            raise HypothesisViolation("y is not critical for f")
        lam = []

    # Restricted side: T cut out by g = 1, critical where the (r+1)-minors of Jac(f, g) vanish
    rows = [f.gradient()] + [g.gradient() for g in g_list]
    minors = [
        _determinant([[row[c] for c in columns] for row in rows])
        for columns in itertools.combinations(range(n), r + 1)
    ]
    onT = [g - 1 for g in g_list]
    level = f - f.evaluate(y)
    restrictedWindow = JetWindow(y, window.order)
    restricted = {
        "jacobian": local_multiplicity(onT + minors, restrictedWindow),
        "tyurina": local_multiplicity(onT + minors + [level], restrictedWindow),
    }

    # Lifted side in variables (x, lambda): prod(g) dF/dx_j and the units log g_i ~ g_i - 1
    nvars = n + r
    fx = f.extend(nvars)
    gx = [g.extend(nvars) for g in g_list]
    lamVars = [Polynomial.variable(n + i, nvars) for i in range(r)]
    product = Polynomial.constant(1, nvars)
    for g in gx:
        product = product * g
    generators = []
    for j in range(n):
        component = fx.derivative(j) * product
        for (i, g) in enumerate(gx):
            others = Polynomial.constant(1, nvars)
            for (l, h) in enumerate(gx):
                if l != i:
                    others = others * h
            component = component - lamVars[i] * g.derivative(j) * others
        generators.append(component)
    generators += [g - 1 for g in gx]
    liftedWindow = JetWindow(y + tuple(lam), window.order)
    lifted = {
        "jacobian": local_multiplicity(generators, liftedWindow),
        "tyurina": local_multiplicity(generators + [level.extend(nvars)], liftedWindow),
    }

    dimensions = {key: (restricted[key], lifted[key]) for key in restricted}
    fixed = _coordinate_slice(g_list, y)
    if fixed is not None:
        restrictedF = f
        for (index, value) in sorted(fixed, reverse=True):
            restrictedF = restrictedF.substitute(index, value)
        free = tuple(v for (i, v) in enumerate(y) if i not in {k for (k, _) in fixed})
        localF = (restrictedF - restrictedF.evaluate(free)).translate(free)
        stab = residue_field_stabilization(localF)
        dimensions["hom"] = (
            sum(hom_cohomology_dim(stab, stab, JetWindow(None, window.order))),
            sum(hom_cohomology_dim(*[knorrer_image(stab, r)] * 2, JetWindow(None, window.order))),
        )
    else:
        logger.debug("skipping hom dimensions: T is not a coordinate slice")

    matches = all(a == b for (a, b) in dimensions.values())
    return LagrangeLift(y + tuple(lam), lam, dimensions, matches)
