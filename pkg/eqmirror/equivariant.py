"""
Equivariant cohomology of finite-dimensional g-differential spaces.

All matrices are exact sympy matrices acting on column vectors: column a holds the image of
the a-th basis vector. The Weil algebra is truncated at total degree 2D, so only degrees
below 2D are ever reported.
"""

import itertools
import logging
from collections import namedtuple

import sympy
from sympy import Rational, SparseMatrix

from eqmirror.config import EquivariantDefaults, setting
from eqmirror.errors import InputError, TruncationError

logger = logging.getLogger(__name__)

WEIL = "Weil"
CARTAN = "Cartan"

AxiomReport = namedtuple("AxiomReport", ["residuals", "passed"])


def _exact(value):
    """Entries are numbers, [num, den] rationals or [[num, den], [num, den]] complex rationals"""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        if all(isinstance(part, (list, tuple)) for part in value):
            return _exact(value[0]) + sympy.I * _exact(value[1])
        return Rational(value[0], value[1])
    return sympy.nsimplify(value) if isinstance(value, float) else sympy.sympify(value)


def _matrix(rows, size):
    matrix = SparseMatrix(rows)
    if matrix.shape != (size, size):
        raise InputError("expected a {0}x{0} matrix, got {1}".format(size, matrix.shape))
    return matrix.applyfunc(_exact)


def _largest(matrix):
    entries = [abs(v) for v in matrix.values()]
    return float(max(entries)) if entries else 0.0


def _kron(a, b):
    (ra, ca) = a.shape
    (rb, cb) = b.shape
    entries = {}
    for ((i, j), x) in a.todok().items():
        for ((k, l), y) in b.todok().items():
            entries[(i * rb + k, j * cb + l)] = x * y
    return SparseMatrix(ra * rb, ca * cb, entries)


class LieAlgebraData:
    """Structure constants c^i_{jk} of a Lie algebra, [e_j, e_k] = sum_i c^i_{jk} e_i"""

    def __init__(self, rank, structure=None):
        self.rank = rank
        if structure is None:
            structure = [[[0] * rank for _ in range(rank)] for _ in range(rank)]
        self.structure = [[[_exact(c) for c in row] for row in plane] for plane in structure]
        if len(self.structure) != rank or any(
            len(plane) != rank or any(len(row) != rank for row in plane) for plane in self.structure
        ):
            raise InputError("structure constants must form a {0}x{0}x{0} tensor".format(rank))

    @classmethod
    def abelian(cls, rank):
        return cls(rank)

    @classmethod
    def so3(cls):
        structure = [
            [[sympy.LeviCivita(i, j, k) for k in range(3)] for j in range(3)] for i in range(3)
        ]
        return cls(3, structure)

    def c(self, i, j, k):
        return self.structure[i][j][k]

    @property
    def is_abelian(self):
        return all(c == 0 for plane in self.structure for row in plane for c in row)

    def validate(self):
        r = range(self.rank)
        antisymmetry = max(
            [abs(self.c(i, j, k) + self.c(i, k, j)) for i in r for j in r for k in r], default=0
        )
        jacobi = 0
        for (i, j, k, l) in itertools.product(r, repeat=4):
            value = sum(
                self.c(m, j, k) * self.c(i, m, l)
                + self.c(m, k, l) * self.c(i, m, j)
                + self.c(m, l, j) * self.c(i, m, k)
                for m in r
            )
            jacobi = max(jacobi, abs(value))
        residuals = {"antisymmetry": float(antisymmetry), "jacobi": float(jacobi)}
        return AxiomReport(residuals, antisymmetry == 0 and jacobi == 0)


class GDiffSpace:
    """
    Graded complex vector space with a differential of degree +1, interior products of
    degree -1 and Lie derivatives of degree 0, one per basis element of the Lie algebra.
    """

    def __init__(self, labels, degrees, delta, interior, lie, algebra):
        self.labels = list(labels)
        self.degrees = [int(d) for d in degrees]
        size = len(self.labels)
        if len(self.degrees) != size:
            raise InputError("every basis label needs a degree")
        if len(interior) != algebra.rank or len(lie) != algebra.rank:
            raise InputError("one interior product and one Lie derivative per generator of g")

        self.algebra = algebra
        self.delta = _matrix(delta, size)
        self.interior = [_matrix(m, size) for m in interior]
        self.lie = [_matrix(m, size) for m in lie]

    @property
    def dimension(self):
        return len(self.labels)

    @classmethod
    def point(cls, algebra):
        zero = [[0]]
        return cls(["1"], [0], zero, [zero] * algebra.rank, [zero] * algebra.rank, algebra)

    @classmethod
    def circle_on_itself(cls):
        """Invariant forms {1, e1} on the circle acted on by rotation, i(e1) = 1"""
        zero = [[0, 0], [0, 0]]
        return cls(
            ["1", "e1"], [0, 1], zero, [[[0, 1], [0, 0]]], [zero], LieAlgebraData.abelian(1)
        )

    @classmethod
    def trivial_circle(cls):
        zero = [[0, 0], [0, 0]]
        return cls(["1", "e1"], [0, 1], zero, [zero], [zero], LieAlgebraData.abelian(1))

    @classmethod
    def from_json(cls, obj):
        try:
            labels = obj["labels"]
            interior = obj.get("interior", [])
            if "structure" in obj:
                algebra = LieAlgebraData(len(obj["structure"]), obj["structure"])
            else:
                algebra = LieAlgebraData.abelian(len(interior))
            return cls(
                labels,
                obj["degrees"],
                obj.get("delta", [[0] * len(labels) for _ in labels]),
                interior,
                obj.get("lie", [[[0] * len(labels) for _ in labels] for _ in interior]),
                algebra,
            )
        except (KeyError, TypeError) as e:
            raise InputError("malformed g-differential space: {}".format(e)) from e

    def degree_residual(self, matrix, shift):
        misplaced = [
            abs(v)
            for ((row, col), v) in matrix.todok().items()
            if self.degrees[row] != self.degrees[col] + shift
        ]
        return float(max(misplaced)) if misplaced else 0.0


def check_gdiff_axioms(M):
    g = M.algebra
    r = range(g.rank)
    delta = M.delta
    residuals = {
        "degree": max(
            [M.degree_residual(delta, 1)]
            + [M.degree_residual(m, -1) for m in M.interior]
            + [M.degree_residual(m, 0) for m in M.lie]
        ),
        "delta_squared": _largest(delta * delta),
        "delta_lie": max([_largest(delta * L - L * delta) for L in M.lie], default=0.0),
        "cartan_formula": max(
            [_largest(delta * i + i * delta - L) for (i, L) in zip(M.interior, M.lie)],
            default=0.0,
        ),
        "lie_bracket": 0.0,
        "lie_interior": 0.0,
        "interior_anticommute": 0.0,
    }

    for (j, k) in itertools.product(r, repeat=2):
        bracket_lie = sum((g.c(i, j, k) * M.lie[i] for i in r), SparseMatrix.zeros(M.dimension))
        bracket_int = sum(
            (g.c(i, j, k) * M.interior[i] for i in r), SparseMatrix.zeros(M.dimension)
        )
        (Lj, Lk, ij, ik) = (M.lie[j], M.lie[k], M.interior[j], M.interior[k])
        residuals["lie_bracket"] = max(
            residuals["lie_bracket"], _largest(Lj * Lk - Lk * Lj - bracket_lie)
        )
        residuals["lie_interior"] = max(
            residuals["lie_interior"], _largest(Lj * ik - ik * Lj - bracket_int)
        )
        residuals["interior_anticommute"] = max(
            residuals["interior_anticommute"], _largest(ij * ik + ik * ij)
        )

    return AxiomReport(residuals, all(v == 0 for v in residuals.values()))


class TruncatedWeil:
    """
    Weil algebra S g^v (x) /\\ g^v on generators theta^i (degree 1) and F^i (degree 2),
    truncated at total degree 2D. A monomial is a pair (I, J): a sorted tuple of theta
    indices and a tuple of F multiplicities.
    """

    def __init__(self, algebra, truncation):
        if truncation < 1:
            raise InputError("truncation D must be at least 1")
        self.algebra = algebra
        self.truncation = truncation
        self.top = 2 * truncation

        r = algebra.rank
        monomials = []
        for size in range(r + 1):
            for thetas in itertools.combinations(range(r), size):
                for total in range((self.top - size) // 2 + 1):
                    for curvatures in _compositions(total, r):
                        monomials.append((thetas, curvatures))
        monomials.sort(key=lambda m: (self.monomial_degree(m), m))
        self.monomials = monomials
        self.index = {m: i for (i, m) in enumerate(monomials)}

        self.delta = self._derivation(self._delta_theta, self._delta_curvature, 1)
        self.interior = [
            self._derivation(
                lambda i, j=j: {self.unit: Rational(1)} if i == j else {}, lambda i: {}, 1
            )
            for j in range(r)
        ]
        self.lie = [
            self._derivation(
                lambda i, j=j: {self.theta(k): -algebra.c(i, j, k) for k in range(r)},
                lambda i, j=j: {self.curvature(k): -algebra.c(i, j, k) for k in range(r)},
                0,
            )
            for j in range(r)
        ]

    @property
    def unit(self):
        return ((), (0,) * self.algebra.rank)

    def theta(self, i):
        return ((i,), (0,) * self.algebra.rank)

    def curvature(self, i):
        return ((), tuple(1 if k == i else 0 for k in range(self.algebra.rank)))

    @staticmethod
    def monomial_degree(monomial):
        return len(monomial[0]) + 2 * sum(monomial[1])

    @property
    def dimension(self):
        return len(self.monomials)

    def degrees(self):
        return [self.monomial_degree(m) for m in self.monomials]

    def is_horizontal(self, monomial):
        return len(monomial[0]) == 0

    def multiply_monomials(self, a, b):
        """Returns (sign, monomial) or None when the product vanishes or is truncated away"""
        (I, J) = a
        (K, L) = b
        if set(I) & set(K):
            return None
        product = (tuple(sorted(I + K)), tuple(x + y for (x, y) in zip(J, L)))
        if self.monomial_degree(product) > self.top:
            return None
        inversions = sum(1 for x in I for y in K if x > y)
        return ((-1) ** inversions, product)

    def multiply(self, x, y):
        result = {}
        for (a, ca) in x.items():
            for (b, cb) in y.items():
                product = self.multiply_monomials(a, b)
                if product is not None:
                    (sign, m) = product
                    result[m] = result.get(m, 0) + sign * ca * cb
        return {m: c for (m, c) in result.items() if c != 0}

    def left_multiplication(self, monomial):
        entries = {}
        for (col, m) in enumerate(self.monomials):
            product = self.multiply_monomials(monomial, m)
            if product is not None:
                (sign, image) = product
                entries[(self.index[image], col)] = sign
        return SparseMatrix(self.dimension, self.dimension, entries)

    def _delta_theta(self, i):
        g = self.algebra
        image = {self.curvature(i): Rational(1)}
        for (j, k) in itertools.product(range(g.rank), repeat=2):
            if g.c(i, j, k) == 0:
                continue
            for (m, c) in self.multiply({self.theta(j): 1}, {self.theta(k): 1}).items():
                image[m] = image.get(m, 0) - Rational(1, 2) * g.c(i, j, k) * c
        return image

    def _delta_curvature(self, i):
        g = self.algebra
        image = {}
        for (j, k) in itertools.product(range(g.rank), repeat=2):
            if g.c(i, j, k) == 0:
                continue
            for (m, c) in self.multiply({self.curvature(j): 1}, {self.theta(k): 1}).items():
                image[m] = image.get(m, 0) + g.c(i, j, k) * c
        return image

    def _derivation(self, on_theta, on_curvature, parity):
        r = self.algebra.rank
        entries = {}
        for (col, (thetas, curvatures)) in enumerate(self.monomials):
            image = {}
            for (position, i) in enumerate(thetas):
                sign = (-1) ** (parity * position)
                left = {(thetas[:position], (0,) * r): sign}
                right = {(thetas[position + 1 :], curvatures): 1}
                term = self.multiply(self.multiply(left, on_theta(i)), right)
                for (m, c) in term.items():
                    image[m] = image.get(m, 0) + c

            sign = (-1) ** (parity * len(thetas))
            for i in range(r):
                if curvatures[i] == 0:
                    continue
                lowered = tuple(x - (1 if k == i else 0) for (k, x) in enumerate(curvatures))
                left = {(thetas, lowered): sign * curvatures[i]}
                for (m, c) in self.multiply(left, on_curvature(i)).items():
                    image[m] = image.get(m, 0) + c

            for (m, c) in image.items():
                if c != 0:
                    entries[(self.index[m], col)] = c
        return SparseMatrix(self.dimension, self.dimension, entries)

    def check_relations(self):
        """Generator relations and the g-differential axioms, restricted to safe degrees"""
        degrees = self.degrees()

        def restricted(matrix, limit):
            cols = [c for (c, d) in enumerate(degrees) if d <= limit]
            return matrix.extract(list(range(self.dimension)), cols)

        residuals = {
            "delta_squared": _largest(restricted(self.delta * self.delta, self.top - 2)),
            "cartan_formula": max(
                [
                    _largest(restricted(self.delta * i + i * self.delta - L, self.top - 1))
                    for (i, L) in zip(self.interior, self.lie)
                ],
                default=0.0,
            ),
            "interior_anticommute": max(
                [_largest(i * j + j * i) for i in self.interior for j in self.interior],
                default=0.0,
            ),
            "delta_lie": max(
                [
                    _largest(restricted(self.delta * L - L * self.delta, self.top - 1))
                    for L in self.lie
                ],
                default=0.0,
            ),
        }
        return AxiomReport(residuals, all(v == 0 for v in residuals.values()))


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def weil_algebra(g, D=None):
    return TruncatedWeil(g, setting(EquivariantDefaults, "truncation", D))


class TensorSpace:
    """M (x) W g with Koszul signs; a basis vector (a, w) sits at index a * dim W + w"""

    def __init__(self, M, weil):
        self.M = M
        self.weil = weil
        self.pairs = [(a, w) for a in range(M.dimension) for w in range(weil.dimension)]
        weilDegrees = weil.degrees()
        self.degrees = [M.degrees[a] + weilDegrees[w] for (a, w) in self.pairs]
        self.identityM = SparseMatrix.eye(M.dimension)
        self.identityW = SparseMatrix.eye(weil.dimension)
        self.koszul = SparseMatrix.diag(*[(-1) ** d for d in M.degrees])

    @property
    def dimension(self):
        return len(self.pairs)

    def labels(self):
        return [
            "{}⊗{}".format(self.M.labels[a], _monomial_label(self.weil.monomials[w]))
            for (a, w) in self.pairs
        ]

    def indices_in_degree(self, p):
        return [i for (i, d) in enumerate(self.degrees) if d == p]

    def delta(self):
        return _kron(self.M.delta, self.identityW) + _kron(self.koszul, self.weil.delta)

    def interior(self, j):
        return _kron(self.M.interior[j], self.identityW) + _kron(self.koszul, self.weil.interior[j])

    def lie(self, j):
        return _kron(self.M.lie[j], self.identityW) + _kron(self.identityM, self.weil.lie[j])

    def curvature_action(self, i):
        return _kron(self.identityM, self.weil.left_multiplication(self.weil.curvature(i)))

    def cartan_delta(self):
        result = _kron(self.M.delta, self.identityW)
        for j in range(self.M.algebra.rank):
            result -= _kron(self.M.interior[j], self.identityW) * self.curvature_action(j)
        return result

    def gamma(self):
        # theta^j moves past i_j m, picking up (-1)^{|m| - 1}
        twist = SparseMatrix.diag(*[(-1) ** (d - 1) for d in self.M.degrees])
        result = SparseMatrix.zeros(self.dimension)
        for j in range(self.M.algebra.rank):
            theta = self.weil.left_multiplication(self.weil.theta(j))
            result += _kron(self.M.interior[j] * twist, theta)
        return result


def _monomial_label(monomial):
    (thetas, curvatures) = monomial
    parts = ["θ{}".format(i + 1) for i in thetas]
    for (i, power) in enumerate(curvatures):
        if power == 1:
            parts.append("F{}".format(i + 1))
        elif power > 1:
            parts.append("F{}^{}".format(i + 1, power))
    return "".join(parts) or "1"


class EquivariantComplex:
    def __init__(self, model, space, bases, differential, truncation):
        self.model = model
        self.space = space
        self.bases = bases
        self.differential = differential
        self.truncation = truncation
        self.safe_degree = 2 * truncation - 1

    def dimension(self, p):
        return self.bases[p].shape[1] if p in self.bases else 0

    def differential_rank(self, p):
        if self.dimension(p) == 0:
            return 0
        return (self.differential * self.bases[p]).rank()

    def square_residual(self):
        residual = 0.0
        for p in range(0, self.safe_degree):
            if self.dimension(p):
                residual = max(
                    residual, _largest(self.differential * self.differential * self.bases[p])
                )
        return residual

    def linearity_residual(self):
        """Largest entry of [d, F^i] on model vectors whose image stays below the truncation"""
        residual = 0.0
        for i in range(self.space.M.algebra.rank):
            F = self.space.curvature_action(i)
            commutator = self.differential * F - F * self.differential
            for (p, basis) in self.bases.items():
                if p <= self.safe_degree - 2:
                    residual = max(residual, _largest(commutator * basis))
        return residual

    def f_degree(self, index):
        (_, w) = self.space.pairs[index]
        return sum(self.space.weil.monomials[w][1])


def _kernel_in_degree(space, operators, p):
    cols = space.indices_in_degree(p)
    if not cols:
        return None
    if operators:
        rows = list(range(space.dimension))
        stacked = SparseMatrix.vstack(*[op.extract(rows, cols) for op in operators])
        kernel = stacked.nullspace()
    else:
        kernel = [SparseMatrix.eye(len(cols))[:, i] for i in range(len(cols))]
    if not kernel:
        return None
    basis = SparseMatrix.zeros(space.dimension, len(kernel))
    for (k, vector) in enumerate(kernel):
        for (row, col) in enumerate(cols):
            basis[col, k] = vector[row]
    return basis


def basic_subspace(space, p):
    """Basis of (M (x) W g)_bas in degree p, the common kernel of every i_j and L_j"""
    r = range(space.M.algebra.rank)
    operators = [space.interior(j) for j in r] + [space.lie(j) for j in r]
    return _kernel_in_degree(space, operators, p)


def invariant_subspace(space, p, horizontal=False):
    """Basis of the g-invariant part in degree p, optionally restricted to theta-free vectors"""
    operators = [space.lie(j) for j in range(space.M.algebra.rank)]
    if horizontal:
        # Projection onto theta components; its kernel is the horizontal part
        operators.append(
            SparseMatrix(
                space.dimension,
                space.dimension,
                {
                    (i, i): 1
                    for (i, (_, w)) in enumerate(space.pairs)
                    if not space.weil.is_horizontal(space.weil.monomials[w])
                },
            )
        )
    return _kernel_in_degree(space, operators, p)


def curvature_action(C, i):
    """Multiplication by F^i on M (x) W g, the S g^v-module structure of the models"""
    return C.space.curvature_action(i)


def build_model(M, g=None, D=None, model=CARTAN):
    g = M.algebra if g is None else g
    D = setting(EquivariantDefaults, "truncation", D)
    if model not in (WEIL, CARTAN):
        raise InputError("model must be {} or {}".format(WEIL, CARTAN))
    if not check_gdiff_axioms(M).passed:
        raise InputError("g-differential space fails its axioms")

    space = TensorSpace(M, TruncatedWeil(g, D))
    if model == WEIL:
        differential = space.delta()
        bases = {p: basic_subspace(space, p) for p in range(0, 2 * D)}
    else:
        differential = space.cartan_delta()
        bases = {p: invariant_subspace(space, p, horizontal=True) for p in range(0, 2 * D)}
    bases = {p: b for (p, b) in bases.items() if b is not None}

    logger.debug(
        "%s model with D=%s: dims %s", model, D, {p: b.shape[1] for (p, b) in bases.items()}
    )
    return EquivariantComplex(model, space, bases, differential, D)


def cohomology(C, max_degree=None):
    top = C.safe_degree if max_degree is None else max_degree
    if top > C.safe_degree:
        raise TruncationError("increase D: degree {} needs D > {}".format(top, C.truncation))
    if C.square_residual() != 0:
        raise InputError("differential does not square to zero on the safe range")

    ranks = {p: C.differential_rank(p) for p in range(-1, top + 1)}
    return {p: C.dimension(p) - ranks[p] - ranks[p - 1] for p in range(0, top + 1)}


def weil_cohomology(W):
    """Cohomology of the truncated Weil algebra itself, which is acyclic"""
    return cohomology(build_model(GDiffSpace.point(W.algebra), W.algebra, W.truncation, WEIL))


class MathaiQuillen:
    """phi = exp(gamma) with gamma = sum_j i_{e_j} (x) theta^j, acting on M (x) W g"""

    def __init__(self, space):
        self.space = space
        self.gamma = space.gamma()
        self.matrix = _exponential(self.gamma)
        self.inverse = _exponential(-self.gamma)

    def intertwining_residual(self, weil_model):
        """Largest entry of delta_Car phi - phi delta_W on Weil-model vectors of safe degree"""
        residual = 0.0
        deltaCar = self.space.cartan_delta()
        deltaW = self.space.delta()
        for (p, basis) in weil_model.bases.items():
            if p > 2 * weil_model.truncation - 2:
                continue
            difference = deltaCar * self.matrix * basis - self.matrix * deltaW * basis
            residual = max(residual, _largest(difference))
        return residual

    def lands_in_cartan(self, weil_model):
        weil = self.space.weil
        r = range(self.space.M.algebra.rank)
        lies = [self.space.lie(j) for j in r]
        for basis in weil_model.bases.values():
            image = self.matrix * basis
            for ((row, _), v) in image.todok().items():
                (_, w) = self.space.pairs[row]
                if v != 0 and not weil.is_horizontal(weil.monomials[w]):
                    return False
            if any(_largest(L * image) != 0 for L in lies):
                return False
        return True


def _exponential(nilpotent):
    size = nilpotent.shape[0]
    result = SparseMatrix.eye(size)
    term = SparseMatrix.eye(size)
    for k in range(1, size + 2):
        term = term * nilpotent / k
        if term.nnz() == 0:
            break
        result += term
    return result


def mathai_quillen(M, g=None, D=None):
    g = M.algebra if g is None else g
    D = setting(EquivariantDefaults, "truncation", D)
    return MathaiQuillen(TensorSpace(M, TruncatedWeil(g, D)))
