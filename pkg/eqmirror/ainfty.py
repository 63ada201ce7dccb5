"""
Unital g-differential gapped filtered A-infinity algebras on a small graded basis.

An operation m_{k,beta} is stored sparsely as ``{inputs: {output: value}}`` where ``inputs`` is
a tuple of basis indices. A key that is present with an empty dictionary is a zero operation;
a key that is absent is a hole and makes the checkers refuse the algebra. Classes beta are
(maslov, energy) pairs, the image of a disk class under (mu, omega); classes with the same
image are summed.

Signs use shifted degrees |x|' = |x| - 1 throughout.
"""

import copy
import itertools
import logging
import math
from collections import Counter, namedtuple
from fractions import Fraction

import sympy

from eqmirror.codec import (
    rational_from_json,
    rational_to_json,
    scalar_to_json,
    value_from_json,
    value_to_json,
)
from eqmirror.config import AInftyDefaults, setting
from eqmirror.errors import HypothesisViolation, InputError, TruncationError
from eqmirror.novikov import NovikovScalar, as_exponent, as_scalar, truncate

logger = logging.getLogger(__name__)

ZERO_CLASS = (0, Fraction(0))

Curvature = namedtuple("Curvature", ["vector", "scalar"])


def as_class(beta):
    (maslov, energy) = beta
    if isinstance(energy, (list, tuple)):
        energy = rational_from_json(energy)
    return (int(maslov), as_exponent(energy))


def add_classes(a, b):
    return (a[0] + b[0], a[1] + b[1])


def format_class(beta):
    return "({}, {})".format(beta[0], beta[1])


def format_key(key):
    (k, beta) = key
    return "m_{{{},{}}}".format(k, format_class(beta))


def magnitude(value):
    if isinstance(value, NovikovScalar):
        return value.magnitude()
    return abs(value)


def _vanishes(value):
    if isinstance(value, NovikovScalar):
        return value.is_zero
    return value == 0


def _accumulate(vector, key, value):
    vector[key] = vector.get(key, 0) + value


def _prune(tensor):
    pruned = {}
    for (inputs, outs) in tensor.items():
        kept = {out: v for (out, v) in outs.items() if not _vanishes(v)}
        if kept:
            pruned[inputs] = kept
    return pruned


def _fraction(value):
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    return value


def _rows(matrix):
    if hasattr(matrix, "tolist"):
        matrix = matrix.tolist()
    return [[_fraction(v) for v in row] for row in matrix]


class GappedMonoid:
    """
    Discrete submonoid of 2Z x R_{>=0} generated by finitely many classes, enumerated up to an
    energy cutoff.
    """

    def __init__(self, generators=(), cutoff=None):
        self.cutoff = as_exponent(setting(AInftyDefaults, "energyCutoff", cutoff))

        kept = set()
        for beta in generators:
            (maslov, energy) = as_class(beta)
            if maslov % 2:
                raise InputError("Maslov indices are even, got {}".format(maslov))
            if energy < 0:
                raise InputError("energies are nonnegative, got {}".format(energy))
            if energy == 0 and maslov != 0:
                raise InputError("a zero-energy generator must be the trivial class")
            if energy > 0:
                kept.add((maslov, energy))
        self.generators = tuple(sorted(kept, key=lambda b: (b[1], b[0])))

        elements = {ZERO_CLASS}
        frontier = [ZERO_CLASS]
        while frontier:
            grown = []
            for beta in frontier:
                for generator in self.generators:
                    candidate = add_classes(beta, generator)
                    if candidate[1] <= self.cutoff and candidate not in elements:
                        elements.add(candidate)
                        grown.append(candidate)
            frontier = grown
        self.elements = sorted(elements, key=lambda b: (b[1], b[0]))
        self._members = elements

    @classmethod
    def trivial(cls, cutoff=None):
        return cls((), cutoff)

    def __contains__(self, beta):
        return beta in self._members

    def __len__(self):
        return len(self.elements)

    def splits(self, beta):
        return [
            (b1, (beta[0] - b1[0], beta[1] - b1[1]))
            for b1 in self.elements
            if (beta[0] - b1[0], beta[1] - b1[1]) in self._members
        ]

    def to_json(self):
        return {
            "generators": [[m, rational_to_json(e)] for (m, e) in self.generators],
            "cutoff": rational_to_json(self.cutoff),
        }


class GappedAInfty:
    """
    Operations m_{k,beta} on a graded basis with a unit, optionally with a g-action given by
    interior products and Lie derivatives (one matrix each per generator of g, column = source).

    With ``novikov=True`` the values are Novikov scalars and the monoid is trivial: this is the
    associated curved structure, where the energy already sits in the exponents.
    """

    def __init__(
        self,
        degrees,
        unit,
        monoid,
        operations,
        max_arity=None,
        interior=(),
        lie=(),
        algebra=None,
        labels=None,
        novikov=False,
        differential=None,
    ):
        self.degrees = [int(d) for d in degrees]
        self.unit = unit
        self.monoid = monoid
        self.max_arity = setting(AInftyDefaults, "maxArity", max_arity)
        self.interior = [_rows(m) for m in interior]
        self.lie = [_rows(m) for m in lie]
        self.algebra = algebra
        if labels is None:
            labels = ["x{}".format(i) for i in range(len(self.degrees))]
        self.labels = list(labels)
        self.novikov = novikov
        # Left inverse of the inclusion when this algebra is the g-invariant part of another
        self.projection = None

        if unit is not None and not 0 <= unit < self.dimension:
            raise InputError("unit index {} out of range".format(unit))
        if len(self.interior) != len(self.lie):
            raise InputError("one interior product and one Lie derivative per generator of g")
        for m in self.interior + self.lie:
            if len(m) != self.dimension or any(len(row) != self.dimension for row in m):
                raise InputError("g-action matrices must be {0}x{0}".format(self.dimension))

        self.operations = {}
        for ((k, beta), tensor) in operations.items():
            beta = as_class(beta)
            if k > self.max_arity:
                raise InputError("m_{} exceeds the maximal arity {}".format(k, self.max_arity))
            if beta not in monoid:
                raise InputError("class {} is not in the monoid".format(format_class(beta)))
            for (inputs, outs) in tensor.items():
                if len(inputs) != k or any(not 0 <= x < self.dimension for x in inputs):
                    raise InputError("bad inputs {} for {}".format(inputs, format_key((k, beta))))
                if any(not 0 <= out < self.dimension for out in outs):
                    raise InputError("bad output in {}".format(format_key((k, beta))))
            self.operations[(k, beta)] = _prune({tuple(i): dict(o) for (i, o) in tensor.items()})

        if not novikov and self.operations.get((0, ZERO_CLASS)):
            raise InputError("m_{0,0} must vanish")

        if differential is None:
            differential = self.operations.get((1, ZERO_CLASS), {})
        self.differential = _prune(differential)

    @property
    def dimension(self):
        return len(self.degrees)

    @property
    def rank(self):
        return len(self.interior)

    def shifted(self, index):
        return self.degrees[index] - 1

    @property
    def is_curved(self):
        return any(
            not _vanishes(v)
            for ((k, _), tensor) in self.operations.items()
            if k == 0
            for outs in tensor.values()
            for v in outs.values()
        )

    def holes(self):
        missing = []
        for k in range(self.max_arity + 1):
            for beta in self.monoid.elements:
                if (k, beta) == (0, ZERO_CLASS):
                    continue
                if (k, beta) not in self.operations:
                    missing.append((k, beta))
        return missing

    def operation(self, k, beta=ZERO_CLASS):
        key = (k, as_class(beta))
        if key not in self.operations:
            if key == (0, ZERO_CLASS):
                return {}
            raise InputError("missing tensor {}".format(format_key(key)))
        return self.operations[key]

    def apply(self, k, beta, inputs):
        return dict(self.operation(k, beta).get(tuple(inputs), {}))

    def copy(self):
        return copy.deepcopy(self)

    def to_json(self):
        def encode(tensor):
            return [
                [list(inputs), out, value_to_json(v)]
                for (inputs, outs) in sorted(tensor.items())
                for (out, v) in sorted(outs.items())
            ]

        report = {
            "labels": self.labels,
            "degrees": self.degrees,
            "unit": self.unit,
            "maxArity": self.max_arity,
            "novikov": self.novikov,
            "monoid": self.monoid.to_json(),
            "tensors": [
                {"k": k, "beta": [beta[0], rational_to_json(beta[1])], "entries": encode(t)}
                for ((k, beta), t) in sorted(self.operations.items(), key=_key_order)
            ],
            "interior": [[[value_to_json(v) for v in row] for row in m] for m in self.interior],
            "lie": [[[value_to_json(v) for v in row] for row in m] for m in self.lie],
        }
        if self.novikov:
            report["differential"] = encode(self.differential)
        if self.algebra is not None:
            report["structure"] = [
                [[rational_to_json(_fraction(c)) for c in row] for row in plane]
                for plane in self.algebra.structure
            ]
        return report


def _key_order(item):
    ((k, beta), _) = item
    return (k, beta[1], beta[0])


def algebra_from_json(obj):
    from eqmirror.equivariant import LieAlgebraData

    try:
        monoid = GappedMonoid(
            [as_class(beta) for beta in obj["monoid"].get("generators", [])],
            rational_from_json(obj["monoid"]["cutoff"]),
        )
        operations = {}
        for tensor in obj["tensors"]:
            key = (int(tensor["k"]), as_class(tensor["beta"]))
            entries = operations.setdefault(key, {})
            for (inputs, out, value) in tensor.get("entries", []):
                entries.setdefault(tuple(inputs), {})[int(out)] = value_from_json(value)
        matrices = {
            name: [[[value_from_json(v) for v in row] for row in m] for m in obj.get(name, [])]
            for name in ("interior", "lie")
        }
        differential = None
        if "differential" in obj:
            differential = {}
            for (inputs, out, value) in obj["differential"]:
                differential.setdefault(tuple(inputs), {})[int(out)] = value_from_json(value)
        algebra = None
        if "structure" in obj:
            algebra = LieAlgebraData(len(obj["structure"]), obj["structure"])
        return GappedAInfty(
            obj["degrees"],
            obj.get("unit"),
            monoid,
            operations,
            max_arity=obj.get("maxArity"),
            interior=matrices["interior"],
            lie=matrices["lie"],
            algebra=algebra,
            labels=obj.get("labels"),
            novikov=bool(obj.get("novikov", False)),
            differential=differential,
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError("malformed algebra JSON: {}".format(e)) from e


class CheckReport:
    """Residual per key; an identity holds when its residual is at most the tolerance"""

    def __init__(self, name, residuals, tolerance):
        self.name = name
        self.residuals = residuals
        self.tolerance = tolerance

    @property
    def passed(self):
        return all(r <= self.tolerance for r in self.residuals.values())

    @property
    def largest(self):
        return max(self.residuals.values(), default=0.0)

    def failures(self):
        return [key for (key, r) in self.residuals.items() if r > self.tolerance]

    def to_json(self):
        return {
            "check": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "residuals": [
                {"key": _label(key), "residual": float(r)}
                for (key, r) in sorted(self.residuals.items(), key=lambda kv: _label(kv[0]))
            ],
        }


def _label(key):
    if isinstance(key, tuple) and len(key) == 2 and isinstance(key[1], tuple):
        return format_key(key)
    if isinstance(key, tuple) and len(key) == 3:
        return "{}:{}".format(key[0], format_key(key[1:]))
    return str(key[0] if isinstance(key, tuple) else key)


def _require_complete(A):
    holes = A.holes()
    if holes:
        raise InputError("missing tensors: {}".format(", ".join(format_key(h) for h in holes)))


def _degree_residual(A, k, beta, tensor):
    worst = 0.0
    for (inputs, outs) in tensor.items():
        expected = sum(A.shifted(x) for x in inputs) + 1 - beta[0]
        for (out, v) in outs.items():
            actual = A.shifted(out)
            wrong = (actual - expected) % 2 if A.novikov else actual != expected
            if wrong:
                worst = max(worst, magnitude(v))
    return worst


def check_ainfty(A, tolerance=None):
    tolerance = setting(AInftyDefaults, "tolerance", tolerance)
    _require_complete(A)

    # m_{k+1} o m_0 terms need one extra arity, which curved algebras do not carry at the top
    top = A.max_arity - 1 if A.is_curved else A.max_arity
    relations = {(k, beta): {} for k in range(top + 1) for beta in A.monoid.elements}

    for ((k2, b2), inner) in A.operations.items():
        for ((k1, b1), outer) in A.operations.items():
            key = (k1 + k2 - 1, add_classes(b1, b2))
            if key not in relations:
                continue
            target = relations[key]
            for (ys, outs) in outer.items():
                for (i, y) in enumerate(ys):
                    sign = (-1) ** sum(A.shifted(a) for a in ys[:i])
                    for (xs, inner_outs) in inner.items():
                        if y not in inner_outs:
                            continue
                        inputs = ys[:i] + xs + ys[i + 1 :]
                        for (out, v1) in outs.items():
                            _accumulate(target, (inputs, out), sign * v1 * inner_outs[y])

    residuals = {}
    for (key, vector) in relations.items():
        residuals[key] = max((magnitude(v) for v in vector.values()), default=0.0)
    for (key, tensor) in A.operations.items():
        degree = _degree_residual(A, key[0], key[1], tensor)
        residuals[key] = max(residuals.get(key, 0.0), degree)

    report = CheckReport("ainfty", residuals, tolerance)
    logger.debug("A-infinity relations on %s keys, largest %s", len(residuals), report.largest)
    return report


def check_unitality(A, tolerance=0.0):
    if A.unit is None:
        raise InputError("algebra has no unit index")
    unit = A.unit

    residuals = {}
    for (key, tensor) in A.operations.items():
        if key == (2, ZERO_CLASS):
            continue
        residuals[key] = max(
            (
                magnitude(v)
                for (inputs, outs) in tensor.items()
                if unit in inputs
                for v in outs.values()
            ),
            default=0.0,
        )

    product = A.operations.get((2, ZERO_CLASS), {})
    worst = 0.0
    for x in range(A.dimension):
        left = product.get((unit, x), {})
        right = product.get((x, unit), {})
        sign = (-1) ** A.degrees[x]
        for out in set(left) | set(right) | {x}:
            expected = 1 if out == x else 0
            worst = max(worst, magnitude(left.get(out, 0) - expected))
            worst = max(worst, magnitude(sign * right.get(out, 0) - expected))
    residuals[(2, ZERO_CLASS)] = worst
    return CheckReport("unitality", residuals, tolerance)


def _derivation_residual(A, tensor, matrix, odd):
    residual = {}
    for (inputs, outs) in tensor.items():
        for (out, v) in outs.items():
            for r in range(A.dimension):
                if matrix[r][out] != 0:
                    _accumulate(residual, (inputs, r), matrix[r][out] * v)
        for (i, x) in enumerate(inputs):
            sign = (-1) ** sum(A.shifted(a) for a in inputs[:i]) if odd else -1
            for z in range(A.dimension):
                c = matrix[x][z]
                if c == 0:
                    continue
                source = inputs[:i] + (z,) + inputs[i + 1 :]
                for (out, v) in outs.items():
                    _accumulate(residual, (source, out), sign * c * v)
    return max((magnitude(v) for v in residual.values()), default=0.0)


def _matrix_product(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def check_gdiff_compat(A, tolerance=None):
    tolerance = setting(AInftyDefaults, "tolerance", tolerance)
    if not A.interior:
        raise InputError("algebra carries no g-action")

    n = A.dimension
    delta = [[0] * n for _ in range(n)]
    for ((x,), outs) in A.differential.items():
        for (out, v) in outs.items():
            delta[out][x] = v

    residuals = {}
    for (I, L) in zip(A.interior, A.lie):
        for (key, tensor) in A.operations.items():
            if key != (1, ZERO_CLASS):
                interior = _derivation_residual(A, tensor, I, odd=True)
                label = ("interior",) + key
                residuals[label] = max(residuals.get(label, 0.0), interior)
            lie = _derivation_residual(A, tensor, L, odd=False)
            residuals[("lie",) + key] = max(residuals.get(("lie",) + key, 0.0), lie)

        if A.unit is not None:
            unitResidual = max(magnitude(I[r][A.unit]) for r in range(n))
            unitResidual = max(unitResidual, max(magnitude(L[r][A.unit]) for r in range(n)))
            residuals[("unit",)] = max(residuals.get(("unit",), 0.0), unitResidual)

        left = _matrix_product(delta, I)
        right = _matrix_product(I, delta)
        cartan = max(
            (magnitude(left[r][c] + right[r][c] - L[r][c]) for r in range(n) for c in range(n)),
            default=0.0,
        )
        residuals[("cartan",)] = max(residuals.get(("cartan",), 0.0), cartan)

    report = CheckReport("gdiff", residuals, tolerance)
    interiorHolds = all(r <= tolerance for (k, r) in residuals.items() if k[0] == "interior")
    lieHolds = all(r <= tolerance for (k, r) in residuals.items() if k[0] == "lie")
    report.agreement = lieHolds or not interiorHolds
    if not report.agreement:
        logger.warning("interior compatibility holds but Lie compatibility fails")
    return report


def unshifted_view(A, k, beta=ZERO_CLASS):
    """m_{k,beta} on unshifted degrees: a map of degree 2 - k - mu(beta), signs from desuspension"""
    tensor = A.operation(k, beta)
    view = {}
    for (inputs, outs) in tensor.items():
        sign = (-1) ** sum((k - i) * A.degrees[x] for (i, x) in enumerate(inputs, start=1))
        view[inputs] = {out: sign * v for (out, v) in outs.items()}
    return view


class BoundingCochainCandidate:
    """b_+ = sum_i b_i x_i over degree-one basis elements, coefficients in Lambda_+"""

    def __init__(self, coefficients, constants=None):
        if isinstance(coefficients, (list, tuple)):
            coefficients = dict(enumerate(coefficients))
        self.coefficients = {
            int(i): as_scalar(c) for (i, c) in coefficients.items() if not as_scalar(c).is_zero
        }
        self.constants = None if constants is None else [as_scalar(c) for c in constants]

    @property
    def is_zero(self):
        return not self.coefficients

    def project(self, projection):
        projected = {}
        for (row, weights) in enumerate(projection):
            total = NovikovScalar.zero()
            for (i, c) in self.coefficients.items():
                if weights[i] != 0:
                    total = total + c * complex(weights[i])
            if not total.is_zero:
                projected[row] = total
        return BoundingCochainCandidate(projected, self.constants)

    def validate(self, A):
        """Returns c(X) per generator of g, raising when b_+ is not a candidate"""
        problems = []
        for (i, c) in self.coefficients.items():
            if not 0 <= i < A.dimension:
                problems.append("index {} out of range".format(i))
                continue
            if A.degrees[i] != 1:
                problems.append("coefficient on {} of degree {}".format(A.labels[i], A.degrees[i]))
            if not c.in_lambda_plus():
                problems.append("coefficient on {} is not in Λ₊".format(A.labels[i]))
        if problems:
            raise InputError("not a bounding-cochain candidate: {}".format("; ".join(problems)))

        image = {}
        for (i, c) in self.coefficients.items():
            for (out, v) in A.differential.get((i,), {}).items():
                _accumulate(image, out, c * v)
        if any(not _vanishes(v) for v in image.values()):
            problems.append("δb₊ ≠ 0")

        constants = []
        for (j, I) in enumerate(A.interior):
            contraction = {}
            for (i, c) in self.coefficients.items():
                for r in range(A.dimension):
                    if I[r][i] != 0:
                        _accumulate(contraction, r, c * I[r][i])
            stray = [r for (r, v) in contraction.items() if r != A.unit and not _vanishes(v)]
            if stray:
                problems.append("i_{} b₊ is not a multiple of the unit".format(j + 1))
                continue
            constant = as_scalar(contraction.get(A.unit, 0))
            if self.constants is not None and not constant.approx(self.constants[j]):
                problems.append(
                    "i_{} b₊ = {} differs from c = {}".format(j + 1, constant, self.constants[j])
                )
            constants.append(constant)

        if problems:
            raise InputError("not a bounding-cochain candidate: {}".format("; ".join(problems)))
        return constants

    def to_json(self):
        return {str(i): scalar_to_json(c) for (i, c) in sorted(self.coefficients.items())}


def invariant_part(A):
    """Restriction to the g-invariant subspace; a new basis when the Lie derivatives act"""
    if all(v == 0 for L in A.lie for row in L for v in row):
        return A

    n = A.dimension
    columns = []
    for p in sorted(set(A.degrees)):
        block = [i for (i, d) in enumerate(A.degrees) if d == p]
        stacked = sympy.Matrix(
            [[sympy.nsimplify(L[r][c]) for c in block] for L in A.lie for r in range(n)]
        )
        kernel = []
        for v in stacked.nullspace():
            full = sympy.zeros(n, 1)
            for (row, col) in enumerate(block):
                full[col] = v[row]
            kernel.append(full)
        if A.unit in block:
            kernel.insert(0, sympy.Matrix([1 if i == A.unit else 0 for i in range(n)]))
        if kernel:
            (_, pivots) = sympy.Matrix.hstack(*kernel).rref()
            columns.extend((p, kernel[i]) for i in pivots)

    V = sympy.Matrix.hstack(*[v for (_, v) in columns])
    P = (V.T * V).inv() * V.T
    m = V.shape[1]
    inclusion = [[_fraction(V[r, c]) for c in range(m)] for r in range(n)]
    projection = [[_fraction(P[r, c]) for c in range(n)] for r in range(m)]
    support = {
        y: [(a, inclusion[y][a]) for a in range(m) if inclusion[y][a] != 0] for y in range(n)
    }

    operations = {}
    for ((k, beta), tensor) in A.operations.items():
        restricted = {}
        for (ys, outs) in tensor.items():
            for choice in itertools.product(*[support[y] for y in ys]):
                weight = math.prod(c for (_, c) in choice) if choice else 1
                inputs = tuple(a for (a, _) in choice)
                for (out, v) in outs.items():
                    for b in range(m):
                        if projection[b][out] != 0:
                            _accumulate(
                                restricted.setdefault(inputs, {}),
                                b,
                                projection[b][out] * weight * v,
                            )
        operations[(k, beta)] = restricted

    def restrict(matrix):
        M = sympy.Matrix([[sympy.nsimplify(v) for v in row] for row in matrix])
        R = P * M * V
        return [[_fraction(R[r, c]) for c in range(m)] for r in range(m)]

    unit = 0 if A.unit is not None else None
    restrictedA = GappedAInfty(
        [p for (p, _) in columns],
        unit,
        A.monoid,
        operations,
        max_arity=A.max_arity,
        interior=[restrict(I) for I in A.interior],
        lie=[[[0] * m for _ in range(m)] for _ in A.lie],
        algebra=A.algebra,
        labels=["v{}".format(i + 1) for i in range(m)],
        novikov=A.novikov,
    )
    restrictedA.projection = projection
    logger.debug("g-invariant part has dimension %s of %s", m, n)
    return restrictedA


def curved(A):
    """The associated curved structure m_k = sum_beta T^omega(beta) m_{k,beta}"""
    if A.novikov:
        return A
    cutoff = A.monoid.cutoff
    operations = {(k, ZERO_CLASS): {} for k in range(A.max_arity + 1)}
    for ((k, beta), tensor) in A.operations.items():
        target = operations[(k, ZERO_CLASS)]
        for (inputs, outs) in tensor.items():
            for (out, v) in outs.items():
                weighted = NovikovScalar.monomial(v, beta[1], precision=cutoff)
                _accumulate(target.setdefault(inputs, {}), out, weighted)

    result = GappedAInfty(
        A.degrees,
        A.unit,
        GappedMonoid.trivial(cutoff),
        operations,
        max_arity=A.max_arity,
        interior=A.interior,
        lie=A.lie,
        algebra=A.algebra,
        labels=A.labels,
        novikov=True,
        differential=A.operations.get((1, ZERO_CLASS), {}),
    )
    result.projection = A.projection
    return result


def evaluate_lambda(A, lam):
    if A.algebra is not None and not A.algebra.is_abelian:
        raise HypothesisViolation("evaluation requires abelian g")
    lam = [as_scalar(v) for v in lam]
    if len(lam) != A.rank:
        raise InputError("expected {} equivariant parameters, got {}".format(A.rank, len(lam)))
    for v in lam:
        if not v.in_lambda0():
            raise InputError("equivariant parameters must lie in Λ₀, got {}".format(v))

    C = curved(invariant_part(A)).copy()
    m1 = C.operations[(1, ZERO_CLASS)]
    for (value, I) in zip(lam, C.interior):
        for x in range(C.dimension):
            for r in range(C.dimension):
                if I[r][x] != 0:
                    _accumulate(m1.setdefault((x,), {}), r, -value * I[r][x])
    C.operations[(1, ZERO_CLASS)] = _prune(m1)
    return C


def reduced(A):
    """The curved structure with m_0 set to zero"""
    result = curved(A).copy()
    result.operations[(0, ZERO_CLASS)] = {}
    return result


def _insertion_count(b, cutoff):
    if b.is_zero:
        return 0
    lowest = min(c.valuation for c in b.coefficients.values())
    return int(math.floor(cutoff / lowest))


def deform(A, b, cutoff=None, verify=True):
    """
    Twists every operation by b_+, m^b_k(x) = sum m_{k+l}(b, .., x_1, b, .., x_k, b, ..), and
    regroups the result by class. Insertions are bounded by the energy cutoff, so the deformed
    algebra loses as many arities as the cutoff admits insertions.
    """
    b.validate(A)
    cutoff = as_exponent(cutoff) if cutoff is not None else A.monoid.cutoff
    insertions = _insertion_count(b, cutoff)
    arity = A.max_arity - insertions
    if arity < 0:
        raise TruncationError(
            "increase maxArity: deformation needs {} insertions of b₊".format(insertions)
        )
    if not A.novikov:
        known = min((c.precision for c in b.coefficients.values()), default=math.inf)
        if known <= cutoff:
            raise TruncationError(
                "b₊ is known only below T^{}, lower the energy cutoff".format(known)
            )

    products = {(): NovikovScalar.constant(1)}

    def product(picked):
        if picked not in products:
            products[picked] = product(picked[:-1]) * b.coefficients[picked[-1]]
        return products[picked]

    grouped = {}
    for ((n, beta), tensor) in A.operations.items():
        for (ys, outs) in tensor.items():
            # slot choices leaving the same inputs behind with the same insertions coincide
            counts = Counter({((), ()): 1})
            for y in ys:
                grown = Counter()
                for ((picked, xs), count) in counts.items():
                    grown[(picked, xs + (y,))] += count
                    if y in b.coefficients and len(picked) < insertions:
                        grown[(tuple(sorted(picked + (y,))), xs)] += count
                counts = grown
            for ((picked, xs), count) in counts.items():
                k = n - len(picked)
                if k > arity:
                    continue
                weight = product(picked).shift(beta[1]).scale(count)
                target = grouped.setdefault((k, beta[0]), {}).setdefault(xs, {})
                for (out, v) in outs.items():
                    _accumulate(target, out, weight * v)

    if A.novikov:
        monoid = GappedMonoid.trivial(cutoff)
        operations = {(k, ZERO_CLASS): {} for k in range(arity + 1)}
        for ((k, _), tensor) in grouped.items():
            for (xs, outs) in tensor.items():
                for (out, v) in outs.items():
                    v = as_scalar(v)
                    v = truncate(v, min(cutoff, v.precision))
                    _accumulate(operations[(k, ZERO_CLASS)].setdefault(xs, {}), out, v)
    else:
        exponents = {e for c in b.coefficients.values() for (e, _) in c.terms}
        monoid = GappedMonoid(
            list(A.monoid.generators) + [(0, e) for e in exponents], cutoff
        )
        operations = {(k, beta): {} for k in range(arity + 1) for beta in monoid.elements}
        operations.pop((0, ZERO_CLASS))
        for ((k, maslov), tensor) in grouped.items():
            for (xs, outs) in tensor.items():
                for (out, v) in outs.items():
                    for (e, c) in as_scalar(v).terms:
                        if e > cutoff:
                            continue
                        target = operations.setdefault((k, (maslov, e)), {})
                        _accumulate(target.setdefault(xs, {}), out, c)
        if operations.get((0, ZERO_CLASS)):
            raise AssertionError("deformation produced a nonzero m_{0,0}")
        operations.pop((0, ZERO_CLASS), None)

    deformed = GappedAInfty(
        A.degrees,
        A.unit,
        monoid,
        operations,
        max_arity=arity,
        interior=A.interior,
        lie=A.lie,
        algebra=A.algebra,
        labels=A.labels,
        novikov=A.novikov,
        differential=A.differential,
    )
    deformed.projection = A.projection
    logger.debug(
        "deformed by b₊ with up to %s insertions: arity %s, %s classes",
        insertions,
        arity,
        len(monoid),
    )

    if verify:
        tolerance = setting(AInftyDefaults, "tolerance")
        for report in (check_ainfty(deformed), check_unitality(deformed, tolerance)):
            if not report.passed:
                raise AssertionError(
                    "deformation broke the {} identities at {}".format(
                        report.name, ", ".join(_label(k) for k in report.failures())
                    )
                )
    return deformed


def curvature(A, b, lam=None, cutoff=None):
    """m_0 of the deformed curved structure: sum_k m_k(b, .., b) - sum_j lambda_j i_{e_j}(b)"""
    base = curved(A) if lam is None else evaluate_lambda(A, lam)
    if base.projection is not None:
        b = b.project(base.projection)
    deformed = deform(base, b, cutoff=cutoff, verify=False)

    vector = deformed.operations.get((0, ZERO_CLASS), {}).get((), {})
    vector = {out: as_scalar(v) for (out, v) in vector.items() if not _vanishes(v)}
    stray = [out for out in vector if out != base.unit]
    scalar = None
    if not stray:
        scalar = vector.get(base.unit, NovikovScalar.zero(precision=deformed.monoid.cutoff))
    return Curvature(vector, scalar)


def is_bounding_cochain(A, b, lam=None):
    try:
        b.validate(A)
    except InputError:
        return False
    scalar = curvature(A, b, lam).scalar
    return scalar is not None and scalar.in_lambda_plus()
