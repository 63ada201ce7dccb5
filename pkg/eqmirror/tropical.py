"""
Tropical critical points of toric mirror potentials.

A smooth fan with rays v_i and a strictly convex support function phi define the polyhedron
P = {u : l_i(u) = <u, v_i> + phi(v_i) >= 0} and the mirror potential
f = sum_i c_i T^{phi(v_i)} y^{v_i}. For lambda in N (x) Lambda_0 the critical points of
f - <lambda, log y> lie over one tropical point per maximal cone once every val(lambda_i^sigma)
sits strictly between 0 and the threshold eps_P. All polyhedral computations are exact over
the rationals; the dimension is small enough for vertex enumeration.
"""

import itertools
import logging
import math
from collections import namedtuple
from fractions import Fraction

import sympy

from eqmirror.codec import rational_from_json, rational_to_json
from eqmirror.config import NovikovDefaults, TropicalDefaults, setting
from eqmirror.errors import ConvergenceError, HypothesisViolation, InputError
from eqmirror.novikov import INFINITY, NovikovScalar, as_exponent, as_scalar, power

logger = logging.getLogger(__name__)

FanReport = namedtuple("FanReport", ["passed", "failures"])
TropicalPoint = namedtuple("TropicalPoint", ["cone", "dual_basis", "valuations", "point"])
HenselLift = namedtuple("HenselLift", ["cone", "point", "certificate", "nondegenerate"])
JacobianCount = namedtuple("JacobianCount", ["count", "cones", "equal"])
InitialTerm = namedtuple("InitialTerm", ["terms", "in_tropical"])

PRESETS = {
    "P1": ([[1], [-1]], [[0], [1]], [0, 1]),
    "P2": ([[1, 0], [0, 1], [-1, -1]], [[0, 1], [1, 2], [2, 0]], [0, 0, 1]),
    "P1xP1": ([[1, 0], [0, 1], [-1, 0], [0, -1]], [[0, 1], [1, 2], [2, 3], [3, 0]], [0, 0, 1, 1]),
    "F1": ([[1, 0], [0, 1], [-1, 1], [0, -1]], [[0, 1], [1, 2], [2, 3], [3, 0]], [0, 0, 2, 1]),
    "C": ([[1]], [[0]], [0]),
    "C2": ([[1, 0], [0, 1]], [[0, 1]], [0, 0]),
    "Bl0C2": ([[1, 0], [1, 1], [0, 1]], [[0, 1], [1, 2]], [0, 0, 1]),
}


def _rational(value):
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


def _solve(rows, rhs):
    """Exact solution of a square system, None when singular"""
    A = sympy.Matrix([[sympy.Rational(_rational(x)) for x in row] for row in rows])
    if A.det() == 0:
        return None
    b = sympy.Matrix([sympy.Rational(_rational(x)) for x in rhs])
    return tuple(_rational(x) for x in A.LUsolve(b))


def _pairing(u, v):
    return sum(Fraction(a) * b for (a, b) in zip(u, v))


class Fan:
    def __init__(self, rays, max_cones, name=None):
        self.rays = tuple(tuple(int(x) for x in v) for v in rays)
        self.max_cones = tuple(tuple(sorted(int(i) for i in c)) for c in max_cones)
        self.name = name
        if not self.rays:
            raise InputError("a fan needs at least one ray")
        self.n = len(self.rays[0])
        if any(len(v) != self.n for v in self.rays):
            raise InputError("rays must all have {} coordinates".format(self.n))
        if any(not 0 <= i < len(self.rays) for c in self.max_cones for i in c):
            raise InputError("cone refers to a missing ray")

    @classmethod
    def preset(cls, name):
        if name not in PRESETS:
            raise InputError("unknown fan '{}', expected one of {}".format(name, sorted(PRESETS)))
        (rays, cones, phi) = PRESETS[name]
        return (cls(rays, cones, name), SupportFunctionData(phi))

    @classmethod
    def from_json(cls, obj):
        """Reads a fan and its support function"""
        try:
            fan = cls(obj["rays"], obj["max_cones"], obj.get("name"))
            phi = SupportFunctionData(obj["phi"])
        except (KeyError, TypeError) as e:
            raise InputError("malformed fan: {}".format(e)) from e
        if "n" in obj and int(obj["n"]) != fan.n:
            raise InputError("declared rank {} does not match the rays".format(obj["n"]))
        return (fan, phi)

    @property
    def maximal(self):
        return [c for c in self.max_cones if len(c) == self.n]

    def cones(self):
        """All cones other than {0}, by face closure of the maximal ones"""
        faces = set()
        for cone in self.max_cones:
            for size in range(1, len(cone) + 1):
                faces.update(itertools.combinations(cone, size))
        return sorted(faces, key=lambda c: (len(c), c))

    def spans_cone(self, indices):
        indices = set(indices)
        return any(indices <= set(c) for c in self.max_cones)

    def dual_basis(self, cone):
        """f_i with <f_i, v_j> = delta_ij for the rays v_j of a maximal cone"""
        R = sympy.Matrix([list(self.rays[i]) for i in cone])
        F = R.inv().T
        return [tuple(_rational(F[i, k]) for k in range(self.n)) for i in range(len(cone))]

    def to_json(self):
        return {"n": self.n, "rays": self.rays, "max_cones": self.max_cones, "name": self.name}


class SupportFunctionData:
    def __init__(self, values):
        self.values = [rational_from_json(v) for v in values]

    def __getitem__(self, index):
        return self.values[index]

    def __len__(self):
        return len(self.values)

    def linear_extension(self, fan, cone):
        """m with <m, v_i> = phi(v_i) on the rays of a full-dimensional cone"""
        return _solve([fan.rays[i] for i in cone], [self.values[i] for i in cone])

    def to_json(self):
        return [rational_to_json(v) for v in self.values]


def validate(fan, phi):
    failures = []
    if len(phi) != len(fan.rays):
        witness = "{} values for {} rays".format(len(phi), len(fan.rays))
        failures.append({"check": "values", "witness": witness})
        return FanReport(False, failures)

    for cone in fan.max_cones:
        if len(cone) != fan.n:
            failures.append({"check": "unimodular", "witness": list(cone)})
            continue
        det = sympy.Matrix([list(fan.rays[i]) for i in cone]).det()
        if abs(det) != 1:
            failures.append({"check": "unimodular", "witness": list(cone)})

    if not fan.maximal:
        failures.append({"check": "support", "witness": "no cone of dimension {}".format(fan.n)})

    for cone in fan.max_cones:
        if len(cone) <= fan.n:
            continue
        independent = next(
            (sub for sub in itertools.combinations(cone, fan.n) if phi.linear_extension(fan, sub)),
            None,
        )
        m = phi.linear_extension(fan, independent) if independent else None
        if m is None or any(_pairing(m, fan.rays[i]) != phi[i] for i in cone):
            failures.append({"check": "consistency", "witness": list(cone)})

    for (sigma, other) in itertools.permutations(fan.maximal, 2):
        if len(set(sigma) & set(other)) != fan.n - 1:
            continue
        m = phi.linear_extension(fan, sigma)
        if m is None:
            continue
        for j in set(other) - set(sigma):
            if not _pairing(m, fan.rays[j]) < phi[j]:
                failures.append({"check": "convexity", "witness": [list(sigma), j]})

    for failure in failures:
        logger.debug("fan check %s failed at %s", failure["check"], failure["witness"])
    return FanReport(not failures, failures)


def _require_valid(fan, phi):
    report = validate(fan, phi)
    if not report.passed:
        raise InputError(
            "invalid fan: {}".format(
                "; ".join("{} at {}".format(f["check"], f["witness"]) for f in report.failures)
            )
        )


def _vertices(constraints, n):
    """Vertices of {u : <a, u> + b >= 0}"""
    found = set()
    for subset in itertools.combinations(constraints, n):
        u = _solve([a for (a, _) in subset], [-b for (_, b) in subset])
        if u is None:
            continue
        if all(_pairing(u, a) + b >= 0 for (a, b) in constraints):
            found.add(u)
    return sorted(found)


class MirrorPolyhedron:
    def __init__(self, fan, phi):
        self.fan = fan
        self.phi = phi
        self.constraints = [(v, phi[i]) for (i, v) in enumerate(fan.rays)]
        self.vertices = _vertices(self.constraints, fan.n)
        self.recession = self._recession_rays()
        self.pointed = sympy.Matrix([list(v) for v in fan.rays]).rank() == fan.n

    def ell(self, i, u):
        return _pairing(u, self.fan.rays[i]) + self.phi[i]

    def contains(self, u):
        return all(self.ell(i, u) >= 0 for i in range(len(self.fan.rays)))

    def interior(self, u):
        return all(self.ell(i, u) > 0 for i in range(len(self.fan.rays)))

    def _recession_rays(self):
        n = self.fan.n
        found = set()
        for subset in itertools.combinations(self.fan.rays, n - 1):
            if subset:
                kernel = sympy.Matrix([list(v) for v in subset]).nullspace()
            else:
                kernel = [sympy.eye(n)[:, k] for k in range(n)]
            if subset and len(kernel) != 1:
                continue
            for direction in kernel:
                for sign in (1, -1):
                    d = tuple(_rational(sign * x) for x in direction)
                    if all(_pairing(d, v) >= 0 for v in self.fan.rays):
                        scale = max(abs(x) for x in d)
                        found.add(tuple(x / scale for x in d))
        return sorted(found)

    def to_json(self):
        return {
            "ells": [[list(v), rational_to_json(b)] for (v, b) in self.constraints],
            "vertices": [[rational_to_json(x) for x in u] for u in self.vertices],
            "rays": [[rational_to_json(x) for x in d] for d in self.recession],
            "pointed": self.pointed,
        }


def polyhedron(fan, phi):
    _require_valid(fan, phi)
    return MirrorPolyhedron(fan, phi)


def epsilon_P(fan, phi):
    """min over cones tau with I_tau nonempty of inf {l_i(u) : v_i in I_tau, u in P_tau}"""
    _require_valid(fan, phi)
    P = MirrorPolyhedron(fan, phi)
    epsilon = INFINITY
    for tau in fan.cones():
        excluded = [
            j for j in range(len(fan.rays)) if j not in tau and not fan.spans_cone(tau + (j,))
        ]
        if not excluded:
            continue
        constraints = list(P.constraints)
        for i in tau:
            for j in excluded:
                a = tuple(x - y for (x, y) in zip(fan.rays[j], fan.rays[i]))
                constraints.append((a, phi[j] - phi[i]))
        vertices = _vertices(constraints, fan.n)
        if not vertices:
            continue
        value = min(P.ell(i, u) for i in excluded for u in vertices)
        assert value >= 0, "l_i is nonnegative on P"
        logger.debug("eps for cone %s is %s", tau, value)
        epsilon = min(epsilon, value)
    return epsilon


def admissible_lambda(fan, phi, valuation=None):
    """
    A lambda with every val(lambda_i^sigma) equal to the given valuation, min(eps_P, 1) / 2 by
    default. The direction (1, sqrt 2, sqrt 3, ..) pairs to zero with no nonzero lattice vector.
    """
    if valuation is None:
        valuation = Fraction(min(epsilon_P(fan, phi), 1)) / 2
    valuation = as_exponent(valuation)
    precision = setting(TropicalDefaults, "precision")
    return [
        NovikovScalar.monomial(math.sqrt(k + 1), valuation, precision=precision)
        for k in range(fan.n)
    ]


def _lambda_sigma(fan, cone, lam):
    return [
        sum((lam[k].scale(f[k]) for k in range(fan.n) if f[k] != 0), NovikovScalar.zero())
        for f in fan.dual_basis(cone)
    ]


def tropical_critical_points(fan, phi, lam):
    _require_valid(fan, phi)
    lam = [as_scalar(v) for v in lam]
    if len(lam) != fan.n:
        raise InputError("λ needs {} components".format(fan.n))
    epsilon = epsilon_P(fan, phi)

    points = []
    for cone in fan.maximal:
        components = _lambda_sigma(fan, cone, lam)
        valuations = []
        for (i, value) in enumerate(components):
            v = value.valuation
            if not 0 < v < epsilon:
                raise HypothesisViolation(
                    "need eps_P > val(λ_{}^σ) > 0 at σ = {}, got val {} and eps_P = {}".format(
                        i + 1, list(cone), v, epsilon
                    )
                )
            valuations.append(v)
        u = _solve([fan.rays[i] for i in cone], [v - phi[i] for (i, v) in zip(cone, valuations)])
        points.append(TropicalPoint(cone, fan.dual_basis(cone), valuations, u))

    if len({p.point for p in points}) != len(points):
        raise HypothesisViolation("tropical critical points are not distinct")
    return points


def separation_margin(fan, phi, lam):
    """min over v_j outside sigma of l_j(u^sigma) - eps_P, per maximal cone"""
    P = MirrorPolyhedron(fan, phi)
    epsilon = epsilon_P(fan, phi)
    margins = {}
    for point in tropical_critical_points(fan, phi, lam):
        outside = [j for j in range(len(fan.rays)) if j not in point.cone]
        gaps = [P.ell(j, point.point) - epsilon for j in outside]
        margins[point.cone] = min(gaps, default=INFINITY)
    return margins


def mirror_polynomial(fan, phi, coefficients=None, perturbation=None):
    """f = sum c_i T^phi(v_i) y^{v_i}, plus optional higher-order terms {exponent: scalar}"""
    if coefficients is None:
        coefficients = [setting(TropicalDefaults, "coefficient")] * len(fan.rays)
    f = {}
    for (v, c, value) in zip(fan.rays, coefficients, phi.values):
        f[v] = f.get(v, NovikovScalar.zero()) + NovikovScalar.monomial(c, value)
    for (v, c) in (perturbation or {}).items():
        v = tuple(int(x) for x in v)
        f[v] = f.get(v, NovikovScalar.zero()) + as_scalar(c)
    return {v: c for (v, c) in f.items() if not c.is_zero}


def log_derivative(f, m):
    """d_m f = sum c_v <m, v> y^v"""
    result = {}
    for (v, c) in f.items():
        weight = sum(Fraction(a) * b for (a, b) in zip(m, v))
        if weight != 0:
            result[v] = c.scale(weight)
    return result


def _in_cone(fan, cone, v):
    if not cone:
        return not any(v)
    rows = sympy.Matrix([list(fan.rays[i]) for i in cone]).T
    try:
        (solution, params) = rows.gauss_jordan_solve(sympy.Matrix(list(v)))
    except ValueError:
        return False
    return not params.shape[0] and all(x >= 0 for x in solution)


def initial_term(f, u, tau=None, fan=None):
    """in_u(f) and whether u lies on Trop(f); in_u(f) = 0 is not a monomial"""
    terms = f.items()
    if tau is not None:
        if fan is None:
            raise InputError("restricting to a cone needs the fan")
        terms = [(v, c) for (v, c) in terms if _in_cone(fan, tau, v)]

    weights = [(v, c, c.valuation + _pairing(u, v)) for (v, c) in terms if not c.is_zero]
    if not weights:
        return InitialTerm({}, True)
    lowest = min(w for (_, _, w) in weights)
    initial = {v: c.leading for (v, c, w) in weights if w == lowest}
    return InitialTerm(initial, len(initial) != 1)


def _monomial(y, v):
    value = NovikovScalar.constant(1)
    for (coordinate, k) in zip(y, v):
        if k:
            value = value * power(coordinate, k)
    return value


def _gradient_and_hessian(f, y, lam):
    n = len(y)
    G = [-lam[k] for k in range(n)]
    H = [[NovikovScalar.zero() for _ in range(n)] for _ in range(n)]
    for (v, c) in f.items():
        term = c * _monomial(y, v)
        for k in range(n):
            if v[k]:
                G[k] = G[k] + term.scale(v[k])
                for l in range(n):
                    if v[l]:
                        H[k][l] = H[k][l] + term.scale(v[k] * v[l])
    return (G, H)


def _eliminate(H, rhs):
    """Gaussian elimination over Lambda with the pivot of least valuation"""
    n = len(rhs)
    rows = [list(H[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        candidates = [r for r in range(col, n) if not rows[r][col].is_zero]
        if not candidates:
            raise ConvergenceError("degenerate Hessian")
        pivot = min(candidates, key=lambda r: rows[r][col].valuation)
        (rows[col], rows[pivot]) = (rows[pivot], rows[col])
        for r in range(n):
            if r != col and not rows[r][col].is_zero:
                factor = rows[r][col] / rows[col][col]
                rows[r] = [a - factor * b for (a, b) in zip(rows[r], rows[col])]
    return [rows[i][n] / rows[i][i] for i in range(n)]


def _determinant(H):
    n = len(H)
    if n == 1:
        return H[0][0]
    total = NovikovScalar.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in H[1:]]
        total = total + H[0][j] * _determinant(minor) * (-1) ** j
    return total


def hensel_lift_critical(fan, phi, lam, cone, precision=None, f=None, max_iterations=None):
    """
    Lifts the tropical critical point of a maximal cone to a critical point of f_lambda with
    Newton steps in logarithmic coordinates, y_l <- y_l (1 + delta_l) with H delta = -grad.
    """
    precision = as_exponent(setting(TropicalDefaults, "precision", precision))
    max_iterations = setting(NovikovDefaults, "maxNewtonIterations", max_iterations)
    cone = tuple(sorted(cone))
    lam = [as_scalar(v) for v in lam]
    f = f if f is not None else mirror_polynomial(fan, phi)
    points = {p.cone: p for p in tropical_critical_points(fan, phi, lam)}
    if cone not in points:
        raise InputError("{} is not a maximal cone".format(list(cone)))

    # c_i T^phi_i z_i = lambda_i^sigma at leading order, z_i = y^{v_i} and y_k = prod z_i^{f_i[k]}
    components = _lambda_sigma(fan, cone, lam)
    leads = []
    for (i, component) in zip(cone, components):
        c = f[fan.rays[i]]
        leads.append((component.valuation - c.valuation, component.leading / c.leading))
    dual = points[cone].dual_basis
    y = []
    for k in range(fan.n):
        valuation = sum(int(f_i[k]) * e for (f_i, (e, _)) in zip(dual, leads))
        coefficient = 1 + 0j
        for (f_i, (_, lead)) in zip(dual, leads):
            coefficient *= lead ** int(f_i[k])
        y.append(NovikovScalar.monomial(coefficient, valuation, precision=precision))

    for iteration in range(max_iterations):
        # only the latest step's rounding bounds the error of the iterate
        y = [coordinate.without_noise() for coordinate in y]
        (G, H) = _gradient_and_hessian(f, y, lam)
        delta = _eliminate(H, [-g for g in G])
        y = [coordinate + coordinate * d for (coordinate, d) in zip(y, delta)]
        if all(d.is_negligible() for d in delta):
            logger.debug("hensel lift for %s converged after %s iterations", list(cone), iteration)
            break
    else:
        raise ConvergenceError("hensel lift for {} did not converge".format(list(cone)))

    y = [coordinate.settled() for coordinate in y]
    known = min(coordinate.precision for coordinate in y)
    if known < precision:
        logger.warning("lift for %s is only known up to T^%s", list(cone), known)

    (G, H) = _gradient_and_hessian(f, y, lam)
    if not all(g.is_negligible() for g in G):
        raise ConvergenceError("hensel lift for {} left a residual".format(list(cone)))
    scale = NovikovScalar.constant(1)
    for component in components:
        scale = scale * component
    certificate = _determinant(H) / scale
    nondegenerate = certificate.valuation == 0
    return HenselLift(cone, y, certificate, nondegenerate)


def _standard_monomials(basis, count):
    """Monomials below no leading term of a zero-dimensional Groebner basis"""
    leading = [p.monoms(order="grevlex")[0] for p in basis.polys]
    bounds = []
    for i in range(count):
        pure = [m[i] for m in leading if not any(e for (j, e) in enumerate(m) if j != i)]
        bounds.append(min(pure))
    return sum(
        1
        for m in itertools.product(*(range(b) for b in bounds))
        if not any(all(a >= b for (a, b) in zip(m, lm)) for lm in leading)
    )


def jacobian_ring_dim(fan, phi, coefficients=None):
    """
    Dimension of the Jacobian ring of f_lambda on the torus, for generic lambda. The critical
    equations y_k d_k f = lambda_k are cleared of negative powers and solved at a rational
    specialization of T, with t y_1 .. y_n = 1 keeping the solutions off the coordinate axes.
    """
    _require_valid(fan, phi)
    if coefficients is None:
        coefficients = [setting(TropicalDefaults, "coefficient")] * len(fan.rays)
    y = sympy.symbols("y0:{}".format(fan.n))
    t = sympy.Symbol("t")
    denominator = 1
    for value in phi.values:
        denominator = denominator * value.denominator // math.gcd(denominator, value.denominator)
    clearing = [max(0, -min(v[k] for v in fan.rays)) for k in range(fan.n)]

    def monomial(v):
        return sympy.Mul(*(y[j] ** (v[j] + clearing[j]) for j in range(fan.n)))

    # T = 2^(-denominator) turns every T^phi_i into a rational number
    weights = []
    for (c, value) in zip(coefficients, phi.values):
        c = _rational(c)
        scale = sympy.Rational(1, 2) ** int(value * denominator)
        weights.append(sympy.Rational(c.numerator, c.denominator) * scale)

    equations = []
    for k in range(fan.n):
        g = -sympy.Rational(sympy.prime(k + 1), sympy.prime(k + 5)) * monomial([0] * fan.n)
        for (v, weight) in zip(fan.rays, weights):
            if v[k]:
                g = g + weight * v[k] * monomial(v)
        equations.append(sympy.expand(g))
    equations.append(t * sympy.Mul(*y) - 1)

    basis = sympy.groebner(equations, *y, t, order="grevlex", domain=sympy.QQ)
    if list(basis.exprs) == [1]:
        return 0
    if not basis.is_zero_dimensional:
        raise HypothesisViolation("f_λ has a positive-dimensional critical locus")
    return _standard_monomials(basis, fan.n + 1)


def jacobian_count(fan, phi, lam=None):
    """
    Dimension of the Jacobian ring against the number of maximal cones. The lifted critical
    points must all be nondegenerate; λ outside the tropical hypotheses falls back to two
    admissible values, whose lift counts must agree.
    """
    _require_valid(fan, phi)
    cones = len(fan.maximal)

    def lift_all(values):
        lifts = [
            hensel_lift_critical(fan, phi, values, p.cone)
            for p in tropical_critical_points(fan, phi, values)
        ]
        degenerate = [lift.cone for lift in lifts if not lift.nondegenerate]
        if degenerate:
            raise HypothesisViolation("degenerate lifted critical points at {}".format(degenerate))
        return len(lifts)

    lifted = None
    if lam is not None:
        try:
            lifted = lift_all(lam)
        except HypothesisViolation:
            logger.info("λ outside the tropical hypotheses, lifting at admissible values")
    if lifted is None:
        epsilon = Fraction(min(epsilon_P(fan, phi), 1))
        lifted = lift_all(admissible_lambda(fan, phi, epsilon / 2))
        second = lift_all(admissible_lambda(fan, phi, epsilon / 3))
        if lifted != second:
            raise HypothesisViolation(
                "critical point count depends on λ: {} and {}".format(lifted, second)
            )

    count = jacobian_ring_dim(fan, phi)
    if count != lifted:
        logger.warning("%s critical points but %s tropical lifts", count, lifted)
    return JacobianCount(count, cones, count == cones)
