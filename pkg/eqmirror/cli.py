"""
Batch command line: every command reads JSON or shorthand literals and writes one JSON report
to stdout. Logs and ``--pretty`` tables go to stderr.
"""

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from rich.logging import RichHandler

from eqmirror import ainfty, diagnostics, equivariant, mf, mirror, tropical
from eqmirror.codec import dumps, parse_scalar, parse_scalar_list
from eqmirror.config import CLIDefaults, MFDefaults, MirrorDefaults, TropicalDefaults, setting
from eqmirror.errors import EqMirrorError, InputError

logger = logging.getLogger(__name__)


def _precision(value):
    if value is None:
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError("precision must be a rational number, got {!r}".format(value)) from e


class RunConfig:
    def __init__(
        self,
        command,
        inputs=(),
        precision=None,
        jet_order=None,
        degenerate=False,
        output=None,
        options=None,
    ):
        self.command = command
        self.inputs = list(inputs)
        self.precision = _precision(precision)
        self.jet_order = jet_order
        self.degenerate = degenerate
        self.output = output
        self.options = options or {}
        if self.precision is not None and self.precision <= 0:
            raise InputError("precision must be positive")
        if self.jet_order is not None and self.jet_order < 1:
            raise InputError("jet order must be at least 1")

    @classmethod
    def from_args(cls, args):
        command = args.command
        if getattr(args, "action", None):
            command = "{} {}".format(args.command, args.action)
        inputs = [args.input] if getattr(args, "input", None) else []
        options = {
            key: value
            for (key, value) in vars(args).items()
            if key in ("geometry", "lam", "emit_algebra", "fan", "lambda_vec")
        }
        return cls(
            command,
            inputs,
            precision=args.precision,
            jet_order=args.jet_order,
            degenerate=args.degenerate,
            output=args.output,
            options=options,
        )

    def read_input(self):
        if not self.inputs:
            raise InputError("{} needs --input".format(self.command))
        try:
            with open(self.inputs[0]) as f:
                return json.load(f)
        except OSError as e:
            raise InputError("cannot read {}: {}".format(self.inputs[0], e)) from e
        except json.JSONDecodeError as e:
            raise InputError("{} is not JSON: {}".format(self.inputs[0], e)) from e


def _mirror_model(options, precision):
    geom = mirror.ToricMirrorGeometry.from_name(options.get("geometry", "cp1"))
    lam = parse_scalar(options.get("lambda", "T"), precision)
    solutions = mirror.solve_mirror(geom, lam, precision, degenerate=True)
    index = int(options.get("root", 0))
    if not 0 <= index < len(solutions):
        raise InputError("root {} out of range, found {}".format(index, len(solutions)))
    (_, brane) = solutions[index]
    return mirror.model_algebra(geom, brane, None, options.get("cutoff", precision))


def run_mirror(config):
    precision = setting(MirrorDefaults, "precision", config.precision)
    geom = mirror.ToricMirrorGeometry.from_name(config.options["geometry"])
    lam = parse_scalar(config.options["lam"], precision)
    report = mirror.correspondence_report(geom, lam, precision, config.degenerate)

    path = config.options.get("emit_algebra")
    if path:
        (_, brane) = mirror.solve_mirror(geom, lam, precision, config.degenerate)[0]
        with open(path, "w") as f:
            f.write(dumps(mirror.model_algebra(geom, brane, None, precision), indent=2))
        logger.info("model algebra written to %s", path)
    return report


def _load_fan(value):
    if value in tropical.PRESETS:
        return tropical.Fan.preset(value)
    if not os.path.exists(value):
        raise InputError("'{}' is neither a preset fan nor a file".format(value))
    with open(value) as f:
        try:
            return tropical.Fan.from_json(json.load(f))
        except json.JSONDecodeError as e:
            raise InputError("{} is not JSON: {}".format(value, e)) from e


def run_tropical(config):
    precision = setting(TropicalDefaults, "precision", config.precision)
    (fan, phi) = _load_fan(config.options["fan"])
    if config.options.get("lambda_vec"):
        lam = parse_scalar_list(config.options["lambda_vec"], precision)
    else:
        lam = tropical.admissible_lambda(fan, phi)

    epsilon = tropical.epsilon_P(fan, phi)
    margins = tropical.separation_margin(fan, phi, lam)
    rows = []
    for point in tropical.tropical_critical_points(fan, phi, lam):
        lift = tropical.hensel_lift_critical(fan, phi, lam, point.cone, precision)
        rows.append(
            {
                "cone": point.cone,
                "valuations": point.valuations,
                "point": point.point,
                "margin": margins[point.cone],
                "lift": lift.point,
                "certificate": lift.certificate,
                "nondegenerate": lift.nondegenerate,
            }
        )
    count = tropical.jacobian_ring_dim(fan, phi)
    lifted = sum(1 for row in rows if row["nondegenerate"])
    cones = len(fan.maximal)
    return {
        "fan": fan,
        "phi": phi,
        "lambda": lam,
        "epsilon": epsilon,
        "polyhedron": tropical.polyhedron(fan, phi),
        "points": rows,
        "count": {"critical": count, "lifted": lifted, "cones": cones, "equal": count == cones},
    }


def _ring(obj):
    if "variables" in obj:
        return mf.PolyRing(obj["variables"])
    return mf.PolyRing.default(int(obj.get("nvars", 1)))


def _stabilization(obj):
    ring = _ring(obj)
    if "f" in obj:
        w = ring.parse(obj["w"]) if "w" in obj else None
        f_list = [ring.parse(p) for p in obj["f"]]
        w_list = [ring.parse(p) for p in obj["g"]]
        return mf.koszul_stabilization(f_list, w_list, w)
    return mf.residue_field_stabilization(ring.parse(obj["w"]), obj.get("point"))


def run_mf(config):
    obj = config.read_input()
    action = config.command.split()[1]
    order = setting(MFDefaults, "jetOrder", config.jet_order)
    try:
        if action == "verify":
            check = mf.mf_verify(mf.MatrixFactorization.from_json(obj))
            return {"ok": check.passed, "residual": check.residual}
        if action == "stabilize":
            M = _stabilization(obj)
            check = mf.mf_verify(M)
            return {"ok": check.passed, "factorization": M}
        if action == "homdim":
            if "M" in obj:
                variables = obj.get("variables")
                M = mf.MatrixFactorization.from_json(obj["M"], variables)
                N = mf.MatrixFactorization.from_json(obj.get("N", obj["M"]), variables)
            else:
                M = N = _stabilization(obj)
            window = mf.JetWindow(obj.get("point"), order)
            (even, odd) = mf.hom_cohomology_dim(M, N, window)
            return {"even": even, "odd": odd}
    except KeyError as e:
        raise InputError("missing field {} in {}".format(e, config.inputs[0])) from e
    raise InputError("unknown mf action {}".format(action))


def run_check(config):
    obj = config.read_input()
    action = config.command.split()[1]
    precision = setting(MirrorDefaults, "precision", config.precision)

    if action == "cartan":
        M = equivariant.GDiffSpace.from_json(obj)
        D = obj.get("truncation")
        cartan = equivariant.build_model(M, D=D, model=equivariant.CARTAN)
        weil = equivariant.build_model(M, D=D, model=equivariant.WEIL)
        mq = equivariant.mathai_quillen(M, D=D)
        return {
            "cartan": equivariant.cohomology(cartan),
            "weil": equivariant.cohomology(weil),
            "square": float(cartan.square_residual()),
            "linearity": float(cartan.linearity_residual()),
            "intertwining": float(mq.intertwining_residual(weil)),
            "landsInCartan": mq.lands_in_cartan(weil),
        }

    if "model" in obj:
        A = _mirror_model(obj["model"], precision)
    elif "tensors" in obj:
        A = ainfty.algebra_from_json(obj)
    else:
        A = None

    if action == "ainfty":
        if A is None:
            raise InputError("check ainfty needs an algebra or a model description")
        reports = [ainfty.check_ainfty(A), ainfty.check_unitality(A)]
        return {"passed": all(r.passed for r in reports), "reports": [r.to_json() for r in reports]}
    if action == "gdiff":
        if A is not None:
            return ainfty.check_gdiff_compat(A).to_json()
        axioms = equivariant.check_gdiff_axioms(equivariant.GDiffSpace.from_json(obj))
        return {"passed": axioms.passed, "residuals": axioms.residuals}
    raise InputError("unknown check {}".format(action))


COMMANDS = {"mirror": run_mirror, "tropical": run_tropical, "mf": run_mf, "check": run_check}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", default=None, help="Novikov precision E, e.g. 6 or 11/2")
    common.add_argument("--jet-order", type=int, default=None, help="first jet order tried")
    common.add_argument(
        "--degenerate", action="store_true", help="accept degenerate critical points"
    )
    common.add_argument("--pretty", action="store_true", help="rich tables on stderr")
    common.add_argument("--log-level", default=setting(CLIDefaults, "logLevel"))
    common.add_argument("--indent", type=int, default=setting(CLIDefaults, "indent"))
    common.add_argument("--output", default=None, help="write the report here, not stdout")

    parser = argparse.ArgumentParser(prog="eqmirror", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    m = commands.add_parser("mirror", parents=[common], help="branes and critical points")
    m.add_argument("--geometry", required=True, choices=["cp1", "c"])
    m.add_argument("--lambda", dest="lam", required=True, help="Novikov literal")
    m.add_argument("--emit-algebra", default=None, help="write the model algebra JSON here")

    t = commands.add_parser("tropical", parents=[common], help="tropical critical points")
    presets = ", ".join(sorted(tropical.PRESETS))
    t.add_argument("--fan", required=True, help="fan JSON file or one of {}".format(presets))
    t.add_argument("--lambda-vec", default=None, help="list of Novikov literals")

    f = commands.add_parser("mf", parents=[common], help="matrix factorizations")
    f.add_argument("action", choices=["verify", "stabilize", "homdim"])
    f.add_argument("--input", required=True)

    c = commands.add_parser("check", parents=[common], help="axiom checkers")
    c.add_argument("action", choices=["ainfty", "cartan", "gdiff"])
    c.add_argument("--input", required=True)
    return parser


def _emit(text, output):
    if output:
        with open(output, "w") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(message)s",
        handlers=[RichHandler(console=diagnostics.console, show_path=False)],
        force=True,
    )

    try:
        config = RunConfig.from_args(args)
        report = COMMANDS[args.command](config)
    except EqMirrorError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        diagnostics.console.print("error: {}".format(e), markup=False, highlight=False)
        return e.exitCode

    if args.pretty:
        diagnostics.render(args.command, report)
    _emit(dumps(report, indent=args.indent), args.output)
    return 0
