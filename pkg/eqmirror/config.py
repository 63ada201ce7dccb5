from fractions import Fraction

NovikovDefaults = {
    "precision": Fraction(6),
    "zeroTolerance": 1e-9,
    # Leading-equation roots closer than this are treated as one repeated root
    "rootMergeTolerance": 1e-7,
    "maxNewtonIterations": 64,
    # Relative rounding charged to every floating operation on a coefficient
    "roundoff": 2.0 ** -50,
}

EquivariantDefaults = {
    # Truncation D of the Weil algebra, total degree <= 2D
    "truncation": 4,
}

AInftyDefaults = {
    "tolerance": 1e-9,
    "maxArity": 6,
    "energyCutoff": Fraction(3),
}

MirrorDefaults = {
    "precision": Fraction(6),
    "degenerateTolerance": 1e-9,
    "ladderDepth": 6,
}

MFDefaults = {
    "jetOrder": 4,
    "maxJetOrder": 12,
    "tolerance": 1e-9,
}

TropicalDefaults = {
    "coefficient": 1,
    "precision": Fraction(6),
}

CLIDefaults = {
    "logLevel": "WARNING",
    "indent": None,
}


def setting(defaults, key, value=None):
    """Resolves an optional keyword argument against one of the default tables"""
    return defaults[key] if value is None else value
