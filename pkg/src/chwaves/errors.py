"""Exception hierarchy shared by all chwaves modules."""


class CHWavesError(Exception):
    """Base class; carries a short machine-readable ``code``."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class OrderingViolation(CHWavesError, ValueError):
    code = "ordering_violation"


class StumponInadmissible(CHWavesError, ValueError):
    code = "stumpon_inadmissible"


class QuadratureNonconvergent(CHWavesError, ArithmeticError):
    code = "quadrature_nonconvergent"


class NonMonotonic(CHWavesError, ArithmeticError):
    code = "non_monotonic"


class NonMonotonicY(NonMonotonic):
    code = "non_monotonic_y"


class DomainMismatch(CHWavesError, ValueError):
    code = "domain_mismatch"


class AtomsPresent(CHWavesError, ValueError):
    code = "atoms_present"


class CflViolation(CHWavesError, ValueError):
    code = "cfl_violation"


class BlowUp(CHWavesError, FloatingPointError):
    code = "blow_up"


class OffPlateau(CHWavesError, ValueError):
    code = "off_plateau"


class OutOfRange(CHWavesError, ValueError):
    code = "out_of_range"


class ConfigError(CHWavesError, ValueError):
    code = "config_error"
