"""Exception types shared across the package.

Everything numeric raises a subclass of :class:`SchurballError`, so callers
(CLI, HTTP service) can map failures to exit codes / status codes uniformly.
"""


class SchurballError(Exception):
    """Base class for all package errors."""


class InputError(SchurballError):
    """Malformed or schema-violating input (maps to exit code 3)."""


class DimensionMismatch(InputError):
    """Operands have incompatible shapes for the requested operation."""


class NotPSD(SchurballError):
    """Hermitian matrix has an eigenvalue below the allowed negative slack."""


class NotContraction(SchurballError):
    """Operator norm exceeds 1 beyond tolerance."""


class Inconsistent(SchurballError):
    """A restricted solve G s = t has no solution: t does not factor through s."""


class Singular(SchurballError):
    """Matrix is numerically rank deficient where full rank is required."""


class SingularResolvent(SchurballError):
    """I - ZA is numerically singular (exterior point or expansive colligation)."""


class Pole(SchurballError):
    """Kernel evaluated on the diagonal singularity <z, w> = 1."""


class NotUnitary(SchurballError):
    """A matrix expected to be unitary is not, within tolerance."""


class NotObservable(SchurballError):
    """Observability rank is below the state dimension; the state space is
    not a faithful copy of the model space."""


class NotCoisometric(SchurballError):
    """Colligation fails the coisometry defect test required by the caller."""


class ParameterNotIsometric(SchurballError):
    """Extracted colligation parameter is a strict contraction where an
    isometry is required (the reduction pipeline handles that case)."""


class SaturationFailure(SchurballError):
    """A span-closure computation kept growing past its generation budget."""


class KernelDimMismatch(SchurballError):
    """The two multiplier kernel spaces have different dimensions."""
