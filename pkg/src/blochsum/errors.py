"""Exception types shared across the package."""


class BlochError(Exception):
    """Base class for all package-specific errors."""


class OutOfDisc(BlochError, ValueError):
    """A point that must lie in the open unit disc does not."""


class OutOfValidity(BlochError, ValueError):
    """Evaluation requested outside an expression's assured-validity disc."""


class DimensionMismatch(BlochError, ValueError):
    """Incompatible target-space dimensions."""


class ParseError(BlochError, ValueError):
    """Malformed serialized input (expression, sample, molecule, ...)."""


class CertificationFailure(BlochError, RuntimeError):
    """A certified bound could not be established at the requested quality."""


class Infeasible(BlochError, RuntimeError):
    """Linear program has no feasible point."""


class Unbounded(BlochError, RuntimeError):
    """Linear program objective is unbounded below."""


class RankDeficiency(BlochError, RuntimeError):
    """Factorization data is rank-deficient; the discretization is too coarse."""
