"""Exception hierarchy.

Every failure raised by the library derives from :class:`HytetError`. The CLI
maps the two families below onto its exit codes.
"""


class HytetError(Exception):
    """Base class for all library errors."""


class GeometryError(HytetError):
    """The input does not describe a tetrahedron of the requested kind."""


class ShapeError(GeometryError):
    """Angles classify as a geometry the operation does not accept."""


class RealizabilityError(GeometryError):
    """No tetrahedron realizes the given angles or lengths."""


class NumericalError(HytetError):
    """A numerical procedure failed to produce a certified value."""


class DomainError(NumericalError, ValueError):
    """Argument outside the domain of an elementary function (e.g. log 0)."""


class EvaluationError(NumericalError):
    """A formula was evaluated at a branch point or singularity."""


class ContinuationError(NumericalError):
    """Analytic continuation along a path could not be certified."""


class DegenerateError(NumericalError):
    """The quadratic for the critical points degenerates (leading coefficient ~ 0)."""


class BranchIntegrityError(NumericalError):
    """Branch diagnostics (residues, congruences) are outside tolerance."""


class ConvergenceError(NumericalError):
    """Adaptive quadrature ran out of subdivision budget."""
