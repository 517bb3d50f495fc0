"""Exception hierarchy.

Two broad families matter to callers: ``SolverError`` (an iteration failed to
converge or landed on a wrong object) and ``GuardError`` (the request is
outside a validated precision or domain window and was refused up front).
"""


class CubicSPError(Exception):
    """Base class for all package errors."""


class SolverError(CubicSPError):
    """A numerical solve failed or produced an object failing its checks."""


class GuardError(CubicSPError):
    """A precision or domain guard refused the operation."""


# -- orbit / Newton level -----------------------------------------------------

class NonEscapingPoint(SolverError):
    """Orbit never left the escape radius within the iteration budget."""


class NoConvergence(SolverError):
    """Iteration exhausted its budget without meeting its tolerance."""


class DerivativeSingular(SolverError):
    """A Newton denominator vanished."""


class BranchJumpSuspected(SolverError):
    """Continuation step moved implausibly far; refusing to jump branches."""


# -- curve / certificate level ------------------------------------------------

class OffCurve(SolverError):
    """A map fails the curve equation it was supposed to satisfy."""


class NotMinimal(SolverError):
    """A period or preperiod admits a smaller admissible value."""


class FreeCriticalPeriodic(SolverError):
    """The free critical point is periodic, so the map is not Misiurewicz."""


class NotRepelling(SolverError):
    """The landing cycle is not repelling."""


class TransversalityFailure(SolverError):
    """The transversal derivative is numerically indistinguishable from 0."""


class ContinuationFailure(SolverError):
    """Tracking a periodic point along a parameter path broke down."""


class SamplingTooCoarse(SolverError):
    """Adaptive contour sampling exceeded its refinement budget."""


class ProjectionFailed(SolverError):
    """Chart integration could not be projected back onto the curve."""


class NewtonDivergence(SolverError):
    """Ray-following Newton left its basin (likely a bifurcation)."""


class BranchAmbiguity(SolverError):
    """A root/log branch could not be pinned to the continuous choice."""


class EmptySet(SolverError):
    """A set operation received an empty raster."""


# -- guards -------------------------------------------------------------------

class PrecisionExhausted(GuardError):
    """The requested magnification depth is below double-precision floor."""


class ChartDomainExceeded(GuardError):
    """A local-chart evaluation was requested outside its validated disk."""


class InsidePotential(GuardError):
    """Point sits at or below the critical equipotential (or does not escape)."""


class NotInEscapeRegion(GuardError):
    """Map is in the connectedness locus; no escape-region coordinate exists."""


class ConfigError(CubicSPError):
    """Invalid run configuration; the message names the offending field."""
