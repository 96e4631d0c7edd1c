"""Exception hierarchy.

Errors derived from :class:`NumericFailure` signal that the requested
computation is numerically out of reach for the given input (quadrature that
will not converge, a vanishing Den determinant, ...).  The batch runner maps
them to exit code 3.  Scenario/shape problems raise :class:`ScenarioError`
(exit code 2) instead.
"""


class HeckeHitchinError(Exception):
    """Base class for all package errors."""


class NumericFailure(HeckeHitchinError):
    """A computation failed for numerical reasons."""


class NoConvergence(NumericFailure):
    """Adaptive refinement hit its depth/radius cap before reaching tolerance."""


class DivisionByZeroJet(NumericFailure):
    """Jet division by a jet whose constant term is (numerically) zero."""


class JetOrderTooLow(NumericFailure):
    """An operation needs more Taylor orders than the jet carries."""


class InconsistentFit(NumericFailure):
    """Laurent window fits at radius and radius/2 disagree too much."""


class UnsupportedConfiguration(NumericFailure):
    """Branch points do not admit the v1 non-crossing cut layout."""


class SingularPeriods(NumericFailure):
    """A-period matrix is ill conditioned or cycle validation failed."""


class PathThroughBranchPoint(NumericFailure):
    """An integration path passes too close to a branch point."""


class ThetaZero(NumericFailure):
    """Theta vanished where a kernel formula needs to divide by it."""


class DenZero(NumericFailure):
    """Den(P, l) vanished (or is below threshold) where a formula divides by it."""


class ZeroEll(NumericFailure):
    """An operation that divides by l_i received l_i = 0."""


class ConstraintViolated(NumericFailure):
    """Input does not satisfy a required linear constraint."""


class DegenerateConstraints(NumericFailure):
    """Moment-map constraint matrix has unexpected rank."""


class IllConditionedBasis(NumericFailure):
    """Quadratic-differential sample matrix is too ill conditioned; resample."""


class PoleHit(NumericFailure):
    """A Moebius map sent one of the l_i through infinity."""


class HashMismatch(HeckeHitchinError):
    """Cache file does not match the requested curve/settings."""


class ScenarioError(HeckeHitchinError):
    """Scenario file failed validation."""
