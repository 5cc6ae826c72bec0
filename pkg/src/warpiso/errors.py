"""Exception types shared across the package.

All errors derive from :class:`WarpisoError` so callers can catch the
package's failures with a single except clause.  Precondition-style
failures carry the name of the violated condition in their message.
"""


class WarpisoError(Exception):
    """Base class for all warpiso errors."""


class InvalidParameter(WarpisoError):
    """A manifold parameter violates its admissibility constraint."""


class RootBracketingFailure(WarpisoError):
    """A bracket scan found no sign change for a required root."""


class DomainExceeded(WarpisoError):
    """Requested radial extent lies outside the manifold's domain."""


class IntegrationFailure(WarpisoError):
    """Profile integration could not reach the requested accuracy."""


class OutOfDomain(WarpisoError):
    """Evaluation point lies outside the tabulated radial domain."""


class WrongFamily(WarpisoError):
    """Operation does not apply to this manifold family."""


class UnsupportedFiber(WarpisoError):
    """Cross-section type not supported by this operation."""


class OrderingViolation(WarpisoError):
    """Computed critical radii violate their proven ordering (a bug)."""


class SpecMismatch(WarpisoError):
    """Mesh and profile were built from different manifold specs."""


class DegenerateMetric(WarpisoError):
    """Induced metric determinant fell below tolerance."""


class OpenBoundary(WarpisoError):
    """Operation requires a closed mesh but the mesh has boundary."""


class EmptyResult(WarpisoError):
    """Truncation removed every node."""


class NotMinimal(WarpisoError):
    """Operation requires a mesh with vanishing mean curvature."""


class RegionViolation(WarpisoError):
    """Radial band lies outside the region a statement requires."""


class HemisphereViolation(WarpisoError):
    """Spherical ambient mesh leaves the open hemisphere."""


class PreconditionUnmet(WarpisoError):
    """A hypothesis of the statement fails on the given inputs."""


class ConstantInapplicable(WarpisoError):
    """The simplified bound's constant exceeds the dimension bound."""


class WindowTooSmall(WarpisoError):
    """Profile does not extend far enough for an asymptotic fit."""
