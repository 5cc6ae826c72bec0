"""Numerical laboratory for isoperimetric inequalities, volume
monotonicity and growth estimates on warped product manifolds."""

__version__ = "0.1.0"

from .warping import (  # noqa: F401
    Family,
    ManifoldSpec,
    WarpProfile,
    build_profile,
    domain_endpoints,
    validate_spec,
)
