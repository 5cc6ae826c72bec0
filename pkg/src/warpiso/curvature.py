"""Curvature quantities of the warped metric dr^2 + h(r)^2 g_N.

All formulas reduce to h, h' and h'' at a single radius; the fiber
enters only through its (constant) scalar curvature, so the supported
cross sections are the unit round sphere and the flat torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedFiber
from .warping import WarpProfile

__all__ = [
    "CurvatureSample",
    "fiber_scalar_curvature",
    "ricci_radial",
    "scalar_curvature",
    "sectional_curvatures",
    "hessian_r",
    "laplacian_r_on_submanifold",
    "sample",
]

_FIBERS = ("sphere", "torus")


def fiber_scalar_curvature(n: int, fiber: str = "sphere") -> float:
    """Scalar curvature of the (n-1)-dimensional cross section."""
    if fiber == "sphere":
        return float((n - 1) * (n - 2))
    if fiber == "torus":
        return 0.0
    raise UnsupportedFiber(f"fiber must be one of {_FIBERS}, got {fiber!r}")


def ricci_radial(profile: WarpProfile, r):
    """Ricci curvature in the radial direction: -(n-1) h''/h."""
    n = profile.spec.n
    return -(n - 1) * profile.h_second_at(r) / profile.h_at(r)


def scalar_curvature(profile: WarpProfile, r, scal_fiber: float | None = None):
    """Ambient scalar curvature at radius r.

    `scal_fiber` defaults to the round-sphere value (n-1)(n-2); pass 0
    for the flat torus cross section.
    """
    n = profile.spec.n
    if scal_fiber is None:
        scal_fiber = fiber_scalar_curvature(n, "sphere")
    h = profile.h_at(r)
    hp = profile.h_prime_at(r)
    hpp = profile.h_second_at(r)
    return (scal_fiber - (n - 1) * (n - 2) * hp * hp) / (h * h) \
        - 2.0 * (n - 1) * hpp / h


def sectional_curvatures(profile: WarpProfile, r, fiber: str = "sphere"):
    """(K_tangential, K_radial) for planes tangent to / containing the
    radial direction.  Sphere fiber only; the flat-torus numerator
    differs and is reported through `scalar_curvature` instead."""
    if fiber != "sphere":
        raise UnsupportedFiber(
            "sectional curvatures use the unit-sphere fiber; the flat torus "
            "replaces the (1 - h'^2) numerator by -h'^2")
    h = profile.h_at(r)
    hp = profile.h_prime_at(r)
    k_tan = (1.0 - hp * hp) / (h * h)
    k_rad = -profile.h_second_at(r) / h
    return k_tan, k_rad


def hessian_r(profile: WarpProfile, r, u, v):
    """Hessian of the radial distance on a vector pair.

    Vectors are given in an orthonormal frame whose first component is
    radial; the remaining components span the fiber directions.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u, v must be equal-length 1-d component vectors")
    quot = profile.h_prime_at(r) / profile.h_at(r)
    return quot * (float(u @ v) - u[0] * v[0])


def laplacian_r_on_submanifold(profile: WarpProfile, r, grad_sq: float,
                               k: int, H_dot_gradr: float):
    """Laplacian of r along a k-submanifold from its tangency data."""
    grad_sq = np.asarray(grad_sq, dtype=float)
    if np.any(grad_sq < -1e-12) or np.any(grad_sq > 1.0 + 1e-12):
        raise ValueError("grad_sq must lie in [0, 1]")
    quot = profile.h_prime_at(r) / profile.h_at(r)
    return quot * (k - grad_sq) + k * H_dot_gradr


@dataclass(frozen=True)
class CurvatureSample:
    r: float
    ric_radial: float
    scal: float
    K_tangential: float
    K_radial: float
    shape_coeff: float

    def csv_row(self) -> str:
        vals = (self.r, self.ric_radial, self.scal,
                self.K_tangential, self.K_radial, self.shape_coeff)
        return ",".join(repr(float(v)) for v in vals)


CSV_HEADER = "r,ric_radial,scal,K_tangential,K_radial,shape_coeff"


def sample(profile: WarpProfile, r: float, fiber: str = "sphere") -> CurvatureSample:
    k_tan, k_rad = sectional_curvatures(profile, r, fiber="sphere")
    scal_fib = fiber_scalar_curvature(profile.spec.n, fiber)
    return CurvatureSample(
        r=float(r),
        ric_radial=float(ricci_radial(profile, r)),
        scal=float(scalar_curvature(profile, r, scal_fib)),
        K_tangential=float(k_tan),
        K_radial=float(k_rad),
        shape_coeff=float(profile.h_prime_at(r) / profile.h_at(r)),
    )
