"""Inequality and identity checks on discretized submanifolds.

Each check assembles the displayed left- and right-hand sides from the
mesh moments, reports the term breakdown, and classifies the outcome:

    Equality            |slack| <= eq_tol |lhs|
    Holds               slack >= -check_tol |lhs|
    Violated            otherwise, with all preconditions passing
    PreconditionUnmet   some hypothesis fails on this mesh

Slices and pole-anchored cones satisfy the boundary-term equality
condition node-by-node, so their verdicts are exact up to float
round-off regardless of quadrature resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import curvature, regions
from .errors import (
    NotMinimal,
    OpenBoundary,
    OutOfDomain,
    RegionViolation,
    SpecMismatch,
    WrongFamily,
)
from .submanifolds import GeometricMoments, SubmanifoldMesh, integrate, moments
from .warping import Family, ManifoldSpec, WarpProfile, domain_endpoints

__all__ = [
    "InequalityReport",
    "EQ_TOL",
    "CHECK_TOL",
    "check_fundamental",
    "check_hsiung_minkowski",
    "check_thm_ss",
    "check_cor_spaceform",
    "check_thm_rn",
    "check_domain_corollaries",
    "check_theo2",
]

EQ_TOL = 1e-6       # relative slack below which a verdict is Equality
CHECK_TOL = 1e-3    # relative negative slack before declaring Violated


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    rhs_terms: dict
    slack: float
    verdict: str
    preconditions: list = field(default_factory=list)
    equality_expected: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "terms": dict(sorted(self.rhs_terms.items())),
            "slack": self.slack,
            "verdict": self.verdict,
            "preconditions": [
                {"name": n, "ok": bool(ok)} for n, ok in self.preconditions],
            "equality_expected": self.equality_expected,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _classify(lhs, rhs, preconditions, eq_tol, check_tol):
    if any(not ok for _, ok in preconditions):
        return "PreconditionUnmet"
    slack = rhs - lhs
    scale = abs(lhs) if lhs != 0 else max(abs(rhs), 1.0)
    if abs(slack) <= eq_tol * scale:
        return "Equality"
    if slack < -check_tol * scale:
        return "Violated"
    return "Holds"


def _report(name, lhs, terms, preconditions, equality_expected=False,
            eq_tol=EQ_TOL, check_tol=CHECK_TOL):
    rhs = math.fsum(terms.values())
    verdict = _classify(lhs, rhs, preconditions, eq_tol, check_tol)
    return InequalityReport(
        name=name, lhs=float(lhs), rhs=float(rhs),
        rhs_terms={k: float(v) for k, v in terms.items()},
        slack=float(rhs - lhs), verdict=verdict,
        preconditions=list(preconditions),
        equality_expected=equality_expected,
    )


def _require_same_spec(mesh: SubmanifoldMesh, profile: WarpProfile):
    if mesh.spec != profile.spec:
        raise SpecMismatch("mesh and profile specs differ")


def _equality_mesh(mesh: SubmanifoldMesh) -> bool:
    # slices and geodesic spheres are closed; pole-anchored cones hit the
    # boundary with conormal equal to the radial gradient
    if mesh.variant in ("slice", "geodesic_sphere"):
        return True
    if mesh.variant in ("cone", "right_cone3d") and mesh.r_lo == 0.0:
        return True
    return False


# ---------------------------------------------------------------------------
# fundamental inequality
# ---------------------------------------------------------------------------

def check_fundamental(mesh: SubmanifoldMesh, profile: WarpProfile,
                      k: int | None = None, *, eq_tol=EQ_TOL,
                      check_tol=CHECK_TOL) -> InequalityReport:
    """Linear bound on |Sigma| by the boundary quotient integral, the
    radial mean-curvature integral and the radial Ricci correction."""
    _require_same_spec(mesh, profile)
    if k is None:
        k = mesh.k
    n = profile.spec.n
    r = mesh.node_r
    h = np.asarray(profile.h_at(r), float)
    hp = np.asarray(profile.h_prime_at(r), float)
    quot = h / hp
    ric = np.asarray(curvature.ricci_radial(profile, r), float)
    mom = moments(mesh, profile)

    pre = [("h_prime_positive", bool(np.all(hp > 0)))]
    terms = {
        "boundary_quotient": mom.int_boundary_quotient / k,
        "mean_curvature": integrate(mesh, -mesh.H_dot_gradr * quot),
        "ricci_correction": -integrate(
            mesh, ric * quot ** 2 * mesh.grad_r_sq) / (k * (n - 1)),
    }
    return _report("fundamental", mom.vol, terms, pre,
                   equality_expected=_equality_mesh(mesh),
                   eq_tol=eq_tol, check_tol=check_tol)


def check_hsiung_minkowski(mesh: SubmanifoldMesh, profile: WarpProfile, *,
                           tol=EQ_TOL) -> InequalityReport:
    """Closed-mesh identity: the integral of h' + h <H, grad r> must
    vanish.  A mesh with the mean curvature forced to zero leaves the
    positive integral of h', witnessing that no closed minimal
    submanifold exists."""
    _require_same_spec(mesh, profile)
    if not mesh.closed or mesh.boundary_r.size:
        raise OpenBoundary("identity requires a closed mesh")
    h = np.asarray(profile.h_at(mesh.node_r), float)
    hp = np.asarray(profile.h_prime_at(mesh.node_r), float)
    residual = integrate(mesh, hp + h * mesh.H_dot_gradr)
    vol = float(np.sum(mesh.weights))
    verdict = "Holds" if abs(residual) <= tol * vol else "Violated"
    return InequalityReport(
        name="hsiung_minkowski", lhs=abs(residual), rhs=0.0,
        rhs_terms={"residual": residual, "vol": vol},
        slack=-abs(residual), verdict=verdict,
        preconditions=[("closed", True)],
        equality_expected=True,
    )


# ---------------------------------------------------------------------------
# de Sitter-Schwarzschild
# ---------------------------------------------------------------------------

def _ss_q(spec, d):
    return 1.0 - spec.m * d ** (2.0 - spec.n) - spec.c * d * d


def check_thm_ss(mesh: SubmanifoldMesh, profile: WarpProfile, k: int,
                 case: str, *, eq_tol=EQ_TOL, check_tol=CHECK_TOL
                 ) -> InequalityReport:
    """Region-wise linear isoperimetric bounds in the de Sitter-
    Schwarzschild family.

    case i    band below (mn/2)^(1/(n-2)); smallest radius in both terms
    case ii   c > 0, band above the Ricci sign radius; largest radius in
              the first term, smallest in the Ricci term (as displayed)
    case iii  band above the quotient threshold (c <= 0), or between the
              two thresholds (c > 0); largest radius in both terms
    case iv   band above the quotient threshold, Ricci term absorbed,
              denominator k-1
    """
    _require_same_spec(mesh, profile)
    spec = profile.spec
    if spec.family != Family.DE_SITTER_SCHWARZSCHILD:
        raise WrongFamily("check_thm_ss needs a de Sitter-Schwarzschild profile")
    if case not in ("i", "ii", "iii", "iv"):
        raise ValueError(f"unknown case {case!r}")
    n = spec.n
    s0, s1 = domain_endpoints(spec)
    thr, ric_thr = regions.ss_thresholds(spec)
    mom = moments(mesh, profile)
    d, R = mom.d_sigma, mom.R_sigma

    pre = [("k_at_least_2", k >= 2)]
    if case == "i":
        pre.append(("band_below_threshold", s0 < d and R < thr))
    elif case == "ii":
        pre.append(("c_positive", spec.c > 0))
        if spec.c > 0:
            pre.append(("band_above_ricci_radius", d > ric_thr and R < s1))
    elif case == "iii":
        if spec.c > 0:
            pre.append(("band_between_thresholds", thr < d and R < ric_thr))
        else:
            pre.append(("band_above_threshold", d > thr))
    else:
        pre.append(("band_above_threshold", d > thr))

    bracket = mom.bvol + k * mom.int_H
    if case == "i":
        lead = d / (k * math.sqrt(_ss_q(spec, d)))
        ric_scale = d * d / (k * (n - 1) * _ss_q(spec, d))
        terms = {"linear": lead * bracket,
                 "ricci": -ric_scale * mom.int_ric_grad}
        name = "ss_i"
    elif case == "ii":
        lead = R / (k * math.sqrt(_ss_q(spec, R)))
        ric_scale = d * d / (k * (n - 1) * _ss_q(spec, d))
        terms = {"linear": lead * bracket,
                 "ricci": -ric_scale * mom.int_ric_grad}
        name = "ss_ii"
    elif case == "iii":
        lead = R / (k * math.sqrt(_ss_q(spec, R)))
        ric_scale = R * R / (k * (n - 1) * _ss_q(spec, R))
        terms = {"linear": lead * bracket,
                 "ricci": -ric_scale * mom.int_ric_grad}
        name = "ss_iii"
    else:
        lead = R / ((k - 1) * math.sqrt(_ss_q(spec, R)))
        terms = {"linear": lead * bracket}
        name = "ss_iv"

    equality = _equality_mesh(mesh) and case in ("i", "ii", "iii")
    rep = _report(name, mom.vol, terms, pre, equality_expected=equality,
                  eq_tol=eq_tol, check_tol=check_tol)
    if case == "iv" and spec.c < 0:
        universal = bracket / (math.sqrt(-spec.c) * (k - 1))
        rep.rhs_terms["universal_negative_c_bound"] = float(universal)
    if case == "i":
        c1 = regions.c1_constant(spec, d, k)
        rep.rhs_terms["c1_constant"] = float(c1)
        rep.rhs_terms["c1_bound"] = float(c1 * bracket)
    return rep


def check_cor_spaceform(mesh: SubmanifoldMesh, profile: WarpProfile, k: int,
                        which: str, *, eq_tol=EQ_TOL, check_tol=CHECK_TOL
                        ) -> InequalityReport:
    """Space-form corollaries with the tanh / tan prefactors.

    `which` is "Hn" (c < 0) or "Sn" (c > 0, open hemisphere); the
    gradient integral enters with opposite signs in the two cases."""
    _require_same_spec(mesh, profile)
    spec = profile.spec
    if spec.family != Family.SPACE_FORM:
        raise WrongFamily("space-form corollaries need a space form")
    if which not in ("Hn", "Sn"):
        raise ValueError(f"which must be 'Hn' or 'Sn', got {which!r}")
    mom = moments(mesh, profile)
    r = mesh.node_r
    R_tilde = float(np.max(r))
    bracket = mom.bvol + k * mom.int_H
    pre = [("k_at_least_2", k >= 2)]
    if which == "Hn":
        pre.append(("negative_curvature", spec.c < 0))
        if spec.c >= 0:
            return _report("spaceform_Hn", mom.vol, {"linear": 0.0}, pre)
        a = math.sqrt(-spec.c)
        grad_int = integrate(mesh, np.tanh(a * r) ** 2 * mesh.grad_r_sq)
        terms = {
            "linear": math.tanh(a * R_tilde) / (a * k) * bracket,
            "gradient": grad_int / k,
        }
        name = "spaceform_Hn"
    else:
        pre.append(("positive_curvature", spec.c > 0))
        if spec.c <= 0:
            return _report("spaceform_Sn", mom.vol, {"linear": 0.0}, pre)
        a = math.sqrt(spec.c)
        inside = bool(R_tilde < math.pi / (2.0 * a))
        pre.append(("open_hemisphere", inside))
        if not inside:
            raise OutOfDomain("mesh leaves the open hemisphere")
        grad_int = integrate(mesh, np.tan(a * r) ** 2 * mesh.grad_r_sq)
        terms = {
            "linear": math.tan(a * R_tilde) / (a * k) * bracket,
            "gradient": -grad_int / k,
        }
        name = "spaceform_Sn"
    return _report(name, mom.vol, terms, pre,
                   equality_expected=_equality_mesh(mesh),
                   eq_tol=eq_tol, check_tol=check_tol)


# ---------------------------------------------------------------------------
# Reissner-Nordstrom
# ---------------------------------------------------------------------------

def _rn_q(spec, d):
    u = d ** (2.0 - spec.n)
    return 1.0 - spec.m * u + spec.q ** 2 * u * u


def check_thm_rn(mesh: SubmanifoldMesh, profile: WarpProfile, k: int,
                 case: str, *, eq_tol=EQ_TOL, check_tol=CHECK_TOL
                 ) -> InequalityReport:
    """Region-wise linear isoperimetric bounds in the Reissner-Nordstrom
    family: case i uses the smallest radius on (s0, s2), case ii the
    largest on (s2, inf).

    The simplified one-constant bound is reported in the terms map with
    the proof-consistent denominator k - C2(d); the printed variant with
    C2(d) - k is evaluated alongside for visibility (it is negative
    precisely where the bound applies).
    """
    _require_same_spec(mesh, profile)
    spec = profile.spec
    if spec.family != Family.REISSNER_NORDSTROM:
        raise WrongFamily("check_thm_rn needs a Reissner-Nordstrom profile")
    if case not in ("i", "ii"):
        raise ValueError(f"unknown case {case!r}")
    n = spec.n
    thr = regions.rn_thresholds(spec)
    s0, _ = domain_endpoints(spec)
    mom = moments(mesh, profile)
    d, R = mom.d_sigma, mom.R_sigma
    pre = [("k_at_least_2", k >= 2)]
    if case == "i":
        pre.append(("band_in_inner_region", s0 < d and R < thr.s2))
        lead_radius = d
    else:
        pre.append(("band_in_outer_region", d > thr.s2))
        lead_radius = R
    bracket = mom.bvol + k * mom.int_H
    lead = lead_radius / (k * math.sqrt(_rn_q(spec, lead_radius)))
    ric_scale = lead_radius ** 2 / (k * (n - 1) * _rn_q(spec, lead_radius))
    terms = {"linear": lead * bracket,
             "ricci": -ric_scale * mom.int_ric_grad}
    rep = _report(f"rn_{case}", mom.vol, terms, pre,
                  equality_expected=_equality_mesh(mesh),
                  eq_tol=eq_tol, check_tol=check_tol)
    c2 = regions.c2_constant(spec, d)
    rep.rhs_terms["c2_constant"] = float(c2)
    if c2 < k:
        simplified = lead_radius / ((k - c2) * math.sqrt(_rn_q(spec, lead_radius))) \
            * bracket
        rep.rhs_terms["simplified_bound"] = float(simplified)
        rep.rhs_terms["simplified_bound_printed_sign"] = float(
            lead_radius / ((c2 - k) * math.sqrt(_rn_q(spec, lead_radius))) * bracket)
    return rep


# ---------------------------------------------------------------------------
# domain corollaries
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _band_volume(spec, profile, s_a, s_b):
    """|Omega| for the radial band (s_a, s_b) x fiber by 1-d quadrature
    of h^(n-1) over the radial coordinate."""
    from .submanifolds import sphere_area

    n = spec.n
    r_a = float(profile.radial_coordinate(s_a))
    r_b = float(profile.radial_coordinate(s_b))
    mid = 0.5 * (r_a + r_b)
    half = 0.5 * (r_b - r_a)
    xs = mid + half * _GL_X
    vals = np.asarray(profile.h_at(xs), float) ** (n - 1)
    vol = float((vals * _GL_W).sum() * half) * sphere_area(n - 1)
    bvol = (s_a ** (n - 1) + s_b ** (n - 1)) * sphere_area(n - 1)
    return vol, bvol, r_a, r_b


def check_domain_corollaries(spec: ManifoldSpec, profile: WarpProfile,
                             band: tuple[float, float], *, eq_tol=EQ_TOL,
                             check_tol=CHECK_TOL) -> InequalityReport:
    """Full-dimensional isoperimetric bounds for a radial band, given by
    the k = n specialization of the linear inequalities."""
    if spec != profile.spec:
        raise SpecMismatch("spec and profile differ")
    s_a, s_b = band
    if not s_a < s_b:
        raise OutOfDomain("band must satisfy s_a < s_b")
    n = spec.n
    vol, bvol, _, _ = _band_volume(spec, profile, s_a, s_b)
    d, R = s_a, s_b

    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        thr, _ = regions.ss_thresholds(spec)
        s0, s1 = domain_endpoints(spec)
        if s_b <= thr:
            c1 = regions.c1_constant(spec, d, n)
            pre = [("band_below_threshold", s0 < s_a and s_b < thr),
                   ("c1_positive", c1 > 0)]
            terms = {"c1_bound": c1 * bvol}
            name = "ss_domain_i"
        elif s_a >= thr:
            pre = [("band_above_threshold", thr < s_a and s_b < s1)]
            terms = {"linear": R / ((n - 1) * math.sqrt(_ss_q(spec, R))) * bvol}
            name = "ss_domain_ii"
            rep = _report(name, vol, terms, pre, eq_tol=eq_tol,
                          check_tol=check_tol)
            if spec.c < 0:
                rep.rhs_terms["universal_negative_c_bound"] = float(
                    bvol / (math.sqrt(-spec.c) * (n - 1)))
            return rep
        else:
            raise RegionViolation(
                f"band ({s_a}, {s_b}) straddles the threshold {thr:.6g}")
        return _report(name, vol, terms, pre, eq_tol=eq_tol, check_tol=check_tol)

    if spec.family == Family.REISSNER_NORDSTROM:
        thr = regions.rn_thresholds(spec)
        s0, _ = domain_endpoints(spec)
        c2 = regions.c2_constant(spec, d)
        if s_b <= thr.s2:
            pre = [("band_in_inner_region", s0 < s_a), ("c2_below_n", c2 < n)]
            lead_radius = d
            name = "rn_domain_i"
        elif s_a >= thr.s2:
            pre = [("band_in_outer_region", s_a > thr.s2), ("c2_below_n", c2 < n)]
            lead_radius = R
            name = "rn_domain_ii"
        else:
            raise RegionViolation(
                f"band ({s_a}, {s_b}) straddles s2 = {thr.s2:.6g}")
        if c2 >= n:
            return _report(name, vol, {"bound": 0.0}, pre)
        terms = {"bound": lead_radius
                 / ((n - c2) * math.sqrt(_rn_q(spec, lead_radius))) * bvol}
        rep = _report(name, vol, terms, pre, eq_tol=eq_tol, check_tol=check_tol)
        rep.rhs_terms["printed_sign_bound"] = float(
            lead_radius / ((c2 - n) * math.sqrt(_rn_q(spec, lead_radius))) * bvol)
        return rep

    raise WrongFamily("domain corollaries apply to the black-hole families")


# ---------------------------------------------------------------------------
# minimal surfaces (k = 2)
# ---------------------------------------------------------------------------

def check_theo2(mesh: SubmanifoldMesh, profile: WarpProfile, case: str, *,
                eq_tol=EQ_TOL, check_tol=CHECK_TOL) -> InequalityReport:
    """Isoperimetric bound 2 pi A <= L^2 + curvature term for compact
    minimal surfaces in pole-anchored warped products.

    case i requires u(r) = r + h/h' nondecreasing on the mesh band and
    uses the radial Ricci integral; case ii requires u nonincreasing
    plus nonnegative fiber scalar curvature and uses scal - 2 ric.
    """
    _require_same_spec(mesh, profile)
    spec = profile.spec
    if case not in ("i", "ii"):
        raise ValueError(f"unknown case {case!r}")
    if mesh.k != 2:
        raise NotMinimal("surface checks need a 2-dimensional mesh")
    if np.any(mesh.H_norm != 0.0):
        raise NotMinimal("mesh mean curvature data is not identically zero")
    h0 = float(profile.h_at(0.0)) if profile.r_grid[0] == 0.0 else 1.0
    if h0 != 0.0:
        raise WrongFamily("surface bound needs a pole-anchored family (h(0)=0)")

    lo = max(mesh.r_lo, mesh.r_hi * 1e-9)
    sign_ivals = regions.u_monotonicity(profile, (lo, mesh.r_hi))
    signs = {s for _, s in sign_ivals}
    if case == "i":
        region_ok = signs <= {0, 1}
        pre = [("u_nondecreasing", region_ok)]
    else:
        region_ok = signs <= {0, -1}
        pre = [("u_nonincreasing", region_ok),
               ("fiber_scal_nonnegative", True)]
    if not region_ok:
        raise RegionViolation(f"u(r) changes monotonicity on the band: {sign_ivals}")

    mom = moments(mesh, profile)
    A = mom.vol
    L = mom.bvol
    n = spec.n
    r = mesh.node_r
    ric = np.asarray(curvature.ricci_radial(profile, r), float)
    if case == "i":
        curv_int = integrate(mesh, ric)
        terms = {"L_squared": L * L,
                 "curvature": A * curv_int / (n - 1)}
        name = "minimal_surface_i"
    else:
        scal = np.asarray(curvature.scalar_curvature(profile, r), float)
        curv_int = integrate(mesh, scal - 2.0 * ric)
        terms = {"L_squared": L * L,
                 "curvature": 2.0 * A * curv_int / ((n - 1) * (n - 2))}
        name = "minimal_surface_ii"
    return _report(name, 2.0 * math.pi * A, terms, pre,
                   eq_tol=eq_tol, check_tol=check_tol)
