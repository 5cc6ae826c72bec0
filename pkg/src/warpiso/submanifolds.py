"""Discretized parametric test submanifolds with quadrature weights.

Mesh families
-------------
slice            {s} x S^(n-1), the umbilic level set of the radius
cone             radial cone over a latitude sphere of polar angle beta
                 inside a great S^k of the fiber; beta = pi/2 gives the
                 totally geodesic (minimal) k-plane through the axis
geodesic_sphere  metric sphere about the pole of a space form (which is
                 a slice of the radial coordinate)
radial_graph     closed hypersurface r = phi(omega) over the fiber, with
                 curvature data from chart finite differences
right_cone3d     the classical cone of central angle 2*alpha in flat
                 3-space (a pole-anchored k=2 cone)

Every mesh carries per-node measure weights, |H| and <H, grad r>, and
|grad_Sigma r|^2, which is all any of the verified statements consume.
Sphere quadrature is a product Gauss rule in the cosine of each
latitude (Gauss-Jacobi with the exact sin-power weight), recursive over
dimensions up to 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import roots_jacobi

from .curvature import ricci_radial
from .errors import (
    DegenerateMetric,
    EmptyResult,
    OutOfDomain,
    SpecMismatch,
    WrongFamily,
)
from .warping import Family, ManifoldSpec, WarpProfile

__all__ = [
    "SubmanifoldMesh",
    "GeometricMoments",
    "unit_ball_volume",
    "sphere_area",
    "sphere_quadrature",
    "mesh_slice",
    "mesh_cone",
    "mesh_geodesic_sphere",
    "mesh_radial_graph",
    "mesh_right_cone3d",
    "as_minimal",
    "moments",
    "integrate",
    "truncate",
    "export_text",
]


def unit_ball_volume(k: int) -> float:
    """Volume of the k-dimensional Euclidean unit ball."""
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


def sphere_area(j: int) -> float:
    """Area of the unit j-sphere."""
    return 2.0 * math.pi ** ((j + 1) / 2.0) / math.gamma((j + 1) / 2.0)


def sphere_quadrature(j: int, resolution: int):
    """Quadrature nodes (angles) and weights for the unit sphere S^j.

    Angles are [theta_1, ..., theta_(j-1), phi]; the polar factors use
    Gauss-Jacobi nodes in cos(theta) with weight (1-x^2)^((j-2)/2), the
    azimuth uses uniform midpoints (trapezoid, exact for periodic
    smooth integrands).  Total weight reproduces |S^j| to quadrature
    precision.
    """
    if j < 1:
        raise ValueError("sphere dimension must be >= 1")
    if j > 5:
        raise ValueError("sphere quadrature implemented for dimensions <= 5")
    n_axis = max(4, int(math.ceil((max(resolution, 1) / 2.0) ** (1.0 / j))))
    n_phi = 2 * n_axis
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    angles = phi[:, None]
    weights = np.full(n_phi, 2.0 * math.pi / n_phi)
    for axis_dim in range(2, j + 1):
        # prepend the polar angle of S^axis_dim
        x, wx = roots_jacobi(n_axis, (axis_dim - 2) / 2.0, (axis_dim - 2) / 2.0)
        theta = np.arccos(x[::-1])
        wx = wx[::-1]
        angles = np.concatenate(
            [np.repeat(theta, angles.shape[0])[:, None],
             np.tile(angles, (n_axis, 1))], axis=1)
        weights = (wx[:, None] * weights[None, :]).ravel()
    return angles, weights


# ---------------------------------------------------------------------------
# mesh container
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubmanifoldMesh:
    """Quadrature mesh of one parametric test submanifold.

    Immutable; `truncate` returns a new mesh.  `cell_r_lo`/`cell_r_hi`
    give each node's radial parameter cell for truncation clipping and
    are None for slices (all-or-nothing).
    """

    spec: ManifoldSpec
    variant: str
    k: int
    node_r: np.ndarray
    node_angles: np.ndarray
    weights: np.ndarray
    grad_r_sq: np.ndarray
    H_norm: np.ndarray
    H_dot_gradr: np.ndarray
    boundary_r: np.ndarray
    boundary_weights: np.ndarray
    closed: bool
    r_lo: float
    r_hi: float
    cell_r_lo: np.ndarray | None = None
    cell_r_hi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def node_count(self) -> int:
        return int(self.node_r.size)


def _empty_boundary():
    return np.empty(0), np.empty(0)


_PANEL_X, _PANEL_W = np.polynomial.legendre.leggauss(8)


def _cell_sine_moments(mids, step, power):
    """Exact integrals of sin(theta)^power over the cells centered at
    `mids` (8-point Gauss panels, machine precision for these powers)."""
    lo = mids - 0.5 * step
    xs = lo[:, None] + 0.5 * step * (_PANEL_X[None, :] + 1.0)
    return (np.sin(xs) ** power * _PANEL_W[None, :]).sum(axis=1) * 0.5 * step


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def mesh_slice(spec: ManifoldSpec, profile: WarpProfile, s: float,
               resolution: int = 4096) -> SubmanifoldMesh:
    """Level set {s} x S^(n-1): umbilic, closed, |grad_Sigma r| = 0 and
    mean curvature vector -(h'/h) grad r."""
    if spec != profile.spec:
        raise SpecMismatch("mesh spec differs from profile spec")
    n = spec.n
    r_s = float(profile.radial_coordinate(s))
    h = float(profile.h_at(r_s))
    hp = float(profile.h_prime_at(r_s))
    quot = hp / h
    angles, w_unit = sphere_quadrature(n - 1, resolution)
    m = w_unit.size
    return SubmanifoldMesh(
        spec=spec, variant="slice", k=n - 1,
        node_r=np.full(m, r_s),
        node_angles=angles,
        weights=w_unit * h ** (n - 1),
        grad_r_sq=np.zeros(m),
        H_norm=np.full(m, quot),
        H_dot_gradr=np.full(m, -quot),
        boundary_r=_empty_boundary()[0],
        boundary_weights=_empty_boundary()[1],
        closed=True, r_lo=r_s, r_hi=r_s,
        meta={"s": s},
    )


def mesh_geodesic_sphere(spec: ManifoldSpec, radius: float,
                         resolution: int = 4096) -> SubmanifoldMesh:
    """Metric sphere of geodesic radius `radius` about the pole of a
    space form.  Centered at the pole it coincides with the slice at
    area radius h(radius)."""
    if spec.family != Family.SPACE_FORM:
        raise WrongFamily("geodesic spheres are built in space forms only")
    n, c = spec.n, spec.c
    if radius <= 0:
        raise OutOfDomain("radius must be positive")
    if c > 0 and radius >= math.pi / (2.0 * math.sqrt(c)):
        raise OutOfDomain("radius must stay inside the open hemisphere")
    if c == 0:
        h, hp = radius, 1.0
    elif c < 0:
        a = math.sqrt(-c)
        h, hp = math.sinh(a * radius) / a, math.cosh(a * radius)
    else:
        a = math.sqrt(c)
        h, hp = math.sin(a * radius) / a, math.cos(a * radius)
    quot = hp / h
    angles, w_unit = sphere_quadrature(n - 1, resolution)
    m = w_unit.size
    return SubmanifoldMesh(
        spec=spec, variant="geodesic_sphere", k=n - 1,
        node_r=np.full(m, radius),
        node_angles=angles,
        weights=w_unit * h ** (n - 1),
        grad_r_sq=np.zeros(m),
        H_norm=np.full(m, quot),
        H_dot_gradr=np.full(m, -quot),
        boundary_r=_empty_boundary()[0],
        boundary_weights=_empty_boundary()[1],
        closed=True, r_lo=radius, r_hi=radius,
        meta={"radius": radius},
    )


def mesh_cone(spec: ManifoldSpec, profile: WarpProfile, k: int,
              cap_angle: float, r_lo: float, r_hi: float,
              resolution: int = 4096,
              cap_resolution: int = 16) -> SubmanifoldMesh:
    """Radial cone over the latitude (k-1)-sphere of polar angle
    `cap_angle` inside a great S^k of the fiber.

    The latitude sphere has mean curvature |cot(cap_angle)| in the
    fiber, so the cone satisfies <H, grad r> = 0 exactly with
    |H| = (k-1)|cot(cap_angle)| / (k h(r)); cap_angle = pi/2 makes it
    totally geodesic.  |grad_Sigma r| = 1 at every node.  Boundary
    consists of the latitude spheres at r_hi and (when r_lo is interior)
    at r_lo.
    """
    if spec != profile.spec:
        raise SpecMismatch("mesh spec differs from profile spec")
    n = spec.n
    if not 2 <= k <= n - 1:
        raise OutOfDomain(f"cone dimension k={k} must lie in [2, n-1]")
    if not 0.0 < cap_angle < math.pi:
        raise OutOfDomain("cap_angle must lie in (0, pi)")
    if not (0.0 <= r_lo < r_hi <= profile.r_max * (1 + 1e-12)):
        raise OutOfDomain(f"radial range [{r_lo}, {r_hi}] outside the profile")
    if r_lo == 0.0 and spec.family in (Family.DE_SITTER_SCHWARZSCHILD,
                                       Family.REISSNER_NORDSTROM):
        raise OutOfDomain("cones must start above the horizon (r_lo > 0)")

    sin_b = math.sin(cap_angle)
    cot_b = 0.0 if abs(math.cos(cap_angle)) < 1e-15 else math.cos(cap_angle) / sin_b

    cap_angles, cap_w_unit = sphere_quadrature(k - 1, cap_resolution)
    cap_w = cap_w_unit * sin_b ** (k - 1)
    n_cap = cap_w.size

    cells = max(int(resolution), 8)
    edges = np.linspace(r_lo, r_hi, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dr = edges[1] - edges[0]
    # two Gauss nodes per radial cell: exact for the polynomial measures
    # of flat k-planes up to k = 4, order 4 otherwise
    offset = dr / (2.0 * math.sqrt(3.0))
    r_nodes = np.stack([mids - offset, mids + offset], axis=1).ravel()
    cell_lo = np.repeat(edges[:-1], 2)
    cell_hi = np.repeat(edges[1:], 2)

    h_r = np.asarray(profile.h_at(r_nodes), float)
    radial_w = 0.5 * dr * h_r ** (k - 1)

    node_r = np.repeat(r_nodes, n_cap)
    weights = (radial_w[:, None] * cap_w[None, :]).ravel()
    ang = np.concatenate(
        [np.full((node_r.size, 1), cap_angle),
         np.tile(cap_angles, (2 * cells, 1))], axis=1)
    h_nodes = np.repeat(h_r, n_cap)
    H_norm = ((k - 1) * abs(cot_b) / k) / h_nodes if cot_b != 0.0 \
        else np.zeros(node_r.size)

    b_r = [r_hi]
    b_w = [float(profile.h_at(r_hi)) ** (k - 1) * cap_w.sum()]
    if r_lo > 0.0:
        b_r.append(r_lo)
        b_w.append(float(profile.h_at(r_lo)) ** (k - 1) * cap_w.sum())
    boundary_r = np.array(b_r)
    boundary_weights = np.array(b_w)

    return SubmanifoldMesh(
        spec=spec, variant="cone", k=k,
        node_r=node_r,
        node_angles=ang,
        weights=weights,
        grad_r_sq=np.ones(node_r.size),
        H_norm=H_norm,
        H_dot_gradr=np.zeros(node_r.size),
        boundary_r=boundary_r,
        boundary_weights=boundary_weights,
        closed=False, r_lo=r_lo, r_hi=r_hi,
        cell_r_lo=np.repeat(cell_lo, n_cap),
        cell_r_hi=np.repeat(cell_hi, n_cap),
        meta={"cap_angle": cap_angle, "minimal": cot_b == 0.0},
    )


def mesh_right_cone3d(profile: WarpProfile, alpha: float, R: float,
                      resolution: int = 4096) -> SubmanifoldMesh:
    """Right circular cone of central angle 2*alpha and slant length R
    in flat 3-space."""
    spec = profile.spec
    if spec.family != Family.SPACE_FORM or spec.c != 0.0 or spec.n != 3:
        raise WrongFamily("right cones live in the flat space form with n = 3")
    mesh = mesh_cone(spec, profile, k=2, cap_angle=alpha, r_lo=0.0, r_hi=R,
                     resolution=resolution)
    return replace(mesh, variant="right_cone3d",
                   meta={"alpha": alpha, "R": R, "minimal": mesh.meta["minimal"]})


def mesh_radial_graph(spec: ManifoldSpec, profile: WarpProfile, phi,
                      resolution: int = 4096) -> SubmanifoldMesh:
    """Closed hypersurface r = phi(omega) over the full fiber sphere.

    `phi` is a callable of the chart angles (theta_1, ..., phi) or an
    array tabulated on the mesh's own uniform chart grid.  The induced
    metric, |grad_Sigma r|^2 and the mean curvature come from central
    finite differences with step equal to the chart spacing; the
    construction converges at second order under refinement.
    """
    if spec != profile.spec:
        raise SpecMismatch("mesh spec differs from profile spec")
    n = spec.n
    dim = n - 1            # chart axes: theta_1..theta_(n-2), phi
    if dim < 2:
        raise WrongFamily("radial graphs need a fiber of dimension >= 2")
    n_theta = max(8, int(math.ceil((max(resolution, 1) / 2.0) ** (1.0 / dim))))
    n_phi = 2 * n_theta
    axes = [np.linspace(0.0, math.pi, n_theta, endpoint=False)
            + math.pi / (2 * n_theta) for _ in range(dim - 1)]
    axes.append((np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi))
    steps = [ax[1] - ax[0] for ax in axes]
    grids = np.meshgrid(*axes, indexing="ij")

    if callable(phi):
        rvals = np.asarray(phi(*grids), dtype=float)
    else:
        rvals = np.asarray(phi, dtype=float)
        if rvals.shape != grids[0].shape:
            raise ValueError(
                f"tabulated phi must have shape {grids[0].shape}, got {rvals.shape}")
    if np.any(rvals <= 0) or np.any(rvals > profile.r_max * (1 + 1e-12)):
        raise OutOfDomain("graph values leave the profile's radial domain")

    h = np.asarray(profile.h_at(rvals), float)
    hp = np.asarray(profile.h_prime_at(rvals), float)

    # diagonal fiber metric sigma_aa = prod_{l<a} sin^2(theta_l)
    sigma = [np.ones_like(rvals)]
    for l in range(dim - 1):
        sigma.append(sigma[-1] * np.sin(grids[l]) ** 2)
    sigma = sigma[:dim]

    def d1(f, a):
        if a == dim - 1:
            return (np.roll(f, -1, a) - np.roll(f, 1, a)) / (2 * steps[a])
        return np.gradient(f, steps[a], axis=a, edge_order=2)

    def d2(f, a):
        if a == dim - 1:
            return (np.roll(f, -1, a) - 2 * f + np.roll(f, 1, a)) / steps[a] ** 2
        return np.gradient(d1(f, a), steps[a], axis=a, edge_order=2)

    dphi = [d1(rvals, a) for a in range(dim)]
    grad_sigma_sq = sum(dphi[a] ** 2 / sigma[a] for a in range(dim))
    P2 = 1.0 + grad_sigma_sq / (h * h)
    P = np.sqrt(P2)

    cot = [np.cos(grids[l]) / np.sin(grids[l]) for l in range(dim - 1)]

    # trace over the graph metric of the second fundamental form
    # A_ab = hess_sigma(phi)_ab - h h' sigma_ab - 2 (h'/h) phi_a phi_b
    # traced with g^ab = (sigma^ab - v^a v^b / (h^2 P^2)) / h^2
    trace_sigma_A = np.zeros_like(rvals)
    vAv = np.zeros_like(rvals)
    for a in range(dim):
        hess_aa = d2(rvals, a)
        for b in range(a):
            hess_aa += sigma[a] * cot[b] * dphi[b] / sigma[b]
        A_aa = hess_aa - h * hp * sigma[a] - 2.0 * (hp / h) * dphi[a] ** 2
        trace_sigma_A += A_aa / sigma[a]
        vAv += (dphi[a] / sigma[a]) ** 2 * A_aa
        for b in range(a):
            hess_ab = d1(dphi[b], a) - cot[b] * dphi[a]
            A_ab = hess_ab - 2.0 * (hp / h) * dphi[a] * dphi[b]
            vAv += 2.0 * (dphi[a] / sigma[a]) * (dphi[b] / sigma[b]) * A_ab
    trace_g_A = (trace_sigma_A - vAv / (h * h * P2)) / (h * h)
    k = dim
    H_signed = trace_g_A / (k * P)          # trace of II over k, times <nu,dr>=1/P
    H_norm = np.abs(trace_g_A) / (k * P)
    H_dot = H_signed / P

    det_sigma = np.ones_like(rvals)
    for a in range(dim):
        det_sigma = det_sigma * sigma[a]
    det_g = h ** (2 * dim) * det_sigma * P2
    if np.any(det_g < 1e-12):
        raise DegenerateMetric("induced metric determinant below 1e-12")

    # separable measure sqrt(det sigma) = prod_l sin^(dim-l)(theta_l):
    # per-cell moments of each sine power are integrated exactly, so a
    # constant graph reproduces the slice moments to machine precision
    axis_w = []
    for l in range(dim - 1):
        axis_w.append(_cell_sine_moments(axes[l], steps[l], dim - 1 - l))
    axis_w.append(np.full(n_phi, steps[-1]))
    w_sep = axis_w[0]
    for aw in axis_w[1:]:
        w_sep = np.multiply.outer(w_sep, aw)
    weights = w_sep * h ** dim * P

    grad_r_sq = 1.0 - 1.0 / P2
    r_half = 0.5 * sum(np.abs(dphi[a]) * steps[a] for a in range(dim))

    flat_angles = np.stack([g.ravel() for g in grids], axis=1)
    return SubmanifoldMesh(
        spec=spec, variant="radial_graph", k=k,
        node_r=rvals.ravel(),
        node_angles=flat_angles,
        weights=weights.ravel(),
        grad_r_sq=np.clip(grad_r_sq.ravel(), 0.0, 1.0),
        H_norm=H_norm.ravel(),
        H_dot_gradr=H_dot.ravel(),
        boundary_r=_empty_boundary()[0],
        boundary_weights=_empty_boundary()[1],
        closed=True,
        r_lo=float(rvals.min()), r_hi=float(rvals.max()),
        cell_r_lo=(rvals - r_half).ravel(),
        cell_r_hi=(rvals + r_half).ravel(),
        meta={"chart_shape": list(rvals.shape)},
    )


def as_minimal(mesh: SubmanifoldMesh) -> SubmanifoldMesh:
    """Debug copy with the mean-curvature data forced to zero (used to
    witness the nonexistence of closed minimal submanifolds)."""
    return replace(mesh,
                   H_norm=np.zeros_like(mesh.H_norm),
                   H_dot_gradr=np.zeros_like(mesh.H_dot_gradr),
                   meta={**mesh.meta, "forced_minimal": True})


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricMoments:
    vol: float
    bvol: float
    int_H: float
    int_ric_grad: float
    int_h: float
    int_hprime: float
    int_H_dot: float
    int_boundary_quotient: float
    d_sigma: float
    R_sigma: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in (
            "vol", "bvol", "int_H", "int_ric_grad", "int_h", "int_hprime",
            "int_H_dot", "int_boundary_quotient", "d_sigma", "R_sigma")}


def integrate(mesh: SubmanifoldMesh, values) -> float:
    """Weighted sum of a per-node integrand over the mesh."""
    return float(np.sum(mesh.weights * np.asarray(values, float)))


def moments(mesh: SubmanifoldMesh, profile: WarpProfile) -> GeometricMoments:
    """All integrals the inequality checks consume, by weighted sums."""
    if mesh.spec != profile.spec:
        raise SpecMismatch("mesh and profile specs differ")
    if mesh.node_r.size == 0:
        raise EmptyResult("mesh has no nodes")
    r = mesh.node_r
    h = np.asarray(profile.h_at(r), float)
    hp = np.asarray(profile.h_prime_at(r), float)
    ric = np.asarray(ricci_radial(profile, r), float)
    quot = h / hp
    vol = float(np.sum(mesh.weights))
    if mesh.boundary_r.size:
        hb = np.asarray(profile.h_at(mesh.boundary_r), float)
        hpb = np.asarray(profile.h_prime_at(mesh.boundary_r), float)
        bvol = float(np.sum(mesh.boundary_weights))
        bquot = float(np.sum(mesh.boundary_weights * hb / hpb))
    else:
        bvol = 0.0
        bquot = 0.0
    return GeometricMoments(
        vol=vol,
        bvol=bvol,
        int_H=integrate(mesh, mesh.H_norm),
        int_ric_grad=integrate(mesh, ric * mesh.grad_r_sq),
        int_h=integrate(mesh, h),
        int_hprime=integrate(mesh, hp),
        int_H_dot=integrate(mesh, mesh.H_dot_gradr * quot),
        int_boundary_quotient=bquot,
        d_sigma=float(h.min()),
        R_sigma=float(h.max()),
    )


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def truncate(mesh: SubmanifoldMesh, profile: WarpProfile,
             r_cut: float) -> SubmanifoldMesh:
    """Restrict the mesh to the radial ball {r <= r_cut}.

    Straddling parameter cells keep the linear fraction of their weight
    (clipped-measure error O(cell diameter^2)); slices are kept or
    dropped whole.  Surviving original boundary pieces are retained; no
    new cut edge is synthesized.
    """
    if mesh.spec != profile.spec:
        raise SpecMismatch("mesh and profile specs differ")
    if r_cut < 0 or r_cut > profile.r_max * (1 + 1e-12):
        raise OutOfDomain(f"r_cut={r_cut} outside [0, {profile.r_max:.6g}]")

    if mesh.cell_r_lo is None:
        if mesh.r_hi <= r_cut:
            return mesh
        raise EmptyResult("slice lies beyond the truncation radius")

    lo, hi = mesh.cell_r_lo, mesh.cell_r_hi
    width = np.maximum(hi - lo, 1e-300)
    frac = np.clip((r_cut - lo) / width, 0.0, 1.0)
    keep = frac > 0.0
    if not np.any(keep):
        raise EmptyResult("no nodes survive the truncation")

    new_weights = mesh.weights * frac
    b_keep = mesh.boundary_r <= r_cut

    return replace(
        mesh,
        node_r=mesh.node_r[keep],
        node_angles=mesh.node_angles[keep],
        weights=new_weights[keep],
        grad_r_sq=mesh.grad_r_sq[keep],
        H_norm=mesh.H_norm[keep],
        H_dot_gradr=mesh.H_dot_gradr[keep],
        boundary_r=mesh.boundary_r[b_keep],
        boundary_weights=mesh.boundary_weights[b_keep],
        closed=False,
        r_hi=min(mesh.r_hi, r_cut),
        cell_r_lo=lo[keep],
        cell_r_hi=np.minimum(hi[keep], r_cut),
        meta={**mesh.meta, "truncated_at": r_cut},
    )


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def export_text(mesh: SubmanifoldMesh, path) -> None:
    """Write the mesh in the line-oriented text format:

        # warpiso mesh
        variant k node_count boundary_count
        r angle_1 ... angle_j weight        (one node per line)
        b r weight                          (one boundary node per line)
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# warpiso mesh\n")
        fh.write(f"{mesh.variant} {mesh.k} {mesh.node_count} "
                 f"{mesh.boundary_r.size}\n")
        for i in range(mesh.node_count):
            angs = " ".join(repr(float(a)) for a in mesh.node_angles[i])
            fh.write(f"{float(mesh.node_r[i])!r} {angs} "
                     f"{float(mesh.weights[i])!r}\n")
        for i in range(mesh.boundary_r.size):
            fh.write(f"b {float(mesh.boundary_r[i])!r} "
                     f"{float(mesh.boundary_weights[i])!r}\n")
