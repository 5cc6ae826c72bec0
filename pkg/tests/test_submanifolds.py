import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from warpiso import submanifolds as sm
from warpiso import warping as wp
from warpiso.errors import EmptyResult, OutOfDomain, SpecMismatch, WrongFamily


@pytest.fixture(scope="module")
def flat3():
    return wp.build_profile(wp.space_form(3, 0.0), r_max=20.0, resolution=512)


@pytest.fixture(scope="module")
def ss_flat():
    return wp.build_profile(wp.de_sitter_schwarzschild(3, 0.1, 0.0),
                            resolution=2048)


def test_unit_ball_volumes():
    assert sm.unit_ball_volume(2) == pytest.approx(math.pi)
    assert sm.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sm.sphere_area(2) == pytest.approx(4 * math.pi)


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------

def test_slice_unit_sphere_volume(flat3):
    spec = flat3.spec
    mesh = sm.mesh_slice(spec, flat3, 1.0, 4096)
    mom = sm.moments(mesh, flat3)
    assert mom.vol == pytest.approx(4 * math.pi, rel=1e-12)
    assert mom.bvol == 0.0
    assert mesh.grad_r_sq.max() == 0.0


def test_slice_volume_scales_with_dimension():
    for n in (4, 5):
        spec = wp.space_form(n, 0.0)
        prof = wp.build_profile(spec, r_max=10.0, resolution=128)
        mesh = sm.mesh_slice(spec, prof, 2.0, 4096)
        mom = sm.moments(mesh, prof)
        assert mom.vol == pytest.approx(sm.sphere_area(n - 1) * 2.0 ** (n - 1),
                                        rel=1e-9)


def test_slice_mean_curvature_value(ss_flat):
    # <H, grad r> = -sqrt(1 - m s^(2-n) - c s^2)/s on the slice at s
    s = 0.4
    mesh = sm.mesh_slice(ss_flat.spec, ss_flat, s, 512)
    expect = -math.sqrt(1.0 - 0.1 / s) / s
    assert np.allclose(mesh.H_dot_gradr, expect, rtol=1e-9)
    assert np.allclose(mesh.H_norm, -expect, rtol=1e-9)


def test_slice_constant_integrands(ss_flat):
    s = 0.7
    mesh = sm.mesh_slice(ss_flat.spec, ss_flat, s, 512)
    mom = sm.moments(mesh, ss_flat)
    r_s = float(ss_flat.radial_coordinate(s))
    hp = float(ss_flat.h_prime_at(r_s))
    assert mom.int_hprime == pytest.approx(hp * mom.vol, rel=1e-12)
    assert mom.int_h == pytest.approx(float(ss_flat.h_at(r_s)) * mom.vol, rel=1e-12)
    assert mom.int_ric_grad == 0.0
    assert mom.d_sigma == pytest.approx(mom.R_sigma)


def test_hsiung_minkowski_pointwise_on_slice(ss_flat):
    mesh = sm.mesh_slice(ss_flat.spec, ss_flat, 0.9, 512)
    h = np.asarray(ss_flat.h_at(mesh.node_r))
    hp = np.asarray(ss_flat.h_prime_at(mesh.node_r))
    assert np.max(np.abs(hp + h * mesh.H_dot_gradr)) < 1e-14


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

def test_right_cone_closed_forms(flat3):
    alpha, R = 0.7, 2.0
    cone = sm.mesh_right_cone3d(flat3, alpha, R, 2048)
    mom = sm.moments(cone, flat3)
    assert mom.vol == pytest.approx(math.pi * R * R * math.sin(alpha), rel=1e-12)
    assert mom.bvol == pytest.approx(2 * math.pi * R * math.sin(alpha), rel=1e-12)
    # equality of the fundamental bound: |Sigma| = (1/2) boundary quotient
    assert mom.vol == pytest.approx(0.5 * mom.int_boundary_quotient, rel=1e-12)
    assert np.all(cone.H_dot_gradr == 0.0)
    # |H| = cot(alpha)/(2 r) at every node
    expect = math.cos(alpha) / math.sin(alpha) / (2.0 * cone.node_r)
    assert np.allclose(cone.H_norm, expect, rtol=1e-12)


def test_flat_plane_through_origin(flat3):
    for k in (2, 3):
        if k > flat3.spec.n - 1:
            continue
        plane = sm.mesh_cone(flat3.spec, flat3, k=k, cap_angle=math.pi / 2,
                             r_lo=0.0, r_hi=3.0, resolution=1024)
        mom = sm.moments(plane, flat3)
        assert mom.vol == pytest.approx(sm.unit_ball_volume(k) * 3.0 ** k,
                                        rel=1e-9)
        assert np.all(plane.H_norm == 0.0)
        assert np.all(plane.grad_r_sq == 1.0)


def test_flat_kplane_higher_dimension():
    spec = wp.space_form(5, 0.0)
    prof = wp.build_profile(spec, r_max=10.0, resolution=128)
    plane = sm.mesh_cone(spec, prof, k=3, cap_angle=math.pi / 2,
                         r_lo=0.0, r_hi=2.0, resolution=512)
    mom = sm.moments(plane, prof)
    assert mom.vol == pytest.approx(sm.unit_ball_volume(3) * 8.0, rel=1e-9)


def test_cone_boundary_pieces(ss_flat):
    r_lo = float(ss_flat.radial_coordinate(0.3))
    r_hi = float(ss_flat.radial_coordinate(1.5))
    cone = sm.mesh_cone(ss_flat.spec, ss_flat, k=2, cap_angle=1.0,
                        r_lo=r_lo, r_hi=r_hi, resolution=512)
    assert cone.boundary_r.size == 2
    length = 2 * math.pi * math.sin(1.0)
    np.testing.assert_allclose(
        sorted(cone.boundary_weights),
        sorted([0.3 * length, 1.5 * length]), rtol=1e-9)


def test_cone_rejects_bad_inputs(flat3, ss_flat):
    with pytest.raises(OutOfDomain):
        sm.mesh_cone(flat3.spec, flat3, k=5, cap_angle=1.0, r_lo=0.0, r_hi=2.0)
    with pytest.raises(OutOfDomain):
        sm.mesh_cone(flat3.spec, flat3, k=2, cap_angle=0.0, r_lo=0.0, r_hi=2.0)
    with pytest.raises(OutOfDomain):
        sm.mesh_cone(ss_flat.spec, ss_flat, k=2, cap_angle=1.0, r_lo=0.0,
                     r_hi=1.0)
    with pytest.raises(SpecMismatch):
        sm.mesh_cone(ss_flat.spec, flat3, k=2, cap_angle=1.0, r_lo=0.1, r_hi=1.0)


# ---------------------------------------------------------------------------
# geodesic spheres
# ---------------------------------------------------------------------------

def test_geodesic_sphere_flat():
    spec = wp.space_form(3, 0.0)
    rho = 1.7
    mesh = sm.mesh_geodesic_sphere(spec, rho, 1024)
    prof = wp.build_profile(spec, r_max=5.0, resolution=128)
    mom = sm.moments(mesh, prof)
    assert mom.vol == pytest.approx(4 * math.pi * rho * rho, rel=1e-12)
    assert np.allclose(mesh.H_norm, 1.0 / rho)


def test_geodesic_sphere_hyperbolic_is_slice():
    spec = wp.space_form(3, -1.0)
    prof = wp.build_profile(spec, r_max=4.0, resolution=256)
    rho = 1.2
    sphere = sm.mesh_geodesic_sphere(spec, rho, 512)
    slc = sm.mesh_slice(spec, prof, math.sinh(rho), 512)
    m1 = sm.moments(sphere, prof)
    m2 = sm.moments(slc, prof)
    assert m1.vol == pytest.approx(m2.vol, rel=1e-9)
    assert np.allclose(sphere.H_norm, math.cosh(rho) / math.sinh(rho), rtol=1e-12)
    assert np.allclose(sphere.H_dot_gradr, -math.cosh(rho) / math.sinh(rho),
                       rtol=1e-12)


def test_geodesic_sphere_hemisphere_guard():
    spec = wp.space_form(3, 1.0)
    with pytest.raises(OutOfDomain):
        sm.mesh_geodesic_sphere(spec, math.pi / 2, 128)
    with pytest.raises(WrongFamily):
        sm.mesh_geodesic_sphere(wp.de_sitter_schwarzschild(3, 0.1, 0.0), 1.0, 128)


# ---------------------------------------------------------------------------
# radial graphs
# ---------------------------------------------------------------------------

def test_constant_graph_reproduces_slice(flat3):
    spec = flat3.spec
    graph = sm.mesh_radial_graph(spec, flat3, lambda t, p: np.full_like(t, 1.3),
                                 4096)
    slc = sm.mesh_slice(spec, flat3, 1.3, 4096)
    gm = sm.moments(graph, flat3)
    sl = sm.moments(slc, flat3)
    assert gm.vol == pytest.approx(sl.vol, rel=1e-6)
    assert gm.int_hprime == pytest.approx(sl.int_hprime, rel=1e-6)
    assert gm.int_H_dot == pytest.approx(sl.int_H_dot, rel=1e-6)
    assert gm.int_ric_grad == pytest.approx(sl.int_ric_grad, abs=1e-10)


def test_graph_area_against_quadrature_oracle(flat3):
    # r = 1 + 0.2 cos(theta): area integral in the chart evaluated by an
    # independent adaptive quadrature
    f = lambda th: 1.0 + 0.2 * np.cos(th)
    fp = lambda th: -0.2 * np.sin(th)
    oracle, _ = dblquad(
        lambda ph, th: np.sin(th) * f(th) * np.sqrt(f(th) ** 2 + fp(th) ** 2),
        0.0, math.pi, 0.0, 2 * math.pi, epsabs=1e-12)
    graph = sm.mesh_radial_graph(flat3.spec, flat3,
                                 lambda t, p: 1.0 + 0.2 * np.cos(t), 16000)
    mom = sm.moments(graph, flat3)
    assert mom.vol == pytest.approx(oracle, rel=1e-4)


def test_graph_grad_bounds_random_smooth(flat3):
    rng = np.random.default_rng(17)
    for _ in range(5):
        a = rng.uniform(-0.3, 0.3)
        b = rng.uniform(-0.2, 0.2)

        def phi(t, p, a=a, b=b):
            return 2.0 + a * np.cos(t) + b * np.sin(t) ** 2 * np.cos(2 * p)

        graph = sm.mesh_radial_graph(flat3.spec, flat3, phi, 2000)
        assert np.all(graph.grad_r_sq >= 0.0)
        assert np.all(graph.grad_r_sq <= 1.0)
        assert graph.grad_r_sq.max() > 0.0


def test_graph_refinement_second_order(flat3):
    f = lambda t, p: 1.0 + 0.25 * np.cos(t)
    vols = []
    for res in (500, 2000, 8000):
        vols.append(sm.moments(sm.mesh_radial_graph(flat3.spec, flat3, f, res),
                               flat3).vol)
    e1, e2 = abs(vols[0] - vols[2]), abs(vols[1] - vols[2])
    order = math.log(e1 / e2) / math.log(2.0)
    assert order > 1.6


def test_graph_tabulated_array_input(flat3):
    probe = sm.mesh_radial_graph(flat3.spec, flat3,
                                 lambda t, p: np.full_like(t, 1.0), 1000)
    shape = tuple(probe.meta["chart_shape"])
    table = np.full(shape, 1.0)
    graph = sm.mesh_radial_graph(flat3.spec, flat3, table, 1000)
    assert sm.moments(graph, flat3).vol == pytest.approx(4 * math.pi, rel=1e-9)
    with pytest.raises(ValueError):
        sm.mesh_radial_graph(flat3.spec, flat3, np.ones((3, 3)), 1000)


# ---------------------------------------------------------------------------
# moments and truncation
# ---------------------------------------------------------------------------

def test_moments_spec_mismatch(flat3, ss_flat):
    mesh = sm.mesh_slice(flat3.spec, flat3, 1.0, 256)
    with pytest.raises(SpecMismatch):
        sm.moments(mesh, ss_flat)


def test_cauchy_schwarz_bound_on_meshes(flat3, ss_flat):
    # |integral of <H, grad r> h/h'| <= integral of |H| h/h'
    meshes = [
        sm.mesh_slice(ss_flat.spec, ss_flat, 0.5, 512),
        sm.mesh_right_cone3d(flat3, 0.9, 2.0, 512),
        sm.mesh_radial_graph(flat3.spec, flat3,
                             lambda t, p: 1.0 + 0.2 * np.cos(t), 2000),
    ]
    for mesh, prof in zip(meshes, (ss_flat, flat3, flat3)):
        h = np.asarray(prof.h_at(mesh.node_r))
        hp = np.asarray(prof.h_prime_at(mesh.node_r))
        lhs = abs(sm.integrate(mesh, mesh.H_dot_gradr * h / hp))
        rhs = sm.integrate(mesh, mesh.H_norm * h / hp)
        assert lhs <= rhs * (1 + 1e-12)


def test_truncate_flat_disk(flat3):
    plane = sm.mesh_cone(flat3.spec, flat3, k=2, cap_angle=math.pi / 2,
                         r_lo=0.0, r_hi=4.0, resolution=4096)
    cut = sm.truncate(plane, flat3, 1.0)
    mom = sm.moments(cut, flat3)
    assert mom.vol == pytest.approx(math.pi, rel=1e-3)


def test_truncate_monotone_in_radius(flat3):
    plane = sm.mesh_cone(flat3.spec, flat3, k=2, cap_angle=math.pi / 2,
                         r_lo=0.0, r_hi=4.0, resolution=1024)
    vols = [sm.moments(sm.truncate(plane, flat3, rc), flat3).vol
            for rc in np.linspace(0.2, 4.0, 25)]
    assert np.all(np.diff(vols) >= 0)


def test_truncate_below_everything(flat3):
    cone = sm.mesh_cone(flat3.spec, flat3, k=2, cap_angle=1.0,
                        r_lo=2.0, r_hi=4.0, resolution=256)
    with pytest.raises(EmptyResult):
        sm.truncate(cone, flat3, 1.0)


def test_truncate_slice_all_or_nothing(ss_flat):
    mesh = sm.mesh_slice(ss_flat.spec, ss_flat, 0.5, 256)
    r_s = float(ss_flat.radial_coordinate(0.5))
    assert sm.truncate(mesh, ss_flat, r_s * 1.01) is mesh
    with pytest.raises(EmptyResult):
        sm.truncate(mesh, ss_flat, r_s * 0.9)


def test_moment_refinement_convergence(ss_flat):
    # each moment settles to < 1e-3 relative change under doubling
    r_lo = float(ss_flat.radial_coordinate(0.3))
    r_hi = float(ss_flat.radial_coordinate(2.0))
    prev = None
    for res in (512, 1024):
        cone = sm.mesh_cone(ss_flat.spec, ss_flat, k=2, cap_angle=0.8,
                            r_lo=r_lo, r_hi=r_hi, resolution=res)
        m = sm.moments(cone, ss_flat)
        if prev is not None:
            for name in ("vol", "int_H", "int_h", "int_hprime"):
                a, b = getattr(prev, name), getattr(m, name)
                assert abs(a - b) / abs(b) < 1e-3
        prev = m


def test_export_text(tmp_path, flat3):
    mesh = sm.mesh_right_cone3d(flat3, 0.5, 1.0, 64)
    path = tmp_path / "mesh.txt"
    sm.export_text(mesh, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# warpiso mesh"
    variant, k, count, bcount = lines[1].split()
    assert variant == "right_cone3d" and int(k) == 2
    assert len(lines) == 2 + int(count) + int(bcount)
    fields = lines[2].split()
    total = sum(float(ln.split()[-1]) for ln in lines[2:2 + int(count)])
    assert total == pytest.approx(math.pi * math.sin(0.5), rel=1e-9)
