import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpiso import regions as rg
from warpiso import warping as wp
from warpiso.errors import OutOfDomain, WrongFamily


@pytest.fixture(scope="module")
def ss_flat():
    return wp.build_profile(wp.de_sitter_schwarzschild(3, 0.1, 0.0),
                            resolution=2048)


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def test_ss_threshold_values():
    thr, ric = rg.ss_thresholds(wp.de_sitter_schwarzschild(3, 0.1, 0.0))
    assert thr == pytest.approx(0.15, rel=1e-14)
    assert ric is None
    thr, _ = rg.ss_thresholds(wp.de_sitter_schwarzschild(4, 2.0, 0.0))
    assert thr == pytest.approx(2.0, rel=1e-14)


def test_ss_threshold_vanishes_with_mass():
    thr, _ = rg.ss_thresholds(wp.de_sitter_schwarzschild(3, 1e-12, 0.0))
    assert thr < 1e-11


def test_ss_threshold_ordering_positive_c():
    spec = wp.de_sitter_schwarzschild(3, 0.1, 0.5)
    thr, ric = rg.ss_thresholds(spec)
    s0, s1 = wp.domain_endpoints(spec)
    assert s0 < thr < ric < s1


def test_rn_thresholds_against_quadratic_oracle():
    spec = wp.reissner_nordstrom(3, 1.0, 0.25)
    t = rg.rn_thresholds(spec)
    # quadratic-formula oracle for 1 - 1.5 u + 0.125 u^2
    disc = math.sqrt(1.5 ** 2 - 4 * 0.125)
    a1 = (1.5 - disc) / 0.25
    a2 = (1.5 + disc) / 0.25
    assert t.alpha1 == pytest.approx(a1, rel=1e-12)
    assert t.alpha2 == pytest.approx(a2, rel=1e-12)
    assert t.s2 == pytest.approx(1.0 / a1, rel=1e-12)
    assert t.s3 == pytest.approx(1.0 / a2, rel=1e-12)


def test_rn_s2_matches_displayed_closed_form():
    for n, m, q in ((3, 1.0, 0.25), (4, 1.0, 0.25), (5, 2.0, 0.7), (6, 1.5, 0.4)):
        spec = wp.reissner_nordstrom(n, m, q)
        t = rg.rn_thresholds(spec)
        printed = (4 * (n - 1) * q * q
                   / (m * n - math.sqrt(m * m * n * n - 16 * (n - 1) * q * q))) \
            ** (1.0 / (n - 2))
        assert t.s2 == pytest.approx(printed, rel=1e-12)


def test_rn_s2_chargeless_limit_approaches_ss_threshold():
    # q -> 0 with m fixed: s2 tends to (mn/2)^(1/(n-2))
    n, m = 4, 1.0
    target = (m * n / 2.0) ** (1.0 / (n - 2))
    prev_gap = None
    for q in (1e-2, 1e-3, 1e-4, 1e-5):
        t = rg.rn_thresholds(wp.reissner_nordstrom(n, m, q))
        gap = abs(t.s2 - target)
        if prev_gap is not None:
            assert gap < prev_gap
        prev_gap = gap
    assert gap < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=3, max_value=6),
       st.floats(min_value=0.05, max_value=10.0),
       st.floats(min_value=0.011, max_value=0.49))
def test_rn_root_ordering_property(n, m, q_ratio):
    spec = wp.reissner_nordstrom(n, m, q_ratio * m)
    t = rg.rn_thresholds(spec)
    s0, _ = wp.domain_endpoints(spec)
    assert t.s3 < s0 < t.s2
    assert t.alpha1 < t.beta1 < t.alpha2 < t.beta2


def test_thresholds_wrong_family():
    with pytest.raises(WrongFamily):
        rg.ss_thresholds(wp.space_form(3, 0.0))
    with pytest.raises(WrongFamily):
        rg.rn_thresholds(wp.de_sitter_schwarzschild(3, 0.1, 0.0))


# ---------------------------------------------------------------------------
# quotient derivative sign
# ---------------------------------------------------------------------------

def test_quotient_sign_ss_threshold_split(ss_flat):
    thr, _ = rg.ss_thresholds(ss_flat.spec)
    below = float(ss_flat.radial_coordinate(0.12))
    above = float(ss_flat.radial_coordinate(0.5))
    assert rg.quotient_derivative_sign(ss_flat, below) == -1
    assert rg.quotient_derivative_sign(ss_flat, above) == 1


def test_quotient_sign_flat_space():
    prof = wp.build_profile(wp.space_form(3, 0.0), r_max=10.0, resolution=128)
    assert rg.quotient_derivative_sign(prof, 3.0) == 1


def test_quotient_sign_matches_finite_difference(ss_flat):
    rng = np.random.default_rng(2)
    thr, _ = rg.ss_thresholds(ss_flat.spec)
    r_thr = float(ss_flat.radial_coordinate(thr))
    d = 1e-5 * ss_flat.r_max
    count = 0
    while count < 100:
        r = rng.uniform(ss_flat.r_max * 0.01, ss_flat.r_max * 0.99)
        if abs(r - r_thr) < 1e-4 * ss_flat.r_max:
            continue
        count += 1
        quot = (np.asarray(ss_flat.h_at([r - d, r + d]))
                / np.asarray(ss_flat.h_prime_at([r - d, r + d])))
        fd_sign = 1 if quot[1] > quot[0] else -1
        assert rg.quotient_derivative_sign(ss_flat, r) == fd_sign


def test_quotient_numerator_arctan_closed_form():
    # d/dr (h/h') = 1 + 2 K r arctan(K r) for the arctan cylinder, and
    # the numerator is that expression times h'^2
    K = 1.3
    prof = wp.build_profile(wp.arctan_cylinder(3, K), r_max=20.0, resolution=128)
    rr = np.linspace(0.1, 15.0, 23)
    num = np.asarray(rg.quotient_derivative_numerator(prof, rr))
    hp = np.asarray(prof.h_prime_at(rr))
    expect = (1.0 + 2.0 * K * rr * np.arctan(K * rr)) * hp * hp
    assert np.max(np.abs(num - expect) / expect) < 1e-12


# ---------------------------------------------------------------------------
# u = r + h/h'
# ---------------------------------------------------------------------------

def test_u_monotone_space_forms():
    for c in (-1.0, 0.0, 1.0):
        r_hi = 1.4 if c > 0 else 5.0
        prof = wp.build_profile(wp.space_form(3, c), r_max=r_hi, resolution=256)
        ivals = rg.u_monotonicity(prof, (0.0, prof.r_max * 0.99))
        assert [s for _, s in ivals] == [1]


def test_u_prime_arctan_closed_form():
    K = 0.8
    prof = wp.build_profile(wp.arctan_cylinder(3, K), r_max=30.0, resolution=128)
    rr = np.linspace(0.2, 25.0, 31)
    got = np.asarray(rg.u_prime(prof, rr))
    expect = 2.0 + 2.0 * K * rr * np.arctan(K * rr)
    assert np.max(np.abs(got - expect)) < 1e-10
    assert np.all(got > 2.0)


def test_u_monotonicity_power_perturbed_sign_pattern():
    # B > 0 with p > 7 has a sign pattern +, -, + with change points at
    # the roots of the quadratic in t = r^p
    B, p = 1.0, 9.0
    spec = wp.power_perturbed(3, B, p)
    prof = wp.build_profile(spec, r_max=2.0, resolution=512)

    def f(t):
        return B * B * (p + 1) * (p + 2) * t * t - B * (p + 1) * (p - 4) * t + 2

    # bisection oracle on the quadratic
    def bisect(lo, hi):
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(lo) * f(mid) <= 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    disc = (B * (p + 1) * (p - 4)) ** 2 - 8 * B * B * (p + 1) * (p + 2)
    assert disc > 0
    t_mid = B * (p + 1) * (p - 4) / (2 * B * B * (p + 1) * (p + 2))
    t0 = bisect(1e-12, t_mid)
    t1 = bisect(t_mid, 10.0)
    r0, r1 = t0 ** (1 / p), t1 ** (1 / p)

    ivals = rg.u_monotonicity(prof, (1e-6, 2.0))
    signs = [s for _, s in ivals]
    assert signs == [1, -1, 1]
    assert ivals[0][0][1] == pytest.approx(r0, abs=1e-8)
    assert ivals[1][0][1] == pytest.approx(r1, abs=1e-8)


def test_u_monotone_power_perturbed_small_p():
    prof = wp.build_profile(wp.power_perturbed(3, 1.0, 3.0), r_max=3.0,
                            resolution=256)
    ivals = rg.u_monotonicity(prof, (1e-6, 3.0))
    assert [s for _, s in ivals] == [1]


def test_u_monotone_log_factor():
    prof = wp.build_profile(wp.log_factor(3, 1.0), r_max=20.0, resolution=256)
    ivals = rg.u_monotonicity(prof, (1e-6, 20.0))
    assert [s for _, s in ivals] == [1]


def test_u_monotonicity_out_of_domain(ss_flat):
    with pytest.raises(OutOfDomain):
        rg.u_monotonicity(ss_flat, (0.0, ss_flat.r_max * 2.0))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def test_c1_negative_near_horizon():
    spec = wp.de_sitter_schwarzschild(3, 0.1, 0.0)
    assert rg.c1_constant(spec, 0.1005, k=2) < 0


def test_c1_at_threshold_frozen_value():
    # first denominator term vanishes there: value d/((k-1) sqrt(Q(d)))
    spec = wp.de_sitter_schwarzschild(3, 0.1, 0.0)
    val = rg.c1_constant(spec, 0.15, k=2)
    assert val == pytest.approx(0.2598076211353316, rel=1e-12)


def test_c1_massless_limit_is_d_over_k():
    spec = wp.de_sitter_schwarzschild(3, 1e-14, 0.0)
    for d, k in ((0.5, 2), (1.2, 3)):
        assert rg.c1_constant(spec, d, k) == pytest.approx(d / k, rel=1e-10)


def test_c1_threshold_remark_discrepancy_documented():
    # the quoted simplification 1/(k-1) differs from the displayed
    # formula unless d = sqrt(Q(d)); both are reported, neither is hidden
    spec = wp.de_sitter_schwarzschild(3, 0.1, 0.0)
    cmp = rg.c1_threshold_comparison(spec, k=2)
    assert cmp["displayed_formula"] == pytest.approx(0.2598076211353316, rel=1e-12)
    assert cmp["quoted_value"] == 1.0
    assert not cmp["agree"]


def test_c2_limits():
    spec = wp.reissner_nordstrom(3, 1.0, 0.25)
    s0, _ = wp.domain_endpoints(spec)
    assert rg.c2_constant(spec, s0 * 1.0001) > 1e3
    assert rg.c2_constant(spec, 1e6) < 1e-5
    near, far = rg.c2_constant(spec, 10.0), rg.c2_constant(spec, 100.0)
    assert far < near


def test_c2_asymptotic_coefficient():
    # C2(d) d^(n-2) -> m(n-2)/2, within 1e-3 at d = 1e3 s0
    for n, m, q in ((3, 1.0, 0.25), (4, 1.0, 0.25)):
        spec = wp.reissner_nordstrom(n, m, q)
        s0, _ = wp.domain_endpoints(spec)
        d = 1e3 * s0
        val = rg.c2_constant(spec, d) * d ** (n - 2)
        assert abs(val - m * (n - 2) / 2.0) / (m * (n - 2) / 2.0) < 1e-3


def test_constants_domain_errors():
    spec = wp.de_sitter_schwarzschild(3, 0.1, 0.0)
    with pytest.raises(OutOfDomain):
        rg.c1_constant(spec, 0.05, k=2)
    rn = wp.reissner_nordstrom(3, 1.0, 0.25)
    with pytest.raises(OutOfDomain):
        rg.c2_constant(rn, 0.5)
    with pytest.raises(WrongFamily):
        rg.c1_constant(rn, 1.0, k=2)


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

def test_region_report_round_trip(ss_flat):
    rep = rg.region_report(ss_flat)
    data = rep.to_dict()
    assert data["s0"] == pytest.approx(0.1)
    assert data["s1"] == "inf"
    assert data["ss_threshold"] == pytest.approx(0.15)
    signs = [rec["sign"] for rec in data["quotient_monotone_intervals"]]
    assert signs == [-1, 1]


def test_region_report_rn():
    prof = wp.build_profile(wp.reissner_nordstrom(3, 1.0, 0.25), resolution=512)
    rep = rg.region_report(prof)
    assert rep.s2 == pytest.approx(1.0 / 0.7084973778708186, rel=1e-10)
    signs = [s for _, s in rep.quotient_monotone_intervals]
    assert signs == [-1, 1]
