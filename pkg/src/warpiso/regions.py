"""Critical radii, named constants and monotonicity regions.

The quotient h/h' controls every linear isoperimetric bound; its
derivative has a closed numerator per family, so sign classification
never differentiates numerically.  The second diagnostic u = r + h/h'
has no closed root in general and is classified by a bracketed scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OrderingViolation, OutOfDomain, WrongFamily
from .warping import Family, ManifoldSpec, WarpProfile, domain_endpoints, validate_spec

__all__ = [
    "RnThresholds",
    "RegionReport",
    "ss_thresholds",
    "rn_thresholds",
    "quotient_derivative_numerator",
    "quotient_derivative_sign",
    "u_prime",
    "u_monotonicity",
    "c1_constant",
    "c2_constant",
    "c1_threshold_comparison",
    "region_report",
]


def ss_thresholds(spec: ManifoldSpec) -> tuple[float, float | None]:
    """Quotient-monotonicity threshold (mn/2)^(1/(n-2)) and, for c > 0,
    the radius (m(n-2)/(2c))^(1/n) where the radial Ricci changes sign."""
    if spec.family != Family.DE_SITTER_SCHWARZSCHILD:
        raise WrongFamily("ss_thresholds applies to the de Sitter-Schwarzschild family")
    validate_spec(spec)
    n, m, c = spec.n, spec.m, spec.c
    ss_thr = (m * n / 2.0) ** (1.0 / (n - 2))
    ric_thr = (m * (n - 2) / (2.0 * c)) ** (1.0 / n) if c > 0 else None
    return ss_thr, ric_thr


@dataclass(frozen=True)
class RnThresholds:
    s2: float
    s3: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float


def rn_thresholds(spec: ManifoldSpec) -> RnThresholds:
    """Roots of the quotient-derivative quadratic P(u) = 1 - (mn/2)u +
    (n-1) q^2 u^2 and of Q(u) = 1 - m u + q^2 u^2 in u = s^(2-n), plus
    the radii s2 = alpha1^(-1/(n-2)), s3 = alpha2^(-1/(n-2))."""
    if spec.family != Family.REISSNER_NORDSTROM:
        raise WrongFamily("rn_thresholds applies to the Reissner-Nordstrom family")
    validate_spec(spec)
    n, m, q = spec.n, spec.m, spec.q
    disc_p = m * m * n * n - 16.0 * (n - 1) * q * q
    if disc_p <= 0:
        # impossible once m > 2q and n >= 3; kept as a hard guard
        raise OrderingViolation("quadratic for the quotient sign has no real roots")
    root_p = math.sqrt(disc_p)
    alpha1 = (m * n - root_p) / (4.0 * (n - 1) * q * q)
    alpha2 = (m * n + root_p) / (4.0 * (n - 1) * q * q)
    root_q = math.sqrt(m * m - 4.0 * q * q)
    beta1 = (m - root_q) / (2.0 * q * q)
    beta2 = (m + root_q) / (2.0 * q * q)
    # rationalized powers avoid cancellation for small q
    s2 = ((m * n + root_p) / 4.0) ** (1.0 / (n - 2))
    s3 = alpha2 ** (-1.0 / (n - 2))
    if not (alpha1 < beta1 < alpha2 < beta2):
        raise OrderingViolation(
            f"expected alpha1 < beta1 < alpha2 < beta2, got "
            f"{alpha1}, {beta1}, {alpha2}, {beta2}")
    s0, _ = domain_endpoints(spec)
    if not (s3 < s0 < s2):
        raise OrderingViolation(f"expected s3 < s0 < s2, got {s3}, {s0}, {s2}")
    return RnThresholds(s2=s2, s3=s3, alpha1=alpha1, alpha2=alpha2,
                        beta1=beta1, beta2=beta2)


def quotient_derivative_numerator(profile: WarpProfile, r):
    """Numerator of d/dr (h/h'), i.e. h'^2 - h h'', via the family's
    closed form."""
    spec = profile.spec
    n = spec.n
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        h = profile.h_at(r)
        return 1.0 - 0.5 * spec.m * n * np.power(h, 2.0 - n)
    if spec.family == Family.REISSNER_NORDSTROM:
        h = profile.h_at(r)
        u = np.power(h, 2.0 - n)
        return 1.0 - 0.5 * spec.m * n * u + (n - 1) * spec.q ** 2 * u * u
    hp = profile.h_prime_at(r)
    return hp * hp - profile.h_at(r) * profile.h_second_at(r)


def quotient_derivative_sign(profile: WarpProfile, r) -> int:
    """Sign of d/dr (h/h') at r (h' > 0 makes the denominator positive)."""
    num = float(quotient_derivative_numerator(profile, r))
    if num > 0:
        return 1
    if num < 0:
        return -1
    return 0


def u_prime(profile: WarpProfile, r):
    """Derivative of u(r) = r + h/h', equal to 2 - h h''/h'^2."""
    h = profile.h_at(r)
    hp = profile.h_prime_at(r)
    return 2.0 - h * profile.h_second_at(r) / (hp * hp)


def _sign_intervals(fvals, grid, f, refine_tol):
    """Split [grid[0], grid[-1]] at the sign changes of f (bisected to
    refine_tol) and return (interval, sign) pairs."""
    signs = np.sign(fvals)
    changes = []
    for i in range(len(grid) - 1):
        if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]:
            a, b = grid[i], grid[i + 1]
            while b - a > refine_tol:
                mid = 0.5 * (a + b)
                if np.sign(f(mid)) == signs[i]:
                    a = mid
                else:
                    b = mid
            changes.append(0.5 * (a + b))
    edges = [grid[0], *changes, grid[-1]]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid_sign = int(np.sign(f(0.5 * (a + b))))
        out.append(((float(a), float(b)), mid_sign))
    return out


def u_monotonicity(profile: WarpProfile, interval: tuple[float, float],
                   samples: int = 1024, refine_tol: float = 1e-10):
    """Classify the sign of u'(r) on `interval` by scan plus bisection."""
    a, b = interval
    if not (0.0 <= a < b <= profile.r_max * (1 + 1e-12)):
        raise OutOfDomain(f"interval {interval} outside [0, {profile.r_max:.6g}]")
    a = max(a, b * 1e-9)  # r = 0 can be singular for u' (h' or h'' there)
    grid = np.linspace(a, b, samples)
    vals = u_prime(profile, grid)
    return _sign_intervals(vals, grid, lambda r: float(u_prime(profile, r)), refine_tol)


def quotient_monotonicity(profile: WarpProfile, interval: tuple[float, float],
                          samples: int = 1024, refine_tol: float = 1e-10):
    """Sign classification of d/dr (h/h') on `interval`."""
    a, b = interval
    if not (0.0 <= a < b <= profile.r_max * (1 + 1e-12)):
        raise OutOfDomain(f"interval {interval} outside [0, {profile.r_max:.6g}]")
    a = max(a, b * 1e-9)
    grid = np.linspace(a, b, samples)
    vals = np.asarray(quotient_derivative_numerator(profile, grid), float)
    return _sign_intervals(
        vals, grid,
        lambda r: float(quotient_derivative_numerator(profile, r)), refine_tol)


# ---------------------------------------------------------------------------
# named constants
# ---------------------------------------------------------------------------

def _ss_metric_value(spec, d):
    return 1.0 - spec.m * d ** (2.0 - spec.n) - spec.c * d * d


def c1_constant(spec: ManifoldSpec, d: float, k: int) -> float:
    """First linear-bound constant for the de Sitter-Schwarzschild family,

        d sqrt(Q(d)) / [(1 - (mn/2) d^(2-n)) + (k-1) Q(d)],

    with Q(d) = 1 - m d^(2-n) - c d^2.  Negative near the horizon; the
    associated bound applies only where the value is positive."""
    if spec.family != Family.DE_SITTER_SCHWARZSCHILD:
        raise WrongFamily("c1_constant applies to the de Sitter-Schwarzschild family")
    validate_spec(spec)
    s0, s1 = domain_endpoints(spec)
    if not (s0 < d < s1):
        raise OutOfDomain(f"d={d} outside ({s0:.6g}, {s1:.6g})")
    n, m = spec.n, spec.m
    qd = _ss_metric_value(spec, d)
    num = d * math.sqrt(qd)
    den = (1.0 - 0.5 * m * n * d ** (2.0 - n)) + (k - 1) * qd
    return num / den


def c1_threshold_comparison(spec: ManifoldSpec, k: int) -> dict:
    """Value of the displayed constant at the quotient threshold versus
    the simplified value 1/(k-1) quoted for that point.

    The two agree only when d equals sqrt(Q(d)) there; both numbers are
    reported so the discrepancy stays visible."""
    thr, _ = ss_thresholds(spec)
    displayed = c1_constant(spec, thr, k)
    quoted = 1.0 / (k - 1)
    return {
        "threshold": thr,
        "displayed_formula": displayed,
        "quoted_value": quoted,
        "agree": math.isclose(displayed, quoted, rel_tol=1e-9),
    }


def c2_constant(spec: ManifoldSpec, d: float) -> float:
    """Decay constant of the Reissner-Nordstrom simplified bound,

        (n-2)/(2 d^(n-2)) (m - 2q^2/d^(n-2)) / (1 - m d^(2-n) + q^2 d^(4-2n)).

    Diverges at the horizon and decays like m(n-2)/2 d^(2-n) at
    infinity."""
    if spec.family != Family.REISSNER_NORDSTROM:
        raise WrongFamily("c2_constant applies to the Reissner-Nordstrom family")
    validate_spec(spec)
    s0, _ = domain_endpoints(spec)
    if d <= s0:
        raise OutOfDomain(f"d={d} not above the horizon radius {s0:.6g}")
    n, m, q = spec.n, spec.m, spec.q
    u = d ** (2.0 - n)
    return 0.5 * (n - 2) * u * (m - 2.0 * q * q * u) / (1.0 - m * u + q * q * u * u)


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionReport:
    spec: ManifoldSpec
    s0: float
    s1: float
    ss_threshold: float | None
    ricci_sign_threshold: float | None
    s2: float | None
    s3: float | None
    quotient_monotone_intervals: list
    u_monotone_intervals: list

    def to_dict(self) -> dict:
        from .warping import spec_to_dict

        def enc(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else x

        return {
            "spec": spec_to_dict(self.spec),
            "s0": enc(self.s0),
            "s1": enc(self.s1),
            "ss_threshold": enc(self.ss_threshold),
            "ricci_sign_threshold": enc(self.ricci_sign_threshold),
            "s2": enc(self.s2),
            "s3": enc(self.s3),
            "quotient_monotone_intervals": [
                {"r_lo": a, "r_hi": b, "sign": s}
                for (a, b), s in self.quotient_monotone_intervals],
            "u_monotone_intervals": [
                {"r_lo": a, "r_hi": b, "sign": s}
                for (a, b), s in self.u_monotone_intervals],
        }


def region_report(profile: WarpProfile) -> RegionReport:
    """Collect every threshold and sign classification for one profile."""
    spec = profile.spec
    ss_thr = ric_thr = s2 = s3 = None
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        s0, s1 = domain_endpoints(spec)
        ss_thr, ric_thr = ss_thresholds(spec)
    elif spec.family == Family.REISSNER_NORDSTROM:
        s0, s1 = domain_endpoints(spec)
        rn = rn_thresholds(spec)
        s2, s3 = rn.s2, rn.s3
    else:
        s0, s1 = profile.s_domain
    window = (profile.r_max * 1e-6, profile.r_max)
    q_ivals = quotient_monotonicity(profile, window)
    u_ivals = u_monotonicity(profile, window)
    return RegionReport(
        spec=spec, s0=s0, s1=s1,
        ss_threshold=ss_thr, ricci_sign_threshold=ric_thr,
        s2=s2, s3=s3,
        quotient_monotone_intervals=q_ivals,
        u_monotone_intervals=u_ivals,
    )
