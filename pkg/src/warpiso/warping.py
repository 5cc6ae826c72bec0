"""Warping functions of rotationally symmetric metrics dr^2 + h(r)^2 g_N.

Seven families are supported.  Space forms and the cylinder-type families
have closed-form warping functions; the static black-hole families
(de Sitter-Schwarzschild and Reissner-Nordstrom) define h implicitly
through

    h'(r) = sqrt(W(h)),   h(0) = s0,   h'(0) = 0,

where W is the metric coefficient in area-radius coordinates and s0 is
the horizon radius (the largest positive root of W).  The change of
variable s = s0 + tau^2 removes the inverse-square-root singularity of
ds/dr at the horizon, so the radial coordinate

    r(tau) = integral_0^tau  2u / sqrt(W(s0 + u^2)) du

has a bounded, smooth integrand and is tabulated with per-interval
Gauss-Legendre panels.  Evaluation between nodes uses cubic Hermite
interpolation with the exact tabulated derivatives, checked against the
Fritsch-Carlson monotonicity box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import (
    DomainExceeded,
    InvalidParameter,
    OutOfDomain,
    RootBracketingFailure,
    WrongFamily,
)

__all__ = [
    "Family",
    "ManifoldSpec",
    "WarpProfile",
    "space_form",
    "de_sitter_schwarzschild",
    "reissner_nordstrom",
    "power_perturbed",
    "arctan_cylinder",
    "rational_decay_cylinder",
    "log_factor",
    "validate_spec",
    "constraint_checks",
    "domain_endpoints",
    "build_profile",
    "h_at",
    "h_prime_at",
    "h_second_at",
    "radial_coordinate",
    "origin_smoothness",
    "defining_ode_residual",
    "spec_to_dict",
    "spec_from_dict",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class Family(str, Enum):
    SPACE_FORM = "space_form"
    DE_SITTER_SCHWARZSCHILD = "de_sitter_schwarzschild"
    REISSNER_NORDSTROM = "reissner_nordstrom"
    POWER_PERTURBED = "power_perturbed"
    ARCTAN_CYLINDER = "arctan_cylinder"
    RATIONAL_DECAY_CYLINDER = "rational_decay_cylinder"
    LOG_FACTOR = "log_factor"


_ODE_FAMILIES = (Family.DE_SITTER_SCHWARZSCHILD, Family.REISSNER_NORDSTROM)

# families with h(0)=0, h'(0)=1 (metric closes at a pole)
_POLE_FAMILIES = (
    Family.SPACE_FORM,
    Family.POWER_PERTURBED,
    Family.ARCTAN_CYLINDER,
    Family.RATIONAL_DECAY_CYLINDER,
    Family.LOG_FACTOR,
)


@dataclass(frozen=True)
class ManifoldSpec:
    """Family tag plus the parameters defining the warped metric.

    Unused parameters stay at None; `validate_spec` enforces the
    per-family admissibility constraints.
    """

    family: Family
    n: int
    c: float = 0.0
    m: float | None = None
    q: float | None = None
    B: float | None = None
    p: float | None = None
    K: float | None = None
    a: float | None = None

    def label(self) -> str:
        parts = [self.family.value, f"n={self.n}"]
        for name in ("c", "m", "q", "B", "p", "K", "a"):
            v = getattr(self, name)
            if v is not None and not (name == "c" and self.family not in
                                      (Family.SPACE_FORM, Family.DE_SITTER_SCHWARZSCHILD)):
                parts.append(f"{name}={v:g}")
        return " ".join(parts)


def space_form(n: int, c: float) -> ManifoldSpec:
    return ManifoldSpec(Family.SPACE_FORM, n, c=c)


def de_sitter_schwarzschild(n: int, m: float, c: float) -> ManifoldSpec:
    return ManifoldSpec(Family.DE_SITTER_SCHWARZSCHILD, n, c=c, m=m)


def reissner_nordstrom(n: int, m: float, q: float) -> ManifoldSpec:
    return ManifoldSpec(Family.REISSNER_NORDSTROM, n, m=m, q=q)


def power_perturbed(n: int, B: float, p: float) -> ManifoldSpec:
    return ManifoldSpec(Family.POWER_PERTURBED, n, B=B, p=p)


def arctan_cylinder(n: int, K: float) -> ManifoldSpec:
    return ManifoldSpec(Family.ARCTAN_CYLINDER, n, K=K)


def rational_decay_cylinder(n: int, a: float, p: float) -> ManifoldSpec:
    return ManifoldSpec(Family.RATIONAL_DECAY_CYLINDER, n, a=a, p=p)


def log_factor(n: int, a: float) -> ManifoldSpec:
    return ManifoldSpec(Family.LOG_FACTOR, n, a=a)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def constraint_checks(spec: ManifoldSpec) -> list[dict]:
    """Evaluate every admissibility constraint for `spec`.

    Returns one record per constraint with the measured value, the bound
    and a pass flag; `validate_spec` raises on the first failure.
    """
    n = spec.n
    checks = []

    def add(name, ok, detail):
        checks.append({"constraint": name, "ok": bool(ok), "detail": detail})

    min_n = 2 if spec.family == Family.SPACE_FORM else 3
    add("dimension", isinstance(n, int) and n >= min_n, f"n={n} (need n >= {min_n})")

    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        add("mass_positive", spec.m is not None and spec.m > 0, f"m={spec.m}")
        if spec.c > 0 and spec.m is not None and spec.m > 0:
            coef = n ** n / (4.0 * (n - 2) ** (n - 2))
            val = coef * spec.m ** 2 * spec.c ** (n - 2)
            add("subcritical_mass", val < 1.0,
                f"n^n/(4(n-2)^(n-2)) m^2 c^(n-2) = {val:.6g} (need < 1)")
    elif spec.family == Family.REISSNER_NORDSTROM:
        ok = (spec.m is not None and spec.q is not None
              and spec.q > 0 and spec.m > 2.0 * spec.q)
        add("mass_dominates_charge", ok, f"m={spec.m}, 2q={None if spec.q is None else 2 * spec.q} (need m > 2q > 0)")
    elif spec.family == Family.POWER_PERTURBED:
        add("B_nonzero", spec.B is not None and spec.B != 0.0, f"B={spec.B}")
        add("p_positive", spec.p is not None and spec.p > 0, f"p={spec.p}")
    elif spec.family == Family.ARCTAN_CYLINDER:
        add("K_positive", spec.K is not None and spec.K > 0, f"K={spec.K}")
    elif spec.family == Family.RATIONAL_DECAY_CYLINDER:
        add("a_positive", spec.a is not None and spec.a > 0, f"a={spec.a}")
        add("p_positive", spec.p is not None and spec.p > 0, f"p={spec.p}")
    elif spec.family == Family.LOG_FACTOR:
        add("a_positive", spec.a is not None and spec.a > 0, f"a={spec.a}")
    return checks


def validate_spec(spec: ManifoldSpec) -> ManifoldSpec:
    """Check all parameter constraints; raise InvalidParameter naming the
    first violated one."""
    for rec in constraint_checks(spec):
        if not rec["ok"]:
            raise InvalidParameter(f"{rec['constraint']}: {rec['detail']}")
    return spec


# ---------------------------------------------------------------------------
# metric coefficient W(s) for the implicit families
# ---------------------------------------------------------------------------

def _w_direct(spec: ManifoldSpec, s):
    n = spec.n
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        return 1.0 - spec.m * np.power(s, 2.0 - n) - spec.c * s * s
    return 1.0 - spec.m * np.power(s, 2.0 - n) + spec.q ** 2 * np.power(s, 4.0 - 2.0 * n)


def _one_minus_pow(x, e):
    # 1 - (1+x)^e without cancellation for small x
    return -np.expm1(e * np.log1p(x))


def _w_anchored(spec: ManifoldSpec, s, s_root):
    # exact rewrite of W using W(s_root) = 0; stable within ~25% of the root
    n = spec.n
    x = s / s_root - 1.0
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        return (spec.m * s_root ** (2.0 - n) * _one_minus_pow(x, 2.0 - n)
                + spec.c * s_root ** 2 * _one_minus_pow(x, 2.0))
    return (spec.m * s_root ** (2.0 - n) * _one_minus_pow(x, 2.0 - n)
            - spec.q ** 2 * s_root ** (4.0 - 2.0 * n) * _one_minus_pow(x, 4.0 - 2.0 * n))


def _metric_coefficient(spec: ManifoldSpec, s, s0: float, s1: float):
    """W(s) evaluated stably: root-anchored forms take over near s0 (and
    near s1 when it is finite)."""
    s = np.asarray(s, dtype=float)
    w = _w_direct(spec, s)
    near0 = np.abs(s / s0 - 1.0) < 0.25
    if np.any(near0):
        w = np.where(near0, _w_anchored(spec, s, s0), w)
    if math.isfinite(s1):
        near1 = (np.abs(s / s1 - 1.0) < 0.25) & ~near0
        if np.any(near1):
            w = np.where(near1, _w_anchored(spec, s, s1), w)
    return w


def _w_slope_at_root(spec: ManifoldSpec, s_root: float) -> float:
    n = spec.n
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        return spec.m * (n - 2) * s_root ** (1.0 - n) - 2.0 * spec.c * s_root
    return (spec.m * (n - 2) * s_root ** (1.0 - n)
            - 2.0 * (n - 2) * spec.q ** 2 * s_root ** (3.0 - 2.0 * n))


# ---------------------------------------------------------------------------
# domain endpoints
# ---------------------------------------------------------------------------

def domain_endpoints(spec: ManifoldSpec) -> tuple[float, float]:
    """Area-radius interval (s0, s1) of a black-hole family.

    s1 is math.inf unless the de Sitter-Schwarzschild family has c > 0,
    in which case both endpoints are the positive roots of W.
    """
    validate_spec(spec)
    n = spec.n
    if spec.family == Family.REISSNER_NORDSTROM:
        # larger root of 1 - m u + q^2 u^2 in u = s^(2-n), rationalized
        disc = math.sqrt(spec.m ** 2 - 4.0 * spec.q ** 2)
        s0 = ((spec.m + disc) / 2.0) ** (1.0 / (n - 2))
        return s0, math.inf
    if spec.family != Family.DE_SITTER_SCHWARZSCHILD:
        raise WrongFamily(f"domain_endpoints needs an implicit family, got {spec.family.value}")

    m, c = spec.m, spec.c

    def w(s):
        return 1.0 - m * s ** (2.0 - n) - c * s * s

    if c > 0:
        s_peak = (m * (n - 2) / (2.0 * c)) ** (1.0 / n)
        if w(s_peak) <= 0:
            raise RootBracketingFailure("metric coefficient never positive")
        lo = _scan_down(w, s_peak)
        s0 = brentq(w, lo, s_peak, xtol=1e-300, rtol=8.9e-16)
        hi = _scan_up(w, s_peak)
        s1 = brentq(w, s_peak, hi, xtol=1e-300, rtol=8.9e-16)
        return float(s0), float(s1)

    # c <= 0: W is increasing, single root below any s with W > 0
    hi = m ** (1.0 / (n - 2))
    while w(hi) <= 0:
        hi *= 2.0
    lo = _scan_down(w, hi)
    s0 = brentq(w, lo, hi, xtol=1e-300, rtol=8.9e-16)
    return float(s0), math.inf


def _scan_down(f, start, max_iter=200):
    x = start / 2.0
    for _ in range(max_iter):
        if f(x) < 0:
            return x
        x /= 2.0
    raise RootBracketingFailure("no sign change below start")


def _scan_up(f, start, max_iter=200):
    x = start * 2.0
    for _ in range(max_iter):
        if f(x) < 0:
            return x
        x *= 2.0
    raise RootBracketingFailure("no sign change above start")


# ---------------------------------------------------------------------------
# closed-form families
# ---------------------------------------------------------------------------

def _closed_form_funcs(spec: ManifoldSpec):
    """(h, h', h'', r_of_s or None) for the analytic families."""
    fam = spec.family
    if fam == Family.SPACE_FORM:
        c = spec.c
        if c == 0.0:
            return (lambda r: np.asarray(r, float) * 1.0,
                    lambda r: np.ones_like(np.asarray(r, float)),
                    lambda r: np.zeros_like(np.asarray(r, float)),
                    lambda s: np.asarray(s, float) * 1.0)
        if c < 0.0:
            a = math.sqrt(-c)
            return (lambda r: np.sinh(a * np.asarray(r, float)) / a,
                    lambda r: np.cosh(a * np.asarray(r, float)),
                    lambda r: a * np.sinh(a * np.asarray(r, float)),
                    lambda s: np.arcsinh(a * np.asarray(s, float)) / a)
        a = math.sqrt(c)
        return (lambda r: np.sin(a * np.asarray(r, float)) / a,
                lambda r: np.cos(a * np.asarray(r, float)),
                lambda r: -a * np.sin(a * np.asarray(r, float)),
                lambda s: np.arcsin(np.clip(a * np.asarray(s, float), -1.0, 1.0)) / a)
    if fam == Family.POWER_PERTURBED:
        B, p = spec.B, spec.p
        return (lambda r: np.asarray(r, float) + B * np.power(r, p + 1.0),
                lambda r: 1.0 + B * (p + 1.0) * np.power(r, p),
                lambda r: B * p * (p + 1.0) * np.power(np.asarray(r, float), p - 1.0),
                None)
    if fam == Family.ARCTAN_CYLINDER:
        K = spec.K
        return (lambda r: np.arctan(K * np.asarray(r, float)) / K,
                lambda r: 1.0 / (1.0 + (K * np.asarray(r, float)) ** 2),
                lambda r: -2.0 * K ** 2 * np.asarray(r, float)
                / (1.0 + (K * np.asarray(r, float)) ** 2) ** 2,
                lambda s: np.tan(K * np.asarray(s, float)) / K)
    if fam == Family.RATIONAL_DECAY_CYLINDER:
        a, p = spec.a, spec.p
        return (lambda r: np.asarray(r, float) * np.power(1.0 + a * np.power(r, p), -1.0 / p),
                lambda r: np.power(1.0 + a * np.power(np.asarray(r, float), p), -1.0 - 1.0 / p),
                lambda r: -(p + 1.0) * a * np.power(np.asarray(r, float), p - 1.0)
                * np.power(1.0 + a * np.power(np.asarray(r, float), p), -2.0 - 1.0 / p),
                lambda s: np.asarray(s, float)
                * np.power(1.0 - a * np.power(s, p), -1.0 / p))
    if fam == Family.LOG_FACTOR:
        a = spec.a

        def _h(r):
            r = np.asarray(r, float)
            return r * np.log(a * r * r + math.e)

        def _hp(r):
            r = np.asarray(r, float)
            u = a * r * r + math.e
            return np.log(u) + 2.0 * a * r * r / u

        def _hpp(r):
            r = np.asarray(r, float)
            u = a * r * r + math.e
            return 2.0 * a * r / u + 4.0 * a * math.e * r / (u * u)

        return _h, _hp, _hpp, None
    raise WrongFamily(f"{fam.value} has no closed form")


def _family_r_cap(spec: ManifoldSpec) -> float:
    """Upper end of the radial domain where h' > 0 holds (inf if none)."""
    fam = spec.family
    if fam == Family.SPACE_FORM and spec.c > 0:
        return math.pi / (2.0 * math.sqrt(spec.c))
    if fam == Family.POWER_PERTURBED and spec.B < 0:
        return ((spec.p + 1.0) * (-spec.B)) ** (-1.0 / spec.p)
    return math.inf


def _default_r_max(spec: ManifoldSpec) -> float:
    fam = spec.family
    if fam == Family.SPACE_FORM:
        if spec.c > 0:
            return _family_r_cap(spec) * (1.0 - 1e-6)
        if spec.c < 0:
            return 10.0 / math.sqrt(-spec.c)
        return 50.0
    if fam == Family.POWER_PERTURBED:
        if spec.B < 0:
            return _family_r_cap(spec) * (1.0 - 1e-6)
        return 50.0 * min(1.0, abs(spec.B) ** (-1.0 / spec.p))
    if fam == Family.ARCTAN_CYLINDER:
        return 50.0 / spec.K
    if fam == Family.RATIONAL_DECAY_CYLINDER:
        return 50.0 * spec.a ** (-1.0 / spec.p)
    if fam == Family.LOG_FACTOR:
        return 50.0 / math.sqrt(spec.a)
    raise WrongFamily(fam.value)


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WarpProfile:
    """Tabulated warping function over a validated radial domain.

    Immutable once built; every evaluation method is pure, so a profile
    may be shared freely across threads.
    """

    spec: ManifoldSpec
    r_grid: np.ndarray
    h: np.ndarray
    h_prime: np.ndarray
    h_second: np.ndarray
    s_domain: tuple[float, float]
    r_max: float
    _h_eval: Callable = field(repr=False)
    _hp_eval: Callable = field(repr=False)
    _hpp_eval: Callable = field(repr=False)
    _r_of_s: Callable = field(repr=False)

    @property
    def s_min(self) -> float:
        return float(self.h[0])

    @property
    def s_max(self) -> float:
        return float(self.h[-1])

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        slop = 1e-12 * max(1.0, self.r_max)
        if np.any(r < -slop) or np.any(r > self.r_max + slop):
            raise OutOfDomain(
                f"r outside [0, {self.r_max:.6g}] for {self.spec.family.value}")
        return np.clip(r, 0.0, self.r_max)

    def h_at(self, r):
        return self._h_eval(self._check_r(r))

    def h_prime_at(self, r):
        return self._hp_eval(self._check_r(r))

    def h_second_at(self, r):
        return self._hpp_eval(self._check_r(r))

    def radial_coordinate(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.s_min, self.s_max
        slop = 1e-9 * max(abs(lo), abs(hi), 1.0)
        if np.any(s < lo - slop) or np.any(s > hi + slop):
            raise OutOfDomain(f"area radius outside [{lo:.6g}, {hi:.6g}]")
        return self._r_of_s(np.clip(s, lo, hi))


def h_at(profile: WarpProfile, r):
    return profile.h_at(r)


def h_prime_at(profile: WarpProfile, r):
    return profile.h_prime_at(r)


def h_second_at(profile: WarpProfile, r):
    return profile.h_second_at(r)


def radial_coordinate(profile: WarpProfile, s):
    return profile.radial_coordinate(s)


def _cumulative_panels(f, grid):
    """Cumulative integral of f over a grid, one 8-point Gauss panel per
    interval.  Exact to machine precision for the smooth integrands used
    here."""
    a, b = grid[:-1], grid[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = f(xs.ravel()).reshape(xs.shape)
    seg = (vals * _GL_W[None, :]).sum(axis=1) * half
    return np.concatenate([[0.0], np.cumsum(seg)])


def _check_fritsch_carlson(r, y, d):
    """Count intervals whose Hermite data leaves the [0,3]x[0,3]
    monotonicity box (none expected at default resolution)."""
    dr = np.diff(r)
    sec = np.diff(y) / dr
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = d[:-1] / sec
        beta = d[1:] / sec
    bad = (sec <= 0) | (alpha < 0) | (beta < 0) | (alpha > 3) | (beta > 3)
    return int(np.count_nonzero(bad))


def _build_ode_profile(spec: ManifoldSpec, r_max, resolution) -> WarpProfile:
    s0, s1 = domain_endpoints(spec)
    n = spec.n

    def w_of_s(s):
        return _metric_coefficient(spec, s, s0, s1)

    def g_of_tau(tau):
        # dr/dtau after s = s0 + tau^2; bounded and smooth at tau = 0
        tau = np.asarray(tau, float)
        s = s0 + tau * tau
        w = np.maximum(w_of_s(s), 0.0)
        out = np.empty_like(tau)
        tiny = tau == 0.0
        out[~tiny] = 2.0 * tau[~tiny] / np.sqrt(w[~tiny])
        if np.any(tiny):
            out[tiny] = 2.0 / math.sqrt(_w_slope_at_root(spec, s0))
        return out

    def r_of_smax(s_hi):
        tau_hi = math.sqrt(s_hi - s0)
        grid = np.linspace(0.0, tau_hi, 257)
        return _cumulative_panels(g_of_tau, grid)[-1]

    two_piece = (spec.family == Family.DE_SITTER_SCHWARZSCHILD and spec.c > 0)
    if two_piece:
        s_mid = 0.5 * (s0 + s1)
        margin = 1e-3 * (s1 - s0)

        def g_of_sigma(sigma):
            # s = s1 - sigma^2 on the upper half; r decreases with sigma
            sigma = np.asarray(sigma, float)
            s = s1 - sigma * sigma
            w = np.maximum(w_of_s(s), 0.0)
            out = np.empty_like(sigma)
            tiny = sigma == 0.0
            out[~tiny] = 2.0 * sigma[~tiny] / np.sqrt(w[~tiny])
            if np.any(tiny):
                out[tiny] = 2.0 / math.sqrt(-_w_slope_at_root(spec, s1))
            return out

        r_mid = r_of_smax(s_mid)

        def r_upper(s_hi):
            # radial distance from s_mid up to s_hi (< s1)
            sig_lo = math.sqrt(s1 - s_hi)
            sig_hi = math.sqrt(s1 - s_mid)
            grid = np.linspace(sig_lo, sig_hi, 257)
            return _cumulative_panels(g_of_sigma, grid)[-1]

        r_total = r_mid + r_upper(s1 - margin)
        if r_max is None:
            s_hi = s1 - margin
            r_max = r_total
        else:
            if r_max > r_total:
                raise DomainExceeded(
                    f"r_max={r_max:.6g} beyond radial extent {r_total:.6g} at "
                    f"the 1e-3 margin below the outer root")
            if r_max <= r_mid:
                s_hi = brentq(lambda s: r_of_smax(s) - r_max, s0 + 1e-300, s_mid,
                              rtol=8.9e-16)
                two_piece = False
            else:
                s_hi = brentq(lambda s: r_mid + r_upper(s) - r_max,
                              s_mid, s1 - 1e-300 * s1, rtol=8.9e-16)
    else:
        if r_max is None:
            s_hi = 50.0 * s0
            r_max = r_of_smax(s_hi)
        else:
            s_probe = 2.0 * s0
            for _ in range(400):
                if r_of_smax(s_probe) >= r_max:
                    break
                s_probe *= 2.0
            else:
                raise DomainExceeded("r_max unreachable")
            s_hi = brentq(lambda s: r_of_smax(s) - r_max, s0 + 1e-300, s_probe,
                          rtol=8.9e-16)

    if two_piece:
        n_left = max(resolution // 2, 16)
        n_right = max(resolution - n_left, 16)
        tau = np.linspace(0.0, math.sqrt(s_mid - s0), n_left)
        r_left = _cumulative_panels(g_of_tau, tau)
        sig = np.linspace(math.sqrt(s1 - s_hi), math.sqrt(s1 - s_mid), n_right)
        r_right_rel = _cumulative_panels(g_of_sigma, sig)
        # sig descends toward s1, r ascends: reverse
        r_right = r_left[-1] + (r_right_rel[-1] - r_right_rel[::-1])
        s_right = s1 - sig[::-1] ** 2
        r_nodes = np.concatenate([r_left, r_right[1:]])
        s_nodes = np.concatenate([s0 + tau ** 2, s_right[1:]])
        tau_spline = CubicHermiteSpline(tau, r_left, g_of_tau(tau))
        sigma_asc = sig.copy()
        r_of_sigma = CubicHermiteSpline(
            sigma_asc, r_left[-1] + r_right_rel[-1] - r_right_rel,
            -g_of_sigma(sigma_asc))

        def r_of_s(s):
            s = np.asarray(s, float)
            out = np.empty_like(s)
            left = s <= s_mid
            if np.any(left):
                out[left] = tau_spline(np.sqrt(np.maximum(s[left] - s0, 0.0)))
            if np.any(~left):
                out[~left] = r_of_sigma(np.sqrt(np.maximum(s1 - s[~left], 0.0)))
            return out
    else:
        tau = np.linspace(0.0, math.sqrt(s_hi - s0), max(resolution, 16))
        r_nodes = _cumulative_panels(g_of_tau, tau)
        s_nodes = s0 + tau ** 2
        tau_spline = CubicHermiteSpline(tau, r_nodes, g_of_tau(tau))

        def r_of_s(s):
            s = np.asarray(s, float)
            return tau_spline(np.sqrt(np.maximum(s - s0, 0.0)))

    hp_nodes = np.sqrt(np.maximum(w_of_s(s_nodes), 0.0))
    hp_nodes[0] = 0.0
    hpp_nodes = _ode_h_second(spec, s_nodes)

    if _check_fritsch_carlson(r_nodes, s_nodes, hp_nodes):
        raise RuntimeError("warp table left the Hermite monotonicity box; "
                           "raise the resolution")
    h_spline = CubicHermiteSpline(r_nodes, s_nodes, hp_nodes)

    def h_eval(r):
        return h_spline(r)

    def hp_eval(r):
        return np.sqrt(np.maximum(w_of_s(h_spline(r)), 0.0))

    def hpp_eval(r):
        return _ode_h_second(spec, h_spline(r))

    return WarpProfile(
        spec=spec,
        r_grid=r_nodes,
        h=s_nodes,
        h_prime=hp_nodes,
        h_second=hpp_nodes,
        s_domain=(s0, s1),
        r_max=float(r_nodes[-1]),
        _h_eval=h_eval,
        _hp_eval=hp_eval,
        _hpp_eval=hpp_eval,
        _r_of_s=r_of_s,
    )


def _ode_h_second(spec: ManifoldSpec, s):
    """Exact second derivative from the implicit differentiation of the
    defining relation (no finite differences)."""
    s = np.asarray(s, float)
    n = spec.n
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        return 0.5 * spec.m * (n - 2) * np.power(s, 1.0 - n) - spec.c * s
    return 0.5 * (n - 2) * (spec.m * np.power(s, 1.0 - n)
                            - 2.0 * spec.q ** 2 * np.power(s, 3.0 - 2.0 * n))


def _build_closed_profile(spec: ManifoldSpec, r_max, resolution) -> WarpProfile:
    h_f, hp_f, hpp_f, r_of_s = _closed_form_funcs(spec)
    r_cap = _family_r_cap(spec)
    if r_max is None:
        r_max = _default_r_max(spec)
    if r_max > r_cap * (1.0 - 1e-7) and math.isfinite(r_cap):
        raise DomainExceeded(
            f"r_max={r_max:.6g} reaches the h'>0 cap {r_cap:.6g} of "
            f"{spec.family.value}")
    grid = np.linspace(0.0, r_max, max(resolution, 16))
    h_nodes = h_f(grid)

    if r_of_s is None:
        def r_of_s(s):
            s_arr = np.atleast_1d(np.asarray(s, float))
            out = np.array([
                brentq(lambda rr: float(h_f(rr)) - sv, 0.0, r_max, rtol=8.9e-16)
                if sv > 0 else 0.0
                for sv in s_arr])
            return out.reshape(np.shape(s))

    s_hi = float(h_nodes[-1])
    if spec.family == Family.SPACE_FORM and spec.c > 0:
        s_sup = 1.0 / math.sqrt(spec.c)
    elif spec.family == Family.ARCTAN_CYLINDER:
        s_sup = math.pi / (2.0 * spec.K)
    elif spec.family == Family.RATIONAL_DECAY_CYLINDER:
        s_sup = spec.a ** (-1.0 / spec.p)
    else:
        s_sup = math.inf
    del s_sup  # the tabulated range is the operative domain

    return WarpProfile(
        spec=spec,
        r_grid=grid,
        h=h_nodes,
        h_prime=hp_f(grid),
        h_second=hpp_f(grid),
        s_domain=(0.0, s_hi),
        r_max=float(r_max),
        _h_eval=h_f,
        _hp_eval=hp_f,
        _hpp_eval=hpp_f,
        _r_of_s=r_of_s,
    )


def build_profile(spec: ManifoldSpec, r_max: float | None = None,
                  resolution: int = 4096) -> WarpProfile:
    """Construct the warp table for `spec` out to `r_max`.

    For the implicit families the default extent reaches area radius
    50*s0 (c <= 0) or a 1e-3 relative margin below the outer root
    (c > 0); closed-form families use per-family defaults.
    """
    validate_spec(spec)
    if r_max is not None and r_max <= 0:
        raise DomainExceeded("r_max must be positive")
    if spec.family in _ODE_FAMILIES:
        return _build_ode_profile(spec, r_max, resolution)
    return _build_closed_profile(spec, r_max, resolution)


def defining_ode_residual(profile: WarpProfile) -> np.ndarray:
    """|h'^2 - W(h)| at the tabulated nodes (implicit families only)."""
    spec = profile.spec
    if spec.family not in _ODE_FAMILIES:
        raise WrongFamily("residual defined for the implicit families")
    s0, s1 = profile.s_domain
    w = _metric_coefficient(spec, profile.h, s0, s1)
    return np.abs(profile.h_prime ** 2 - w)


def origin_smoothness(spec: ManifoldSpec) -> bool | None:
    """Whether the metric closes smoothly at r = 0 (h odd in r).

    None for the black-hole families, which have no pole.  Decided per
    family from the parity of h; this is an informational flag, not a
    numerical test.
    """
    fam = spec.family
    if fam in _ODE_FAMILIES:
        return None
    if fam in (Family.SPACE_FORM, Family.ARCTAN_CYLINDER, Family.LOG_FACTOR):
        return True
    # r + B r^(p+1) and r(1 + a r^p)^(-1/p) are odd exactly for even p
    p = spec.p
    return p is not None and float(p).is_integer() and int(p) % 2 == 0


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_FAMILY_PARAMS = {
    Family.SPACE_FORM: ("c",),
    Family.DE_SITTER_SCHWARZSCHILD: ("m", "c"),
    Family.REISSNER_NORDSTROM: ("m", "q"),
    Family.POWER_PERTURBED: ("B", "p"),
    Family.ARCTAN_CYLINDER: ("K",),
    Family.RATIONAL_DECAY_CYLINDER: ("a", "p"),
    Family.LOG_FACTOR: ("a",),
}


def spec_to_dict(spec: ManifoldSpec) -> dict:
    out = {"family": spec.family.value, "n": spec.n}
    for name in _FAMILY_PARAMS[spec.family]:
        out[name] = getattr(spec, name)
    return out


def spec_from_dict(data: dict) -> ManifoldSpec:
    try:
        fam = Family(data["family"])
        n = int(data["n"])
    except (KeyError, ValueError) as exc:
        raise InvalidParameter(f"bad manifold spec: {exc}") from exc
    kwargs = {}
    for name in _FAMILY_PARAMS[fam]:
        if name not in data:
            raise InvalidParameter(f"{fam.value} spec missing parameter {name!r}")
        kwargs[name] = float(data[name])
    extra = set(data) - {"family", "n"} - set(_FAMILY_PARAMS[fam])
    if extra:
        raise InvalidParameter(f"unknown parameters for {fam.value}: {sorted(extra)}")
    return validate_spec(ManifoldSpec(fam, n, **kwargs))
