"""Volume monotonicity traces, lower bounds, growth fits and warp
asymptotics.

The normalized truncated-volume functionals

    V1(r) = e^(alpha r) h(r)^(-k) * integral of h  over Sigma within B_r
    V2(r) = e^(alpha r) h(r)^(-k) * integral of h' over Sigma within B_r

are nondecreasing whenever h/h' is nondecreasing on the range and the
scaled mean curvature satisfies k |H| <= alpha.  Each trace point comes
from truncating the mesh and re-summing, so the per-step tolerance
absorbs the O(cell^2) clipping jitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import PreconditionUnmet, WindowTooSmall, WrongFamily
from .regions import quotient_derivative_numerator
from .submanifolds import SubmanifoldMesh, moments, truncate, unit_ball_volume
from .warping import Family, ManifoldSpec, WarpProfile

__all__ = [
    "MonotoneTrace",
    "GrowthFit",
    "AsymptoticReport",
    "alpha_for_mesh",
    "trace_V1",
    "trace_V2",
    "volume_trace",
    "lower_bounds",
    "growth_classify",
    "asymptotic_check",
]

STEP_TOL = 1e-4      # relative per-step decrease tolerated before flagging


@dataclass(frozen=True)
class MonotoneTrace:
    r_values: np.ndarray
    V_values: np.ndarray
    alpha: float
    kind: str
    violations: list

    @property
    def monotone(self) -> bool:
        return not self.violations

    def csv_rows(self, profile: WarpProfile):
        yield "r,h,V"
        for r, v in zip(self.r_values, self.V_values):
            yield f"{float(r)!r},{float(profile.h_at(r))!r},{float(v)!r}"


@dataclass(frozen=True)
class GrowthFit:
    model: str                    # "exponential" | "polynomial"
    rate: float                   # fitted exponential rate or poly order
    fit_window: tuple[float, float]
    residual: float               # rms of the log-space fit residual
    reference_order: float
    matches_reference: bool


def alpha_for_mesh(mesh: SubmanifoldMesh, k: int | None = None) -> float:
    """Tightest admissible mean-curvature bound k * max|H| on the mesh."""
    if k is None:
        k = mesh.k
    return float(k * np.max(mesh.H_norm)) if mesh.H_norm.size else 0.0


def _check_quotient_nondecreasing(profile: WarpProfile, r_lo, r_hi,
                                  samples=512) -> bool:
    lo = max(r_lo, r_hi * 1e-9)
    grid = np.linspace(lo, r_hi, samples)
    num = np.asarray(quotient_derivative_numerator(profile, grid), float)
    return bool(np.all(num >= -1e-12 * max(1.0, float(np.max(np.abs(num))))))


def _trace(mesh, profile, alpha, r_grid, integrand, kind):
    k = mesh.k
    if alpha < alpha_for_mesh(mesh, k) - 1e-12:
        raise PreconditionUnmet(
            f"alpha={alpha} below the mesh mean-curvature bound "
            f"{alpha_for_mesh(mesh, k)}")
    if not _check_quotient_nondecreasing(profile, mesh.r_lo, float(np.max(r_grid))):
        raise PreconditionUnmet("h/h' is not nondecreasing on the range")
    r_grid = np.asarray(r_grid, float)
    vals = np.empty(r_grid.size)
    for i, r in enumerate(r_grid):
        if r < mesh.r_lo or (mesh.cell_r_lo is not None
                             and r <= float(np.min(mesh.cell_r_lo))):
            vals[i] = 0.0
            continue
        cut = truncate(mesh, profile, min(r, mesh.r_hi))
        w = cut.weights
        if integrand == "h":
            f = np.asarray(profile.h_at(cut.node_r), float)
        else:
            f = np.asarray(profile.h_prime_at(cut.node_r), float)
        h_r = float(profile.h_at(r))
        vals[i] = math.exp(alpha * r) / h_r ** k * float(np.sum(w * f))
    violations = [int(i) for i in range(1, r_grid.size)
                  if vals[i] < vals[i - 1] * (1.0 - STEP_TOL) - 1e-300]
    return MonotoneTrace(r_values=r_grid, V_values=vals, alpha=float(alpha),
                         kind=kind, violations=violations)


def trace_V1(mesh: SubmanifoldMesh, profile: WarpProfile, alpha: float,
             r_grid) -> MonotoneTrace:
    """Normalized trace of the h-weighted truncated volume."""
    return _trace(mesh, profile, alpha, r_grid, "h", "V1")


def trace_V2(mesh: SubmanifoldMesh, profile: WarpProfile, alpha: float,
             r_grid) -> MonotoneTrace:
    """Normalized trace of the h'-weighted truncated volume."""
    return _trace(mesh, profile, alpha, r_grid, "hprime", "V2")


def volume_trace(mesh: SubmanifoldMesh, profile: WarpProfile, r_grid):
    """Plain truncated volumes |Sigma within B_r| along r_grid."""
    out = np.empty(len(r_grid))
    for i, r in enumerate(r_grid):
        cut = truncate(mesh, profile, min(float(r), mesh.r_hi))
        out[i] = float(np.sum(cut.weights))
    return out


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------

def lower_bounds(mesh: SubmanifoldMesh, profile: WarpProfile, alpha: float,
                 r0: float, r: float) -> dict:
    """All applicable truncated-volume lower bounds at radius r, anchored
    at r0 < r, against the measured volume.

    h_weighted:      C1(r0) e^(-alpha r) h(r)^(k-1)
    hprime_capped:   C2(r0)/B e^(-alpha r) h(r)^k with B = max h' on [r0, r]
    hprime_convex:   C2(r0)/h'(r) e^(-alpha r) h(r)^k, needs h'' > 0 on the band
    """
    if not mesh.r_lo <= r0 < r:
        raise PreconditionUnmet(f"need mesh start <= r0 < r, got r0={r0}, r={r}")
    if alpha < alpha_for_mesh(mesh) - 1e-12:
        raise PreconditionUnmet("alpha below the mesh mean-curvature bound")
    if not _check_quotient_nondecreasing(profile, mesh.r_lo, r):
        raise PreconditionUnmet("h/h' is not nondecreasing on the range")
    k = mesh.k
    cut0 = truncate(mesh, profile, r0)
    h0 = np.asarray(profile.h_at(cut0.node_r), float)
    hp0 = np.asarray(profile.h_prime_at(cut0.node_r), float)
    h_r0k = float(profile.h_at(r0)) ** k
    c1 = math.exp(alpha * r0) / h_r0k * float(np.sum(cut0.weights * h0))
    c2 = math.exp(alpha * r0) / h_r0k * float(np.sum(cut0.weights * hp0))

    cut = truncate(mesh, profile, min(r, mesh.r_hi))
    measured = float(np.sum(cut.weights))
    h_r = float(profile.h_at(r))
    decay = math.exp(-alpha * r)

    band = np.linspace(r0, r, 512)
    hp_band = np.asarray(profile.h_prime_at(band), float)
    hpp_band = np.asarray(profile.h_second_at(band), float)
    B = float(np.max(hp_band))

    out = {
        "measured": measured,
        "anchor_C1": c1,
        "anchor_C2": c2,
        "bounds": {
            "h_weighted": {
                "value": c1 * decay * h_r ** (k - 1),
                "applicable": True,
            },
            "hprime_capped": {
                "value": c2 / B * decay * h_r ** k,
                "applicable": True,
                "B": B,
            },
            "hprime_convex": {
                "value": c2 / float(profile.h_prime_at(r)) * decay * h_r ** k,
                "applicable": bool(np.all(hpp_band > 0)),
            },
        },
    }
    for rec in out["bounds"].values():
        rec["holds"] = bool((not rec["applicable"])
                            or measured >= rec["value"] * (1.0 - 1e-9))
    return out


# ---------------------------------------------------------------------------
# growth classification
# ---------------------------------------------------------------------------

def growth_classify(r_values, vol_values, profile: WarpProfile,
                    expected_model: str, reference_order: float,
                    rel_window: tuple[float, float] | None = None) -> GrowthFit:
    """Least-squares fit of the truncated-volume growth.

    Exponential: slope of log V against r over the last half of the
    trace.  Polynomial: slope of log V against log h(r) over the last
    decade of h.  The classification matches when the fitted rate lies
    within 10% of `reference_order`.
    """
    r_values = np.asarray(r_values, float)
    vol_values = np.asarray(vol_values, float)
    pos = vol_values > 0
    r_values, vol_values = r_values[pos], vol_values[pos]
    if r_values.size < 8:
        raise WindowTooSmall("need at least 8 positive trace points")
    if expected_model == "exponential":
        lo = r_values[0] + 0.5 * (r_values[-1] - r_values[0]) \
            if rel_window is None else rel_window[0]
        hi = r_values[-1] if rel_window is None else rel_window[1]
        mask = (r_values >= lo) & (r_values <= hi)
        x = r_values[mask]
    elif expected_model == "polynomial":
        h_vals = np.asarray(profile.h_at(r_values), float)
        hi = h_vals[-1] if rel_window is None else rel_window[1]
        lo = hi / 10.0 if rel_window is None else rel_window[0]
        mask = (h_vals >= lo) & (h_vals <= hi)
        x = np.log(h_vals[mask])
    else:
        raise ValueError(f"unknown model {expected_model!r}")
    if np.count_nonzero(mask) < 4:
        raise WindowTooSmall("fit window holds fewer than 4 points")
    y = np.log(vol_values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return GrowthFit(
        model=expected_model,
        rate=float(slope),
        fit_window=(float(np.min(x)), float(np.max(x))),
        residual=resid,
        reference_order=float(reference_order),
        matches_reference=bool(abs(slope - reference_order)
                               <= 0.1 * abs(reference_order)),
    )


# ---------------------------------------------------------------------------
# warp asymptotics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticReport:
    family: str
    fitted_order: float
    expected_order: float
    order_within: float
    coefficient: float | None = None
    coefficient_expected: float | None = None

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "fitted_order": self.fitted_order,
            "expected_order": self.expected_order,
            "order_within": self.order_within,
            "coefficient": self.coefficient,
            "coefficient_expected": self.coefficient_expected,
        }


def _rn_radial_offset(spec: ManifoldSpec, profile: WarpProfile) -> float:
    """Constant delta with s - r -> delta at infinity, fixing the radial
    normalization in which the large-s expansion of h holds."""
    s_star = profile.s_max
    r_star = profile.r_max
    n, m, q = spec.n, spec.m, spec.q

    def integrand(u):
        # t = 1/u maps the tail onto (0, 1/s_star); 1/sqrt(w) - 1 is
        # rationalized to (1-w)/(sqrt(w)(1+sqrt(w))), which stays exact
        # where w is within rounding of 1
        if u == 0.0:
            return 0.5 * m if n == 4 else 0.0
        t = 1.0 / u
        one_minus_w = m * t ** (2.0 - n) - q * q * t ** (4.0 - 2.0 * n)
        sq = math.sqrt(1.0 - one_minus_w)
        return one_minus_w / (sq * (1.0 + sq)) * t * t

    tail, _ = quad(integrand, 0.0, 1.0 / s_star, epsabs=1e-300, epsrel=1e-12,
                   limit=200)
    return (s_star - r_star) - tail


def asymptotic_check(profile: WarpProfile) -> AsymptoticReport:
    """Fit the decay order of the warp residual after subtracting the
    known leading terms.

    Reissner-Nordstrom (n >= 4): h = rho + m rho^(3-n)/(2(n-3)) up to
    O(rho^(5-2n)) in the normalization rho with h - rho -> 0.

    de Sitter-Schwarzschild (c < 0): h = sinh(a rho)/a
    + m sinh^(1-n)(a rho)/(2 n a) up to O(sinh^(-n-1)), a = sqrt(-c);
    also recovers the m/(2n) expansion coefficient.
    """
    spec = profile.spec
    if spec.family == Family.REISSNER_NORDSTROM:
        if spec.n < 4:
            raise WrongFamily("expansion requires n >= 4")
        if profile.s_max < 40.0 * profile.s_min:
            raise WindowTooSmall("profile must extend to ~50x the horizon radius")
        n, m = spec.n, spec.m
        delta = _rn_radial_offset(spec, profile)
        s = profile.h
        rho = profile.r_grid + delta
        mask = (s > 5.0 * profile.s_min) & (s < 0.5 * profile.s_max)
        rho_w, s_w = rho[mask], s[mask]
        resid = s_w - rho_w - m / (2.0 * (n - 3)) * rho_w ** (3.0 - n)
        good = np.abs(resid) > 1e-13 * s_w
        slope, _ = np.polyfit(np.log(rho_w[good]), np.log(np.abs(resid[good])), 1)
        expected = 5.0 - 2.0 * n
        return AsymptoticReport(
            family=spec.family.value,
            fitted_order=float(slope),
            expected_order=expected,
            order_within=float(abs(slope - expected)),
        )

    if spec.family == Family.DE_SITTER_SCHWARZSCHILD and spec.c < 0:
        n, m = spec.n, spec.m
        a = math.sqrt(-spec.c)
        if profile.s_max < 40.0 * profile.s_min:
            raise WindowTooSmall("profile must extend to ~50x the horizon radius")
        h_end = profile.s_max
        r_end = profile.r_max

        # Newton for the radial offset: sinh(a(r+delta))/a + m sinh^(1-n)/(2na)
        # matches h at the far end of the table
        delta = math.asinh(a * h_end) / a - r_end
        for _ in range(3):
            x = a * (r_end + delta)
            sh, ch = math.sinh(x), math.cosh(x)
            g = sh / a + m / (2.0 * n * a) * sh ** (1.0 - n) - h_end
            gp = ch + m * (1.0 - n) / (2.0 * n) * sh ** (-n) * ch
            delta -= g / gp
        x_all = a * (profile.r_grid + delta)
        sh_all = np.sinh(x_all)
        lead = sh_all / a
        sh_max = a * profile.s_max
        mask = (sh_all > max(4.0, sh_max ** 0.35)) & (sh_all < 0.5 * sh_max)
        if np.count_nonzero(mask) < 8:
            raise WindowTooSmall(
                "too few nodes in the asymptotic window; extend r_max so the "
                "warp value reaches well past sinh = 8/sqrt(-c)")
        resid1 = profile.h[mask] - lead[mask]
        # coefficient of the sinh^(1-n) correction from the far window edge
        idx = int(np.argmax(sh_all[mask]))
        coef = float(resid1[idx] * sh_all[mask][idx] ** (n - 1.0)) * a
        resid2 = resid1 - m / (2.0 * n * a) * sh_all[mask] ** (1.0 - n)
        good = np.abs(resid2) > 0
        slope, _ = np.polyfit(np.log(sh_all[mask][good]),
                              np.log(np.abs(resid2[good])), 1)
        expected = -(n + 1.0)
        return AsymptoticReport(
            family=spec.family.value,
            fitted_order=float(slope),
            expected_order=expected,
            order_within=float(abs(slope - expected)),
            coefficient=coef,
            coefficient_expected=m / (2.0 * n),
        )

    if spec.family == Family.SPACE_FORM and spec.c == 0.0:
        resid = profile.h - profile.r_grid
        return AsymptoticReport(
            family=spec.family.value,
            fitted_order=0.0 if np.allclose(resid, 0.0) else math.nan,
            expected_order=0.0,
            order_within=0.0 if np.allclose(resid, 0.0) else math.inf,
        )

    raise WrongFamily(
        "asymptotic expansions cover the charged family with n >= 4, the "
        "negative-c black-hole family, and the flat space form")
