"""Command-line entry point.

Commands (selected with --command):

    info          manifold summary JSON plus curvature samples CSV
    regions       thresholds and monotonicity intervals JSON
    verify        inequality reports for one mesh, JSON array
    monotonicity  V1/V2 traces and lower bounds, CSV + JSON
    asymptotics   warp expansion residual-order report JSON
    sweep         slack (or constant) versus a swept parameter, CSV

Config may come from a JSON file (--config) with flags overriding.
Outputs land in one directory per run together with a manifest that
records the resolved config and its hash; identical config and seed
produce byte-identical files.  Exit codes: 0 success, 1 at least one
Violated verdict, 2 usage or precondition error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, curvature, monotonic, regions, submanifolds, verifiers
from .errors import WarpisoError
from .warping import (
    Family,
    ManifoldSpec,
    WarpProfile,
    build_profile,
    constraint_checks,
    domain_endpoints,
    origin_smoothness,
    spec_from_dict,
    spec_to_dict,
)

_COMMANDS = ("info", "regions", "verify", "monotonicity", "asymptotics", "sweep")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="warpiso",
        description="numerical checks for warped-product isoperimetric "
                    "inequalities and volume monotonicity")
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--spec", help="manifold spec: inline JSON or a file path")
    p.add_argument("--command", choices=_COMMANDS)
    p.add_argument("--mesh", help="mesh parameters as inline JSON or a file path")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", action="append", default=None,
                   metavar="NAME=VALUE", help="tolerance override, repeatable")
    p.add_argument("--checks", help="comma-separated check list for verify")
    p.add_argument("--sweep-param", help="parameter swept by the sweep command")
    p.add_argument("--sweep-range", help="lo,hi,count for the sweep")
    p.add_argument("--r-max", type=float, help="profile radial extent")
    p.add_argument("--forced-minimal", action="store_true",
                   help="zero the mesh mean-curvature data (debug)")
    return p


def _load_json_arg(text: str):
    s = text.strip()
    if s.startswith("{") or s.startswith("["):
        return json.loads(s)
    return json.loads(Path(text).read_text(encoding="utf-8"))


def _merge_config(args) -> dict:
    cfg: dict = {
        "resolution": 4096,
        "seed": 0,
        "output_dir": "warpiso-out",
        "tolerances": {},
    }
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if args.spec:
        cfg["spec"] = _load_json_arg(args.spec)
    if args.command:
        cfg["command"] = args.command
    if args.mesh:
        cfg["mesh"] = _load_json_arg(args.mesh)
    if args.resolution is not None:
        cfg["resolution"] = args.resolution
    if args.out:
        cfg["output_dir"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.checks:
        cfg["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if args.sweep_param:
        cfg["sweep_param"] = args.sweep_param
    if args.sweep_range:
        lo, hi, count = args.sweep_range.split(",")
        cfg["sweep_range"] = [float(lo), float(hi), int(count)]
    if args.r_max is not None:
        cfg["r_max"] = args.r_max
    if args.forced_minimal:
        cfg["forced_minimal"] = True
    for item in args.tol or ():
        name, _, value = item.partition("=")
        if not value:
            raise WarpisoError(f"bad --tol entry {item!r}, expected NAME=VALUE")
        cfg["tolerances"][name] = float(value)
    if "command" not in cfg:
        raise WarpisoError("no command given (use --command)")
    if "spec" not in cfg:
        raise WarpisoError("no manifold spec given (use --spec)")
    if cfg["resolution"] < 64:
        raise WarpisoError("resolution must be at least 64")
    return cfg


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()


def _write(outdir: Path, name: str, data: bytes) -> None:
    (outdir / name).write_bytes(data)


def _manifest(cfg: dict) -> dict:
    canon = json.dumps(cfg, sort_keys=True).encode()
    return {
        "tool": "warpiso",
        "version": __version__,
        "config": cfg,
        "config_sha256": hashlib.sha256(canon).hexdigest(),
    }


def _profile_for(cfg: dict, spec: ManifoldSpec) -> WarpProfile:
    return build_profile(spec, r_max=cfg.get("r_max"),
                         resolution=cfg["resolution"])


def _build_mesh(cfg: dict, spec: ManifoldSpec, profile: WarpProfile):
    mesh_cfg = cfg.get("mesh")
    if not mesh_cfg:
        raise WarpisoError("this command needs --mesh")
    variant = mesh_cfg.get("variant")
    res = int(mesh_cfg.get("resolution", cfg["resolution"]))
    if variant == "slice":
        mesh = submanifolds.mesh_slice(spec, profile, float(mesh_cfg["s"]), res)
    elif variant == "cone":
        mesh = submanifolds.mesh_cone(
            spec, profile, int(mesh_cfg["k"]), float(mesh_cfg["cap_angle"]),
            float(mesh_cfg["r_lo"]), float(mesh_cfg["r_hi"]), res)
    elif variant == "right_cone3d":
        mesh = submanifolds.mesh_right_cone3d(
            profile, float(mesh_cfg["alpha"]), float(mesh_cfg["R"]), res)
    elif variant == "geodesic_sphere":
        mesh = submanifolds.mesh_geodesic_sphere(
            spec, float(mesh_cfg["radius"]), res)
    elif variant == "radial_graph":
        phi = mesh_cfg.get("phi", {})
        kind = phi.get("kind", "constant")
        if kind == "constant":
            value = float(phi["value"])

            def fn(*angles):
                return np.full_like(angles[0], value)
        elif kind == "cosine":
            base, amp = float(phi["base"]), float(phi["amplitude"])

            def fn(*angles):
                return base + amp * np.cos(angles[0])
        else:
            raise WarpisoError(f"unknown phi kind {kind!r}")
        mesh = submanifolds.mesh_radial_graph(spec, profile, fn, res)
    else:
        raise WarpisoError(f"unknown mesh variant {variant!r}")
    if cfg.get("forced_minimal"):
        mesh = submanifolds.as_minimal(mesh)
    return mesh


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_info(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    if spec.family in (Family.DE_SITTER_SCHWARZSCHILD, Family.REISSNER_NORDSTROM):
        s0, s1 = domain_endpoints(spec)
    else:
        s0, s1 = profile.s_domain
    payload = {
        "spec": spec_to_dict(spec),
        "constraints": constraint_checks(spec),
        "s0": s0,
        "s1": "inf" if math.isinf(s1) else s1,
        "r_max": profile.r_max,
        "s_range_tabulated": [profile.s_min, profile.s_max],
        "smooth_at_origin": origin_smoothness(spec),
    }
    if spec.family == Family.DE_SITTER_SCHWARZSCHILD:
        thr, ric = regions.ss_thresholds(spec)
        payload["ss_threshold"] = thr
        payload["ricci_sign_threshold"] = ric
    if spec.family == Family.REISSNER_NORDSTROM:
        t = regions.rn_thresholds(spec)
        payload["s2"] = t.s2
        payload["s3"] = t.s3
    _write(outdir, "manifold.json", _json_bytes(payload))

    lo = profile.r_max * (1e-6 if profile.s_min == 0 else 1e-3)
    rr = np.linspace(lo, profile.r_max, 64)
    lines = [curvature.CSV_HEADER]
    lines += [curvature.sample(profile, float(r)).csv_row() for r in rr]
    _write(outdir, "curvature.csv", ("\n".join(lines) + "\n").encode())
    return 0


def _cmd_regions(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    rep = regions.region_report(profile)
    _write(outdir, "regions.json", _json_bytes(rep.to_dict()))
    return 0


_CHECK_DEFAULTS = {
    Family.DE_SITTER_SCHWARZSCHILD: ["fundamental", "ss:i", "ss:ii", "ss:iii",
                                     "ss:iv", "hsiung_minkowski"],
    Family.REISSNER_NORDSTROM: ["fundamental", "rn:i", "rn:ii",
                                "hsiung_minkowski"],
    Family.SPACE_FORM: ["fundamental", "spaceform:Hn", "spaceform:Sn",
                        "hsiung_minkowski", "theo2:i"],
}


def _run_check(token, mesh, profile, cfg):
    tols = cfg.get("tolerances", {})
    kw = {}
    if "eq_tol" in tols:
        kw["eq_tol"] = tols["eq_tol"]
    if "check_tol" in tols:
        kw["check_tol"] = tols["check_tol"]
    k = int(cfg.get("k", mesh.k))
    name, _, case = token.partition(":")
    if name == "fundamental":
        return verifiers.check_fundamental(mesh, profile, k, **kw)
    if name == "hsiung_minkowski":
        tol = tols.get("hm_tol", verifiers.EQ_TOL)
        return verifiers.check_hsiung_minkowski(mesh, profile, tol=tol)
    if name == "ss":
        return verifiers.check_thm_ss(mesh, profile, k, case, **kw)
    if name == "rn":
        return verifiers.check_thm_rn(mesh, profile, k, case, **kw)
    if name == "spaceform":
        return verifiers.check_cor_spaceform(mesh, profile, k, case, **kw)
    if name == "theo2":
        return verifiers.check_theo2(mesh, profile, case, **kw)
    raise WarpisoError(f"unknown check {token!r}")


def _cmd_verify(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    mesh = _build_mesh(cfg, spec, profile)
    tokens = cfg.get("checks")
    if not tokens:
        tokens = [t for t in _CHECK_DEFAULTS.get(spec.family, ["fundamental"])]
    reports = []
    for token in tokens:
        try:
            rep = _run_check(token, mesh, profile, cfg)
        except WarpisoError as exc:
            reports.append({"name": token, "error": str(exc)})
            continue
        reports.append(rep.to_dict())
    _write(outdir, "reports.json", _json_bytes(reports))
    violated = any(r.get("verdict") == "Violated" for r in reports)
    return 1 if violated else 0


def _cmd_monotonicity(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    mesh = _build_mesh(cfg, spec, profile)
    alpha = cfg.get("alpha")
    if alpha is None:
        alpha = monotonic.alpha_for_mesh(mesh)
    lo = cfg.get("trace_lo", mesh.r_lo + 0.05 * (mesh.r_hi - mesh.r_lo))
    hi = cfg.get("trace_hi", mesh.r_hi)
    count = int(cfg.get("trace_points", 64))
    rr = np.linspace(float(lo), float(hi), count)
    t1 = monotonic.trace_V1(mesh, profile, alpha, rr)
    t2 = monotonic.trace_V2(mesh, profile, alpha, rr)
    lines = ["r,h,V1,V2"]
    for i, r in enumerate(rr):
        lines.append(f"{float(r)!r},{float(profile.h_at(r))!r},"
                     f"{float(t1.V_values[i])!r},{float(t2.V_values[i])!r}")
    _write(outdir, "trace.csv", ("\n".join(lines) + "\n").encode())
    bounds = monotonic.lower_bounds(mesh, profile, alpha, float(rr[0]),
                                    float(rr[-1]))
    payload = {
        "alpha": alpha,
        "V1_violations": t1.violations,
        "V2_violations": t2.violations,
        "lower_bounds": bounds,
    }
    _write(outdir, "monotonicity.json", _json_bytes(payload))
    return 1 if (t1.violations or t2.violations) else 0


def _cmd_asymptotics(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    rep = monotonic.asymptotic_check(profile)
    _write(outdir, "asymptotics.json", _json_bytes(rep.to_dict()))
    return 0


def _cmd_sweep(cfg, outdir: Path) -> int:
    spec = spec_from_dict(cfg["spec"])
    profile = _profile_for(cfg, spec)
    param = cfg.get("sweep_param")
    rng = cfg.get("sweep_range")
    if not param or not rng:
        raise WarpisoError("sweep needs sweep_param and sweep_range")
    lo, hi, count = float(rng[0]), float(rng[1]), int(rng[2])
    if not (lo < hi and count >= 2):
        raise WarpisoError("sweep range must satisfy lo < hi and count >= 2")
    values = np.linspace(lo, hi, count)
    k = int(cfg.get("k", spec.n - 1))
    rows = []
    if param == "slice_s":
        check = cfg.get("checks", ["fundamental"])[0]
        header = f"s,lhs,rhs,slack,verdict  # check={check}"
        for s in values:
            mesh = submanifolds.mesh_slice(spec, profile, float(s),
                                           int(cfg.get("mesh_resolution", 512)))
            rep = _run_check(check, mesh, profile, cfg)
            rows.append(f"{float(s)!r},{rep.lhs!r},{rep.rhs!r},"
                        f"{rep.slack!r},{rep.verdict}")
    elif param == "c1_d":
        header = "d,C1  # first linear-bound constant"
        for d in values:
            rows.append(f"{float(d)!r},{regions.c1_constant(spec, float(d), k)!r}")
    elif param == "c2_d":
        header = "d,C2,C2_minus_k  # decay constant"
        for d in values:
            c2 = regions.c2_constant(spec, float(d))
            rows.append(f"{float(d)!r},{c2!r},{c2 - k!r}")
    else:
        raise WarpisoError(f"unknown sweep parameter {param!r}")
    _write(outdir, "sweep.csv", ("\n".join([header, *rows]) + "\n").encode())
    return 0


_DISPATCH = {
    "info": _cmd_info,
    "regions": _cmd_regions,
    "verify": _cmd_verify,
    "monotonicity": _cmd_monotonicity,
    "asymptotics": _cmd_asymptotics,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        outdir = Path(cfg["output_dir"])
        outdir.mkdir(parents=True, exist_ok=True)
        np.random.seed(cfg["seed"])
        code = _DISPATCH[cfg["command"]](cfg, outdir)
        _write(outdir, "manifest.json", _json_bytes(_manifest(cfg)))
        return code
    except WarpisoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
