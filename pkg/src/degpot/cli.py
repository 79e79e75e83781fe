"""Command-line interface.

Subcommands: kernel eval|check, potential eval, verify jump|trace,
solve cauchy|poisson|ibvp, study.  Every command takes --config FILE
(TOML, documented in docs/config.md) and emits machine-readable CSV/JSON.

Exit codes: 0 success, 2 config error, 3 numerical tolerance failure,
4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import backend, bie
from .config import RunConfig, load_config
from .errors import ConfigError, DegpotError
from .kernel import (
    check_delta_limit,
    check_fourier,
    check_normalization,
    eval_kernel,
)
from .densities import BumpDensity
from .potentials import (
    adjoint_double_layer_boundary,
    boundary_double_layer,
    boundary_single_layer,
    double_layer_boundary_limit,
    eval_poisson,
    eval_volume,
    make_field,
    single_layer_gradient_limit,
)
from .trace import trace_residual

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# helpers

def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"--x must be comma-separated floats, got {text!r}")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _interior_probes(cfg: RunConfig, n_ring=8, frac=0.5):
    geo = cfg.geometry
    nodes = geo.nodes(n_ring if geo.dimension == 2 else (4, n_ring))
    c = np.mean(geo.nodes(64 if geo.dimension == 2 else (8, 16)).points, axis=0)
    return np.concatenate([c[None, :], c[None, :] + frac * (nodes.points - c[None, :])])


def _field(cfg: RunConfig, kind: str):
    res = cfg.resolution
    key = {"V": "volume", "P": "initial", "S": "boundary", "D": "boundary"}[kind]
    if key not in cfg.densities:
        raise ConfigError(f"config needs a [density.{key}] table for a {kind} potential")
    return make_field(kind, cfg.coeff, cfg.geometry, cfg.densities[key],
                      m_space=res.m_space, m_time=res.m_time, q=res.q)


def _eval_field(u, x, t):
    return {"V": eval_volume, "P": eval_poisson}.get(u.kind, lambda f, x, t: f.eval(x, t))(u, x, t)


# ---------------------------------------------------------------------------
# kernel

def cmd_kernel_eval(cfg: RunConfig, args) -> int:
    x = _parse_point(args.x)
    s = float(cfg.coeff.a1(args.t))
    val = eval_kernel(cfg.dimension, x, s)
    out = {"x": list(map(float, x)), "t": args.t, "a1": s, "value": float(val)}
    print(json.dumps(out))
    if args.out:
        _write_json(args.out, out)
    return EXIT_OK


def cmd_kernel_check(cfg: RunConfig, args) -> int:
    T = cfg.horizon
    times = np.linspace(0.2, 1.0, 5) * T
    rows = []
    worst = 0.0
    for t in times:
        if float(cfg.coeff.a1(t)) <= 0:
            continue
        e_norm = check_normalization(cfg.coeff, float(t), cfg.dimension)
        rows.append(("normalization", float(t), e_norm))
        worst = max(worst, e_norm)
        if cfg.dimension == 2:
            e_f = check_fourier(cfg.coeff, float(t), np.array([1.3, -0.7]))
            rows.append(("fourier", float(t), e_f))
            worst = max(worst, e_f / 1e2)  # fourier target is 1e-8, norm 1e-10
    bump = BumpDensity(np.zeros(cfg.dimension), 0.5)
    for t in times[-2:]:
        if float(cfg.coeff.a1(t)) <= 0:
            continue
        e_d = check_delta_limit(cfg.coeff, float(t), bump, cfg.dimension)
        rows.append(("delta_limit", float(t), e_d))
    report = {
        "checks": [{"name": n, "t": t, "error": e} for n, t, e in rows],
        "max_normalization_error": worst,
    }
    if args.report:
        _write_json(args.report, report)
    print(json.dumps({"max_error": worst, "n_checks": len(rows)}))
    return EXIT_OK if worst <= 1e-10 else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# potential

def cmd_potential_eval(cfg: RunConfig, args) -> int:
    u = _field(cfg, args.kind)
    x = _parse_point(args.x)
    val = _eval_field(u, x, args.t)
    out = {"kind": args.kind, "x": list(map(float, x)), "t": args.t, "value": float(val)}
    print(json.dumps(out))
    if args.out:
        _write_json(args.out, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def jump_residuals(cfg: RunConfig, n_nodes=8, times=None):
    """Max deviation from the four half-density jump laws for the config's
    boundary density."""
    res = cfg.resolution
    S = _field(cfg, "S")
    D = _field(cfg, "D")
    geo = cfg.geometry
    T = cfg.horizon
    if times is None:
        times = [0.35 * T, 0.7 * T, T]
    th = np.linspace(0.0, 2 * np.pi, n_nodes, endpoint=False) + 0.123
    rows = []
    for t in times:
        for thv in th:
            xi0 = geo.point_at(thv)
            phi = float(cfg.densities["boundary"](thv, t))
            d_dir = boundary_double_layer(cfg.coeff, geo, cfg.densities["boundary"],
                                          xi0, t, res.m_space, res.m_time, res.q)
            d_int = double_layer_boundary_limit(D, xi0, t)
            dstar = adjoint_double_layer_boundary(S, xi0, t)
            s_int = single_layer_gradient_limit(S, xi0, t, side="interior")
            s_ext = single_layer_gradient_limit(S, xi0, t, side="exterior")
            rows.append({
                "theta": float(thv), "t": float(t),
                "double_interior": abs(d_int - (d_dir - 0.5 * phi)),
                "single_interior": abs(s_int - (dstar + 0.5 * phi)),
                "single_exterior": abs(s_ext - (dstar - 0.5 * phi)),
            })
    worst = max(max(r["double_interior"], r["single_interior"], r["single_exterior"])
                for r in rows)
    return rows, worst


def cmd_verify_jump(cfg: RunConfig, args) -> int:
    rows, worst = jump_residuals(cfg)
    tol = cfg.tolerances.get("verify", 1e-3)
    if args.out:
        _write_csv(args.out,
                   ["theta", "t", "double_interior", "single_interior", "single_exterior"],
                   [[r["theta"], r["t"], r["double_interior"], r["single_interior"],
                     r["single_exterior"]] for r in rows])
    if args.report:
        _write_json(args.report, {"max_residual": worst, "tolerance": tol, "rows": rows})
    print(json.dumps({"max_jump_residual": worst, "tolerance": tol}))
    return EXIT_OK if worst <= tol else EXIT_TOLERANCE


def _trace_field(cfg: RunConfig, which: str):
    if which == "volume":
        return _field(cfg, "V")
    if which == "poisson":
        return _field(cfg, "P")
    raise ConfigError(f"--which must be volume or poisson, got {which!r}")


def cmd_verify_trace(cfg: RunConfig, args) -> int:
    u = _trace_field(cfg, args.which)
    rep = trace_residual(u)
    tol = cfg.tolerances.get("verify", 1e-3) * rep.scale
    if args.out:
        params = np.arctan2(rep.points[:, 1] - np.mean(rep.points[:, 1]),
                            rep.points[:, 0] - np.mean(rep.points[:, 0]))
        rows = []
        for i, s in enumerate(params):
            for j, t in enumerate(rep.times):
                rows.append([float(s), float(t), float(rep.residual[i, j])])
        _write_csv(args.out, ["s", "t", "residual"], rows)
    if args.report:
        _write_json(args.report, {
            "sup_norm": rep.sup_norm, "l2_norm": rep.l2_norm,
            "scale": rep.scale, "tolerance": tol, "resolution": rep.resolution,
        })
    print(json.dumps({"sup_residual": rep.sup_norm, "scale": rep.scale,
                      "tolerance": tol}))
    return EXIT_OK if rep.sup_norm <= tol else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# solve

def _probe_rows(cfg: RunConfig, evaluate):
    T = cfg.horizon
    probes = _interior_probes(cfg)
    times = np.linspace(0.0, T, 6)[1:]
    rows = []
    for t in times:
        vals = np.atleast_1d(evaluate(probes, float(t)))
        for p, v in zip(probes, vals):
            rows.append([*map(float, p), float(t), float(v)])
    return rows


def cmd_solve_cauchy(cfg: RunConfig, args) -> int:
    parts = []
    if "volume" in cfg.densities:
        parts.append(_field(cfg, "V"))
    if "initial" in cfg.densities:
        parts.append(_field(cfg, "P"))
    if not parts:
        raise ConfigError("solve cauchy needs [density.volume] and/or [density.initial]")
    rows = _probe_rows(cfg, lambda x, t: sum(_eval_field(u, x, t) for u in parts))
    header = [*("xyz"[: cfg.dimension]), "t", "u"]
    if args.out:
        _write_csv(args.out, header, rows)
    print(json.dumps({"n_values": len(rows),
                      "sup": max(abs(r[-1]) for r in rows)}))
    return EXIT_OK


def cmd_solve_poisson(cfg: RunConfig, args) -> int:
    u = _field(cfg, "P")
    rows = _probe_rows(cfg, lambda x, t: eval_poisson(u, x, t))
    if args.out:
        _write_csv(args.out, [*("xyz"[: cfg.dimension]), "t", "u"], rows)
    print(json.dumps({"n_values": len(rows),
                      "sup": max(abs(r[-1]) for r in rows)}))
    return EXIT_OK


def _pde_residual(sol, x, t, coeff, h, dt):
    """Finite-difference d/dt u - a(t) lap u of the double-layer solution.

    Evaluates with a fixed high boundary node count so that quadrature
    noise stays far below the h^-2 amplification of the stencil."""
    u = lambda p, tv: float(bie.double_layer_from_slabs(
        sol.system, sol.phi, np.asarray(p, dtype=float), tv, ms_eval=256))
    ut = (u(x, t + dt) - u(x, t - dt)) / (2 * dt)
    lap = 0.0
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        lap += (u(x + e, t) - 2.0 * u(x, t) + u(x - e, t)) / h**2
    return ut - float(coeff.a(t)) * lap


def cmd_solve_ibvp(cfg: RunConfig, args) -> int:
    if "boundary" not in cfg.densities:
        raise ConfigError("solve ibvp needs a [density.boundary] table")
    g = cfg.densities["boundary"]
    res = cfg.resolution
    sol = bie.solve_ibvp(cfg.geometry, cfg.coeff, g,
                         m_space=res.m_space, m_time=res.m_time, q=res.q,
                         gamma_eff=res.gamma_eff, horizon=cfg.horizon)
    sys_ = sol.system
    # residual (i): PDE residual at an interior probe away from the boundary
    T = cfg.horizon
    c = np.mean(sys_.nodes.points, axis=0)
    probe = c + 0.3 * (sys_.nodes.points[0] - c)
    diam = cfg.geometry.diameter
    r_pde = abs(_pde_residual(sol, probe, 0.7 * T, cfg.coeff,
                              h=5e-3 * diam, dt=2e-3 * T))
    # residual (ii): initial value
    r_init = float(np.max(np.abs(np.atleast_1d(sol.eval(probe[None, :], 0.0)))))
    # residual (iii): boundary trace vs data via the jump relation
    r_trace = float(np.max(np.abs(sol.boundary_trace() - sol.g)))
    g_sup = float(np.max(np.abs(sol.g))) or 1.0
    try:
        phi_pic, history = bie.solve_picard(sys_, sol.g)
        picard_gap = float(np.max(np.abs(phi_pic - sol.phi)))
    except DegpotError:
        history, picard_gap = [], float("nan")
    report = {
        "condition_numbers": [float(v) for v in sys_.diagonal_condition_numbers()],
        "pde_residual": float(r_pde),
        "initial_residual": r_init,
        "boundary_trace_residual": r_trace,
        "boundary_trace_relative": r_trace / g_sup,
        "picard_iterations": len(history),
        "picard_increments": [float(v) for v in history],
        "picard_vs_march_gap": picard_gap,
    }
    if args.phi:
        rows = []
        for k, tk in enumerate(sys_.colloc_times):
            for th, v in zip(sys_.nodes.params, sol.phi[k]):
                rows.append([float(th), float(tk), float(v)])
        _write_csv(args.phi, ["theta", "t", "phi"], rows)
    if args.out:
        rows = _probe_rows(cfg, lambda x, t: sol.eval(x, t))
        _write_csv(args.out, ["x", "y", "t", "u"], rows)
    if args.report:
        _write_json(args.report, report)
    print(json.dumps({"pde_residual": report["pde_residual"],
                      "initial_residual": r_init,
                      "boundary_trace_relative": report["boundary_trace_relative"]}))
    ok = (r_init <= 1e-12 and report["boundary_trace_relative"] <= 1e-2)
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# study

def _with_horizon(coeff, horizon):
    if coeff.kind in ("constant", "power", "affine"):
        return type(coeff)(coeff.kind, horizon, coeff.params)
    raise ConfigError(
        f"horizon_sweep is not supported for coefficient kind {coeff.kind!r}"
    )


def _study_error(cfg: RunConfig, target: str, m_space: int, m_time: int,
                 horizon: float) -> float:
    coeff = cfg.coeff
    if abs(horizon - cfg.horizon) > 1e-15:
        coeff = _with_horizon(coeff, horizon)
    if target == "poisson-gaussian":
        u = make_field("P", coeff, cfg.geometry, cfg.densities["initial"],
                       m_space=m_space, m_time=m_time, q=cfg.resolution.q)
        phi = cfg.densities["initial"]
        probes = _interior_probes(cfg)
        errs = []
        for t in np.linspace(0.2, 1.0, 4) * horizon:
            s = float(coeff.a1(t))
            exact = phi.convolved(probes, s)
            got = np.atleast_1d(eval_poisson(u, probes, float(t)))
            errs.append(np.max(np.abs(got - exact)))
        return float(max(errs))
    if target == "trace":
        which = "volume" if "volume" in cfg.densities else "poisson"
        u = _trace_field(cfg, which)
        rep = trace_residual(u, m_space=m_space, m_time=m_time)
        return rep.sup_norm
    if target == "jump":
        sub = RunConfig(cfg.dimension, horizon, coeff, cfg.geometry,
                        type(cfg.resolution)(m_space, m_time,
                                             cfg.resolution.q, cfg.resolution.gamma_eff),
                        cfg.densities, cfg.tolerances, cfg.output_dir, cfg.threads)
        _, worst = jump_residuals(sub, n_nodes=4, times=[0.7 * horizon])
        return worst
    if target == "ibvp-inverse":
        from .bie import _pair_arrays
        from .potentials import _panel_times, _z_grid
        from . import backend as _backend

        geo = cfg.geometry
        density = lambda th, t: np.asarray(t) * np.cos(th)
        sys_ = bie.assemble(geo, coeff, None, m_space=m_space, m_time=m_time,
                            q=cfg.resolution.q, horizon=horizon)
        # boundary data from a near-continuous forward map (fine graded
        # time quadrature), so the error reflects the coarse inverse solve
        nodes = sys_.nodes
        d2, ratio = _pair_arrays(nodes)
        g = np.zeros((sys_.m_time, sys_.m_space))
        for k, sk in enumerate(sys_.colloc_times):
            z = _z_grid(coeff, float(sk), 512, cfg.resolution.q)
            tau = _panel_times(coeff, float(sk), z)
            dens = density(nodes.params[:, None], tau[None, :])
            D = _backend.dlayer_sum(2, d2, ratio, nodes.weights, z, dens)
            g[k] = -0.5 * density(nodes.params, sk) + D
        phi = bie.solve_march(sys_, g)
        star = sys_.sample_boundary(density)
        return float(np.max(np.abs(phi - star)) / np.max(np.abs(star)))
    raise ConfigError(f"unknown study target {target!r}")


def cmd_study(cfg: RunConfig, args) -> int:
    res = cfg.resolution
    rungs = args.rungs
    ladder = []
    for k in range(rungs):
        f = 2**k
        base_ms = args.m_space or res.m_space
        base_mt = args.m_time or res.m_time
        if args.mode == "refine_space":
            ladder.append((base_ms * f, base_mt, cfg.horizon))
        elif args.mode == "refine_time":
            ladder.append((base_ms, base_mt * f, cfg.horizon))
        elif args.mode == "refine_both":
            ladder.append((base_ms * f, base_mt * f, cfg.horizon))
        elif args.mode == "horizon_sweep":
            ladder.append((base_ms, base_mt, cfg.horizon * 0.5 ** (rungs - 1 - k)))
        else:
            raise ConfigError(f"unknown study mode {args.mode!r}")
    table = []
    try:
        for ms, mt, T in ladder:
            err = _study_error(cfg, args.target, ms, mt, T)
            table.append({"m_space": ms, "m_time": mt, "horizon": T, "error": err})
    except DegpotError as exc:
        out = {"target": args.target, "mode": args.mode, "table": table,
               "aborted": str(exc)}
        if args.out:
            _write_json(args.out, out)
        print(json.dumps(out))
        return EXIT_INTERNAL
    for k in range(len(table)):
        if k + 1 < len(table) and table[k + 1]["error"] > 0:
            table[k]["order"] = float(np.log2(table[k]["error"] / table[k + 1]["error"]))
        else:
            table[k]["order"] = None
    out = {"target": args.target, "mode": args.mode, "table": table}
    if args.out:
        _write_json(args.out, out)
    print(json.dumps(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="degpot",
        description="Potential theory for the time-degenerate diffusion operator",
    )
    p.add_argument("--version", action="version",
                   version=f"%(prog)s (backend: {backend.BACKEND_NAME})")
    sub = p.add_subparsers(dest="command", required=True)

    def add(cmdsub, name, func, **extra):
        sp = cmdsub.add_parser(name)
        sp.add_argument("--config", required=True)
        for flag, kw in extra.items():
            sp.add_argument(f"--{flag}", **kw)
        sp.set_defaults(func=func)
        return sp

    kern = sub.add_parser("kernel").add_subparsers(dest="sub", required=True)
    add(kern, "eval", cmd_kernel_eval,
        x={"required": True}, t={"type": float, "required": True}, out={})
    add(kern, "check", cmd_kernel_check, report={})

    pot = sub.add_parser("potential").add_subparsers(dest="sub", required=True)
    add(pot, "eval", cmd_potential_eval,
        kind={"choices": ["V", "P", "S", "D"], "required": True},
        x={"required": True}, t={"type": float, "required": True}, out={})

    ver = sub.add_parser("verify").add_subparsers(dest="sub", required=True)
    add(ver, "jump", cmd_verify_jump, out={}, report={})
    add(ver, "trace", cmd_verify_trace,
        which={"choices": ["volume", "poisson"], "required": True},
        out={}, report={})

    sol = sub.add_parser("solve").add_subparsers(dest="sub", required=True)
    add(sol, "cauchy", cmd_solve_cauchy, out={})
    add(sol, "poisson", cmd_solve_poisson, out={})
    add(sol, "ibvp", cmd_solve_ibvp, out={}, phi={}, report={})

    add(sub, "study", cmd_study,
        target={"choices": ["trace", "jump", "ibvp-inverse", "poisson-gaussian"],
                "required": True},
        mode={"choices": ["refine_space", "refine_time", "refine_both",
                          "horizon_sweep"], "default": "refine_both"},
        rungs={"type": int, "default": 3},
        out={},
        **{"m-space": {"type": int, "dest": "m_space", "default": 0},
           "m-time": {"type": int, "dest": "m_time", "default": 0}})
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegpotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
