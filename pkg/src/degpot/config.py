"""Run configuration: TOML loading, validation, and object construction.

A config file fully describes one problem setup: dimension, coefficient,
domain, horizon, resolution, densities, tolerances and output paths.  All
validation happens at load time and every violation is reported with the
dotted path of the offending field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from .coeff import TimeCoefficient
from .densities import (
    BumpDensity,
    GaussianDensity,
    ManufacturedVolume,
    TimeModulatedSource,
    require_interior_support,
    smooth_boundary_preset,
)
from .errors import ConfigError
from .geometry import make_geometry

__all__ = ["Resolution", "RunConfig", "load_config", "parse_config"]

MIN_M_SPACE = 8
MIN_M_TIME = 2

_DEFAULT_TOLERANCES = {
    "solve": 1e-10,
    "verify": 1e-3,
}


@dataclass(frozen=True)
class Resolution:
    m_space: int = 64
    m_time: int = 32
    q: float = 3.0
    gamma_eff: float = 0.75


@dataclass
class RunConfig:
    dimension: int
    horizon: float
    coeff: TimeCoefficient
    geometry: object
    resolution: Resolution
    densities: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(_DEFAULT_TOLERANCES))
    output_dir: str = "."
    threads: int = 0  # 0 = automatic
    raw: dict = field(default_factory=dict)


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _get(table, key, path, typ=None, default=_fail):
    if key not in table:
        if default is _fail:
            _fail(f"{path}.{key}", "missing required field")
        return default
    val = table[key]
    if typ is not None and not isinstance(val, typ):
        _fail(f"{path}.{key}", f"expected {typ}, got {type(val).__name__}")
    return val


def _build_coeff(table, horizon):
    kind = _get(table, "kind", "coefficient", str)
    try:
        if kind == "constant":
            return TimeCoefficient.constant(_get(table, "value", "coefficient", (int, float), 1.0), horizon)
        if kind == "power":
            return TimeCoefficient.power(_get(table, "exponent", "coefficient", (int, float)), horizon)
        if kind == "affine":
            return TimeCoefficient.affine(
                _get(table, "alpha", "coefficient", (int, float)),
                _get(table, "beta", "coefficient", (int, float)),
                horizon,
            )
        if kind == "piecewise_poly":
            return TimeCoefficient.piecewise_poly(
                _get(table, "breakpoints", "coefficient", list),
                _get(table, "rows", "coefficient", list),
                horizon,
            )
        if kind == "tabulated":
            return TimeCoefficient.tabulated(
                _get(table, "grid", "coefficient", list),
                _get(table, "values", "coefficient", list),
            )
    except ConfigError:
        raise
    except Exception as exc:
        _fail("coefficient", str(exc))
    _fail("coefficient.kind", f"unknown kind {kind!r}")


def _build_spatial(table, path):
    kind = _get(table, "kind", path, str)
    if kind == "gaussian":
        return GaussianDensity(
            _get(table, "center", path, list),
            _get(table, "sigma", path, (int, float)),
        )
    if kind == "bump":
        return BumpDensity(
            _get(table, "center", path, list),
            _get(table, "radius", path, (int, float)),
        )
    _fail(f"{path}.kind", f"unknown spatial density kind {kind!r}")


def _build_densities(table, coeff, geometry):
    out = {}
    if "volume" in table:
        sub = table["volume"]
        kind = _get(sub, "kind", "density.volume", str)
        if kind == "manufactured_bump":
            bump = BumpDensity(
                _get(sub, "center", "density.volume", list),
                _get(sub, "radius", "density.volume", (int, float)),
            )
            src = ManufacturedVolume(coeff, bump)
        else:
            src = TimeModulatedSource(_build_spatial(sub, "density.volume"))
        try:
            require_interior_support(src, geometry)
        except Exception as exc:
            _fail("density.volume", str(exc))
        out["volume"] = src
    if "initial" in table:
        phi = _build_spatial(table["initial"], "density.initial")
        try:
            require_interior_support(phi, geometry)
        except Exception as exc:
            _fail("density.initial", str(exc))
        out["initial"] = phi
    if "boundary" in table:
        preset = _get(table["boundary"], "preset", "density.boundary", str)
        try:
            out["boundary"] = smooth_boundary_preset(preset)
        except ValueError as exc:
            _fail("density.boundary.preset", str(exc))
    return out


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed config table and construct the run objects."""
    n = _get(data, "dimension", "", int, 2)
    if n not in (2, 3):
        _fail("dimension", f"must be 2 or 3, got {n}")
    horizon = float(_get(data, "horizon", "", (int, float)))
    if horizon <= 0:
        _fail("horizon", f"must be positive, got {horizon}")

    coeff = _build_coeff(_get(data, "coefficient", "", dict), horizon)
    cls = coeff.classify()
    if cls == "neither":
        _fail(
            "coefficient",
            "the antiderivative a1 must stay positive on (0, T] "
            "(neither assumption (a) nor (b) holds for this kind/horizon)",
        )

    dom = _get(data, "domain", "", dict)
    try:
        geometry = make_geometry(dom)
    except Exception as exc:
        _fail("domain", str(exc))
    if geometry.dimension != n:
        _fail("domain.shape", f"shape is {geometry.dimension}-dimensional but dimension = {n}")

    res_tab = data.get("resolution", {})
    res = Resolution(
        m_space=_get(res_tab, "m_space", "resolution", int, 64),
        m_time=_get(res_tab, "m_time", "resolution", int, 32),
        q=float(_get(res_tab, "q", "resolution", (int, float), 3.0)),
        gamma_eff=float(_get(res_tab, "gamma_eff", "resolution", (int, float), 0.75)),
    )
    if res.m_space < MIN_M_SPACE:
        _fail("resolution.m_space", f"must be >= {MIN_M_SPACE}")
    if res.m_space % 2:
        _fail("resolution.m_space", "must be even (antipodal quadrature pairing)")
    if res.m_time < MIN_M_TIME:
        _fail("resolution.m_time", f"must be >= {MIN_M_TIME}")
    if res.q < 1.0:
        _fail("resolution.q", "grading exponent must be >= 1")
    if not 0.0 < res.gamma_eff <= 1.0:
        _fail("resolution.gamma_eff", "must lie in (0, 1]")

    densities = _build_densities(data.get("density", {}), coeff, geometry)

    tol = dict(_DEFAULT_TOLERANCES)
    for k, v in data.get("tolerances", {}).items():
        if not isinstance(v, (int, float)) or v <= 0:
            _fail(f"tolerances.{k}", "must be a positive number")
        tol[k] = float(v)

    out_tab = data.get("output", {})
    output_dir = _get(out_tab, "dir", "output", str, ".")
    threads = _get(data, "threads", "", int, 0)
    if threads < 0:
        _fail("threads", "must be >= 0 (0 = automatic)")
    env = os.environ.get("DEGPOT_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            _fail("DEGPOT_THREADS", f"must be an integer, got {env!r}")

    return RunConfig(
        dimension=n,
        horizon=horizon,
        coeff=coeff,
        geometry=geometry,
        resolution=res,
        densities=densities,
        tolerances=tol,
        output_dir=output_dir,
        threads=threads,
        raw=data,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}")
    return parse_config(data)
