"""Scenario presets, INI configuration parsing, and run assembly.

A scenario bundles the domain geometry, the materials and their region
layout, optional plane-wave or point-source excitation, and the solver
options.  Configuration files use INI sections named after the entities
they configure::

    [scenario]            name = two_layer
    [domain]              x0, z0, width, height, nx, nz
    [material.<name>]     preset = ... | raw parameters, theta_mat
    [region.<k>]          material, x_min, x_max, z_min, z_max
    [plane_wave]          family, omega, theta_wave
    [solver]              cfl_target, limiter, splitting, transverse,
                          t_final, bc_left/right/bottom/top, workers
    [source.<k>]          x, z, f_peak, t_peak, amp_tau_zz, amp_p
    [gauge.<k>]           x, z
    [output]              snapshot_times, binary, prefix
    [converge]            grid_sizes

All quantities are SI (angles in radians).  Builtin presets reproduce
the verification and demonstration setups at desk scale.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .grid import Grid2D, MaterialTable
from .materials import Material, MaterialError, MaterialSpec, preset
from .solver import PointSource, SimConfig

__all__ = [
    "ConfigError",
    "Scenario",
    "scenario_preset",
    "SCENARIO_PRESETS",
    "parse_config",
    "build_run",
]

_EDGES = ("left", "right", "bottom", "top")


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


@dataclass
class Scenario:
    """Complete description of one simulation setup."""

    name: str
    x0: float
    z0: float
    width: float
    height: float
    nx: int
    nz: int
    materials: dict              # name -> MaterialSpec (insertion order = index)
    regions: list = field(default_factory=list)
    plane_wave: dict | None = None   # family, omega, theta_wave
    sim: SimConfig = field(default_factory=SimConfig)
    grid_sizes: list = field(default_factory=list)
    output: dict = field(default_factory=lambda: {"binary": False, "prefix": "run"})

    def material_index(self, name: str) -> int:
        return list(self.materials).index(name)


def _plane_wave_scenario(name, material_spec, family, omega, theta_wave,
                         domain, t_final, splitting="godunov",
                         grid_sizes=(50, 100, 200), nx=100):
    sim = SimConfig(
        cfl_target=0.9, limiter="none", splitting=splitting, transverse=True,
        t_final=t_final,
        bc={e: "analytic_dirichlet" for e in _EDGES},
    )
    return Scenario(
        name=name, x0=0.0, z0=0.0, width=domain, height=domain,
        nx=nx, nz=nx, materials={"medium": material_spec},
        plane_wave={"family": family, "omega": omega, "theta_wave": theta_wave},
        sim=sim, grid_sizes=list(grid_sizes),
    )


def _make_presets():
    presets = {}
    inviscid = preset("sandstone_ortho", eta=0.0)
    viscous = preset("sandstone_ortho")
    omega0 = 1e4
    presets["plane_wave"] = lambda: _plane_wave_scenario(
        "plane_wave", inviscid, "fast_p", omega0, 0.0,
        domain=8.0, t_final=2.0 * math.pi / omega0)
    presets["plane_wave_viscous_hf"] = lambda: _plane_wave_scenario(
        "plane_wave_viscous_hf", viscous, "fast_p", 2e4 * math.pi, 0.0,
        domain=1.2, t_final=1.25e-4, splitting="strang")
    presets["plane_wave_viscous_slow_hf"] = lambda: _plane_wave_scenario(
        "plane_wave_viscous_slow_hf", viscous, "slow_p", 2e4 * math.pi, 0.0,
        domain=0.05, t_final=0.05 / 6000.0 * 1.25, splitting="strang")
    presets["plane_wave_viscous_lf"] = lambda: _plane_wave_scenario(
        "plane_wave_viscous_lf", viscous, "fast_p", 20.0 * math.pi, 0.0,
        domain=1200.0, t_final=0.125, splitting="strang")

    def point_source():
        side = 18.7
        sim = SimConfig(
            cfl_target=0.9, limiter="mc", splitting="strang", transverse=True,
            t_final=1.56e-3,
            sources=[PointSource(x=side / 2, z=side / 2, f_peak=3730.0,
                                 t_peak=4e-4, amp_tau_zz=1.0, amp_p=-1.0)],
        )
        return Scenario(
            name="point_source", x0=0.0, z0=0.0, width=side, height=side,
            nx=125, nz=125, materials={"medium": preset("sandstone_ortho")},
            sim=sim,
        )

    presets["point_source"] = point_source

    def two_layer():
        # Shale layer below z = 700 m, sandstone above; the source and the
        # first gauge sit in the sandstone.
        sim = SimConfig(
            cfl_target=0.9, limiter="mc", splitting="godunov", transverse=True,
            t_final=0.5,
            sources=[PointSource(x=750.0, z=900.0, f_peak=50.0, t_peak=0.04,
                                 amp_tau_zz=2.3e13, amp_p=-2.3e13)],
            gauges=[(950.0, 750.0), (950.0, 650.0), (950.0, 500.0)],
            snapshot_times=[0.25],
        )
        return Scenario(
            name="two_layer", x0=0.0, z0=0.0, width=1500.0, height=1400.0,
            nx=150, nz=140,
            materials={"shale": preset("shale_iso"),
                       "sandstone": preset("sandstone_iso")},
            regions=[("shale", 0.0, 1500.0, 0.0, 700.0),
                     ("sandstone", 0.0, 1500.0, 700.0, 1400.0)],
            sim=sim,
        )

    presets["two_layer"] = two_layer
    return presets


SCENARIO_PRESETS = _make_presets()


def scenario_preset(name: str) -> Scenario:
    try:
        return SCENARIO_PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown scenario preset {name!r}; available: "
            f"{', '.join(sorted(SCENARIO_PRESETS))}"
        ) from None


# -- configuration parsing ------------------------------------------------

_MATERIAL_FIELDS = [f.name for f in dataclasses.fields(MaterialSpec)]


def _get_float(sec, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] missing key {key!r}")
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r} is not a number") \
            from None


def _get_int(sec, key, default=None):
    val = _get_float(sec, key, default)
    if val != int(val):
        raise ConfigError(f"[{sec.name}] {key} must be an integer")
    return int(val)


def _get_bool(sec, key, default):
    if key not in sec:
        return default
    val = sec[key].strip().lower()
    if val in ("true", "yes", "1", "on"):
        return True
    if val in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r} is not a boolean")


def _parse_material(sec) -> MaterialSpec:
    try:
        if "preset" in sec:
            overrides = {
                k: float(sec[k]) for k in _MATERIAL_FIELDS
                if k in sec and k != "theta_mat"
            }
            return preset(sec["preset"],
                          theta_mat=_get_float(sec, "theta_mat", 0.0),
                          **overrides)
        kwargs = {}
        for name in _MATERIAL_FIELDS:
            if name in ("eta", "theta_mat"):
                kwargs[name] = _get_float(sec, name, 0.0)
            else:
                kwargs[name] = _get_float(sec, name)
        return MaterialSpec(**kwargs)
    except MaterialError as exc:
        raise ConfigError(f"[{sec.name}] {exc}") from None


def _parse_float_list(raw: str):
    items = [s for s in raw.replace(",", " ").split() if s]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"cannot parse number list {raw!r}") from None


def parse_config(path: str) -> Scenario:
    """Parse an INI configuration file into a Scenario.

    Raises :class:`ConfigError` with file/line context for syntax errors
    and with section/key context for semantic errors.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    base = None
    if cp.has_section("scenario"):
        sec = cp["scenario"]
        if "preset" in sec:
            base = scenario_preset(sec["preset"])
            base.name = sec.get("name", base.name)
        else:
            name = sec.get("name", "custom")
            base = Scenario(name=name, x0=0.0, z0=0.0, width=1.0, height=1.0,
                            nx=1, nz=1, materials={})
    else:
        base = Scenario(name="custom", x0=0.0, z0=0.0, width=1.0, height=1.0,
                        nx=1, nz=1, materials={})

    if cp.has_section("domain"):
        sec = cp["domain"]
        base.x0 = _get_float(sec, "x0", base.x0)
        base.z0 = _get_float(sec, "z0", base.z0)
        base.width = _get_float(sec, "width", base.width)
        base.height = _get_float(sec, "height", base.height)
        base.nx = _get_int(sec, "nx", base.nx)
        base.nz = _get_int(sec, "nz", base.nz)
    if base.width <= 0 or base.height <= 0 or base.nx < 1 or base.nz < 1:
        raise ConfigError("[domain] extents and cell counts must be positive")

    materials = {}
    regions = []
    sources = []
    gauges = []
    for section in cp.sections():
        if section.startswith("material."):
            materials[section.split(".", 1)[1]] = _parse_material(cp[section])
        elif section.startswith("region."):
            sec = cp[section]
            if "material" not in sec:
                raise ConfigError(f"[{section}] missing key 'material'")
            regions.append((sec["material"],
                            _get_float(sec, "x_min"), _get_float(sec, "x_max"),
                            _get_float(sec, "z_min"), _get_float(sec, "z_max")))
        elif section.startswith("source."):
            sec = cp[section]
            sources.append(PointSource(
                x=_get_float(sec, "x"), z=_get_float(sec, "z"),
                f_peak=_get_float(sec, "f_peak"),
                t_peak=_get_float(sec, "t_peak"),
                amp_tau_zz=_get_float(sec, "amp_tau_zz", 0.0),
                amp_p=_get_float(sec, "amp_p", 0.0),
            ))
        elif section.startswith("gauge."):
            sec = cp[section]
            gauges.append((_get_float(sec, "x"), _get_float(sec, "z")))
    if materials:
        base.materials = materials
    if regions:
        base.regions = regions
    if not base.materials:
        raise ConfigError("no materials configured")
    for name, *_ in base.regions:
        if name not in base.materials:
            raise ConfigError(f"region references unknown material {name!r}")

    if cp.has_section("plane_wave"):
        sec = cp["plane_wave"]
        family = sec.get("family", "fast_p")
        if family not in analytic.FAMILIES:
            raise ConfigError(f"[plane_wave] unknown family {family!r}")
        base.plane_wave = {
            "family": family,
            "omega": _get_float(sec, "omega"),
            "theta_wave": _get_float(sec, "theta_wave", 0.0),
        }

    sim_kwargs = {f.name: getattr(base.sim, f.name)
                  for f in dataclasses.fields(SimConfig)}
    sim_kwargs.pop("analytic_solution", None)
    sim_kwargs["bc"] = dict(sim_kwargs["bc"])
    sim_kwargs["sources"] = list(sim_kwargs["sources"])
    sim_kwargs["gauges"] = list(sim_kwargs["gauges"])
    sim_kwargs["snapshot_times"] = list(sim_kwargs["snapshot_times"])
    if cp.has_section("solver"):
        sec = cp["solver"]
        sim_kwargs["cfl_target"] = _get_float(sec, "cfl_target",
                                              sim_kwargs["cfl_target"])
        sim_kwargs["limiter"] = sec.get("limiter", sim_kwargs["limiter"])
        sim_kwargs["splitting"] = sec.get("splitting", sim_kwargs["splitting"])
        sim_kwargs["transverse"] = _get_bool(sec, "transverse",
                                             sim_kwargs["transverse"])
        sim_kwargs["t_final"] = _get_float(sec, "t_final", sim_kwargs["t_final"])
        sim_kwargs["workers"] = _get_int(sec, "workers", sim_kwargs["workers"])
        for edge in _EDGES:
            key = f"bc_{edge}"
            if key in sec:
                sim_kwargs["bc"][edge] = sec[key]
    if sources:
        sim_kwargs["sources"] = sources
    if gauges:
        sim_kwargs["gauges"] = gauges
    if cp.has_section("output"):
        sec = cp["output"]
        if "snapshot_times" in sec:
            sim_kwargs["snapshot_times"] = _parse_float_list(sec["snapshot_times"])
        base.output["binary"] = _get_bool(sec, "binary", base.output["binary"])
        base.output["prefix"] = sec.get("prefix", base.output["prefix"])
    try:
        base.sim = SimConfig(**sim_kwargs)
    except Exception as exc:
        raise ConfigError(f"[solver] {exc}") from None

    if cp.has_section("converge"):
        sec = cp["converge"]
        if "grid_sizes" in sec:
            sizes = _parse_float_list(sec["grid_sizes"])
            if any(s != int(s) or s < 1 for s in sizes):
                raise ConfigError("[converge] grid_sizes must be positive integers")
            base.grid_sizes = [int(s) for s in sizes]
    return base


# -- run assembly ----------------------------------------------------------

def build_run(scenario: Scenario, nx: int | None = None, nz: int | None = None,
              workers: int | None = None):
    """Materialize a scenario into (grid, table, sim config, mode).

    ``nx``/``nz`` override the scenario grid size (used by convergence
    studies).  For plane-wave scenarios the analytic mode provides the
    initial data and is registered as the Dirichlet boundary solution;
    other scenarios start from rest.
    """
    nx = scenario.nx if nx is None else nx
    nz = scenario.nz if nz is None else nz
    grid = Grid2D(nx, nz, scenario.width / nx, scenario.height / nz,
                  scenario.x0, scenario.z0)

    materials = [Material(spec) for spec in scenario.materials.values()]
    table = MaterialTable(materials)
    if scenario.regions:
        index = {name: i for i, name in enumerate(scenario.materials)}
        grid.assign_materials([
            (index[name], xmin, xmax, zmin, zmax)
            for name, xmin, xmax, zmin, zmax in scenario.regions
        ])
    elif len(materials) == 1:
        grid.material_id[...] = 0
    else:
        raise ConfigError("multiple materials configured but no regions")

    sim = dataclasses.replace(scenario.sim)
    if workers is not None:
        sim = dataclasses.replace(sim, workers=workers)

    mode = None
    if scenario.plane_wave is not None:
        if len(materials) != 1:
            raise ConfigError("plane-wave scenarios require a single material")
        pw = scenario.plane_wave
        tw = pw["theta_wave"]
        mode = analytic.solve_plane_wave(
            materials[0].spec, pw["omega"], math.cos(tw), math.sin(tw),
            pw["family"])
        exact = _mode_field(mode)
        X, Z = np.meshgrid(grid.x_centers(), grid.z_centers())
        grid.interior[...] = exact(X, Z, 0.0)
        sim = dataclasses.replace(sim, analytic_solution=exact)
    elif any(kind == "analytic_dirichlet" for kind in sim.bc.values()):
        raise ConfigError("analytic boundary conditions require a plane wave")
    return grid, table, sim, mode


def _mode_field(mode):
    def exact(x, z, t):
        return analytic.evaluate_plane_wave(mode, x, z, t)
    return exact
