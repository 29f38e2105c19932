"""porowave: finite volume wave propagation in orthotropic poroelastic media.

The package provides

* :mod:`porowave.materials` -- material parameters, derived coefficients,
  and the 8x8 system matrices with principal-axis rotation;
* :mod:`porowave.riemann` -- directional wave bases and heterogeneous
  interface Riemann solvers;
* :mod:`porowave.analytic` -- exact plane-wave modes (inviscid and
  viscous) used as initial data, boundary data and error oracles;
* :mod:`porowave.solver` -- the second-order limited wave-propagation
  scheme with operator-split viscous relaxation, point sources, gauges;
* :mod:`porowave.verify` -- energy/grid norms, convergence-rate fitting,
  and structural checkers (hyperbolicity, entropy conditions, reduced
  system, subcharacteristic condition);
* :mod:`porowave.scenarios` / :mod:`porowave.cli` -- scenario presets,
  config parsing and the command-line driver.
"""

from .materials import (
    COMPONENTS,
    Material,
    MaterialError,
    MaterialSpec,
    SystemMatrices,
    DerivedCoefficients,
    build_system_matrices,
    derive_coefficients,
    preset,
    rotate_to_global,
    wave_speeds,
    PRESET_NAMES,
)

__version__ = "0.1.0"
