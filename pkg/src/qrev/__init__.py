"""Minimal-cost reversal of Gaussian pure-loss dynamics.

Submodules: ``symplectic`` (phase-space linear algebra), ``gaussian``
(states, generators, cost), ``one_mode`` (closed forms and certificates),
``oracle`` (independent numerical solvers), ``frame`` (multimode moving
frame), ``asymptotics`` (pure-endpoint law), ``cli``.
"""
from .errors import (
    DivergenceError,
    InvalidDimensionError,
    NotSymmetricError,
    QrevError,
    SpecFormatError,
    UnphysicalStateError,
)
from .gaussian import (
    GaussianGenerator,
    SqueezedThermalParams,
    cost_Z,
    cp_matrix,
    cp_min_eig,
    forward_generator,
    matching_residual,
    pure_loss_path,
    squeezed_thermal,
)
from .one_mode import ReverseOptimum, kkt_certificate, scalar_block_optimum, z_min_exact
from .symplectic import WilliamsonDecomposition, symplectic_form, williamson

__version__ = "0.1.0"
