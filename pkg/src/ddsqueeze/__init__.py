"""Collective-spin squeezing under continuous dynamical-decoupling drives.

A desk-scale simulator for N spin-1/2 particles in the symmetric Dicke
sector: twisting Hamiltonians and periodic winding controls, exact and
stepped unitary propagation, colored-noise trajectory ensembles, and the
squeezing measures with their scaling against N.
"""

__version__ = "0.1.0"

from .dynamics import (
    EnsembleResult,
    EnsembleScenario,
    IntegratorError,
    SpinMoments,
    StepPolicy,
    TrajectoryMoments,
    propagate_driven,
    propagate_static,
    run_ensemble,
)
from .hamiltonians import (
    AveragedForm,
    ControlParams,
    QuadratureError,
    averaged_hamiltonian,
    build_dr,
    build_oat,
    build_tat,
    conjugated_jx_squared,
    control_hamiltonian,
    control_propagator,
    dd_residual,
    system_hamiltonian,
    winding_residuals,
)
from .noise import NoisePath, OUParams, derive_path_seed, noise_hamiltonian, sample_ou_path
from .spin import (
    HermiticityError,
    ShapeError,
    SpinSystem,
    build_collective_operators,
    commutator,
    expectation,
    hermitian_exponential,
    hermitian_exponential_action,
    spin_down_state,
)
from .squeezing import (
    BoundaryMinimumWarning,
    DegenerateMeanSpinError,
    SqueezingSample,
    find_min_squeezing,
    squeezing_arrays,
    squeezing_series,
    xi_r_squared,
    xi_s_squared,
)

__all__ = [
    "__version__",
    "AveragedForm",
    "BoundaryMinimumWarning",
    "ControlParams",
    "DegenerateMeanSpinError",
    "EnsembleResult",
    "EnsembleScenario",
    "HermiticityError",
    "IntegratorError",
    "NoisePath",
    "OUParams",
    "QuadratureError",
    "ShapeError",
    "SpinMoments",
    "SpinSystem",
    "SqueezingSample",
    "StepPolicy",
    "TrajectoryMoments",
    "averaged_hamiltonian",
    "build_collective_operators",
    "build_dr",
    "build_oat",
    "build_tat",
    "commutator",
    "conjugated_jx_squared",
    "control_hamiltonian",
    "control_propagator",
    "dd_residual",
    "derive_path_seed",
    "expectation",
    "find_min_squeezing",
    "hermitian_exponential",
    "hermitian_exponential_action",
    "noise_hamiltonian",
    "propagate_driven",
    "propagate_static",
    "run_ensemble",
    "sample_ou_path",
    "spin_down_state",
    "squeezing_arrays",
    "squeezing_series",
    "system_hamiltonian",
    "winding_residuals",
    "xi_r_squared",
    "xi_s_squared",
]
