"""Truncation-convergence audit and spectral statistics for the Dicke model.

The package is organized around the numerical workflow:

* :mod:`dickeaudit.model` -- basis enumeration, parity sectors, dense
  Hamiltonian assembly.
* :mod:`dickeaudit.convergence` -- full-spectrum diagonalization, cutoff
  ladders, trusted-energy-window certification.
* :mod:`dickeaudit.semiclassical` -- classical energy surface, mean-field
  ground-state energy, semiclassical density of states.
* :mod:`dickeaudit.spectral` -- unfolding, spacing statistics, gap ratios,
  level-motion power spectrum, GOE/Poisson sampling references.
* :mod:`dickeaudit.cli` -- batch experiment front-end.
"""

from dickeaudit.model import (
    BasisState,
    HamiltonianMatrix,
    ModelParams,
    ParitySector,
    Truncation,
    build_full_hamiltonian,
    build_hamiltonian,
    critical_coupling,
    enumerate_basis,
    hamiltonian_element,
    truncation_artifact_energy,
)
from dickeaudit.convergence import (
    ConvergenceReport,
    SpectrumRecord,
    TrustedWindow,
    certify_window,
    convergence_ladder,
    eigenvalues,
    monotonicity_check,
    sector_spectrum,
    trusted_window,
)
from dickeaudit.semiclassical import (
    ClassicalPoint,
    DosCurve,
    classical_energy,
    cumulative_dos,
    dos,
    dos_curve,
    ground_state_energy,
)
from dickeaudit.spectral import (
    DeltaSeries,
    PowerSpectrumResult,
    SpacingSample,
    UnfoldedSpectrum,
    delta_power_spectrum,
    goe_reference,
    poisson_reference,
    r_statistic,
    spacing_distribution,
    unfold,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
