"""Mean-field and exact-diagonalization solvers for the Dicke-Ising model.

A transverse-field Ising chain couples collectively to a single cavity mode.
The thermodynamic limit is solved through a self-consistent effective
transverse field; finite chains are diagonalized directly in a truncated
Fock space so the two can be compared.
"""
from .errors import (
    DickeIsingError, DimensionBudgetExceeded, EigenNonConverged, GaplessDispersion,
    InvalidParameters, IoError, KrylovBreakdown, MultipleCrossings, NegativeDiscriminantForLowerBranch,
    NoCrossing, NonConverged, OmegaInsideBand, PoleOnGrid, UsageError,
)
from .model import (
    BandEdges, EffectiveField, ModelParams, band_edges, bogoliubov_coupling, bz_average,
    coupling_profile_real_space, dispersion, is_gapless, k_grid,
)
from .equilibrium import (
    MeanFieldSolution, PhaseDiagramGrid, Transition, classify_transition, energy_density,
    locate_tricritical, minimize, phase_diagram,
)
from .response import (
    BoundState, PolaritonFit, SpectralGrid, SpectralMap, chi0_finite_sum, chi0_integral,
    dressed_chi, existence_threshold, find_bound_states, induced_interaction, photon_propagator,
    pole_function, polariton_fit, response_grid, spectral_map,
)
from .ed import (
    EDConfig, EDResult, FiniteSizeScan, PhotonSpectrum, build_hamiltonian, finite_size_scan,
    ground_state, photon_green_function, photon_spectrum,
)

__version__ = "0.1.0"
