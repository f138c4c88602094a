"""skinbath: quantum emitters coupled to a Hatano-Nelson lattice bath.

Library layers:

* ``model`` — specs and single-excitation Hamiltonian assembly
* ``evolve`` — non-Hermitian Schrodinger integration with log-scale rescaling
* ``selfenergy`` — analytic self-energies plus a quadrature oracle
* ``spectra`` — periodic/open spectra, skin modes, hidden bound states
* ``effective`` — reduced two-emitter model and DFI reports
* ``hyperbolic`` — curved-space dual (curvature, coordinates, pseudosphere)
* ``runner``/``cli`` — scenario configs, figure presets, sweeps, CSV + figures
"""

from .errors import (
    BranchAmbiguityError,
    ConfigError,
    IntegrationError,
    SingularOperatorError,
    SkinbathError,
    SpecError,
)
from .model import (
    Boundary,
    CouplingPoint,
    EmitterSpec,
    HamiltonianOperator,
    LatticeSpec,
    Regime,
    SystemSpec,
    assemble_hamiltonian,
    classify_regime,
    derive_parameters,
    giant_emitter,
    matching_ratio,
    small_emitter,
    validate_spec,
)
from .evolve import (
    IntegratorConfig,
    StateVector,
    Trajectory,
    evolve,
    extract_observables,
    gauge_transform,
    initial_state,
    light_cone_guard,
    population_series,
    uniform_times,
)
from .selfenergy import (
    SelfEnergyQuery,
    SelfEnergyResult,
    rates,
    sigma_giant,
    sigma_numeric,
    sigma_pair_braided,
    sigma_pair_braided_arbitrary,
    sigma_pair_general,
    sigma_resonant,
)
from .spectra import (
    BoundStateResult,
    BorderedTridiagonalSolver,
    bordered_tridiagonal_solve,
    dense_eigen_oracle,
    hidden_bound_state,
    obc_modes,
    pbc_spectrum,
)
from .effective import (
    compare_full_vs_reduced,
    dfi_report,
    effective_hamiltonian,
    reduced_evolution,
)
from .hyperbolic import curvature, pseudosphere_sample, site_coordinates

__version__ = "0.1.0"
