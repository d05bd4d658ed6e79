"""Design and simulation of engineered-coupling waveguide lattices for mirror transfer."""

from .design import (
    CouplerMeasurement,
    CouplingFit,
    InfeasibleGeometryError,
    NNValidity,
    UnderdeterminedFitError,
    c0_for_length,
    coupling_from_separation,
    design_separations,
    fit_coupling_law,
    max_sites,
    nn_validity,
    pst_couplings,
    read_measurements,
    transfer_length,
)
from .disorder import (
    BaselineResult,
    DisorderModel,
    TransferReport,
    TransferStats,
    baseline_comparison,
    monte_carlo_transfer,
    sample_disordered_hamiltonian,
    transfer_fidelity,
)
from .lattice import (
    PST,
    ChannelSpec,
    CouplingLaw,
    Custom,
    Geometry,
    Hamiltonian,
    Harmonic,
    Uniform,
    ValidationError,
    build_hamiltonian,
    build_hamiltonian_from_geometry,
)
from .propagation import (
    PropagationRecord,
    StepTooLargeError,
    apply_uniform_loss,
    closed_form_pst_intensity,
    propagate_integrator,
    propagate_spectral,
)

__version__ = "0.1.0"
