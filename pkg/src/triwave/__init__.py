"""Exact simulator for trilinear three-wave mixing in invariant subspaces."""

from .blocks import (
    BlockHamiltonian,
    BlockIndex,
    FockTriple,
    block_dimension,
    block_to_fock,
    build_block_hamiltonian,
    build_recombination_hamiltonian,
    fock_to_block,
    recombination_offdiag,
    trilinear_offdiag,
)
from .evolution import (
    ThreeModeState,
    dense_oracle_evolve,
    evolve,
    evolve_recombination,
)
from .states import (
    make_coherent_pump,
    make_twin_beam,
    pcs_amplitudes,
    predicted_twin_beam_param,
    twin_beam_amplitudes,
)
from .metrics import (
    ReducedDensityMatrix,
    conversion_rate_down,
    conversion_rate_up,
    matched_pcs_overlap,
    matched_pcs_overlap_rho,
    mean_photon,
    overlap_with_product,
    phase_distribution,
    purity,
    reciprocal_peak_likelihood,
    reduce_mode_c,
)
from .experiments import (
    PowerLawFit,
    ScalingPoint,
    SweepRecord,
    find_optimal_tau,
    find_peak_conversion_tau,
    fit_power_law,
    full_pipeline,
    scaling_study,
    stage1_sweep,
    stage2_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BlockHamiltonian",
    "BlockIndex",
    "FockTriple",
    "PowerLawFit",
    "ReducedDensityMatrix",
    "ScalingPoint",
    "SweepRecord",
    "ThreeModeState",
    "block_dimension",
    "block_to_fock",
    "build_block_hamiltonian",
    "build_recombination_hamiltonian",
    "conversion_rate_down",
    "conversion_rate_up",
    "dense_oracle_evolve",
    "evolve",
    "evolve_recombination",
    "find_optimal_tau",
    "find_peak_conversion_tau",
    "fit_power_law",
    "fock_to_block",
    "full_pipeline",
    "make_coherent_pump",
    "make_twin_beam",
    "matched_pcs_overlap",
    "matched_pcs_overlap_rho",
    "mean_photon",
    "overlap_with_product",
    "pcs_amplitudes",
    "phase_distribution",
    "predicted_twin_beam_param",
    "purity",
    "reciprocal_peak_likelihood",
    "recombination_offdiag",
    "reduce_mode_c",
    "scaling_study",
    "stage1_sweep",
    "stage2_sweep",
    "trilinear_offdiag",
    "twin_beam_amplitudes",
]
