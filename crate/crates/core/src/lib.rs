//! Thermal entanglement and quantum discord between nearest neighbours of
//! finite XXZ chains, with bulk thermodynamics and critical-point scoring.
//!
//! The pipeline is: [`model`] builds sector blocks, [`thermal`]
//! diagonalizes them and forms canonical averages, [`reduced_state`] turns
//! bond correlators into the two-qubit state, [`qcorr`] evaluates
//! concurrence/EoF/discord, [`thermo`] adds the bulk quantities and
//! [`sweep`] runs grids and scores slope discontinuities.

pub mod error;
pub mod model;
pub mod qcorr;
pub mod reduced_state;
pub mod sweep;
pub mod thermal;
pub mod thermo;

pub use error::{Error, Result};
pub use model::{Boundary, ChainSpec, OperatorBlock, SectorBasis};
pub use qcorr::{
    concurrence, discord_bruteforce, discord_closed, eof, qcorr_record, DBranch, QCorrRecord,
};
pub use reduced_state::{nn_correlators, two_site_density_matrix, verify_correlator_identities, TwoSiteState};
pub use sweep::{
    detect_branch_switch, detect_cusps, estimate_derivative, run_sweep, Candidate, CandidateKind,
    CuspReport, Field, Normalization, SweepGrid, SweepParam, SweepRecord,
};
pub use thermal::{diagonalize, Ensemble, SpectrumCache, SpectrumSet, ThermalWeights};
pub use thermo::{thermo_consistency, thermo_record, ThermoRecord};
