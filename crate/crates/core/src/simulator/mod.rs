//! Noisy execution of realized sequences, readout, shot sampling and Monte Carlo averaging.

pub mod density;
mod engine;
mod monte_carlo;
mod run;
mod state;

pub use engine::Simulator;
pub use monte_carlo::{
    monte_carlo, sequence_rng, stream_id, MonteCarloSpec, MonteCarloTable, SequenceValue, ICRB_LABEL, XEB_LABEL,
};
pub use run::{
    sample_shots, weighted_survival_ccb, xeb_statistic, Observation, RunRecord, Shots, XebNormalization,
    XEB_DEGENERATE_TOL,
};
pub use state::{
    outcome_mask, parity_expectation, prepare_eigenstate, survival_zbasis, LiouvilleState,
    NEGATIVE_PROBABILITY_TOL,
};
