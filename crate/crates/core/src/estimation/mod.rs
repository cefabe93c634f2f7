//! Decay fitting, fidelity aggregation and confidence bounds.

pub mod exact;
pub mod fidelity;
pub mod fit;
pub mod ratio;

pub use exact::{
    core_layer_channel, core_layer_twirl, cycle_fidelities, exact_cab_survival, exact_ccb_fidelity,
    exact_process_fidelity, z_labels,
};
pub use fidelity::{
    cab_fidelity, ccb_fidelity, depolarizing_fidelity, estimate_from_table, icrb_fidelity, xeb_fidelity, Component,
    FidelityEstimate, TableEstimate,
};
pub use fit::{fit_decay, fit_decay_weighted, fit_offset_decay, fit_rb_decay, DecayFit, OffsetDecayFit};
pub use ratio::{
    bias_bound, bias_bound_checked, confidence_report, epsilons_for_delta, m_max, ratio_estimate, BiasBound,
    BiasInputs, ConfidenceInputs, ConfidenceReport, DepthMean, DepthRule, RatioConvention,
};
