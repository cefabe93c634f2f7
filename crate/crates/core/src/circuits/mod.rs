//! Target gates, gauge frames, sequence sampling and physical realization.

pub mod gates;
pub mod plan;
pub mod realize;

pub use gates::{
    build_cnot, build_ctx, build_cz, build_five_qubit_encoder, build_identity, cyclic_number, parse_unitary,
    BenchmarkTarget, GateSpec, GaugeFrame, NamedGate,
};
pub use plan::{
    accumulated_pauli, cab_plan, ccb_plan, icrb_plan, icrb_plan_with_character, xeb_plan, PlanBody, Protocol,
    SequencePlan,
};
pub use realize::{factor_unitary, gate_unitary, realize, realize_explicit, sequence_unitary, Factor, GateNoise, PhysicalGate};
