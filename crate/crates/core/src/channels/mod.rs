//! Channel representations (PTM, Kraus, χ, Pauli diagonal), twirls and noise models.

pub mod diagonal;
pub mod io;
pub mod noise;
pub mod ops;
pub mod ptm;

pub(crate) use diagonal::fwht;
pub use diagonal::{
    ccb_fidelity_exact, chi_diag_from_lambdas, lambdas_from_chi_diag, local_clifford_twirl, symplectic_walsh,
    LocalCliffordEigenvalues, PauliDiagonal,
};
pub use io::ChannelDocument;
pub use noise::{
    correlation_unitary, damping_kraus, CorrelationSpec, DampingSpec, NoiseInstance, NoiseModel, NoiseOrder,
    PairStrength, PauliNoiseSpec, SpamInstance, SpamSpec,
};
pub use ops::{Local4, PtmOp};
pub use ptm::{
    average_fidelity, ptm_from_kraus, single_qubit_ptm, ChiMatrix, KrausChannel, PtmChannel, CPTP_TOL,
    ROUND_TRIP_TOL, STRUCTURAL_TOL,
};
