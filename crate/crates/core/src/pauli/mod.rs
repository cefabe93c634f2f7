//! Pauli group, single-qubit Cliffords, and Clifford tableaux.

mod clifford1;
mod irrep;
mod operator;
mod tableau;

pub use clifford1::{local_tableau, sample_local_clifford, SingleQubitClifford};
pub use irrep::{pauli_irrep_label, IrrepLabel};
pub use operator::{
    all_paulis, character, sample_pauli, symplectic_parity, PauliIndex, PauliOperator, MAX_QUBITS,
};
pub use tableau::{random_clifford, symplectic_group_order, CliffordTableau};
