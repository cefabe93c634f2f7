//! Independent density-matrix simulator used as an oracle for the PTM pipeline.

use crate::channels::NoiseInstance;
use crate::circuits::{gate_unitary, realize, BenchmarkTarget, GateNoise, PlanBody, SequencePlan};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::PauliOperator;

use super::state::{prepare_eigenstate, LiouvilleState};

/// Final density matrix of a plan run with Kraus-level noise. Plans with tableau-only
/// Clifford factors (ICRB) are not supported.
pub fn evolve_density(
    plan: &SequencePlan,
    target: &BenchmarkTarget,
    noise: &NoiseInstance,
    initial: &CMatrix,
) -> Result<CMatrix> {
    let n = target.n();
    let lambda_t = noise.target_kraus()?;
    let lambda_ref = noise.reference().to_kraus()?;
    let mut rho = noise.spam().prep_kraus(n)?.apply(initial);
    for g in realize(plan, target) {
        let u = gate_unitary(&g, target)
            .ok_or_else(|| Error::Config("density oracle needs dense gates".into()))?;
        if g.noise == GateNoise::TargetBefore {
            rho = lambda_t.apply(&rho);
        }
        rho = &u * rho * u.adjoint();
        if g.noise == GateNoise::ReferenceAfter {
            rho = lambda_ref.apply(&rho);
        }
    }
    Ok(noise.spam().meas_kraus(n)?.apply(&rho))
}

/// Initial density matrix the PTM simulator would use for this plan.
pub fn initial_density(plan: &SequencePlan, observable: Option<&PauliOperator>) -> CMatrix {
    match (&plan.body, observable) {
        (PlanBody::Ccb { .. }, Some(j)) => prepare_eigenstate(j).to_density(),
        _ => LiouvilleState::zero(plan.n).to_density(),
    }
}

/// Tr(P ρ) on a dense density matrix.
pub fn dense_expectation(rho: &CMatrix, p: &PauliOperator) -> f64 {
    (p.matrix() * rho).trace().re
}
