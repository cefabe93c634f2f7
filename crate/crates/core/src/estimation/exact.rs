//! Exact reference values computed from the constructed channels.

use crate::channels::{ccb_fidelity_exact, NoiseInstance, PauliDiagonal, PtmChannel};
use crate::circuits::BenchmarkTarget;
use crate::error::Result;
use crate::pauli::{pauli_irrep_label, IrrepLabel, PauliIndex, PauliOperator};

/// Per-layer noise seen by the Clifford core: L, Λ_ref, Λ_t, L⁻¹ in time order.
pub fn core_layer_channel(target: &BenchmarkTarget, noise: &NoiseInstance) -> Result<PtmChannel> {
    let layer = noise.target_ptm().compose(&noise.reference().to_ptm())?;
    if target.frame().is_trivial() {
        return Ok(layer);
    }
    let l = PtmChannel::from_local_unitaries(target.frame().factors())?;
    let l_inv = PtmChannel::from_local_unitaries(&target.frame().inverse_factors())?;
    l_inv.compose(&layer)?.compose(&l)
}

/// Pauli-twirled per-layer fidelities ω_j in the core frame.
pub fn core_layer_twirl(target: &BenchmarkTarget, noise: &NoiseInstance) -> Result<PauliDiagonal> {
    if target.frame().is_trivial() {
        return Ok(noise.layer_twirl());
    }
    Ok(core_layer_channel(target, noise)?.pauli_twirl())
}

/// F(Λ_t ∘ Λ_ref); unchanged by the gauge frame.
pub fn exact_process_fidelity(noise: &NoiseInstance) -> f64 {
    noise.layer_fidelity()
}

/// √(ω_j ω_{u(j)}) for every Pauli j.
pub fn cycle_fidelities(target: &BenchmarkTarget, noise: &NoiseInstance) -> Result<Vec<f64>> {
    let omega = core_layer_twirl(target, noise)?;
    let permuted = omega.permuted_by(target.core_tableau()?)?;
    Ok(omega.lambdas().iter().zip(permuted.lambdas()).map(|(a, b)| (a * b).max(0.0).sqrt()).collect())
}

pub fn exact_ccb_fidelity(target: &BenchmarkTarget, noise: &NoiseInstance) -> Result<f64> {
    ccb_fidelity_exact(&core_layer_twirl(target, noise)?, target.core_tableau()?)
}

/// Sequence-averaged CAB expectation of Q_k at depth m:
/// s_k · r_k · |σ_k|⁻¹ Σ_{j∈σ_k} r_j λ_j^{2m}, where r is the reference twirl and s_k the
/// SPAM attenuation of Q_k.
pub fn exact_cab_survival(target: &BenchmarkTarget, noise: &NoiseInstance, label: IrrepLabel, m: usize) -> Result<f64> {
    let n = target.n();
    let dim = 1usize << (2 * n);
    let lambdas = cycle_fidelities(target, noise)?;
    let r = noise.reference().lambdas();
    let mut block = 0.0;
    for j in 0..dim {
        if pauli_irrep_label(n, PauliIndex(j)) == label {
            block += r[j] * lambdas[j].powi(2 * m as i32);
        }
    }
    block /= label.dimension() as f64;
    let q = label.observable().index().0;
    let prep = noise.spam().prep_op(n).diagonal(dim)[q];
    let meas = noise.spam().meas_op().diagonal(dim)[q];
    Ok(prep * meas * r[q] * block)
}

/// Label set {I, Z}ⁿ ordered by Z-mask.
pub fn z_labels(n: usize) -> Vec<PauliOperator> {
    IrrepLabel::all(n).map(|k| k.observable()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{CorrelationSpec, DampingSpec, NoiseModel, PauliNoiseSpec};
    use crate::circuits::{build_ctx, build_cz};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx_noise(seed: u64) -> NoiseInstance {
        let model = NoiseModel {
            pauli: PauliNoiseSpec::Normal { mean: 0.96, std: 0.005 },
            damping: DampingSpec::Uniform { alpha: 0.005 },
            correlation: CorrelationSpec::Uniform { beta: 0.01 },
            ..NoiseModel::default()
        };
        model.build(2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn frame_leaves_process_fidelity_unchanged() {
        let noise = ctx_noise(3);
        let ch = core_layer_channel(&build_ctx(), &noise).unwrap();
        assert!((ch.process_fidelity() - exact_process_fidelity(&noise)).abs() < 1e-12);
    }

    #[test]
    fn ccb_below_process_fidelity() {
        for seed in 0..5 {
            let noise = ctx_noise(seed);
            let f = exact_process_fidelity(&noise);
            let ccb = exact_ccb_fidelity(&build_ctx(), &noise).unwrap();
            assert!(ccb <= f + 1e-12);
            let lam = cycle_fidelities(&build_ctx(), &noise).unwrap();
            assert!((lam.iter().sum::<f64>() / 16.0 - ccb).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_cab_survival_is_one() {
        let noise = NoiseInstance::ideal(2);
        for k in IrrepLabel::all(2) {
            assert!((exact_cab_survival(&build_cz(), &noise, k, 4).unwrap() - 1.0).abs() < 1e-15);
        }
        let labels: Vec<String> = z_labels(2).iter().map(|p| p.label()).collect();
        assert_eq!((labels.len(), labels[0].as_str(), labels[3].as_str()), (4, "II", "ZZ"));
    }
}
