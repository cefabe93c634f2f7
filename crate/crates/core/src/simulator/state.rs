//! Liouville vectors and computational/product-basis readout.
//!
//! Component i stores Tr(P_i ρ)/√d, so the identity component of any state is 1/√d and the
//! PTM acts on the vector by plain multiplication.

use crate::channels::fwht;
use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{PauliIndex, PauliOperator};

/// Readout probabilities below this are float noise and are clamped to zero.
pub const NEGATIVE_PROBABILITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleState {
    n: usize,
    vector: Vec<f64>,
}

/// Bloch vector (I, X, Z, Y components) of the +1 eigenstate of a single-qubit Pauli digit.
fn eigen_bloch(digit: usize) -> [f64; 4] {
    match digit {
        1 => [1.0, 1.0, 0.0, 0.0],
        3 => [1.0, 0.0, 0.0, 1.0],
        _ => [1.0, 0.0, 1.0, 0.0],
    }
}

impl LiouvilleState {
    pub fn new(n: usize, vector: Vec<f64>) -> Result<Self> {
        check_dim(1 << (2 * n), vector.len())?;
        Ok(LiouvilleState { n, vector })
    }

    /// Product state with per-qubit Bloch vectors in the (I, X, Z, Y) order.
    pub fn product(blochs: &[[f64; 4]]) -> Self {
        let n = blochs.len();
        let scale = 1.0 / ((1usize << n) as f64).sqrt();
        let mut v = vec![scale];
        for b in blochs {
            v = v.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect();
        }
        LiouvilleState { n, vector: v }
    }

    /// |0…0⟩.
    pub fn zero(n: usize) -> Self {
        LiouvilleState::product(&vec![eigen_bloch(2); n])
    }

    pub fn from_density(rho: &CMatrix) -> Result<Self> {
        let d = rho.nrows();
        if d < 2 || !d.is_power_of_two() || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d.next_power_of_two().max(2), found: rho.ncols() });
        }
        let n = d.trailing_zeros() as usize;
        let scale = 1.0 / (d as f64).sqrt();
        let vector = (0..1usize << (2 * n))
            .map(|i| (PauliOperator::from_index(n, PauliIndex(i)).matrix() * rho).trace().re * scale)
            .collect();
        Ok(LiouvilleState { n, vector })
    }

    pub fn to_density(&self) -> CMatrix {
        let d = 1usize << self.n;
        let scale = 1.0 / (d as f64).sqrt();
        let mut rho = CMatrix::zeros(d, d);
        for (i, &v) in self.vector.iter().enumerate() {
            if v != 0.0 {
                rho += PauliOperator::from_index(self.n, PauliIndex(i)).matrix() * crate::linalg::c(v * scale, 0.0);
            }
        }
        rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn vector_mut(&mut self) -> &mut Vec<f64> {
        &mut self.vector
    }

    /// Tr(P_i ρ).
    pub fn expectation(&self, i: PauliIndex) -> f64 {
        self.vector[i.0] * ((1usize << self.n) as f64).sqrt()
    }

    /// Outcome probabilities when qubit q is measured in the eigenbasis of `basis` digit q
    /// (Z where the digit is I). Outcome bit for qubit q is bit n−1−q of the index, and
    /// outcome 0 is the +1 eigenvector.
    pub fn probabilities(&self, basis: &PauliOperator) -> Result<Vec<f64>> {
        check_dim(self.n, basis.n())?;
        let n = self.n;
        let d = 1usize << n;
        let digits: Vec<usize> = (0..n).map(|q| if basis.digit(q) == 0 { 2 } else { basis.digit(q) }).collect();
        let root_d = (d as f64).sqrt();
        let mut g: Vec<f64> = (0..d)
            .map(|s| {
                let idx: usize = (0..n)
                    .filter(|&q| s >> (n - 1 - q) & 1 == 1)
                    .map(|q| digits[q] << (2 * (n - 1 - q)))
                    .sum();
                self.vector[idx] * root_d
            })
            .collect();
        fwht(&mut g);
        let mut total = 0.0;
        for p in g.iter_mut() {
            *p /= d as f64;
            if *p < -NEGATIVE_PROBABILITY_TOL {
                return Err(Error::Numerical(format!("outcome probability {p:.3e} is negative")));
            }
            *p = p.max(0.0);
            total += *p;
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("outcome probabilities sum to {total}")));
        }
        Ok(g)
    }
}

/// +1 eigenstate of P: |0⟩ for Z or I, |+⟩ for X, |+i⟩ for Y on each qubit.
pub fn prepare_eigenstate(p: &PauliOperator) -> LiouvilleState {
    let blochs: Vec<[f64; 4]> = (0..p.n()).map(|q| eigen_bloch(p.digit(q))).collect();
    LiouvilleState::product(&blochs)
}

/// Outcome-bit mask (bit n−1−q for qubit q) of the support of a Pauli.
pub fn outcome_mask(p: &PauliOperator) -> usize {
    let n = p.n();
    (0..n).filter(|&q| p.digit(q) != 0).map(|q| 1usize << (n - 1 - q)).sum()
}

/// Σ_z (−1)^{|z ∧ mask|} p_z: the expectation of the parity over `mask`.
pub fn parity_expectation(probabilities: &[f64], mask: usize) -> f64 {
    probabilities
        .iter()
        .enumerate()
        .map(|(z, p)| if (z & mask).count_ones() % 2 == 0 { *p } else { -*p })
        .sum()
}

/// Survival value f_k of an observable made of I and Z factors from Z-basis probabilities.
pub fn survival_zbasis(probabilities: &[f64], k: &PauliOperator) -> Result<f64> {
    if k.x_bits() != 0 {
        return Err(Error::Parse(format!("{} is not an I/Z observable", k.label())));
    }
    check_dim(1 << k.n(), probabilities.len())?;
    Ok(parity_expectation(probabilities, outcome_mask(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::pauli::{all_paulis, sample_pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn zero_state_components() {
        let s = LiouvilleState::zero(2);
        let d = s.to_density();
        assert!((d[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((s.vector()[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.probabilities(&p("ZZ")).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn eigenstates_are_fixed_by_their_pauli() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let pauli = sample_pauli(&mut rng, 3);
            let rho = prepare_eigenstate(&pauli).to_density();
            let m = pauli.matrix();
            assert!(max_abs_diff(&(&m * &rho), &rho) < 1e-12);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_round_trip() {
        let s = prepare_eigenstate(&p("XYZ"));
        let back = LiouvilleState::from_density(&s.to_density()).unwrap();
        assert!(s.vector().iter().zip(back.vector()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn probabilities_match_dense_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = crate::linalg::random_unitary(4, &mut rng);
        let psi0 = LiouvilleState::zero(2).to_density();
        let rho = &u * psi0 * u.adjoint();
        let state = LiouvilleState::from_density(&rho).unwrap();
        let probs = state.probabilities(&p("ZZ")).unwrap();
        for (z, pz) in probs.iter().enumerate() {
            assert!((pz - rho[(z, z)].re).abs() < 1e-12);
        }
        for k in all_paulis(2).filter(|k| k.x_bits() == 0) {
            let direct = (k.matrix() * &rho).trace().re;
            assert!((survival_zbasis(&probs, &k).unwrap() - direct).abs() < 1e-12);
        }
        // rotated basis: parity over the support equals ⟨P⟩
        let basis = p("XY");
        let probs = state.probabilities(&basis).unwrap();
        let direct = (basis.matrix() * &rho).trace().re;
        assert!((parity_expectation(&probs, outcome_mask(&basis)) - direct).abs() < 1e-12);
    }

    #[test]
    fn survival_edge_cases() {
        let mut probs = vec![0.0; 4];
        probs[2] = 1.0; // qubit 0 flipped
        assert_eq!(survival_zbasis(&probs, &p("II")).unwrap(), 1.0);
        assert_eq!(survival_zbasis(&probs, &p("ZI")).unwrap(), -1.0);
        assert_eq!(survival_zbasis(&probs, &p("IZ")).unwrap(), 1.0);
        assert!(survival_zbasis(&probs, &p("XI")).is_err());
    }
}
