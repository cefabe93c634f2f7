use super::ptm::{KrausChannel, PtmChannel};
use crate::error::{check_dim, Error, Result};
use crate::linalg::RMatrix;
use crate::pauli::{pauli_irrep_label, CliffordTableau, IrrepLabel, PauliIndex, PauliOperator};

/// Pauli fidelities λ_j (the diagonal of a Pauli channel's PTM).
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDiagonal {
    n: usize,
    lambdas: Vec<f64>,
}

/// Block eigenvalues γ_k of a local-Clifford-twirled channel, indexed by irrep mask.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCliffordEigenvalues {
    n: usize,
    gammas: Vec<f64>,
}

/// In-place Walsh–Hadamard transform over the bitwise inner product.
pub(crate) fn fwht(v: &mut [f64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Exchange the x and z bit of every qubit digit, turning the symplectic form into a bitwise dot.
fn swap_xz(i: usize) -> usize {
    const EVEN: usize = 0x5555_5555_5555_5555;
    ((i & EVEN) << 1) | ((i >> 1) & EVEN)
}

/// Σ_i (−1)^⟨i,j⟩ v_i for every j.
pub fn symplectic_walsh(v: &[f64]) -> Vec<f64> {
    let mut w = v.to_vec();
    fwht(&mut w);
    (0..v.len()).map(|j| w[swap_xz(j)]).collect()
}

/// Pauli error rates p (χ diagonal) from Pauli fidelities: p_j = 4⁻ⁿ Σ_i (−1)^⟨i,j⟩ λ_i.
pub fn chi_diag_from_lambdas(l: &PauliDiagonal) -> Vec<f64> {
    let scale = 1.0 / l.lambdas.len() as f64;
    symplectic_walsh(&l.lambdas).into_iter().map(|x| x * scale).collect()
}

/// Inverse of `chi_diag_from_lambdas`: λ_j = Σ_i (−1)^⟨i,j⟩ p_i.
pub fn lambdas_from_chi_diag(n: usize, p: &[f64]) -> Result<PauliDiagonal> {
    check_dim(1 << (2 * n), p.len())?;
    Ok(PauliDiagonal { n, lambdas: symplectic_walsh(p) })
}

impl PauliDiagonal {
    /// Requires λ_0 = 1 within tolerance.
    pub fn new(n: usize, lambdas: Vec<f64>) -> Result<Self> {
        check_dim(1 << (2 * n), lambdas.len())?;
        if (lambdas[0] - 1.0).abs() > super::ptm::STRUCTURAL_TOL {
            return Err(Error::NotCptp(format!("λ_0 = {} is not 1", lambdas[0])));
        }
        Ok(PauliDiagonal { n, lambdas })
    }

    pub(crate) fn from_lambdas_unchecked(n: usize, lambdas: Vec<f64>) -> Self {
        debug_assert_eq!(lambdas.len(), 1 << (2 * n));
        PauliDiagonal { n, lambdas }
    }

    pub fn identity(n: usize) -> Self {
        PauliDiagonal { n, lambdas: vec![1.0; 1 << (2 * n)] }
    }

    /// ρ ↦ pρ + (1 − p)I/d.
    pub fn depolarizing(n: usize, p: f64) -> Self {
        let mut lambdas = vec![p; 1 << (2 * n)];
        lambdas[0] = 1.0;
        PauliDiagonal { n, lambdas }
    }

    pub fn from_error_rates(n: usize, p: &[f64]) -> Result<Self> {
        lambdas_from_chi_diag(n, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, j: PauliIndex) -> f64 {
        self.lambdas[j.0]
    }

    pub fn error_rates(&self) -> Vec<f64> {
        chi_diag_from_lambdas(self)
    }

    /// CP iff every error rate is ≥ −tol.
    pub fn is_cp(&self, tol: f64) -> bool {
        self.error_rates().iter().all(|&p| p >= -tol)
    }

    pub fn process_fidelity(&self) -> f64 {
        self.lambdas.iter().sum::<f64>() / self.lambdas.len() as f64
    }

    pub fn to_ptm(&self) -> PtmChannel {
        PtmChannel::new(self.n, RMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.lambdas)))
            .expect("dimension fixed by construction")
    }

    /// Elementwise product (composition of Pauli channels).
    pub fn compose(&self, other: &PauliDiagonal) -> Result<PauliDiagonal> {
        check_dim(self.n, other.n)?;
        Ok(PauliDiagonal {
            n: self.n,
            lambdas: self.lambdas.iter().zip(&other.lambdas).map(|(a, b)| a * b).collect(),
        })
    }

    /// Kraus form {√p_j P_j}; tiny negative rates from round-off are dropped.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let ops = self
            .error_rates()
            .into_iter()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
            .map(|(j, p)| {
                PauliOperator::from_index(self.n, PauliIndex(j)).matrix() * num_complex::Complex64::new(p.sqrt(), 0.0)
            })
            .collect();
        KrausChannel::new(ops)
    }

    /// Fidelities of 𝒰⁻¹ΛU: entry j becomes λ_{u(j)}.
    pub fn permuted_by(&self, t: &CliffordTableau) -> Result<PauliDiagonal> {
        check_dim(self.n, t.n())?;
        let (targets, _) = t.signed_permutation();
        Ok(PauliDiagonal {
            n: self.n,
            lambdas: targets.iter().map(|&u| self.lambdas[u as usize]).collect(),
        })
    }
}

impl LocalCliffordEigenvalues {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn gamma(&self, label: IrrepLabel) -> f64 {
        self.gammas[label.mask() as usize]
    }

    /// Expand back to a Pauli diagonal (each Pauli gets its block value).
    pub fn to_pauli_diagonal(&self) -> PauliDiagonal {
        let dim = 1usize << (2 * self.n);
        let lambdas = (0..dim)
            .map(|j| self.gammas[pauli_irrep_label(self.n, PauliIndex(j)).mask() as usize])
            .collect();
        PauliDiagonal { n: self.n, lambdas }
    }
}

/// γ_k = mean of λ_j over the Paulis in block σ_k.
pub fn local_clifford_twirl(l: &PauliDiagonal) -> LocalCliffordEigenvalues {
    let n = l.n;
    let mut sums = vec![0.0; 1 << n];
    for (j, lam) in l.lambdas.iter().enumerate() {
        sums[pauli_irrep_label(n, PauliIndex(j)).mask() as usize] += lam;
    }
    let gammas = IrrepLabel::all(n)
        .map(|k| sums[k.mask() as usize] / k.dimension() as f64)
        .collect();
    LocalCliffordEigenvalues { n, gammas }
}

/// 4⁻ⁿ Σ_j √(ω_{u(j)} ω_j) for the Pauli-twirled fidelities ω and Clifford permutation u.
pub fn ccb_fidelity_exact(omega: &PauliDiagonal, t: &CliffordTableau) -> Result<f64> {
    let permuted = omega.permuted_by(t)?;
    let mut sum = 0.0;
    for (j, (a, b)) in permuted.lambdas.iter().zip(&omega.lambdas).enumerate() {
        let prod = a * b;
        if prod < 0.0 {
            return Err(Error::Numerical(format!(
                "negative composite Pauli fidelity {prod:.3e} at index {j}"
            )));
        }
        sum += prod.sqrt();
    }
    Ok(sum / omega.lambdas.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{symplectic_parity, SingleQubitClifford};

    #[test]
    fn walsh_matches_brute_force() {
        let v: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).cos()).collect();
        let fast = symplectic_walsh(&v);
        for j in 0..16 {
            let slow: f64 = (0..16)
                .map(|i| if symplectic_parity(i, j) == 0 { v[i] } else { -v[i] })
                .sum();
            assert!((fast[j] - slow).abs() < 1e-13);
        }
    }

    #[test]
    fn chi_diag_examples() {
        let p = chi_diag_from_lambdas(&PauliDiagonal::identity(2));
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1..].iter().all(|x| x.abs() < 1e-15));
        for n in 1..=3 {
            let q = 0.93;
            let p = chi_diag_from_lambdas(&PauliDiagonal::depolarizing(n, q));
            let d2 = (1usize << (2 * n)) as f64;
            assert!((p[0] - (1.0 + (d2 - 1.0) * q) / d2).abs() < 1e-14);
        }
        let l = PauliDiagonal::new(2, (0..16).map(|i| if i == 0 { 1.0 } else { 0.9 + 0.005 * i as f64 }).collect()).unwrap();
        let back = lambdas_from_chi_diag(2, &chi_diag_from_lambdas(&l)).unwrap();
        for (a, b) in back.lambdas().iter().zip(l.lambdas()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn local_twirl_block_means_and_exhaustive_n1() {
        let l = PauliDiagonal::new(1, vec![1.0, 0.9, 0.8, 0.7]).unwrap();
        let g = local_clifford_twirl(&l);
        assert!((g.gammas()[0] - 1.0).abs() < 1e-15);
        assert!((g.gammas()[1] - 0.8).abs() < 1e-15);
        // explicit average of 𝒞⁻¹Λ𝒞 over all 24 Cliffords
        let ptm = l.to_ptm();
        let mut acc = RMatrix::zeros(4, 4);
        for c in SingleQubitClifford::all() {
            let m = c.ptm();
            let cm = RMatrix::from_fn(4, 4, |r, k| m[r][k]);
            acc += cm.transpose() * ptm.matrix() * &cm;
        }
        acc /= 24.0;
        let expanded = g.to_pauli_diagonal().to_ptm();
        assert!(crate::linalg::real_max_abs_diff(&acc, expanded.matrix()) < 1e-14);
    }

    #[test]
    fn local_twirl_uses_documented_blocks() {
        // blocks {II}, {IX, IY, IZ}, {XI, YI, ZI}, {XX, …}
        let mut lambdas = vec![0.0; 16];
        for (j, lam) in lambdas.iter_mut().enumerate() {
            let label = pauli_irrep_label(2, PauliIndex(j));
            *lam = [1.0, 0.97, 0.95, 0.9][label.mask() as usize];
        }
        let g = local_clifford_twirl(&PauliDiagonal::new(2, lambdas).unwrap());
        let iz: crate::pauli::PauliOperator = "IZ".parse().unwrap();
        assert!((g.gamma(pauli_irrep_label(2, iz.index())) - 0.95).abs() < 1e-15);
        for (a, b) in g.gammas().iter().zip([1.0, 0.97, 0.95, 0.9]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn kraus_form_round_trips() {
        let l = PauliDiagonal::new(2, (0..16).map(|i| if i == 0 { 1.0 } else { 0.95 + 0.0005 * i as f64 }).collect()).unwrap();
        assert!(l.is_cp(1e-12));
        let back = l.to_kraus().unwrap().to_ptm();
        assert!(crate::linalg::real_max_abs_diff(back.matrix(), l.to_ptm().matrix()) < 1e-12);
    }

    #[test]
    fn ccb_exact_depolarizing_and_identity() {
        let t = CliffordTableau::from_unitary(&crate::linalg::cnot(), 1e-12).unwrap();
        let dep = PauliDiagonal::depolarizing(2, 0.95);
        assert!((ccb_fidelity_exact(&dep, &t).unwrap() - dep.process_fidelity()).abs() < 1e-14);
        let l = PauliDiagonal::new(2, (0..16).map(|i| if i == 0 { 1.0 } else { 0.9 + 0.004 * i as f64 }).collect()).unwrap();
        let id = CliffordTableau::identity(2);
        assert!((ccb_fidelity_exact(&l, &id).unwrap() - l.process_fidelity()).abs() < 1e-14);
        assert!(ccb_fidelity_exact(&l, &t).unwrap() <= l.process_fidelity() + 1e-15);
        let mut neg = l.lambdas().to_vec();
        neg[5] = -0.2;
        let neg = PauliDiagonal::new(2, neg).unwrap();
        assert!(matches!(ccb_fidelity_exact(&neg, &t), Err(Error::Numerical(_))));
    }
}
