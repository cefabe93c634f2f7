use num_complex::Complex64;

use super::diagonal::PauliDiagonal;
use super::ops::{Local4, PtmOp};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{unitarity_defect, CMatrix, RMatrix};
use crate::pauli::{PauliIndex, PauliOperator};

pub const CPTP_TOL: f64 = 1e-8;
pub const STRUCTURAL_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-10;

/// Channel in the Liouville (normalized Pauli) basis: entry (i, j) = Tr(σ_i Λ(σ_j)), σ = P/√d.
#[derive(Clone, Debug, PartialEq)]
pub struct PtmChannel {
    n: usize,
    matrix: RMatrix,
}

/// Kraus form {K_l} with Σ K_l†K_l = I.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<CMatrix>,
}

/// χ matrix in the Pauli basis, normalized so that Tr χ = 1 for trace-preserving channels
/// and χ_00 is the process fidelity.
#[derive(Clone, Debug)]
pub struct ChiMatrix {
    n: usize,
    matrix: CMatrix,
}

fn pauli_dim(n: usize) -> usize {
    1usize << (2 * n)
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::NotCptp("empty Kraus set".into()))?;
        let d = first.nrows();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::DimensionMismatch { expected: d.next_power_of_two().max(2), found: d });
        }
        for k in &ops {
            check_dim(d, k.nrows())?;
            check_dim(d, k.ncols())?;
        }
        let ch = KrausChannel { n: d.trailing_zeros() as usize, ops };
        let defect = ch.completeness_defect();
        if defect > CPTP_TOL {
            return Err(Error::NotCptp(format!("Σ K†K deviates from identity by {defect:.3e}")));
        }
        Ok(ch)
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        let defect = unitarity_defect(&u);
        if defect > CPTP_TOL {
            return Err(Error::NotUnitary(defect));
        }
        KrausChannel::new(vec![u])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn completeness_defect(&self) -> f64 {
        let d = 1usize << self.n;
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        (sum - CMatrix::identity(d, d)).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        check_dim(self.n, other.n)?;
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a * b);
            }
        }
        Ok(KrausChannel { n: self.n, ops })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        self.ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint())
    }

    pub fn to_ptm(&self) -> PtmChannel {
        ptm_from_kraus(self)
    }

    pub fn to_chi(&self) -> ChiMatrix {
        let n = self.n;
        let dim = pauli_dim(n);
        let d = (1usize << n) as f64;
        let mut chi = CMatrix::zeros(dim, dim);
        for k in &self.ops {
            let coeffs: Vec<Complex64> = (0..dim)
                .map(|i| pauli_trace(&PauliOperator::from_index(n, PauliIndex(i)), k) / d)
                .collect();
            for i in 0..dim {
                for j in 0..dim {
                    chi[(i, j)] += coeffs[i] * coeffs[j].conj();
                }
            }
        }
        ChiMatrix { n, matrix: chi }
    }
}

/// Tr(P·M) using the monomial structure of P.
fn pauli_trace(p: &PauliOperator, m: &CMatrix) -> Complex64 {
    let (flip, phases) = p.monomial();
    (0..m.nrows()).map(|r| phases[r] * m[(r, r ^ flip)]).sum()
}

/// PTM entry (i, j) = (1/d)·Σ_l Tr(P_i K_l P_j K_l†).
pub fn ptm_from_kraus(k: &KrausChannel) -> PtmChannel {
    let n = k.n;
    let d = 1usize << n;
    let dim = pauli_dim(n);
    let paulis: Vec<PauliOperator> = (0..dim).map(|i| PauliOperator::from_index(n, PauliIndex(i))).collect();
    let monomials: Vec<(usize, Vec<Complex64>)> = paulis.iter().map(|p| p.monomial()).collect();
    let mut out = RMatrix::zeros(dim, dim);
    let mut kp = CMatrix::zeros(d, d);
    for j in 0..dim {
        let (flip, phases) = &monomials[j];
        let mut image = CMatrix::zeros(d, d);
        for kraus in &k.ops {
            // (K P_j)[a][c] = K[a][c ⊕ flip]·phase[c]
            for a in 0..d {
                for col in 0..d {
                    kp[(a, col)] = kraus[(a, col ^ flip)] * phases[col];
                }
            }
            image += &kp * kraus.adjoint();
        }
        for (i, (fi, ph)) in monomials.iter().enumerate() {
            let tr: Complex64 = (0..d).map(|r| ph[r] * image[(r, r ^ fi)]).sum();
            out[(i, j)] = tr.re / d as f64;
        }
    }
    PtmChannel { n, matrix: out }
}

/// 4×4 PTM of a single-qubit unitary in (I, X, Z, Y) order.
pub fn single_qubit_ptm(u: &CMatrix) -> Local4 {
    let p = ptm_from_kraus(&KrausChannel { n: 1, ops: vec![u.clone()] });
    let mut m = [[0.0; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = p.matrix[(r, c)];
        }
    }
    m
}

impl PtmChannel {
    pub fn new(n: usize, matrix: RMatrix) -> Result<Self> {
        check_dim(pauli_dim(n), matrix.nrows())?;
        check_dim(pauli_dim(n), matrix.ncols())?;
        Ok(PtmChannel { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        let dim = pauli_dim(n);
        PtmChannel { n, matrix: RMatrix::identity(dim, dim) }
    }

    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        Ok(ptm_from_kraus(&KrausChannel::unitary(u.clone())?))
    }

    /// PTM of ⊗_q L_q.
    pub fn from_local_unitaries(factors: &[CMatrix]) -> Result<Self> {
        let blocks = local_blocks(factors)?;
        Ok(PtmChannel { n: factors.len(), matrix: super::ops::local_to_matrix(&blocks) })
    }

    pub fn from_op(n: usize, op: &PtmOp) -> Self {
        PtmChannel { n, matrix: op.to_matrix(pauli_dim(n)) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMatrix {
        self.matrix
    }

    /// self ∘ other (other acts first).
    pub fn compose(&self, other: &PtmChannel) -> Result<PtmChannel> {
        check_dim(self.n, other.n)?;
        Ok(PtmChannel { n: self.n, matrix: &self.matrix * &other.matrix })
    }

    /// χ_00 = 4⁻ⁿ·Tr(PTM).
    pub fn process_fidelity(&self) -> f64 {
        self.matrix.trace() / self.dim() as f64
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).collect()
    }

    /// Largest deviation of row 0 from (1, 0, …, 0).
    pub fn trace_preservation_defect(&self) -> f64 {
        (0..self.dim())
            .map(|c| (self.matrix[(0, c)] - if c == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    /// Pauli twirl: keeps only the diagonal.
    pub fn pauli_twirl(&self) -> PauliDiagonal {
        PauliDiagonal::from_lambdas_unchecked(self.n, self.diagonal())
    }

    /// (1/4ⁿ)·Σ_P 𝒫⁻¹Λ𝒫 summed term by term; a cross-check for `pauli_twirl`.
    pub fn pauli_twirl_explicit(&self) -> PtmChannel {
        let dim = self.dim();
        let mut acc = RMatrix::zeros(dim, dim);
        for p in 0..dim {
            let s: Vec<f64> = (0..dim)
                .map(|i| if crate::pauli::symplectic_parity(i, p) == 0 { 1.0 } else { -1.0 })
                .collect();
            for i in 0..dim {
                for j in 0..dim {
                    acc[(i, j)] += s[i] * self.matrix[(i, j)] * s[j];
                }
            }
        }
        PtmChannel { n: self.n, matrix: acc / dim as f64 }
    }

    /// PTM of ℒ⁻¹Λℒ for L = ⊗ factors.
    pub fn gauge_conjugate(&self, factors: &[CMatrix]) -> Result<PtmChannel> {
        check_dim(self.n, factors.len())?;
        let l = PtmChannel::from_local_unitaries(factors)?;
        // Local unitary PTMs are orthogonal.
        Ok(PtmChannel { n: self.n, matrix: l.matrix.transpose() * &self.matrix * &l.matrix })
    }

    pub fn op(&self) -> PtmOp {
        PtmOp::dense(&self.matrix)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec()
    }
}

pub(crate) fn local_blocks(factors: &[CMatrix]) -> Result<Vec<Local4>> {
    factors
        .iter()
        .map(|f| {
            if f.shape() != (2, 2) {
                return Err(Error::DimensionMismatch { expected: 2, found: f.nrows() });
            }
            let defect = unitarity_defect(f);
            if defect > CPTP_TOL {
                return Err(Error::NotUnitary(defect));
            }
            Ok(single_qubit_ptm(f))
        })
        .collect()
}

impl ChiMatrix {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        check_dim(pauli_dim(n), matrix.nrows())?;
        check_dim(pauli_dim(n), matrix.ncols())?;
        Ok(ChiMatrix { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Average gate fidelity from process fidelity: (dF + 1)/(d + 1).
pub fn average_fidelity(process_fidelity: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * process_fidelity + 1.0) / (d + 1.0)
}
