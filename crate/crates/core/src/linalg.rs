//! Small dense complex-matrix helpers shared by the channel and circuit code.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cmatrix(rows: usize, cols: usize, entries: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, entries)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

/// Largest entry of |U†U − I|.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let d = u.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for col in 0..d {
            let target = if r == col { ONE } else { ZERO };
            worst = worst.max((prod[(r, col)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn real_max_abs_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Distance between two unitaries modulo a global phase.
pub fn phase_insensitive_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    if overlap.norm() < 1e-300 {
        return f64::INFINITY;
    }
    let phase = overlap / overlap.norm();
    max_abs_diff(&(a * phase), b)
}

/// Embed a 2×2 operator on qubit `q` of an `n`-qubit register (qubit 0 is the most significant bit).
pub fn embed_single(op: &CMatrix, q: usize, n: usize) -> CMatrix {
    let factors: Vec<CMatrix> = (0..n)
        .map(|k| if k == q { op.clone() } else { identity(2) })
        .collect();
    kron_all(&factors)
}

/// Embed a 4×4 operator acting on qubits (q1, q2), q1 taken as the high bit of the local index.
pub fn embed_pair(op: &CMatrix, q1: usize, q2: usize, n: usize) -> CMatrix {
    assert!(q1 != q2 && q1 < n && q2 < n);
    let d = 1usize << n;
    let b1 = n - 1 - q1;
    let b2 = n - 1 - q2;
    let mut out = CMatrix::zeros(d, d);
    for col in 0..d {
        let lc = (((col >> b1) & 1) << 1) | ((col >> b2) & 1);
        let rest = col & !((1 << b1) | (1 << b2));
        for lr in 0..4 {
            let v = op[(lr, lc)];
            if v == ZERO {
                continue;
            }
            let row = rest | (((lr >> 1) & 1) << b1) | ((lr & 1) << b2);
            out[(row, col)] += v;
        }
    }
    out
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    cmatrix(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn phase_s() -> CMatrix {
    cmatrix(2, 2, &[ONE, ZERO, ZERO, I])
}

/// Rz-type phase gate diag(1, e^{iθ}).
pub fn phase_gate(theta: f64) -> CMatrix {
    cmatrix(2, 2, &[ONE, ZERO, ZERO, Complex64::from_polar(1.0, theta)])
}

/// exp(−iθZ/2).
pub fn rz(theta: f64) -> CMatrix {
    cmatrix(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -theta / 2.0),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, theta / 2.0),
        ],
    )
}

pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn cz() -> CMatrix {
    let mut m = identity(4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

pub fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// Haar-random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMatrix::from_fn(d, d, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.clone();
    for col in 0..d {
        let rd = r[(col, col)];
        let ph = if rd.norm() > 0.0 { rd / rd.norm() } else { ONE };
        for row in 0..d {
            out[(row, col)] = q[(row, col)] * ph;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_pair_matches_kron_for_adjacent_qubits() {
        let cx = cnot();
        let full = kron(&cx, &identity(2));
        assert!(max_abs_diff(&embed_pair(&cx, 0, 1, 3), &full) < 1e-15);
        // control on qubit 1, target on qubit 0
        let reversed = embed_pair(&cx, 1, 0, 2);
        let h2 = kron(&hadamard(), &hadamard());
        assert!(max_abs_diff(&reversed, &(&h2 * cx * &h2)) < 1e-14);
    }

    #[test]
    fn random_unitary_is_unitary() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in [2, 4, 8] {
            assert!(unitarity_defect(&random_unitary(d, &mut rng)) < 1e-12);
        }
    }
}
