use std::fmt;
use std::sync::OnceLock;

use rand::Rng;

use super::operator::{PauliIndex, PauliOperator};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{unitarity_defect, CMatrix};

/// Clifford conjugation action stored as signed images of X_q and Z_q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "TableauImages", into = "TableauImages")]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliOperator>,
    z_images: Vec<PauliOperator>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct TableauImages {
    x: Vec<PauliOperator>,
    z: Vec<PauliOperator>,
}

impl From<CliffordTableau> for TableauImages {
    fn from(t: CliffordTableau) -> Self {
        TableauImages { x: t.x_images, z: t.z_images }
    }
}

impl TryFrom<TableauImages> for CliffordTableau {
    type Error = Error;

    fn try_from(t: TableauImages) -> Result<Self> {
        CliffordTableau::from_images(t.x, t.z)
    }
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau {
            n,
            x_images: (0..n).map(|q| PauliOperator::single(n, q, 1)).collect(),
            z_images: (0..n).map(|q| PauliOperator::single(n, q, 2)).collect(),
        }
    }

    /// Builds a tableau from generator images, checking Hermiticity and the symplectic relations.
    pub fn from_images(x_images: Vec<PauliOperator>, z_images: Vec<PauliOperator>) -> Result<Self> {
        let n = x_images.len();
        check_dim(n, z_images.len())?;
        for img in x_images.iter().chain(z_images.iter()) {
            check_dim(n, img.n())?;
            if img.sign().is_none() {
                return Err(Error::NotClifford(format!("non-Hermitian generator image {img}")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let xx = x_images[a].commute(&x_images[b])?;
                let zz = z_images[a].commute(&z_images[b])?;
                let xz = x_images[a].commute(&z_images[b])?;
                let want = u32::from(a == b);
                if xx != 0 || zz != 0 || xz != want {
                    return Err(Error::NotClifford("generator images violate symplectic relations".into()));
                }
            }
        }
        Ok(CliffordTableau { n, x_images, z_images })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, q: usize) -> &PauliOperator {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliOperator {
        &self.z_images[q]
    }

    /// U p U† including sign, composed from generator images.
    pub fn conjugate_pauli(&self, p: &PauliOperator) -> Result<PauliOperator> {
        check_dim(self.n, p.n())?;
        let mut out = PauliOperator::identity(self.n).with_phase(p.phase_exp());
        for q in 0..self.n {
            let d = p.digit(q);
            if d & 1 == 1 {
                out = out.mul(&self.x_images[q])?;
            }
            if d & 2 == 2 {
                out = out.mul(&self.z_images[q])?;
            }
            if d == 3 {
                // Y = i·X·Z
                out = out.with_phase(out.phase_exp() + 1);
            }
        }
        Ok(out)
    }

    /// self ∘ other: apply `other` first.
    pub fn compose(&self, other: &CliffordTableau) -> Result<CliffordTableau> {
        check_dim(self.n, other.n)?;
        let xs = other
            .x_images
            .iter()
            .map(|p| self.conjugate_pauli(p))
            .collect::<Result<Vec<_>>>()?;
        let zs = other
            .z_images
            .iter()
            .map(|p| self.conjugate_pauli(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(CliffordTableau { n: self.n, x_images: xs, z_images: zs })
    }

    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        // Unsigned preimages from the symplectic inverse: the preimage of generator g has
        // x-part bits equal to ⟨image(Z_q), g⟩ and z-part bits ⟨image(X_q), g⟩.
        let preimage = |g: &PauliOperator| -> PauliOperator {
            let (mut x, mut z) = (0u64, 0u64);
            for q in 0..n {
                if self.z_images[q].commute(g).unwrap() == 1 {
                    x |= 1 << q;
                }
                if self.x_images[q].commute(g).unwrap() == 1 {
                    z |= 1 << q;
                }
            }
            let unsigned = PauliOperator::new(n, x, z);
            let image = self.conjugate_pauli(&unsigned).unwrap();
            debug_assert_eq!(image.stripped(), g.stripped());
            if image.phase_exp() == g.phase_exp() {
                unsigned
            } else {
                unsigned.negated()
            }
        };
        let xs = (0..n).map(|q| preimage(&PauliOperator::single(n, q, 1))).collect();
        let zs = (0..n).map(|q| preimage(&PauliOperator::single(n, q, 2))).collect();
        CliffordTableau { n, x_images: xs, z_images: zs }
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordTableau::identity(self.n)
    }

    /// Action on the normalized Pauli basis: column i of the PTM has `signs[i]` at row `targets[i]`.
    pub fn signed_permutation(&self) -> (Vec<u32>, Vec<f64>) {
        let dim = 1usize << (2 * self.n);
        let mut targets = Vec::with_capacity(dim);
        let mut signs = Vec::with_capacity(dim);
        for i in 0..dim {
            let img = self
                .conjugate_pauli(&PauliOperator::from_index(self.n, PauliIndex(i)))
                .expect("dimensions match");
            targets.push(img.index().0 as u32);
            signs.push(img.sign().expect("Hermitian image"));
        }
        (targets, signs)
    }

    /// Tableau of a unitary, or NotClifford if some generator image is not a signed Pauli.
    pub fn from_unitary(u: &CMatrix, tol: f64) -> Result<CliffordTableau> {
        let d = u.nrows();
        if d != u.ncols() || !d.is_power_of_two() || d < 2 {
            return Err(Error::DimensionMismatch { expected: d.next_power_of_two().max(2), found: u.ncols() });
        }
        let defect = unitarity_defect(u);
        if defect > tol {
            return Err(Error::NotUnitary(defect));
        }
        let n = d.trailing_zeros() as usize;
        let image = |g: PauliOperator| -> Result<PauliOperator> {
            let m = u * g.matrix() * u.adjoint();
            decompose_signed_pauli(&m, n, tol)
                .ok_or_else(|| Error::NotClifford(format!("image of {} is not a signed Pauli", g.label())))
        };
        let xs = (0..n).map(|q| image(PauliOperator::single(n, q, 1))).collect::<Result<Vec<_>>>()?;
        let zs = (0..n).map(|q| image(PauliOperator::single(n, q, 2))).collect::<Result<Vec<_>>>()?;
        CliffordTableau::from_images(xs, zs)
    }

    /// Tensor product of tableaux, `self` on the leading qubits.
    pub fn tensor(&self, other: &CliffordTableau) -> CliffordTableau {
        let n = self.n + other.n;
        let shift = |p: &PauliOperator, offset: usize| {
            PauliOperator::new(n, p.x_bits() << offset, p.z_bits() << offset).with_phase(p.phase_exp())
        };
        let mut xs: Vec<_> = self.x_images.iter().map(|p| shift(p, 0)).collect();
        let mut zs: Vec<_> = self.z_images.iter().map(|p| shift(p, 0)).collect();
        xs.extend(other.x_images.iter().map(|p| shift(p, self.n)));
        zs.extend(other.z_images.iter().map(|p| shift(p, self.n)));
        CliffordTableau { n, x_images: xs, z_images: zs }
    }
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            writeln!(f, "X{q} -> {}", self.x_images[q])?;
            writeln!(f, "Z{q} -> {}", self.z_images[q])?;
        }
        Ok(())
    }
}

/// Finds ±P with m ≈ ±P, if any.
fn decompose_signed_pauli(m: &CMatrix, n: usize, tol: f64) -> Option<PauliOperator> {
    let d = 1usize << n;
    // The x-part is fixed by where the first basis state is sent.
    let col0 = (0..d).max_by(|&a, &b| m[(a, 0)].norm().partial_cmp(&m[(b, 0)].norm()).unwrap())?;
    for zpart in 0..(1usize << n) {
        let (mut x, mut z) = (0u64, 0u64);
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if col0 & bit != 0 {
                x |= 1 << q;
            }
            if zpart & bit != 0 {
                z |= 1 << q;
            }
        }
        let p = PauliOperator::new(n, x, z);
        let (flip, phases) = p.monomial();
        let mut coeff = num_complex::Complex64::new(0.0, 0.0);
        for col in 0..d {
            coeff += phases[col].conj() * m[(col ^ flip, col)];
        }
        coeff /= d as f64;
        if (coeff.norm() - 1.0).abs() <= tol && coeff.im.abs() <= tol {
            return Some(if coeff.re > 0.0 { p } else { p.negated() });
        }
    }
    None
}

/// All symplectic generator-image assignments (unsigned) for n ≤ 2.
fn symplectic_group(n: usize) -> &'static [Vec<(u64, u64)>] {
    static ONE: OnceLock<Vec<Vec<(u64, u64)>>> = OnceLock::new();
    static TWO: OnceLock<Vec<Vec<(u64, u64)>>> = OnceLock::new();
    let cell = match n {
        1 => &ONE,
        2 => &TWO,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let paulis: Vec<PauliOperator> = (1..(1usize << (2 * n)))
            .map(|i| PauliOperator::from_index(n, PauliIndex(i)))
            .collect();
        let mut out = Vec::new();
        let mut chosen: Vec<PauliOperator> = Vec::new();
        enumerate_images(n, &paulis, &mut chosen, &mut out);
        out
    })
}

// chosen holds images in order X0, Z0, X1, Z1, ...
fn enumerate_images(
    n: usize,
    paulis: &[PauliOperator],
    chosen: &mut Vec<PauliOperator>,
    out: &mut Vec<Vec<(u64, u64)>>,
) {
    if chosen.len() == 2 * n {
        out.push(chosen.iter().map(|p| (p.x_bits(), p.z_bits())).collect());
        return;
    }
    let k = chosen.len();
    for cand in paulis {
        let ok = chosen.iter().enumerate().all(|(j, prev)| {
            // X_a/Z_a anticommute only within the same qubit
            let want = u32::from(j / 2 == k / 2);
            prev.commute(cand).unwrap() == want
        });
        if ok {
            chosen.push(*cand);
            enumerate_images(n, paulis, chosen, out);
            chosen.pop();
        }
    }
}

/// Uniformly random n-qubit Clifford (n ≤ 2): uniform symplectic part with uniform sign bits.
pub fn random_clifford<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<CliffordTableau> {
    if n == 0 || n > 2 {
        return Err(Error::UnsupportedQubits { n, reason: "uniform Clifford sampling is limited to n ≤ 2" });
    }
    let group = symplectic_group(n);
    let pick = &group[rng.random_range(0..group.len())];
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for q in 0..n {
        for (slot, target) in [(2 * q, &mut xs), (2 * q + 1, &mut zs)] {
            let (x, z) = pick[slot];
            let p = PauliOperator::new(n, x, z);
            target.push(if rng.random_bool(0.5) { p.negated() } else { p });
        }
    }
    CliffordTableau::from_images(xs, zs)
}

/// Number of symplectic matrices enumerated for n ≤ 2 (6 and 720).
pub fn symplectic_group_order(n: usize) -> usize {
    symplectic_group(n).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cnot, cz, hadamard, identity, kron, max_abs_diff, phase_gate, phase_s};
    use crate::pauli::operator::all_paulis;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn dense_check(t: &CliffordTableau, u: &CMatrix) {
        for q in all_paulis(t.n()) {
            let img = t.conjugate_pauli(&q).unwrap();
            let dense = u * q.matrix() * u.adjoint();
            assert!(max_abs_diff(&img.matrix(), &dense) < 1e-10, "{q} -> {img}");
        }
    }

    #[test]
    fn cnot_and_cz_examples() {
        let t = CliffordTableau::from_unitary(&cnot(), 1e-10).unwrap();
        assert_eq!(t.conjugate_pauli(&p("XI")).unwrap(), p("XX"));
        dense_check(&t, &cnot());
        let t = CliffordTableau::from_unitary(&cz(), 1e-10).unwrap();
        assert_eq!(t.conjugate_pauli(&p("XI")).unwrap(), p("XZ"));
        assert_eq!(t.conjugate_pauli(&p("II")).unwrap(), p("II"));
        dense_check(&t, &cz());
    }

    #[test]
    fn from_unitary_examples() {
        let h = CliffordTableau::from_unitary(&hadamard(), 1e-10).unwrap();
        assert_eq!(h.x_image(0), &p("Z"));
        assert_eq!(h.z_image(0), &p("X"));
        let t_gate = phase_gate(std::f64::consts::FRAC_PI_4);
        assert!(matches!(CliffordTableau::from_unitary(&t_gate, 1e-10), Err(Error::NotClifford(_))));
        assert!(CliffordTableau::from_unitary(&identity(4), 1e-10).unwrap().is_identity());
        let mut bad = identity(2);
        bad[(0, 0)] = crate::linalg::c(2.0, 0.0);
        assert!(matches!(CliffordTableau::from_unitary(&bad, 1e-10), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn compose_and_inverse_match_dense() {
        let u = kron(&hadamard(), &phase_s()) * cnot();
        let t = CliffordTableau::from_unitary(&u, 1e-10).unwrap();
        dense_check(&t, &u);
        let inv = t.inverse();
        dense_check(&inv, &u.adjoint());
        assert!(t.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&t).unwrap().is_identity());
    }

    #[test]
    fn symplectic_group_orders() {
        assert_eq!(symplectic_group_order(1), 6);
        assert_eq!(symplectic_group_order(2), 720);
    }

    #[test]
    fn random_cliffords_are_valid_and_invertible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = random_clifford(&mut rng, 2).unwrap();
            assert!(t.compose(&t.inverse()).unwrap().is_identity());
        }
        assert!(random_clifford(&mut rng, 3).is_err());
    }

    #[test]
    fn signed_permutation_is_a_permutation() {
        let t = CliffordTableau::from_unitary(&cnot(), 1e-10).unwrap();
        let (targets, _) = t.signed_permutation();
        let mut seen = targets.clone();
        seen.sort();
        assert_eq!(seen, (0..16).collect::<Vec<u32>>());
        assert_eq!(targets[0], 0);
    }
}
