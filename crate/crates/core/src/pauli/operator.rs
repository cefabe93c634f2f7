use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{c, CMatrix, I, ONE};

pub const MAX_QUBITS: usize = 16;

const EVEN_BITS: usize = 0x5555_5555_5555_5555;

/// Index of a phase-free Pauli operator.
///
/// Each qubit contributes two bits (00 = I, 01 = X, 10 = Z, 11 = Y), qubit 0 in the
/// most significant pair. The same encoding orders PTM rows and columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliIndex(pub usize);

impl PauliIndex {
    /// Per-qubit digit: 0 = I, 1 = X, 2 = Z, 3 = Y.
    pub fn digit(self, n: usize, q: usize) -> usize {
        (self.0 >> (2 * (n - 1 - q))) & 3
    }

    /// Symplectic product ⟨self, other⟩ ∈ {0, 1}.
    pub fn symplectic(self, other: PauliIndex) -> u32 {
        symplectic_parity(self.0, other.0)
    }

    /// True if every factor is I or Z.
    pub fn is_z_type(self) -> bool {
        self.0 & EVEN_BITS == 0
    }

    /// Bit mask of qubits carrying a non-identity factor (bit q for qubit q).
    pub fn support(self, n: usize) -> u64 {
        let mut mask = 0;
        for q in 0..n {
            if self.digit(n, q) != 0 {
                mask |= 1 << q;
            }
        }
        mask
    }
}

/// Symplectic inner product of two encoded Pauli indices.
#[inline]
pub fn symplectic_parity(a: usize, b: usize) -> u32 {
    let ax = a & EVEN_BITS;
    let az = (a >> 1) & EVEN_BITS;
    let bx = b & EVEN_BITS;
    let bz = (b >> 1) & EVEN_BITS;
    ((ax & bz) ^ (az & bx)).count_ones() & 1
}

/// Multi-qubit Pauli operator i^phase · ⊗_q σ(x_q, z_q) with Hermitian single-qubit factors
/// (σ(1,1) = Y). Bit q of `x`/`z` belongs to qubit q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliOperator { n, x: 0, z: 0, phase: 0 }
    }

    pub fn new(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        assert!(x & !mask == 0 && z & !mask == 0, "bit vector longer than n");
        PauliOperator { n, x, z, phase: 0 }
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp % 4;
        self
    }

    /// Single-qubit factor `digit` (0..4 in index encoding) on qubit `q`.
    pub fn single(n: usize, q: usize, digit: usize) -> Self {
        let (x, z) = ((digit & 1) as u64, ((digit >> 1) & 1) as u64);
        PauliOperator::new(n, x << q, z << q)
    }

    pub fn from_index(n: usize, idx: PauliIndex) -> Self {
        assert!(idx.0 < 1usize << (2 * n), "index out of range");
        let (mut x, mut z) = (0, 0);
        for q in 0..n {
            let d = idx.digit(n, q);
            x |= ((d & 1) as u64) << q;
            z |= (((d >> 1) & 1) as u64) << q;
        }
        PauliOperator::new(n, x, z)
    }

    pub fn index(&self) -> PauliIndex {
        let mut idx = 0usize;
        for q in 0..self.n {
            idx |= self.digit(q) << (2 * (self.n - 1 - q));
        }
        PauliIndex(idx)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn x_bits(&self) -> u64 {
        self.x
    }
    pub fn z_bits(&self) -> u64 {
        self.z
    }
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn digit(&self, q: usize) -> usize {
        (((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)) as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0 && self.phase == 0
    }

    /// Identity up to phase.
    pub fn is_trivial(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn stripped(&self) -> Self {
        PauliOperator { phase: 0, ..*self }
    }

    /// Sign of a Hermitian operator (phase 0 → +1, phase 2 → −1).
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    /// Symplectic product; 0 when the operators commute.
    pub fn commute(&self, other: &PauliOperator) -> Result<u32> {
        check_dim(self.n, other.n)?;
        Ok((((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1) as u32)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        self.commute(other).map(|b| b == 0).unwrap_or(false)
    }

    /// Operator product self·other with phase tracking.
    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_dim(self.n, other.n)?;
        let mut phase = self.phase as i32 + other.phase as i32;
        for q in 0..self.n {
            phase += product_phase(self.digit(q), other.digit(q));
        }
        Ok(PauliOperator {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: phase.rem_euclid(4) as u8,
        })
    }

    /// Label without phase, e.g. "XIZY" (qubit 0 first).
    pub fn label(&self) -> String {
        (0..self.n).map(|q| ['I', 'X', 'Z', 'Y'][self.digit(q)]).collect()
    }

    /// Dense 2ⁿ×2ⁿ matrix (qubit 0 is the most significant basis bit).
    pub fn matrix(&self) -> CMatrix {
        let d = 1usize << self.n;
        let (flip, phases) = self.monomial();
        let mut m = CMatrix::zeros(d, d);
        for col in 0..d {
            m[(col ^ flip, col)] = phases[col];
        }
        m
    }

    /// Monomial form: P|b⟩ = phases[b]·|b ⊕ flip⟩ on computational basis states.
    pub fn monomial(&self) -> (usize, Vec<num_complex::Complex64>) {
        let n = self.n;
        let d = 1usize << n;
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ys = 0u32;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if (self.x >> q) & 1 == 1 {
                flip |= bit;
            }
            if (self.z >> q) & 1 == 1 {
                zmask |= bit;
            }
            if self.digit(q) == 3 {
                ys += 1;
            }
        }
        let base = i_power(self.phase as u32 + ys);
        let phases = (0..d)
            .map(|b| {
                if (b & zmask).count_ones() % 2 == 1 {
                    -base
                } else {
                    base
                }
            })
            .collect();
        (flip, phases)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{}{}", prefix, self.label())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses "XIZY", optionally prefixed by +, -, i, +i or -i.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        if body.is_empty() || body.len() > MAX_QUBITS {
            return Err(Error::Parse(format!("bad Pauli string {s:?}")));
        }
        let n = body.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in body.chars().enumerate() {
            let d = match ch.to_ascii_uppercase() {
                'I' => 0,
                'X' => 1,
                'Z' => 2,
                'Y' => 3,
                _ => return Err(Error::Parse(format!("bad Pauli letter {ch:?} in {s:?}"))),
            };
            x |= ((d & 1) as u64) << q;
            z |= (((d >> 1) & 1) as u64) << q;
        }
        Ok(PauliOperator::new(n, x, z).with_phase(phase))
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exponent g with σ_a σ_b = i^g σ_{a⊕b} for Hermitian single-qubit Paulis (digits as in the index encoding).
fn product_phase(a: usize, b: usize) -> i32 {
    let (x1, z1) = ((a & 1) as i32, ((a >> 1) & 1) as i32);
    let (x2, z2) = ((b & 1) as i32, ((b >> 1) & 1) as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

fn i_power(k: u32) -> num_complex::Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// Character χ_j(P) = (−1)^⟨j,P⟩.
pub fn character(j: PauliIndex, p: &PauliOperator) -> f64 {
    if j.symplectic(p.index()) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Uniform phase-free Pauli on n qubits.
pub fn sample_pauli<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PauliOperator {
    let idx = rng.random_range(0..(1usize << (2 * n)));
    PauliOperator::from_index(n, PauliIndex(idx))
}

pub fn all_paulis(n: usize) -> impl Iterator<Item = PauliOperator> {
    (0..(1usize << (2 * n))).map(move |i| PauliOperator::from_index(n, PauliIndex(i)))
}
