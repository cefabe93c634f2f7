use std::sync::OnceLock;

use rand::Rng;

use super::operator::PauliOperator;
use super::tableau::CliffordTableau;
use crate::linalg::{cmatrix, hadamard, phase_s, CMatrix, ONE};

/// Element of the single-qubit Clifford group (modulo phase).
///
/// id = 4·axis + pauli: the unitary is P·B with B one of six axis permutations
/// {I, H, S, H·S, S·H, H·S·H} and P ∈ {I, X, Z, Y} (index-encoding digit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SingleQubitClifford(u8);

impl TryFrom<u8> for SingleQubitClifford {
    type Error = String;

    fn try_from(id: u8) -> std::result::Result<Self, String> {
        SingleQubitClifford::from_id(id).ok_or_else(|| format!("Clifford id {id} is not below 24"))
    }
}

impl From<SingleQubitClifford> for u8 {
    fn from(c: SingleQubitClifford) -> u8 {
        c.0
    }
}

/// Signed images (X image, Z image) of the six axis permutations, as (digit, sign).
const AXIS_ACTIONS: [((usize, i8), (usize, i8)); 6] = [
    ((1, 1), (2, 1)),  // I
    ((2, 1), (1, 1)),  // H
    ((3, 1), (2, 1)),  // S
    ((3, -1), (1, 1)), // H·S
    ((2, 1), (3, 1)),  // S·H
    ((1, 1), (3, -1)), // H·S·H
];

struct Table {
    tableaux: Vec<CliffordTableau>,
    compose: Vec<[u8; 24]>,
    inverse: [u8; 24],
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let tableaux: Vec<CliffordTableau> = (0..24u8).map(build_tableau).collect();
        let lookup = |t: &CliffordTableau| tableaux.iter().position(|u| u == t).unwrap() as u8;
        let mut compose = vec![[0u8; 24]; 24];
        let mut inverse = [0u8; 24];
        for a in 0..24 {
            for b in 0..24 {
                compose[a][b] = lookup(&tableaux[a].compose(&tableaux[b]).unwrap());
            }
            inverse[a] = lookup(&tableaux[a].inverse());
        }
        Table { tableaux, compose, inverse }
    })
}

fn build_tableau(id: u8) -> CliffordTableau {
    let axis = (id / 4) as usize;
    let pauli = PauliOperator::single(1, 0, (id % 4) as usize);
    let signed = |(digit, sign): (usize, i8)| {
        let img = PauliOperator::single(1, 0, digit);
        // conjugating by the Pauli flips the sign of anticommuting images
        let flip = pauli.commute(&img).unwrap() == 1;
        if (sign < 0) != flip {
            img.negated()
        } else {
            img
        }
    };
    let (xi, zi) = AXIS_ACTIONS[axis];
    CliffordTableau::from_images(vec![signed(xi)], vec![signed(zi)]).unwrap()
}

impl SingleQubitClifford {
    pub const IDENTITY: SingleQubitClifford = SingleQubitClifford(0);

    pub fn from_id(id: u8) -> Option<Self> {
        (id < 24).then_some(SingleQubitClifford(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = SingleQubitClifford> {
        (0..24).map(SingleQubitClifford)
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SingleQubitClifford(rng.random_range(0..24))
    }

    pub fn tableau(self) -> &'static CliffordTableau {
        &table().tableaux[self.0 as usize]
    }

    /// (image of X, image of Z) with signs.
    pub fn action(self) -> (PauliOperator, PauliOperator) {
        let t = self.tableau();
        (*t.x_image(0), *t.z_image(0))
    }

    /// self ∘ other (other applied first).
    pub fn compose(self, other: SingleQubitClifford) -> SingleQubitClifford {
        SingleQubitClifford(table().compose[self.0 as usize][other.0 as usize])
    }

    pub fn inverse(self) -> SingleQubitClifford {
        SingleQubitClifford(table().inverse[self.0 as usize])
    }

    pub fn unitary(self) -> CMatrix {
        let h = hadamard();
        let s = phase_s();
        let axis = match self.0 / 4 {
            0 => cmatrix(2, 2, &[ONE, crate::linalg::ZERO, crate::linalg::ZERO, ONE]),
            1 => h.clone(),
            2 => s.clone(),
            3 => &h * &s,
            4 => &s * &h,
            _ => &h * &s * &h,
        };
        PauliOperator::single(1, 0, (self.0 % 4) as usize).matrix() * axis
    }

    /// 4×4 PTM in the (I, X, Z, Y) index order.
    pub fn ptm(self) -> [[f64; 4]; 4] {
        let t = self.tableau();
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        for d in 1..4 {
            let img = t.conjugate_pauli(&PauliOperator::single(1, 0, d)).unwrap();
            m[img.index().0][d] = img.sign().unwrap();
        }
        m
    }
}

/// Independent uniform single-qubit Clifford on each of n qubits.
pub fn sample_local_clifford<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<SingleQubitClifford> {
    (0..n).map(|_| SingleQubitClifford::sample(rng)).collect()
}

/// Tableau of a tensor product of single-qubit Cliffords.
pub fn local_tableau(factors: &[SingleQubitClifford]) -> CliffordTableau {
    let mut iter = factors.iter();
    let first = iter.next().expect("at least one qubit").tableau().clone();
    iter.fold(first, |acc, c| acc.tensor(c.tableau()))
}
