use std::fmt;

use super::operator::{PauliIndex, PauliOperator};

/// Local-Clifford irrep label in {trivial, Υ}^n; bit q set means Υ on qubit q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel {
    n: usize,
    mask: u64,
}

impl IrrepLabel {
    pub fn new(n: usize, mask: u64) -> Self {
        assert!(mask < (1u64 << n));
        IrrepLabel { n, mask }
    }

    pub fn all(n: usize) -> impl Iterator<Item = IrrepLabel> {
        (0..(1u64 << n)).map(move |mask| IrrepLabel { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_nontrivial(&self, q: usize) -> bool {
        (self.mask >> q) & 1 == 1
    }

    /// Number of Υ factors.
    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn dimension(&self) -> usize {
        3usize.pow(self.weight())
    }

    /// The Z-type observable Q_k measuring this block (Z where the label is Υ).
    pub fn observable(&self) -> PauliOperator {
        PauliOperator::new(self.n, 0, self.mask)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.observable().label())
    }
}

/// Label of the block containing Pauli index q: I → trivial, X/Y/Z → Υ.
pub fn pauli_irrep_label(n: usize, q: PauliIndex) -> IrrepLabel {
    IrrepLabel { n, mask: q.support(n) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_examples() {
        let l = |s: &str| {
            let p: PauliOperator = s.parse().unwrap();
            pauli_irrep_label(p.n(), p.index())
        };
        assert_eq!(l("II").dimension(), 1);
        assert_eq!(l("II").weight(), 0);
        let iz = l("IZ");
        assert!(!iz.is_nontrivial(0) && iz.is_nontrivial(1));
        assert_eq!(iz.dimension(), 3);
        assert_eq!(l("IX"), iz);
        assert_eq!(l("ZZ").dimension(), 9);
    }

    #[test]
    fn dimensions_sum_to_pauli_count() {
        for n in 1..=6 {
            let total: usize = IrrepLabel::all(n).map(|l| l.dimension()).sum();
            assert_eq!(total, 1 << (2 * n));
            assert_eq!(IrrepLabel::all(n).count(), 1 << n);
        }
    }
}
