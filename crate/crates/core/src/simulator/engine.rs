//! Compiles physical gates to structured PTM ops and evolves Liouville states.

use std::borrow::Cow;

use super::state::LiouvilleState;
use crate::channels::{single_qubit_ptm, Local4, NoiseInstance, PtmChannel, PtmOp};
use crate::circuits::{BenchmarkTarget, Factor, GateNoise, PhysicalGate};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{character, CliffordTableau, PauliIndex, PauliOperator};

const IDENTITY4: Local4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

fn mul4(a: &Local4, b: &Local4) -> Local4 {
    let mut out = [[0.0; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// Signed permutation: index i goes to targets[i] with sign signs[i].
#[derive(Clone, Debug)]
struct Perm {
    targets: Vec<u32>,
    signs: Vec<f64>,
}

impl Perm {
    fn from_tableau(t: &CliffordTableau) -> Perm {
        let (targets, signs) = t.signed_permutation();
        Perm { targets, signs }
    }

    fn pauli(p: &PauliOperator) -> Perm {
        let dim = 1usize << (2 * p.n());
        Perm {
            targets: (0..dim as u32).collect(),
            signs: (0..dim).map(|i| character(PauliIndex(i), p)).collect(),
        }
    }

    /// `self` followed by `next`.
    fn then(&self, next: &Perm) -> Perm {
        let targets = self.targets.iter().map(|&t| next.targets[t as usize]).collect();
        let signs = self.targets.iter().zip(&self.signs).map(|(&t, s)| s * next.signs[t as usize]).collect();
        Perm { targets, signs }
    }

    fn into_op(self) -> PtmOp {
        let identity_targets = self.targets.iter().enumerate().all(|(i, &t)| i as u32 == t);
        if !identity_targets {
            PtmOp::SignedPermutation { targets: self.targets, signs: self.signs }
        } else if self.signs.iter().all(|&s| s == 1.0) {
            PtmOp::Identity
        } else {
            PtmOp::Diagonal(self.signs)
        }
    }
}

enum Piece<'a> {
    Perm(Perm),
    Local(Vec<Local4>),
    Op(&'a PtmOp),
}

fn local_op(blocks: Vec<Local4>) -> PtmOp {
    let n = blocks.len();
    let factors: Vec<(usize, Local4)> = blocks.into_iter().enumerate().filter(|(_, b)| *b != IDENTITY4).collect();
    if factors.is_empty() {
        PtmOp::Identity
    } else {
        PtmOp::Local { n, factors }
    }
}

/// Noisy PTM-level simulator for one target and one sampled noise model.
#[derive(Clone, Debug)]
pub struct Simulator {
    target: BenchmarkTarget,
    noise: NoiseInstance,
    reference_op: PtmOp,
    frame: Vec<Local4>,
    frame_inv: Vec<Local4>,
    core: [Option<PtmOp>; 2],
    physical: [PtmOp; 2],
}

impl Simulator {
    pub fn new(target: BenchmarkTarget, noise: NoiseInstance) -> Result<Self> {
        let n = target.n();
        check_dim(n, noise.n())?;
        let frame: Vec<Local4> = target.frame().factors().iter().map(single_qubit_ptm).collect();
        let frame_inv: Vec<Local4> = target.frame().inverse_factors().iter().map(single_qubit_ptm).collect();
        let core = match target.core().tableau() {
            Some(t) => [Some(Perm::from_tableau(t).into_op()), Some(Perm::from_tableau(&t.inverse()).into_op())],
            None => [None, None],
        };
        let physical = if let Some(t) = target.gate().tableau() {
            [Perm::from_tableau(t).into_op(), Perm::from_tableau(&t.inverse()).into_op()]
        } else if let (Some(fwd), Some(bwd)) = (&core[0], &core[1]) {
            let wrap = |op: &PtmOp| {
                local_op(frame_inv.clone()).then(op.clone()).then(local_op(frame.clone()))
            };
            [wrap(fwd), wrap(bwd)]
        } else {
            [
                PtmChannel::from_unitary(target.gate().unitary())?.op(),
                PtmChannel::from_unitary(target.gate().inverse_unitary())?.op(),
            ]
        };
        let reference_op = noise.reference_op();
        Ok(Simulator { target, noise, reference_op, frame, frame_inv, core, physical })
    }

    pub fn target(&self) -> &BenchmarkTarget {
        &self.target
    }

    pub fn noise(&self) -> &NoiseInstance {
        &self.noise
    }

    pub fn n(&self) -> usize {
        self.target.n()
    }

    fn piece(&self, f: &Factor) -> Result<Piece<'_>> {
        let n = self.n();
        Ok(match f {
            Factor::Pauli(p) => Piece::Perm(Perm::pauli(p)),
            // per-qubit 4×4 blocks beat building a 4ⁿ permutation for every layer
            Factor::Local(cs) => Piece::Local(cs.iter().map(|c| c.ptm()).collect()),
            Factor::Frame { inverse: false } => Piece::Local(self.frame.clone()),
            Factor::Frame { inverse: true } => Piece::Local(self.frame_inv.clone()),
            Factor::Core { inverse } => Piece::Op(
                self.core[*inverse as usize]
                    .as_ref()
                    .ok_or_else(|| Error::NotClifford(format!("core of {} is not Clifford", self.target.name())))?,
            ),
            Factor::Target { inverse } => Piece::Op(&self.physical[*inverse as usize]),
            Factor::Clifford(t) => {
                check_dim(n, t.n())?;
                Piece::Perm(Perm::from_tableau(t))
            }
        })
    }

    /// The ideal action of one physical gate, with adjacent local factors fused.
    pub fn compile_gate(&self, gate: &PhysicalGate) -> Result<PtmOp> {
        Ok(self.compiled(gate)?.into_iter().fold(PtmOp::Identity, |acc, op| acc.then(op.into_owned())))
    }

    fn compiled(&self, gate: &PhysicalGate) -> Result<Vec<Cow<'_, PtmOp>>> {
        let mut pieces: Vec<Piece> = Vec::new();
        for f in &gate.factors {
            let next = self.piece(f)?;
            match (pieces.last_mut(), next) {
                (Some(Piece::Perm(a)), Piece::Perm(b)) => *a = a.then(&b),
                (Some(Piece::Local(a)), Piece::Local(b)) => {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x = mul4(y, x);
                    }
                }
                (_, next) => pieces.push(next),
            }
        }
        Ok(pieces
            .into_iter()
            .map(|p| match p {
                Piece::Perm(p) => Cow::Owned(p.into_op()),
                Piece::Local(b) => Cow::Owned(local_op(b)),
                Piece::Op(o) => Cow::Borrowed(o),
            })
            .collect())
    }

    /// Applies a gate list to `state`; `noisy = false` gives the ideal evolution.
    pub fn evolve(&self, gates: &[PhysicalGate], state: &mut LiouvilleState, noisy: bool) -> Result<()> {
        check_dim(self.n(), state.n())?;
        let mut scratch = Vec::with_capacity(state.vector().len());
        for g in gates {
            let ops = self.compiled(g)?;
            if noisy && g.noise == GateNoise::TargetBefore {
                self.noise.target_op().apply(state.vector_mut(), &mut scratch);
            }
            for op in &ops {
                op.apply(state.vector_mut(), &mut scratch);
            }
            if noisy && g.noise == GateNoise::ReferenceAfter {
                self.reference_op.apply(state.vector_mut(), &mut scratch);
            }
        }
        Ok(())
    }

    /// Whole-sequence PTM (noisy or ideal), column by column; small registers only.
    pub fn sequence_ptm(&self, gates: &[PhysicalGate], noisy: bool) -> Result<PtmChannel> {
        let n = self.n();
        let dim = 1usize << (2 * n);
        let mut m = crate::linalg::RMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut v = vec![0.0; dim];
            v[col] = 1.0;
            let mut s = LiouvilleState::new(n, v)?;
            self.evolve(gates, &mut s, noisy)?;
            for (r, x) in s.vector().iter().enumerate() {
                m[(r, col)] = *x;
            }
        }
        PtmChannel::new(n, m)
    }
}
