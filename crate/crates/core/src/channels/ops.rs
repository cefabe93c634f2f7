//! Structured linear maps on Liouville vectors (length 4ⁿ, index-encoded Pauli basis).
//!
//! Twirling gates and Cliffords are signed permutations, local gates are products of 4×4
//! blocks, and the correlation noise couples qubit pairs, so none of the hot paths needs a
//! dense 4ⁿ×4ⁿ product.

use crate::linalg::RMatrix;

pub type Local4 = [[f64; 4]; 4];

#[derive(Clone, Debug)]
pub enum PtmOp {
    Identity,
    /// Row-major dim×dim matrix.
    Dense { dim: usize, data: Vec<f64> },
    Diagonal(Vec<f64>),
    /// out[targets[i]] = signs[i]·in[i].
    SignedPermutation { targets: Vec<u32>, signs: Vec<f64> },
    /// One 4×4 block per listed qubit.
    Local { n: usize, factors: Vec<(usize, Local4)> },
    /// Sparse 16×16 block on a qubit pair; local index = 4·digit(q1) + digit(q2).
    Pair { n: usize, q1: usize, q2: usize, entries: Vec<(u8, u8, f64)> },
    /// Applied left to right.
    Chain(Vec<PtmOp>),
}

impl PtmOp {
    pub fn dense(m: &RMatrix) -> PtmOp {
        assert_eq!(m.nrows(), m.ncols());
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(m[(r, c)]);
            }
        }
        PtmOp::Dense { dim, data }
    }

    pub fn pair(n: usize, q1: usize, q2: usize, block: &RMatrix, tol: f64) -> PtmOp {
        assert_eq!(block.shape(), (16, 16));
        let mut entries = Vec::new();
        for r in 0..16 {
            for c in 0..16 {
                let v = block[(r, c)];
                if v.abs() > tol {
                    entries.push((r as u8, c as u8, v));
                }
            }
        }
        PtmOp::Pair { n, q1, q2, entries }
    }

    pub fn then(self, next: PtmOp) -> PtmOp {
        match (self, next) {
            (PtmOp::Identity, b) => b,
            (a, PtmOp::Identity) => a,
            (PtmOp::Chain(mut a), PtmOp::Chain(b)) => {
                a.extend(b);
                PtmOp::Chain(a)
            }
            (PtmOp::Chain(mut a), b) => {
                a.push(b);
                PtmOp::Chain(a)
            }
            (a, PtmOp::Chain(mut b)) => {
                b.insert(0, a);
                PtmOp::Chain(b)
            }
            (a, b) => PtmOp::Chain(vec![a, b]),
        }
    }

    pub fn apply(&self, v: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        match self {
            PtmOp::Identity => {}
            PtmOp::Dense { dim, data } => {
                debug_assert_eq!(v.len(), *dim);
                scratch.clear();
                scratch.extend(data.chunks_exact(*dim).map(|row| {
                    row.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>()
                }));
                std::mem::swap(v, scratch);
            }
            PtmOp::Diagonal(d) => {
                debug_assert_eq!(v.len(), d.len());
                for (x, s) in v.iter_mut().zip(d) {
                    *x *= s;
                }
            }
            PtmOp::SignedPermutation { targets, signs } => {
                scratch.clear();
                scratch.resize(v.len(), 0.0);
                for i in 0..v.len() {
                    scratch[targets[i] as usize] = signs[i] * v[i];
                }
                std::mem::swap(v, scratch);
            }
            PtmOp::Local { n, factors } => {
                for (q, m) in factors {
                    apply_local(*n, *q, m, v);
                }
            }
            PtmOp::Pair { n, q1, q2, entries } => apply_pair(*n, *q1, *q2, entries, v),
            PtmOp::Chain(ops) => {
                for op in ops {
                    op.apply(v, scratch);
                }
            }
        }
    }

    /// Dense matrix of the map, built column by column.
    pub fn to_matrix(&self, dim: usize) -> RMatrix {
        let mut out = RMatrix::zeros(dim, dim);
        let mut v = Vec::with_capacity(dim);
        let mut scratch = Vec::with_capacity(dim);
        for col in 0..dim {
            v.clear();
            v.resize(dim, 0.0);
            v[col] = 1.0;
            self.apply(&mut v, &mut scratch);
            for (r, x) in v.iter().enumerate() {
                out[(r, col)] = *x;
            }
        }
        out
    }

    /// Diagonal of the map without forming the full matrix.
    pub fn diagonal(&self, dim: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(dim);
        let mut scratch = Vec::with_capacity(dim);
        (0..dim)
            .map(|col| {
                v.clear();
                v.resize(dim, 0.0);
                v[col] = 1.0;
                self.apply(&mut v, &mut scratch);
                v[col]
            })
            .collect()
    }

    /// Collapse into one dense matrix (worth it for small registers).
    pub fn densified(&self, dim: usize) -> PtmOp {
        PtmOp::dense(&self.to_matrix(dim))
    }
}

fn apply_local(n: usize, q: usize, m: &Local4, v: &mut [f64]) {
    let stride = 1usize << (2 * (n - 1 - q));
    let block = 4 * stride;
    let len = v.len();
    let mut base = 0;
    while base < len {
        for lo in 0..stride {
            let i0 = base + lo;
            let a = [v[i0], v[i0 + stride], v[i0 + 2 * stride], v[i0 + 3 * stride]];
            for (r, row) in m.iter().enumerate() {
                v[i0 + r * stride] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2] + row[3] * a[3];
            }
        }
        base += block;
    }
}

fn apply_pair(n: usize, q1: usize, q2: usize, entries: &[(u8, u8, f64)], v: &mut [f64]) {
    let s1 = 1usize << (2 * (n - 1 - q1));
    let s2 = 1usize << (2 * (n - 1 - q2));
    let mut offsets = [0usize; 16];
    for d1 in 0..4 {
        for d2 in 0..4 {
            offsets[4 * d1 + d2] = d1 * s1 + d2 * s2;
        }
    }
    let busy = 3 * s1 | 3 * s2;
    let mut a = [0.0; 16];
    let mut out = [0.0; 16];
    for base in 0..v.len() {
        if base & busy != 0 {
            continue;
        }
        for k in 0..16 {
            a[k] = v[base + offsets[k]];
        }
        out.fill(0.0);
        for &(r, c, val) in entries {
            out[r as usize] += val * a[c as usize];
        }
        for k in 0..16 {
            v[base + offsets[k]] = out[k];
        }
    }
}

/// Kronecker product of per-qubit 4×4 blocks as a dense 4ⁿ matrix (qubit 0 outermost).
pub fn local_to_matrix(blocks: &[Local4]) -> RMatrix {
    let mut acc = RMatrix::identity(1, 1);
    for b in blocks {
        let m = RMatrix::from_fn(4, 4, |r, c| b[r][c]);
        acc = acc.kronecker(&m);
    }
    acc
}
