//! Plain-text channel documents.
//!
//! ```text
//! ptm
//! n 1
//! shape 4 4
//! 1.0000000000000000e0 0.0000000000000000e0 ...
//! ```
//!
//! The first line is the representation tag (`ptm`, `kraus`, `chi`, `pauli-diagonal`).
//! Real payloads are written row by row; complex entries as `re im` pairs. A Kraus document
//! has a `count` line and one block of rows per operator. Numbers carry 17 significant digits.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::diagonal::PauliDiagonal;
use super::ptm::{ChiMatrix, KrausChannel, PtmChannel};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};

#[derive(Clone, Debug)]
pub enum ChannelDocument {
    Ptm(PtmChannel),
    Kraus(KrausChannel),
    Chi(ChiMatrix),
    PauliDiagonal(PauliDiagonal),
}

fn push_real_rows(out: &mut String, m: &RMatrix) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.16e}", m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

fn push_complex_rows(out: &mut String, m: &CMatrix) {
    for r in 0..m.nrows() {
        let row: Vec<String> =
            (0..m.ncols()).map(|c| format!("{:.16e} {:.16e}", m[(r, c)].re, m[(r, c)].im)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

impl ChannelDocument {
    pub fn tag(&self) -> &'static str {
        match self {
            ChannelDocument::Ptm(_) => "ptm",
            ChannelDocument::Kraus(_) => "kraus",
            ChannelDocument::Chi(_) => "chi",
            ChannelDocument::PauliDiagonal(_) => "pauli-diagonal",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(self.tag());
        out.push('\n');
        match self {
            ChannelDocument::Ptm(p) => {
                let _ = writeln!(out, "n {}\nshape {} {}", p.n(), p.dim(), p.dim());
                push_real_rows(&mut out, p.matrix());
            }
            ChannelDocument::Chi(c) => {
                let d = c.matrix().nrows();
                let _ = writeln!(out, "n {}\nshape {d} {d}", c.n());
                push_complex_rows(&mut out, c.matrix());
            }
            ChannelDocument::Kraus(k) => {
                let d = 1usize << k.n();
                let _ = writeln!(out, "n {}\nshape {d} {d}\ncount {}", k.n(), k.operators().len());
                for op in k.operators() {
                    push_complex_rows(&mut out, op);
                }
            }
            ChannelDocument::PauliDiagonal(l) => {
                let _ = writeln!(out, "n {}\nshape {}", l.n(), l.lambdas().len());
                let vals: Vec<String> = l.lambdas().iter().map(|x| format!("{x:.16e}")).collect();
                out.push_str(&vals.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<ChannelDocument> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let tag = lines.next().ok_or_else(|| perr("empty document"))?;
        let n: usize = header(lines.next(), "n")?
            .first()
            .copied()
            .ok_or_else(|| perr("missing qubit count"))?;
        if n == 0 || n > 8 {
            return Err(perr("qubit count must be between 1 and 8"));
        }
        let shape = header(lines.next(), "shape")?;
        let count = if tag == "kraus" { header(lines.next(), "count")?.first().copied() } else { None };
        let numbers: Vec<f64> = lines
            .flat_map(|l| l.split_whitespace())
            .map(|t| t.parse::<f64>().map_err(|_| perr(&format!("bad number {t:?}"))))
            .collect::<Result<_>>()?;
        let pdim = 1usize << (2 * n);
        let d = 1usize << n;
        match tag {
            "ptm" => {
                expect_shape(&shape, &[pdim, pdim])?;
                expect_len(&numbers, pdim * pdim)?;
                Ok(ChannelDocument::Ptm(PtmChannel::new(n, RMatrix::from_row_slice(pdim, pdim, &numbers))?))
            }
            "chi" => {
                expect_shape(&shape, &[pdim, pdim])?;
                expect_len(&numbers, 2 * pdim * pdim)?;
                Ok(ChannelDocument::Chi(ChiMatrix::new(n, complex_matrix(pdim, &numbers))?))
            }
            "kraus" => {
                expect_shape(&shape, &[d, d])?;
                let count = count.ok_or_else(|| perr("missing count"))?;
                expect_len(&numbers, 2 * d * d * count)?;
                let ops = numbers.chunks_exact(2 * d * d).map(|c| complex_matrix(d, c)).collect();
                Ok(ChannelDocument::Kraus(KrausChannel::new(ops)?))
            }
            "pauli-diagonal" => {
                expect_shape(&shape, &[pdim])?;
                expect_len(&numbers, pdim)?;
                Ok(ChannelDocument::PauliDiagonal(PauliDiagonal::new(n, numbers)?))
            }
            other => Err(perr(&format!("unknown representation {other:?}"))),
        }
    }

    /// PTM view of any representation (χ documents are converted through Σ χ_ij P_i ρ P_j).
    pub fn to_ptm(&self) -> PtmChannel {
        match self {
            ChannelDocument::Ptm(p) => p.clone(),
            ChannelDocument::Kraus(k) => k.to_ptm(),
            ChannelDocument::PauliDiagonal(l) => l.to_ptm(),
            ChannelDocument::Chi(c) => chi_to_ptm(c),
        }
    }
}

fn chi_to_ptm(chi: &ChiMatrix) -> PtmChannel {
    use crate::pauli::{PauliIndex, PauliOperator};
    let n = chi.n();
    let pdim = 1usize << (2 * n);
    let d = (1usize << n) as f64;
    let paulis: Vec<CMatrix> = (0..pdim).map(|i| PauliOperator::from_index(n, PauliIndex(i)).matrix()).collect();
    let mut out = RMatrix::zeros(pdim, pdim);
    for col in 0..pdim {
        let mut image = CMatrix::zeros(1 << n, 1 << n);
        for a in 0..pdim {
            for b in 0..pdim {
                let w = chi.matrix()[(a, b)];
                if w.norm() > 0.0 {
                    image += (&paulis[a] * &paulis[col] * &paulis[b]) * w;
                }
            }
        }
        for row in 0..pdim {
            out[(row, col)] = (&paulis[row] * &image).trace().re / d;
        }
    }
    PtmChannel::new(n, out).expect("dimension fixed")
}

fn perr(msg: &str) -> Error {
    Error::Parse(msg.to_string())
}

fn header(line: Option<&str>, key: &str) -> Result<Vec<usize>> {
    let line = line.ok_or_else(|| perr(&format!("missing {key} line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(perr(&format!("expected {key} line, found {line:?}")));
    }
    parts.map(|t| t.parse::<usize>().map_err(|_| perr(&format!("bad {key} value {t:?}")))).collect()
}

fn expect_shape(found: &[usize], expected: &[usize]) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(perr(&format!("shape {found:?} does not match {expected:?}")))
    }
}

fn expect_len(v: &[f64], len: usize) -> Result<()> {
    if v.len() == len {
        Ok(())
    } else {
        Err(perr(&format!("expected {len} numbers, found {}", v.len())))
    }
}

fn complex_matrix(d: usize, vals: &[f64]) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        let k = 2 * (r * d + c);
        Complex64::new(vals[k], vals[k + 1])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::noise::damping_kraus;
    use crate::linalg::real_max_abs_diff;

    #[test]
    fn round_trip_every_representation() {
        let k = damping_kraus(0.3);
        let docs = [
            ChannelDocument::Ptm(k.to_ptm()),
            ChannelDocument::Kraus(k.clone()),
            ChannelDocument::Chi(k.to_chi()),
            ChannelDocument::PauliDiagonal(PauliDiagonal::depolarizing(1, 0.9)),
        ];
        for doc in &docs {
            let text = doc.to_text();
            let back = ChannelDocument::parse(&text).unwrap();
            assert_eq!(back.tag(), doc.tag());
            assert!(real_max_abs_diff(back.to_ptm().matrix(), doc.to_ptm().matrix()) < 1e-15);
        }
    }

    #[test]
    fn chi_view_agrees_with_kraus_ptm() {
        let k = damping_kraus(0.2);
        let via_chi = chi_to_ptm(&k.to_chi());
        assert!(real_max_abs_diff(via_chi.matrix(), k.to_ptm().matrix()) < 1e-14);
    }

    #[test]
    fn malformed_documents_rejected() {
        assert!(matches!(ChannelDocument::parse(""), Err(Error::Parse(_))));
        assert!(ChannelDocument::parse("ptm\nn 1\nshape 4 4\n1 2 3").is_err());
        assert!(ChannelDocument::parse("unitary\nn 1\nshape 4 4\n").is_err());
    }
}
