use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    cnot, cz, embed_pair, embed_single, hadamard, identity, kron_all, max_abs_diff, phase_gate, phase_s,
    unitarity_defect, CMatrix,
};
use crate::pauli::CliffordTableau;

pub const UNITARY_TOL: f64 = 1e-10;

/// A gate as a dense unitary, with its Clifford tableau when it has one.
#[derive(Clone, Debug)]
pub struct GateSpec {
    name: String,
    n: usize,
    unitary: CMatrix,
    inverse: CMatrix,
    tableau: Option<CliffordTableau>,
}

impl GateSpec {
    pub fn new(name: impl Into<String>, unitary: CMatrix) -> Result<Self> {
        let d = unitary.nrows();
        if d < 2 || !d.is_power_of_two() || unitary.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d.next_power_of_two().max(2), found: unitary.ncols() });
        }
        let defect = unitarity_defect(&unitary);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        let tableau = CliffordTableau::from_unitary(&unitary, 1e-9).ok();
        Ok(GateSpec {
            name: name.into(),
            n: d.trailing_zeros() as usize,
            inverse: unitary.adjoint(),
            unitary,
            tableau,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn inverse_unitary(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn tableau(&self) -> Option<&CliffordTableau> {
        self.tableau.as_ref()
    }

    pub fn is_clifford(&self) -> bool {
        self.tableau.is_some()
    }
}

/// Named single-qubit gates accepted in frame and circuit specs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedGate {
    I,
    H,
    S,
    Sdg,
    T,
    Tdg,
    SqrtT,
    SqrtTdg,
    /// diag(1, e^{iθ})
    Phase(f64),
}

impl NamedGate {
    pub fn matrix(self) -> CMatrix {
        match self {
            NamedGate::I => identity(2),
            NamedGate::H => hadamard(),
            NamedGate::S => phase_s(),
            NamedGate::Sdg => phase_s().adjoint(),
            NamedGate::T => phase_gate(PI / 4.0),
            NamedGate::Tdg => phase_gate(-PI / 4.0),
            NamedGate::SqrtT => phase_gate(PI / 8.0),
            NamedGate::SqrtTdg => phase_gate(-PI / 8.0),
            NamedGate::Phase(t) => phase_gate(t),
        }
    }
}

impl FromStr for NamedGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "i" | "id" => NamedGate::I,
            "h" => NamedGate::H,
            "s" => NamedGate::S,
            "sdg" => NamedGate::Sdg,
            "t" => NamedGate::T,
            "tdg" => NamedGate::Tdg,
            "sqrt-t" => NamedGate::SqrtT,
            "sqrt-tdg" => NamedGate::SqrtTdg,
            other => match other.strip_prefix("phase:") {
                Some(angle) => NamedGate::Phase(
                    angle.parse().map_err(|_| Error::Parse(format!("bad phase angle in {s:?}")))?,
                ),
                None => return Err(Error::Parse(format!("unknown single-qubit gate {s:?}"))),
            },
        })
    }
}

/// Local gauge frame L = ⊗ L_q.
#[derive(Clone, Debug)]
pub struct GaugeFrame {
    factors: Vec<CMatrix>,
    trivial: bool,
}

impl GaugeFrame {
    pub fn identity(n: usize) -> Self {
        GaugeFrame { factors: vec![identity(2); n], trivial: true }
    }

    pub fn new(factors: Vec<CMatrix>) -> Result<Self> {
        for f in &factors {
            if f.shape() != (2, 2) {
                return Err(Error::DimensionMismatch { expected: 2, found: f.nrows() });
            }
            let defect = unitarity_defect(f);
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        let trivial = factors.iter().all(|f| max_abs_diff(f, &identity(2)) < 1e-15);
        Ok(GaugeFrame { factors, trivial })
    }

    pub fn from_names(names: &[NamedGate]) -> Result<Self> {
        GaugeFrame::new(names.iter().map(|g| g.matrix()).collect())
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn inverse_factors(&self) -> Vec<CMatrix> {
        self.factors.iter().map(|f| f.adjoint()).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn matrix(&self) -> CMatrix {
        kron_all(&self.factors)
    }
}

/// A gate to benchmark, written as L·U·L⁻¹ with a Clifford core U.
#[derive(Clone, Debug)]
pub struct BenchmarkTarget {
    gate: GateSpec,
    core: GateSpec,
    frame: GaugeFrame,
}

impl BenchmarkTarget {
    /// Clifford gate with trivial frame.
    pub fn clifford(gate: GateSpec) -> Result<Self> {
        if !gate.is_clifford() {
            return Err(Error::NotClifford(format!("{} has no tableau", gate.name())));
        }
        let frame = GaugeFrame::identity(gate.n());
        Ok(BenchmarkTarget { core: gate.clone(), gate, frame })
    }

    /// Gate whose core L⁻¹·gate·L must be Clifford (checked).
    pub fn with_frame(gate: GateSpec, frame: GaugeFrame) -> Result<Self> {
        crate::error::check_dim(gate.n(), frame.n())?;
        let l = frame.matrix();
        let core_u = l.adjoint() * gate.unitary() * &l;
        let core = GateSpec::new(format!("{}-core", gate.name()), core_u)?;
        if !core.is_clifford() {
            return Err(Error::NotClifford(format!("{} is not Clifford in the given frame", gate.name())));
        }
        Ok(BenchmarkTarget { gate, core, frame })
    }

    /// Any gate, Clifford or not; only protocols without an inverse gate accept a non-Clifford core.
    pub fn unframed(gate: GateSpec) -> Self {
        let frame = GaugeFrame::identity(gate.n());
        BenchmarkTarget { core: gate.clone(), gate, frame }
    }

    pub fn name(&self) -> &str {
        self.gate.name()
    }

    pub fn n(&self) -> usize {
        self.gate.n()
    }

    pub fn gate(&self) -> &GateSpec {
        &self.gate
    }

    pub fn core(&self) -> &GateSpec {
        &self.core
    }

    pub fn frame(&self) -> &GaugeFrame {
        &self.frame
    }

    pub fn core_tableau(&self) -> Result<&CliffordTableau> {
        self.core
            .tableau()
            .ok_or_else(|| Error::NotClifford(format!("core of {} is not Clifford", self.name())))
    }
}

/// Controlled-(TX) as (I⊗√T)·CNOT·(I⊗√T⁻¹) with frame I⊗√T.
pub fn build_ctx() -> BenchmarkTarget {
    let frame = GaugeFrame::from_names(&[NamedGate::I, NamedGate::SqrtT]).expect("valid frame");
    let l = frame.matrix();
    let u = &l * cnot() * l.adjoint();
    let core = GateSpec::new("cnot", cnot()).expect("unitary");
    BenchmarkTarget { gate: GateSpec::new("ctx", u).expect("unitary"), core, frame }
}

pub fn build_cz() -> BenchmarkTarget {
    BenchmarkTarget::clifford(GateSpec::new("cz", cz()).expect("unitary")).expect("Clifford")
}

pub fn build_cnot() -> BenchmarkTarget {
    BenchmarkTarget::clifford(GateSpec::new("cnot", cnot()).expect("unitary")).expect("Clifford")
}

pub fn build_identity(n: usize) -> BenchmarkTarget {
    BenchmarkTarget::clifford(GateSpec::new("identity", identity(1 << n)).expect("unitary")).expect("Clifford")
}

/// One column of a circuit drawing, applied in order within the column (they commute anyway).
enum Op {
    One(usize, CMatrix),
    Cz(usize, usize),
}

fn circuit_unitary(n: usize, columns: &[Vec<Op>]) -> CMatrix {
    let mut u = identity(1 << n);
    for col in columns {
        for op in col {
            let g = match op {
                Op::One(q, m) => embed_single(m, *q, n),
                Op::Cz(a, b) => embed_pair(&cz(), *a, *b, n),
            };
            u = g * u;
        }
    }
    u
}

/// The 5-qubit stabilizer encoding circuit. Box labels read left to right in time, so "SH"
/// is S followed by H (matrix H·S).
pub fn build_five_qubit_encoder() -> BenchmarkTarget {
    let h = hadamard();
    let s = phase_s();
    let sh = &h * &s;
    let hsh = &h * &s * &h;
    let hsdg = s.adjoint() * &h;
    let columns = vec![
        vec![Op::One(0, sh), Op::One(1, h.clone()), Op::One(2, h.clone()), Op::One(3, h.clone()), Op::One(4, h.clone())],
        vec![Op::Cz(2, 4)],
        vec![Op::Cz(1, 3)],
        vec![Op::Cz(0, 1), Op::Cz(3, 4)],
        vec![Op::One(0, hsh), Op::One(1, s.clone()), Op::One(2, s.clone()), Op::One(3, s.clone()), Op::One(4, hsdg)],
        vec![Op::Cz(0, 4)],
        vec![Op::One(0, h.clone()), Op::One(1, h.clone()), Op::One(4, h.clone())],
        vec![Op::Cz(1, 4)],
        vec![Op::One(1, h)],
    ];
    let u = circuit_unitary(5, &columns);
    BenchmarkTarget::clifford(GateSpec::new("five-qubit-encoder", u).expect("unitary")).expect("Clifford")
}

/// Smallest l ≤ max with U^l = I, exactly (`up_to_phase = false`) or as a channel.
pub fn cyclic_number(u: &CMatrix, max: usize, tol: f64, up_to_phase: bool) -> Option<usize> {
    let d = u.nrows();
    let id = identity(d);
    let mut acc = u.clone();
    for l in 1..=max {
        let diff = if up_to_phase { crate::linalg::phase_insensitive_diff(&acc, &id) } else { max_abs_diff(&acc, &id) };
        if diff < tol {
            return Some(l);
        }
        acc = u * acc;
    }
    None
}

/// Dense unitary from a text file: one row per line, entries `re,im` or `re` separated by spaces.
pub fn parse_unitary(text: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<num_complex::Complex64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(parse_entry).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse("unitary must be a non-empty square matrix".into()));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| rows[r][c]))
}

fn parse_entry(tok: &str) -> Result<num_complex::Complex64> {
    let bad = || Error::Parse(format!("bad matrix entry {tok:?}"));
    let mut parts = tok.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(t) => t.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(num_complex::Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, phase_insensitive_diff};
    use crate::pauli::PauliOperator;

    #[test]
    fn ctx_frame_and_core() {
        let t = build_ctx();
        let l = t.frame().matrix();
        let rebuilt = &l * t.core().unitary() * l.adjoint();
        assert!(max_abs_diff(&rebuilt, t.gate().unitary()) < 1e-12);
        assert!(!t.gate().is_clifford());
        assert!(t.core().is_clifford());
        // CTX squares to the identity
        let sq = t.gate().unitary() * t.gate().unitary();
        assert!(max_abs_diff(&sq, &identity(4)) < 1e-12);
    }

    #[test]
    fn ctx_is_controlled_tx_up_to_control_phase() {
        let tx = NamedGate::T.matrix() * crate::pauli::PauliOperator::single(1, 0, 1).matrix();
        let mut ctrl_tx = identity(4);
        for r in 0..2 {
            for col in 0..2 {
                ctrl_tx[(2 + r, 2 + col)] = tx[(r, col)];
            }
        }
        let phase = kron_all(&[phase_gate(-PI / 8.0), identity(2)]);
        assert!(max_abs_diff(&(phase * ctrl_tx), build_ctx().gate().unitary()) < 1e-12);
    }

    #[test]
    fn with_frame_recovers_ctx_core_and_rejects_bad_frames() {
        let ctx = build_ctx();
        let t = BenchmarkTarget::with_frame(ctx.gate().clone(), ctx.frame().clone()).unwrap();
        assert_eq!(t.core_tableau().unwrap(), build_cnot().core_tableau().unwrap());
        let bad = GaugeFrame::identity(2);
        assert!(matches!(BenchmarkTarget::with_frame(ctx.gate().clone(), bad), Err(Error::NotClifford(_))));
    }

    #[test]
    fn standard_gates() {
        let cz = build_cz();
        let sq = cz.gate().unitary() * cz.gate().unitary();
        assert!(max_abs_diff(&sq, &identity(4)) < 1e-15);
        let xi: PauliOperator = "XI".parse().unwrap();
        let img = build_cnot().core_tableau().unwrap().conjugate_pauli(&xi).unwrap();
        assert_eq!(img.to_string(), "+XX");
        assert!(build_identity(3).core_tableau().unwrap().is_identity());
    }

    #[test]
    fn encoder_is_clifford_with_cyclic_number_124() {
        let enc = build_five_qubit_encoder();
        assert!(enc.gate().is_clifford());
        assert_eq!(cyclic_number(enc.gate().unitary(), 200, 1e-8, false), Some(124));
        // as a channel the cycle closes earlier
        assert_eq!(cyclic_number(enc.gate().unitary(), 200, 1e-8, true), Some(31));
        let prod = enc.gate().unitary() * enc.gate().inverse_unitary();
        assert!(phase_insensitive_diff(&prod, &identity(32)) < 1e-12);
    }

    #[test]
    fn named_gates_and_parsing() {
        assert_eq!("sqrt-t".parse::<NamedGate>().unwrap(), NamedGate::SqrtT);
        assert!(matches!("phase:0.5".parse::<NamedGate>().unwrap(), NamedGate::Phase(x) if x == 0.5));
        assert!("u3".parse::<NamedGate>().is_err());
        let sq = NamedGate::SqrtT.matrix() * NamedGate::SqrtT.matrix();
        assert!(max_abs_diff(&sq, &NamedGate::T.matrix()) < 1e-15);
        let u = parse_unitary("0 1\n1 0").unwrap();
        assert_eq!(u[(0, 1)], c(1.0, 0.0));
        let u = parse_unitary("1 0\n0 0,1").unwrap();
        assert!(max_abs_diff(&u, &phase_s()) < 1e-15);
        assert!(parse_unitary("1 0\n0").is_err());
        assert!(matches!(GateSpec::new("bad", parse_unitary("1 1\n0 1").unwrap()), Err(Error::NotUnitary(_))));
    }
}
