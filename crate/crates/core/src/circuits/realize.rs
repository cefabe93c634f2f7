//! Physical gate lists for sampled plans.
//!
//! In a framed target L·U·L⁻¹ the frame is absorbed into neighbouring gates: the character
//! and first twirl become L·P₁·P₀, every later twirl L·P·L⁻¹, the closing Pauli R·L⁻¹. Noise
//! is attached per gate: Λ_t acts just before each target application and Λ_ref just after
//! each twirling or inverse gate.

use super::gates::BenchmarkTarget;
use super::plan::{PlanBody, SequencePlan};
use crate::linalg::{identity, kron_all, CMatrix};
use crate::pauli::{CliffordTableau, PauliOperator, SingleQubitClifford};

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Pauli(PauliOperator),
    Local(Vec<SingleQubitClifford>),
    /// L, or L⁻¹ when `inverse`.
    Frame { inverse: bool },
    /// Clifford core U (or U⁻¹).
    Core { inverse: bool },
    /// The physical target L·U·L⁻¹ (or its inverse).
    Target { inverse: bool },
    Clifford(CliffordTableau),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateNoise {
    Ideal,
    /// Λ_t, applied before the gate.
    TargetBefore,
    /// Λ_ref, applied after the gate.
    ReferenceAfter,
}

/// One physical gate: its factors in time order and where noise attaches.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGate {
    pub factors: Vec<Factor>,
    pub noise: GateNoise,
}

impl PhysicalGate {
    fn new(factors: Vec<Factor>, noise: GateNoise) -> Self {
        PhysicalGate { factors, noise }
    }
}

fn twirl_layers(twirls: &[PauliOperator], framed: bool, gates: &mut Vec<PhysicalGate>) {
    // twirls[0] is already merged into the opening gate
    for (k, _) in twirls.iter().enumerate() {
        if k > 0 {
            let mut f = Vec::with_capacity(3);
            if framed {
                f.push(Factor::Frame { inverse: true });
            }
            f.push(Factor::Pauli(twirls[k]));
            if framed {
                f.push(Factor::Frame { inverse: false });
            }
            gates.push(PhysicalGate::new(f, GateNoise::ReferenceAfter));
        }
        gates.push(PhysicalGate::new(vec![Factor::Target { inverse: k % 2 == 1 }], GateNoise::TargetBefore));
    }
}

fn opening(first: Factor, twirls: &[PauliOperator], framed: bool) -> PhysicalGate {
    let mut f = vec![first];
    if let Some(p) = twirls.first() {
        f.push(Factor::Pauli(*p));
    }
    if framed {
        f.push(Factor::Frame { inverse: false });
    }
    PhysicalGate::new(f, GateNoise::ReferenceAfter)
}

fn closing(inverse: PauliOperator, framed: bool) -> PhysicalGate {
    let mut f = Vec::with_capacity(2);
    if framed {
        f.push(Factor::Frame { inverse: true });
    }
    f.push(Factor::Pauli(inverse));
    PhysicalGate::new(f, GateNoise::ReferenceAfter)
}

/// Gauge-merged gate list (what an experiment would run).
pub fn realize(plan: &SequencePlan, target: &BenchmarkTarget) -> Vec<PhysicalGate> {
    let framed = !target.frame().is_trivial();
    let mut gates = Vec::new();
    match &plan.body {
        PlanBody::Ccb { character, twirls, inverse } => {
            gates.push(opening(Factor::Pauli(*character), twirls, framed));
            twirl_layers(twirls, framed, &mut gates);
            gates.push(closing(*inverse, framed));
        }
        PlanBody::Cab { clifford, twirls, inverse } => {
            gates.push(opening(Factor::Local(clifford.clone()), twirls, framed));
            twirl_layers(twirls, framed, &mut gates);
            gates.push(closing(*inverse, framed));
            let inv: Vec<_> = clifford.iter().map(|c| c.inverse()).collect();
            gates.push(PhysicalGate::new(vec![Factor::Local(inv)], GateNoise::ReferenceAfter));
        }
        PlanBody::Xeb { layers } => {
            for layer in layers {
                gates.push(PhysicalGate::new(vec![Factor::Local(layer.clone())], GateNoise::Ideal));
                gates.push(PhysicalGate::new(vec![Factor::Target { inverse: false }], GateNoise::TargetBefore));
            }
        }
        PlanBody::Icrb { character, cliffords, inverse } => {
            for (k, c) in cliffords.iter().enumerate() {
                let mut f = Vec::with_capacity(2);
                if k == 0 {
                    f.push(Factor::Pauli(*character));
                }
                f.push(Factor::Clifford(c.clone()));
                gates.push(PhysicalGate::new(f, GateNoise::ReferenceAfter));
                gates.push(PhysicalGate::new(vec![Factor::Target { inverse: false }], GateNoise::TargetBefore));
            }
            let mut f = Vec::with_capacity(2);
            if cliffords.is_empty() {
                f.push(Factor::Pauli(*character));
            }
            f.push(Factor::Clifford(inverse.clone()));
            gates.push(PhysicalGate::new(f, GateNoise::ReferenceAfter));
        }
    }
    gates
}

/// The same sequence with every frame gate L, L⁻¹ standing alone and each target written as
/// L⁻¹, U, L around the Clifford core. Noise stays attached to the outer ends of each merged gate.
pub fn realize_explicit(plan: &SequencePlan, target: &BenchmarkTarget) -> Vec<PhysicalGate> {
    let mut out = Vec::new();
    for gate in realize(plan, target) {
        let mut factors: Vec<Factor> = Vec::new();
        for f in gate.factors {
            match f {
                Factor::Target { inverse } => {
                    factors.push(Factor::Frame { inverse: true });
                    factors.push(Factor::Core { inverse });
                    factors.push(Factor::Frame { inverse: false });
                }
                other => factors.push(other),
            }
        }
        let last = factors.len() - 1;
        for (k, f) in factors.into_iter().enumerate() {
            let noise = match gate.noise {
                GateNoise::TargetBefore if k == 0 => GateNoise::TargetBefore,
                GateNoise::ReferenceAfter if k == last => GateNoise::ReferenceAfter,
                _ => GateNoise::Ideal,
            };
            out.push(PhysicalGate::new(vec![f], noise));
        }
    }
    out
}

/// Dense unitary of a factor; `None` for tableau-only Cliffords.
pub fn factor_unitary(f: &Factor, target: &BenchmarkTarget) -> Option<CMatrix> {
    Some(match f {
        Factor::Pauli(p) => p.matrix(),
        Factor::Local(cs) => kron_all(&cs.iter().map(|c| c.unitary()).collect::<Vec<_>>()),
        Factor::Frame { inverse: false } => target.frame().matrix(),
        Factor::Frame { inverse: true } => target.frame().matrix().adjoint(),
        Factor::Core { inverse: false } => target.core().unitary().clone(),
        Factor::Core { inverse: true } => target.core().inverse_unitary().clone(),
        Factor::Target { inverse: false } => target.gate().unitary().clone(),
        Factor::Target { inverse: true } => target.gate().inverse_unitary().clone(),
        Factor::Clifford(_) => return None,
    })
}

pub fn gate_unitary(g: &PhysicalGate, target: &BenchmarkTarget) -> Option<CMatrix> {
    let mut u = identity(1 << target.n());
    for f in &g.factors {
        u = factor_unitary(f, target)? * u;
    }
    Some(u)
}

/// Noiseless product of a gate list.
pub fn sequence_unitary(gates: &[PhysicalGate], target: &BenchmarkTarget) -> Option<CMatrix> {
    let mut u = identity(1 << target.n());
    for g in gates {
        u = gate_unitary(g, target)? * u;
    }
    Some(u)
}
