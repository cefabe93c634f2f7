use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::BenchmarkTarget;
use crate::error::{Error, Result};
use crate::pauli::{
    random_clifford, sample_local_clifford, sample_pauli, CliffordTableau, PauliOperator, SingleQubitClifford,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Ccb,
    Cab,
    Xeb,
    Icrb,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Ccb => "ccb",
            Protocol::Cab => "cab",
            Protocol::Xeb => "xeb",
            Protocol::Icrb => "icrb",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccb" => Ok(Protocol::Ccb),
            "cab" => Ok(Protocol::Cab),
            "xeb" => Ok(Protocol::Xeb),
            "icrb" => Ok(Protocol::Icrb),
            _ => Err(Error::Parse(format!("unknown protocol {s:?}"))),
        }
    }
}

/// Sampled gates of one benchmarking sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum PlanBody {
    Ccb {
        character: PauliOperator,
        twirls: Vec<PauliOperator>,
        inverse: PauliOperator,
    },
    Cab {
        clifford: Vec<SingleQubitClifford>,
        twirls: Vec<PauliOperator>,
        inverse: PauliOperator,
    },
    Xeb {
        layers: Vec<Vec<SingleQubitClifford>>,
    },
    Icrb {
        character: PauliOperator,
        cliffords: Vec<CliffordTableau>,
        inverse: CliffordTableau,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequencePlan {
    pub target: String,
    pub n: usize,
    pub m: usize,
    /// RNG stream the plan was drawn from.
    pub stream: u64,
    #[serde(flatten)]
    pub body: PlanBody,
}

impl SequencePlan {
    pub fn protocol(&self) -> Protocol {
        match self.body {
            PlanBody::Ccb { .. } => Protocol::Ccb,
            PlanBody::Cab { .. } => Protocol::Cab,
            PlanBody::Xeb { .. } => Protocol::Xeb,
            PlanBody::Icrb { .. } => Protocol::Icrb,
        }
    }

    /// Applications of the target gate.
    pub fn target_count(&self) -> usize {
        match &self.body {
            PlanBody::Icrb { cliffords, .. } => cliffords.len(),
            _ => 2 * self.m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Pauli R with U⁻¹P_{2m} ··· U⁻¹P₂UP₁ = R (up to phase), for Clifford core U.
///
/// Targets alternate U, U⁻¹, U, … and each is preceded by one twirl.
pub fn accumulated_pauli(core: &CliffordTableau, twirls: &[PauliOperator]) -> Result<PauliOperator> {
    let n = core.n();
    let core_inv = core.inverse();
    let mut frame = PauliOperator::identity(n);
    for (k, p) in twirls.iter().enumerate() {
        // before twirl k the Clifford part is U when k is odd, I when even
        let moved = if k % 2 == 1 { core_inv.conjugate_pauli(p)? } else { *p };
        frame = moved.mul(&frame)?;
    }
    Ok(frame.stripped())
}

fn sample_twirls<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<PauliOperator> {
    (0..count).map(|_| sample_pauli(rng, n)).collect()
}

pub fn ccb_plan<R: Rng + ?Sized>(target: &BenchmarkTarget, m: usize, rng: &mut R, stream: u64) -> Result<SequencePlan> {
    let core = target.core_tableau()?;
    let n = target.n();
    let character = sample_pauli(rng, n);
    let twirls = sample_twirls(rng, n, 2 * m);
    let inverse = accumulated_pauli(core, &twirls)?;
    Ok(SequencePlan {
        target: target.name().to_string(),
        n,
        m,
        stream,
        body: PlanBody::Ccb { character, twirls, inverse },
    })
}

pub fn cab_plan<R: Rng + ?Sized>(target: &BenchmarkTarget, m: usize, rng: &mut R, stream: u64) -> Result<SequencePlan> {
    let core = target.core_tableau()?;
    let n = target.n();
    let clifford = sample_local_clifford(rng, n);
    let twirls = sample_twirls(rng, n, 2 * m);
    let inverse = accumulated_pauli(core, &twirls)?;
    Ok(SequencePlan {
        target: target.name().to_string(),
        n,
        m,
        stream,
        body: PlanBody::Cab { clifford, twirls, inverse },
    })
}

/// 2m layers of (random local Clifford, target); works for any target.
pub fn xeb_plan<R: Rng + ?Sized>(target: &BenchmarkTarget, m: usize, rng: &mut R, stream: u64) -> SequencePlan {
    let n = target.n();
    let layers = (0..2 * m).map(|_| sample_local_clifford(rng, n)).collect();
    SequencePlan { target: target.name().to_string(), n, m, stream, body: PlanBody::Xeb { layers } }
}

/// Character Pauli drawn from the X-type subgroup {I, X}ⁿ, then `depth` rounds of
/// (random 2-qubit Clifford, target), closed by the global Clifford inverse.
pub fn icrb_plan<R: Rng + ?Sized>(
    target: &BenchmarkTarget,
    depth: usize,
    rng: &mut R,
    stream: u64,
) -> Result<SequencePlan> {
    let n = target.n();
    if n != 2 {
        return Err(Error::UnsupportedQubits { n, reason: "the interleaved character baseline is two-qubit only" });
    }
    let character = PauliOperator::new(n, rng.random_range(0..1u64 << n), 0);
    icrb_plan_with_character(target, depth, rng, stream, character)
}

/// Same Clifford draws for an explicit character (used to run all 2ⁿ characters of one sample).
pub fn icrb_plan_with_character<R: Rng + ?Sized>(
    target: &BenchmarkTarget,
    depth: usize,
    rng: &mut R,
    stream: u64,
    character: PauliOperator,
) -> Result<SequencePlan> {
    let n = target.n();
    let u = target
        .gate()
        .tableau()
        .ok_or_else(|| Error::NotClifford(format!("{} has no tableau", target.name())))?;
    let mut cliffords = Vec::with_capacity(depth);
    let mut acc = CliffordTableau::identity(n);
    for _ in 0..depth {
        let c = random_clifford(rng, n)?;
        acc = u.compose(&c.compose(&acc)?)?;
        cliffords.push(c);
    }
    Ok(SequencePlan {
        target: target.name().to_string(),
        n,
        m: depth,
        stream,
        body: PlanBody::Icrb { character, cliffords, inverse: acc.inverse() },
    })
}
