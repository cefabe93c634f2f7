//! Averaging over K random sequences per depth, on a worker pool.
//!
//! Every sequence draws from its own ChaCha8 stream: the generator is seeded with the master
//! seed and its stream number is `stream_id([salt, slot, m, k])`, where `slot` is the position
//! of the observable (CCB) or zero. The schedule therefore cannot change any sampled gate,
//! and results are collected in task order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::Simulator;
use super::run::{xeb_statistic, Shots, XebNormalization};
use crate::circuits::{cab_plan, ccb_plan, icrb_plan_with_character, xeb_plan, Protocol};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// SplitMix64 finalizer folded over the parts.
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

pub fn sequence_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Observable label used for the per-sequence cross-entropy statistic.
pub const XEB_LABEL: &str = "xeb";
/// Observable label used for the combined character-weighted ICRB survival.
pub const ICRB_LABEL: &str = "character";

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloSpec {
    pub protocol: Protocol,
    pub depths: Vec<usize>,
    /// K sequences per depth (per observable for CCB).
    pub sequences: usize,
    /// P_j list (CCB only).
    pub observables: Vec<PauliOperator>,
    pub shots: Shots,
    pub xeb_normalization: XebNormalization,
    pub seed: u64,
    /// Separates independent repetitions that share a seed.
    pub salt: u64,
}

impl MonteCarloSpec {
    pub fn new(protocol: Protocol, depths: Vec<usize>, sequences: usize, seed: u64) -> Self {
        MonteCarloSpec {
            protocol,
            depths,
            sequences,
            observables: Vec::new(),
            shots: Shots::Exact,
            xeb_normalization: XebNormalization::default(),
            seed,
            salt: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceValue {
    pub m: usize,
    pub sequence: usize,
    pub observable: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloTable {
    pub protocol: Protocol,
    pub n: usize,
    pub shots: Option<u64>,
    /// Ordered by (observable slot, m, sequence), one row per observable reading.
    pub rows: Vec<SequenceValue>,
}

impl MonteCarloTable {
    /// Observable labels in first-seen order.
    pub fn observables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.observable) {
                out.push(r.observable.clone());
            }
        }
        out
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = self.rows.iter().map(|r| r.m).collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    pub fn cell(&self, observable: &str, m: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.observable == observable && r.m == m).map(|r| r.value).collect()
    }

    /// (m, mean over sequences) for one observable.
    pub fn series(&self, observable: &str) -> Vec<(usize, f64)> {
        self.depths()
            .into_iter()
            .filter_map(|m| {
                let v = self.cell(observable, m);
                (!v.is_empty()).then(|| (m, v.iter().sum::<f64>() / v.len() as f64))
            })
            .collect()
    }

    /// The same table restricted to the first k sequences of every cell.
    pub fn truncated(&self, k: usize) -> MonteCarloTable {
        MonteCarloTable {
            protocol: self.protocol,
            n: self.n,
            shots: self.shots,
            rows: self.rows.iter().filter(|r| r.sequence < k).cloned().collect(),
        }
    }
}

struct Task {
    slot: usize,
    m: usize,
    k: usize,
}

fn run_task(sim: &Simulator, spec: &MonteCarloSpec, task: &Task) -> Result<Vec<SequenceValue>> {
    let target = sim.target();
    let n = sim.n();
    let stream = stream_id(&[spec.salt, task.slot as u64, task.m as u64, task.k as u64]);
    let mut rng = sequence_rng(spec.seed, stream);
    let row = |observable: String, value: f64| SequenceValue { m: task.m, sequence: task.k, observable, value };
    match spec.protocol {
        Protocol::Cab => {
            let plan = cab_plan(target, task.m, &mut rng, stream)?;
            let rec = sim.run(&plan, None, spec.shots, &mut rng)?;
            Ok(rec.observations.into_iter().map(|o| row(o.observable.label(), o.value)).collect())
        }
        Protocol::Ccb => {
            let j = &spec.observables[task.slot];
            let plan = ccb_plan(target, task.m, &mut rng, stream)?;
            let rec = sim.run(&plan, Some(j), spec.shots, &mut rng)?;
            Ok(vec![row(j.label(), rec.observations[0].value)])
        }
        Protocol::Xeb => {
            let plan = xeb_plan(target, task.m, &mut rng, stream);
            let rec = sim.run(&plan, None, spec.shots, &mut rng)?;
            let ideal = rec.ideal_probabilities.as_ref().expect("cross-entropy records carry the ideal output");
            // sequences whose ideal output is flat carry no cross-entropy signal and are skipped
            match xeb_statistic(&rec.empirical(), ideal, spec.xeb_normalization) {
                Ok(v) => Ok(vec![row(XEB_LABEL.into(), v)]),
                Err(Error::UndefinedEstimate(_)) => Ok(Vec::new()),
                Err(e) => Err(e),
            }
        }
        Protocol::Icrb => {
            // all 2ⁿ X-type characters share one Clifford draw
            let d = 1u64 << n;
            let mut combined = 0.0;
            for x in 0..d {
                let mut plan_rng = sequence_rng(spec.seed, stream);
                let character = PauliOperator::new(n, x, 0);
                let plan = icrb_plan_with_character(target, task.m, &mut plan_rng, stream, character)?;
                let mut shot_rng = sequence_rng(spec.seed, stream_id(&[stream, x]));
                let rec = sim.run(&plan, None, spec.shots, &mut shot_rng)?;
                let weight = if x == 0 { (d - 1) as f64 } else { -1.0 };
                combined += weight * rec.observations[0].value / d as f64;
            }
            Ok(vec![row(ICRB_LABEL.into(), combined)])
        }
    }
}

/// Runs K sequences for every depth (and observable) and keeps every per-sequence value.
pub fn monte_carlo(sim: &Simulator, spec: &MonteCarloSpec) -> Result<MonteCarloTable> {
    if spec.sequences == 0 {
        return Err(Error::Config("need at least one sequence per depth".into()));
    }
    if spec.depths.is_empty() {
        return Err(Error::Config("empty depth grid".into()));
    }
    let slots = if spec.protocol == Protocol::Ccb {
        if spec.observables.is_empty() {
            return Err(Error::Config("character-cycle runs need at least one observable".into()));
        }
        spec.observables.len()
    } else {
        1
    };
    let tasks: Vec<Task> = (0..slots)
        .flat_map(|slot| {
            spec.depths.iter().flat_map(move |&m| (0..spec.sequences).map(move |k| Task { slot, m, k }))
        })
        .collect();
    let chunks: Vec<Vec<SequenceValue>> =
        tasks.par_iter().map(|t| run_task(sim, spec, t)).collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloTable {
        protocol: spec.protocol,
        n: sim.n(),
        shots: spec.shots.count(),
        rows: chunks.into_iter().flatten().collect(),
    })
}
