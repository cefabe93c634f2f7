//! End-to-end pipeline: noise draw, depth grid, Monte Carlo, fits, aggregation, confidence.

use serde::{Deserialize, Serialize};

use super::config::{DepthGrid, ExperimentConfig, RatioSettings};
use crate::channels::NoiseInstance;
use crate::circuits::{build_identity, BenchmarkTarget, Protocol};
use crate::error::{Error, Result};
use crate::estimation::{
    bias_bound, confidence_report, epsilons_for_delta, estimate_from_table, exact_ccb_fidelity, exact_process_fidelity,
    m_max, ratio_estimate, BiasInputs, Component, ConfidenceInputs, ConfidenceReport, DepthMean, RatioConvention,
    TableEstimate,
};
use crate::pauli::{all_paulis, PauliOperator};
use crate::simulator::{monte_carlo, sequence_rng, stream_id, MonteCarloSpec, MonteCarloTable, Simulator};
use rand::seq::index::sample;

const NOISE_SALT: u64 = 0x6e6f_6973_65;
const OBSERVABLE_SALT: u64 = 0x6f62_73;
const PILOT_SALT: u64 = 0x7069_6c6f_74;
const REFERENCE_SALT: u64 = 0x7265_66;

fn protocol_code(p: Protocol) -> u64 {
    match p {
        Protocol::Ccb => 1,
        Protocol::Cab => 2,
        Protocol::Xeb => 3,
        Protocol::Icrb => 4,
    }
}

/// Exact values of the constructed noise for one repeat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReference {
    /// F(Λ_t ∘ Λ_ref).
    pub process_fidelity: f64,
    /// F(Λ_t).
    pub target_fidelity: f64,
    pub ccb_fidelity: Option<f64>,
}

impl ExactReference {
    pub fn of(target: &BenchmarkTarget, noise: &NoiseInstance) -> Result<Self> {
        let ccb_fidelity = match target.core_tableau() {
            Ok(_) => Some(exact_ccb_fidelity(target, noise)?),
            Err(_) => None,
        };
        Ok(ExactReference {
            process_fidelity: exact_process_fidelity(noise),
            target_fidelity: noise.target_fidelity(),
            ccb_fidelity,
        })
    }

    /// The value a protocol's estimate is compared with.
    pub fn for_protocol(&self, protocol: Protocol) -> f64 {
        match protocol {
            Protocol::Ccb => self.ccb_fidelity.unwrap_or(self.process_fidelity),
            _ => self.process_fidelity,
        }
    }
}

/// Two-depth ratio estimate of CCB with its confidence report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioAnalysis {
    pub convention: RatioConvention,
    pub lambdas: Vec<(String, f64)>,
    pub estimate: f64,
    /// Mean of the λ̂ computed with the other exponent convention.
    pub alternate_estimate: f64,
    pub bias_detailed_mean: f64,
    pub bias_envelope: f64,
    /// Whether 1/2 < f̄ at m₁ held for every sampled Pauli.
    pub assumption_holds: bool,
    pub report: ConfidenceReport,
    pub interval: (f64, f64),
}

fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64
}

/// Ratio analysis of a CCB table holding depths m₁ and m₂.
pub fn ratio_analysis(table: &MonteCarloTable, settings: &RatioSettings) -> Result<RatioAnalysis> {
    let labels = table.observables();
    let (m1, m2) = (settings.m1, settings.m2);
    let other = match settings.convention {
        RatioConvention::PerLayer => RatioConvention::Literal,
        RatioConvention::Literal => RatioConvention::PerLayer,
    };
    let mut lambdas = Vec::with_capacity(labels.len());
    let mut alternate = 0.0;
    let mut bias_sum = 0.0;
    let mut envelope: f64 = 0.0;
    let mut holds = true;
    let (mut vmax1, mut vmax2) = (0.0f64, 0.0f64);
    let (mut k1, mut k2) = (usize::MAX, usize::MAX);
    for label in &labels {
        let (a, b) = (table.cell(label, m1), table.cell(label, m2));
        if a.is_empty() || b.is_empty() {
            return Err(Error::UndefinedEstimate(format!("{label} lacks data at m = {m1} or {m2}")));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let f1 = DepthMean { m: m1, value: mean(&a) };
        let f2 = DepthMean { m: m2, value: mean(&b) };
        let lam = ratio_estimate(f1, f2, settings.convention)?;
        alternate += ratio_estimate(f1, f2, other)?;
        let (v1, v2) = (sample_variance(&a), sample_variance(&b));
        let bias = bias_bound(
            &BiasInputs { m1, m2, k1: a.len(), k2: b.len(), var1: v1, var2: v2, mean1: f1.value, mean2: f2.value },
            settings.convention,
        )?;
        bias_sum += bias.detailed;
        envelope = envelope.max(bias.envelope);
        holds &= bias.assumption_holds;
        vmax1 = vmax1.max(v1);
        vmax2 = vmax2.max(v2);
        k1 = k1.min(a.len());
        k2 = k2.min(b.len());
        lambdas.push((label.clone(), lam));
    }
    let m = labels.len();
    let estimate = lambdas.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let (eps_m, eps1, eps2) = epsilons_for_delta(settings.delta, m, k1, k2)?;
    let eps_b = bias_sum / m as f64;
    let report = confidence_report(&ConfidenceInputs {
        m,
        k1,
        k2,
        eps_m,
        eps1,
        eps2,
        eps_b,
        m1,
        m2,
        variances: Some((vmax1, vmax2)),
    })?;
    let interval = report.interval(estimate);
    Ok(RatioAnalysis {
        convention: settings.convention,
        lambdas,
        estimate,
        alternate_estimate: alternate / m as f64,
        bias_detailed_mean: eps_b,
        bias_envelope: envelope,
        assumption_holds: holds,
        report,
        interval,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolRun {
    pub repeat: usize,
    pub protocol: Protocol,
    pub table: MonteCarloTable,
    pub estimate: TableEstimate,
    pub ratio: Option<RatioAnalysis>,
    pub exact: ExactReference,
}

impl ProtocolRun {
    /// The reported fidelity: the ratio estimate when present, else the fitted one.
    pub fn fidelity(&self) -> f64 {
        self.ratio.as_ref().map_or(self.estimate.estimate.value, |r| r.estimate)
    }
}

/// Per-protocol statistics over repeats, with single-shot accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: Protocol,
    pub repeats: usize,
    pub fidelities: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over repeats (0 for one repeat).
    pub std: f64,
    pub exact_mean: f64,
    pub sequences: usize,
    pub observables: Option<usize>,
    pub depths: Vec<usize>,
    /// Circuits run per repeat, counting every character of ICRB and every Pauli of CCB.
    pub circuits_per_repeat: u64,
    /// 2ⁿ for ICRB, 1 otherwise.
    pub character_overhead: u64,
    pub shots_per_circuit: Option<u64>,
    pub single_shots_per_repeat: Option<u64>,
    /// Decays averaged over repeats.
    pub components: Vec<Component>,
    pub confidence: Option<ConfidenceReport>,
}

/// F_ccb against the identity-gate reference run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOutcome {
    pub ccb: Vec<f64>,
    pub reference: Vec<f64>,
    pub ratios: Vec<f64>,
    pub mean_ratio: f64,
}

/// F_ccb / F_ccb^I, guarded against a nonpositive reference.
pub fn reference_ratio(ccb: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::UndefinedEstimate(format!("reference fidelity {reference} is not positive")));
    }
    Ok(ccb / reference)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub n: usize,
    pub runs: Vec<ProtocolRun>,
    pub summaries: Vec<ProtocolSummary>,
    pub reference: Option<ReferenceOutcome>,
    /// Automatic-grid pilot guess, when used.
    pub pilot_decay: Option<f64>,
}

impl ExperimentOutcome {
    pub fn summary(&self, protocol: Protocol) -> Option<&ProtocolSummary> {
        self.summaries.iter().find(|s| s.protocol == protocol)
    }
}

fn noise_for_repeat(cfg: &ExperimentConfig, n: usize, repeat: usize) -> Result<NoiseInstance> {
    let salt = if cfg.resample_noise { repeat as u64 } else { 0 };
    let mut rng = sequence_rng(cfg.noise_seed.unwrap_or(cfg.seed), stream_id(&[NOISE_SALT, salt]));
    cfg.noise.build(n, &mut rng)
}

/// M distinct Paulis drawn uniformly without replacement.
fn sample_observables(cfg: &ExperimentConfig, n: usize, repeat: usize) -> Result<Vec<PauliOperator>> {
    let total = 1usize << (2 * n);
    if cfg.observables > total {
        return Err(Error::Config(format!("observables = {} exceeds 4ⁿ = {total}", cfg.observables)));
    }
    let mut rng = sequence_rng(cfg.seed, stream_id(&[OBSERVABLE_SALT, repeat as u64]));
    let all: Vec<PauliOperator> = all_paulis(n).collect();
    Ok(sample(&mut rng, total, cfg.observables).into_iter().map(|i| all[i]).collect())
}

/// μ guess from a two-depth CAB pilot: per-label ratio estimates combined with CAB weights.
pub fn pilot_decay(sim: &Simulator, pilot: [usize; 2], sequences: usize, seed: u64) -> Result<f64> {
    let mut spec = MonteCarloSpec::new(Protocol::Cab, pilot.to_vec(), sequences, seed);
    spec.salt = PILOT_SALT;
    let table = monte_carlo(sim, &spec)?;
    let n = sim.n();
    let mut total = 0.0;
    for label in crate::estimation::z_labels(n) {
        let w = 3f64.powi(label.weight() as i32);
        let mu = if label.is_identity() {
            1.0
        } else {
            let mean = |m: usize| {
                let v = table.cell(&label.label(), m);
                v.iter().sum::<f64>() / v.len() as f64
            };
            ratio_estimate(
                DepthMean { m: pilot[0], value: mean(pilot[0]) },
                DepthMean { m: pilot[1], value: mean(pilot[1]) },
                RatioConvention::PerLayer,
            )
            .unwrap_or(0.0)
            .min(1.0)
        };
        total += w * mu;
    }
    Ok(total / 4f64.powi(n as i32))
}

fn resolve_depths(cfg: &ExperimentConfig, sim: &Simulator) -> Result<(Vec<usize>, Option<f64>)> {
    match &cfg.depths {
        DepthGrid::Auto { rule, pilot, pilot_sequences, stride } => {
            let mu = pilot_decay(sim, *pilot, *pilot_sequences, cfg.seed)?;
            let top = m_max(mu, *rule)?;
            let mut grid: Vec<usize> = (1..=top).step_by(*stride).collect();
            if grid.last() != Some(&top) {
                grid.push(top);
            }
            Ok((grid, Some(mu)))
        }
        other => Ok((other.explicit().expect("explicit grid"), None)),
    }
}

/// Depths a protocol actually runs: ICRB doubles m so both count the same target gates.
fn protocol_depths(cfg: &ExperimentConfig, protocol: Protocol, grid: &[usize]) -> Vec<usize> {
    match (protocol, &cfg.ratio) {
        (Protocol::Ccb, Some(r)) => vec![r.m1, r.m2],
        (Protocol::Icrb, _) => grid.iter().map(|m| 2 * m).collect(),
        _ => grid.to_vec(),
    }
}

fn circuits_per_depth(cfg: &ExperimentConfig, protocol: Protocol, n: usize) -> u64 {
    let k = cfg.sequences as u64;
    match protocol {
        Protocol::Ccb => k * cfg.observables as u64,
        Protocol::Icrb => k << n,
        _ => k,
    }
}

fn run_protocol(
    cfg: &ExperimentConfig,
    sim: &Simulator,
    protocol: Protocol,
    depths: Vec<usize>,
    observables: Vec<PauliOperator>,
    salt: u64,
) -> Result<(MonteCarloTable, TableEstimate)> {
    let mut spec = MonteCarloSpec::new(protocol, depths, cfg.sequences, cfg.seed);
    spec.observables = observables;
    spec.shots = cfg.shots;
    spec.xeb_normalization = cfg.xeb_normalization;
    spec.salt = salt;
    let table = monte_carlo(sim, &spec)?;
    let mut estimate = estimate_from_table(&table)?;
    estimate.estimate.seed = Some(cfg.seed);
    Ok((table, estimate))
}

fn summarize(cfg: &ExperimentConfig, n: usize, protocol: Protocol, runs: &[&ProtocolRun]) -> ProtocolSummary {
    let fidelities: Vec<f64> = runs.iter().map(|r| r.fidelity()).collect();
    let count = fidelities.len();
    let mean = fidelities.iter().sum::<f64>() / count as f64;
    let std = sample_variance(&fidelities).sqrt();
    let exact_mean = runs.iter().map(|r| r.exact.for_protocol(protocol)).sum::<f64>() / count as f64;
    let depths = runs[0].table.depths();
    let circuits = circuits_per_depth(cfg, protocol, n) * depths.len() as u64;
    let overhead = if protocol == Protocol::Icrb { 1u64 << n } else { 1 };
    let mut components = runs[0].estimate.estimate.components.clone();
    if runs.iter().all(|r| r.estimate.estimate.components.len() == components.len()) {
        for (i, c) in components.iter_mut().enumerate() {
            c.decay = runs.iter().map(|r| r.estimate.estimate.components[i].decay).sum::<f64>() / count as f64;
        }
    }
    ProtocolSummary {
        protocol,
        repeats: count,
        fidelities,
        mean,
        std,
        exact_mean,
        sequences: cfg.sequences,
        observables: (protocol == Protocol::Ccb).then_some(cfg.observables),
        depths,
        circuits_per_repeat: circuits,
        character_overhead: overhead,
        shots_per_circuit: cfg.shots.count(),
        single_shots_per_repeat: cfg.shots.count().map(|s| s * circuits),
        components,
        confidence: runs[0].ratio.as_ref().map(|r| r.report.clone()),
    }
}

/// Runs every protocol of the config for every repeat.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let target = cfg.validate()?;
    let n = target.n();
    let protocols = cfg.protocols();
    let first_noise = noise_for_repeat(cfg, n, 0)?;
    let (grid, pilot) = resolve_depths(cfg, &Simulator::new(target.clone(), first_noise.clone())?)?;
    let mut runs = Vec::with_capacity(cfg.repeats * protocols.len());
    let mut reference: Option<ReferenceOutcome> =
        cfg.reference.then(|| ReferenceOutcome { ccb: vec![], reference: vec![], ratios: vec![], mean_ratio: 0.0 });
    for repeat in 0..cfg.repeats {
        let noise = if repeat == 0 || !cfg.resample_noise { first_noise.clone() } else { noise_for_repeat(cfg, n, repeat)? };
        let exact = ExactReference::of(&target, &noise)?;
        let sim = Simulator::new(target.clone(), noise.clone())?;
        for &protocol in &protocols {
            let observables = if protocol == Protocol::Ccb { sample_observables(cfg, n, repeat)? } else { Vec::new() };
            let salt = stream_id(&[protocol_code(protocol), repeat as u64]);
            let depths = protocol_depths(cfg, protocol, &grid);
            let (table, estimate) = run_protocol(cfg, &sim, protocol, depths.clone(), observables.clone(), salt)?;
            let ratio = match (&cfg.ratio, protocol) {
                (Some(r), Protocol::Ccb) => Some(ratio_analysis(&table, r)?),
                _ => None,
            };
            let run = ProtocolRun { repeat, protocol, table, estimate, ratio, exact: exact.clone() };
            if let (Some(out), Protocol::Ccb) = (reference.as_mut(), protocol) {
                let ref_sim = Simulator::new(build_identity(n), noise.reference_only())?;
                let ref_salt = stream_id(&[REFERENCE_SALT, repeat as u64]);
                let (ref_table, ref_est) = run_protocol(cfg, &ref_sim, protocol, depths, observables, ref_salt)?;
                let f_ref = match &cfg.ratio {
                    Some(r) => ratio_analysis(&ref_table, r)?.estimate,
                    None => ref_est.estimate.value,
                };
                let f = run.fidelity();
                out.ratios.push(reference_ratio(f, f_ref)?);
                out.ccb.push(f);
                out.reference.push(f_ref);
            }
            runs.push(run);
        }
    }
    if let Some(out) = reference.as_mut() {
        out.mean_ratio = out.ratios.iter().sum::<f64>() / out.ratios.len() as f64;
    }
    let summaries = protocols
        .iter()
        .map(|&p| {
            let of_p: Vec<&ProtocolRun> = runs.iter().filter(|r| r.protocol == p).collect();
            summarize(cfg, n, p, &of_p)
        })
        .collect();
    Ok(ExperimentOutcome { config: cfg.clone(), n, runs, summaries, reference, pilot_decay: pilot })
}

/// Row of a protocol comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub protocol: Protocol,
    pub mean: f64,
    pub std: f64,
    pub exact_mean: f64,
    pub single_shots_per_repeat: Option<u64>,
    pub circuits_per_repeat: u64,
    /// mean − mean of the first row.
    pub difference: f64,
}

pub fn comparison_table(summaries: &[ProtocolSummary]) -> Vec<ComparisonRow> {
    let base = summaries.first().map_or(0.0, |s| s.mean);
    summaries
        .iter()
        .map(|s| ComparisonRow {
            protocol: s.protocol,
            mean: s.mean,
            std: s.std,
            exact_mean: s.exact_mean,
            single_shots_per_repeat: s.single_shots_per_repeat,
            circuits_per_repeat: s.circuits_per_repeat,
            difference: s.mean - base,
        })
        .collect()
}

/// Runs several single-protocol configs that must share target, noise and seed.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Vec<ComparisonRow>> {
    let first = configs.first().ok_or_else(|| Error::Config("nothing to compare".into()))?;
    for c in &configs[1..] {
        if c.target != first.target {
            return Err(Error::Config("compared configs use different targets".into()));
        }
        if c.noise != first.noise || c.seed != first.seed || c.noise_seed != first.noise_seed {
            return Err(Error::Config("compared configs use different noise or seeds".into()));
        }
    }
    let mut summaries = Vec::new();
    for c in configs {
        summaries.extend(run_experiment(c)?.summaries);
    }
    Ok(comparison_table(&summaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{preset, ProtocolChoice, TargetKind, TargetSpec};
    use crate::simulator::Shots;

    fn small(protocol: ProtocolChoice) -> ExperimentConfig {
        let mut cfg = preset("ctx-fig3").unwrap();
        cfg.protocol = protocol;
        cfg.depths = DepthGrid::List { values: vec![1, 3, 6] };
        cfg.sequences = 4;
        cfg.observables = 3;
        cfg.repeats = 2;
        cfg
    }

    #[test]
    fn identity_target_without_noise_is_perfect() {
        let mut cfg = small(ProtocolChoice::Compare);
        cfg.compare = vec![Protocol::Cab, Protocol::Ccb];
        cfg.target = TargetSpec { qubits: Some(2), ..TargetSpec::named(TargetKind::Identity) };
        cfg.noise = Default::default();
        let out = run_experiment(&cfg).unwrap();
        for s in &out.summaries {
            assert!((s.mean - 1.0).abs() < 1e-9, "{:?} {}", s.protocol, s.mean);
        }
    }

    #[test]
    fn runs_are_reproducible_and_accounted() {
        let mut cfg = small(ProtocolChoice::Compare);
        cfg.compare = vec![Protocol::Cab, Protocol::Ccb];
        cfg.shots = Shots::Finite(50);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.runs, b.runs);
        let ccb = a.summary(Protocol::Ccb).unwrap();
        assert_eq!(ccb.circuits_per_repeat, 4 * 3 * 3);
        assert_eq!(ccb.single_shots_per_repeat, Some(50 * 36));
        assert_eq!(a.runs.len(), 4);
    }

    #[test]
    fn icrb_overhead_and_doubled_depths() {
        let mut cfg = preset("cz-d4").unwrap();
        cfg.depths = DepthGrid::List { values: vec![1, 2] };
        cfg.sequences = 3;
        cfg.repeats = 1;
        let out = run_experiment(&cfg).unwrap();
        let icrb = out.summary(Protocol::Icrb).unwrap();
        assert_eq!(icrb.depths, vec![2, 4]);
        assert_eq!(icrb.character_overhead, 4);
        assert_eq!(icrb.single_shots_per_repeat, Some(100 * 3 * 4 * 2));
        let cab = out.summary(Protocol::Cab).unwrap();
        assert_eq!(cab.single_shots_per_repeat, Some(100 * 3 * 2));
    }

    #[test]
    fn auto_grid_uses_pilot() {
        let mut cfg = small(ProtocolChoice::Cab);
        cfg.depths = DepthGrid::Auto { rule: Default::default(), pilot: [1, 4], pilot_sequences: 5, stride: 5 };
        cfg.repeats = 1;
        let out = run_experiment(&cfg).unwrap();
        let mu = out.pilot_decay.unwrap();
        let top = *out.summaries[0].depths.last().unwrap();
        assert_eq!(top, m_max(mu, Default::default()).unwrap());
        assert!(mu > 0.9 && mu < 1.0);
    }

    #[test]
    fn ratio_mode_reports_confidence() {
        let mut cfg = small(ProtocolChoice::Ccb);
        cfg.ratio = Some(RatioSettings { m1: 1, m2: 4, convention: RatioConvention::PerLayer, delta: 0.1 });
        cfg.sequences = 10;
        let out = run_experiment(&cfg).unwrap();
        let run = &out.runs[0];
        let ratio = run.ratio.as_ref().unwrap();
        assert_eq!(run.table.depths(), vec![1, 4]);
        assert!(ratio.report.delta <= 0.1 + 1e-12);
        assert!(ratio.interval.0 < ratio.estimate && ratio.estimate < ratio.interval.1);
        // both exponents come from the same means
        assert!((ratio.alternate_estimate - ratio.lambdas.iter().map(|l| l.1 * l.1).sum::<f64>() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reference_workflow_with_noiseless_reference() {
        let mut cfg = small(ProtocolChoice::Ccb);
        cfg.noise.reference = Default::default();
        cfg.noise.spam = Default::default();
        cfg.reference = true;
        let out = run_experiment(&cfg).unwrap();
        let r = out.reference.unwrap();
        for (f, ratio) in r.ccb.iter().zip(&r.ratios) {
            assert!((f - ratio).abs() < 1e-12);
        }
        assert!(reference_ratio(0.9, 0.0).is_err());
        assert_eq!(reference_ratio(0.4, 0.5).unwrap(), 0.8);
    }

    #[test]
    fn compare_rejects_mismatched_targets() {
        let a = small(ProtocolChoice::Cab);
        let mut b = small(ProtocolChoice::Ccb);
        b.target = TargetSpec::named(TargetKind::Cz);
        assert!(compare(&[a.clone(), b]).unwrap_err().is_config());
        let rows = compare(&[a.clone(), a]).unwrap();
        assert_eq!(rows[1].difference, 0.0);
    }
}
