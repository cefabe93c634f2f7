//! Experiment configuration (TOML) and the built-in presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channels::{CorrelationSpec, DampingSpec, NoiseModel, PauliNoiseSpec, SpamSpec};
use crate::circuits::{
    build_cnot, build_ctx, build_cz, build_five_qubit_encoder, build_identity, parse_unitary, BenchmarkTarget,
    GateSpec, GaugeFrame, NamedGate, Protocol,
};
use crate::error::{Error, Result};
use crate::estimation::{DepthRule, RatioConvention};
use crate::simulator::{Shots, XebNormalization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolChoice {
    Ccb,
    Cab,
    Xeb,
    Icrb,
    /// Runs every protocol listed in `compare` on the same target and noise.
    Compare,
}

impl ProtocolChoice {
    fn single(self) -> Option<Protocol> {
        match self {
            ProtocolChoice::Ccb => Some(Protocol::Ccb),
            ProtocolChoice::Cab => Some(Protocol::Cab),
            ProtocolChoice::Xeb => Some(Protocol::Xeb),
            ProtocolChoice::Icrb => Some(Protocol::Icrb),
            ProtocolChoice::Compare => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Ctx,
    Cz,
    Cnot,
    FiveQubitEncoder,
    Identity,
    CustomUnitaryFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    /// Qubit count for the identity target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    /// Unitary file for custom targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Single-qubit gauge frame for custom targets, e.g. ["i", "sqrt-t"].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<String>>,
}

impl TargetSpec {
    pub fn named(kind: TargetKind) -> Self {
        TargetSpec { kind, qubits: None, path: None, frame: None }
    }

    pub fn build(&self) -> Result<BenchmarkTarget> {
        match self.kind {
            TargetKind::Ctx => Ok(build_ctx()),
            TargetKind::Cz => Ok(build_cz()),
            TargetKind::Cnot => Ok(build_cnot()),
            TargetKind::FiveQubitEncoder => Ok(build_five_qubit_encoder()),
            TargetKind::Identity => {
                let n = self.qubits.ok_or_else(|| Error::Config("identity target needs `qubits`".into()))?;
                if !(1..=6).contains(&n) {
                    return Err(Error::Config(format!("identity target supports 1 to 6 qubits, got {n}")));
                }
                Ok(build_identity(n))
            }
            TargetKind::CustomUnitaryFile => {
                let path = self.path.as_ref().ok_or_else(|| Error::Config("custom target needs `path`".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let name = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
                let gate = GateSpec::new(name, parse_unitary(&text)?)?;
                match &self.frame {
                    Some(names) => {
                        let gates = names.iter().map(|s| s.parse::<NamedGate>()).collect::<Result<Vec<_>>>()?;
                        BenchmarkTarget::with_frame(gate, GaugeFrame::from_names(&gates)?)
                    }
                    None if gate.is_clifford() => BenchmarkTarget::clifford(gate),
                    None => Ok(BenchmarkTarget::unframed(gate)),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DepthGrid {
    List { values: Vec<usize> },
    /// start, start + step, … ≤ end.
    Range { start: usize, end: usize, #[serde(default = "one")] step: usize },
    /// {1, …, m_max} with m_max from a two-depth pilot.
    Auto {
        #[serde(default)]
        rule: DepthRule,
        #[serde(default = "default_pilot")]
        pilot: [usize; 2],
        #[serde(default = "default_pilot_sequences")]
        pilot_sequences: usize,
        /// Keeps every `stride`-th depth of the grid (always including m_max).
        #[serde(default = "one")]
        stride: usize,
    },
}

fn one() -> usize {
    1
}

fn default_pilot() -> [usize; 2] {
    [1, 4]
}

fn default_pilot_sequences() -> usize {
    20
}

impl DepthGrid {
    /// Explicit depths, or None for the automatic grid.
    pub fn explicit(&self) -> Option<Vec<usize>> {
        match self {
            DepthGrid::List { values } => Some(values.clone()),
            DepthGrid::Range { start, end, step } => Some((*start..=*end).step_by((*step).max(1)).collect()),
            DepthGrid::Auto { .. } => None,
        }
    }
}

/// Two-depth ratio analysis for CCB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSettings {
    pub m1: usize,
    pub m2: usize,
    #[serde(default)]
    pub convention: RatioConvention,
    /// Target failure probability for the confidence radii.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: ProtocolChoice,
    /// Protocols run when `protocol = "compare"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare: Vec<Protocol>,
    pub target: TargetSpec,
    #[serde(default)]
    pub noise: NoiseModel,
    pub depths: DepthGrid,
    /// K, sequences per depth (and per sampled Pauli for CCB).
    pub sequences: usize,
    /// M, number of Paulis sampled for CCB.
    #[serde(default = "default_observables")]
    pub observables: usize,
    #[serde(default)]
    pub shots: Shots,
    #[serde(default = "one")]
    pub repeats: usize,
    pub seed: u64,
    /// Seed of the noise draw; defaults to a stream of `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_seed: Option<u64>,
    /// Draw a fresh noise instance for every repeat.
    #[serde(default)]
    pub resample_noise: bool,
    #[serde(default)]
    pub xeb_normalization: XebNormalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioSettings>,
    /// Also run CCB on the identity gate and report F/F_ref.
    #[serde(default)]
    pub reference: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_observables() -> usize {
    10
}

pub const MAX_REPEATS: usize = 100_000;
pub const MAX_SEQUENCES: usize = 1_000_000;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Protocols this config runs, in order.
    pub fn protocols(&self) -> Vec<Protocol> {
        match self.protocol.single() {
            Some(p) => vec![p],
            None => self.compare.clone(),
        }
    }

    /// Checks every parameter range and builds the target; nothing is simulated.
    pub fn validate(&self) -> Result<BenchmarkTarget> {
        let protocols = self.protocols();
        if protocols.is_empty() {
            return Err(Error::Config("`compare` must list at least one protocol".into()));
        }
        let mut seen = protocols.clone();
        seen.sort_by_key(|p| p.as_str());
        seen.dedup();
        if seen.len() != protocols.len() {
            return Err(Error::Config("`compare` lists a protocol twice".into()));
        }
        if self.sequences == 0 || self.sequences > MAX_SEQUENCES {
            return Err(Error::Config(format!("sequences must lie in 1..={MAX_SEQUENCES}")));
        }
        if self.repeats == 0 || self.repeats > MAX_REPEATS {
            return Err(Error::Config(format!("repeats must lie in 1..={MAX_REPEATS}")));
        }
        if protocols.contains(&Protocol::Ccb) && self.observables == 0 {
            return Err(Error::Config("CCB needs observables ≥ 1".into()));
        }
        if let Shots::Finite(0) = self.shots {
            return Err(Error::Config("finite shot count must be positive".into()));
        }
        match &self.depths {
            DepthGrid::List { values } => {
                if values.is_empty() || values.contains(&0) {
                    return Err(Error::Config("depth list must be nonempty and positive".into()));
                }
            }
            DepthGrid::Range { start, end, step } => {
                if *start == 0 || end < start || *step == 0 {
                    return Err(Error::Config("depth range needs 1 ≤ start ≤ end and step ≥ 1".into()));
                }
            }
            DepthGrid::Auto { pilot, pilot_sequences, stride, .. } => {
                if pilot[0] == 0 || pilot[1] <= pilot[0] || *pilot_sequences == 0 || *stride == 0 {
                    return Err(Error::Config("auto depths need 1 ≤ pilot[0] < pilot[1], positive pilot sequences and stride".into()));
                }
            }
        }
        if let Some(r) = &self.ratio {
            if r.m1 == 0 || r.m2 <= r.m1 {
                return Err(Error::Config("ratio analysis needs 1 ≤ m1 < m2".into()));
            }
            if !(r.delta > 0.0 && r.delta < 1.0) {
                return Err(Error::Config("ratio delta must lie in (0, 1)".into()));
            }
            if !protocols.contains(&Protocol::Ccb) {
                return Err(Error::Config("ratio analysis applies to CCB runs only".into()));
            }
        }
        let target = self.target.build()?;
        let n = target.n();
        self.noise.validate(n)?;
        for p in &protocols {
            match p {
                Protocol::Cab | Protocol::Ccb => {
                    target.core_tableau().map_err(|e| Error::Config(e.to_string()))?;
                }
                Protocol::Icrb => {
                    if n != 2 {
                        return Err(Error::Config("ICRB supports two-qubit targets only".into()));
                    }
                    if !target.gate().is_clifford() {
                        return Err(Error::Config("ICRB needs a Clifford target".into()));
                    }
                }
                Protocol::Xeb => {}
            }
        }
        if matches!(self.depths, DepthGrid::Auto { .. }) && target.core_tableau().is_err() {
            return Err(Error::Config("automatic depths need a Clifford core for the pilot".into()));
        }
        if self.reference && !protocols.contains(&Protocol::Ccb) {
            return Err(Error::Config("the reference workflow needs a CCB run".into()));
        }
        Ok(target)
    }
}

pub const PRESET_NAMES: [&str; 3] = ["ctx-fig3", "qec5-fig4", "cz-d4"];

/// Built-in configurations of the three reference studies.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "ctx-fig3" => Ok(ExperimentConfig {
            protocol: ProtocolChoice::Compare,
            compare: vec![Protocol::Cab, Protocol::Ccb],
            target: TargetSpec::named(TargetKind::Ctx),
            noise: NoiseModel {
                pauli: PauliNoiseSpec::Normal { mean: 0.96, std: 0.005 },
                damping: DampingSpec::Uniform { alpha: 0.005 },
                correlation: CorrelationSpec::Uniform { beta: 0.01 },
                reference: PauliNoiseSpec::Normal { mean: 0.998, std: 0.001 },
                spam: SpamSpec::Pauli { channel: PauliNoiseSpec::Normal { mean: 0.998, std: 0.001 } },
                ..NoiseModel::default()
            },
            depths: DepthGrid::Auto {
                rule: DepthRule::Literal,
                pilot: default_pilot(),
                pilot_sequences: default_pilot_sequences(),
                stride: 1,
            },
            sequences: 50,
            observables: 10,
            shots: Shots::Exact,
            repeats: 40,
            seed: 1,
            noise_seed: None,
            resample_noise: false,
            xeb_normalization: XebNormalization::default(),
            ratio: None,
            reference: false,
            output: None,
        }),
        "qec5-fig4" => Ok(ExperimentConfig {
            protocol: ProtocolChoice::Compare,
            compare: vec![Protocol::Cab, Protocol::Xeb],
            target: TargetSpec::named(TargetKind::FiveQubitEncoder),
            noise: NoiseModel {
                pauli: PauliNoiseSpec::Depolarizing { p: 0.98 },
                damping: DampingSpec::Random { low: 0.0, high: 0.02 },
                correlation: CorrelationSpec::Random { low: 0.0, high: 0.01 },
                ..NoiseModel::default()
            },
            depths: DepthGrid::Range { start: 1, end: 20, step: 1 },
            sequences: 50,
            observables: 10,
            shots: Shots::Exact,
            repeats: 40,
            seed: 1,
            noise_seed: None,
            resample_noise: false,
            xeb_normalization: XebNormalization::default(),
            ratio: None,
            reference: false,
            output: None,
        }),
        "cz-d4" => Ok(ExperimentConfig {
            protocol: ProtocolChoice::Compare,
            compare: vec![Protocol::Cab, Protocol::Icrb],
            target: TargetSpec::named(TargetKind::Cz),
            noise: NoiseModel {
                pauli: PauliNoiseSpec::Normal { mean: 0.99, std: 0.0 },
                damping: DampingSpec::Random { low: 0.0, high: 0.01 },
                correlation: CorrelationSpec::Random { low: 0.0, high: 0.01 },
                spam: SpamSpec::PrepFlip { p: 0.02 },
                ..NoiseModel::default()
            },
            depths: DepthGrid::List { values: vec![1, 2, 5, 10, 20, 50] },
            sequences: 50,
            observables: 10,
            shots: Shots::Finite(100),
            repeats: 50,
            seed: 1,
            noise_seed: None,
            resample_noise: false,
            xeb_normalization: XebNormalization::default(),
            ratio: None,
            reference: false,
            output: None,
        }),
        other => Err(Error::Config(format!("unknown preset {other:?}; known: {}", PRESET_NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{name}");
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            protocol = "cab"
            seed = 3
            sequences = 5
            [target]
            kind = "identity"
            qubits = 1
            [depths]
            kind = "list"
            values = [1, 2, 4]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.repeats, 1);
        assert_eq!(cfg.shots, Shots::Exact);
        assert_eq!(cfg.protocols(), vec![Protocol::Cab]);
        assert_eq!(cfg.validate().unwrap().n(), 1);
    }

    #[test]
    fn invalid_settings_rejected() {
        let mut cfg = preset("cz-d4").unwrap();
        cfg.sequences = 0;
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = preset("qec5-fig4").unwrap();
        cfg.compare = vec![Protocol::Icrb];
        assert!(cfg.validate().is_err());
        let mut cfg = preset("ctx-fig3").unwrap();
        cfg.noise.pauli = PauliNoiseSpec::Normal { mean: 1.5, std: 0.0 };
        assert!(cfg.validate().is_err());
        let mut cfg = preset("ctx-fig3").unwrap();
        cfg.target = TargetSpec { kind: TargetKind::CustomUnitaryFile, path: Some("/nonexistent.txt".into()), ..TargetSpec::named(TargetKind::Cz) };
        assert!(cfg.validate().unwrap_err().is_config());
        assert!(ExperimentConfig::from_toml("protocol = \"nope\"").unwrap_err().is_config());
    }

    #[test]
    fn range_grid_expands() {
        let g = DepthGrid::Range { start: 2, end: 9, step: 3 };
        assert_eq!(g.explicit().unwrap(), vec![2, 5, 8]);
    }
}
