//! Noise-model specifications and their sampled realizations.
//!
//! The target noise is Λ_t = Λ_pauli ∘ Λ_damping ∘ Λ_correlation. `NoiseOrder` decides which
//! component acts first in time.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::diagonal::PauliDiagonal;
use super::ops::{Local4, PtmOp};
use super::ptm::{ptm_from_kraus, KrausChannel, PtmChannel, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, cmatrix, embed_pair, embed_single, identity, swap, CMatrix, ZERO};

/// Smallest error rate accepted for a sampled Pauli channel.
pub const CP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PauliNoiseSpec {
    #[default]
    None,
    /// λ_j ~ 𝒩(mean, std) for j ≠ 0.
    Normal { mean: f64, std: f64 },
    Depolarizing { p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DampingSpec {
    #[default]
    None,
    Uniform { alpha: f64 },
    PerQubit { alphas: Vec<f64> },
    /// α_i drawn uniformly from [low, high].
    Random { low: f64, high: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStrength {
    pub q1: usize,
    pub q2: usize,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrelationSpec {
    #[default]
    None,
    /// Same β on every pair.
    Uniform { beta: f64 },
    Pairs { pairs: Vec<PairStrength> },
    /// β_ij drawn uniformly from [low, high].
    Random { low: f64, high: f64 },
}

/// Time order of the three target-noise components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseOrder {
    /// Correlation, then damping, then Pauli.
    #[default]
    CorrelationFirst,
    /// Pauli, then damping, then correlation.
    PauliFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpamSpec {
    #[default]
    Ideal,
    /// One sampled Pauli channel applied after preparation and again before measurement.
    Pauli { channel: PauliNoiseSpec },
    /// Per-qubit classical flip of the prepared state; measurement ideal.
    PrepFlip { p: f64 },
}

// 𝒩(0.998, 0.001) at n = 2 is CP in roughly 1 of 5000 draws.
fn default_retries() -> usize {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub pauli: PauliNoiseSpec,
    #[serde(default)]
    pub damping: DampingSpec,
    #[serde(default)]
    pub correlation: CorrelationSpec,
    #[serde(default)]
    pub order: NoiseOrder,
    /// Noise attached to every twirling gate.
    #[serde(default)]
    pub reference: PauliNoiseSpec,
    #[serde(default)]
    pub spam: SpamSpec,
    /// Cap on resampling a normal Pauli channel until it is CP.
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            pauli: PauliNoiseSpec::None,
            damping: DampingSpec::None,
            correlation: CorrelationSpec::None,
            order: NoiseOrder::CorrelationFirst,
            reference: PauliNoiseSpec::None,
            spam: SpamSpec::Ideal,
            max_retries: default_retries(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl PauliNoiseSpec {
    fn validate(&self, what: &str) -> Result<()> {
        match *self {
            PauliNoiseSpec::None => Ok(()),
            PauliNoiseSpec::Normal { mean, std } => {
                if !(mean > 0.0 && mean <= 1.0) || !(std >= 0.0) || !std.is_finite() {
                    return Err(config_err(format!("{what}: need 0 < mean ≤ 1 and std ≥ 0")));
                }
                Ok(())
            }
            PauliNoiseSpec::Depolarizing { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(config_err(format!("{what}: depolarizing p must lie in [0, 1]")));
                }
                Ok(())
            }
        }
    }

    /// Sample the Pauli fidelities. Normal draws are clipped to (0, 1] and redrawn until CP.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, max_retries: usize) -> Result<PauliDiagonal> {
        match *self {
            PauliNoiseSpec::None => Ok(PauliDiagonal::identity(n)),
            PauliNoiseSpec::Depolarizing { p } => Ok(PauliDiagonal::depolarizing(n, p)),
            PauliNoiseSpec::Normal { mean, std } => {
                if std == 0.0 {
                    return Ok(PauliDiagonal::depolarizing(n, mean));
                }
                let normal = Normal::new(mean, std).map_err(|e| config_err(e.to_string()))?;
                let dim = 1usize << (2 * n);
                for _ in 0..max_retries.max(1) {
                    let mut lambdas = Vec::with_capacity(dim);
                    lambdas.push(1.0);
                    while lambdas.len() < dim {
                        let x: f64 = normal.sample(rng);
                        if x > 0.0 {
                            lambdas.push(x.min(1.0));
                        }
                    }
                    let l = PauliDiagonal::new(n, lambdas)?;
                    if l.is_cp(CP_TOL) {
                        return Ok(l);
                    }
                }
                Err(Error::NotCptp(format!(
                    "no CP draw of 𝒩({mean}, {std}) Pauli fidelities in {max_retries} attempts"
                )))
            }
        }
    }
}

impl NoiseModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.pauli.validate("pauli")?;
        self.reference.validate("reference")?;
        match &self.damping {
            DampingSpec::None => {}
            DampingSpec::Uniform { alpha } => check_unit("damping alpha", *alpha)?,
            DampingSpec::PerQubit { alphas } => {
                if alphas.len() != n {
                    return Err(config_err(format!("damping: {} alphas for {n} qubits", alphas.len())));
                }
                for &a in alphas {
                    check_unit("damping alpha", a)?;
                }
            }
            DampingSpec::Random { low, high } => {
                check_unit("damping low", *low)?;
                check_unit("damping high", *high)?;
                check_range("damping", *low, *high)?;
            }
        }
        match &self.correlation {
            CorrelationSpec::None => {}
            CorrelationSpec::Uniform { beta } => check_finite("beta", *beta)?,
            CorrelationSpec::Pairs { pairs } => {
                for p in pairs {
                    if p.q1 >= n || p.q2 >= n || p.q1 == p.q2 {
                        return Err(config_err(format!("correlation pair ({}, {}) invalid for {n} qubits", p.q1, p.q2)));
                    }
                    check_finite("beta", p.beta)?;
                }
            }
            CorrelationSpec::Random { low, high } => {
                check_finite("beta low", *low)?;
                check_finite("beta high", *high)?;
                check_range("correlation", *low, *high)?;
            }
        }
        match &self.spam {
            SpamSpec::Ideal => {}
            SpamSpec::Pauli { channel } => channel.validate("spam")?,
            SpamSpec::PrepFlip { p } => check_unit("prep flip", *p)?,
        }
        if self.max_retries == 0 {
            return Err(config_err("max_retries must be positive"));
        }
        Ok(())
    }

    /// Draw every random ingredient in a fixed order: Pauli part, damping, correlation,
    /// reference, SPAM.
    pub fn build<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<NoiseInstance> {
        self.validate(n)?;
        let pauli = self.pauli.sample(n, rng, self.max_retries)?;
        let alphas = match &self.damping {
            DampingSpec::None => vec![0.0; n],
            DampingSpec::Uniform { alpha } => vec![*alpha; n],
            DampingSpec::PerQubit { alphas } => alphas.clone(),
            DampingSpec::Random { low, high } => (0..n).map(|_| uniform(rng, *low, *high)).collect(),
        };
        let mut betas = Vec::new();
        match &self.correlation {
            CorrelationSpec::None => {}
            CorrelationSpec::Uniform { beta } => {
                for (i, j) in pairs(n) {
                    betas.push(PairStrength { q1: i, q2: j, beta: *beta });
                }
            }
            CorrelationSpec::Pairs { pairs } => betas = pairs.clone(),
            CorrelationSpec::Random { low, high } => {
                for (i, j) in pairs(n) {
                    betas.push(PairStrength { q1: i, q2: j, beta: uniform(rng, *low, *high) });
                }
            }
        }
        let reference = self.reference.sample(n, rng, self.max_retries)?;
        let spam = match &self.spam {
            SpamSpec::Ideal => SpamInstance::Ideal,
            SpamSpec::Pauli { channel } => SpamInstance::Pauli(channel.sample(n, rng, self.max_retries)?),
            SpamSpec::PrepFlip { p } => SpamInstance::PrepFlip(*p),
        };
        NoiseInstance::new(n, pauli, alphas, betas, self.order, reference, spam)
    }
}

fn check_unit(what: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(config_err(format!("{what} = {x} outside [0, 1]")))
    }
}

fn check_finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{what} is not finite")))
    }
}

fn check_range(what: &str, low: f64, high: f64) -> Result<()> {
    if low <= high {
        Ok(())
    } else {
        Err(config_err(format!("{what}: low > high")))
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    if low == high {
        low
    } else {
        rng.random_range(low..=high)
    }
}

/// Pairs i < j in lexicographic order.
fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

pub fn damping_kraus(alpha: f64) -> KrausChannel {
    let k0 = cmatrix(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c((1.0 - alpha).sqrt(), 0.0)]);
    let k1 = cmatrix(2, 2, &[ZERO, c(alpha.sqrt(), 0.0), ZERO, ZERO]);
    KrausChannel::new(vec![k0, k1]).expect("damping Kraus operators are complete")
}

/// exp(iβ·SWAP) = cos β·I + i sin β·SWAP.
pub fn correlation_unitary(beta: f64) -> CMatrix {
    identity(4) * c(beta.cos(), 0.0) + swap() * c(0.0, beta.sin())
}

fn ptm_block(k: &KrausChannel) -> Local4 {
    let m = ptm_from_kraus(k);
    let mut out = [[0.0; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (col, x) in row.iter_mut().enumerate() {
            *x = m.matrix()[(r, col)];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpamInstance {
    Ideal,
    Pauli(PauliDiagonal),
    PrepFlip(f64),
}

impl SpamInstance {
    /// Channel applied to the prepared state.
    pub fn prep_op(&self, n: usize) -> PtmOp {
        match self {
            SpamInstance::Ideal => PtmOp::Identity,
            SpamInstance::Pauli(l) => PtmOp::Diagonal(l.lambdas().to_vec()),
            SpamInstance::PrepFlip(p) => {
                let f = 1.0 - 2.0 * p;
                let block = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, f, 0.0], [0.0, 0.0, 0.0, f]];
                PtmOp::Local { n, factors: (0..n).map(|q| (q, block)).collect() }
            }
        }
    }

    /// Channel applied right before the ideal measurement.
    pub fn meas_op(&self) -> PtmOp {
        match self {
            SpamInstance::Pauli(l) => PtmOp::Diagonal(l.lambdas().to_vec()),
            _ => PtmOp::Identity,
        }
    }

    pub fn prep_kraus(&self, n: usize) -> Result<KrausChannel> {
        match self {
            SpamInstance::Ideal => KrausChannel::unitary(identity(1 << n)),
            SpamInstance::Pauli(l) => l.to_kraus(),
            SpamInstance::PrepFlip(p) => {
                let x = cmatrix(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
                let single = KrausChannel::new(vec![identity(2) * c((1.0 - p).sqrt(), 0.0), x * c(p.sqrt(), 0.0)])?;
                let mut acc = KrausChannel::unitary(identity(1 << n))?;
                for q in 0..n {
                    acc = embed_kraus_single(&single, q, n)?.compose(&acc)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn meas_kraus(&self, n: usize) -> Result<KrausChannel> {
        match self {
            SpamInstance::Pauli(l) => l.to_kraus(),
            _ => KrausChannel::unitary(identity(1 << n)),
        }
    }
}

fn diagonal_op(l: &PauliDiagonal) -> PtmOp {
    if l.lambdas().iter().all(|&x| x == 1.0) {
        PtmOp::Identity
    } else {
        PtmOp::Diagonal(l.lambdas().to_vec())
    }
}

fn embed_kraus_single(k: &KrausChannel, q: usize, n: usize) -> Result<KrausChannel> {
    KrausChannel::new(k.operators().iter().map(|op| embed_single(op, q, n)).collect())
}

/// A sampled noise model, ready for simulation.
#[derive(Clone, Debug)]
pub struct NoiseInstance {
    n: usize,
    pauli: PauliDiagonal,
    alphas: Vec<f64>,
    betas: Vec<PairStrength>,
    order: NoiseOrder,
    reference: PauliDiagonal,
    spam: SpamInstance,
    target_op: PtmOp,
    target_diagonal: Vec<f64>,
}

impl NoiseInstance {
    pub fn new(
        n: usize,
        pauli: PauliDiagonal,
        alphas: Vec<f64>,
        betas: Vec<PairStrength>,
        order: NoiseOrder,
        reference: PauliDiagonal,
        spam: SpamInstance,
    ) -> Result<Self> {
        crate::error::check_dim(n, alphas.len())?;
        let pauli_op = diagonal_op(&pauli);
        let damping_op = if alphas.iter().all(|&a| a == 0.0) {
            PtmOp::Identity
        } else {
            PtmOp::Local { n, factors: alphas.iter().map(|&a| ptm_block(&damping_kraus(a))).enumerate().collect() }
        };
        let mut corr_op = PtmOp::Identity;
        for p in betas.iter().filter(|p| p.beta != 0.0) {
            let block = PtmChannel::from_unitary(&correlation_unitary(p.beta))?;
            corr_op = corr_op.then(PtmOp::pair(n, p.q1, p.q2, block.matrix(), 1e-15));
        }
        let target_op = match order {
            NoiseOrder::CorrelationFirst => corr_op.then(damping_op).then(pauli_op),
            NoiseOrder::PauliFirst => {
                // correlation factors still act in lexicographic order among themselves
                pauli_op.then(damping_op).then(corr_op)
            }
        };
        let dim = 1usize << (2 * n);
        let target_diagonal = target_op.diagonal(dim);
        if (target_diagonal[0] - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotCptp("target noise is not trace preserving".into()));
        }
        Ok(NoiseInstance { n, pauli, alphas, betas, order, reference, spam, target_op, target_diagonal })
    }

    /// Noiseless instance on n qubits.
    pub fn ideal(n: usize) -> Self {
        NoiseInstance::new(
            n,
            PauliDiagonal::identity(n),
            vec![0.0; n],
            Vec::new(),
            NoiseOrder::CorrelationFirst,
            PauliDiagonal::identity(n),
            SpamInstance::Ideal,
        )
        .expect("identity noise is valid")
    }

    /// Same reference noise and SPAM with a noiseless target, as seen by an identity gate.
    pub fn reference_only(&self) -> NoiseInstance {
        NoiseInstance::new(
            self.n,
            PauliDiagonal::identity(self.n),
            vec![0.0; self.n],
            Vec::new(),
            self.order,
            self.reference.clone(),
            self.spam.clone(),
        )
        .expect("identity target noise is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pauli(&self) -> &PauliDiagonal {
        &self.pauli
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[PairStrength] {
        &self.betas
    }

    pub fn order(&self) -> NoiseOrder {
        self.order
    }

    pub fn reference(&self) -> &PauliDiagonal {
        &self.reference
    }

    pub fn spam(&self) -> &SpamInstance {
        &self.spam
    }

    /// Λ_t as a structured op (time order inside).
    pub fn target_op(&self) -> &PtmOp {
        &self.target_op
    }

    pub fn reference_op(&self) -> PtmOp {
        diagonal_op(&self.reference)
    }

    pub fn target_ptm(&self) -> PtmChannel {
        PtmChannel::from_op(self.n, &self.target_op)
    }

    /// F(Λ_t).
    pub fn target_fidelity(&self) -> f64 {
        self.target_diagonal.iter().sum::<f64>() / self.target_diagonal.len() as f64
    }

    /// Pauli twirl of the per-layer noise Λ_t ∘ Λ_ref.
    pub fn layer_twirl(&self) -> PauliDiagonal {
        let lambdas = self
            .target_diagonal
            .iter()
            .zip(self.reference.lambdas())
            .map(|(t, r)| t * r)
            .collect();
        PauliDiagonal::from_lambdas_unchecked(self.n, lambdas)
    }

    /// F(Λ_t ∘ Λ_ref), the quantity CCB and CAB estimate.
    pub fn layer_fidelity(&self) -> f64 {
        self.layer_twirl().process_fidelity()
    }

    /// Λ_t as Kraus operators, for density-matrix cross-checks.
    pub fn target_kraus(&self) -> Result<KrausChannel> {
        let n = self.n;
        let d = 1usize << n;
        let pauli = self.pauli.to_kraus()?;
        let mut damping = KrausChannel::unitary(identity(d))?;
        for (q, &a) in self.alphas.iter().enumerate() {
            if a != 0.0 {
                damping = embed_kraus_single(&damping_kraus(a), q, n)?.compose(&damping)?;
            }
        }
        let mut corr = identity(d);
        for p in self.betas.iter().filter(|p| p.beta != 0.0) {
            corr = embed_pair(&correlation_unitary(p.beta), p.q1, p.q2, n) * corr;
        }
        let corr = KrausChannel::unitary(corr)?;
        match self.order {
            NoiseOrder::CorrelationFirst => pauli.compose(&damping.compose(&corr)?),
            NoiseOrder::PauliFirst => corr.compose(&damping.compose(&pauli)?),
        }
    }
}
