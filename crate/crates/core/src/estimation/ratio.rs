//! Two-depth ratio estimator for Pauli fidelities and its confidence bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent applied to f̂(m₂)/f̂(m₁).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioConvention {
    /// 1/(2Δm): the survival decays as λ^{2m}, so this returns λ.
    #[default]
    PerLayer,
    /// 1/Δm: returns λ² under the λ^{2m} model.
    Literal,
}

impl RatioConvention {
    pub fn exponent(self, m1: usize, m2: usize) -> f64 {
        let dm = (m2 - m1) as f64;
        match self {
            RatioConvention::PerLayer => 1.0 / (2.0 * dm),
            RatioConvention::Literal => 1.0 / dm,
        }
    }
}

/// (m, f̂) at one depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthMean {
    pub m: usize,
    pub value: f64,
}

pub fn ratio_estimate(f1: DepthMean, f2: DepthMean, convention: RatioConvention) -> Result<f64> {
    if f2.m <= f1.m {
        return Err(Error::Config(format!("ratio estimator needs m₂ > m₁, got {} and {}", f1.m, f2.m)));
    }
    if f1.value <= 0.0 {
        return Err(Error::UndefinedEstimate(format!("nonpositive mean {} at m = {}", f1.value, f1.m)));
    }
    if f2.value <= 0.0 {
        return Err(Error::UndefinedEstimate(format!("nonpositive mean {} at m = {}", f2.value, f2.m)));
    }
    Ok((f2.value / f1.value).powf(convention.exponent(f1.m, f2.m)))
}

/// Inputs of the second-order bias bound for one Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasInputs {
    pub m1: usize,
    pub m2: usize,
    pub k1: usize,
    pub k2: usize,
    /// Per-sequence variances Var[f̂(m, s)].
    pub var1: f64,
    pub var2: f64,
    /// Expected means f̄(m₁), f̄(m₂).
    pub mean1: f64,
    pub mean2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasBound {
    /// |t(t+1)V₁/(K₁f̄₁²) + t(t−1)V₂/(K₂f̄₂²)|.
    pub detailed: f64,
    /// 4t(t+1)/K₁, valid when f̄₁ > 1/2 and V ≤ 1.
    pub envelope: f64,
    pub exponent: f64,
    /// Whether 1/2 < f̄₁ holds.
    pub assumption_holds: bool,
}

pub fn bias_bound(inputs: &BiasInputs, convention: RatioConvention) -> Result<BiasBound> {
    let BiasInputs { m1, m2, k1, k2, var1, var2, mean1, mean2 } = *inputs;
    if m2 <= m1 || k1 == 0 || k2 == 0 {
        return Err(Error::Config("bias bound needs m₂ > m₁ and K₁, K₂ ≥ 1".into()));
    }
    if mean1 <= 0.0 || mean2 <= 0.0 {
        return Err(Error::UndefinedEstimate("bias bound needs positive means".into()));
    }
    let t = convention.exponent(m1, m2);
    let detailed = (t * (t + 1.0) * var1 / (k1 as f64 * mean1 * mean1)
        + t * (t - 1.0) * var2 / (k2 as f64 * mean2 * mean2))
        .abs();
    Ok(BiasBound {
        detailed,
        envelope: 4.0 * t * (t + 1.0) / k1 as f64,
        exponent: t,
        assumption_holds: mean1 > 0.5,
    })
}

/// Like `bias_bound`, but a violated 1/2 < f̄₁ assumption is an error.
pub fn bias_bound_checked(inputs: &BiasInputs, convention: RatioConvention) -> Result<BiasBound> {
    let b = bias_bound(inputs, convention)?;
    if !b.assumption_holds {
        return Err(Error::AssumptionViolated(format!("mean survival {} at m₁ is not above 1/2", inputs.mean1)));
    }
    Ok(b)
}

fn hoeffding(m: usize, eps: f64) -> f64 {
    2.0 * (-2.0 * m as f64 * eps * eps).exp()
}

fn bernstein(k: usize, eps: f64, var: f64) -> f64 {
    2.0 * (-(k as f64) * eps * eps / 2.0 / (var + eps / 3.0)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInputs {
    pub m: usize,
    pub k1: usize,
    pub k2: usize,
    pub eps_m: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps_b: f64,
    pub m1: usize,
    pub m2: usize,
    /// Per-sequence variance estimates at m₁ and m₂ (largest over the sampled Paulis).
    pub variances: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub m: usize,
    pub k1: usize,
    pub k2: usize,
    pub m1: usize,
    pub m2: usize,
    pub eps_m: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps_b: f64,
    pub variances: Option<(f64, f64)>,
    /// 2e^{−2Mε_M²} + 2M e^{−K₁ε₁²/2/(1+ε₁/3)} + 2M e^{−K₂ε₂²/2/(1+ε₂/3)}, capped at 1.
    pub delta: f64,
    /// Uncapped sum behind `delta`.
    pub delta_raw: f64,
    /// Same with the looser 2e^{−Mε_M²/2} sampling term.
    pub delta_loose_sampling: f64,
    /// Bernstein terms with the supplied variances instead of 1.
    pub delta_variance_aware: Option<f64>,
}

impl ConfidenceReport {
    /// [F̂ − ε_M − ε_b, F̂ + ε_M + ε_b].
    pub fn interval(&self, estimate: f64) -> (f64, f64) {
        let r = self.eps_m + self.eps_b;
        (estimate - r, estimate + r)
    }
}

pub fn confidence_report(inputs: &ConfidenceInputs) -> Result<ConfidenceReport> {
    let ConfidenceInputs { m, k1, k2, eps_m, eps1, eps2, eps_b, m1, m2, variances } = inputs.clone();
    if [eps_m, eps1, eps2].iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Config("all confidence radii must be positive".into()));
    }
    if eps_b < 0.0 {
        return Err(Error::Config("bias radius must be nonnegative".into()));
    }
    let mf = m as f64;
    let tails = mf * bernstein(k1, eps1, 1.0) + mf * bernstein(k2, eps2, 1.0);
    let delta_raw = hoeffding(m, eps_m) + tails;
    let loose = 2.0 * (-mf * eps_m * eps_m / 2.0).exp() + tails;
    let aware = variances
        .map(|(v1, v2)| hoeffding(m, eps_m) + mf * bernstein(k1, eps1, v1) + mf * bernstein(k2, eps2, v2));
    Ok(ConfidenceReport {
        m,
        k1,
        k2,
        m1,
        m2,
        eps_m,
        eps1,
        eps2,
        eps_b,
        variances,
        delta: delta_raw.min(1.0),
        delta_raw,
        delta_loose_sampling: loose.min(1.0),
        delta_variance_aware: aware.map(|d| d.min(1.0)),
    })
}

/// (ε_M, ε₁, ε₂) splitting δ into equal thirds across the three terms.
pub fn epsilons_for_delta(delta: f64, m: usize, k1: usize, k2: usize) -> Result<(f64, f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) || m == 0 || k1 == 0 || k2 == 0 {
        return Err(Error::Config("need 0 < δ < 1 and M, K ≥ 1".into()));
    }
    let eps_m = ((6.0 / delta).ln() / (2.0 * m as f64)).sqrt();
    let l = (6.0 * m as f64 / delta).ln();
    let eps = |k: usize| {
        let k = k as f64;
        (l / 3.0 + (l * l / 9.0 + 2.0 * k * l).sqrt()) / k
    };
    Ok((eps_m, eps(k1), eps(k2)))
}

/// Which power of μ the m_max rule compares against μ/3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthRule {
    /// μ^{m_max} ≈ μ/3.
    #[default]
    Literal,
    /// μ^{2 m_max} ≈ μ/3.
    PerLayer,
}

pub const MIN_AUTO_DEPTH: usize = 2;
pub const MAX_AUTO_DEPTH: usize = 1000;

/// Largest depth of the automatic grid for a guessed decay μ.
pub fn m_max(mu_guess: f64, rule: DepthRule) -> Result<usize> {
    if !(mu_guess > 0.0 && mu_guess <= 1.0) {
        return Err(Error::UndefinedEstimate(format!("decay guess {mu_guess} outside (0, 1]")));
    }
    if mu_guess == 1.0 {
        return Ok(MAX_AUTO_DEPTH);
    }
    // μ^x = μ/3  ⇔  x = 1 + ln(1/3)/ln μ
    let x = 1.0 + (1.0f64 / 3.0).ln() / mu_guess.ln();
    let x = match rule {
        DepthRule::Literal => x,
        DepthRule::PerLayer => x / 2.0,
    };
    Ok((x.round() as usize).clamp(MIN_AUTO_DEPTH, MAX_AUTO_DEPTH))
}
