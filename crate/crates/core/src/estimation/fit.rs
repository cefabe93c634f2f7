//! Least-squares decay fits.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ln f = β₀ + β₁·m fitted to the positive points; the decay is exp(β₁/per_step).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub observable: String,
    /// A = exp(β₀).
    pub amplitude: f64,
    /// μ = exp(β₁/2) for f = A μ^{2m}, or p = exp(β₁) for f = A p^m.
    pub decay: f64,
    pub intercept: f64,
    pub slope: f64,
    /// Euclidean norm of the log-space residuals.
    pub residual_norm: f64,
    pub depths: Vec<usize>,
    pub points_dropped: usize,
}

fn log_linear(observable: &str, points: &[(usize, f64)], weights: Option<&[f64]>, per_step: f64) -> Result<DecayFit> {
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: w.len() });
        }
    }
    let mut used: Vec<(f64, f64, f64)> = Vec::new();
    let mut depths = Vec::new();
    for (i, &(m, f)) in points.iter().enumerate() {
        if f > 0.0 && f.is_finite() {
            used.push((m as f64, f.ln(), weights.map_or(1.0, |w| w[i])));
            depths.push(m);
        }
    }
    let points_dropped = points.len() - used.len();
    let mut distinct = depths.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientPoints { usable: distinct.len() });
    }
    let sw: f64 = used.iter().map(|p| p.2).sum();
    let mx = used.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = used.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = used.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = used.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>().sqrt();
    Ok(DecayFit {
        observable: observable.to_string(),
        amplitude: intercept.exp(),
        decay: (slope / per_step).exp(),
        intercept,
        slope,
        residual_norm,
        depths,
        points_dropped,
    })
}

/// Unweighted fit of f = A μ^{2m}: μ = exp(β̂₁/2), A = exp(β̂₀). Nonpositive f are dropped.
pub fn fit_decay(observable: &str, points: &[(usize, f64)]) -> Result<DecayFit> {
    log_linear(observable, points, None, 2.0)
}

/// Weighted variant of `fit_decay` (e.g. inverse variances of ln f).
pub fn fit_decay_weighted(observable: &str, points: &[(usize, f64)], weights: &[f64]) -> Result<DecayFit> {
    log_linear(observable, points, Some(weights), 2.0)
}

/// Fit of f = A p^m (one decay step per depth unit).
pub fn fit_rb_decay(observable: &str, points: &[(usize, f64)]) -> Result<DecayFit> {
    log_linear(observable, points, None, 1.0)
}

/// Result of fitting A p^{2m} + B.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetDecayFit {
    pub amplitude: f64,
    pub decay: f64,
    pub offset: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const LM_MAX_ITERATIONS: usize = 200;
pub const LM_TOL: f64 = 1e-10;

fn offset_residuals(params: &Vector3<f64>, pts: &[(usize, f64)]) -> (f64, Matrix3<f64>, Vector3<f64>) {
    let (a, p, b) = (params[0], params[1], params[2]);
    let mut cost = 0.0;
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for &(m, f) in pts {
        let e = 2 * m as i32;
        let pw = p.powi(e);
        let r = a * pw + b - f;
        let dp = a * e as f64 * p.powi(e - 1);
        let j = Vector3::new(pw, dp, 1.0);
        cost += r * r;
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (cost, jtj, jtr)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) fit of f = A p^{2m} + B. The start point comes
/// from a log-linear fit of f − 1/2ⁿ where that is positive.
pub fn fit_offset_decay(points: &[(usize, f64)], n: usize) -> Result<OffsetDecayFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientPoints { usable: distinct.len() });
    }
    let b0 = 1.0 / (1u64 << n) as f64;
    let shifted: Vec<(usize, f64)> = points.iter().map(|&(m, f)| (m, f - b0)).collect();
    let (a_init, p_init) = match fit_decay("start", &shifted) {
        Ok(fit) if fit.decay.is_finite() && fit.decay > 0.0 => (fit.amplitude, fit.decay.min(1.0)),
        _ => (points[0].1 - b0, 0.9),
    };
    let mut params = Vector3::new(a_init, p_init, b0);
    let (mut cost, mut jtj, mut jtr) = offset_residuals(&params, points);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITERATIONS {
        iterations += 1;
        let mut lhs = jtj;
        for i in 0..3 {
            lhs[(i, i)] += damping * jtj[(i, i)].max(1e-12);
        }
        let Some(step) = lhs.lu().solve(&(-jtr)) else {
            damping *= 10.0;
            continue;
        };
        let trial = params + step;
        let (trial_cost, trial_jtj, trial_jtr) = offset_residuals(&trial, points);
        if trial_cost.is_finite() && trial_cost <= cost {
            let small_step = step.norm() <= LM_TOL * (params.norm() + LM_TOL);
            let small_gain = cost - trial_cost <= LM_TOL * cost.max(LM_TOL * LM_TOL);
            params = trial;
            cost = trial_cost;
            jtj = trial_jtj;
            jtr = trial_jtr;
            damping = (damping / 3.0).max(1e-15);
            if small_step || small_gain {
                converged = true;
                break;
            }
        } else {
            damping *= 4.0;
            if damping > 1e15 {
                converged = true;
                break;
            }
        }
    }
    Ok(OffsetDecayFit {
        amplitude: params[0],
        decay: params[1],
        offset: params[2],
        residual_norm: cost.sqrt(),
        iterations,
        converged,
    })
}
