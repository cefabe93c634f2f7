//! Aggregation of fitted decays into process-fidelity estimates.

use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, fit_offset_decay, fit_rb_decay, DecayFit, OffsetDecayFit};
use crate::circuits::Protocol;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::simulator::{MonteCarloTable, ICRB_LABEL, XEB_LABEL};

/// One per-observable decay entering an estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub observable: String,
    pub decay: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub protocol: Protocol,
    pub value: f64,
    pub components: Vec<Component>,
    /// Sequences per depth (and per observable for CCB).
    pub sequences: Option<usize>,
    /// Number of sampled Paulis (CCB).
    pub observables_sampled: Option<usize>,
    pub depths: Vec<usize>,
    pub seed: Option<u64>,
}

impl FidelityEstimate {
    fn bare(protocol: Protocol, value: f64, components: Vec<Component>) -> Self {
        FidelityEstimate {
            protocol,
            value,
            components,
            sequences: None,
            observables_sampled: None,
            depths: Vec::new(),
            seed: None,
        }
    }

    fn with_table(mut self, table: &MonteCarloTable) -> Self {
        self.depths = table.depths();
        self.sequences = table.rows.iter().map(|r| r.sequence + 1).max();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// F = 4⁻ⁿ Σ_k 3^{π(Q_k)} μ_k over the 2ⁿ Z-type labels, μ of the all-I label taken as 1.
pub fn cab_fidelity(fits: &[DecayFit], n: usize) -> Result<FidelityEstimate> {
    let mut components = Vec::with_capacity(1 << n);
    let mut total = 0.0;
    for mask in 0..(1u64 << n) {
        let q = PauliOperator::new(n, 0, mask);
        let label = q.label();
        let weight = 3f64.powi(q.weight() as i32);
        let decay = if mask == 0 {
            1.0
        } else {
            fits.iter()
                .find(|f| f.observable == label)
                .ok_or_else(|| Error::MissingObservable(label.clone()))?
                .decay
        };
        total += weight * decay;
        components.push(Component { observable: label, decay, weight });
    }
    Ok(FidelityEstimate::bare(Protocol::Cab, total / 4f64.powi(n as i32), components))
}

/// Arithmetic mean of the sampled Pauli fidelities.
pub fn ccb_fidelity(lambdas: &[(String, f64)]) -> Result<FidelityEstimate> {
    if lambdas.is_empty() {
        return Err(Error::InsufficientPoints { usable: 0 });
    }
    let w = 1.0 / lambdas.len() as f64;
    let components: Vec<Component> =
        lambdas.iter().map(|(o, l)| Component { observable: o.clone(), decay: *l, weight: w }).collect();
    let value = lambdas.iter().map(|p| p.1).sum::<f64>() * w;
    let mut est = FidelityEstimate::bare(Protocol::Ccb, value, components);
    est.observables_sampled = Some(lambdas.len());
    Ok(est)
}

/// p + (1 − p)/d², the depolarizing-model process fidelity.
pub fn depolarizing_fidelity(p: f64, n: usize) -> f64 {
    let d2 = 4f64.powi(n as i32);
    p + (1.0 - p) / d2
}

/// Fits the mean cross-entropy statistic to A p^{2m} + B.
pub fn xeb_fidelity(points: &[(usize, f64)], n: usize) -> Result<(FidelityEstimate, OffsetDecayFit)> {
    let fit = fit_offset_decay(points, n)?;
    if !fit.decay.is_finite() {
        return Err(Error::Numerical("cross-entropy fit diverged".into()));
    }
    let comp = Component { observable: XEB_LABEL.into(), decay: fit.decay, weight: 1.0 };
    Ok((FidelityEstimate::bare(Protocol::Xeb, depolarizing_fidelity(fit.decay, n), vec![comp]), fit))
}

/// Fits the character-weighted survival to A p^m.
pub fn icrb_fidelity(points: &[(usize, f64)], n: usize) -> Result<(FidelityEstimate, DecayFit)> {
    let fit = fit_rb_decay(ICRB_LABEL, points)?;
    let comp = Component { observable: ICRB_LABEL.into(), decay: fit.decay, weight: 1.0 };
    Ok((FidelityEstimate::bare(Protocol::Icrb, depolarizing_fidelity(fit.decay, n), vec![comp]), fit))
}

/// Estimate plus the fits behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEstimate {
    pub estimate: FidelityEstimate,
    pub fits: Vec<DecayFit>,
    pub offset_fit: Option<OffsetDecayFit>,
}

/// Fits every observable series of a table and aggregates according to its protocol.
pub fn estimate_from_table(table: &MonteCarloTable) -> Result<TableEstimate> {
    let n = table.n;
    let (estimate, fits, offset_fit) = match table.protocol {
        Protocol::Cab => {
            let fits = table
                .observables()
                .iter()
                .map(|o| fit_decay(o, &table.series(o)))
                .collect::<Result<Vec<_>>>()?;
            (cab_fidelity(&fits, n)?, fits, None)
        }
        Protocol::Ccb => {
            let fits = table
                .observables()
                .iter()
                .map(|o| fit_decay(o, &table.series(o)))
                .collect::<Result<Vec<_>>>()?;
            let lambdas: Vec<(String, f64)> = fits.iter().map(|f| (f.observable.clone(), f.decay)).collect();
            (ccb_fidelity(&lambdas)?, fits, None)
        }
        Protocol::Xeb => {
            let (est, fit) = xeb_fidelity(&table.series(XEB_LABEL), n)?;
            (est, Vec::new(), Some(fit))
        }
        Protocol::Icrb => {
            let (est, fit) = icrb_fidelity(&table.series(ICRB_LABEL), n)?;
            (est, vec![fit], None)
        }
    };
    let mut estimate = estimate.with_table(table);
    if table.protocol == Protocol::Ccb {
        estimate.observables_sampled = Some(table.observables().len());
    }
    Ok(TableEstimate { estimate, fits, offset_fit })
}
