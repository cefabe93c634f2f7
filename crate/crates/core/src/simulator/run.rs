//! One noisy execution of a sampled plan, read out as survival values.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::engine::Simulator;
use super::state::{outcome_mask, parity_expectation, prepare_eigenstate, LiouvilleState};
use crate::circuits::{realize, PlanBody, Protocol, SequencePlan};
use crate::error::{check_dim, Error, Result};
use crate::pauli::{character, PauliOperator};

/// Exact probabilities, or a finite number of single-shot measurements per circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shots {
    #[default]
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn count(self) -> Option<u64> {
        match self {
            Shots::Exact => None,
            Shots::Finite(s) => Some(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observable: PauliOperator,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub protocol: Protocol,
    pub m: usize,
    pub stream: u64,
    /// Measurement basis (I digits are read in Z).
    pub basis: PauliOperator,
    pub probabilities: Vec<f64>,
    pub frequencies: Option<Vec<u64>>,
    /// Noiseless output distribution (XEB only).
    pub ideal_probabilities: Option<Vec<f64>>,
    pub observations: Vec<Observation>,
}

impl RunRecord {
    /// Distribution the observations were computed from: frequencies if shots were taken.
    pub fn empirical(&self) -> Vec<f64> {
        match &self.frequencies {
            Some(f) => {
                let total: u64 = f.iter().sum();
                f.iter().map(|&c| c as f64 / total as f64).collect()
            }
            None => self.probabilities.clone(),
        }
    }

    pub fn value(&self, observable: &PauliOperator) -> Option<f64> {
        self.observations.iter().find(|o| o.observable == *observable).map(|o| o.value)
    }
}

/// Multinomial draw by successive conditional binomials.
pub fn sample_shots<R: Rng + ?Sized>(probabilities: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 || i + 1 == probabilities.len() {
            out.push(remaining);
            remaining = 0;
            continue;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).map_err(|e| Error::Numerical(e.to_string()))?.sample(rng);
        out.push(k);
        remaining -= k;
        mass -= p;
    }
    Ok(out)
}

/// χ_j(P⁽⁰⁾)·Tr(P_j 𝒮(ρ)) from a record measured in the eigenbasis of P_j.
pub fn weighted_survival_ccb(record: &RunRecord, j: &PauliOperator, p0: &PauliOperator) -> Result<f64> {
    check_dim(j.n(), record.basis.n())?;
    if (0..j.n()).any(|q| j.digit(q) != 0 && j.digit(q) != record.basis.digit(q)) {
        return Err(Error::Parse(format!("record basis {} cannot read {}", record.basis, j)));
    }
    Ok(character(j.index(), p0) * parity_expectation(&record.empirical(), outcome_mask(j)))
}

/// Which denominator the per-sequence XEB statistic uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XebNormalization {
    /// 2ⁿΣ f² − 1 over the noisy distribution. Under depolarizing noise this returns 1/p,
    /// so the fitted decay exceeds one.
    Noisy,
    /// 2ⁿΣ f′² − 1 over the ideal distribution; returns p under depolarizing noise.
    #[default]
    Ideal,
}

/// Denominators below this make the statistic undefined.
pub const XEB_DEGENERATE_TOL: f64 = 1e-12;

/// (2ⁿΣ_z f f′ − 1)/(2ⁿΣ_z g² − 1) with g the noisy or ideal distribution.
pub fn xeb_statistic(noisy: &[f64], ideal: &[f64], norm: XebNormalization) -> Result<f64> {
    if noisy.len() != ideal.len() {
        return Err(Error::DimensionMismatch { expected: ideal.len(), found: noisy.len() });
    }
    let d = noisy.len() as f64;
    let num = d * noisy.iter().zip(ideal).map(|(a, b)| a * b).sum::<f64>() - 1.0;
    let g = match norm {
        XebNormalization::Noisy => noisy,
        XebNormalization::Ideal => ideal,
    };
    let den = d * g.iter().map(|x| x * x).sum::<f64>() - 1.0;
    if den.abs() < XEB_DEGENERATE_TOL {
        return Err(Error::UndefinedEstimate("flat output distribution in cross-entropy statistic".into()));
    }
    Ok(num / den)
}

fn z_basis(n: usize) -> PauliOperator {
    PauliOperator::new(n, 0, (1u64 << n) - 1)
}

impl Simulator {
    /// Prepared state (with preparation noise) → sequence → measurement noise → readout.
    fn execute(&self, plan: &SequencePlan, initial: LiouvilleState, basis: &PauliOperator) -> Result<Vec<f64>> {
        let n = self.n();
        let spam = self.noise().spam();
        let mut state = initial;
        let mut scratch = Vec::new();
        spam.prep_op(n).apply(state.vector_mut(), &mut scratch);
        self.evolve(&realize(plan, self.target()), &mut state, true)?;
        spam.meas_op().apply(state.vector_mut(), &mut scratch);
        state.probabilities(basis)
    }

    /// Noiseless, SPAM-free Z-basis output of a plan.
    pub fn ideal_probabilities(&self, plan: &SequencePlan) -> Result<Vec<f64>> {
        let n = self.n();
        let mut state = LiouvilleState::zero(n);
        self.evolve(&realize(plan, self.target()), &mut state, false)?;
        state.probabilities(&z_basis(n))
    }

    /// Runs one plan. CCB needs the observable P_j; shots are drawn from `rng`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        plan: &SequencePlan,
        observable: Option<&PauliOperator>,
        shots: Shots,
        rng: &mut R,
    ) -> Result<RunRecord> {
        let n = self.n();
        check_dim(n, plan.n)?;
        let (initial, basis) = match &plan.body {
            PlanBody::Ccb { .. } => {
                let j = observable
                    .ok_or_else(|| Error::Config("character-cycle runs need an observable Pauli".into()))?;
                check_dim(n, j.n())?;
                (prepare_eigenstate(j), j.clone())
            }
            _ => (LiouvilleState::zero(n), z_basis(n)),
        };
        let probabilities = self.execute(plan, initial, &basis)?;
        let frequencies = match shots {
            Shots::Exact => None,
            Shots::Finite(s) => Some(sample_shots(&probabilities, s, rng)?),
        };
        let mut record = RunRecord {
            protocol: plan.protocol(),
            m: plan.m,
            stream: plan.stream,
            basis,
            probabilities,
            frequencies,
            ideal_probabilities: None,
            observations: Vec::new(),
        };
        let empirical = record.empirical();
        record.observations = match &plan.body {
            PlanBody::Cab { .. } => (0..1u64 << n)
                .map(|zmask| {
                    let k = PauliOperator::new(n, 0, zmask);
                    Observation { value: parity_expectation(&empirical, outcome_mask(&k)), observable: k }
                })
                .collect(),
            PlanBody::Ccb { character: p0, .. } => {
                let j = observable.expect("checked above").clone();
                vec![Observation { value: weighted_survival_ccb(&record, &j, p0)?, observable: j }]
            }
            PlanBody::Icrb { character: p0, .. } => {
                vec![Observation { observable: p0.clone(), value: empirical[0] }]
            }
            PlanBody::Xeb { .. } => {
                record.ideal_probabilities = Some(self.ideal_probabilities(plan)?);
                Vec::new()
            }
        };
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{NoiseInstance, NoiseModel, PauliNoiseSpec};
    use crate::circuits::{build_cz, build_ctx, cab_plan, ccb_plan, xeb_plan};
    use crate::pauli::all_paulis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_cab_survivals_are_one() {
        let t = build_ctx();
        let sim = Simulator::new(t.clone(), NoiseInstance::ideal(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plan = cab_plan(&t, 3, &mut rng, 0).unwrap();
        let rec = sim.run(&plan, None, Shots::Exact, &mut rng).unwrap();
        assert_eq!(rec.observations.len(), 4);
        assert!(rec.observations.iter().all(|o| (o.value - 1.0).abs() < 1e-12));
    }

    #[test]
    fn noiseless_ccb_weighted_values_are_one() {
        let t = build_ctx();
        let sim = Simulator::new(t.clone(), NoiseInstance::ideal(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for j in all_paulis(2) {
            let plan = ccb_plan(&t, 2, &mut rng, 0).unwrap();
            let rec = sim.run(&plan, Some(&j), Shots::Exact, &mut rng).unwrap();
            assert!((rec.observations[0].value - 1.0).abs() < 1e-12, "{j}");
        }
    }

    #[test]
    fn character_weight_flips_sign() {
        let t = build_cz();
        let sim = Simulator::new(t.clone(), NoiseInstance::ideal(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = ccb_plan(&t, 1, &mut rng, 0).unwrap();
        let j: PauliOperator = "ZX".parse().unwrap();
        let rec = sim.run(&plan, Some(&j), Shots::Exact, &mut rng).unwrap();
        let identity = PauliOperator::identity(2);
        let anti: PauliOperator = "XI".parse().unwrap();
        let raw = weighted_survival_ccb(&rec, &j, &identity).unwrap();
        assert_eq!(weighted_survival_ccb(&rec, &j, &anti).unwrap(), -raw);
    }

    #[test]
    fn shots_are_reproducible_and_concentrate() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let a = sample_shots(&probs, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_shots(&probs, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 1000);
        let big = 1_000_000;
        let f = sample_shots(&probs, big, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        for (c, p) in f.iter().zip(probs) {
            let sigma = (p * (1.0 - p) / big as f64).sqrt();
            assert!((*c as f64 / big as f64 - p).abs() < 5.0 * sigma);
        }
        assert_eq!(sample_shots(&[0.0, 1.0, 0.0], 50, &mut ChaCha8Rng::seed_from_u64(1)).unwrap(), vec![0, 50, 0]);
    }

    #[test]
    fn xeb_statistic_edge_cases() {
        let ideal = [0.7, 0.1, 0.1, 0.1];
        assert!((xeb_statistic(&ideal, &ideal, XebNormalization::Noisy).unwrap() - 1.0).abs() < 1e-14);
        let flat = [0.25; 4];
        assert!(xeb_statistic(&flat, &flat, XebNormalization::Ideal).is_err());
        // a uniform noisy output has zero numerator
        assert!(xeb_statistic(&flat, &ideal, XebNormalization::Ideal).unwrap().abs() < 1e-14);
    }

    #[test]
    fn xeb_denominators_under_depolarizing_mixture() {
        let ideal = [0.7, 0.1, 0.1, 0.1];
        let p = 0.9;
        let noisy: Vec<f64> = ideal.iter().map(|f| p * f + (1.0 - p) / 4.0).collect();
        assert!((xeb_statistic(&noisy, &ideal, XebNormalization::Ideal).unwrap() - p).abs() < 1e-12);
        assert!((xeb_statistic(&noisy, &ideal, XebNormalization::Noisy).unwrap() - 1.0 / p).abs() < 1e-12);
    }

    #[test]
    fn xeb_records_both_distributions() {
        // stabilizer outputs are often flat, which depolarizing noise leaves unchanged
        let t = build_ctx();
        let model = NoiseModel { pauli: PauliNoiseSpec::Depolarizing { p: 0.95 }, ..NoiseModel::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sim = Simulator::new(t.clone(), model.build(2, &mut rng).unwrap()).unwrap();
        let plan = xeb_plan(&t, 2, &mut rng, 0);
        let rec = sim.run(&plan, None, Shots::Exact, &mut rng).unwrap();
        let ideal = rec.ideal_probabilities.as_ref().unwrap();
        assert!((ideal.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let gap = rec.probabilities.iter().zip(ideal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-6);
    }
}
