//! Result files: long-format raw CSV, fit report JSON and summary JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::run::{comparison_table, ComparisonRow, ExactReference, ExperimentOutcome, ProtocolSummary, ReferenceOutcome};
use crate::circuits::Protocol;
use crate::error::{Error, Result};
use crate::estimation::{estimate_from_table, Component, OffsetDecayFit, TableEstimate};
use crate::simulator::{MonteCarloTable, SequenceValue};

pub const RAW_FILE: &str = "raw.csv";
pub const FITS_FILE: &str = "fits.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub repeat: usize,
    pub protocol: Protocol,
    pub qubits: usize,
    pub m: usize,
    pub sequence_index: usize,
    pub observable: String,
    pub value: f64,
    pub shots: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical TOML form of the config.
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn provenance(cfg: &ExperimentConfig) -> Result<Provenance> {
    Ok(Provenance { config_hash: config_hash(cfg)?, seed: cfg.seed, code_version: env!("CARGO_PKG_VERSION").into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub observable: String,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub decay: f64,
    pub residual_norm: f64,
    pub points_dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub repeat: usize,
    pub protocol: Protocol,
    pub fidelity: f64,
    pub fits: Vec<FitEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_fit: Option<OffsetDecayFit>,
}

fn fit_record(repeat: usize, est: &TableEstimate, fidelity: f64) -> FitRecord {
    FitRecord {
        repeat,
        protocol: est.estimate.protocol,
        fidelity,
        fits: est
            .fits
            .iter()
            .map(|f| FitEntry {
                observable: f.observable.clone(),
                amplitude: f.amplitude,
                decay: f.decay,
                residual_norm: f.residual_norm,
                points_dropped: f.points_dropped,
            })
            .collect(),
        offset_fit: est.offset_fit.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBrief {
    pub eps_m: f64,
    pub eps_b: f64,
    pub delta: f64,
}

/// Compact per-protocol record: fidelity, decays and sample sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub protocol: Protocol,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub components: Vec<Component>,
    #[serde(rename = "K")]
    pub sequences: usize,
    #[serde(rename = "M")]
    pub observables: Option<usize>,
    pub seed: u64,
    pub confidence: Option<ConfidenceBrief>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub provenance: Provenance,
    pub qubits: usize,
    pub exact: ExactReference,
    pub pilot_decay: Option<f64>,
    pub headlines: Vec<Headline>,
    pub protocols: Vec<ProtocolSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceOutcome>,
}

pub fn summary_document(out: &ExperimentOutcome) -> Result<SummaryDocument> {
    let headlines = out
        .summaries
        .iter()
        .map(|s| Headline {
            protocol: s.protocol,
            fidelity: s.mean,
            components: s.components.clone(),
            sequences: s.sequences,
            observables: s.observables,
            seed: out.config.seed,
            confidence: s.confidence.as_ref().map(|c| ConfidenceBrief { eps_m: c.eps_m, eps_b: c.eps_b, delta: c.delta }),
        })
        .collect();
    Ok(SummaryDocument {
        provenance: provenance(&out.config)?,
        qubits: out.n,
        exact: out.runs[0].exact.clone(),
        pilot_decay: out.pilot_decay,
        headlines,
        protocols: out.summaries.clone(),
        comparison: (out.summaries.len() > 1).then(|| comparison_table(&out.summaries)),
        reference: out.reference.clone(),
    })
}

pub fn raw_rows(out: &ExperimentOutcome) -> Vec<RawRow> {
    out.runs
        .iter()
        .flat_map(|run| {
            run.table.rows.iter().map(move |r| RawRow {
                repeat: run.repeat,
                protocol: run.protocol,
                qubits: run.table.n,
                m: r.m,
                sequence_index: r.sequence,
                observable: r.observable.clone(),
                value: r.value,
                shots: run.table.shots,
            })
        })
        .collect()
}

pub fn write_raw_csv(rows: &[RawRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Paths written for one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub raw_csv: PathBuf,
    pub fits_json: PathBuf,
    pub summary_json: PathBuf,
    pub provenance: Provenance,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_bundle(out: &ExperimentOutcome, dir: &Path) -> Result<ResultBundle> {
    std::fs::create_dir_all(dir)?;
    let raw_csv = dir.join(RAW_FILE);
    let fits_json = dir.join(FITS_FILE);
    let summary_json = dir.join(SUMMARY_FILE);
    write_raw_csv(&raw_rows(out), &raw_csv)?;
    let fits: Vec<FitRecord> = out.runs.iter().map(|r| fit_record(r.repeat, &r.estimate, r.fidelity())).collect();
    write_json(&fits, &fits_json)?;
    let summary = summary_document(out)?;
    write_json(&summary, &summary_json)?;
    std::fs::write(dir.join(CONFIG_FILE), out.config.to_toml()?)?;
    Ok(ResultBundle { raw_csv, fits_json, summary_json, provenance: summary.provenance })
}

/// Rebuilds the per-(repeat, protocol) tables of a raw CSV, in file order.
pub fn tables_from_rows(rows: &[RawRow]) -> Vec<(usize, MonteCarloTable)> {
    let mut out: Vec<(usize, MonteCarloTable)> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|(rep, t)| *rep == r.repeat && t.protocol == r.protocol) {
            Some(i) => i,
            None => {
                out.push((r.repeat, MonteCarloTable { protocol: r.protocol, n: r.qubits, shots: r.shots, rows: vec![] }));
                out.len() - 1
            }
        };
        out[idx].1.rows.push(SequenceValue {
            m: r.m,
            sequence: r.sequence_index,
            observable: r.observable.clone(),
            value: r.value,
        });
    }
    out
}

/// Fits every (repeat, protocol) block of a raw CSV again.
pub fn refit(path: &Path) -> Result<Vec<FitRecord>> {
    let rows = read_raw_csv(path)?;
    if rows.is_empty() {
        return Err(Error::Config(format!("{} holds no data rows", path.display())));
    }
    tables_from_rows(&rows)
        .iter()
        .map(|(rep, t)| {
            let est = estimate_from_table(t)?;
            let f = est.estimate.value;
            Ok(fit_record(*rep, &est, f))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{preset, DepthGrid, ProtocolChoice};
    use crate::experiment::run::run_experiment;

    fn tiny() -> ExperimentConfig {
        let mut cfg = preset("ctx-fig3").unwrap();
        cfg.protocol = ProtocolChoice::Compare;
        cfg.depths = DepthGrid::List { values: vec![1, 2, 4] };
        cfg.sequences = 3;
        cfg.observables = 2;
        cfg.repeats = 2;
        cfg
    }

    #[test]
    fn bundle_round_trips_through_refit() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&tiny()).unwrap();
        let bundle = write_bundle(&out, dir.path()).unwrap();
        let rows = read_raw_csv(&bundle.raw_csv).unwrap();
        assert_eq!(rows, raw_rows(&out));
        let refits = refit(&bundle.raw_csv).unwrap();
        assert_eq!(refits.len(), out.runs.len());
        for (a, run) in refits.iter().zip(&out.runs) {
            assert_eq!(a.fidelity, run.estimate.estimate.value);
        }
        let summary: SummaryDocument =
            serde_json::from_str(&std::fs::read_to_string(&bundle.summary_json).unwrap()).unwrap();
        assert_eq!(summary.provenance.config_hash.len(), 64);
        assert_eq!(summary.headlines.len(), 2);
        assert!(summary.comparison.is_some());
    }

    #[test]
    fn hash_tracks_config() {
        let a = tiny();
        let mut b = tiny();
        b.seed += 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap(), config_hash(&tiny()).unwrap());
    }
}
