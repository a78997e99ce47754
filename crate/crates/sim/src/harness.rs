//! Seeded Monte Carlo trials and sweeps over transmit power or element count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Result};
use bdris_core::channel::{
    generate_taps, subcarrier_frequencies, taps_to_frequency, AdmittanceChannelSet, TapChannels,
};
use bdris_core::circuit::{FitPoint, LinearSusceptanceModel};
use bdris_core::optimizer::{baseline_flat_design, wideband_design, DesignResult, LinkBudget, OptimizerOptions};
use bdris_core::topology::GroupTopology;
use rayon::prelude::*;

use crate::config::{dbm_to_watts, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Optimizes against the frequency-dependent susceptance model.
    Wideband,
    /// Optimizes as if the center-frequency susceptances held on every subcarrier.
    Flat,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Wideband, Scheme::Flat];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Wideband => "wideband-aware",
            Scheme::Flat => "flat-baseline",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wideband" | "wideband-aware" => Ok(Scheme::Wideband),
            "flat" | "flat-baseline" => Ok(Scheme::Flat),
            other => bail!("unknown scheme {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Transmit power list at `fixed_elements`.
    Power,
    /// Element count list at `fixed_power_dbm`.
    Elements,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Channel seed of one trial. Scheme and group size are deliberately not inputs,
/// so every scheme and topology in a sweep sees the same realizations.
pub fn derive_seed(master: u64, elements: usize, power_index: usize, trial: usize) -> u64 {
    [elements as u64, power_index as u64, trial as u64]
        .into_iter()
        .fold(splitmix64(master), |acc, v| splitmix64(acc ^ v))
}

/// Restart seed of the optimizer, derived from the channel seed.
pub fn optimizer_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x6f70_7469_6d69_7a65)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok { rate: f64, objective: f64 },
    Failed { reason: String },
}

impl Outcome {
    pub fn rate(&self) -> Option<f64> {
        match self {
            Outcome::Ok { rate, .. } => Some(*rate),
            Outcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub scheme: Scheme,
    pub elements: usize,
    pub group_size: usize,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub cell: CellKey,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub wall_time_s: f64,
}

impl SweepRecord {
    /// Equality on everything except wall time.
    pub fn same_result(&self, other: &Self) -> bool {
        self.cell == other.cell && self.trial == other.trial && self.seed == other.seed && self.outcome == other.outcome
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: CellKey,
    pub trials: usize,
    pub failed: usize,
    pub mean_rate: f64,
    /// Standard error of the mean rate; NaN with fewer than two successful trials.
    pub stderr_rate: f64,
    pub mean_objective: f64,
}

impl CellSummary {
    pub fn wholly_failed(&self) -> bool {
        self.failed == self.trials
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-cell statistics in order of first appearance.
pub fn summarize(records: &[SweepRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<CellKey> = Vec::new();
    for r in records {
        if !cells.contains(&r.cell) {
            cells.push(r.cell);
        }
    }
    cells
        .into_iter()
        .map(|cell| {
            let in_cell: Vec<&SweepRecord> = records.iter().filter(|r| r.cell == cell).collect();
            let (rates, objectives): (Vec<f64>, Vec<f64>) = in_cell
                .iter()
                .filter_map(|r| match r.outcome {
                    Outcome::Ok { rate, objective } => Some((rate, objective)),
                    Outcome::Failed { .. } => None,
                })
                .unzip();
            let (mean_rate, stderr_rate) = mean_stderr(&rates);
            CellSummary {
                cell,
                trials: in_cell.len(),
                failed: in_cell.len() - rates.len(),
                mean_rate,
                stderr_rate,
                mean_objective: mean_stderr(&objectives).0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedStat {
    pub pairs: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Statistics of `rate(a) - rate(b)` over trials where both cells succeeded.
pub fn paired_difference(records: &[SweepRecord], a: &CellKey, b: &CellKey) -> PairedStat {
    let diffs: Vec<f64> = records
        .iter()
        .filter(|r| r.cell == *a)
        .filter_map(|ra| {
            let rb = records.iter().find(|r| r.cell == *b && r.trial == ra.trial)?;
            Some(ra.outcome.rate()? - rb.outcome.rate()?)
        })
        .collect();
    let (mean, stderr) = mean_stderr(&diffs);
    PairedStat {
        pairs: diffs.len(),
        mean,
        stderr,
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summaries: Vec<CellSummary>,
}

impl SweepOutput {
    pub fn any_cell_wholly_failed(&self) -> bool {
        self.summaries.iter().any(CellSummary::wholly_failed)
    }
}

/// A configuration together with its fitted susceptance model.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    model: LinearSusceptanceModel,
    fit_report: Vec<FitPoint>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (model, fit_report) = config.fit_model()?;
        Ok(Self {
            config,
            model,
            fit_report,
        })
    }

    /// Uses `model` in place of the fitted one.
    pub fn with_model(config: ExperimentConfig, model: LinearSusceptanceModel) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            model,
            fit_report: Vec::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn model(&self) -> &LinearSusceptanceModel {
        &self.model
    }

    pub fn fit_report(&self) -> &[FitPoint] {
        &self.fit_report
    }

    pub fn taps(&self, elements: usize, seed: u64) -> Result<TapChannels> {
        Ok(generate_taps(seed, elements, self.config.taps, &self.config.pathloss)?)
    }

    pub fn channels_from_taps(&self, taps: &TapChannels) -> Result<AdmittanceChannelSet> {
        let c = &self.config;
        let freqs = subcarrier_frequencies(c.circuit.f_c, c.bandwidth_hz, c.subcarriers, self.model.band)?;
        let h = taps_to_frequency(taps, c.subcarriers)?;
        Ok(AdmittanceChannelSet::from_scattering(&h, &freqs, c.y0_s)?)
    }

    pub fn channels(&self, elements: usize, seed: u64) -> Result<AdmittanceChannelSet> {
        self.channels_from_taps(&self.taps(elements, seed)?)
    }

    pub fn optimizer_options(&self, seed: u64) -> OptimizerOptions {
        OptimizerOptions {
            seed: optimizer_seed(seed),
            ..self.config.optimizer
        }
    }

    /// Full design for one realization, keeping the channels, powers and trace.
    pub fn design(
        &self,
        scheme: Scheme,
        channels: &AdmittanceChannelSet,
        group_size: usize,
        power_dbm: f64,
        seed: u64,
    ) -> Result<DesignResult> {
        let topology = GroupTopology::with_group_size(channels.elements(), group_size)?;
        let budget = LinkBudget::new(dbm_to_watts(power_dbm), self.config.sigma2_w)?;
        let opts = self.optimizer_options(seed);
        let design = match scheme {
            Scheme::Wideband => wideband_design(channels, &topology, &self.model, &opts, &budget)?,
            Scheme::Flat => baseline_flat_design(channels, &topology, &self.model, &opts, &budget)?,
        };
        Ok(design)
    }

    /// One realization, one scheme. Errors become a failed record.
    pub fn run_trial(
        &self,
        scheme: Scheme,
        elements: usize,
        group_size: usize,
        power_dbm: f64,
        trial: usize,
        seed: u64,
    ) -> SweepRecord {
        let start = Instant::now();
        let outcome = self
            .channels(elements, seed)
            .and_then(|ch| self.design(scheme, &ch, group_size, power_dbm, seed))
            .map_or_else(
                |e| Outcome::Failed {
                    reason: format!("{e:#}"),
                },
                |d| Outcome::Ok {
                    rate: d.rate,
                    objective: d.objective,
                },
            );
        SweepRecord {
            cell: CellKey {
                scheme,
                elements,
                group_size,
                power_dbm,
            },
            trial,
            seed,
            outcome,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    }

    /// Every (axis value, group size, scheme, trial) combination, in that
    /// canonical order regardless of how trials are scheduled.
    pub fn run_sweep(&self, axis: SweepAxis, schemes: &[Scheme]) -> SweepOutput {
        let c = &self.config;
        // (elements, power_dbm, power_index)
        let points: Vec<(usize, f64, usize)> = match axis {
            SweepAxis::Power => c
                .power_dbm
                .iter()
                .enumerate()
                .map(|(i, &p)| (c.fixed_elements, p, i))
                .collect(),
            SweepAxis::Elements => c.elements.iter().map(|&m| (m, c.fixed_power_dbm, 0)).collect(),
        };
        let mut jobs = Vec::new();
        for &(elements, power_dbm, power_index) in &points {
            for &group_size in &c.group_sizes {
                for &scheme in schemes {
                    for trial in 0..c.trials {
                        jobs.push((scheme, elements, group_size, power_dbm, power_index, trial));
                    }
                }
            }
        }
        let records: Vec<SweepRecord> = jobs
            .into_par_iter()
            .map(|(scheme, m, g, p, pi, trial)| {
                let seed = derive_seed(c.master_seed, m, pi, trial);
                self.run_trial(scheme, m, g, p, trial, seed)
            })
            .collect();
        let summaries = summarize(&records);
        SweepOutput { records, summaries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_depends_on_every_input() {
        let base = derive_seed(1, 12, 0, 0);
        assert_eq!(base, derive_seed(1, 12, 0, 0));
        assert_ne!(base, derive_seed(2, 12, 0, 0));
        assert_ne!(base, derive_seed(1, 24, 0, 0));
        assert_ne!(base, derive_seed(1, 12, 1, 0));
        assert_ne!(base, derive_seed(1, 12, 0, 1));
        // Argument positions are not interchangeable.
        assert_ne!(derive_seed(1, 1, 2, 3), derive_seed(1, 3, 2, 1));
    }

    #[test]
    fn mean_stderr_small_cases() {
        assert!(mean_stderr(&[]).0.is_nan());
        let (m, s) = mean_stderr(&[2.0]);
        assert_eq!(m, 2.0);
        assert!(s.is_nan());
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("wideband".parse::<Scheme>().unwrap(), Scheme::Wideband);
        assert_eq!("flat-baseline".parse::<Scheme>().unwrap(), Scheme::Flat);
        assert!("both".parse::<Scheme>().is_err());
    }

    #[test]
    fn failures_are_counted() {
        let cell = CellKey {
            scheme: Scheme::Flat,
            elements: 4,
            group_size: 2,
            power_dbm: 30.0,
        };
        let rec = |trial, outcome| SweepRecord {
            cell,
            trial,
            seed: 0,
            outcome,
            wall_time_s: 0.0,
        };
        let records = [
            rec(0, Outcome::Failed { reason: "boom".into() }),
            rec(
                1,
                Outcome::Ok {
                    rate: 2.0,
                    objective: 1.0,
                },
            ),
        ];
        let s = summarize(&records);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].trials, s[0].failed), (2, 1));
        assert_eq!(s[0].mean_rate, 2.0);
        assert!(!s[0].wholly_failed());
    }
}
