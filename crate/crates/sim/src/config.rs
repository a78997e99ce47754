//! Experiment configuration, loaded from TOML with units spelled out in every key.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use bdris_core::channel::{LinkGeometry, PathlossConfig};
use bdris_core::circuit::{fit_with_report, Band, CircuitParams, FitPoint, LinearSusceptanceModel};
use bdris_core::optimizer::OptimizerOptions;
use serde::Deserialize;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    circuit: RawCircuit,
    ofdm: RawOfdm,
    pathloss: RawPathloss,
    link: RawLink,
    sweep: RawSweep,
    #[serde(default)]
    optimizer: RawOptimizer,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    l1_h: f64,
    l2_h: f64,
    c_min_f: f64,
    c_max_f: f64,
    f_c_hz: f64,
    band_lo_hz: f64,
    band_hi_hz: f64,
    fit_freqs: usize,
    fit_caps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOfdm {
    subcarriers: usize,
    bandwidth_hz: f64,
    taps: usize,
    cp_len: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPathloss {
    zeta0_db: f64,
    rt_distance_m: f64,
    rt_exponent: f64,
    ri_distance_m: f64,
    ri_exponent: f64,
    it_distance_m: f64,
    it_exponent: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    sigma2_dbm: f64,
    y0_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    power_dbm: Vec<f64>,
    elements: Vec<usize>,
    group_sizes: Vec<usize>,
    fixed_elements: usize,
    fixed_power_dbm: f64,
    trials: usize,
    master_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOptimizer {
    restarts: usize,
    max_iters: usize,
    grad_tol: f64,
    memory: usize,
}

impl Default for RawOptimizer {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        Self {
            restarts: o.restarts,
            max_iters: o.max_iters,
            grad_tol: o.grad_tol,
            memory: o.memory,
        }
    }
}

/// Validated experiment configuration. Powers are kept in dBm for labelling and
/// converted to watts where they are used; noise is stored in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub circuit: CircuitParams,
    pub band: Band,
    pub fit_freqs: usize,
    pub fit_caps: usize,
    pub subcarriers: usize,
    pub bandwidth_hz: f64,
    pub taps: usize,
    pub cp_len: usize,
    pub pathloss: PathlossConfig,
    pub sigma2_w: f64,
    pub y0_s: f64,
    pub power_dbm: Vec<f64>,
    pub elements: Vec<usize>,
    pub group_sizes: Vec<usize>,
    pub fixed_elements: usize,
    pub fixed_power_dbm: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Restart seed is overwritten per trial.
    pub optimizer: OptimizerOptions,
}

impl ExperimentConfig {
    pub fn desk_default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("bundled config is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("loading {}", path.display()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let c = &raw.circuit;
        let circuit = CircuitParams::new(c.l1_h, c.l2_h, c.c_min_f, c.c_max_f, c.f_c_hz)?;
        let band = Band::new(c.band_lo_hz, c.band_hi_hz)?;
        let p = &raw.pathloss;
        let geometry = |distance_m, exponent| LinkGeometry { distance_m, exponent };
        let pathloss = PathlossConfig::new(
            db_to_linear(p.zeta0_db),
            geometry(p.rt_distance_m, p.rt_exponent),
            geometry(p.ri_distance_m, p.ri_exponent),
            geometry(p.it_distance_m, p.it_exponent),
        )?;
        let o = &raw.optimizer;
        let config = Self {
            circuit,
            band,
            fit_freqs: c.fit_freqs,
            fit_caps: c.fit_caps,
            subcarriers: raw.ofdm.subcarriers,
            bandwidth_hz: raw.ofdm.bandwidth_hz,
            taps: raw.ofdm.taps,
            cp_len: raw.ofdm.cp_len,
            pathloss,
            sigma2_w: dbm_to_watts(raw.link.sigma2_dbm),
            y0_s: raw.link.y0_s,
            power_dbm: raw.sweep.power_dbm,
            elements: raw.sweep.elements,
            group_sizes: raw.sweep.group_sizes,
            fixed_elements: raw.sweep.fixed_elements,
            fixed_power_dbm: raw.sweep.fixed_power_dbm,
            trials: raw.sweep.trials,
            master_seed: raw.sweep.master_seed,
            optimizer: OptimizerOptions {
                restarts: o.restarts,
                max_iters: o.max_iters,
                grad_tol: o.grad_tol,
                memory: o.memory,
                ..OptimizerOptions::default()
            },
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks everything the downstream modules would otherwise reject mid-sweep.
    pub fn validate(&self) -> Result<()> {
        self.circuit.check_band(self.band)?;
        ensure!(
            self.band.contains(self.circuit.f_c),
            "center frequency {} Hz outside the band",
            self.circuit.f_c
        );
        ensure!(
            self.fit_freqs >= 2 && self.fit_caps >= 2,
            "fit grid needs at least 2x2 samples"
        );
        ensure!(self.taps >= 1, "need at least one tap");
        ensure!(
            self.subcarriers >= self.taps,
            "{} subcarriers cannot resolve {} taps",
            self.subcarriers,
            self.taps
        );
        bdris_core::channel::subcarrier_frequencies(self.circuit.f_c, self.bandwidth_hz, self.subcarriers, self.band)?;
        ensure!(
            self.sigma2_w > 0.0 && self.sigma2_w.is_finite(),
            "noise power must be positive"
        );
        ensure!(
            self.y0_s > 0.0 && self.y0_s.is_finite(),
            "reference admittance must be positive"
        );
        ensure!(self.trials >= 1, "need at least one trial");
        ensure!(!self.group_sizes.is_empty(), "group size list is empty");
        ensure!(!self.power_dbm.is_empty(), "power list is empty");
        ensure!(!self.elements.is_empty(), "element list is empty");
        if let Some(p) = self
            .power_dbm
            .iter()
            .chain([&self.fixed_power_dbm])
            .find(|p| !p.is_finite())
        {
            bail!("transmit power {p} dBm is not finite");
        }
        for &m in self.elements.iter().chain([&self.fixed_elements]) {
            ensure!(m >= 1, "element count must be positive");
            for &g in &self.group_sizes {
                ensure!(g >= 1 && m % g == 0, "{m} elements cannot be split into groups of {g}");
            }
        }
        ensure!(
            self.optimizer.grad_tol >= 0.0,
            "gradient tolerance must be non-negative"
        );
        Ok(())
    }

    pub fn fit_model(&self) -> Result<(LinearSusceptanceModel, Vec<FitPoint>)> {
        Ok(fit_with_report(
            &self.circuit,
            self.band.lo,
            self.band.hi,
            self.fit_freqs,
            self.fit_caps,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_loads() {
        let c = ExperimentConfig::desk_default();
        assert_eq!(c.subcarriers, 64);
        assert_eq!(c.group_sizes, [1, 3, 6]);
        assert!((c.sigma2_w - 1e-11).abs() < 1e-24);
        assert!((c.pathloss.zeta0 - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn dbm_conversion() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn indivisible_group_size_is_rejected() {
        let text = DEFAULT_CONFIG.replace("group_sizes = [1, 3, 6]", "group_sizes = [1, 5]");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("groups of 5"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = DEFAULT_CONFIG.replace("[link]", "[link]\nsigma2_w = 1.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn too_few_subcarriers_are_rejected() {
        let text = DEFAULT_CONFIG.replace("subcarriers = 64", "subcarriers = 8");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn optimizer_section_is_optional() {
        let cut = DEFAULT_CONFIG.find("[optimizer]").unwrap();
        let c = ExperimentConfig::from_toml_str(&DEFAULT_CONFIG[..cut]).unwrap();
        assert_eq!(c.optimizer, OptimizerOptions::default());
    }
}
