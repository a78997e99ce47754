//! Lumped-circuit admittance of one tunable component and its linear wideband model.
//!
//! Each tunable admittance is an inductor `L1` in parallel with a series `L2`-`C`
//! branch, with `C` set by a varactor. Its susceptance over a band around the
//! center frequency `f_c` is approximated by
//!
//! ```text
//! B(B_c, f) = F1(f) * B_c + F2(f),   F1(f) = alpha1 * f + beta1,   F2(f) = alpha2 * f + beta2
//! ```
//!
//! where `B_c` is the susceptance the same capacitor produces at `f_c`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::{Error, Result, C64};

/// Minimum series-branch reactance magnitude, in ohms, before the branch is
/// treated as resonant.
pub const RESONANCE_GUARD_OHM: f64 = 1e-6;

/// Frequency interval `[lo, hi]` in hertz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !(hi >= lo) {
            return Err(Error::InvalidParameter(alloc::format!(
                "band [{lo}, {hi}] Hz must satisfy 0 < lo <= hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Lumped-element values of a tunable admittance component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Shunt inductance, henries.
    pub l1: f64,
    /// Series inductance, henries.
    pub l2: f64,
    /// Smallest varactor capacitance, farads.
    pub c_min: f64,
    /// Largest varactor capacitance, farads.
    pub c_max: f64,
    /// Center frequency, hertz.
    pub f_c: f64,
}

impl CircuitParams {
    pub fn new(l1: f64, l2: f64, c_min: f64, c_max: f64, f_c: f64) -> Result<Self> {
        if !(l1 > 0.0) {
            return Err(Error::NonPositiveInput("L1"));
        }
        if !(l2 > 0.0) {
            return Err(Error::NonPositiveInput("L2"));
        }
        if !(c_min > 0.0) {
            return Err(Error::NonPositiveInput("C_min"));
        }
        if !(f_c > 0.0) {
            return Err(Error::NonPositiveInput("f_c"));
        }
        if !(c_max > c_min) {
            return Err(Error::InvalidParameter(alloc::format!(
                "capacitance range [{c_min}, {c_max}] F is empty"
            )));
        }
        Ok(Self {
            l1,
            l2,
            c_min,
            c_max,
            f_c,
        })
    }

    /// SMV1231-style varactor at 2.4 GHz: L1 = 2.5 nH, L2 = 0.7 nH, C in [0.2, 3] pF.
    pub fn reference_varactor() -> Self {
        Self {
            l1: 2.5e-9,
            l2: 0.7e-9,
            c_min: 0.2e-12,
            c_max: 3.0e-12,
            f_c: 2.4e9,
        }
    }

    /// Series `L2`-`C` resonance frequency.
    pub fn series_resonance_hz(&self, c: f64) -> f64 {
        1.0 / (2.0 * PI * Float::sqrt(self.l2 * c))
    }

    /// Fails if any series resonance for `C` in `[C_min, C_max]` lands inside `band`.
    pub fn check_band(&self, band: Band) -> Result<()> {
        // Resonance decreases with C, so the capacitor range maps onto [f(C_max), f(C_min)].
        let lowest = self.series_resonance_hz(self.c_max);
        let highest = self.series_resonance_hz(self.c_min);
        if band.hi < lowest || band.lo > highest {
            Ok(())
        } else {
            let f = lowest.max(band.lo).min(band.hi);
            let w = 2.0 * PI * f;
            let c = 1.0 / (w * w * self.l2);
            Err(Error::ResonanceSingularity {
                reactance_ohm: (w * self.l2 - 1.0 / (w * c)).abs(),
            })
        }
    }
}

/// Complex admittance `1/(j w L1) + 1/(j w L2 + 1/(j w C))` of one component.
pub fn exact_admittance(params: &CircuitParams, c: f64, f: f64) -> Result<C64> {
    if !(f > 0.0) {
        return Err(Error::NonPositiveInput("frequency"));
    }
    if !(c > 0.0) {
        return Err(Error::NonPositiveInput("capacitance"));
    }
    let w = 2.0 * PI * f;
    let series_reactance = w * params.l2 - 1.0 / (w * c);
    if series_reactance.abs() <= RESONANCE_GUARD_OHM {
        return Err(Error::ResonanceSingularity {
            reactance_ohm: series_reactance.abs(),
        });
    }
    // Both branches are pure reactances, so the admittance is built on the
    // imaginary axis only; the real part is exactly zero.
    let shunt = -1.0 / (w * params.l1);
    let series = -1.0 / series_reactance;
    Ok(C64::new(0.0, shunt + series))
}

/// Susceptance `Im{Y(C, f)}` in siemens.
pub fn exact_susceptance(params: &CircuitParams, c: f64, f: f64) -> Result<f64> {
    exact_admittance(params, c, f).map(|y| y.im)
}

/// Affine-in-frequency susceptance model with its validity band and tuning range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSusceptanceModel {
    /// Slope of `F1`, per hertz.
    pub alpha1: f64,
    /// Intercept of `F1`, dimensionless.
    pub beta1: f64,
    /// Slope of `F2`, siemens per hertz.
    pub alpha2: f64,
    /// Intercept of `F2`, siemens.
    pub beta2: f64,
    pub f_c: f64,
    pub band: Band,
    /// Tuning range at `f_c`, siemens.
    pub b_min: f64,
    pub b_max: f64,
}

impl LinearSusceptanceModel {
    /// Hardware whose susceptance does not move with frequency (`F1 = 1`, `F2 = 0`).
    pub fn flat(b_min: f64, b_max: f64, f_c: f64, band: Band) -> Result<Self> {
        Self::new(0.0, 1.0, 0.0, 0.0, f_c, band, b_min, b_max)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha1: f64,
        beta1: f64,
        alpha2: f64,
        beta2: f64,
        f_c: f64,
        band: Band,
        b_min: f64,
        b_max: f64,
    ) -> Result<Self> {
        if !(b_min < b_max) {
            return Err(Error::InvalidParameter(alloc::format!(
                "susceptance range [{b_min}, {b_max}] S is empty"
            )));
        }
        if !band.contains(f_c) {
            return Err(Error::OutOfBand {
                f_hz: f_c,
                lo_hz: band.lo,
                hi_hz: band.hi,
            });
        }
        let all_finite = [alpha1, beta1, alpha2, beta2].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("non-finite model coefficient".into()));
        }
        Ok(Self {
            alpha1,
            beta1,
            alpha2,
            beta2,
            f_c,
            band,
            b_min,
            b_max,
        })
    }

    pub fn f1(&self, f: f64) -> f64 {
        self.alpha1 * f + self.beta1
    }

    pub fn f2(&self, f: f64) -> f64 {
        self.alpha2 * f + self.beta2
    }

    pub fn is_flat(&self) -> bool {
        self.alpha1 == 0.0 && self.beta1 == 1.0 && self.alpha2 == 0.0 && self.beta2 == 0.0
    }

    pub fn check_frequency(&self, f: f64) -> Result<()> {
        if self.band.contains(f) {
            Ok(())
        } else {
            Err(Error::OutOfBand {
                f_hz: f,
                lo_hz: self.band.lo,
                hi_hz: self.band.hi,
            })
        }
    }

    pub fn check_susceptance(&self, b_c: f64) -> Result<()> {
        if b_c >= self.b_min && b_c <= self.b_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                b_s: b_c,
                min_s: self.b_min,
                max_s: self.b_max,
            })
        }
    }

    /// `F1(f) * b_c + F2(f)` after checking band and range.
    pub fn susceptance(&self, b_c: f64, f: f64) -> Result<f64> {
        self.check_frequency(f)?;
        self.check_susceptance(b_c)?;
        Ok(self.susceptance_unchecked(b_c, f))
    }

    pub fn susceptance_unchecked(&self, b_c: f64, f: f64) -> f64 {
        self.f1(f) * b_c + self.f2(f)
    }
}

/// `model_susceptance`: evaluates the linear model at `(B_c, f)`.
pub fn model_susceptance(model: &LinearSusceptanceModel, b_c: f64, f: f64) -> Result<f64> {
    model.susceptance(b_c, f)
}

/// Cartesian (frequency x capacitance) sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub freqs: Vec<f64>,
    pub caps: Vec<f64>,
}

impl SampleGrid {
    pub fn uniform(params: &CircuitParams, band: Band, n_freq: usize, n_cap: usize) -> Self {
        Self {
            freqs: linspace(band.lo, band.hi, n_freq),
            caps: linspace(params.c_min, params.c_max, n_cap),
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Per-frequency line fit of `B(C, f)` against `B_c(C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub f_hz: f64,
    pub slope: f64,
    pub intercept: f64,
    /// NMSE of the fitted linear model against the exact curve at this frequency.
    pub nmse_pointwise: f64,
}

/// Default grid resolution used by [`fit_linear_model`] callers.
pub const DEFAULT_FIT_FREQS: usize = 31;
pub const DEFAULT_FIT_CAPS: usize = 57;

/// Fits `F1` and `F2` from the exact circuit response over `[f_lo, f_hi]`.
///
/// At each of `n_freq` frequencies the exact susceptances over `n_cap` capacitor
/// values are regressed on their center-frequency values `B_c`. The resulting
/// slopes and intercepts are then fitted as lines in frequency, anchored at
/// `(f_c, 1)` and `(f_c, 0)` respectively: the model must be the identity at `f_c`
/// because that is where `B_c` is defined.
pub fn fit_linear_model(
    params: &CircuitParams,
    f_lo: f64,
    f_hi: f64,
    n_freq: usize,
    n_cap: usize,
) -> Result<LinearSusceptanceModel> {
    fit_with_report(params, f_lo, f_hi, n_freq, n_cap).map(|(model, _)| model)
}

/// [`fit_linear_model`] plus the per-frequency diagnostics.
pub fn fit_with_report(
    params: &CircuitParams,
    f_lo: f64,
    f_hi: f64,
    n_freq: usize,
    n_cap: usize,
) -> Result<(LinearSusceptanceModel, Vec<FitPoint>)> {
    if n_freq < 2 {
        return Err(Error::DegenerateFit("need at least two frequency samples"));
    }
    if n_cap < 2 {
        return Err(Error::DegenerateFit("need at least two capacitor samples"));
    }
    let band = Band::new(f_lo, f_hi)?;
    if !band.contains(params.f_c) {
        return Err(Error::OutOfBand {
            f_hz: params.f_c,
            lo_hz: f_lo,
            hi_hz: f_hi,
        });
    }
    params.check_band(band)?;
    let grid = SampleGrid::uniform(params, band, n_freq, n_cap);

    let b_c = grid
        .caps
        .iter()
        .map(|&c| exact_susceptance(params, c, params.f_c))
        .collect::<Result<Vec<_>>>()?;
    let mean_bc = mean(&b_c);
    let var_bc: f64 = b_c.iter().map(|b| (b - mean_bc) * (b - mean_bc)).sum();
    if !(var_bc > 0.0) {
        return Err(Error::DegenerateFit("capacitor grid is constant"));
    }

    let mut slopes = Vec::with_capacity(n_freq);
    let mut intercepts = Vec::with_capacity(n_freq);
    let mut exact_rows = Vec::with_capacity(n_freq);
    for &f in &grid.freqs {
        let exact = grid
            .caps
            .iter()
            .map(|&c| exact_susceptance(params, c, f))
            .collect::<Result<Vec<_>>>()?;
        let mean_b = mean(&exact);
        let cov: f64 = b_c.iter().zip(&exact).map(|(x, y)| (x - mean_bc) * (y - mean_b)).sum();
        let slope = cov / var_bc;
        slopes.push(slope);
        intercepts.push(mean_b - slope * mean_bc);
        exact_rows.push(exact);
    }

    let spread: f64 = grid.freqs.iter().map(|f| (f - params.f_c) * (f - params.f_c)).sum();
    let (alpha1, alpha2) = if spread > 0.0 {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for ((f, slope), intercept) in grid.freqs.iter().zip(&slopes).zip(&intercepts) {
            let d = f - params.f_c;
            s1 += d * (slope - 1.0);
            s2 += d * intercept;
        }
        (s1 / spread, s2 / spread)
    } else {
        // The band has collapsed onto f_c, where the model is the identity.
        (0.0, 0.0)
    };
    let beta1 = 1.0 - alpha1 * params.f_c;
    let beta2 = -alpha2 * params.f_c;

    let b_min = exact_susceptance(params, params.c_min, params.f_c)?;
    let b_max = exact_susceptance(params, params.c_max, params.f_c)?;
    let model = LinearSusceptanceModel::new(alpha1, beta1, alpha2, beta2, params.f_c, band, b_min, b_max)?;

    let report = grid
        .freqs
        .iter()
        .zip(slopes.iter().zip(&intercepts))
        .zip(&exact_rows)
        .map(|((&f, (&slope, &intercept)), exact)| {
            let (num, den) = squared_errors(&model, &b_c, f, exact);
            FitPoint {
                f_hz: f,
                slope,
                intercept,
                nmse_pointwise: if den > 0.0 { num / den } else { 0.0 },
            }
        })
        .collect();
    Ok((model, report))
}

fn squared_errors(model: &LinearSusceptanceModel, b_c: &[f64], f: f64, exact: &[f64]) -> (f64, f64) {
    b_c.iter().zip(exact).fold((0.0, 0.0), |(num, den), (&bc, &e)| {
        let err = model.susceptance_unchecked(bc, f) - e;
        (num + err * err, den + e * e)
    })
}

/// Normalized mean square error `sum (B_model - B_exact)^2 / sum B_exact^2` over `grid`.
pub fn fit_nmse(model: &LinearSusceptanceModel, params: &CircuitParams, grid: &SampleGrid) -> Result<f64> {
    if grid.freqs.is_empty() || grid.caps.is_empty() {
        return Err(Error::InvalidParameter("empty NMSE grid".into()));
    }
    let b_c = grid
        .caps
        .iter()
        .map(|&c| exact_susceptance(params, c, params.f_c))
        .collect::<Result<Vec<_>>>()?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &f in &grid.freqs {
        model.check_frequency(f)?;
        let exact = grid
            .caps
            .iter()
            .map(|&c| exact_susceptance(params, c, f))
            .collect::<Result<Vec<_>>>()?;
        let (n, d) = squared_errors(model, &b_c, f, &exact);
        num += n;
        den += d;
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
