//! Wideband channel generation and the admittance-parameter end-to-end channel.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::Band;
use crate::linalg::{CMatrix, Lu};
use crate::topology::AdmittanceMatrix;
use crate::{Error, Result, C64};

/// Reference characteristic admittance, siemens.
pub const DEFAULT_Y0: f64 = 1.0 / 50.0;

/// The three propagation links of the RIS-aided SISO link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    /// Transmitter to receiver.
    Rt,
    /// RIS to receiver.
    Ri,
    /// Transmitter to RIS.
    It,
}

impl Link {
    pub const ALL: [Link; 3] = [Link::Rt, Link::Ri, Link::It];

    pub fn as_str(self) -> &'static str {
        match self {
            Link::Rt => "RT",
            Link::Ri => "RI",
            Link::It => "IT",
        }
    }
}

impl core::str::FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RT" | "rt" => Ok(Link::Rt),
            "RI" | "ri" => Ok(Link::Ri),
            "IT" | "it" => Ok(Link::It),
            other => Err(Error::InvalidParameter(alloc::format!("unknown link {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_m: f64,
    pub exponent: f64,
}

/// Distance-based pathloss `zeta_o = zeta0 * d_o^(-eps_o)` per link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossConfig {
    /// Power attenuation at 1 m, linear.
    pub zeta0: f64,
    pub rt: LinkGeometry,
    pub ri: LinkGeometry,
    pub it: LinkGeometry,
}

impl PathlossConfig {
    pub fn new(zeta0: f64, rt: LinkGeometry, ri: LinkGeometry, it: LinkGeometry) -> Result<Self> {
        // zeta0 = 0 is allowed: it switches the channel off entirely.
        if !(zeta0 >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("zeta0 = {zeta0} must be >= 0")));
        }
        for (name, g) in [("RT", rt), ("RI", ri), ("IT", it)] {
            if !(g.distance_m >= 1.0) || !(g.exponent > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} link needs distance >= 1 m and exponent > 0, got {g:?}"
                )));
            }
        }
        Ok(Self { zeta0, rt, ri, it })
    }

    /// Distances 33/5/30 m with exponents 3.8/2.2/2.5 and -30 dB at 1 m.
    pub fn reference() -> Self {
        Self {
            zeta0: 1e-3,
            rt: LinkGeometry {
                distance_m: 33.0,
                exponent: 3.8,
            },
            ri: LinkGeometry {
                distance_m: 5.0,
                exponent: 2.2,
            },
            it: LinkGeometry {
                distance_m: 30.0,
                exponent: 2.5,
            },
        }
    }

    pub fn gain(&self, link: Link) -> f64 {
        let g = match link {
            Link::Rt => self.rt,
            Link::Ri => self.ri,
            Link::It => self.it,
        };
        self.zeta0 * Float::powf(g.distance_m, -g.exponent)
    }
}

/// Delay-domain taps for every link.
#[derive(Debug, Clone, PartialEq)]
pub struct TapChannels {
    /// `rt[t]`.
    pub rt: Vec<C64>,
    /// `ri[t][m]`: tap `t` from RIS element `m` to the receiver.
    pub ri: Vec<Vec<C64>>,
    /// `it[t][m]`: tap `t` from the transmitter to RIS element `m`.
    pub it: Vec<Vec<C64>>,
}

impl TapChannels {
    pub fn zeros(elements: usize, n_taps: usize) -> Self {
        Self {
            rt: vec![C64::zero(); n_taps],
            ri: vec![vec![C64::zero(); elements]; n_taps],
            it: vec![vec![C64::zero(); elements]; n_taps],
        }
    }

    pub fn n_taps(&self) -> usize {
        self.rt.len()
    }

    pub fn elements(&self) -> usize {
        self.ri.first().map_or(0, Vec::len)
    }

    fn check_shape(&self) -> Result<()> {
        let (t, m) = (self.n_taps(), self.elements());
        let ok = self.ri.len() == t && self.it.len() == t && self.ri.iter().chain(&self.it).all(|v| v.len() == m);
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("ragged tap channels".into()))
        }
    }
}

/// Draws i.i.d. circularly symmetric complex Gaussian taps with per-tap variance
/// `zeta_o / n_taps` (uniform power-delay profile), deterministically from `seed`.
pub fn generate_taps(seed: u64, elements: usize, n_taps: usize, pathloss: &PathlossConfig) -> Result<TapChannels> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_taps_with(&mut rng, elements, n_taps, pathloss)
}

/// [`generate_taps`] drawing from a caller-supplied generator. Draw order is
/// RT taps, then RI (tap-major), then IT.
pub fn generate_taps_with<R: Rng + ?Sized>(
    rng: &mut R,
    elements: usize,
    n_taps: usize,
    pathloss: &PathlossConfig,
) -> Result<TapChannels> {
    if elements == 0 || n_taps == 0 {
        return Err(Error::InvalidParameter("need at least one element and one tap".into()));
    }
    let mut draw = |link: Link| {
        let sigma = Float::sqrt(pathloss.gain(link) / n_taps as f64 / 2.0);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(sigma * re, sigma * im)
    };
    let rt = (0..n_taps).map(|_| draw(Link::Rt)).collect();
    let ri = (0..n_taps)
        .map(|_| (0..elements).map(|_| draw(Link::Ri)).collect())
        .collect();
    let it = (0..n_taps)
        .map(|_| (0..elements).map(|_| draw(Link::It)).collect())
        .collect();
    Ok(TapChannels { rt, ri, it })
}

/// Per-subcarrier scattering-parameter channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChannels {
    pub rt: Vec<C64>,
    /// `ri[n]`, a row of length `M`.
    pub ri: Vec<Vec<C64>>,
    /// `it[n]`, a column of length `M`.
    pub it: Vec<Vec<C64>>,
}

impl FrequencyChannels {
    pub fn subcarriers(&self) -> usize {
        self.rt.len()
    }
}

/// `h_n = sum_t tap_t exp(-j 2 pi n t / N)` for `n = 0..N`, entrywise on vector links.
pub fn taps_to_frequency(taps: &TapChannels, n: usize) -> Result<FrequencyChannels> {
    taps.check_shape()?;
    if n < taps.n_taps() {
        return Err(Error::InvalidParameter(alloc::format!(
            "{n} subcarriers cannot resolve {} taps",
            taps.n_taps()
        )));
    }
    // Twiddle for (n * t) mod N, reduced to keep the phase argument exact.
    let twiddle: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let m = taps.elements();
    let mut out = FrequencyChannels {
        rt: Vec::with_capacity(n),
        ri: Vec::with_capacity(n),
        it: Vec::with_capacity(n),
    };
    for k in 0..n {
        let mut rt = C64::zero();
        let mut ri = vec![C64::zero(); m];
        let mut it = vec![C64::zero(); m];
        for t in 0..taps.n_taps() {
            let w = twiddle[(k * t) % n];
            rt += taps.rt[t] * w;
            for e in 0..m {
                ri[e] += taps.ri[t][e] * w;
                it[e] += taps.it[t][e] * w;
            }
        }
        out.rt.push(rt);
        out.ri.push(ri);
        out.it.push(it);
    }
    Ok(out)
}

/// Admittance-parameter channel of one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceChannel {
    pub freq_hz: f64,
    pub y_rt: C64,
    pub y_ri: Vec<C64>,
    pub y_it: Vec<C64>,
}

/// Scattering-to-admittance channel conversion for one subcarrier:
/// `y_RI = -2 Y0 h_RI`, `y_IT = -2 Y0 h_IT`, `y_RT = -2 Y0 (h_RT - h_RI h_IT)`.
pub fn to_admittance_params(h_rt: C64, h_ri: &[C64], h_it: &[C64], y0: f64, freq_hz: f64) -> Result<AdmittanceChannel> {
    if h_ri.len() != h_it.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "RI row of {} vs IT column of {}",
            h_ri.len(),
            h_it.len()
        )));
    }
    let k = -2.0 * y0;
    let through: C64 = h_ri.iter().zip(h_it).map(|(a, b)| a * b).sum();
    Ok(AdmittanceChannel {
        freq_hz,
        y_rt: (h_rt - through) * k,
        y_ri: h_ri.iter().map(|v| v * k).collect(),
        y_it: h_it.iter().map(|v| v * k).collect(),
    })
}

/// Admittance-parameter channels over all subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceChannelSet {
    pub y0: f64,
    pub entries: Vec<AdmittanceChannel>,
}

impl AdmittanceChannelSet {
    /// Converts every subcarrier of `h`; `freqs` must be strictly increasing.
    pub fn from_scattering(h: &FrequencyChannels, freqs: &[f64], y0: f64) -> Result<Self> {
        if freqs.len() != h.subcarriers() || h.ri.len() != freqs.len() || h.it.len() != freqs.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} frequencies for {} subcarriers",
                freqs.len(),
                h.subcarriers()
            )));
        }
        let entries = freqs
            .iter()
            .enumerate()
            .map(|(n, &f)| to_admittance_params(h.rt[n], &h.ri[n], &h.it[n], y0, f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(y0, entries)
    }

    pub fn new(y0: f64, entries: Vec<AdmittanceChannel>) -> Result<Self> {
        if !(y0 > 0.0) {
            return Err(Error::NonPositiveInput("Y0"));
        }
        let m = entries.first().map_or(0, |e| e.y_ri.len());
        if entries.iter().any(|e| e.y_ri.len() != m || e.y_it.len() != m) {
            return Err(Error::ShapeMismatch(
                "inconsistent element counts across subcarriers".into(),
            ));
        }
        if entries.windows(2).any(|w| !(w[1].freq_hz > w[0].freq_hz)) {
            return Err(Error::InvalidParameter(
                "subcarrier frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { y0, entries })
    }

    pub fn subcarriers(&self) -> usize {
        self.entries.len()
    }

    pub fn elements(&self) -> usize {
        self.entries.first().map_or(0, |e| e.y_ri.len())
    }

    pub fn freqs(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.freq_hz)
    }

    /// Fails with [`Error::BandMismatch`] if a subcarrier lies outside `band`.
    pub fn check_band(&self, band: Band) -> Result<()> {
        check_in_band(self.freqs(), band)
    }
}

fn check_in_band(freqs: impl IntoIterator<Item = f64>, band: Band) -> Result<()> {
    match freqs.into_iter().find(|&f| !band.contains(f)) {
        Some(f) => Err(Error::BandMismatch {
            f_hz: f,
            lo_hz: band.lo,
            hi_hz: band.hi,
        }),
        None => Ok(()),
    }
}

/// `h_n = (-y_RT + y_RI (Ybar + Y0 I)^-1 y_IT) / (2 Y0)`, evaluated group by group.
pub fn cascaded_channel(entry: &AdmittanceChannel, y_bar: &AdmittanceMatrix, y0: f64) -> Result<C64> {
    if y_bar.elements() != entry.y_ri.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{}-port admittance for a {}-element channel",
            y_bar.elements(),
            entry.y_ri.len()
        )));
    }
    let n = y_bar.group_size();
    let mut lu = Lu::with_order(n);
    let mut a = vec![C64::zero(); n * n];
    let mut v = vec![C64::zero(); n];
    let mut acc = -entry.y_rt;
    for (g, block) in y_bar.blocks().iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                a[r * n + c] = C64::new(if r == c { y0 } else { 0.0 }, block[(r, c)]);
            }
        }
        lu.factor_into(&a)?;
        let ports = g * n..(g + 1) * n;
        v.copy_from_slice(&entry.y_it[ports.clone()]);
        lu.solve_in_place(&mut v);
        acc += entry.y_ri[ports].iter().zip(&v).map(|(r, x)| r * x).sum::<C64>();
    }
    Ok(acc / (2.0 * y0))
}

/// Same quantity as [`cascaded_channel`] from a dense admittance matrix.
pub fn cascaded_channel_dense(entry: &AdmittanceChannel, y_bar: &CMatrix, y0: f64) -> Result<C64> {
    let lu = Lu::factor(&y_bar.add_scaled_identity(C64::new(y0, 0.0)))?;
    let v = lu.solve(&entry.y_it);
    let through: C64 = entry.y_ri.iter().zip(&v).map(|(r, x)| r * x).sum();
    Ok((through - entry.y_rt) / (2.0 * y0))
}

/// Scattering-model channel `h_RT + h_RI Theta h_IT`.
pub fn scattering_channel(h_rt: C64, h_ri: &[C64], theta: &CMatrix, h_it: &[C64]) -> C64 {
    let t = theta.mul_vec(h_it);
    h_rt + h_ri.iter().zip(&t).map(|(a, b)| a * b).sum::<C64>()
}

/// Subcarrier grid `f_n = f_c + (n - (N-1)/2) * bandwidth / N`, `n = 0..N`,
/// checked against the susceptance model band.
pub fn subcarrier_frequencies(f_c: f64, bandwidth: f64, n: usize, band: Band) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one subcarrier".into()));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::NonPositiveInput("bandwidth"));
    }
    let spacing = bandwidth / n as f64;
    let mid = (n as f64 - 1.0) / 2.0;
    let freqs: Vec<f64> = (0..n).map(|k| f_c + (k as f64 - mid) * spacing).collect();
    check_in_band(freqs.iter().copied(), band)?;
    Ok(freqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{fit_linear_model, CircuitParams, LinearSusceptanceModel};
    use crate::topology::{assemble_admittance, scattering_from_admittance, GroupTopology, SusceptanceAssignment};
    use approx::assert_relative_eq;

    fn band() -> Band {
        Band::new(2.25e9, 2.55e9).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model() -> LinearSusceptanceModel {
        fit_linear_model(&CircuitParams::reference_varactor(), 2.25e9, 2.55e9, 31, 57).unwrap()
    }

    #[test]
    fn taps_are_deterministic() {
        let pl = PathlossConfig::reference();
        assert_eq!(
            generate_taps(42, 8, 16, &pl).unwrap(),
            generate_taps(42, 8, 16, &pl).unwrap()
        );
        assert_ne!(
            generate_taps(42, 8, 16, &pl).unwrap(),
            generate_taps(43, 8, 16, &pl).unwrap()
        );
    }

    #[test]
    fn zero_reference_gain_gives_zero_taps() {
        let pl = PathlossConfig {
            zeta0: 0.0,
            ..PathlossConfig::reference()
        };
        let taps = generate_taps(1, 4, 16, &pl).unwrap();
        assert_eq!(taps, TapChannels::zeros(4, 16));
    }

    #[test]
    fn tap_power_matches_pathloss() {
        let pl = PathlossConfig::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 100_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let taps = generate_taps_with(&mut rng, 1, 16, &pl).unwrap();
            total += taps.rt.iter().map(|t| t.norm_sqr()).sum::<f64>();
        }
        let mean = total / trials as f64;
        assert_relative_eq!(mean, pl.gain(Link::Rt), max_relative = 0.02);
    }

    #[test]
    fn frequency_response_of_single_taps() {
        let mut taps = TapChannels::zeros(1, 2);
        taps.rt[0] = c(0.5, -0.25);
        let h = taps_to_frequency(&taps, 8).unwrap();
        assert!(h.rt.iter().all(|v| (v - c(0.5, -0.25)).norm() < 1e-15));

        let mut taps = TapChannels::zeros(1, 2);
        let v = c(1.5, 0.5);
        taps.rt[1] = v;
        taps.ri[1][0] = v;
        let h = taps_to_frequency(&taps, 4).unwrap();
        let want = [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)];
        for k in 0..4 {
            assert!((h.rt[k] - v * want[k]).norm() < 1e-14);
            assert!((h.ri[k][0] - v * want[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn frequency_response_satisfies_parseval() {
        let taps = generate_taps(5, 3, 16, &PathlossConfig::reference()).unwrap();
        let h = taps_to_frequency(&taps, 64).unwrap();
        let time: f64 = taps.rt.iter().map(|t| t.norm_sqr()).sum();
        let freq: f64 = h.rt.iter().map(|t| t.norm_sqr()).sum();
        assert_relative_eq!(freq, 64.0 * time, max_relative = 1e-9);
        for e in 0..3 {
            let time: f64 = taps.it.iter().map(|t| t[e].norm_sqr()).sum();
            let freq: f64 = h.it.iter().map(|t| t[e].norm_sqr()).sum();
            assert_relative_eq!(freq, 64.0 * time, max_relative = 1e-9);
        }
        assert!(taps_to_frequency(&taps, 8).is_err());
    }

    #[test]
    fn admittance_conversion_examples() {
        let y0 = DEFAULT_Y0;
        let a = to_admittance_params(c(0.3, -0.1), &[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2], y0, 2.4e9).unwrap();
        assert_eq!(a.y_rt, c(0.3, -0.1) * (-2.0 * y0));
        assert!(a.y_ri.iter().chain(&a.y_it).all(|v| v.is_zero()));

        let a = to_admittance_params(c(0.0, 0.0), &[c(1.0, 0.0)], &[c(1.0, 0.0)], y0, 2.4e9).unwrap();
        assert_relative_eq!(a.y_rt.re, 2.0 * y0);
        assert_relative_eq!(a.y_ri[0].re, -2.0 * y0);
        assert_relative_eq!(a.y_it[0].re, -2.0 * y0);
    }

    #[test]
    fn zero_admittance_recovers_identity_scattering_channel() {
        let taps = generate_taps(8, 4, 4, &PathlossConfig::reference()).unwrap();
        let h = taps_to_frequency(&taps, 8).unwrap();
        let y_bar = AdmittanceMatrix::from_blocks(vec![crate::linalg::RMatrix::zeros(2, 2); 2]).unwrap();
        for n in 0..8 {
            let entry = to_admittance_params(h.rt[n], &h.ri[n], &h.it[n], DEFAULT_Y0, 2.4e9).unwrap();
            let got = cascaded_channel(&entry, &y_bar, DEFAULT_Y0).unwrap();
            let want = h.rt[n] + h.ri[n].iter().zip(&h.it[n]).map(|(a, b)| a * b).sum::<C64>();
            assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn admittance_and_scattering_channels_agree() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for &(elements, size) in &[(1, 1), (4, 2), (6, 6), (12, 3), (12, 4)] {
            let t = GroupTopology::with_group_size(elements, size).unwrap();
            for _ in 0..10 {
                let h_rt = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let h_ri: Vec<C64> = (0..elements)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let h_it: Vec<C64> = (0..elements)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let values = (0..t.groups())
                    .map(|_| {
                        (0..t.packed_len())
                            .map(|_| rng.random_range(m.b_min..m.b_max))
                            .collect()
                    })
                    .collect();
                let a = SusceptanceAssignment::new(size, values).unwrap();
                let f = rng.random_range(m.band.lo..m.band.hi);
                let y = assemble_admittance(&t, &a, &m, f).unwrap();
                let entry = to_admittance_params(h_rt, &h_ri, &h_it, DEFAULT_Y0, f).unwrap();
                let got = cascaded_channel(&entry, &y, DEFAULT_Y0).unwrap();
                let theta = scattering_from_admittance(&y, DEFAULT_Y0).unwrap();
                let want = scattering_channel(h_rt, &h_ri, &theta, &h_it);
                assert!((got - want).norm() <= 1e-10 * (1.0 + got.norm()));
                let dense = cascaded_channel_dense(&entry, &y.to_dense(), DEFAULT_Y0).unwrap();
                assert!((got - dense).norm() <= 1e-12 * (1.0 + got.norm()));
            }
        }
    }

    #[test]
    fn single_element_ris_path_is_a_pure_phase() {
        let y0 = DEFAULT_Y0;
        let (h_rt, h_ri, h_it) = (c(0.1, 0.2), c(0.7, -0.3), c(-0.4, 0.9));
        let entry = to_admittance_params(h_rt, &[h_ri], &[h_it], y0, 2.4e9).unwrap();
        for b in [-0.03, -0.01, 0.0, 0.02, 0.05] {
            let y = AdmittanceMatrix::from_blocks(vec![crate::linalg::RMatrix::from_fn(1, 1, |_, _| b)]).unwrap();
            let h = cascaded_channel(&entry, &y, y0).unwrap();
            let reflect = c(y0, -b) / c(y0, b);
            assert!((h - (h_rt + h_ri * reflect * h_it)).norm() < 1e-14);
            assert_relative_eq!((h - h_rt).norm(), (h_ri * h_it).norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_channel_gives_zero() {
        let entry = AdmittanceChannel {
            freq_hz: 2.4e9,
            y_rt: C64::zero(),
            y_ri: vec![C64::zero(); 4],
            y_it: vec![C64::zero(); 4],
        };
        let y = AdmittanceMatrix::from_blocks(vec![crate::linalg::RMatrix::from_fn(2, 2, |_, _| 0.01); 2]).unwrap();
        assert_eq!(cascaded_channel(&entry, &y, DEFAULT_Y0).unwrap(), C64::zero());
    }

    #[test]
    fn subcarrier_grid() {
        assert_eq!(subcarrier_frequencies(2.4e9, 300e6, 1, band()).unwrap(), vec![2.4e9]);
        let two = subcarrier_frequencies(2.4e9, 300e6, 2, band()).unwrap();
        assert_relative_eq!(two[0], 2.4e9 - 75e6);
        assert_relative_eq!(two[1], 2.4e9 + 75e6);
        let grid = subcarrier_frequencies(2.4e9, 300e6, 64, band()).unwrap();
        assert_relative_eq!(grid[0], 2.252_343_75e9);
        assert_relative_eq!(grid[63], 2.547_656_25e9);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(matches!(
            subcarrier_frequencies(2.4e9, 400e6, 64, band()),
            Err(Error::BandMismatch { .. })
        ));
    }
}
