use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, Zero};

use super::squash::SquashParams;
use crate::channel::AdmittanceChannelSet;
use crate::circuit::LinearSusceptanceModel;
use crate::linalg::Lu;
use crate::topology::{packed_index, write_port_block, GroupTopology, SusceptanceAssignment};
use crate::{Error, Result, C64};

/// Unconstrained design variables, one packed vector per group, stored back to back.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignVariables {
    packed_len: usize,
    values: Vec<f64>,
}

impl DesignVariables {
    pub fn new(topology: &GroupTopology, values: Vec<f64>) -> Result<Self> {
        if values.len() != topology.parameter_count() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} design variables for {} parameters",
                values.len(),
                topology.parameter_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            packed_len: topology.packed_len(),
            values,
        })
    }

    pub fn zeros(topology: &GroupTopology) -> Self {
        Self {
            packed_len: topology.packed_len(),
            values: vec![0.0; topology.parameter_count()],
        }
    }

    /// Variables that squash onto `assignment` (entries must lie strictly inside the range).
    pub fn from_assignment(assignment: &SusceptanceAssignment, squash: &SquashParams) -> Result<Self> {
        let values = assignment
            .iter_groups()
            .flatten()
            .map(|&b| squash.unsquash(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            packed_len: crate::topology::packed_len(assignment.group_size()),
            values,
        })
    }

    pub fn group(&self, g: usize) -> &[f64] {
        &self.values[g * self.packed_len..(g + 1) * self.packed_len]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_assignment(&self, squash: &SquashParams) -> SusceptanceAssignment {
        let m_bar = group_size_of(self.packed_len);
        let groups = self
            .values
            .chunks(self.packed_len.max(1))
            .map(|chunk| chunk.iter().map(|&x| squash.squash(x)).collect())
            .collect();
        SusceptanceAssignment::new(m_bar, groups).expect("packed length matches group size")
    }
}

fn group_size_of(packed_len: usize) -> usize {
    let mut m = 0;
    while m * (m + 1) / 2 < packed_len {
        m += 1;
    }
    m
}

/// Sum-gain design problem over a channel set, with the wideband model folded
/// into per-subcarrier scalings `F1(f_n)` and offsets `F2(f_n)`.
#[derive(Debug, Clone)]
pub struct GainProblem<'a> {
    channels: &'a AdmittanceChannelSet,
    topology: &'a GroupTopology,
    squash: SquashParams,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

/// Per-call scratch for one group solve.
struct Scratch {
    lu: Lu,
    a: Vec<C64>,
    b_at_f: Vec<f64>,
}

impl<'a> GainProblem<'a> {
    pub fn new(
        channels: &'a AdmittanceChannelSet,
        topology: &'a GroupTopology,
        model: &LinearSusceptanceModel,
    ) -> Result<Self> {
        if channels.elements() != topology.elements() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}-element channels for a {}-element surface",
                channels.elements(),
                topology.elements()
            )));
        }
        channels.check_band(model.band)?;
        Ok(Self {
            channels,
            topology,
            squash: SquashParams::from_range(model.b_min, model.b_max)?,
            f1: channels.freqs().map(|f| model.f1(f)).collect(),
            f2: channels.freqs().map(|f| model.f2(f)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.topology.parameter_count()
    }

    pub fn squash(&self) -> &SquashParams {
        &self.squash
    }

    pub fn topology(&self) -> &GroupTopology {
        self.topology
    }

    pub fn channels(&self) -> &AdmittanceChannelSet {
        self.channels
    }

    /// Upper bound on the objective: `sum_n (|y_RT| + sum_g |y_RI,g| |y_IT,g| / Y0)^2`.
    ///
    /// `(jB + Y0 I)^-1` has spectral norm at most `1 / Y0` for real symmetric `B`.
    pub fn objective_bound(&self) -> f64 {
        let y0 = self.channels.y0;
        self.channels
            .entries
            .iter()
            .map(|e| {
                let mut s = e.y_rt.norm();
                for g in 0..self.topology.groups() {
                    let ports = self.topology.group_ports(g);
                    let ri: f64 = e.y_ri[ports.clone()].iter().map(|v| v.norm_sqr()).sum();
                    let it: f64 = e.y_it[ports].iter().map(|v| v.norm_sqr()).sum();
                    s += Float::sqrt(ri * it) / y0;
                }
                s * s
            })
            .sum()
    }

    /// Objective `sum_n |s_n|^2` at center susceptances `b_c` (packed, all groups).
    pub fn objective_at_susceptance(&self, b_c: &[f64]) -> f64 {
        self.sums(b_c).iter().map(|s| s.norm_sqr()).sum()
    }

    /// `s_n = -y_RT,n + sum_g y_RI,g,n (j B_g,n + Y0 I)^-1 y_IT,g,n = 2 Y0 h_n`.
    pub fn sums(&self, b_c: &[f64]) -> Vec<C64> {
        assert_eq!(b_c.len(), self.dim());
        let m_bar = self.topology.group_size();
        let mut scratch = self.scratch();
        let mut v = vec![C64::zero(); m_bar];
        (0..self.channels.subcarriers())
            .map(|n| {
                let e = &self.channels.entries[n];
                let mut s = -e.y_rt;
                for g in 0..self.topology.groups() {
                    self.factor_group(n, g, b_c, &mut scratch);
                    let ports = self.topology.group_ports(g);
                    v.copy_from_slice(&e.y_it[ports.clone()]);
                    scratch.lu.solve_in_place(&mut v);
                    s += e.y_ri[ports].iter().zip(&v).map(|(r, x)| r * x).sum::<C64>();
                }
                s
            })
            .collect()
    }

    /// Effective channels `h_n` at center susceptances `b_c`.
    pub fn channel_response(&self, b_c: &[f64]) -> Vec<C64> {
        let k = 1.0 / (2.0 * self.channels.y0);
        self.sums(b_c).into_iter().map(|s| s * k).collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let b_c: Vec<f64> = x.iter().map(|&v| self.squash.squash(v)).collect();
        self.objective_at_susceptance(&b_c)
    }

    /// Objective and its exact gradient with respect to `x`.
    pub fn objective_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        assert_eq!(grad.len(), self.dim());
        let m_bar = self.topology.group_size();
        let groups = self.topology.groups();
        let plen = self.topology.packed_len();
        let b_c: Vec<f64> = x.iter().map(|&v| self.squash.squash(v)).collect();
        grad.iter_mut().for_each(|g| *g = 0.0);

        let mut scratch = self.scratch();
        // v = A^-1 y_IT,g and w = A^-1 y_RI,g^T for every group (A is complex symmetric).
        let mut v = vec![C64::zero(); groups * m_bar];
        let mut w = vec![C64::zero(); groups * m_bar];
        let mut total = 0.0;
        for (n, e) in self.channels.entries.iter().enumerate() {
            let mut s = -e.y_rt;
            for g in 0..groups {
                self.factor_group(n, g, &b_c, &mut scratch);
                let ports = self.topology.group_ports(g);
                let vg = &mut v[g * m_bar..(g + 1) * m_bar];
                vg.copy_from_slice(&e.y_it[ports.clone()]);
                scratch.lu.solve_in_place(vg);
                let wg = &mut w[g * m_bar..(g + 1) * m_bar];
                wg.copy_from_slice(&e.y_ri[ports.clone()]);
                scratch.lu.solve_in_place(wg);
                s += e.y_ri[ports].iter().zip(vg.iter()).map(|(r, x)| r * x).sum::<C64>();
            }
            total += s.norm_sqr();

            // d s / d b_l = -j F1(f_n) w^T E_l v, where E_l is the port-block pattern
            // of packed entry l; d|s|^2 = 2 Re(conj(s) ds).
            let weight = -C64::i() * (2.0 * self.f1[n]);
            let cs = s.conj() * weight;
            for g in 0..groups {
                let vg = &v[g * m_bar..(g + 1) * m_bar];
                let wg = &w[g * m_bar..(g + 1) * m_bar];
                let gg = &mut grad[g * plen..(g + 1) * plen];
                for c in 0..m_bar {
                    for r in 0..=c {
                        let q = if r == c {
                            wg[r] * vg[r]
                        } else {
                            (wg[r] - wg[c]) * (vg[r] - vg[c])
                        };
                        gg[packed_index(r, c)] += (cs * q).re;
                    }
                }
            }
        }
        for (gi, &xi) in grad.iter_mut().zip(x) {
            *gi *= self.squash.derivative(xi);
        }
        total
    }

    fn scratch(&self) -> Scratch {
        let m_bar = self.topology.group_size();
        Scratch {
            lu: Lu::with_order(m_bar),
            a: vec![C64::zero(); m_bar * m_bar],
            b_at_f: vec![0.0; self.topology.packed_len()],
        }
    }

    /// Factors `Y0 I + j B_g,n` into `scratch.lu`.
    fn factor_group(&self, n: usize, g: usize, b_c: &[f64], scratch: &mut Scratch) {
        let m_bar = self.topology.group_size();
        let plen = self.topology.packed_len();
        let (f1, f2) = (self.f1[n], self.f2[n]);
        for (dst, &b) in scratch.b_at_f.iter_mut().zip(&b_c[g * plen..(g + 1) * plen]) {
            *dst = f1 * b + f2;
        }
        let y0 = self.channels.y0;
        let a = &mut scratch.a;
        write_port_block(m_bar, &scratch.b_at_f, |r, c, b| {
            a[r * m_bar + c] = C64::new(if r == c { y0 } else { 0.0 }, b);
        });
        // Y0 I + jB with real symmetric B has eigenvalues of modulus >= Y0, so
        // the factorization cannot fail for finite input.
        scratch
            .lu
            .factor_into(&scratch.a)
            .expect("Y0 I + jB is nonsingular for real symmetric B");
    }
}

/// Sum channel gain `sum_n |2 Y0 h_n|^2` at design variables `x`.
pub fn gain_objective(
    x: &DesignVariables,
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
) -> Result<f64> {
    let problem = GainProblem::new(channels, topology, model)?;
    check_dim(&problem, x)?;
    Ok(problem.objective(x.as_slice()))
}

/// Exact gradient of [`gain_objective`] with respect to `x`.
pub fn gain_gradient(
    x: &DesignVariables,
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
) -> Result<Vec<f64>> {
    let problem = GainProblem::new(channels, topology, model)?;
    check_dim(&problem, x)?;
    let mut grad = vec![0.0; problem.dim()];
    problem.objective_and_gradient(x.as_slice(), &mut grad);
    Ok(grad)
}

fn check_dim(problem: &GainProblem<'_>, x: &DesignVariables) -> Result<()> {
    if x.as_slice().len() != problem.dim() || x.packed_len != problem.topology.packed_len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} design variables for {} parameters",
            x.as_slice().len(),
            problem.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_taps, subcarrier_frequencies, taps_to_frequency, AdmittanceChannel, PathlossConfig};
    use crate::circuit::{fit_linear_model, CircuitParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> LinearSusceptanceModel {
        fit_linear_model(&CircuitParams::reference_varactor(), 2.25e9, 2.55e9, 31, 57).unwrap()
    }

    fn channels(seed: u64, m: usize, n: usize) -> AdmittanceChannelSet {
        let taps = generate_taps(seed, m, n.min(4), &PathlossConfig::reference()).unwrap();
        let h = taps_to_frequency(&taps, n).unwrap();
        let freqs = subcarrier_frequencies(2.4e9, 300e6, n, model().band).unwrap();
        AdmittanceChannelSet::from_scattering(&h, &freqs, 0.02).unwrap()
    }

    #[test]
    fn zero_channels_give_zero_objective_and_gradient() {
        let m = model();
        let t = GroupTopology::with_group_size(4, 2).unwrap();
        let entries = (0..3)
            .map(|k| AdmittanceChannel {
                freq_hz: 2.3e9 + k as f64 * 1e7,
                y_rt: C64::zero(),
                y_ri: vec![C64::zero(); 4],
                y_it: vec![C64::zero(); 4],
            })
            .collect();
        let ch = AdmittanceChannelSet::new(0.02, entries).unwrap();
        let x = DesignVariables::new(&t, vec![0.01, -0.02, 0.0, 0.03, 0.0, 0.1]).unwrap();
        assert_eq!(gain_objective(&x, &ch, &t, &m).unwrap(), 0.0);
        assert!(gain_gradient(&x, &ch, &t, &m).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn objective_equals_scaled_channel_energy() {
        let m = model();
        let t = GroupTopology::with_group_size(6, 3).unwrap();
        let ch = channels(3, 6, 8);
        let x = DesignVariables::new(&t, (0..12).map(|k| 0.01 * k as f64 - 0.05).collect()).unwrap();
        let problem = GainProblem::new(&ch, &t, &m).unwrap();
        let assignment = x.to_assignment(problem.squash());
        let mut want = 0.0;
        for e in &ch.entries {
            let y = crate::topology::assemble_admittance(&t, &assignment, &m, e.freq_hz).unwrap();
            let h = crate::channel::cascaded_channel(e, &y, ch.y0).unwrap();
            want += (h * (2.0 * ch.y0)).norm_sqr();
        }
        let got = gain_objective(&x, &ch, &t, &m).unwrap();
        assert!((got - want).abs() <= 1e-12 * want);
        assert!(got <= problem.objective_bound());
    }

    #[test]
    fn single_element_objective_has_closed_form() {
        let m = model();
        let t = GroupTopology::with_group_size(1, 1).unwrap();
        let entry = AdmittanceChannel {
            freq_hz: m.f_c,
            y_rt: C64::new(1e-3, 2e-3),
            y_ri: vec![C64::new(-3e-3, 1e-3)],
            y_it: vec![C64::new(2e-3, 2e-3)],
        };
        let ch = AdmittanceChannelSet::new(0.02, vec![entry.clone()]).unwrap();
        let squash = SquashParams::from_range(m.b_min, m.b_max).unwrap();
        for x in [-0.1, -0.01, 0.0, 0.02, 0.3] {
            let b = squash.squash(x);
            let want = (-entry.y_rt + entry.y_ri[0] * entry.y_it[0] / C64::new(0.02, b)).norm_sqr();
            let got = gain_objective(&DesignVariables::new(&t, vec![x]).unwrap(), &ch, &t, &m).unwrap();
            assert!((got - want).abs() <= 1e-13 * want);
        }
    }

    #[test]
    fn group_relabeling_leaves_objective_unchanged() {
        // Swap the two groups' channel entries and their variables.
        let m = model();
        let t = GroupTopology::with_group_size(6, 3).unwrap();
        let ch = channels(21, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(-0.05..0.05)).collect();
        let mut swapped = ch.clone();
        for e in &mut swapped.entries {
            e.y_ri.rotate_left(3);
            e.y_it.rotate_left(3);
        }
        let mut xs = x.clone();
        xs.rotate_left(6);
        let a = gain_objective(&DesignVariables::new(&t, x).unwrap(), &ch, &t, &m).unwrap();
        let b = gain_objective(&DesignVariables::new(&t, xs).unwrap(), &swapped, &t, &m).unwrap();
        assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &(elements, size, n) in &[(2, 1, 3), (4, 2, 4), (6, 3, 2), (6, 6, 5)] {
            let t = GroupTopology::with_group_size(elements, size).unwrap();
            let ch = channels(rng.random(), elements, n);
            let problem = GainProblem::new(&ch, &t, &m).unwrap();
            let bm = problem.squash().b_minus;
            let x: Vec<f64> = (0..t.parameter_count())
                .map(|_| rng.random_range(-1.5..1.5) * bm)
                .collect();
            let mut grad = vec![0.0; x.len()];
            problem.objective_and_gradient(&x, &mut grad);
            let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            for i in 0..x.len() {
                let h = 1e-4 * bm;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (problem.objective(&xp) - problem.objective(&xm)) / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() <= 1e-5 * scale,
                    "param {i}: fd {fd} vs {}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn saturated_variables_have_vanishing_gradient() {
        let m = model();
        let t = GroupTopology::with_group_size(4, 2).unwrap();
        let ch = channels(4, 4, 4);
        let problem = GainProblem::new(&ch, &t, &m).unwrap();
        let bm = problem.squash().b_minus;
        let x = vec![1e6 * bm; t.parameter_count()];
        let mut grad = vec![0.0; x.len()];
        let f = problem.objective_and_gradient(&x, &mut grad);
        let mut reference = vec![0.0; x.len()];
        problem.objective_and_gradient(&vec![0.0; x.len()], &mut reference);
        let ref_scale = reference.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        assert!(f > 0.0);
        assert!(grad.iter().all(|g| g.abs() <= 1e-15 * ref_scale.max(f)));
    }

    #[test]
    fn assignment_round_trip() {
        let m = model();
        let t = GroupTopology::with_group_size(6, 3).unwrap();
        let squash = SquashParams::from_range(m.b_min, m.b_max).unwrap();
        let x = DesignVariables::new(&t, (0..12).map(|k| 0.003 * k as f64 - 0.02).collect()).unwrap();
        let a = x.to_assignment(&squash);
        assert_eq!(a.groups(), 2);
        let back = DesignVariables::from_assignment(&a, &squash).unwrap();
        for (p, q) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
