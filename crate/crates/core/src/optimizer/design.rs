use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::lbfgs::{self, LbfgsOptions};
use super::objective::{DesignVariables, GainProblem};
use super::power::{average_rate, water_filling};
use crate::channel::AdmittanceChannelSet;
use crate::circuit::LinearSusceptanceModel;
use crate::topology::{GroupTopology, SusceptanceAssignment};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Random starts, in addition to the zero start and any caller-supplied starts.
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the gradient infinity-norm of the normalized problem drops below
    /// `grad_tol * max(1, |objective|)`.
    pub grad_tol: f64,
    pub memory: usize,
    pub seed: u64,
    /// Include the deterministic start `x = 0`, i.e. every susceptance at `B_+`.
    pub zero_start: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 500,
            grad_tol: 1e-8,
            memory: 10,
            seed: 0,
            zero_start: true,
        }
    }
}

/// One accepted iterate of one restart. `grad_norm` is measured in the
/// normalized problem the minimizer actually sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub restart: usize,
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BdrisSolution {
    pub assignment: SusceptanceAssignment,
    pub x: DesignVariables,
    /// Sum gain `sum_n |2 Y0 h_n|^2` under the model the design was optimized for.
    pub objective: f64,
    /// Index of the restart that produced the solution.
    pub best_restart: usize,
    pub trace: Vec<TracePoint>,
}

/// Transmit power and noise power, both in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub total_power_w: f64,
    pub noise_w: f64,
}

impl LinkBudget {
    pub fn new(total_power_w: f64, noise_w: f64) -> Result<Self> {
        if !(total_power_w > 0.0 && total_power_w.is_finite()) {
            return Err(Error::NonPositiveInput("total power"));
        }
        if !(noise_w > 0.0 && noise_w.is_finite()) {
            return Err(Error::NonPositiveInput("noise power"));
        }
        Ok(Self { total_power_w, noise_w })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub assignment: SusceptanceAssignment,
    /// Effective channel per subcarrier under the true wideband model.
    pub channel: Vec<C64>,
    /// Water-filled power per subcarrier, in watts.
    pub power: Vec<f64>,
    /// Average rate in bits/s/Hz.
    pub rate: f64,
    /// Sum gain under the true wideband model.
    pub objective: f64,
    pub trace: Vec<TracePoint>,
}

/// Maximizes the sum gain from the zero start and `opts.restarts` Gaussian starts.
pub fn optimize_bdris(
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
    opts: &OptimizerOptions,
) -> Result<BdrisSolution> {
    optimize_bdris_with_starts(channels, topology, model, opts, &[])
}

/// As [`optimize_bdris`], with `starts` run first. Restart ids follow the run
/// order: caller starts, then the zero start, then the random starts.
pub fn optimize_bdris_with_starts(
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
    opts: &OptimizerOptions,
    starts: &[DesignVariables],
) -> Result<BdrisSolution> {
    if opts.restarts == 0 && !opts.zero_start && starts.is_empty() {
        return Err(Error::InvalidParameter("no start points".into()));
    }
    if !(opts.grad_tol >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "gradient tolerance {}",
            opts.grad_tol
        )));
    }
    let problem = GainProblem::new(channels, topology, model)?;
    let dim = problem.dim();
    let b_minus = problem.squash().b_minus;
    for s in starts {
        if s.as_slice().len() != dim {
            return Err(Error::ShapeMismatch(alloc::format!(
                "start with {} variables for {} parameters",
                s.as_slice().len(),
                dim
            )));
        }
    }

    // Work in z = x / B_- against objective / bound, so the tolerance is
    // meaningful regardless of the channel scale.
    let bound = problem.objective_bound();
    let scale = if bound > 0.0 && bound.is_finite() { bound } else { 1.0 };

    let mut initial: Vec<Vec<f64>> = starts
        .iter()
        .map(|s| s.as_slice().iter().map(|v| v / b_minus).collect())
        .collect();
    if opts.zero_start {
        initial.push(alloc::vec![0.0; dim]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        initial.push((0..dim).map(|_| StandardNormal.sample(&mut rng)).collect());
    }

    let lbfgs_opts = LbfgsOptions {
        memory: opts.memory,
        max_iters: opts.max_iters,
        grad_tol: opts.grad_tol,
        ..LbfgsOptions::default()
    };
    let mut x_buf = alloc::vec![0.0; dim];
    let mut g_buf = alloc::vec![0.0; dim];
    let mut trace = Vec::new();
    let mut best: Option<(usize, f64, Vec<f64>)> = None;

    for (restart, z0) in initial.iter().enumerate() {
        let eval = |z: &[f64], grad: &mut [f64]| {
            for (x, zi) in x_buf.iter_mut().zip(z) {
                *x = zi * b_minus;
            }
            let value = problem.objective_and_gradient(&x_buf, &mut g_buf);
            for (g, gx) in grad.iter_mut().zip(&g_buf) {
                *g = -gx * b_minus / scale;
            }
            -value / scale
        };
        let report = match lbfgs::minimize(eval, z0, &lbfgs_opts) {
            Ok(r) => r,
            Err(Error::NonFinite) => continue,
            Err(e) => return Err(e),
        };
        trace.extend(report.trace.iter().map(|r| TracePoint {
            restart,
            iteration: r.iteration,
            objective: -r.value * scale,
            grad_norm: r.grad_norm,
        }));
        let objective = -report.value * scale;
        if best.as_ref().map_or(true, |(_, v, _)| objective > *v) {
            best = Some((restart, objective, report.x));
        }
    }

    let (best_restart, _, z) = best.ok_or(Error::NonFinite)?;
    let x = DesignVariables::new(topology, z.iter().map(|v| v * b_minus).collect())?;
    let assignment = x.to_assignment(problem.squash());
    let objective = problem.objective(x.as_slice());
    Ok(BdrisSolution {
        assignment,
        x,
        objective,
        best_restart,
        trace,
    })
}

/// Channels, water-filled power and rate of `assignment` under `model`.
pub fn evaluate_design(
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
    assignment: &SusceptanceAssignment,
    budget: &LinkBudget,
) -> Result<DesignResult> {
    assignment.validate(topology, model)?;
    let problem = GainProblem::new(channels, topology, model)?;
    let b_c: Vec<f64> = assignment.iter_groups().flatten().copied().collect();
    let channel = problem.channel_response(&b_c);
    let gains: Vec<f64> = channel.iter().map(|h| h.norm_sqr() / budget.noise_w).collect();
    let power = water_filling(&gains, budget.total_power_w)?.power;
    let rate = average_rate(&channel, &power, budget.noise_w);
    Ok(DesignResult {
        assignment: assignment.clone(),
        objective: problem.objective_at_susceptance(&b_c),
        channel,
        power,
        rate,
        trace: Vec::new(),
    })
}

/// Design that accounts for the frequency dependence of the susceptances.
pub fn wideband_design(
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
    opts: &OptimizerOptions,
    budget: &LinkBudget,
) -> Result<DesignResult> {
    let solution = optimize_bdris(channels, topology, model, opts)?;
    let mut result = evaluate_design(channels, topology, model, &solution.assignment, budget)?;
    result.trace = solution.trace;
    Ok(result)
}

/// Design that assumes every subcarrier sees the center-frequency susceptances,
/// evaluated under the true `model`.
pub fn baseline_flat_design(
    channels: &AdmittanceChannelSet,
    topology: &GroupTopology,
    model: &LinearSusceptanceModel,
    opts: &OptimizerOptions,
    budget: &LinkBudget,
) -> Result<DesignResult> {
    let flat = LinearSusceptanceModel::flat(model.b_min, model.b_max, model.f_c, model.band)?;
    let solution = optimize_bdris(channels, topology, &flat, opts)?;
    let mut result = evaluate_design(channels, topology, model, &solution.assignment, budget)?;
    result.trace = solution.trace;
    Ok(result)
}
