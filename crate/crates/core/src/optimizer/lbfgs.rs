//! Limited-memory BFGS minimizer with a strong-Wolfe line search.
//!
//! The line search is the bracketing/zoom scheme of Nocedal & Wright
//! (Algorithms 3.5 and 3.6) with safeguarded cubic interpolation. Every accepted
//! step satisfies the sufficient-decrease condition, so the objective trace is
//! monotone.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    /// Number of stored correction pairs.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop when `||g||_inf < grad_tol * max(1, |f|)`.
    pub grad_tol: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evals: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 500,
            grad_tol: 1e-8,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    /// No step satisfying the Wolfe conditions was found, even along steepest descent.
    LineSearchFailed,
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<IterateRecord>,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f`, which returns the value and writes the gradient into its
/// second argument. Fails with [`Error::NonFinite`] if the start point does not
/// evaluate to finite values.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> Result<LbfgsReport>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut value = f(&x, &mut g);
    let mut evaluations = 1;
    if !value.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut trace = vec![IterateRecord {
        iteration: 0,
        value,
        grad_norm: inf_norm(&g),
    }];
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(opts.memory);
    let mut dir = vec![0.0; n];
    let mut alpha_buf = vec![0.0; opts.memory.max(1)];
    let mut ls = LineSearch::new(n);
    let mut iterations = 0;

    let termination = loop {
        if inf_norm(&g) < opts.grad_tol * value.abs().max(1.0) {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iters {
            break Termination::MaxIterations;
        }

        two_loop(&history, &g, &mut dir, &mut alpha_buf);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            history.clear();
            steepest(&g, &mut dir);
            slope = dot(&g, &dir);
        }
        // Without curvature information, cap the first trial step to unit length.
        let initial = if history.is_empty() {
            (1.0 / inf_norm(&dir)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = ls.search(&mut f, &x, value, &g, &dir, slope, initial, opts, &mut evaluations);
        if accepted.is_none() && !history.is_empty() {
            history.clear();
            steepest(&g, &mut dir);
            slope = dot(&g, &dir);
            let initial = (1.0 / inf_norm(&dir)).min(1.0);
            accepted = ls.search(&mut f, &x, value, &g, &dir, slope, initial, opts, &mut evaluations);
        }
        let Some(new_value) = accepted else {
            break Termination::LineSearchFailed;
        };

        let s: Vec<f64> = ls.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = ls.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * Float::sqrt(dot(&y, &y) * dot(&s, &s)) && opts.memory > 0 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        x.copy_from_slice(&ls.x);
        g.copy_from_slice(&ls.g);
        value = new_value;
        iterations += 1;
        trace.push(IterateRecord {
            iteration: iterations,
            value,
            grad_norm: inf_norm(&g),
        });
    };

    Ok(LbfgsReport {
        grad_norm: inf_norm(&g),
        x,
        value,
        iterations,
        evaluations,
        termination,
        trace,
    })
}

fn steepest(g: &[f64], dir: &mut [f64]) {
    for (d, gi) in dir.iter_mut().zip(g) {
        *d = -gi;
    }
}

/// `dir = -H g` with the usual `s'y / y'y` initial scaling.
fn two_loop(history: &VecDeque<Pair>, g: &[f64], dir: &mut [f64], alpha: &mut [f64]) {
    dir.copy_from_slice(g);
    for (k, pair) in history.iter().enumerate().rev() {
        let a = pair.rho * dot(&pair.s, dir);
        alpha[k] = a;
        for (d, yi) in dir.iter_mut().zip(&pair.y) {
            *d -= a * yi;
        }
    }
    if let Some(last) = history.back() {
        let gamma = 1.0 / (last.rho * dot(&last.y, &last.y));
        dir.iter_mut().for_each(|d| *d *= gamma);
    }
    for (k, pair) in history.iter().enumerate() {
        let b = pair.rho * dot(&pair.y, dir);
        for (d, si) in dir.iter_mut().zip(&pair.s) {
            *d += (alpha[k] - b) * si;
        }
    }
    dir.iter_mut().for_each(|d| *d = -*d);
}

/// Line-search state; `x` and `g` hold the accepted point after a successful search.
struct LineSearch {
    x: Vec<f64>,
    g: Vec<f64>,
    trial_x: Vec<f64>,
    trial_g: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Probe {
    step: f64,
    value: f64,
    slope: f64,
}

impl LineSearch {
    fn new(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            g: vec![0.0; n],
            trial_x: vec![0.0; n],
            trial_g: vec![0.0; n],
        }
    }

    fn probe<F>(&mut self, f: &mut F, x: &[f64], dir: &[f64], step: f64, evals: &mut usize) -> Probe
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        for ((t, xi), di) in self.trial_x.iter_mut().zip(x).zip(dir) {
            *t = xi + step * di;
        }
        let value = f(&self.trial_x, &mut self.trial_g);
        *evals += 1;
        let finite = value.is_finite() && self.trial_g.iter().all(|v| v.is_finite());
        Probe {
            step,
            value: if finite { value } else { f64::INFINITY },
            slope: if finite { dot(&self.trial_g, dir) } else { f64::NAN },
        }
    }

    fn accept(&mut self) {
        self.x.copy_from_slice(&self.trial_x);
        self.g.copy_from_slice(&self.trial_g);
    }

    /// Returns the accepted value, or `None` if no Wolfe point was found.
    #[allow(clippy::too_many_arguments)]
    fn search<F>(
        &mut self,
        f: &mut F,
        x: &[f64],
        f0: f64,
        _g0: &[f64],
        dir: &[f64],
        slope0: f64,
        initial: f64,
        opts: &LbfgsOptions,
        evals: &mut usize,
    ) -> Option<f64>
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        let origin = Probe {
            step: 0.0,
            value: f0,
            slope: slope0,
        };
        let mut prev = origin;
        let mut step = initial;
        let mut budget = opts.max_line_search_evals;
        let armijo = |p: &Probe| p.value <= f0 + opts.c1 * p.step * slope0;

        for i in 0.. {
            if budget == 0 {
                return None;
            }
            budget -= 1;
            let cur = self.probe(f, x, dir, step, evals);
            if !cur.value.is_finite() {
                // Overshot into a region the objective cannot evaluate: shrink.
                step = 0.5 * (prev.step + step);
                continue;
            }
            if !armijo(&cur) || (i > 0 && cur.value >= prev.value) {
                return self.zoom(f, x, f0, dir, slope0, prev, cur, opts, budget, evals);
            }
            if cur.slope.abs() <= -opts.c2 * slope0 {
                self.accept();
                return Some(cur.value);
            }
            if cur.slope >= 0.0 {
                return self.zoom(f, x, f0, dir, slope0, cur, prev, opts, budget, evals);
            }
            prev = cur;
            step *= 2.0;
        }
        unreachable!()
    }

    /// Zoom between `lo` (satisfies sufficient decrease, lowest value so far) and `hi`.
    #[allow(clippy::too_many_arguments)]
    fn zoom<F>(
        &mut self,
        f: &mut F,
        x: &[f64],
        f0: f64,
        dir: &[f64],
        slope0: f64,
        mut lo: Probe,
        mut hi: Probe,
        opts: &LbfgsOptions,
        mut budget: usize,
        evals: &mut usize,
    ) -> Option<f64>
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        // Best Armijo point seen, kept as a fallback when the budget runs out.
        let mut fallback: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        while budget > 0 {
            budget -= 1;
            let (a, b) = if lo.step < hi.step {
                (lo.step, hi.step)
            } else {
                (hi.step, lo.step)
            };
            let width = b - a;
            if width <= f64::EPSILON * b.abs().max(1e-300) {
                break;
            }
            let mut step = cubic_minimizer(lo, hi).unwrap_or(0.5 * (lo.step + hi.step));
            // Keep the trial well inside the bracket.
            let margin = 0.1 * width;
            if !(step > a + margin && step < b - margin) {
                step = 0.5 * (a + b);
            }
            let cur = self.probe(f, x, dir, step, evals);
            let sufficient = cur.value <= f0 + opts.c1 * cur.step * slope0;
            if !sufficient || cur.value >= lo.value {
                hi = cur;
                continue;
            }
            if cur.slope.abs() <= -opts.c2 * slope0 {
                self.accept();
                return Some(cur.value);
            }
            if fallback.as_ref().map_or(true, |(v, _, _)| cur.value < *v) {
                fallback = Some((cur.value, self.trial_x.clone(), self.trial_g.clone()));
            }
            if cur.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
        // A sufficient-decrease point without the curvature condition still
        // makes progress; take it rather than stalling.
        fallback.map(|(v, xs, gs)| {
            self.x.copy_from_slice(&xs);
            self.g.copy_from_slice(&gs);
            v
        })
    }
}

/// Minimizer of the cubic interpolating value and slope at both probes.
fn cubic_minimizer(p: Probe, q: Probe) -> Option<f64> {
    if !(p.slope.is_finite() && q.slope.is_finite() && q.value.is_finite()) {
        return None;
    }
    let d1 = p.slope + q.slope - 3.0 * (p.value - q.value) / (p.step - q.step);
    let disc = d1 * d1 - p.slope * q.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = Float::signum(q.step - p.step) * Float::sqrt(disc);
    let denom = q.slope - p.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let step = q.step - (q.step - p.step) * (q.slope + d2 - d1) / denom;
    step.is_finite().then_some(step)
}
