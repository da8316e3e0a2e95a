//! Successive convex approximation for the relaxed sum-rate problem.
//!
//! Each link rate is written as `ln(signal + y) - ln(y)` with `y` the
//! interference-plus-noise power. The subtracted log is bounded through a
//! slack `mu >= ln y`, convexified by the tangent of `e^mu` at the current
//! point `mu_hat`:
//!
//! ```text
//! lambda <= ln(alpha a + y) - mu,     y <= e^{mu_hat} (mu - mu_hat + 1)
//! ```
//!
//! For fixed association variables the best slacks are
//! `mu* = mu_hat - 1 + y e^{-mu_hat}` and `lambda = ln(alpha a + y) - mu*`,
//! so each slot reduces to a concave program in the association variables
//! alone, solved with a log-barrier Newton method. The next linearization
//! point is `mu*`.

mod barrier;
mod full_form;
mod program;
mod repair;

pub use self::repair::{repair_feasibility, round_binary, round_binary_at, RepairOutcome};

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::barrier::Settings;
use self::program::{SlotLayout, SlotProgram};
use crate::channel::LinkSide;
use crate::error::{Error, Result};
use crate::greedy::greedy_assign;
use crate::sysmodel::{AssociationVars, LinkProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaConfig {
    /// Stop once the subproblem objective changes by at most this fraction.
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Barrier duality-gap tolerance relative to `1 + |objective|`.
    pub inner_tol: f64,
    pub barrier_init: f64,
    pub barrier_decay: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_newton: usize,
    pub round_threshold: f64,
    /// Weight of the previous iterate in the barrier start point.
    pub start_blend: f64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-4,
            max_outer: 50,
            inner_tol: 1e-7,
            barrier_init: 1.0,
            barrier_decay: 0.2,
            armijo: 1e-4,
            backtrack: 0.5,
            max_newton: 100,
            round_threshold: 0.5,
            start_blend: 0.1,
        }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("barrier_init", self.barrier_init),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        let unit = [
            ("barrier_decay", self.barrier_decay),
            ("armijo", self.armijo),
            ("backtrack", self.backtrack),
            ("round_threshold", self.round_threshold),
        ];
        for (name, v) in unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(name, "must lie in (0, 1)"));
            }
        }
        if !(0.0..1.0).contains(&self.start_blend) {
            return Err(Error::config("start_blend", "must lie in [0, 1)"));
        }
        if self.max_outer == 0 || self.max_newton == 0 {
            return Err(Error::config("max_outer", "iteration limits must be at least 1"));
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            init: self.barrier_init,
            decay: self.barrier_decay,
            armijo: self.armijo,
            shrink: self.backtrack,
            tol: self.inner_tol,
            max_newton: self.max_newton,
            max_centering: 80,
        }
    }

    fn phase1_settings(&self) -> Settings {
        Settings { tol: 1e-9, ..self.settings() }
    }
}

/// Continuous association variables in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedVars {
    pub alpha: Array3<f64>,
    pub beta: Array3<f64>,
}

impl From<&AssociationVars> for RelaxedVars {
    fn from(v: &AssociationVars) -> Self {
        let (alpha, beta) = v.to_relaxed();
        Self { alpha, beta }
    }
}

/// Rate slacks `[node, ue, slot]` and interference slacks `[ue, slot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackVars {
    pub lambda_b: Array3<f64>,
    pub lambda_s: Array3<f64>,
    pub mu_b: Array2<f64>,
    pub mu_s: Array2<f64>,
}

/// Points `mu_hat` at which `e^mu` is linearized, `[ue, slot]`.
/// `mu_b_i` bounds the log interference seen by BS links, `mu_s_i` the one
/// seen by satellite links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationPoint {
    pub mu_b_i: Array2<f64>,
    pub mu_s_i: Array2<f64>,
}

/// First-order expansion of `e^z` around `z0`.
pub fn exp_tangent(z: f64, z0: f64) -> f64 {
    z0.exp() * (z - z0 + 1.0)
}

/// Exact log interference-plus-noise at a (possibly fractional) association.
pub fn linearization_at(p: &LinkProblem, r: &RelaxedVars) -> LinearizationPoint {
    let (_, _, n_ue, n_t) = p.dims();
    let mut mu_b_i = Array2::zeros((n_ue, n_t));
    let mut mu_s_i = Array2::zeros((n_ue, n_t));
    for t in 0..n_t {
        for k in 0..n_ue {
            let i = p.interference(r.alpha.view(), r.beta.view(), k, t);
            mu_b_i[[k, t]] = (i.from_sats + p.noise_w).ln();
            mu_s_i[[k, t]] = (i.from_bss + p.noise_w).ln();
        }
    }
    LinearizationPoint { mu_b_i, mu_s_i }
}

/// Starting point: the log interference at the greedy association.
pub fn init_linearization(p: &LinkProblem) -> LinearizationPoint {
    linearization_at(p, &RelaxedVars::from(&greedy_assign(&p.channel, &p.capacity)))
}

/// Size of the subproblem before any variable is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramCounts {
    pub association_vars: usize,
    pub lambda: usize,
    pub mu: usize,
    pub nonlinear_constraints: usize,
}

/// Convex surrogate around one linearization point.
#[derive(Debug, Clone)]
pub struct Subproblem<'a> {
    problem: &'a LinkProblem,
    lin: LinearizationPoint,
    layouts: Arc<Vec<SlotLayout>>,
    slots: Vec<SlotProgram>,
}

fn build_layouts(p: &LinkProblem, cfg: &ScaConfig) -> Vec<SlotLayout> {
    let s = cfg.phase1_settings();
    (0..p.dims().3).into_par_iter().map(|t| SlotLayout::new(p, t, &s)).collect()
}

pub fn build_subproblem<'a>(lin: &LinearizationPoint, p: &'a LinkProblem, cfg: &ScaConfig) -> Subproblem<'a> {
    Subproblem::with_layouts(lin.clone(), p, Arc::new(build_layouts(p, cfg)))
}

impl<'a> Subproblem<'a> {
    fn with_layouts(lin: LinearizationPoint, p: &'a LinkProblem, layouts: Arc<Vec<SlotLayout>>) -> Self {
        let (_, _, n_ue, _) = p.dims();
        let ln_noise = p.noise_w.ln();
        let slots = layouts
            .iter()
            .map(|l| {
                let mu = DVector::from_fn(2 * n_ue, |i, _| {
                    if i < n_ue {
                        lin.mu_b_i[[i, l.t]] - ln_noise
                    } else {
                        lin.mu_s_i[[i - n_ue, l.t]] - ln_noise
                    }
                });
                SlotProgram::new(l, mu)
            })
            .collect();
        Self { problem: p, lin, layouts, slots }
    }

    pub fn linearization(&self) -> &LinearizationPoint {
        &self.lin
    }

    pub fn counts(&self) -> ProgramCounts {
        let (n, m, k, t) = self.problem.dims();
        let links = (n + m) * k * t;
        let mu = 2 * k * t;
        ProgramCounts { association_vars: links, lambda: links, mu, nonlinear_constraints: links + mu }
    }

    /// Slots whose at-least-one-link constraints were relaxed away because
    /// they left no strictly feasible point.
    pub fn c5_dropped_slots(&self) -> Vec<usize> {
        self.layouts.iter().filter(|l| l.c5_dropped).map(|l| l.t).collect()
    }

    /// Best interference slacks for the given association.
    pub fn mu_star(&self, r: &RelaxedVars) -> (Array2<f64>, Array2<f64>) {
        let exact = linearization_at(self.problem, r);
        let f = |hat: f64, ln_y: f64| hat - 1.0 + (ln_y - hat).exp();
        let mu_b = ndarray::Zip::from(&self.lin.mu_b_i).and(&exact.mu_b_i).map_collect(|&h, &y| f(h, y));
        let mu_s = ndarray::Zip::from(&self.lin.mu_s_i).and(&exact.mu_s_i).map_collect(|&h, &y| f(h, y));
        (mu_b, mu_s)
    }

    /// Largest rate slacks `ln(signal + y) - mu` allowed at `(r, mu)`.
    pub fn max_lambda(&self, r: &RelaxedVars, mu_b: &Array2<f64>, mu_s: &Array2<f64>) -> (Array3<f64>, Array3<f64>) {
        let p = self.problem;
        let (n_bs, n_sat, n_ue, n_t) = p.dims();
        let mut lb = Array3::zeros((n_bs, n_ue, n_t));
        let mut ls = Array3::zeros((n_sat, n_ue, n_t));
        for t in 0..n_t {
            for k in 0..n_ue {
                let i = p.interference(r.alpha.view(), r.beta.view(), k, t);
                for n in 0..n_bs {
                    let s = r.alpha[[n, k, t]] * p.power.p_bs[n] * p.channel.h[[n, k, t]] + i.from_sats + p.noise_w;
                    lb[[n, k, t]] = s.ln() - mu_b[[k, t]];
                }
                for m in 0..n_sat {
                    let s = r.beta[[m, k, t]] * p.power.p_sat[m] * p.channel.g[[m, k, t]] + i.from_bss + p.noise_w;
                    ls[[m, k, t]] = s.ln() - mu_s[[k, t]];
                }
            }
        }
        (lb, ls)
    }

    /// The eliminated objective `sum(lambda)` at `r` with optimal slacks.
    pub fn reduced_objective(&self, r: &RelaxedVars) -> f64 {
        let (mu_b, mu_s) = self.mu_star(r);
        let (lb, ls) = self.max_lambda(r, &mu_b, &mu_s);
        let (_, _, n_ue, n_t) = self.problem.dims();
        let mut total = 0.0;
        for t in 0..n_t {
            for k in 0..n_ue {
                total += lb.slice(ndarray::s![.., k, t]).sum() + ls.slice(ndarray::s![.., k, t]).sum();
            }
        }
        total
    }

    /// Whether `(r, slack)` satisfies the rate and convexified interference
    /// constraints up to `tol`.
    pub fn satisfies_bounds(&self, r: &RelaxedVars, slack: &SlackVars, tol: f64) -> bool {
        let exact = linearization_at(self.problem, r);
        let (_, _, n_ue, n_t) = self.problem.dims();
        for t in 0..n_t {
            for k in 0..n_ue {
                let ok_b = exact.mu_b_i[[k, t]].exp() <= exp_tangent(slack.mu_b[[k, t]], self.lin.mu_b_i[[k, t]]) * (1.0 + tol);
                let ok_s = exact.mu_s_i[[k, t]].exp() <= exp_tangent(slack.mu_s[[k, t]], self.lin.mu_s_i[[k, t]]) * (1.0 + tol);
                if !(ok_b && ok_s) {
                    return false;
                }
            }
        }
        let (lb, ls) = self.max_lambda(r, &slack.mu_b, &slack.mu_s);
        let le = |a: &Array3<f64>, b: &Array3<f64>| a.iter().zip(b).all(|(x, y)| *x <= *y + tol);
        le(&slack.lambda_b, &lb) && le(&slack.lambda_s, &ls)
    }

    fn project(&self, slot: usize, r: &RelaxedVars) -> DVector<f64> {
        let l = &self.layouts[slot];
        DVector::from_iterator(
            l.nvar(),
            l.vars.iter().map(|v| match v.side {
                LinkSide::Tn => r.alpha[[v.node, v.ue, l.t]],
                LinkSide::Ntn => r.beta[[v.node, v.ue, l.t]],
            }
            .clamp(0.0, 1.0)),
        )
    }

    fn start(&self, slot: usize, warm: Option<&RelaxedVars>, blend: f64) -> DVector<f64> {
        let interior = &self.layouts[slot].interior;
        if let Some(w) = warm {
            let x = interior * (1.0 - blend) + self.project(slot, w) * blend;
            if self.slots[slot].is_strictly_feasible(&x) {
                return x;
            }
        }
        interior.clone()
    }

    fn scatter(&self, xs: &[DVector<f64>]) -> RelaxedVars {
        let (n_bs, n_sat, n_ue, n_t) = self.problem.dims();
        let mut alpha = Array3::zeros((n_bs, n_ue, n_t));
        let mut beta = Array3::zeros((n_sat, n_ue, n_t));
        for (l, x) in self.layouts.iter().zip(xs) {
            for (v, &val) in l.vars.iter().zip(x.iter()) {
                match v.side {
                    LinkSide::Tn => alpha[[v.node, v.ue, l.t]] = val,
                    LinkSide::Ntn => beta[[v.node, v.ue, l.t]] = val,
                }
            }
        }
        RelaxedVars { alpha, beta }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub relaxed: RelaxedVars,
    pub slack: SlackVars,
    /// `sum(lambda)` in nats.
    pub objective: f64,
    /// Some slot's Newton iterations stalled before reaching tolerance.
    pub degraded: bool,
}

/// Solves every slot independently. `warm` nudges the barrier start towards a
/// previous solution.
pub fn solve_subproblem(sub: &Subproblem, cfg: &ScaConfig, warm: Option<&RelaxedVars>) -> SubproblemSolution {
    let settings = cfg.settings();
    let outs: Vec<(DVector<f64>, f64, bool)> = (0..sub.slots.len())
        .into_par_iter()
        .map(|i| {
            let prog = &sub.slots[i];
            let x0 = sub.start(i, warm, cfg.start_blend);
            if prog.nvar() == 0 {
                let f = barrier::Problem::objective(prog, &x0);
                return (x0, f, false);
            }
            let out = barrier::solve(prog, x0, &settings);
            (out.z, out.objective, out.degraded)
        })
        .collect();
    let xs: Vec<DVector<f64>> = outs.iter().map(|o| o.0.clone()).collect();
    let relaxed = sub.scatter(&xs);
    let (mu_b, mu_s) = sub.mu_star(&relaxed);
    let (lambda_b, lambda_s) = sub.max_lambda(&relaxed, &mu_b, &mu_s);
    SubproblemSolution {
        objective: outs.iter().map(|o| o.1).sum(),
        degraded: outs.iter().any(|o| o.2),
        relaxed,
        slack: SlackVars { lambda_b, lambda_s, mu_b, mu_s },
    }
}

/// Solves the subproblem again with `lambda` and `mu` as explicit variables.
/// Returns the optimal `sum(lambda)`; used to validate the elimination.
pub fn solve_full_form(sub: &Subproblem, cfg: &ScaConfig) -> f64 {
    let settings = cfg.settings();
    let (n_bs, n_sat, n_ue, _) = sub.problem.dims();
    (0..sub.slots.len())
        .map(|i| {
            let prog = &sub.slots[i];
            let ff = full_form::FullForm::new(prog, n_bs, n_sat, n_ue);
            let z0 = ff.start(&sub.layouts[i].interior);
            barrier::solve(&ff, z0, &settings).objective
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Optimal surrogate objective, nats.
    pub subproblem_objective: f64,
    /// Sum rate of the relaxed iterate, bps/Hz.
    pub relaxed_sum_rate: f64,
    pub degraded: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
    pub c5_dropped_slots: Vec<usize>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    /// Largest relative decrease between consecutive subproblem objectives.
    pub fn worst_decrease(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[0].subproblem_objective - w[1].subproblem_objective) / w[0].subproblem_objective.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Deterministic part of the trace; wall times go to [`Self::write_timing_csv`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,subproblem_objective,relaxed_sum_rate,degraded")?;
        for r in &self.rows {
            writeln!(w, "{},{:.12e},{:.12e},{}", r.iteration, r.subproblem_objective, r.relaxed_sum_rate, r.degraded)?;
        }
        Ok(())
    }

    pub fn write_timing_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,wall_time_s")?;
        for r in &self.rows {
            writeln!(w, "{},{:.6}", r.iteration, r.wall_time_s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScaSolution {
    /// Binary association after rounding and repair.
    pub assoc: AssociationVars,
    /// Last relaxed iterate.
    pub relaxed: RelaxedVars,
    pub trace: SolveTrace,
    /// `(slot, ue)` pairs that could not be served for lack of capacity.
    pub unserved: Vec<(usize, usize)>,
}

/// Full pipeline: greedy warm start, outer iterations, rounding and repair.
pub fn sca_solve(p: &LinkProblem, cfg: &ScaConfig) -> Result<ScaSolution> {
    p.validate()?;
    cfg.validate()?;
    let layouts = Arc::new(build_layouts(p, cfg));
    let mut warm = RelaxedVars::from(&greedy_assign(&p.channel, &p.capacity));
    let mut lin = linearization_at(p, &warm);
    let mut trace = SolveTrace {
        c5_dropped_slots: layouts.iter().filter(|l| l.c5_dropped).map(|l| l.t).collect(),
        ..SolveTrace::default()
    };
    let mut prev: Option<f64> = None;
    for i in 0..cfg.max_outer {
        let clock = Instant::now();
        let sub = Subproblem::with_layouts(lin, p, layouts.clone());
        let sol = solve_subproblem(&sub, cfg, Some(&warm));
        let rate = p.sum_rate_relaxed(sol.relaxed.alpha.view(), sol.relaxed.beta.view());
        trace.rows.push(TraceRow {
            iteration: i + 1,
            subproblem_objective: sol.objective,
            relaxed_sum_rate: rate,
            degraded: sol.degraded,
            wall_time_s: clock.elapsed().as_secs_f64(),
        });
        log::debug!("sca iteration {}: objective {:.9} relaxed SR {:.6}", i + 1, sol.objective, rate);
        let done = prev.is_some_and(|q| (sol.objective - q).abs() <= cfg.outer_tol * q.abs().max(1.0));
        prev = Some(sol.objective);
        lin = LinearizationPoint { mu_b_i: sol.slack.mu_b, mu_s_i: sol.slack.mu_s };
        warm = sol.relaxed;
        if done {
            trace.converged = true;
            break;
        }
    }
    let rounded = round_binary_at(&warm, cfg.round_threshold);
    let repaired = repair_feasibility(&rounded, p);
    Ok(ScaSolution { assoc: repaired.vars, relaxed: warm, trace, unserved: repaired.unserved })
}
