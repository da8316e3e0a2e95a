//! Association variables, the five association constraint families, uniform
//! power split, SINR/rate evaluation and the sum-rate objective.
//!
//! Interference follows the load-weighted form: every opposite-network node
//! radiates its per-connection power once per connection it carries,
//! background connections included. Intra-network interference is ignored.
//! Rates are reported in bps/Hz (base-2 logarithm).

mod csv;

pub use self::csv::{read_association_csv, write_association_csv};

use std::fmt;

use ndarray::{Array2, Array3, ArrayView3};

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};

/// Binary link selection: `alpha[[n, k, t]]` (BS) and `beta[[m, k, t]]` (satellite).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationVars {
    pub alpha: Array3<u8>,
    pub beta: Array3<u8>,
}

impl AssociationVars {
    pub fn zeros(n_bs: usize, n_sat: usize, n_ue: usize, n_slots: usize) -> Self {
        Self {
            alpha: Array3::zeros((n_bs, n_ue, n_slots)),
            beta: Array3::zeros((n_sat, n_ue, n_slots)),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let (n, k, t) = self.alpha.dim();
        (n, self.beta.dim().0, k, t)
    }

    pub fn to_relaxed(&self) -> (Array3<f64>, Array3<f64>) {
        (self.alpha.mapv(f64::from), self.beta.mapv(f64::from))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityProfile {
    pub bs_capacity: Vec<u32>,
    pub sat_capacity: Vec<u32>,
    /// `[n, t]` background connections.
    pub bs_background: Array2<u32>,
    pub sat_background: Array2<u32>,
}

impl CapacityProfile {
    pub fn validate(&self) -> Result<()> {
        for ((n, _), &eta) in self.bs_background.indexed_iter() {
            if eta > self.bs_capacity[n] {
                return Err(Error::config(format!("bs_background[{n}]"), "exceeds capacity"));
            }
        }
        for ((m, _), &eta) in self.sat_background.indexed_iter() {
            if eta > self.sat_capacity[m] {
                return Err(Error::config(format!("sat_background[{m}]"), "exceeds capacity"));
            }
        }
        Ok(())
    }

    /// Free BS connections `ψ − η` at slot `t`.
    pub fn bs_residual(&self, n: usize, t: usize) -> u32 {
        self.bs_capacity[n] - self.bs_background[[n, t]]
    }

    pub fn sat_residual(&self, m: usize, t: usize) -> u32 {
        self.sat_capacity[m] - self.sat_background[[m, t]]
    }
}

/// Per-connection transmit powers, watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p_bs: Vec<f64>,
    pub p_sat: Vec<f64>,
}

impl PowerAllocation {
    /// `P_max / ψ` for every node.
    pub fn uniform(bs_max_w: &[f64], bs_capacity: &[u32], sat_max_w: &[f64], sat_capacity: &[u32]) -> Self {
        let split = |p: &[f64], c: &[u32]| p.iter().zip(c).map(|(p, &c)| p / c.max(1) as f64).collect();
        Self {
            p_bs: split(bs_max_w, bs_capacity),
            p_sat: split(sat_max_w, sat_capacity),
        }
    }
}

/// Everything the association problem needs: gains, powers, capacities, noise.
#[derive(Debug, Clone)]
pub struct LinkProblem {
    pub channel: ChannelTensor,
    pub power: PowerAllocation,
    pub capacity: CapacityProfile,
    pub noise_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// At most one BS per UE and slot.
    C1,
    /// BS capacity.
    C2,
    /// At most one satellite per UE and slot.
    C3,
    /// Satellite capacity.
    C4,
    /// At least one link per UE and slot.
    C5,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    /// BS or satellite index for the capacity families.
    pub node: Option<usize>,
    pub ue: Option<usize>,
    pub slot: usize,
    /// Signed slack; negative for a violation.
    pub slack: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} slot {}", self.constraint, self.slot)?;
        if let Some(n) = self.node {
            write!(f, " node {n}")?;
        }
        if let Some(k) = self.ue {
            write!(f, " ue {k}")?;
        }
        write!(f, " slack {}", self.slack)
    }
}

/// Lists every violated constraint; empty iff the association is feasible.
pub fn check_feasibility(v: &AssociationVars, c: &CapacityProfile) -> Vec<Violation> {
    let (n_bs, n_sat, n_ue, n_t) = v.dims();
    let mut out = Vec::new();
    for t in 0..n_t {
        for k in 0..n_ue {
            let a: f64 = (0..n_bs).map(|n| v.alpha[[n, k, t]] as f64).sum();
            let b: f64 = (0..n_sat).map(|m| v.beta[[m, k, t]] as f64).sum();
            if a > 1.0 {
                out.push(Violation { constraint: Constraint::C1, node: None, ue: Some(k), slot: t, slack: 1.0 - a });
            }
            if b > 1.0 {
                out.push(Violation { constraint: Constraint::C3, node: None, ue: Some(k), slot: t, slack: 1.0 - b });
            }
            if a + b < 1.0 {
                out.push(Violation { constraint: Constraint::C5, node: None, ue: Some(k), slot: t, slack: a + b - 1.0 });
            }
        }
        for n in 0..n_bs {
            let load: f64 = (0..n_ue).map(|k| v.alpha[[n, k, t]] as f64).sum();
            let cap = c.bs_residual(n, t) as f64;
            if load > cap {
                out.push(Violation { constraint: Constraint::C2, node: Some(n), ue: None, slot: t, slack: cap - load });
            }
        }
        for m in 0..n_sat {
            let load: f64 = (0..n_ue).map(|k| v.beta[[m, k, t]] as f64).sum();
            let cap = c.sat_residual(m, t) as f64;
            if load > cap {
                out.push(Violation { constraint: Constraint::C4, node: Some(m), ue: None, slot: t, slack: cap - load });
            }
        }
    }
    out
}

/// Cross-network interference terms for one UE and slot under possibly
/// fractional association variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interference {
    /// Satellite power reaching the UE (disturbs its BS links), W.
    pub from_sats: f64,
    /// BS power reaching the UE (disturbs its satellite link), W.
    pub from_bss: f64,
}

impl LinkProblem {
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.channel.n_bs(), self.channel.n_sat(), self.channel.n_ue(), self.channel.n_slots())
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, _, t) = self.dims();
        let ok = self.power.p_bs.len() == n
            && self.power.p_sat.len() == m
            && self.capacity.bs_capacity.len() == n
            && self.capacity.sat_capacity.len() == m
            && self.capacity.bs_background.dim() == (n, t)
            && self.capacity.sat_background.dim() == (m, t);
        if !ok {
            return Err(Error::Dimension("powers/capacities do not match the channel tensor".into()));
        }
        self.capacity.validate()
    }

    /// `Σ_m (η_m + Σ_k' β) P_m g_mk` and its BS mirror at slot `t`.
    pub fn interference(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>, k: usize, t: usize) -> Interference {
        let (n_bs, n_sat, n_ue, _) = self.dims();
        let mut from_sats = 0.0;
        for m in 0..n_sat {
            let load = self.capacity.sat_background[[m, t]] as f64 + (0..n_ue).map(|j| beta[[m, j, t]]).sum::<f64>();
            from_sats += load * self.power.p_sat[m] * self.channel.g[[m, k, t]];
        }
        let mut from_bss = 0.0;
        for n in 0..n_bs {
            let load = self.capacity.bs_background[[n, t]] as f64 + (0..n_ue).map(|j| alpha[[n, j, t]]).sum::<f64>();
            from_bss += load * self.power.p_bs[n] * self.channel.h[[n, k, t]];
        }
        Interference { from_sats, from_bss }
    }

    pub fn sinr_bs_relaxed(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>, n: usize, k: usize, t: usize) -> f64 {
        let i = self.interference(alpha, beta, k, t);
        alpha[[n, k, t]] * self.power.p_bs[n] * self.channel.h[[n, k, t]] / (i.from_sats + self.noise_w)
    }

    pub fn sinr_sat_relaxed(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>, m: usize, k: usize, t: usize) -> f64 {
        let i = self.interference(alpha, beta, k, t);
        beta[[m, k, t]] * self.power.p_sat[m] * self.channel.g[[m, k, t]] / (i.from_bss + self.noise_w)
    }

    pub fn sinr_bs(&self, v: &AssociationVars, n: usize, k: usize, t: usize) -> f64 {
        let (a, b) = v.to_relaxed();
        self.sinr_bs_relaxed(a.view(), b.view(), n, k, t)
    }

    pub fn sinr_sat(&self, v: &AssociationVars, m: usize, k: usize, t: usize) -> f64 {
        let (a, b) = v.to_relaxed();
        self.sinr_sat_relaxed(a.view(), b.view(), m, k, t)
    }

    /// Throughput of UE `k` at slot `t` in bps/Hz for fractional variables.
    pub fn ue_rate_relaxed(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>, k: usize, t: usize) -> f64 {
        let (n_bs, n_sat, _, _) = self.dims();
        let i = self.interference(alpha, beta, k, t);
        let mut r = 0.0;
        for n in 0..n_bs {
            let s = alpha[[n, k, t]] * self.power.p_bs[n] * self.channel.h[[n, k, t]] / (i.from_sats + self.noise_w);
            r += s.ln_1p();
        }
        for m in 0..n_sat {
            let s = beta[[m, k, t]] * self.power.p_sat[m] * self.channel.g[[m, k, t]] / (i.from_bss + self.noise_w);
            r += s.ln_1p();
        }
        r / std::f64::consts::LN_2
    }

    pub fn ue_rate(&self, v: &AssociationVars, k: usize, t: usize) -> f64 {
        let (a, b) = v.to_relaxed();
        self.ue_rate_relaxed(a.view(), b.view(), k, t)
    }

    /// `[k, t]` table of per-UE rates, bps/Hz.
    pub fn rate_table_relaxed(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>) -> Array2<f64> {
        let (_, _, n_ue, n_t) = self.dims();
        Array2::from_shape_fn((n_ue, n_t), |(k, t)| self.ue_rate_relaxed(alpha, beta, k, t))
    }

    pub fn sum_rate_relaxed(&self, alpha: ArrayView3<f64>, beta: ArrayView3<f64>) -> f64 {
        // Fixed (slot, ue) summation order.
        let (_, _, n_ue, n_t) = self.dims();
        let mut total = 0.0;
        for t in 0..n_t {
            for k in 0..n_ue {
                total += self.ue_rate_relaxed(alpha, beta, k, t);
            }
        }
        total
    }

    /// Sum rate `Σ_{k,t} R_k^t` in bps/Hz; the common yardstick for all algorithms.
    pub fn sum_rate(&self, v: &AssociationVars) -> f64 {
        let (a, b) = v.to_relaxed();
        self.sum_rate_relaxed(a.view(), b.view())
    }

    pub fn rate_table(&self, v: &AssociationVars) -> Array2<f64> {
        let (a, b) = v.to_relaxed();
        self.rate_table_relaxed(a.view(), b.view())
    }
}
