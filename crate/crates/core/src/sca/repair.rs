use ndarray::Array3;

use super::RelaxedVars;
use crate::sysmodel::{AssociationVars, LinkProblem};

/// Entries at or above one half become links.
pub fn round_binary(r: &RelaxedVars) -> AssociationVars {
    round_binary_at(r, 0.5)
}

pub fn round_binary_at(r: &RelaxedVars, threshold: f64) -> AssociationVars {
    let f = |x: &f64| u8::from(*x >= threshold);
    AssociationVars { alpha: r.alpha.map(f), beta: r.beta.map(f) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub vars: AssociationVars,
    /// `(slot, ue)` pairs left without any link because every node was full.
    pub unserved: Vec<(usize, usize)>,
}

impl RepairOutcome {
    pub fn is_clean(&self) -> bool {
        self.unserved.is_empty()
    }
}

/// Keeps the strongest link per UE and side, trims overloaded nodes from the
/// weakest link up, then attaches unconnected UEs to the strongest node that
/// still has room.
pub fn repair_feasibility(v: &AssociationVars, p: &LinkProblem) -> RepairOutcome {
    let mut v = v.clone();
    let (n_bs, n_sat, n_ue, n_t) = v.dims();
    let mut unserved = Vec::new();
    for t in 0..n_t {
        for k in 0..n_ue {
            keep_strongest(&mut v.alpha, &p.channel.h, n_bs, k, t);
            keep_strongest(&mut v.beta, &p.channel.g, n_sat, k, t);
        }
        for n in 0..n_bs {
            trim(&mut v.alpha, &p.channel.h, n, t, p.capacity.bs_residual(n, t));
        }
        for m in 0..n_sat {
            trim(&mut v.beta, &p.channel.g, m, t, p.capacity.sat_residual(m, t));
        }
        for k in 0..n_ue {
            let linked = (0..n_bs).any(|n| v.alpha[[n, k, t]] == 1) || (0..n_sat).any(|m| v.beta[[m, k, t]] == 1);
            if linked {
                continue;
            }
            let room = |arr: &Array3<u8>, node: usize, cap: u32| {
                let used = (0..n_ue).filter(|&j| arr[[node, j, t]] == 1).count() as u32;
                cap > used
            };
            // (is_sat, node, gain); BS candidates come first so they win ties
            let mut best: Option<(bool, usize, f64)> = None;
            for n in (0..n_bs).filter(|&n| room(&v.alpha, n, p.capacity.bs_residual(n, t))) {
                let gain = p.channel.h[[n, k, t]];
                if best.map_or(true, |b| gain > b.2) {
                    best = Some((false, n, gain));
                }
            }
            for m in (0..n_sat).filter(|&m| room(&v.beta, m, p.capacity.sat_residual(m, t))) {
                let gain = p.channel.g[[m, k, t]];
                if best.map_or(true, |b| gain > b.2) {
                    best = Some((true, m, gain));
                }
            }
            match best {
                Some((false, n, _)) => v.alpha[[n, k, t]] = 1,
                Some((true, m, _)) => v.beta[[m, k, t]] = 1,
                None => unserved.push((t, k)),
            }
        }
    }
    RepairOutcome { vars: v, unserved }
}

fn keep_strongest(x: &mut Array3<u8>, gain: &Array3<f64>, nodes: usize, k: usize, t: usize) {
    let mut best: Option<usize> = None;
    for n in (0..nodes).filter(|&n| x[[n, k, t]] == 1) {
        if best.map_or(true, |b| gain[[n, k, t]] > gain[[b, k, t]]) {
            best = Some(n);
        }
    }
    for n in 0..nodes {
        if Some(n) != best {
            x[[n, k, t]] = 0;
        }
    }
}

fn trim(x: &mut Array3<u8>, gain: &Array3<f64>, node: usize, t: usize, cap: u32) {
    let mut ues: Vec<usize> = (0..x.dim().1).filter(|&k| x[[node, k, t]] == 1).collect();
    if ues.len() as u32 <= cap {
        return;
    }
    // weakest first; among equal gains the larger UE index goes first
    ues.sort_by(|&a, &b| gain[[node, a, t]].total_cmp(&gain[[node, b, t]]).then(b.cmp(&a)));
    let excess = ues.len() - cap as usize;
    for &k in &ues[..excess] {
        x[[node, k, t]] = 0;
    }
}
