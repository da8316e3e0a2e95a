//! Per-slot convex program after eliminating the rate and interference slack
//! variables. Everything is expressed in noise-normalized units.

use nalgebra::{DMatrix, DVector};

use super::barrier::{self, Problem, Settings};
use crate::channel::LinkSide;
use crate::sysmodel::LinkProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct VarRef {
    pub side: LinkSide,
    pub node: usize,
    pub ue: usize,
}

/// Variables and polytope of one slot. Depends only on capacities and on
/// which gains are zero, so it is reused across outer iterations.
#[derive(Debug, Clone)]
pub(crate) struct SlotLayout {
    pub t: usize,
    pub n_ue: usize,
    pub vars: Vec<VarRef>,
    /// `a x <= b`, lower bounds included.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// The at-least-one-link rows had no strict interior and were left out.
    pub c5_dropped: bool,
    /// Strictly feasible point.
    pub interior: DVector<f64>,
    /// Noise-normalized signal coefficients `P h / sigma^2`, `[n][k]` and `[m][k]`.
    pub sig_bs: Vec<Vec<f64>>,
    pub sig_sat: Vec<Vec<f64>>,
    pub eta_bs: Vec<f64>,
    pub eta_sat: Vec<f64>,
}

impl SlotLayout {
    pub fn new(p: &LinkProblem, t: usize, phase1: &Settings) -> Self {
        let (n_bs, n_sat, n_ue, _) = p.dims();
        let sig_bs: Vec<Vec<f64>> = (0..n_bs)
            .map(|n| (0..n_ue).map(|k| p.power.p_bs[n] * p.channel.h[[n, k, t]] / p.noise_w).collect())
            .collect();
        let sig_sat: Vec<Vec<f64>> = (0..n_sat)
            .map(|m| (0..n_ue).map(|k| p.power.p_sat[m] * p.channel.g[[m, k, t]] / p.noise_w).collect())
            .collect();
        let mut vars = Vec::new();
        for k in 0..n_ue {
            for n in 0..n_bs {
                if sig_bs[n][k] > 0.0 && p.capacity.bs_residual(n, t) > 0 {
                    vars.push(VarRef { side: LinkSide::Tn, node: n, ue: k });
                }
            }
            for m in 0..n_sat {
                if sig_sat[m][k] > 0.0 && p.capacity.sat_residual(m, t) > 0 {
                    vars.push(VarRef { side: LinkSide::Ntn, node: m, ue: k });
                }
            }
        }
        let mut layout = Self {
            t,
            n_ue,
            a: DMatrix::zeros(0, vars.len()),
            b: DVector::zeros(0),
            vars,
            c5_dropped: false,
            interior: DVector::zeros(0),
            sig_bs,
            sig_sat,
            eta_bs: (0..n_bs).map(|n| p.capacity.bs_background[[n, t]] as f64).collect(),
            eta_sat: (0..n_sat).map(|m| p.capacity.sat_background[[m, t]] as f64).collect(),
        };
        let (a, b) = layout.rows(p, true);
        match find_interior(&a, &b, phase1) {
            Some(x) => {
                layout.a = a;
                layout.b = b;
                layout.interior = x;
            }
            None => {
                let (a, b) = layout.rows(p, false);
                layout.interior = find_interior(&a, &b, phase1).expect("box and capacity rows always have an interior");
                layout.a = a;
                layout.b = b;
                layout.c5_dropped = true;
            }
        }
        layout
    }

    pub fn nvar(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, side: LinkSide, node: usize, ue: usize) -> Option<usize> {
        self.vars.iter().position(|v| v.side == side && v.node == node && v.ue == ue)
    }

    fn rows(&self, p: &LinkProblem, with_c5: bool) -> (DMatrix<f64>, DVector<f64>) {
        let (n_bs, n_sat, n_ue, _) = p.dims();
        let nv = self.nvar();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for j in 0..nv {
            let mut r = vec![0.0; nv];
            r[j] = -1.0;
            rows.push((r, 0.0));
        }
        let mut add = |pred: &dyn Fn(&VarRef) -> bool, coef: f64, rhs: f64| {
            let r: Vec<f64> = self.vars.iter().map(|v| if pred(v) { coef } else { 0.0 }).collect();
            if r.iter().any(|&x| x != 0.0) {
                rows.push((r, rhs));
            }
        };
        for k in 0..n_ue {
            add(&|v| v.side == LinkSide::Tn && v.ue == k, 1.0, 1.0);
            add(&|v| v.side == LinkSide::Ntn && v.ue == k, 1.0, 1.0);
        }
        for n in 0..n_bs {
            add(&|v| v.side == LinkSide::Tn && v.node == n, 1.0, p.capacity.bs_residual(n, self.t) as f64);
        }
        for m in 0..n_sat {
            add(&|v| v.side == LinkSide::Ntn && v.node == m, 1.0, p.capacity.sat_residual(m, self.t) as f64);
        }
        if with_c5 {
            // UEs with no usable link at all cannot be covered by the relaxation
            for k in 0..n_ue {
                add(&|v| v.ue == k, -1.0, -1.0);
            }
        }
        let a = DMatrix::from_fn(rows.len(), nv, |i, j| rows[i].0[j]);
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        (a, b)
    }

    /// Interference-plus-noise rows: `y = c_y + r_y x`, BS-side UEs first
    /// (`[0, K)`, satellite interference) then satellite-side UEs.
    pub fn interference_rows(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n_ue = self.n_ue;
        let nv = self.nvar();
        let mut r = DMatrix::zeros(2 * n_ue, nv);
        let mut c = DVector::from_element(2 * n_ue, 1.0);
        for k in 0..n_ue {
            for (m, row) in self.sig_sat.iter().enumerate() {
                c[k] += self.eta_sat[m] * row[k];
            }
            for (n, row) in self.sig_bs.iter().enumerate() {
                c[n_ue + k] += self.eta_bs[n] * row[k];
            }
            for (j, v) in self.vars.iter().enumerate() {
                match v.side {
                    // beta_{m,k'} loads satellite m, which reaches UE k with sig_sat[m][k]
                    LinkSide::Ntn => r[(k, j)] += self.sig_sat[v.node][k],
                    LinkSide::Tn => r[(n_ue + k, j)] += self.sig_bs[v.node][k],
                }
            }
        }
        (r, c)
    }

}

/// Reduced objective of one slot:
/// `q0 + q x + sum_i ln(w_i x + c_i)`, maximized over the layout polytope.
#[derive(Debug, Clone)]
pub(crate) struct SlotProgram {
    pub w: DMatrix<f64>,
    pub c: DVector<f64>,
    pub q: DVector<f64>,
    pub q0: f64,
    /// Interference rows `y = c_y + r_y x` and their linearization points.
    pub r_y: DMatrix<f64>,
    pub c_y: DVector<f64>,
    pub mu_hat: DVector<f64>,
    /// Polytope.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl SlotProgram {
    /// `mu_hat` holds normalized linearization points, BS side then satellite side.
    pub fn new(layout: &SlotLayout, mu_hat: DVector<f64>) -> Self {
        let n_ue = layout.n_ue;
        let n_bs = layout.sig_bs.len();
        let n_sat = layout.sig_sat.len();
        let nv = layout.nvar();
        let (r_y, c_y) = layout.interference_rows();

        // log terms: BS links (n, k) then satellite links (m, k)
        let n_terms = (n_bs + n_sat) * n_ue;
        let mut w = DMatrix::zeros(n_terms, nv);
        let mut c = DVector::zeros(n_terms);
        for n in 0..n_bs {
            for k in 0..n_ue {
                let i = n * n_ue + k;
                w.row_mut(i).copy_from(&r_y.row(k));
                c[i] = c_y[k];
                if let Some(j) = layout.index_of(LinkSide::Tn, n, k) {
                    w[(i, j)] += layout.sig_bs[n][k];
                }
            }
        }
        for m in 0..n_sat {
            for k in 0..n_ue {
                let i = (n_bs + m) * n_ue + k;
                w.row_mut(i).copy_from(&r_y.row(n_ue + k));
                c[i] = c_y[n_ue + k];
                if let Some(j) = layout.index_of(LinkSide::Ntn, m, k) {
                    w[(i, j)] += layout.sig_sat[m][k];
                }
            }
        }

        let mut q = DVector::zeros(nv);
        let mut q0 = 0.0;
        for row in 0..2 * n_ue {
            let mult = if row < n_ue { n_bs } else { n_sat } as f64;
            if mult == 0.0 {
                continue;
            }
            let e = (-mu_hat[row]).exp();
            q -= r_y.row(row).transpose() * (mult * e);
            q0 -= mult * (mu_hat[row] - 1.0 + c_y[row] * e);
        }
        Self { w, c, q, q0, r_y, c_y, mu_hat, a: layout.a.clone(), b: layout.b.clone() }
    }

    pub fn nvar(&self) -> usize {
        self.q.len()
    }

    pub fn log_args(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.w * x + &self.c
    }

    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * x
    }

    /// Optimal (normalized) interference slacks `mu* = mu_hat - 1 + y e^{-mu_hat}`.
    pub fn mu_star(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = &self.r_y * x + &self.c_y;
        DVector::from_fn(y.len(), |i, _| self.mu_hat[i] - 1.0 + y[i] * (-self.mu_hat[i]).exp())
    }

    pub fn is_strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.slacks(x).iter().all(|&s| s > 0.0)
    }
}

impl Problem for SlotProgram {
    fn dim(&self) -> usize {
        self.nvar()
    }

    fn n_barrier(&self) -> usize {
        self.b.len()
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        self.q0 + self.q.dot(x) + self.log_args(x).iter().map(|s| s.ln()).sum::<f64>()
    }

    fn phi(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let sl = self.slacks(x);
        let s = self.log_args(x);
        if sl.iter().any(|&v| v <= 0.0) || s.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let f = self.q0 + self.q.dot(x) + s.iter().map(|v| v.ln()).sum::<f64>();
        Some(-f - t * sl.iter().map(|v| v.ln()).sum::<f64>())
    }

    fn derivs(&self, x: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let sl = self.slacks(x);
        let s = self.log_args(x);
        let inv_s = s.map(|v| 1.0 / v);
        let inv_sl = sl.map(|v| 1.0 / v);
        let g = -(&self.q + self.w.tr_mul(&inv_s)) + self.a.tr_mul(&inv_sl) * t;
        let ws = DMatrix::from_fn(self.w.nrows(), self.w.ncols(), |i, j| self.w[(i, j)] * inv_s[i]);
        let as_ = DMatrix::from_fn(self.a.nrows(), self.a.ncols(), |i, j| self.a[(i, j)] * inv_sl[i]);
        let h = ws.tr_mul(&ws) + as_.tr_mul(&as_) * t;
        (g, h)
    }
}

/// Phase I: maximize the common margin `-s` with `a x - s <= b`, `s >= -1`.
/// Returns the maximizer when the margin is strictly positive.
pub(crate) fn find_interior(a: &DMatrix<f64>, b: &DVector<f64>, settings: &Settings) -> Option<DVector<f64>> {
    let nv = a.ncols();
    let m = a.nrows();
    let mut a1 = DMatrix::zeros(m + 1, nv + 1);
    a1.view_mut((0, 0), (m, nv)).copy_from(a);
    for i in 0..m {
        a1[(i, nv)] = -1.0;
    }
    a1[(m, nv)] = -1.0;
    let mut b1 = DVector::zeros(m + 1);
    b1.rows_mut(0, m).copy_from(b);
    b1[m] = 1.0;
    let mut q = DVector::zeros(nv + 1);
    q[nv] = -1.0;
    let lp = SlotProgram {
        w: DMatrix::zeros(0, nv + 1),
        c: DVector::zeros(0),
        q,
        q0: 0.0,
        r_y: DMatrix::zeros(0, nv + 1),
        c_y: DVector::zeros(0),
        mu_hat: DVector::zeros(0),
        a: a1,
        b: b1,
    };
    let x0 = DVector::zeros(nv);
    let s0 = (a * &x0 - b).iter().fold(0.0f64, |acc, &v| acc.max(v)) + 1.0;
    let mut z0 = DVector::zeros(nv + 1);
    z0[nv] = s0;
    let out = barrier::solve(&lp, z0, settings);
    let s = out.z[nv];
    let x = out.z.rows(0, nv).into_owned();
    (s < -1e-7 && (b - a * &x).iter().all(|&v| v > 0.0)).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings { init: 1.0, decay: 0.2, armijo: 1e-4, shrink: 0.5, tol: 1e-9, max_newton: 100, max_centering: 60 }
    }

    #[test]
    fn interior_of_simplex() {
        // x, y >= 0, x + y <= 1
        let a = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let x = find_interior(&a, &b, &settings()).unwrap();
        assert!((b - &a * &x).iter().all(|&s| s > 0.1));
    }

    #[test]
    fn no_interior_for_flat_set() {
        // x >= 0, x <= 1, x >= 1
        let a = DMatrix::from_row_slice(3, 1, &[-1.0, 1.0, -1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0, -1.0]);
        assert!(find_interior(&a, &b, &settings()).is_none());
    }
}
