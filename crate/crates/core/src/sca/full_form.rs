//! The slot program with the rate slacks `lambda` and interference slacks `mu`
//! kept as explicit variables. Only used to cross-check the eliminated form.

use nalgebra::{DMatrix, DVector};

use super::barrier::Problem;
use super::program::SlotProgram;

pub(crate) struct FullForm<'a> {
    p: &'a SlotProgram,
    nx: usize,
    /// Interference row of each log term.
    term_row: Vec<usize>,
    /// Interference rows that carry a slack variable.
    mu_rows: Vec<usize>,
    a_lin: DMatrix<f64>,
    b_lin: DVector<f64>,
}

impl<'a> FullForm<'a> {
    /// `n_bs`/`n_sat` give the term layout: BS terms first, `n_ue` per node.
    pub fn new(p: &'a SlotProgram, n_bs: usize, n_sat: usize, n_ue: usize) -> Self {
        let nx = p.nvar();
        let mut term_row = Vec::new();
        for _ in 0..n_bs {
            term_row.extend(0..n_ue);
        }
        for _ in 0..n_sat {
            term_row.extend(n_ue..2 * n_ue);
        }
        let mut mu_rows = Vec::new();
        if n_bs > 0 {
            mu_rows.extend(0..n_ue);
        }
        if n_sat > 0 {
            mu_rows.extend(n_ue..2 * n_ue);
        }
        let nl = term_row.len();
        let nz = nx + nl + mu_rows.len();
        let mp = p.a.nrows();
        let mut a_lin = DMatrix::zeros(mp + mu_rows.len(), nz);
        let mut b_lin = DVector::zeros(mp + mu_rows.len());
        a_lin.view_mut((0, 0), (mp, nx)).copy_from(&p.a);
        b_lin.rows_mut(0, mp).copy_from(&p.b);
        for (i, &row) in mu_rows.iter().enumerate() {
            // y(x) <= e^{mu_hat} (mu - mu_hat + 1)
            let e = p.mu_hat[row].exp();
            a_lin.view_mut((mp + i, 0), (1, nx)).copy_from(&p.r_y.row(row));
            a_lin[(mp + i, nx + nl + i)] = -e;
            b_lin[mp + i] = e * (1.0 - p.mu_hat[row]) - p.c_y[row];
        }
        Self { p, nx, term_row, mu_rows, a_lin, b_lin }
    }

    pub fn dim(&self) -> usize {
        self.nx + self.term_row.len() + self.mu_rows.len()
    }

    fn mu_index(&self, row: usize) -> usize {
        self.nx + self.term_row.len() + self.mu_rows.iter().position(|&r| r == row).expect("row has a slack")
    }

    /// Strictly feasible point built from a strictly feasible `x`.
    pub fn start(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(self.dim());
        z.rows_mut(0, self.nx).copy_from(x);
        let mu = self.p.mu_star(x);
        for &row in &self.mu_rows {
            z[self.mu_index(row)] = mu[row] + 1.0;
        }
        let s = self.p.log_args(x);
        for (i, &row) in self.term_row.iter().enumerate() {
            z[self.nx + i] = s[i].ln() - (mu[row] + 1.0) - 1.0;
        }
        z
    }

    /// `(log args, nonlinear slacks g_i, linear slacks)`.
    fn parts(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let x = z.rows(0, self.nx).into_owned();
        let s = self.p.log_args(&x);
        let g = DVector::from_fn(self.term_row.len(), |i, _| {
            s[i].ln() - z[self.nx + i] - z[self.mu_index(self.term_row[i])]
        });
        let sl = &self.b_lin - &self.a_lin * z;
        (s, g, sl)
    }
}

impl Problem for FullForm<'_> {
    fn dim(&self) -> usize {
        FullForm::dim(self)
    }

    fn n_barrier(&self) -> usize {
        self.b_lin.len() + self.term_row.len()
    }

    fn objective(&self, z: &DVector<f64>) -> f64 {
        z.rows(self.nx, self.term_row.len()).sum()
    }

    fn phi(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let x = z.rows(0, self.nx).into_owned();
        if self.p.log_args(&x).iter().any(|&v| v <= 0.0) {
            return None;
        }
        let (_, g, sl) = self.parts(z);
        if g.iter().chain(sl.iter()).any(|&v| !(v > 0.0)) {
            return None;
        }
        let logs: f64 = g.iter().chain(sl.iter()).map(|v| v.ln()).sum();
        Some(-self.objective(z) - t * logs)
    }

    fn derivs(&self, z: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let nz = self.dim();
        let (s, g, sl) = self.parts(z);
        let inv_sl = sl.map(|v| 1.0 / v);
        let mut grad = self.a_lin.tr_mul(&inv_sl) * t;
        let scaled = DMatrix::from_fn(self.a_lin.nrows(), nz, |i, j| self.a_lin[(i, j)] * inv_sl[i]);
        let mut hess = scaled.tr_mul(&scaled) * t;
        for i in 0..self.term_row.len() {
            grad[self.nx + i] -= 1.0;
            let mut dg = DVector::zeros(nz);
            let wi = self.p.w.row(i).transpose() / s[i];
            dg.rows_mut(0, self.nx).copy_from(&wi);
            dg[self.nx + i] = -1.0;
            dg[self.mu_index(self.term_row[i])] = -1.0;
            grad -= &dg * (t / g[i]);
            hess += &dg * dg.transpose() * (t / (g[i] * g[i]));
            let xx = &wi * wi.transpose() * (t / g[i]);
            let mut block = hess.view_mut((0, 0), (self.nx, self.nx));
            block += xx;
        }
        (grad, hess)
    }
}
