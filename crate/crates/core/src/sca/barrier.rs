//! Damped Newton log-barrier method for small dense problems of the form
//! `max f(z)` over a region described by strictly positive barrier arguments.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub init: f64,
    pub decay: f64,
    pub armijo: f64,
    pub shrink: f64,
    /// Duality-gap tolerance, relative to `1 + |f|`.
    pub tol: f64,
    pub max_newton: usize,
    pub max_centering: usize,
}

pub(crate) trait Problem {
    fn dim(&self) -> usize;
    /// Number of logarithmic barrier terms; the duality gap is `m * t`.
    fn n_barrier(&self) -> usize;
    /// Objective to be maximized.
    fn objective(&self, z: &DVector<f64>) -> f64;
    /// `-f(z) - t * sum(ln arg_i)`, or `None` outside the strict interior.
    fn phi(&self, z: &DVector<f64>, t: f64) -> Option<f64>;
    /// Gradient and Hessian of `phi`; only called at strictly feasible points.
    fn derivs(&self, z: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>);
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub z: DVector<f64>,
    pub objective: f64,
    pub degraded: bool,
}

fn newton_direction(g: &DVector<f64>, mut h: DMatrix<f64>) -> DVector<f64> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    loop {
        if let Some(ch) = h.clone().cholesky() {
            return -ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        for i in 0..h.nrows() {
            h[(i, i)] += reg;
        }
    }
}

/// Runs barrier iterations from a strictly feasible `z0`.
pub(crate) fn solve<P: Problem>(p: &P, z0: DVector<f64>, s: &Settings) -> Outcome {
    debug_assert_eq!(z0.len(), p.dim());
    let mut z = z0;
    let mut t = s.init;
    let m = p.n_barrier() as f64;
    let mut degraded = false;
    for _ in 0..s.max_centering {
        let mut stalled = false;
        for _ in 0..s.max_newton {
            let (g, h) = p.derivs(&z, t);
            let dz = newton_direction(&g, h);
            let slope = g.dot(&dz);
            if -slope / 2.0 <= 1e-12 {
                break;
            }
            let phi0 = p.phi(&z, t).expect("iterate left the interior");
            let mut step = 1.0;
            let next = loop {
                let cand = &z + &dz * step;
                if let Some(v) = p.phi(&cand, t) {
                    if v <= phi0 + s.armijo * step * slope {
                        break Some(cand);
                    }
                }
                step *= s.shrink;
                if step < 1e-14 {
                    break None;
                }
            };
            match next {
                Some(n) => z = n,
                None => {
                    // a stall with a large decrement means the centre was not reached
                    degraded |= -slope / 2.0 > 1e-6;
                    stalled = true;
                    break;
                }
            }
        }
        let f = p.objective(&z);
        if m * t <= s.tol * (1.0 + f.abs()) || stalled {
            break;
        }
        t *= s.decay;
    }
    let objective = p.objective(&z);
    Outcome { z, objective, degraded }
}
