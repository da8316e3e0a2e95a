//! Bessel function of the first kind, order one.
//!
//! Power series below `SERIES_LIMIT`, Hankel asymptotic expansion above it.
//! Both branches are accurate to better than 1e-10 absolute on [0, 50].

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 12.0;

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT { series(ax) } else { asymptotic(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn series(x: f64) -> f64 {
    // sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    let h = 0.5 * x;
    let q = -h * h;
    let mut term = h;
    let mut sum = term;
    for k in 0..200 {
        let k = k as f64;
        term *= q / ((k + 1.0) * (k + 2.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // J1(x) = sqrt(2/(pi x)) (P cos w - Q sin w), w = x - 3pi/4, with
    // a_k = prod_{j=1..k} (4 - (2j-1)^2) / (k! 8^k).
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        // stop at the smallest term: the series only converges asymptotically
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let w = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Miller backward recurrence normalized by J0 + 2 sum J_2k = 1.
    fn j1_recurrence(x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let start = 2 * ((x as usize + 60) / 2);
        let (mut jp1, mut j) = (0.0f64, 1e-300f64);
        let mut norm = 0.0;
        let mut j1 = 0.0;
        for n in (1..=start).rev() {
            let jm1 = 2.0 * n as f64 / x * j - jp1;
            jp1 = j;
            j = jm1;
            // j now holds J_{n-1}
            if n - 1 == 1 {
                j1 = j;
            }
            if (n - 1) % 2 == 0 && n - 1 > 0 {
                norm += 2.0 * j;
            }
            if j.abs() > 1e250 {
                j *= 1e-250;
                jp1 *= 1e-250;
                j1 *= 1e-250;
                norm *= 1e-250;
            }
        }
        norm += j; // J0
        j1 / norm
    }

    #[test]
    fn matches_recurrence_on_zero_to_fifty() {
        let mut worst = 0.0f64;
        for i in 0..=5000 {
            let x = i as f64 * 0.01;
            worst = worst.max((bessel_j1(x) - j1_recurrence(x)).abs());
        }
        assert!(worst < 1e-10, "worst abs error {worst:e}");
    }

    #[test]
    fn reference_values() {
        assert!((bessel_j1(1.6) - 0.569_895_935_4).abs() < 1e-9);
        assert!(bessel_j1(3.831_705_970_207_512).abs() < 1e-12);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j1(-2.0), -bessel_j1(2.0));
    }
}
