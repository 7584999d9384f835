//! Complex scalar utilities, cubic roots, damped Newton, small dense and banded
//! linear algebra, quadrature and one-dimensional minimization.

mod banded;
mod cubic;
mod linalg;
mod newton;
mod quad;

pub use banded::BandedCholesky;
pub use cubic::{solve_cubic, CubicRoots, RootPattern};
pub use linalg::{min_singular_pair, min_singular_value, normalize_rows};
pub use newton::{newton_analytic_system, NewtonConfig, RootResult, RootStatus};
pub use quad::{gauss_legendre, golden_section, CompositeGauss};

pub use num_complex::Complex64 as C64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// (e^z − 1)/z, entire.
pub fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..10 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

pub fn real_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sum_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_matches_direct_formula_across_switch() {
        for &r in &[1e-1, 1e-2, 2e-3, 1.1e-3, 9e-4, 1e-5] {
            let z = C64::new(r, -0.5 * r);
            let reference = if r > 1e-3 {
                (z.exp() - 1.0) / z
            } else {
                let mut t = C64::new(1.0, 0.0);
                let mut s = t;
                for k in 2..25 {
                    t = t * z / k as f64;
                    s += t;
                }
                s
            };
            assert!((phi1(z) - reference).norm() < 1e-12, "{r}");
        }
        assert_eq!(phi1(C64::new(0.0, 0.0)), C64::new(1.0, 0.0));
    }
}
