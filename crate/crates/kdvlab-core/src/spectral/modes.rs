use super::operator_b::EigenPair;
use crate::critical::n_witness;
use crate::error::{KdvError, Result};
use crate::numerics::{min_singular_pair, CompositeGauss, C64, I};
use nalgebra::DMatrix;
use std::f64::consts::FRAC_1_SQRT_2;

/// Samples of the eigenfunction on `grid`, phase-rotated so that the largest
/// sample is real positive and scaled to unit trapezoid norm.
pub fn eigenfunction_samples(pair: &EigenPair, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 2 || grid[0] < -1e-12 || *grid.last().unwrap() > pair.l * (1.0 + 1e-12) {
        return Err(KdvError::validation("grid must lie in [0, L] with at least two points"));
    }
    let raw: Vec<C64> = grid.iter().map(|&x| pair.raw(0, x)).collect();
    let top = raw.iter().cloned().fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    if top.norm() == 0.0 {
        return Err(KdvError::numerical("eigenfunction vanishes on the grid"));
    }
    let rot = top.conj() / top.norm();
    let rotated: Vec<C64> = raw.iter().map(|z| z * rot).collect();
    let worst = rotated.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > 1e-8 * top.norm() {
        return Err(KdvError::numerical(format!("phase residual {:e} exceeds tolerance", worst / top.norm())));
    }
    let re: Vec<f64> = rotated.iter().map(|z| z.re).collect();
    let mut n2 = 0.0;
    for i in 1..grid.len() {
        n2 += 0.5 * (grid[i] - grid[i - 1]) * (re[i] * re[i] + re[i - 1] * re[i - 1]);
    }
    let n = n2.sqrt();
    Ok(re.into_iter().map(|v| v / n).collect())
}

/// v″(0)/v″(L).
pub fn second_trace_ratio(pair: &EigenPair) -> Result<C64> {
    let num = pair.raw(2, 0.0);
    let den = pair.raw(2, pair.l);
    let scale = pair.roots.iter().map(|r| r.norm_sqr()).fold(0.0, f64::max)
        * pair.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if den.norm() < 1e-12 * scale.max(1e-300) {
        return Err(KdvError::numerical("v''(L) vanishes: trace ratio undefined"));
    }
    Ok(num / den)
}

/// Eigenvector of A sampled on a grid.
#[derive(Debug, Clone)]
pub struct AEigenMode {
    pub sign: i8,
    pub grid: Vec<f64>,
    pub theta: Vec<C64>,
    pub u: Vec<C64>,
    pub eigenvalue: C64,
}

impl AEigenMode {
    pub fn re_parts(&self) -> (Vec<f64>, Vec<f64>) {
        (self.theta.iter().map(|z| z.re).collect(), self.u.iter().map(|z| z.re).collect())
    }
}

/// The pair θ± = ∓(i/√2) v(L−x), u± = v(x)/√2 with eigenvalues ±iλ.
#[allow(non_snake_case)]
pub fn lift_to_A(pair: &EigenPair, grid: &[f64]) -> Result<(AEigenMode, AEigenMode)> {
    let l = pair.l;
    let v = |k: u32, x: f64| pair.deriv(k, x);
    let mut worst: f64 = 0.0;
    let scale = 1.0 + pair.lambda.abs();
    for &x in grid {
        // A(θ⁺,u⁺) = (−u′−u‴, −θ′−θ‴) against iλ(θ⁺,u⁺); derivatives of v(L−x) flip sign with odd order
        let th = |k: u32| -I * FRAC_1_SQRT_2 * v(k, l - x) * if k % 2 == 0 { 1.0 } else { -1.0 };
        let u = |k: u32| C64::new(FRAC_1_SQRT_2 * v(k, x), 0.0);
        let lam = I * pair.lambda;
        let r1 = -u(1) - u(3) - lam * th(0);
        let r2 = -th(1) - th(3) - lam * u(0);
        worst = worst.max(r1.norm()).max(r2.norm());
    }
    let vmax = pair.roots.iter().map(|r| r.norm()).fold(1.0, f64::max).powi(3);
    if worst > 1e-8 * scale.max(vmax) {
        return Err(KdvError::numerical(format!("A-eigenrelation residual {worst:e}")));
    }
    let theta_p: Vec<C64> = grid.iter().map(|&x| -I * FRAC_1_SQRT_2 * v(0, l - x)).collect();
    let u_p: Vec<C64> = grid.iter().map(|&x| C64::new(FRAC_1_SQRT_2 * v(0, x), 0.0)).collect();
    let plus = AEigenMode {
        sign: 1,
        grid: grid.to_vec(),
        theta: theta_p.clone(),
        u: u_p.clone(),
        eigenvalue: I * pair.lambda,
    };
    let minus = AEigenMode {
        sign: -1,
        grid: grid.to_vec(),
        theta: theta_p.iter().map(|z| -z).collect(),
        u: u_p,
        eigenvalue: -I * pair.lambda,
    };
    Ok((plus, minus))
}

/// Eigenmode (y(x)+y(L−x), y(x)−y(L−x)) of A at a length of 𝒩, with
/// y = Σ c_k e^{iμ_k x} and y(0) = y(L) = y′(0) = 0.
#[derive(Debug, Clone)]
pub struct UncontrollableMode {
    pub k: i64,
    pub l_index: i64,
    pub l: f64,
    pub mu: [f64; 3],
    pub p: f64,
    coeffs: [C64; 3],
}

impl UncontrollableMode {
    pub fn new(k: i64, l_index: i64) -> Result<Self> {
        if k < 1 || l_index < 1 {
            return Err(KdvError::validation("k and l must be positive"));
        }
        let w = n_witness(k, l_index);
        let mut m = DMatrix::zeros(3, 3);
        for j in 0..3 {
            let mu = w.mu[j];
            m[(0, j)] = C64::new(1.0, 0.0);
            m[(1, j)] = (I * mu * w.l).exp();
            m[(2, j)] = I * mu;
        }
        let (s, v) = min_singular_pair(&m);
        if s > 1e-8 {
            return Err(KdvError::numerical(format!("no nullspace at ({k},{l_index}): sigma = {s:e}")));
        }
        let mut mode = UncontrollableMode { k, l_index, l: w.l, mu: w.mu, p: w.p, coeffs: [v[0], v[1], v[2]] };
        let quad = CompositeGauss::new(0.0, w.l, 64, 12);
        let n2 = quad.integrate(|x| mode.theta(0, x).norm_sqr() + mode.u(0, x).norm_sqr());
        let mut top = C64::new(0.0, 0.0);
        for i in 0..=1024 {
            let z = mode.theta(0, w.l * i as f64 / 1024.0);
            if z.norm() > top.norm() {
                top = z;
            }
        }
        let rot = top.conj() / top.norm() / n2.sqrt();
        mode.coeffs = mode.coeffs.map(|c| c * rot);
        Ok(mode)
    }

    fn y(&self, k: u32, x: f64) -> C64 {
        (0..3).map(|j| self.coeffs[j] * (I * self.mu[j]).powu(k) * (I * self.mu[j] * x).exp()).sum()
    }

    pub fn theta(&self, k: u32, x: f64) -> C64 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.y(k, x) + s * self.y(k, self.l - x)
    }

    pub fn u(&self, k: u32, x: f64) -> C64 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.y(k, x) - s * self.y(k, self.l - x)
    }

    /// A-eigenvalue −ip.
    pub fn eigenvalue(&self) -> C64 {
        -I * self.p
    }

    pub fn sample(&self, grid: &[f64]) -> AEigenMode {
        AEigenMode {
            sign: -1,
            grid: grid.to_vec(),
            theta: grid.iter().map(|&x| self.theta(0, x)).collect(),
            u: grid.iter().map(|&x| self.u(0, x)).collect(),
            eigenvalue: self.eigenvalue(),
        }
    }
}

pub fn uncontrollable_mode(k: i64, l: i64, grid: &[f64]) -> Result<(f64, AEigenMode)> {
    let m = UncontrollableMode::new(k, l)?;
    Ok((m.l, m.sample(grid)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eig_b;
    use std::f64::consts::PI;

    #[test]
    fn boundary_values_vanish() {
        let s = eig_b(PI, -3, 5).unwrap();
        for p in &s.pairs {
            assert!(p.value(0.0).abs() <= 1e-9);
            assert!(p.value(PI).abs() <= 1e-9);
            assert!(p.deriv(1, PI).abs() <= 1e-9 * (1.0 + p.lambda.abs()));
        }
    }

    #[test]
    fn ode_residual_small() {
        let l = 4.0;
        let s = eig_b(l, -3, 4).unwrap();
        for p in &s.pairs {
            for i in 1..=100 {
                let x = l * i as f64 / 101.0;
                let r = -p.deriv(3, l - x) - p.deriv(1, l - x) - p.lambda * p.value(x);
                assert!(r.abs() <= 1e-8 * p.lambda.abs().max(1.0), "{} {r}", p.lambda);
            }
        }
    }

    #[test]
    fn lifted_modes_follow_definition() {
        let s = eig_b(3.0, 1, 2).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| 3.0 * i as f64 / 50.0).collect();
        let (plus, minus) = lift_to_A(&s.pairs[0], &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let v = s.pairs[0].value(3.0 - x);
            assert!((plus.theta[i] - (-I * FRAC_1_SQRT_2 * v)).norm() <= 1e-12);
            assert!((minus.theta[i] + plus.theta[i]).norm() <= 1e-15);
        }
        assert!((plus.eigenvalue + minus.eigenvalue).norm() < 1e-15);
    }

    #[test]
    fn samples_are_real_and_unit() {
        let s = eig_b(3.0, 1, 1).unwrap();
        let grid: Vec<f64> = (0..=2000).map(|i| 3.0 * i as f64 / 2000.0).collect();
        let v = eigenfunction_samples(&s.pairs[0], &grid).unwrap();
        let n2: f64 = (1..grid.len()).map(|i| 0.5 * (grid[i] - grid[i - 1]) * (v[i] * v[i] + v[i - 1] * v[i - 1])).sum();
        assert!((n2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncontrollable_mode_one_one() {
        let m = UncontrollableMode::new(1, 1).unwrap();
        assert!((m.l - 2.0 * PI).abs() < 1e-14);
        assert!(m.theta(1, m.l).norm() <= 1e-10);
        assert!(m.u(1, 0.0).norm() <= 1e-10);
        assert!(m.mu.iter().sum::<f64>().abs() < 1e-15);
        // θ ∝ cos x − 1, u = 0
        let c = m.theta(0, PI) / -2.0;
        for &x in &[0.4, 2.0, 5.5] {
            assert!((m.theta(0, x) - c * (x.cos() - 1.0)).norm() < 1e-10);
            assert!(m.u(0, x).norm() < 1e-10);
        }
        let quad = CompositeGauss::new(0.0, m.l, 64, 12);
        let n2 = quad.integrate(|x| m.theta(0, x).norm_sqr() + m.u(0, x).norm_sqr());
        assert!((n2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncontrollable_mode_is_an_eigenmode() {
        for (k, l) in [(1, 2), (2, 1), (2, 3)] {
            let m = UncontrollableMode::new(k, l).unwrap();
            let lam = m.eigenvalue();
            for &x in &[0.3, 1.9, 0.7 * m.l] {
                assert!((-m.u(1, x) - m.u(3, x) - lam * m.theta(0, x)).norm() < 1e-9);
                assert!((-m.theta(1, x) - m.theta(3, x) - lam * m.u(0, x)).norm() < 1e-9);
            }
            for tr in [m.theta(0, 0.0), m.theta(0, m.l), m.theta(1, 0.0), m.theta(1, m.l), m.u(0, 0.0), m.u(0, m.l), m.u(1, 0.0), m.u(1, m.l)] {
                assert!(tr.norm() < 1e-9);
            }
        }
    }
}
