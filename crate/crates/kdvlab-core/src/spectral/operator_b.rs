use super::basis::{confluent_pair, dd_term, exp_term, growth_shift};
use super::is_resonant_length;
use crate::error::{KdvError, Result};
use crate::numerics::{golden_section, min_singular_pair, min_singular_value, normalize_rows, solve_cubic, CompositeGauss, C64, I};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

/// |λ| ≤ BAND is handled by the confluent scan, never by `char_det_b`.
pub const BAND: f64 = 0.5;

/// Column e^{r x} − i e^{r(L−x)} rescaled as e^{r(x−x1)} − i e^{−r(x−x2)}, or the
/// divided difference over r of two such columns.
#[derive(Debug, Clone, Copy)]
enum BColumn {
    Simple { r: C64, x1: f64, x2: f64 },
    Divided { ra: C64, rb: C64, x1: f64, x2: f64 },
}

impl BColumn {
    fn new(r: C64, l: f64) -> Self {
        let x1 = growth_shift(r.re, l);
        BColumn::Simple { r, x1, x2: l - x1 }
    }

    fn deriv(&self, k: u32, x: f64) -> C64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        match *self {
            BColumn::Simple { r, x1, x2 } => exp_term(k, x - x1, r) - I * sign * exp_term(k, x2 - x, r),
            BColumn::Divided { ra, rb, x1, x2 } => dd_term(k, x - x1, ra, rb) - I * sign * dd_term(k, x2 - x, ra, rb),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BBasis {
    roots: [C64; 3],
    cols: [BColumn; 3],
    l: f64,
}

impl BBasis {
    fn new(lambda: f64, l: f64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let roots = solve_cubic(one, C64::new(0.0, 0.0), one, C64::new(0.0, -lambda))?.roots;
        let mut cols = roots.map(|r| BColumn::new(r, l));
        if let Some((i, j)) = confluent_pair(&roots, l) {
            let x1 = growth_shift(0.5 * (roots[i].re + roots[j].re), l);
            cols[i] = BColumn::Simple { r: roots[i], x1, x2: l - x1 };
            cols[j] = BColumn::Divided { ra: roots[i], rb: roots[j], x1, x2: l - x1 };
        }
        Ok(BBasis { roots, cols, l })
    }

    fn simple(lambda: f64, l: f64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let roots = solve_cubic(one, C64::new(0.0, 0.0), one, C64::new(0.0, -lambda))?.roots;
        Ok(BBasis { roots, cols: roots.map(|r| BColumn::new(r, l)), l })
    }

    /// Rows v(0), v(L), v′(L), each scaled to unit norm.
    fn matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(3, 3);
        for j in 0..3 {
            m[(0, j)] = self.cols[j].deriv(0, 0.0);
            m[(1, j)] = self.cols[j].deriv(0, self.l);
            m[(2, j)] = self.cols[j].deriv(1, self.l);
        }
        normalize_rows(&mut m);
        m
    }

    fn eval(&self, coeffs: &[C64; 3], k: u32, x: f64) -> C64 {
        (0..3).map(|j| coeffs[j] * self.cols[j].deriv(k, x)).sum()
    }
}

/// Row-scaled determinant of the 3×3 boundary system of B at real λ.
pub fn char_det_b(lambda: f64, l: f64) -> Result<C64> {
    if !(l > 0.0) {
        return Err(KdvError::validation("L must be positive"));
    }
    if !(lambda.abs() > BAND) || !lambda.is_finite() {
        return Err(KdvError::validation(format!("|lambda| = {} inside the excluded band [0, {BAND}]", lambda.abs())));
    }
    let m = BBasis::simple(lambda, l)?.matrix();
    Ok(m.determinant())
}

/// Smallest singular value of the row-normalized boundary system; valid at every real λ.
pub fn b_sigma_min(lambda: f64, l: f64) -> f64 {
    match BBasis::new(lambda, l) {
        Ok(b) => min_singular_value(&b.matrix()),
        Err(_) => f64::NAN,
    }
}

/// One eigenvalue of B with the exponential representation of its eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub index: i64,
    pub lambda: f64,
    /// Roots of r³ + r = iλ, ordered by (Re, Im).
    pub roots: [C64; 3],
    /// Weights of the rescaled columns e^{r(x−x1)} − i e^{−r(x−x2)} (x1 = L for
    /// Re r > 0, else 0; x2 = L − x1).
    pub coeffs: [C64; 3],
    pub norm_constant: f64,
    pub phase: C64,
    pub l: f64,
    /// Found by the confluent scan inside |λ| ≤ BAND.
    pub in_band: bool,
    pub sigma_min: f64,
    basis: BBasis,
}

impl EigenPair {
    /// k-th derivative of the unit-norm, phase-rotated eigenfunction (complex, imaginary part ≈ 0).
    pub fn deriv_complex(&self, k: u32, x: f64) -> C64 {
        self.phase * self.basis.eval(&self.coeffs, k, x) / self.norm_constant
    }

    pub fn deriv(&self, k: u32, x: f64) -> f64 {
        self.deriv_complex(k, x).re
    }

    pub fn value(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    /// Raw exponential form before normalization.
    pub fn raw(&self, k: u32, x: f64) -> C64 {
        self.basis.eval(&self.coeffs, k, x)
    }

    pub fn quadrature(&self) -> CompositeGauss {
        quadrature_for(&self.roots, self.l)
    }

    /// CSV row `n,lambda,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,v2_0,v2_L`.
    pub fn csv_row(&self) -> Vec<String> {
        let f = |x: f64| format!("{:.16e}", x);
        let mut row = vec![self.index.to_string(), f(self.lambda)];
        for a in &self.coeffs {
            row.push(f(a.re));
            row.push(f(a.im));
        }
        row.push(f(self.deriv(2, 0.0)));
        row.push(f(self.deriv(2, self.l)));
        row
    }
}

pub const SPECTRUM_CSV_HEADER: [&str; 10] =
    ["n", "lambda", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3", "v2_0", "v2_L"];

fn quadrature_for(roots: &[C64; 3], l: f64) -> CompositeGauss {
    let rate = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let panels = ((rate * l / 2.0).ceil() as usize).max(32);
    CompositeGauss::new(0.0, l, panels, 12)
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub l: f64,
    pub pairs: Vec<EigenPair>,
    /// Index offsets of the positive and negative asymptotic branches.
    pub k1: i64,
    pub k2: i64,
    pub warnings: Vec<String>,
}

impl Spectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn get(&self, index: i64) -> Option<&EigenPair> {
        self.pairs.iter().find(|p| p.index == index)
    }
}

fn s_to_lambda(s: f64) -> f64 {
    s * s * s
}

fn polish_secant(lambda0: f64, l: f64, lo: f64, hi: f64) -> f64 {
    let det = |x: f64| char_det_b(x, l).unwrap_or(C64::new(f64::NAN, 0.0));
    let mut x0 = lambda0;
    let mut x1 = lambda0 * (1.0 + 1e-9) + 1e-12;
    let mut d0 = det(x0);
    let mut d1 = det(x1);
    let mut best = (x0, d0.norm());
    for _ in 0..30 {
        if !(d1 - d0).is_finite() || (d1 - d0).norm() == 0.0 {
            break;
        }
        let step = (d1 * (x1 - x0) / (d1 - d0)).re;
        let x2 = x1 - step;
        if !(x2 > lo && x2 < hi) {
            break;
        }
        x0 = x1;
        d0 = d1;
        x1 = x2;
        d1 = det(x1);
        if d1.norm() < best.1 {
            best = (x1, d1.norm());
        }
        if step.abs() <= 1e-15 * x1.abs() {
            break;
        }
    }
    best.0
}

/// Eigenvalues of B in the closed λ-interval spanned by `[s_lo, s_hi]³`.
fn scan_eigenvalues(l: f64, s_lo: f64, s_hi: f64) -> Vec<(f64, bool)> {
    let edge = BAND.cbrt();
    let ds = (2.0 * PI / l) / 16.0;
    let mut out = Vec::new();

    let mut run = |from: f64, to: f64| {
        if to - from <= 0.0 {
            return;
        }
        let n = ((to - from) / ds).ceil() as usize + 1;
        let s: Vec<f64> = (0..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect();
        let sig: Vec<f64> = s.par_iter().map(|&si| b_sigma_min(s_to_lambda(si), l)).collect();
        let found: Vec<f64> = (1..n)
            .into_par_iter()
            .filter(|&i| sig[i] <= sig[i - 1] && sig[i] <= sig[i + 1])
            .filter_map(|i| {
                let lo = s_to_lambda(s[i - 1]);
                let hi = s_to_lambda(s[i + 1]);
                let (x, _) = golden_section(|x| b_sigma_min(x, l), lo, hi, 1e-15 * hi.abs().max(lo.abs()));
                let x = polish_secant(x, l, lo, hi);
                (b_sigma_min(x, l) <= 1e-8).then_some(x)
            })
            .collect();
        out.extend(found.into_iter().map(|x| (x, false)));
    };
    if s_hi > edge {
        run(edge.max(s_lo), s_hi);
    }
    if s_lo < -edge {
        run(s_lo, (-edge).min(s_hi));
    }

    // inside the band the confluent basis is used and roots are located by σ_min alone
    let lo = s_to_lambda(s_lo).max(-BAND);
    let hi = s_to_lambda(s_hi).min(BAND);
    if hi > lo {
        let n = 400;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let sig: Vec<f64> = xs.iter().map(|&x| b_sigma_min(x, l)).collect();
        for i in 0..=n {
            let left = if i == 0 { f64::INFINITY } else { sig[i - 1] };
            let right = if i == n { f64::INFINITY } else { sig[i + 1] };
            if sig[i] <= left && sig[i] <= right {
                let a = xs[i.saturating_sub(1)];
                let b = xs[(i + 1).min(n)];
                let (x, v) = golden_section(|x| b_sigma_min(x, l), a, b, 1e-15);
                if v <= 1e-8 {
                    out.push((x, true));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-9 * (1.0 + b.0.abs()));
    out
}

fn build_pair(index: i64, lambda: f64, in_band: bool, l: f64) -> Result<EigenPair> {
    let basis = BBasis::new(lambda, l)?;
    let m = basis.matrix();
    let (sigma_min, v) = min_singular_pair(&m);
    let coeffs = [v[0], v[1], v[2]];
    let quad = quadrature_for(&basis.roots, l);
    let nrm2 = quad.integrate(|x| basis.eval(&coeffs, 0, x).norm_sqr());
    let norm_constant = nrm2.sqrt();
    if !(norm_constant > 0.0) || !norm_constant.is_finite() {
        return Err(KdvError::numerical(format!("eigenfunction at lambda = {lambda} has no finite norm")));
    }
    let mut best = (0.0, C64::new(1.0, 0.0));
    let samples = 2048;
    for i in 0..=samples {
        let x = l * i as f64 / samples as f64;
        let z = basis.eval(&coeffs, 0, x);
        if z.norm() > best.0 {
            best = (z.norm(), z);
        }
    }
    let phase = best.1.conj() / best.1.norm();
    let pair = EigenPair {
        index,
        lambda,
        roots: basis.roots,
        coeffs,
        norm_constant,
        phase,
        l,
        in_band,
        sigma_min,
        basis,
    };
    let mut worst: f64 = 0.0;
    for i in 0..=256 {
        let z = pair.deriv_complex(0, l * i as f64 / 256.0);
        worst = worst.max(z.im.abs());
    }
    if worst > 1e-8 * (best.0 / norm_constant).max(1.0) {
        return Err(KdvError::numerical(format!("eigenfunction at lambda = {lambda} is not real after phase rotation ({worst:e})")));
    }
    Ok(pair)
}

/// Eigenpairs of B on [0, L] with indices in `[n_from, n_to]`. Positive
/// eigenvalues are numbered 1, 2, … upward and nonpositive ones 0, −1, … downward.
pub fn eig_b(l: f64, n_from: i64, n_to: i64) -> Result<Spectrum> {
    if is_resonant_length(l) {
        return Err(KdvError::validation(format!("L = {l} lies in 2πZ")));
    }
    eig_b_allow_resonant(l, n_from, n_to)
}

/// As `eig_b` without the L ∉ 2πℤ precondition.
pub fn eig_b_allow_resonant(l: f64, n_from: i64, n_to: i64) -> Result<Spectrum> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(KdvError::validation("L must be positive"));
    }
    if n_from > n_to {
        return Err(KdvError::validation("empty index range"));
    }
    let w = 2.0 * PI / l;
    let s_hi = if n_to >= 1 { (PI / 6.0 + 2.0 * PI * (n_to as f64 + 3.0)) / l } else { 0.0 };
    let s_lo = if n_from <= 0 { -(7.0 * PI / 6.0 + 2.0 * PI * ((-n_from) as f64 + 3.0)) / l } else { 0.0 };
    let found = scan_eigenvalues(l, s_lo.min(0.0), s_hi.max(0.0));

    let mut labelled: Vec<(i64, f64, bool)> = Vec::new();
    let pos: Vec<_> = found.iter().filter(|e| e.0 > 0.0).collect();
    let nonpos: Vec<_> = found.iter().filter(|e| e.0 <= 0.0).rev().collect();
    for (i, e) in pos.iter().enumerate() {
        labelled.push((i as i64 + 1, e.0, e.1));
    }
    for (i, e) in nonpos.iter().enumerate() {
        labelled.push((-(i as i64), e.0, e.1));
    }
    labelled.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut warnings = Vec::new();
    for pair in labelled.windows(2) {
        let (sa, sb) = (pair[0].1.cbrt(), pair[1].1.cbrt());
        if sa.abs().min(sb.abs()) > 4.0 * w && (sb - sa) > 1.5 * w {
            warnings.push(format!("missed root suspected between lambda = {} and {}", pair[0].1, pair[1].1));
        }
    }

    let k1 = labelled
        .iter()
        .filter(|e| e.0 >= 1)
        .next_back()
        .map(|e| ((l * e.1.cbrt() - PI / 6.0) / (2.0 * PI) - e.0 as f64).round() as i64)
        .unwrap_or(0);
    let k2 = labelled
        .iter()
        .find(|e| e.0 <= 0)
        .map(|e| ((l * (-e.1).cbrt() - 7.0 * PI / 6.0) / (2.0 * PI) + e.0 as f64).round() as i64)
        .unwrap_or(0);

    if n_to >= 1 && !labelled.iter().any(|e| e.0 == n_to) {
        return Err(KdvError::numerical(format!("eigenvalue index {n_to} not reached by the scan")));
    }
    if n_from <= 0 && !labelled.iter().any(|e| e.0 == n_from) {
        return Err(KdvError::numerical(format!("eigenvalue index {n_from} not reached by the scan")));
    }
    let pairs = labelled
        .into_par_iter()
        .filter(|e| e.0 >= n_from && e.0 <= n_to)
        .map(|(n, lambda, in_band)| build_pair(n, lambda, in_band, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum { l, pairs, k1, k2, warnings })
}
