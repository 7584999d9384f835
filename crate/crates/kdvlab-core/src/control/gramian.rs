use crate::error::{KdvError, Result};
use crate::sim::smallest_pairs;
use crate::numerics::CompositeGauss;
use crate::spectral::{is_resonant_length, CaseSpec, EigenPair, End, Field, TraceFunctional, UncontrollableMode};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

/// Observed trace of each real basis vector, ordered (a₀, b₀, a₁, b₁, …).
/// f_a = (0, v) has no θ part; f_b = (−v(L−x), 0) has θ^{(k)}(x) = −(−1)^k v^{(k)}(L−x).
pub fn trace_row(pairs: &[EigenPair], f: TraceFunctional) -> Vec<f64> {
    let mut row = Vec::with_capacity(2 * pairs.len());
    for p in pairs {
        let x = match f.end {
            End::Left => 0.0,
            End::Right => p.l,
        };
        let k = f.order;
        let (a, b) = match f.field {
            Field::U => (p.deriv(k, x), 0.0),
            Field::Theta => {
                let s = if k % 2 == 0 { -1.0 } else { 1.0 };
                (0.0, s * p.deriv(k, p.l - x))
            }
        };
        row.push(a);
        row.push(b);
    }
    row
}

/// ∫₀ᵀ cos(wt) dt.
fn cos_int(w: f64, t: f64) -> f64 {
    let z = w * t;
    if z.abs() < 1e-6 {
        t * (1.0 - z * z / 6.0)
    } else {
        z.sin() / w
    }
}

/// ∫₀ᵀ sin(wt) dt.
fn sin_int(w: f64, t: f64) -> f64 {
    let z = w * t;
    if z.abs() < 1e-6 {
        z * t / 2.0 * (1.0 - z * z / 12.0)
    } else {
        let s = (z / 2.0).sin();
        2.0 * s * s / w
    }
}

/// The observed signal of coordinate i is A_i cos(λt) + B_i sin(λt).
fn signal_coeffs(row: &[f64], i: usize) -> (f64, f64) {
    let (ta, tb) = (row[2 * (i / 2)], row[2 * (i / 2) + 1]);
    if i % 2 == 0 {
        (ta, -tb)
    } else {
        (tb, ta)
    }
}

/// Closed-form ∫₀ᵀ (τᵀe^{Ωt}e_i)(τᵀe^{Ωt}e_j) dt summed over the observed rows.
pub fn gramian_matrix(lambdas: &[f64], rows: &[Vec<f64>], t: f64) -> DMatrix<f64> {
    let dim = 2 * lambdas.len();
    let upper: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let p = lambdas[i / 2];
            (i..dim)
                .map(|j| {
                    let q = lambdas[j / 2];
                    let cc = 0.5 * (cos_int(p - q, t) + cos_int(p + q, t));
                    let ss = 0.5 * (cos_int(p - q, t) - cos_int(p + q, t));
                    let cs = 0.5 * (sin_int(q + p, t) + sin_int(q - p, t));
                    let sc = 0.5 * (sin_int(p + q, t) + sin_int(p - q, t));
                    rows.iter()
                        .map(|row| {
                            let (ai, bi) = signal_coeffs(row, i);
                            let (aj, bj) = signal_coeffs(row, j);
                            ai * aj * cc + ai * bj * cs + bi * aj * sc + bi * bj * ss
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(dim, dim);
    for (i, r) in upper.iter().enumerate() {
        for (off, &v) in r.iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct GramianReport {
    pub case_id: u8,
    pub l: f64,
    pub t: f64,
    pub modes: usize,
    pub lambdas: Vec<f64>,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns match `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
    /// max/min, infinite when min ≤ 0.
    pub condition: f64,
}

impl GramianReport {
    pub fn from_matrix(matrix: DMatrix<f64>, case_id: u8, l: f64, t: f64, lambdas: Vec<f64>) -> Result<Self> {
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(KdvError::numerical("non-finite gramian entry"));
        }
        let eig = matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        let min_eig = eigenvalues[0];
        let max_eig = *eigenvalues.last().unwrap();
        let condition = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
        Ok(GramianReport {
            case_id,
            l,
            t,
            modes: lambdas.len(),
            lambdas,
            matrix,
            eigenvalues,
            eigenvectors,
            min_eig,
            max_eig,
            condition,
        })
    }

    pub fn ratio(&self) -> f64 {
        if self.max_eig > 0.0 {
            self.min_eig / self.max_eig
        } else {
            0.0
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Eigenvectors with eigenvalue ≤ rel · max-eig.
    pub fn near_null(&self, rel: f64) -> DMatrix<f64> {
        let k = self.eigenvalues.iter().take_while(|&&e| e <= rel * self.max_eig).count();
        self.eigenvectors.columns(0, k).into_owned()
    }

    /// Cosine of the angle between span(`vs`) ∋ v and the near-null eigenspace, as
    /// ‖P v‖/‖v‖ over the stacked vectors.
    pub fn null_cosine(&self, vs: &[&[f64]], rel: f64) -> f64 {
        let basis = self.near_null(rel);
        let (mut num, mut den) = (0.0, 0.0);
        for v in vs {
            let v = nalgebra::DVector::from_column_slice(v);
            den += v.norm_squared();
            num += (basis.transpose() * v).norm_squared();
        }
        if basis.ncols() == 0 || den == 0.0 {
            return 0.0;
        }
        (num / den).sqrt()
    }

    /// Rows `i,j,value` of the full matrix.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut out = Vec::with_capacity(self.matrix.len());
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                out.push(vec![i.to_string(), j.to_string(), format!("{:.16e}", self.matrix[(i, j)])]);
            }
        }
        out
    }
}

pub const GRAMIAN_CSV_HEADER: [&str; 3] = ["i", "j", "value"];

/// Gramian on the span of `pairs`, without the L ∉ 2πℤ precondition.
pub fn gramian_from_pairs(pairs: &[EigenPair], l: f64, t: f64, case: &CaseSpec) -> Result<GramianReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(KdvError::validation("T must be positive"));
    }
    if pairs.is_empty() {
        return Err(KdvError::validation("empty modal basis"));
    }
    let rows: Vec<Vec<f64>> = case.observed().iter().map(|&f| trace_row(pairs, f)).collect();
    let lambdas: Vec<f64> = pairs.iter().map(|p| p.lambda).collect();
    let g = gramian_matrix(&lambdas, &rows, t);
    GramianReport::from_matrix(g, case.id, l, t, lambdas)
}

/// As `observability_gramian` but admitting L ∈ 2πℤ.
pub fn observability_gramian_allow_resonant(l: f64, t: f64, case: &CaseSpec, modes: usize) -> Result<GramianReport> {
    if modes < 4 {
        return Err(KdvError::validation(format!("modes: need at least 4, got {modes}")));
    }
    gramian_from_pairs(&smallest_pairs(l, modes)?, l, t, case)
}

/// Observability Gramian of `case` on the `modes` eigenpairs of B with smallest |λ|.
pub fn observability_gramian(l: f64, t: f64, case: &CaseSpec, modes: usize) -> Result<GramianReport> {
    if is_resonant_length(l) {
        return Err(KdvError::validation(format!("L = {l} lies in 2πZ")));
    }
    observability_gramian_allow_resonant(l, t, case, modes)
}

/// Real and imaginary parts of the coordinates of an explicit A-eigenmode (θ, u) in the
/// real basis: ⟨(θ, u), f_a⟩ = ∫ u v, ⟨(θ, u), f_b⟩ = −∫ θ(x) v(L−x).
pub fn mode_coordinates(mode: &UncontrollableMode, pairs: &[EigenPair]) -> (Vec<f64>, Vec<f64>) {
    let q = CompositeGauss::new(0.0, mode.l, 64, 10);
    let mut re = Vec::with_capacity(2 * pairs.len());
    let mut im = Vec::with_capacity(2 * pairs.len());
    for p in pairs {
        let a_re = q.integrate(|x| mode.u(0, x).re * p.value(x));
        let a_im = q.integrate(|x| mode.u(0, x).im * p.value(x));
        let b_re = -q.integrate(|x| mode.theta(0, x).re * p.value(mode.l - x));
        let b_im = -q.integrate(|x| mode.theta(0, x).im * p.value(mode.l - x));
        re.extend([a_re, b_re]);
        im.extend([a_im, b_im]);
    }
    (re, im)
}
