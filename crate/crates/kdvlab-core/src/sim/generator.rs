use super::grid::Grid;
use nalgebra::DMatrix;

/// Pentadiagonal D_v ≈ −∂ − ∂³ with v(0) = v(L) = v_x(L) = 0; the η-block is
/// D_η = −D_vᵀ so that [[0, D_v], [D_η, 0]] is exactly skew-symmetric.
#[derive(Debug, Clone)]
pub struct Generator {
    pub grid: Grid,
    /// `band[i][k]` is the entry at column i + k − 2.
    band: Vec<[f64; 5]>,
}

impl Generator {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n;
        let h = grid.h;
        let c1 = 1.0 / (2.0 * h);
        let c3 = 1.0 / (2.0 * h * h * h);
        let mut band = vec![[0.0; 5]; n];
        for (i, row) in band.iter_mut().enumerate() {
            // −(C1 + C3) with C3 = (v_{i+2} − 2v_{i+1} + 2v_{i−1} − v_{i−2})/(2h³)
            let mut r = [c3, -2.0 * c3 + c1, 0.0, 2.0 * c3 - c1, -c3];
            if i == 0 || i == n - 1 {
                // ghosts v_{−1} = −v_1 and v_{n+2} = v_n
                r[2] -= c3;
            }
            for k in 0..5 {
                let j = i as i64 + k as i64 - 2;
                if j >= 0 && j < n as i64 {
                    row[k] = r[k];
                }
            }
        }
        Generator { grid, band }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn dv_entry(&self, i: usize, j: usize) -> f64 {
        let k = j as i64 - i as i64 + 2;
        if (0..5).contains(&k) {
            self.band[i][k as usize]
        } else {
            0.0
        }
    }

    pub fn apply_dv(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..5 {
                let j = i as i64 + k as i64 - 2;
                if j >= 0 && (j as usize) < n {
                    s += self.band[i][k] * v[j as usize];
                }
            }
            out[i] = s;
        }
    }

    pub fn apply_dvt(&self, eta: &[f64], out: &mut [f64]) {
        let n = self.n();
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            for k in 0..5 {
                let j = i as i64 + k as i64 - 2;
                if j >= 0 && (j as usize) < n {
                    out[j as usize] += self.band[i][k] * eta[i];
                }
            }
        }
    }

    /// Entry (i, j) of D_v D_vᵀ.
    pub fn dvdvt_entry(&self, i: usize, j: usize) -> f64 {
        let lo = i.max(j).saturating_sub(2);
        let hi = (i.min(j) + 2).min(self.n() - 1);
        (lo..=hi).map(|k| self.dv_entry(i, k) * self.dv_entry(j, k)).sum()
    }

    pub fn dv_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.dv_entry(i, j))
    }

    /// Full 2n×2n block generator.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let dv = self.dv_dense();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, n), (n, n)).copy_from(&dv);
        g.view_mut((n, 0), (n, n)).copy_from(&(-dv.transpose()));
        g
    }

    /// Symmetric discretization J·D_v of (By)(x) = −y‴(L−x) − y′(L−x).
    pub fn reflected_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.dv_entry(n - 1 - i, j))
    }

    /// Weight of the boundary-input vector b = −e_n/h² in the η-equation.
    pub fn b_last(&self) -> f64 {
        -1.0 / (self.grid.h * self.grid.h)
    }
}

/// Discrete boundary traces from interior samples and boundary values.
pub mod traces {
    /// f_x at the right end, first order: (f(L) − f_n)/h.
    pub fn dx_right(f: &[f64], f_l: f64, h: f64) -> f64 {
        (f_l - f[f.len() - 1]) / h
    }

    /// f_x at the left end, first order: (f_1 − f(0))/h.
    pub fn dx_left(f: &[f64], f_0: f64, h: f64) -> f64 {
        (f[0] - f_0) / h
    }

    /// One-sided second derivative (2f₀ − 5f₁ + 4f₂ − f₃)/h².
    pub fn dxx_left(f: &[f64], f_0: f64, h: f64) -> f64 {
        (2.0 * f_0 - 5.0 * f[0] + 4.0 * f[1] - f[2]) / (h * h)
    }

    pub fn dxx_right(f: &[f64], f_l: f64, h: f64) -> f64 {
        let n = f.len();
        (2.0 * f_l - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / (h * h)
    }

    /// Forward-difference ∫ f_x² including both boundary cells.
    pub fn grad_sq(f: &[f64], f_0: f64, f_l: f64, h: f64) -> f64 {
        let n = f.len();
        let mut s = (f[0] - f_0).powi(2) + (f_l - f[n - 1]).powi(2);
        for i in 0..n - 1 {
            s += (f[i + 1] - f[i]).powi(2);
        }
        s / h
    }
}
