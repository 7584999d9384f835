use super::boundary::boundary_matrix;
use super::cases::CaseSpec;
use crate::error::{KdvError, Result};
use crate::numerics::{golden_section, min_singular_value, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

pub const DIP_THRESHOLD: f64 = 1e-8;

/// σ_min of the case-`case` boundary matrix at λ = −ip.
pub fn min_sv(l: f64, case: &CaseSpec, p: f64) -> Result<f64> {
    let m = boundary_matrix(C64::new(0.0, -p), l, case)?;
    Ok(min_singular_value(&m))
}

/// Symmetric p grid, uniform in s = sign(p)|p|^{1/3} with spacing (2π/L)/10,
/// reaching the asymptotic eigenvalue of index n_max.
pub fn default_p_grid(l: f64, n_max: usize) -> Vec<f64> {
    let s_max = (PI / 6.0 + TAU * n_max as f64) / l;
    let ds = TAU / l / 10.0;
    let m = (s_max / ds).ceil() as i64;
    (-m..=m).map(|i| (i as f64 * ds).powi(3)).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Dip {
    pub p: f64,
    pub sigma: f64,
    /// Samples across the bracket were consistent with a single minimum.
    pub unimodal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub l: f64,
    pub case_id: u8,
    pub points: Vec<(f64, f64)>,
    /// Every refined local minimum of the sampled curve.
    pub minima: Vec<Dip>,
    pub threshold: f64,
}

impl SweepReport {
    pub fn dips(&self) -> Vec<Dip> {
        self.minima.iter().copied().filter(|d| d.sigma <= self.threshold).collect()
    }

    pub fn grid_min(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    pub fn refined_min(&self) -> Option<Dip> {
        self.minima.iter().copied().min_by(|a, b| a.sigma.total_cmp(&b.sigma))
    }
}

/// Golden-section refinement of σ_min on [lo, hi].
pub fn refine_dip(l: f64, case: &CaseSpec, lo: f64, hi: f64) -> Dip {
    let f = |p: f64| min_sv(l, case, p).unwrap_or(f64::INFINITY);
    let probe: Vec<f64> = (0..=8).map(|i| f(lo + (hi - lo) * i as f64 / 8.0)).collect();
    let mut descending = true;
    let mut unimodal = true;
    for w in probe.windows(2) {
        let rising = w[1] > w[0] * (1.0 + 1e-12);
        let falling = w[1] < w[0] * (1.0 - 1e-12);
        if descending && rising {
            descending = false;
        } else if !descending && falling {
            unimodal = false;
        }
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let (p, sigma) = golden_section(f, lo, hi, 1e-15 * scale);
    Dip { p, sigma, unimodal }
}

/// σ_min over a p grid with refined local minima.
pub fn min_sv_sweep(l: f64, case: &CaseSpec, grid: &[f64]) -> Result<SweepReport> {
    if !(l > 0.0) || grid.len() < 3 {
        return Err(KdvError::validation("need L > 0 and at least three grid points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(KdvError::validation("p grid must be strictly increasing"));
    }
    let sig: Vec<f64> = grid.par_iter().map(|&p| min_sv(l, case, p).unwrap_or(f64::INFINITY)).collect();
    let n = grid.len();
    let brackets: Vec<(f64, f64)> = (0..n)
        .filter(|&i| {
            let left = i == 0 || sig[i] <= sig[i - 1];
            let right = i == n - 1 || sig[i] <= sig[i + 1];
            left && right && sig[i].is_finite()
        })
        .map(|i| (grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]))
        .collect();
    let minima = brackets.par_iter().map(|&(a, b)| refine_dip(l, case, a, b)).collect();
    Ok(SweepReport {
        l,
        case_id: case.id,
        points: grid.iter().copied().zip(sig).collect(),
        minima,
        threshold: DIP_THRESHOLD,
    })
}
