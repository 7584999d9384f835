use super::grid::{Grid, StateField};
use crate::error::{KdvError, Result};
use crate::spectral::{eig_b_allow_resonant, EigenPair};
use serde::Serialize;

/// Real eigenbasis of A from eigenpairs of B: f_a = (0, v(x)), f_b = (−v(L−x), 0),
/// with A f_a = −λ f_b and A f_b = λ f_a. Coordinates are ordered (a₀, b₀, a₁, b₁, …).
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub grid: Grid,
    pub pairs: Vec<EigenPair>,
    pub fa: Vec<StateField>,
    pub fb: Vec<StateField>,
}

impl ModalBasis {
    pub fn from_pairs(grid: Grid, pairs: Vec<EigenPair>) -> Result<Self> {
        if pairs.iter().any(|p| (p.l - grid.l).abs() > 1e-12 * grid.l) {
            return Err(KdvError::validation("eigenpairs and grid disagree on L"));
        }
        let xs = grid.points();
        let fa = pairs
            .iter()
            .map(|p| StateField { eta: vec![0.0; grid.n], v: xs.iter().map(|&x| p.value(x)).collect() })
            .collect();
        let fb = pairs
            .iter()
            .map(|p| StateField { eta: xs.iter().map(|&x| -p.value(grid.l - x)).collect(), v: vec![0.0; grid.n] })
            .collect();
        Ok(ModalBasis { grid, pairs, fa, fb })
    }

    /// The `modes` eigenpairs of B with smallest |λ|.
    pub fn smallest(grid: Grid, modes: usize) -> Result<Self> {
        Self::from_pairs(grid, smallest_pairs(grid.l, modes)?)
    }

    pub fn modes(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn vector(&self, i: usize) -> &StateField {
        if i % 2 == 0 {
            &self.fa[i / 2]
        } else {
            &self.fb[i / 2]
        }
    }

    pub fn project(&self, y: &StateField) -> Vec<f64> {
        (0..self.dim()).map(|i| self.vector(i).inner(y, &self.grid)).collect()
    }

    pub fn reconstruct(&self, q: &[f64]) -> StateField {
        let mut y = StateField::zeros(self.grid.n);
        for (i, &c) in q.iter().enumerate() {
            y.axpy(c, self.vector(i));
        }
        y
    }

    /// max |⟨f_i, f_j⟩_h − δ_ij|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let ip = self.vector(i).inner(self.vector(j), &self.grid);
                worst = worst.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

pub fn smallest_pairs(l: f64, modes: usize) -> Result<Vec<EigenPair>> {
    if modes == 0 {
        return Err(KdvError::validation("need at least one mode"));
    }
    let m = modes as i64;
    let mut pairs = eig_b_allow_resonant(l, -m, m)?.pairs;
    pairs.sort_by(|a, b| a.lambda.abs().total_cmp(&b.lambda.abs()).then(a.lambda.total_cmp(&b.lambda)));
    pairs.truncate(modes);
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(pairs)
}

/// Exact flow of q̇_a = λ q_b, q̇_b = −λ q_a.
pub fn rotate(q: &[f64], lambdas: &[f64], t: f64) -> Vec<f64> {
    let mut out = q.to_vec();
    for (k, &lam) in lambdas.iter().enumerate() {
        let (s, c) = (lam * t).sin_cos();
        let (a, b) = (q[2 * k], q[2 * k + 1]);
        out[2 * k] = c * a + s * b;
        out[2 * k + 1] = -s * a + c * b;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ModalPropagation {
    pub state: StateField,
    pub coords: Vec<f64>,
    /// ‖init − P init‖ / ‖init‖.
    pub projection_loss: f64,
}

/// Project `init` on the basis span and evolve the coordinates exactly to time t.
pub fn propagate_modal(init: &StateField, t: f64, basis: &ModalBasis) -> Result<ModalPropagation> {
    init.validate(&basis.grid)?;
    let defect = basis.orthonormality_defect();
    if defect > 1e-6 {
        return Err(KdvError::numerical(format!("modal basis not orthonormal on the grid (defect {defect:e})")));
    }
    let q0 = basis.project(init);
    let mut rest = init.clone();
    rest.axpy(-1.0, &basis.reconstruct(&q0));
    let n0 = init.norm(&basis.grid);
    let projection_loss = if n0 > 0.0 { rest.norm(&basis.grid) / n0 } else { 0.0 };
    let coords = rotate(&q0, &basis.lambdas(), t);
    Ok(ModalPropagation { state: basis.reconstruct(&coords), coords, projection_loss })
}
