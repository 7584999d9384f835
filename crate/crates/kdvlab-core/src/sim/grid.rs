use crate::error::{KdvError, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid with `n` interior points, h = L/(n+1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub l: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(KdvError::validation("grid length L must be positive"));
        }
        if n < 16 {
            return Err(KdvError::validation(format!("grid needs n >= 16 interior points, got {n}")));
        }
        Ok(Grid { l, n, h: l / (n + 1) as f64 })
    }

    /// Coordinate of interior point i (0-based).
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// (η, v) at the interior points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
}

impl StateField {
    pub fn zeros(n: usize) -> Self {
        StateField { eta: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn from_fn(grid: &Grid, eta: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> Self {
        StateField { eta: grid.points().into_iter().map(&eta).collect(), v: grid.points().into_iter().map(&v).collect() }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// h-weighted squared norm; equals trapezoid quadrature when boundary values vanish.
    pub fn norm_sq(&self, grid: &Grid) -> f64 {
        grid.dot(&self.eta, &self.eta) + grid.dot(&self.v, &self.v)
    }

    pub fn norm(&self, grid: &Grid) -> f64 {
        self.norm_sq(grid).sqrt()
    }

    pub fn inner(&self, other: &StateField, grid: &Grid) -> f64 {
        grid.dot(&self.eta, &other.eta) + grid.dot(&self.v, &other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> StateField {
        StateField { eta: self.eta.iter().map(|x| x * s).collect(), v: self.v.iter().map(|x| x * s).collect() }
    }

    pub fn axpy(&mut self, a: f64, other: &StateField) {
        for (x, y) in self.eta.iter_mut().zip(&other.eta) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.eta.len() != grid.n || self.v.len() != grid.n {
            return Err(KdvError::validation(format!(
                "state has {}/{} samples, grid has {}",
                self.eta.len(),
                self.v.len(),
                grid.n
            )));
        }
        if !self.is_finite() {
            return Err(KdvError::validation("state has non-finite entries"));
        }
        Ok(())
    }
}
