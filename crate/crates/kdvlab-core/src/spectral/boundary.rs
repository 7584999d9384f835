use super::basis::{exp_basis, ExpColumn};
use super::cases::{CaseSpec, End, Field, TraceFunctional};
use crate::error::{KdvError, Result};
use crate::numerics::{min_singular_pair, normalize_rows, solve_cubic, C64};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Six solutions of −u′−u‴ = λθ, −θ′−θ‴ = λu: three from w = θ+u with
/// w‴+w′+λw = 0 and three from z = u−θ with z‴+z′−λz = 0.
#[derive(Debug, Clone)]
pub struct AdjointBasis {
    pub lambda: C64,
    pub l: f64,
    pub w_roots: [C64; 3],
    pub z_roots: [C64; 3],
    w: [ExpColumn; 3],
    z: [ExpColumn; 3],
}

impl AdjointBasis {
    pub fn new(lambda: C64, l: f64) -> Result<Self> {
        if !(l > 0.0) || !lambda.is_finite() {
            return Err(KdvError::validation("need L > 0 and finite lambda"));
        }
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let w_roots = solve_cubic(one, zero, one, lambda)?.roots;
        let z_roots = solve_cubic(one, zero, one, -lambda)?.roots;
        Ok(AdjointBasis { lambda, l, w_roots, z_roots, w: exp_basis(w_roots, l), z: exp_basis(z_roots, l) })
    }

    fn x_of(&self, end: End) -> f64 {
        match end {
            End::Left => 0.0,
            End::Right => self.l,
        }
    }

    /// Field derivative of each basis column at x.
    pub fn field_row(&self, field: Field, k: u32, x: f64) -> [C64; 6] {
        let mut row = [C64::new(0.0, 0.0); 6];
        let zsign = match field {
            Field::Theta => -0.5,
            Field::U => 0.5,
        };
        for j in 0..3 {
            row[j] = 0.5 * self.w[j].deriv(k, x);
            row[3 + j] = zsign * self.z[j].deriv(k, x);
        }
        row
    }

    pub fn functional_row(&self, f: TraceFunctional) -> [C64; 6] {
        self.field_row(f.field, f.order, self.x_of(f.end))
    }

    /// Row-normalized boundary matrix for the given trace functionals.
    pub fn matrix(&self, rows: &[TraceFunctional]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(rows.len(), 6);
        for (i, f) in rows.iter().enumerate() {
            let r = self.functional_row(*f);
            for j in 0..6 {
                m[(i, j)] = r[j];
            }
        }
        normalize_rows(&mut m);
        m
    }
}

/// Row-normalized m×6 boundary matrix of `case` at (λ, L).
pub fn boundary_matrix(lambda: C64, l: f64, case: &CaseSpec) -> Result<DMatrix<C64>> {
    let basis = AdjointBasis::new(lambda, l)?;
    let m = basis.matrix(&case.rows());
    if m.iter().any(|z| !z.is_finite()) {
        return Err(KdvError::numerical("degenerate basis: non-finite boundary matrix"));
    }
    Ok(m)
}

/// Boundary traces of the spectral problem, as combined in the Fourier
/// argument: α = u″(0)+θ″(0), α′ = u″(0)−θ″(0), β = u′(0),
/// γ = −u″(L)−θ″(L), γ′ = −u″(L)+θ″(L).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralCoefficients {
    pub case_id: u8,
    pub alpha: C64,
    pub alpha_prime: C64,
    pub beta: C64,
    pub gamma: C64,
    pub gamma_prime: C64,
    pub theta_x_l: C64,
}

/// Least-singular solution of the case's boundary system.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub basis: AdjointBasis,
    pub coeffs: DVector<C64>,
    pub sigma_min: f64,
    pub case_id: u8,
}

impl AdjointSolution {
    pub fn new(lambda: C64, l: f64, case: &CaseSpec) -> Result<Self> {
        let basis = AdjointBasis::new(lambda, l)?;
        let m = basis.matrix(&case.rows());
        let (sigma_min, coeffs) = min_singular_pair(&m);
        Ok(AdjointSolution { basis, coeffs, sigma_min, case_id: case.id })
    }

    pub fn eval(&self, field: Field, k: u32, x: f64) -> C64 {
        let row = self.basis.field_row(field, k, x);
        row.iter().zip(self.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn trace(&self, f: TraceFunctional) -> C64 {
        let row = self.basis.functional_row(f);
        row.iter().zip(self.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn coefficients(&self) -> SpectralCoefficients {
        let l = self.basis.l;
        let t2_0 = self.eval(Field::Theta, 2, 0.0);
        let t2_l = self.eval(Field::Theta, 2, l);
        let u2_0 = self.eval(Field::U, 2, 0.0);
        let u2_l = self.eval(Field::U, 2, l);
        SpectralCoefficients {
            case_id: self.case_id,
            alpha: u2_0 + t2_0,
            alpha_prime: u2_0 - t2_0,
            beta: self.eval(Field::U, 1, 0.0),
            gamma: -u2_l - t2_l,
            gamma_prime: -u2_l + t2_l,
            theta_x_l: self.eval(Field::Theta, 1, l),
        }
    }
}
