use super::gramian::{gramian_matrix, trace_row, GramianReport};
use crate::error::{KdvError, Result};
use crate::numerics::gauss_legendre;
use crate::sim::{simulate_with, smallest_pairs, Grid, Mode, SimConfig, StateField, TimeSeries};
use crate::spectral::{End, Field, TraceFunctional};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub const CONDITION_CAP: f64 = 1e12;

/// The control enters where the observed trace θ_x(L) is read.
pub const CONTROL_TRACE: TraceFunctional = TraceFunctional::new(Field::Theta, 1, End::Right);

/// Generator M of the controlled modal system q̇ = M q + τ g.
#[derive(Debug, Clone)]
enum Flow {
    Rotation(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl Flow {
    /// e^{Mt}.
    fn exp(&self, t: f64) -> DMatrix<f64> {
        match self {
            Flow::Rotation(lambdas) => {
                let dim = 2 * lambdas.len();
                let mut e = DMatrix::zeros(dim, dim);
                for (k, &lam) in lambdas.iter().enumerate() {
                    let (s, c) = (lam * t).sin_cos();
                    e[(2 * k, 2 * k)] = c;
                    e[(2 * k, 2 * k + 1)] = s;
                    e[(2 * k + 1, 2 * k)] = -s;
                    e[(2 * k + 1, 2 * k + 1)] = c;
                }
                e
            }
            Flow::Dense(m) => (m * t).exp(),
        }
    }
}

/// Minimal-norm control steering the modal truncation from `init` to `target`.
#[derive(Debug, Clone, Serialize)]
pub struct HumSolution {
    pub l: f64,
    pub t: f64,
    pub alpha: f64,
    pub modes: usize,
    pub lambdas: Vec<f64>,
    pub tau: Vec<f64>,
    pub init: Vec<f64>,
    pub target: Vec<f64>,
    /// Adjoint datum: g(s) = τᵀ e^{Mᵀ(T−s)} ξ.
    pub xi: Vec<f64>,
    pub signal: TimeSeries,
    pub condition: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// e^{MT} q₀ + W ξ.
    pub predicted_terminal: Vec<f64>,
    pub predicted_error: f64,
    /// ‖W ξ − rhs‖ and ‖rhs‖ of the Gramian solve.
    pub solve_residual: f64,
    pub rhs_norm: f64,
    #[serde(skip)]
    flow: Flow,
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl HumSolution {
    /// e^{Mσ} τ.
    pub fn kernel(&self, sigma: f64) -> Vec<f64> {
        (self.flow.exp(sigma) * dv(&self.tau)).as_slice().to_vec()
    }

    /// The synthesized control at time s, from the adjoint datum.
    pub fn control_at(&self, s: f64) -> f64 {
        self.kernel(self.t - s).iter().zip(&self.xi).map(|(a, b)| a * b).sum()
    }

    /// L² norm squared of the sampled signal (trapezoid).
    pub fn signal_norm_sq(&self) -> f64 {
        signal_norm_sq(&self.signal)
    }

    /// q(T) = e^{MT} q₀ + ∫₀ᵀ e^{M(T−s)} τ g(s) ds by composite Gauss quadrature.
    pub fn modal_terminal(&self, q0: &[f64], g: impl Fn(f64) -> f64, panels: usize, order: usize) -> Vec<f64> {
        let h = self.t / panels as f64;
        let (xs, ws) = gauss_legendre(order);
        let step = self.flow.exp(h);
        let tau = dv(&self.tau);
        let local: Vec<(f64, f64, DVector<f64>)> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let off = 0.5 * h * (x + 1.0);
                (off, 0.5 * h * w, &self.flow.exp(h - off) * &tau)
            })
            .collect();
        let mut acc = DVector::zeros(tau.len());
        for p in 0..panels {
            let s0 = p as f64 * h;
            let mut panel = DVector::zeros(tau.len());
            for (off, w, k) in &local {
                panel.axpy(w * g(s0 + off), k, 1.0);
            }
            acc = &step * acc + panel;
        }
        let free = self.flow.exp(self.t) * dv(q0);
        (free + acc).as_slice().to_vec()
    }

    /// Terminal distance to target under modal propagation of the analytic control.
    pub fn modal_terminal_error(&self, panels: usize, order: usize) -> f64 {
        let q = self.modal_terminal(&self.init, |s| self.control_at(s), panels, order);
        dist(&q, &self.target)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn signal_norm_sq(s: &TimeSeries) -> f64 {
    let v = &s.values;
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().map(|x| x * x).sum();
    s.dt * (inner + 0.5 * (v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1]))
}

/// Minimal-norm control for q̇ = (Ω − αττᵀ) q + τ g on the `modes` smallest eigenpairs,
/// sampled on `intervals` uniform steps over [0, T].
pub fn hum_control(
    init: &[f64],
    target: &[f64],
    t: f64,
    l: f64,
    alpha: f64,
    modes: usize,
    intervals: usize,
) -> Result<HumSolution> {
    if modes < 4 {
        return Err(KdvError::validation(format!("modes: need at least 4, got {modes}")));
    }
    if init.len() != 2 * modes || target.len() != 2 * modes {
        return Err(KdvError::validation(format!("init/target: expected {} modal coordinates", 2 * modes)));
    }
    if init.iter().chain(target).any(|x| !x.is_finite()) {
        return Err(KdvError::validation("init/target: non-finite coordinate"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(KdvError::validation("T must be positive"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(KdvError::validation("alpha: must be nonnegative"));
    }
    if intervals == 0 {
        return Err(KdvError::validation("intervals: must be positive"));
    }
    let pairs = smallest_pairs(l, modes)?;
    let lambdas: Vec<f64> = pairs.iter().map(|p| p.lambda).collect();
    let tau = trace_row(&pairs, CONTROL_TRACE);
    let dim = 2 * modes;

    let (flow, w) = if alpha == 0.0 {
        let flow = Flow::Rotation(lambdas.clone());
        // W = R G Rᵀ with R = e^{ΩT}
        let g = gramian_matrix(&lambdas, std::slice::from_ref(&tau), t);
        let r = flow.exp(t);
        let w = &r * g * r.transpose();
        (flow, w)
    } else {
        let tv = dv(&tau);
        let mut m = DMatrix::zeros(dim, dim);
        for (k, &lam) in lambdas.iter().enumerate() {
            m[(2 * k, 2 * k + 1)] = lam;
            m[(2 * k + 1, 2 * k)] = -lam;
        }
        m -= alpha * &tv * tv.transpose();
        let flow = Flow::Dense(m);
        let w = kernel_gramian(&flow, &tv, t, GRAMIAN_PANELS, GRAMIAN_ORDER);
        (flow, w)
    };
    let report = GramianReport::from_matrix(w.clone(), 1, l, t, lambdas.clone())?;
    if !(report.condition <= CONDITION_CAP) {
        return Err(KdvError::numerical(format!(
            "ill-conditioned gramian: condition {:.3e} exceeds {CONDITION_CAP:e} (L = {l} critical or near-critical)",
            report.condition
        )));
    }
    let free = flow.exp(t) * dv(init);
    let rhs = dv(target) - &free;
    let chol = w
        .clone()
        .cholesky()
        .ok_or_else(|| KdvError::numerical("ill-conditioned gramian: Cholesky failed"))?;
    let xi = chol.solve(&rhs);
    let reached = &w * &xi;
    let solve_residual = (&reached - &rhs).norm();
    let predicted: DVector<f64> = free + reached;

    let mut sol = HumSolution {
        l,
        t,
        alpha,
        modes,
        lambdas,
        tau,
        init: init.to_vec(),
        target: target.to_vec(),
        xi: xi.as_slice().to_vec(),
        signal: TimeSeries { dt: t / intervals as f64, values: Vec::new() },
        condition: report.condition,
        min_eig: report.min_eig,
        max_eig: report.max_eig,
        predicted_error: dist(predicted.as_slice(), target),
        predicted_terminal: predicted.as_slice().to_vec(),
        solve_residual,
        rhs_norm: rhs.norm(),
        flow,
    };
    sol.signal.values = sample_signal(&sol, intervals);
    Ok(sol)
}

const GRAMIAN_PANELS: usize = 1024;
const GRAMIAN_ORDER: usize = 10;

/// W = ∫₀ᵀ k(s) k(s)ᵀ ds with k(s) = e^{Ms} τ, by composite Gauss quadrature (PSD by construction).
fn kernel_gramian(flow: &Flow, tau: &DVector<f64>, t: f64, panels: usize, order: usize) -> DMatrix<f64> {
    let h = t / panels as f64;
    let (xs, ws) = gauss_legendre(order);
    let step = flow.exp(h);
    let local: Vec<(f64, DVector<f64>)> =
        xs.iter().zip(&ws).map(|(&x, &w)| (0.5 * h * w, flow.exp(0.5 * h * (x + 1.0)) * tau)).collect();
    let dim = tau.len();
    let mut w = DMatrix::zeros(dim, dim);
    // e^{M p h} applied to the local kernels
    let mut shift = DMatrix::identity(dim, dim);
    for _ in 0..panels {
        for (wt, k) in &local {
            let v = &shift * k;
            w.syger(*wt, &v, &v, 1.0);
        }
        shift = &step * shift;
    }
    w.fill_upper_triangle_with_lower_triangle();
    w
}

/// g(s_k) = (e^{M(T−s_k)} τ)·ξ on the uniform grid, marching back from s = T.
fn sample_signal(sol: &HumSolution, intervals: usize) -> Vec<f64> {
    let dt = sol.t / intervals as f64;
    let xi = dv(&sol.xi);
    let mut out = vec![0.0; intervals + 1];
    match &sol.flow {
        Flow::Rotation(_) => {
            for (k, o) in out.iter_mut().enumerate() {
                *o = dv(&sol.kernel(sol.t - k as f64 * dt)).dot(&xi);
            }
        }
        Flow::Dense(_) => {
            let step = sol.flow.exp(dt);
            let mut k = dv(&sol.tau);
            for i in (0..=intervals).rev() {
                out[i] = k.dot(&xi);
                k = &step * k;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminalReport {
    /// X₀ distance of the simulated terminal state to the target.
    pub error: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub target_norm: f64,
    /// error / initial norm (plain error for a zero initial state).
    pub relative_error: f64,
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
}

/// Replay a sampled control on the grid simulator with g₂ = −α η_x(L) + control.
pub fn verify_terminal(
    control: &TimeSeries,
    alpha: f64,
    init: &StateField,
    target: &StateField,
    grid: Grid,
    t_end: f64,
    steps: usize,
) -> Result<TerminalReport> {
    control.validate("control")?;
    target.validate(&grid)?;
    if steps == 0 {
        return Err(KdvError::validation("steps: must be positive"));
    }
    let dt = t_end / steps as f64;
    if control.dt > dt * (1.0 + 1e-9) {
        return Err(KdvError::validation(format!(
            "control: sample spacing {:e} coarser than simulator step {dt:e}",
            control.dt
        )));
    }
    if ((control.values.len() - 1) as f64) * control.dt < t_end * (1.0 - 1e-9) {
        return Err(KdvError::validation("control: does not cover [0, T]"));
    }
    let mode = if alpha > 0.0 { Mode::Feedback } else { Mode::LinearHomogeneous };
    let mut cfg = SimConfig::new(mode, grid.l, t_end);
    cfg.n = grid.n;
    cfg.dt = dt;
    cfg.alpha = alpha;
    let traj = simulate_with(&cfg, init, |s| control.eval(s))?;
    let y = traj.final_state();
    let mut diff = y.clone();
    diff.axpy(-1.0, target);
    let error = diff.norm(&grid);
    let initial_norm = init.norm(&grid);
    Ok(TerminalReport {
        error,
        initial_norm,
        final_norm: y.norm(&grid),
        target_norm: target.norm(&grid),
        relative_error: if initial_norm > 0.0 { error / initial_norm } else { error },
        n: grid.n,
        steps,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero_control() {
        let z = vec![0.0; 8];
        let s = hum_control(&z, &z, 1.0, 5.0, 0.0, 4, 64).unwrap();
        assert!(s.signal.values.iter().all(|&g| g == 0.0));
        assert_eq!(s.predicted_error, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = vec![0.0; 8];
        assert!(hum_control(&z, &z, 1.0, 5.0, -1.0, 4, 64).unwrap_err().is_validation());
        assert!(hum_control(&z[..6], &z, 1.0, 5.0, 0.0, 4, 64).unwrap_err().is_validation());
        assert!(hum_control(&z, &z, 0.0, 5.0, 0.0, 4, 64).unwrap_err().is_validation());
    }

    #[test]
    fn rotation_flow_matches_matrix_exponential() {
        let lam = vec![1.5, -20.0];
        let mut m = DMatrix::zeros(4, 4);
        for (k, &l) in lam.iter().enumerate() {
            m[(2 * k, 2 * k + 1)] = l;
            m[(2 * k + 1, 2 * k)] = -l;
        }
        let a = Flow::Rotation(lam).exp(0.37);
        let b = Flow::Dense(m).exp(0.37);
        assert!((a - b).amax() < 1e-12);
    }

    #[test]
    fn zero_everything_replays_to_zero() {
        let grid = Grid::new(5.0, 64).unwrap();
        let z = StateField::zeros(64);
        let c = TimeSeries { dt: 1.0 / 64.0, values: vec![0.0; 65] };
        let r = verify_terminal(&c, 0.0, &z, &z, grid, 1.0, 64).unwrap();
        assert_eq!(r.error, 0.0);
        let coarse = TimeSeries { dt: 0.5, values: vec![0.0; 3] };
        assert!(verify_terminal(&coarse, 0.0, &z, &z, grid, 1.0, 64).unwrap_err().is_validation());
    }
}
