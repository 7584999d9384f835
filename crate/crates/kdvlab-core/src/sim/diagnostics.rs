use super::generator::Generator;
use super::stepper::{boundary_inputs, Mode, Trajectory};
use crate::error::{KdvError, Result};
use serde::Serialize;

/// Time series derived from a trajectory; all cumulative quantities start at 0.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    pub eta_x_l: Vec<f64>,
    pub v_x_0: Vec<f64>,
    pub eta_xx_0: Vec<f64>,
    pub eta_xx_l: Vec<f64>,
    pub v_xx_0: Vec<f64>,
    pub v_xx_l: Vec<f64>,
    /// α ∫ η_x(·,L)² with the step-midpoint trace.
    pub dissipation: Vec<f64>,
    /// E(t) − E(0) + dissipation − ∫ u η_x(·,L), with E = ½‖y‖².
    pub energy_residual: Vec<f64>,
    pub morawetz: Vec<f64>,
    /// ∫∫ (η_x² + v_x²).
    pub kato: Vec<f64>,
    pub duality: Option<Vec<f64>>,
    pub alpha: f64,
    pub l: f64,
}

pub const ENERGY_CSV_HEADER: [&str; 8] = ["t", "norm", "etax_L", "vx_0", "diss", "morawetz", "kato", "duality"];

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn max_energy_residual(&self) -> f64 {
        self.energy_residual.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    pub fn max_duality_residual(&self) -> Option<f64> {
        self.duality.as_ref().map(|d| d.iter().fold(0.0_f64, |a, x| a.max(x.abs())))
    }

    /// ∫∫(η_x²+v_x²) over [0,T] divided by (2/3)(L + T/2 + L(α²+1)/(4α))‖y₀‖².
    pub fn kato_ratio(&self) -> Option<f64> {
        if !(self.alpha > 0.0) {
            return None;
        }
        let t = *self.t.last()?;
        let a = self.alpha;
        let bound = (2.0 / 3.0) * (self.l + t / 2.0 + self.l * (a * a + 1.0) / (4.0 * a)) * self.norm[0].powi(2);
        Some(self.kato.last()? / bound)
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let f = |x: f64| format!("{:.16e}", x);
        (0..self.len())
            .map(|k| {
                vec![
                    f(self.t[k]),
                    f(self.norm[k]),
                    f(self.eta_x_l[k]),
                    f(self.v_x_0[k]),
                    f(self.dissipation[k]),
                    f(self.morawetz[k]),
                    f(self.kato[k]),
                    self.duality.as_ref().map_or(String::new(), |d| f(d[k])),
                ]
            })
            .collect()
    }
}

/// Diagnostic series of `traj`; the duality residual needs a dense adjoint
/// trajectory of the homogeneous problem on the same grid and time levels.
pub fn diagnostics(traj: &Trajectory, adjoint: Option<&Trajectory>) -> Result<EnergyTrace> {
    let s = &traj.samples;
    let m = s.len();
    let dt = traj.dt;
    let a = traj.alpha;
    let l = traj.grid.l;
    let mut dissipation = vec![0.0; m];
    let mut energy_residual = vec![0.0; m];
    let mut morawetz = vec![0.0; m];
    let mut kato = vec![0.0; m];
    let mut work = 0.0;
    let (mut grad, mut mass, mut bdry) = (0.0, 0.0, 0.0);
    for k in 1..m {
        let tr = 0.5 * (s[k - 1].eta_x_l + s[k].eta_x_l);
        dissipation[k] = dissipation[k - 1] + a * dt * tr * tr;
        work += dt * traj.inputs[k - 1].control * tr;
        energy_residual[k] = 0.5 * (s[k].norm_sq - s[0].norm_sq) + dissipation[k] - work;
        grad += 0.5 * dt * (s[k - 1].grad_sq + s[k].grad_sq);
        mass += 0.5 * dt * (s[k - 1].norm_sq + s[k].norm_sq);
        bdry += 0.5 * dt * (s[k - 1].eta_x_l.powi(2) + s[k].eta_x_l.powi(2));
        kato[k] = grad;
        morawetz[k] = 1.5 * grad - 0.5 * mass + (s[k].x_eta_v - s[0].x_eta_v) - 0.5 * l * (1.0 + a * a) * bdry;
    }
    let duality = match adjoint {
        None => None,
        Some(adj) => Some(duality_residual(traj, adj)?),
    };
    Ok(EnergyTrace {
        t: s.iter().map(|x| x.t).collect(),
        norm: s.iter().map(|x| x.norm_sq.sqrt()).collect(),
        eta_x_l: s.iter().map(|x| x.eta_x_l).collect(),
        v_x_0: s.iter().map(|x| x.v_x_0).collect(),
        eta_xx_0: s.iter().map(|x| x.eta_xx_0).collect(),
        eta_xx_l: s.iter().map(|x| x.eta_xx_l).collect(),
        v_xx_0: s.iter().map(|x| x.v_xx_0).collect(),
        v_xx_l: s.iter().map(|x| x.v_xx_l).collect(),
        dissipation,
        energy_residual,
        morawetz,
        kato,
        duality,
        alpha: a,
        l,
    })
}

/// [⟨y,ψ⟩]₀ᵗ − Σ dt Σ_j ḡ_j ⟨c_j, ψ̄⟩ at every time level.
fn duality_residual(traj: &Trajectory, adj: &Trajectory) -> Result<Vec<f64>> {
    if !traj.is_dense() || !adj.is_dense() {
        return Err(KdvError::validation("duality needs every time level stored (save_every = 1)"));
    }
    if adj.grid != traj.grid || adj.samples.len() != traj.samples.len() || (adj.dt - traj.dt).abs() > 1e-15 * traj.dt {
        return Err(KdvError::validation("adjoint trajectory must share grid and time levels"));
    }
    if adj.mode != Mode::LinearHomogeneous {
        return Err(KdvError::validation("adjoint trajectory must be a homogeneous run"));
    }
    if traj.alpha != 0.0 || traj.inputs.iter().any(|i| i.control != 0.0) {
        return Err(KdvError::validation("duality applies to runs without feedback or control"));
    }
    let grid = &traj.grid;
    let c = boundary_inputs(&Generator::new(*grid));
    let y = &traj.snapshots;
    let p = &adj.snapshots;
    let base = y[0].1.inner(&p[0].1, grid);
    let mut rhs = 0.0;
    let mut out = vec![0.0; y.len()];
    for k in 1..y.len() {
        let d = traj.inputs[k - 1].data;
        for j in 0..6 {
            if d[j] != 0.0 {
                rhs += traj.dt * d[j] * 0.5 * (c[j].inner(&p[k - 1].1, grid) + c[j].inner(&p[k].1, grid));
            }
        }
        out[k] = y[k].1.inner(&p[k].1, grid) - base - rhs;
    }
    Ok(out)
}

/// Least-squares fit of log‖y(t)‖ ≈ c − μt.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub mu: f64,
    pub stderr: f64,
    /// 95% interval for μ.
    pub interval: (f64, f64),
    pub rms_residual: f64,
    pub samples: usize,
}

/// Fit the decay rate on the samples past `discard` × T.
pub fn decay_fit(t: &[f64], norm: &[f64], discard: f64) -> Result<DecayFit> {
    if t.len() != norm.len() || t.is_empty() {
        return Err(KdvError::validation("time and norm series must have equal nonzero length"));
    }
    if !(0.0..1.0).contains(&discard) {
        return Err(KdvError::validation("discard fraction must lie in [0, 1)"));
    }
    let t0 = t[0] + discard * (t[t.len() - 1] - t[0]);
    let pts: Vec<(f64, f64)> = t.iter().zip(norm).filter(|(&ti, _)| ti >= t0).map(|(&a, &b)| (a, b)).collect();
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(KdvError::validation("nonpositive norm sample in the fit window"));
    }
    let m = pts.len();
    if m < 20 {
        return Err(KdvError::validation(format!("decay fit needs at least 20 samples, got {m}")));
    }
    let mf = m as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / mf;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1.ln() - ym)).sum();
    let slope = sty / stt;
    let ssr: f64 = pts.iter().map(|p| (p.1.ln() - ym - slope * (p.0 - tm)).powi(2)).sum();
    let sigma2 = ssr / (mf - 2.0);
    let stderr = (sigma2 / stt).sqrt();
    let mu = -slope;
    Ok(DecayFit { mu, stderr, interval: (mu - 1.96 * stderr, mu + 1.96 * stderr), rms_residual: (ssr / mf).sqrt(), samples: m })
}

pub fn decay_fit_trace(trace: &EnergyTrace) -> Result<DecayFit> {
    decay_fit(&trace.t, &trace.norm, 0.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_energy_gives_zero_rate() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let f = decay_fit(&t, &vec![3.0; 100], 0.1).unwrap();
        assert!(f.mu.abs() <= 1e-8);
    }

    #[test]
    fn exponential_rate_recovered() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|&s| 4.0 * (-2.0 * s).exp()).collect();
        let f = decay_fit(&t, &y, 0.1).unwrap();
        assert!((f.mu - 2.0).abs() <= 1e-6);
        assert!(f.stderr < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_and_short() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let mut y = vec![1.0; 30];
        y[20] = 0.0;
        assert!(decay_fit(&t, &y, 0.1).unwrap_err().is_validation());
        assert!(decay_fit(&t[..10], &[1.0; 10], 0.0).unwrap_err().is_validation());
    }
}
