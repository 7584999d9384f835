use super::C64;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub divergence_bound: f64,
    pub cond_cap: f64,
    /// Relative step of the central-difference Jacobian.
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 40,
            max_halvings: 8,
            divergence_bound: 1e6,
            cond_cap: 1e14,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootStatus {
    Converged,
    Diverged,
    MaxIter,
    SingularJacobian,
}

#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub value: [C64; 2],
    pub residual_norm: f64,
    pub status: RootStatus,
    pub iterations: usize,
}

fn norm2(v: [C64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn jacobian<F>(f: &F, z: [C64; 2], step: f64) -> Option<[[C64; 2]; 2]>
where
    F: Fn([C64; 2]) -> Option<[C64; 2]>,
{
    let mut jac = [[C64::new(0.0, 0.0); 2]; 2];
    for col in 0..2 {
        let h = step * (1.0 + z[col].norm());
        let mut zp = z;
        let mut zm = z;
        zp[col] += h;
        zm[col] -= h;
        let fp = f(zp)?;
        let fm = f(zm)?;
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Some(jac)
}

/// Damped Newton iteration for an analytic map ℂ² → ℂ².
/// `f` returns `None` where the map is not evaluable.
pub fn newton_analytic_system<F>(f: F, seed: [C64; 2], cfg: &NewtonConfig) -> RootResult
where
    F: Fn([C64; 2]) -> Option<[C64; 2]>,
{
    let mut z = seed;
    let mut fz = match f(z) {
        Some(v) if v[0].is_finite() && v[1].is_finite() => v,
        _ => {
            return RootResult { value: z, residual_norm: f64::INFINITY, status: RootStatus::Diverged, iterations: 0 }
        }
    };
    let mut res = norm2(fz);
    for it in 0..cfg.max_iter {
        if res <= cfg.tol {
            return RootResult { value: z, residual_norm: res, status: RootStatus::Converged, iterations: it };
        }
        let jac = match jacobian(&f, z, cfg.fd_step) {
            Some(j) => j,
            None => {
                return RootResult { value: z, residual_norm: res, status: RootStatus::Diverged, iterations: it }
            }
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let fro = jac.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>();
        // ‖J‖_F ‖J⁻¹‖_F = ‖J‖_F² / |det| for 2×2
        if det.norm() == 0.0 || fro / det.norm() > cfg.cond_cap {
            return RootResult { value: z, residual_norm: res, status: RootStatus::SingularJacobian, iterations: it };
        }
        let dz = [
            (jac[1][1] * fz[0] - jac[0][1] * fz[1]) / det,
            (jac[0][0] * fz[1] - jac[1][0] * fz[0]) / det,
        ];
        let mut t = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..=cfg.max_halvings {
            let cand = [z[0] - dz[0] * t, z[1] - dz[1] * t];
            if let Some(fc) = f(cand) {
                if fc[0].is_finite() && fc[1].is_finite() {
                    let rc = norm2(fc);
                    if rc < res {
                        accepted = Some((cand, fc, rc));
                        break;
                    }
                    fallback = Some((cand, fc, rc));
                }
            }
            t *= 0.5;
        }
        let (cand, fc, rc) = match accepted.or(fallback) {
            Some(v) => v,
            None => {
                return RootResult { value: z, residual_norm: res, status: RootStatus::Diverged, iterations: it + 1 }
            }
        };
        z = cand;
        fz = fc;
        res = rc;
        if norm2(z) > cfg.divergence_bound {
            return RootResult { value: z, residual_norm: res, status: RootStatus::Diverged, iterations: it + 1 };
        }
    }
    let status = if res <= cfg.tol { RootStatus::Converged } else { RootStatus::MaxIter };
    RootResult { value: z, residual_norm: res, status, iterations: cfg.max_iter }
}
