use super::C64;
use crate::error::{KdvError, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootPattern {
    ThreeSimple,
    DoublePlusSimple,
    Triple,
}

#[derive(Debug, Clone, Copy)]
pub struct CubicRoots {
    /// Sorted lexicographically by (Re, Im).
    pub roots: [C64; 3],
    pub pattern: RootPattern,
    pub residuals: [f64; 3],
}

impl CubicRoots {
    pub fn cluster_tolerance(&self) -> f64 {
        cluster_tol(&self.roots)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn cluster_tol(r: &[C64; 3]) -> f64 {
    1e-6 * (1.0 + r.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn eval(c: &[C64; 4], x: C64) -> (C64, C64, C64) {
    let p = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
    let dp = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
    let ddp = 6.0 * c[0] * x + 2.0 * c[1];
    (p, dp, ddp)
}

fn polish(c: &[C64; 4], x: C64) -> C64 {
    let (p, dp, _) = eval(c, x);
    if dp.norm() == 0.0 {
        return x;
    }
    let y = x - p / dp;
    if y.is_finite() && eval(c, y).0.norm() < p.norm() {
        y
    } else {
        x
    }
}

fn lex_sort(r: &mut [C64; 3]) {
    let tol = 1e-12 * (1.0 + r.iter().map(|z| z.norm()).fold(0.0, f64::max));
    r.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tol {
            a.im.total_cmp(&b.im)
        } else {
            a.re.total_cmp(&b.re)
        }
    });
}

/// Roots of c3 ξ³ + c2 ξ² + c1 ξ + c0 by Cardano with one Newton polish.
pub fn solve_cubic(c3: C64, c2: C64, c1: C64, c0: C64) -> Result<CubicRoots> {
    let scale = c3.norm().max(c2.norm()).max(c1.norm()).max(c0.norm());
    if c3.norm() <= f64::EPSILON * scale || c3.norm() < 1e-300 {
        return Err(KdvError::validation("degenerate leading coefficient"));
    }
    let coef = [c3, c2, c1, c0];
    let a = c2 / c3;
    let b = c1 / c3;
    let cc = c0 / c3;
    let shift = -a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;

    let mut roots;
    let pscale = 1.0 + a.norm() * a.norm() + b.norm();
    let qscale = 1.0 + a.norm().powi(3) + (a * b).norm() + cc.norm();
    if p.norm() <= 1e-14 * pscale && q.norm() <= 1e-14 * qscale {
        roots = [shift; 3];
    } else {
        let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
        let s = disc.sqrt();
        let w1 = -q / 2.0 + s;
        let w2 = -q / 2.0 - s;
        let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
        let u = w.cbrt();
        let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
        roots = [C64::new(0.0, 0.0); 3];
        let mut uk = u;
        for root in roots.iter_mut() {
            let vk = if uk.norm() == 0.0 { C64::new(0.0, 0.0) } else { -p / (3.0 * uk) };
            *root = polish(&coef, uk + vk + shift);
            uk *= omega;
        }
    }

    let mut pattern = if roots[0] == roots[1] && roots[1] == roots[2] {
        RootPattern::Triple
    } else {
        RootPattern::ThreeSimple
    };
    if pattern == RootPattern::ThreeSimple {
        let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
        let &(i, j, k) = pairs
            .iter()
            .min_by(|x, y| {
                let dx = (roots[x.0] - roots[x.1]).norm();
                let dy = (roots[y.0] - roots[y.1]).norm();
                dx.total_cmp(&dy)
            })
            .unwrap();
        let big = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (roots[i] - roots[j]).norm() <= 1e-3 * big {
            // a close pair straddles a simple root d of P′
            let mut d = (roots[i] + roots[j]) / 2.0;
            for _ in 0..5 {
                let (_, dp, ddp) = eval(&coef, d);
                if ddp.norm() == 0.0 {
                    break;
                }
                let next = d - dp / ddp;
                if !next.is_finite() {
                    break;
                }
                d = next;
            }
            let (pd, _, ddp) = eval(&coef, d);
            let e = if ddp.norm() == 0.0 { C64::new(0.0, 0.0) } else { (-2.0 * pd / ddp).sqrt() };
            if 2.0 * e.norm() <= cluster_tol(&roots) {
                roots[i] = d;
                roots[j] = d;
                roots[k] = -a - 2.0 * d;
                pattern = RootPattern::DoublePlusSimple;
            } else {
                roots[i] = polish(&coef, d + e);
                roots[j] = polish(&coef, d - e);
            }
        }
    }
    lex_sort(&mut roots);
    let residuals = [0, 1, 2].map(|k| eval(&coef, roots[k]).0.norm());
    Ok(CubicRoots { roots, pattern, residuals })
}
