use super::{CriticalLength, SetTag, Witness};
use crate::numerics::{newton_analytic_system, NewtonConfig, RootStatus, C64, I};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    G,
    Gprime,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::G => 1.0,
            Branch::Gprime => -1.0,
        }
    }

    pub fn tag(self) -> SetTag {
        match self {
            Branch::G => SetTag::G,
            Branch::Gprime => SetTag::Gprime,
        }
    }
}

/// Seeds satisfy |Re a|, |Re b| ≤ re_max and |Im a|, |Im b| ≤ im_max.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchBox {
    pub re_max: f64,
    pub im_max: f64,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox { re_max: 30.0, im_max: 60.0 }
    }
}

impl SearchBox {
    fn contains(&self, z: C64) -> bool {
        z.re.abs() <= self.re_max && z.im.abs() <= self.im_max
    }

    /// Largest L below which every purely imaginary witness lies in the box.
    pub fn imaginary_coverage(&self) -> f64 {
        self.im_max * 3f64.sqrt() / 2.0
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GWitness {
    pub a: C64,
    pub b: C64,
    pub common: C64,
    pub residual: f64,
    pub branch: Branch,
}

impl GWitness {
    pub fn l_squared(&self) -> C64 {
        -(self.a * self.a + self.a * self.b + self.b * self.b)
    }

    pub fn length(&self) -> f64 {
        self.l_squared().re.sqrt()
    }

    /// The roots μ_k = z_k/(iL) of ξ³ − ξ + p and p = −μ₀μ₁μ₂.
    pub fn mus_and_p(&self) -> ([C64; 3], C64) {
        let l = self.length();
        let mu0 = self.a / (I * l);
        let mu1 = self.b / (I * l);
        let mu2 = -(mu0 + mu1);
        ([mu0, mu1, mu2], -(mu0 * mu1 * mu2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RejectReason {
    NearSingularSeed,
    NotConverged(RootStatus),
    ResidualTooLarge,
    CoincidentRoots,
    ZeroCommonValue,
    NonRealSquare,
    NonPositiveSquare,
    OutsideBox,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rejection {
    pub seed: [C64; 2],
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranscendentalScan {
    pub branch: Branch,
    pub search_box: SearchBox,
    pub spacing: f64,
    pub seeds: usize,
    pub lengths: Vec<CriticalLength>,
    pub rejections: Vec<Rejection>,
}

/// 2z/(s·i·e^z − 1) + z, s = +1 for 𝒢 and −1 for 𝒢′.
pub fn g_function(branch: Branch, z: C64) -> Option<C64> {
    let den = branch.sign() * I * z.exp() - 1.0;
    if den.norm() < 1e-300 || !den.is_finite() {
        return None;
    }
    let v = 2.0 * z / den + z;
    v.is_finite().then_some(v)
}

/// (f(a) − f(b), f(b) − f(−a−b)).
pub fn g_system(branch: Branch, z: [C64; 2]) -> Option<[C64; 2]> {
    let fa = g_function(branch, z[0])?;
    let fb = g_function(branch, z[1])?;
    let fc = g_function(branch, -z[0] - z[1])?;
    Some([fa - fb, fb - fc])
}

fn near_singular(branch: Branch, z: C64) -> bool {
    // s·i·e^z = 1  ⇔  z = i(−sπ/2 + 2πm)
    if z.re.abs() >= 1e-3 {
        return false;
    }
    let base = -branch.sign() * PI / 2.0;
    let m = ((z.im - base) / (2.0 * PI)).round();
    (z.im - base - 2.0 * PI * m).abs() < 1e-3
}

fn grid(max: f64, spacing: f64) -> Vec<f64> {
    let n = (max / spacing).floor() as i64;
    (-n..=n).map(|k| k as f64 * spacing).collect()
}

/// Seeds on the two conjugation-invariant slices of the box: a, b purely
/// imaginary, and b = −conj(a).
fn seeds(bx: &SearchBox, spacing: f64) -> Vec<[C64; 2]> {
    let ys = grid(bx.im_max, spacing);
    let xs = grid(bx.re_max, spacing);
    let mut out = Vec::with_capacity(ys.len() * (ys.len() + xs.len()));
    for &y1 in &ys {
        for &y2 in &ys {
            out.push([C64::new(0.0, y1), C64::new(0.0, y2)]);
        }
    }
    for &x in &xs {
        if x == 0.0 {
            continue;
        }
        for &y in &ys {
            out.push([C64::new(x, y), C64::new(-x, y)]);
        }
    }
    out
}

fn classify(branch: Branch, bx: &SearchBox, seed: [C64; 2], cfg: &NewtonConfig) -> Result<GWitness, RejectReason> {
    let c = -seed[0] - seed[1];
    if seed.iter().chain(std::iter::once(&c)).any(|&z| near_singular(branch, z)) {
        return Err(RejectReason::NearSingularSeed);
    }
    let out = newton_analytic_system(|z| g_system(branch, z), seed, cfg);
    if out.status != RootStatus::Converged {
        return Err(RejectReason::NotConverged(out.status));
    }
    let [a, b] = out.value;
    let fa = g_function(branch, a).ok_or(RejectReason::NotConverged(RootStatus::Diverged))?;
    let residual = g_system(branch, out.value).map(|r| (r[0].norm_sqr() + r[1].norm_sqr()).sqrt()).unwrap_or(f64::INFINITY);
    if residual > 1e-10 {
        return Err(RejectReason::ResidualTooLarge);
    }
    let cc = -a - b;
    let sep = 1e-6 * (1.0 + a.norm() + b.norm());
    if (a - b).norm() <= sep || (a - cc).norm() <= sep || (b - cc).norm() <= sep {
        return Err(RejectReason::CoincidentRoots);
    }
    if fa.norm() <= 1e-8 {
        return Err(RejectReason::ZeroCommonValue);
    }
    let l2 = -(a * a + a * b + b * b);
    if l2.im.abs() > 1e-9 * (1.0 + l2.re.abs()) {
        return Err(RejectReason::NonRealSquare);
    }
    if l2.re <= 0.0 {
        return Err(RejectReason::NonPositiveSquare);
    }
    if !bx.contains(a) || !bx.contains(b) {
        return Err(RejectReason::OutsideBox);
    }
    Ok(GWitness { a, b, common: fa, residual, branch })
}

/// Newton sweep of the 𝒢 (or 𝒢′) system from a seed grid. The result covers
/// the searched box only.
pub fn solve_transcendental_set(branch: Branch, bx: SearchBox, spacing: f64) -> TranscendentalScan {
    let cfg = NewtonConfig { tol: 1e-11, ..NewtonConfig::default() };
    let seeds = seeds(&bx, spacing);
    let outcomes: Vec<Result<GWitness, RejectReason>> =
        seeds.par_iter().map(|&s| classify(branch, &bx, s, &cfg)).collect();
    let mut found: Vec<GWitness> = Vec::new();
    let mut rejections = Vec::new();
    for (seed, o) in seeds.iter().zip(outcomes) {
        match o {
            Ok(w) => found.push(w),
            Err(reason) => rejections.push(Rejection { seed: *seed, reason }),
        }
    }
    found.sort_by(|x, y| x.length().total_cmp(&y.length()).then(x.residual.total_cmp(&y.residual)));
    let mut lengths: Vec<CriticalLength> = Vec::new();
    for w in found {
        let l = w.length();
        if let Some(last) = lengths.last() {
            if (l - last.value).abs() <= 1e-8 * l {
                continue;
            }
        }
        lengths.push(CriticalLength { value: l, tag: branch.tag(), witness: Witness::Transcendental(w) });
    }
    TranscendentalScan { branch, search_box: bx, spacing, seeds: seeds.len(), lengths, rejections }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_is_symmetric_in_a_and_b() {
        let a = C64::new(0.3, 2.1);
        let b = C64::new(-0.7, 5.2);
        for br in [Branch::G, Branch::Gprime] {
            let f = |z| g_function(br, z).unwrap();
            let c = -a - b;
            let r1 = g_system(br, [a, b]).unwrap();
            let r2 = g_system(br, [b, a]).unwrap();
            assert!(((f(a) - f(b)) - r1[0]).norm() < 1e-14);
            assert!((r1[0] + r2[0]).norm() < 1e-13);
            assert!(((f(b) - f(c)) - r1[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn conjugation_symmetry() {
        // f(−z̄) = conj f(z)
        let z = C64::new(0.4, -3.3);
        for br in [Branch::G, Branch::Gprime] {
            let lhs = g_function(br, -z.conj()).unwrap();
            let rhs = g_function(br, z).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_lattice_detected() {
        assert!(near_singular(Branch::G, C64::new(0.0, -PI / 2.0 + 2.0 * PI)));
        assert!(near_singular(Branch::Gprime, C64::new(0.0, PI / 2.0)));
        assert!(!near_singular(Branch::G, C64::new(0.0, PI / 2.0)));
    }

    #[test]
    fn small_box_witnesses_are_valid() {
        let scan = solve_transcendental_set(Branch::G, SearchBox { re_max: 4.0, im_max: 14.0 }, 0.5);
        for c in &scan.lengths {
            let Witness::Transcendental(w) = &c.witness else { panic!() };
            assert!(w.residual <= 1e-10);
            assert!(w.common.norm() > 1e-8);
            let l2 = w.l_squared();
            assert!(l2.im.abs() <= 1e-9 * (1.0 + l2.re.abs()));
            assert!(l2.re > 0.0);
            assert!((c.recompute() - c.value).abs() <= 1e-12 * c.value);
            let swapped = newton_analytic_system(
                |z| g_system(Branch::G, z),
                [w.b, w.a],
                &NewtonConfig { tol: 1e-11, ..Default::default() },
            );
            assert_eq!(swapped.status, RootStatus::Converged);
            let ls = (-(swapped.value[0].powi(2) + swapped.value[0] * swapped.value[1] + swapped.value[1].powi(2))).re.sqrt();
            assert!((ls - c.value).abs() <= 1e-8 * c.value);
        }
        for pair in scan.lengths.windows(2) {
            assert!(pair[1].value > pair[0].value * (1.0 + 1e-8));
        }
    }
}
