use super::{CriticalLength, SetTag, Witness};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeParams {
    pub k: i64,
    pub l: i64,
}

/// Set formula evaluated at a lattice point; no admissibility check.
pub fn lattice_value(tag: SetTag, w: LatticeParams) -> f64 {
    let (k, l) = (w.k as f64, w.l as f64);
    match tag {
        SetTag::N | SetTag::N3 => 2.0 * PI / 3f64.sqrt() * (k * k + k * l + l * l).sqrt(),
        SetTag::R => {
            let a = 0.5 + 2.0 * k;
            let b = 0.5 + 2.0 * l;
            PI * (a * a + b * b + a * b).sqrt()
        }
        SetTag::G | SetTag::Gprime => f64::NAN,
    }
}

fn admissible(tag: SetTag, w: LatticeParams) -> bool {
    match tag {
        SetTag::N => w.k >= 1 && w.l >= 1,
        SetTag::N3 => w.k >= 1 && w.l >= 1 && (2 * w.k + w.l) % 3 == 0,
        SetTag::R => w.k != w.l,
        SetTag::G | SetTag::Gprime => false,
    }
}

/// Candidate witnesses whose value can reach `lmax`, in witness order.
fn candidates(tag: SetTag, lmax: f64) -> Vec<LatticeParams> {
    let mut out = Vec::new();
    match tag {
        SetTag::N | SetTag::N3 => {
            // k²+kl+l² ≤ 3 L²/(4π²)
            let q = 3.0 * lmax * lmax / (4.0 * PI * PI);
            let kmax = q.sqrt().floor() as i64 + 1;
            for k in 1..=kmax {
                for l in 1..=kmax {
                    if ((k * k + k * l + l * l) as f64) <= q * (1.0 + 1e-12) && admissible(tag, LatticeParams { k, l }) {
                        out.push(LatticeParams { k, l });
                    }
                }
            }
        }
        SetTag::R => {
            // a²+ab+b² ≥ (3/4) max(|a|,|b|)², a = 1/2 + 2k
            let amax = 2.0 * lmax / (PI * 3f64.sqrt());
            let kmax = ((amax + 0.5) / 2.0).ceil() as i64 + 1;
            for k in -kmax..=kmax {
                for l in -kmax..=kmax {
                    let w = LatticeParams { k, l };
                    if admissible(tag, w) && lattice_value(tag, w) <= lmax * (1.0 + 1e-12) {
                        out.push(w);
                    }
                }
            }
        }
        SetTag::G | SetTag::Gprime => {}
    }
    out.sort_by_key(|w| (w.k.abs(), w.l.abs(), w.k, w.l));
    out
}

/// Sorted members ≤ `lmax`, deduplicated at 1e−9 relative; each value keeps
/// the first witness in (|k|, |l|, k, l) order.
pub fn enum_lattice_set(tag: SetTag, lmax: f64) -> Vec<CriticalLength> {
    if !tag.is_lattice() || !(lmax > 0.0) {
        return Vec::new();
    }
    let mut all: Vec<(f64, usize, LatticeParams)> = candidates(tag, lmax)
        .into_iter()
        .enumerate()
        .map(|(order, w)| (lattice_value(tag, w), order, w))
        .filter(|(v, _, _)| *v <= lmax)
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<CriticalLength> = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        let mut best = i;
        while j < all.len() && (all[j].0 - all[i].0).abs() <= 1e-9 * all[i].0 {
            if all[j].1 < all[best].1 {
                best = j;
            }
            j += 1;
        }
        out.push(CriticalLength { value: all[i].0, tag, witness: Witness::Lattice(all[best].2) });
        i = j;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub member: bool,
    pub witness: Option<LatticeParams>,
    pub value: Option<f64>,
    pub distance: f64,
}

pub fn member_lattice(l: f64, tag: SetTag, tol: f64) -> Membership {
    let mut nearest = f64::INFINITY;
    for w in candidates(tag, l + tol.max(0.0) + 1.0) {
        let v = lattice_value(tag, w);
        let d = (v - l).abs();
        if d <= tol {
            return Membership { member: true, witness: Some(w), value: Some(v), distance: d };
        }
        nearest = nearest.min(d);
    }
    Membership { member: false, witness: None, value: None, distance: nearest }
}

/// The three real roots μ₀ < μ₁ < μ₂ of ξ³ − ξ + p attached to a point of 𝒩.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NWitness {
    pub l: f64,
    pub mu: [f64; 3],
    pub p: f64,
}

pub fn n_witness(k: i64, l: i64) -> NWitness {
    let len = lattice_value(SetTag::N, LatticeParams { k, l });
    let step = 2.0 * PI / len;
    let mu0 = -((2 * k + l) as f64) * step / 3.0;
    let mu1 = mu0 + k as f64 * step;
    let mu2 = mu1 + l as f64 * step;
    NWitness { l: len, mu: [mu0, mu1, mu2], p: -mu0 * mu1 * mu2 }
}
