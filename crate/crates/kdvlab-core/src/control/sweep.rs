use super::gramian::observability_gramian_allow_resonant;
use crate::critical::{criticality, GCache, SetTag};
use crate::error::{KdvError, Result};
use crate::numerics::golden_section;
use crate::spectral::{is_resonant_length, CaseSpec};
use rayon::prelude::*;
use serde::Serialize;

/// A dip is a local minimum of min-eig / max-eig at or below this ratio.
pub const DIP_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ObsPoint {
    pub l: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub condition: f64,
    pub ratio: f64,
    pub dip: bool,
    pub nearest_critical: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObsDip {
    pub l: f64,
    pub ratio: f64,
    pub nearest_critical: Option<f64>,
    pub nearest_tag: Option<SetTag>,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObsSweepReport {
    pub case_id: u8,
    pub t: f64,
    pub modes: usize,
    pub step: f64,
    pub threshold: f64,
    pub points: Vec<ObsPoint>,
    /// Grid points skipped for lying in 2πℤ.
    pub masked: Vec<f64>,
    pub dips: Vec<ObsDip>,
}

pub const OBS_CSV_HEADER: [&str; 6] = ["L", "min_eig", "max_eig", "cond", "dip_flag", "nearest_critical"];

impl ObsSweepReport {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| {
                vec![
                    format!("{:.16e}", p.l),
                    format!("{:.16e}", p.min_eig),
                    format!("{:.16e}", p.max_eig),
                    format!("{:.16e}", p.condition),
                    (p.dip as u8).to_string(),
                    p.nearest_critical.map_or(String::new(), |c| format!("{c:.16e}")),
                ]
            })
            .collect()
    }
}

fn nearest(l: f64, case_id: u8, gcache: Option<&GCache>) -> (Option<f64>, Option<SetTag>, f64) {
    match criticality(l, case_id, 1e-9, gcache) {
        Ok(v) => (v.nearest.as_ref().map(|c| c.value), v.nearest.as_ref().map(|c| c.tag), v.distance),
        Err(_) => (None, None, f64::INFINITY),
    }
}

fn ratio_at(l: f64, case: &CaseSpec, t: f64, modes: usize) -> f64 {
    observability_gramian_allow_resonant(l, t, case, modes).map_or(f64::NAN, |g| g.ratio().max(0.0))
}

/// min-eig of the Gramian over a uniform L grid; local minima of min/max are refined and
/// reported as dips when at or below `DIP_RATIO`.
pub fn observability_sweep(
    l_lo: f64,
    l_hi: f64,
    step: f64,
    case: &CaseSpec,
    t: f64,
    modes: usize,
    gcache: Option<&GCache>,
) -> Result<ObsSweepReport> {
    if !(l_lo > 0.0) || !(l_hi > l_lo) || !l_hi.is_finite() {
        return Err(KdvError::validation("range: need 0 < L_lo < L_hi"));
    }
    if !(step > 0.0) || step > l_hi - l_lo {
        return Err(KdvError::validation("step: must be positive and not exceed the range"));
    }
    if modes < 4 {
        return Err(KdvError::validation(format!("modes: need at least 4, got {modes}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(KdvError::validation("T must be positive"));
    }
    let count = ((l_hi - l_lo) / step + 1e-9).floor() as usize + 1;
    let all: Vec<f64> = (0..count).map(|i| l_lo + i as f64 * step).collect();
    let (masked, grid): (Vec<f64>, Vec<f64>) = all.into_iter().partition(|&l| is_resonant_length(l));

    let points: Vec<ObsPoint> = grid
        .par_iter()
        .map(|&l| {
            let g = observability_gramian_allow_resonant(l, t, case, modes)?;
            let ratio = g.ratio();
            Ok(ObsPoint {
                l,
                min_eig: g.min_eig,
                max_eig: g.max_eig,
                condition: g.condition,
                ratio,
                dip: ratio <= DIP_RATIO,
                nearest_critical: nearest(l, case.id, gcache).0,
            })
        })
        .collect::<Result<_>>()?;

    let mut candidates = Vec::new();
    for i in 0..points.len() {
        let r = points[i].ratio;
        let left = if i > 0 { points[i - 1].ratio } else { f64::INFINITY };
        let right = if i + 1 < points.len() { points[i + 1].ratio } else { f64::INFINITY };
        if r <= left && r < right {
            let lo = if i > 0 { points[i - 1].l } else { points[i].l };
            let hi = if i + 1 < points.len() { points[i + 1].l } else { points[i].l };
            candidates.push((lo, hi, points[i].l, r));
        }
    }
    let dips: Vec<ObsDip> = candidates
        .par_iter()
        .filter_map(|&(lo, hi, at, r)| {
            let (l, ratio) = if hi > lo {
                let f = |x: f64| {
                    let v = ratio_at(x, case, t, modes);
                    if v.is_nan() {
                        f64::INFINITY
                    } else {
                        v
                    }
                };
                let (x, fx) = golden_section(f, lo, hi, 1e-12 * hi);
                if fx <= r {
                    (x, fx)
                } else {
                    (at, r)
                }
            } else {
                (at, r)
            };
            (ratio <= DIP_RATIO).then(|| {
                let (c, tag, distance) = nearest(l, case.id, gcache);
                ObsDip { l, ratio, nearest_critical: c, nearest_tag: tag, distance }
            })
        })
        .collect();
    Ok(ObsSweepReport { case_id: case.id, t, modes, step, threshold: DIP_RATIO, points, masked, dips })
}
