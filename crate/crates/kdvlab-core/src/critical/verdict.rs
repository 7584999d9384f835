use super::{enum_lattice_set, CriticalLength, SetTag};
use crate::error::{KdvError, Result};
use serde::Serialize;

/// Critical-length sets of each boundary-control case.
pub fn case_sets(case_id: u8) -> Result<&'static [SetTag]> {
    Ok(match case_id {
        1 | 4 | 6 | 7 | 8 | 9 => &[SetTag::N],
        2 => &[SetTag::N, SetTag::R],
        3 => &[SetTag::N, SetTag::G, SetTag::Gprime],
        5 => &[],
        10 => &[SetTag::R],
        11 => &[SetTag::N3],
        12 => &[SetTag::G, SetTag::Gprime],
        _ => return Err(KdvError::validation(format!("case id {case_id} outside 1..12"))),
    })
}

/// Precomputed 𝒢/𝒢′ lengths with the length up to which they are trusted.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GCache {
    pub g: Vec<CriticalLength>,
    pub gprime: Vec<CriticalLength>,
    pub coverage: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseVerdict {
    pub case_id: u8,
    pub critical: bool,
    pub nearest: Option<CriticalLength>,
    pub distance: f64,
    /// Set when a negative answer depends on 𝒢/𝒢′ beyond the cached coverage.
    pub incomplete_g_coverage: bool,
    pub g_coverage: Option<f64>,
}

pub fn criticality(l: f64, case_id: u8, tol: f64, gcache: Option<&GCache>) -> Result<CaseVerdict> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(KdvError::validation("L must be positive"));
    }
    if !(tol > 0.0) {
        return Err(KdvError::validation("tol must be positive"));
    }
    let sets = case_sets(case_id)?;
    let mut nearest: Option<CriticalLength> = None;
    let mut distance = f64::INFINITY;
    let mut incomplete = false;
    let consider = |c: CriticalLength, nearest: &mut Option<CriticalLength>, distance: &mut f64| {
        let d = (c.value - l).abs();
        if d < *distance {
            *distance = d;
            *nearest = Some(c);
        }
    };
    for &tag in sets {
        if tag.is_lattice() {
            for c in enum_lattice_set(tag, l + tol + 2.0) {
                consider(c, &mut nearest, &mut distance);
            }
        } else {
            match gcache {
                Some(cache) => {
                    let list = if tag == SetTag::G { &cache.g } else { &cache.gprime };
                    for c in list {
                        consider(c.clone(), &mut nearest, &mut distance);
                    }
                    if cache.coverage < l + tol {
                        incomplete = true;
                    }
                }
                None => incomplete = true,
            }
        }
    }
    let critical = distance <= tol;
    Ok(CaseVerdict {
        case_id,
        critical,
        nearest,
        distance,
        incomplete_g_coverage: incomplete && !critical,
        g_coverage: gcache.map(|c| c.coverage),
    })
}
