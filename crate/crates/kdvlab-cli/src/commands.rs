use crate::{CriticalArgs, GramianArgs, HumArgs, ObsSweepArgs, SimulateArgs, SpectrumArgs, SweepSvArgs, VerifyArgs};
use kdvlab_core::acceptance;
use kdvlab_core::config::{RunConfig, TrajectoryFormat};
use kdvlab_core::control::{
    hum_control, observability_gramian, observability_gramian_allow_resonant, observability_sweep, verify_terminal,
    GRAMIAN_CSV_HEADER, OBS_CSV_HEADER,
};
use kdvlab_core::critical::{
    case_sets, criticality, enum_lattice_set, member_lattice, solve_transcendental_set, Branch, CriticalLength, GCache,
    SearchBox, SetTag, CSV_HEADER,
};
use kdvlab_core::io::{self, csv_bytes, num};
use kdvlab_core::sim::{diagnostics, simulate as run_sim, Grid, ModalBasis, ENERGY_CSV_HEADER};
use kdvlab_core::spectral::{default_p_grid, eig_b, min_sv_sweep, CaseSpec, SPECTRUM_CSV_HEADER};
use kdvlab_core::{KdvError, Result};
use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

fn emit(out: &Option<PathBuf>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let bytes = csv_bytes(header, rows)?;
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

enum Target {
    Set(SetTag),
    Case(u8),
}

fn parse_set(s: &str) -> Result<Target> {
    if let Some(id) = s.strip_prefix("case:") {
        let id: u8 = id.parse().map_err(|_| KdvError::validation(format!("set: bad case id `{id}`")))?;
        case_sets(id)?;
        return Ok(Target::Case(id));
    }
    SetTag::parse(s)
        .map(Target::Set)
        .ok_or_else(|| KdvError::validation(format!("set: expected N, N3, R, G, Gprime or case:<1..12>, got `{s}`")))
}

/// Search box whose purely imaginary coverage reaches `lmax`.
fn box_for(lmax: f64) -> SearchBox {
    let im_max = (1.05 * 2.0 * lmax / 3f64.sqrt()).max(16.0);
    SearchBox { re_max: im_max / 2.0, im_max }
}

fn transcendental(tag: SetTag, lmax: f64) -> (Vec<CriticalLength>, f64) {
    let branch = if tag == SetTag::G { Branch::G } else { Branch::Gprime };
    let bx = box_for(lmax);
    let scan = solve_transcendental_set(branch, bx, 0.5);
    (scan.lengths.into_iter().filter(|c| c.value <= lmax).collect(), bx.imaginary_coverage())
}

fn g_cache(sets: &[SetTag], lmax: f64) -> Option<GCache> {
    if !sets.iter().any(|t| !t.is_lattice()) {
        return None;
    }
    let (g, coverage) = transcendental(SetTag::G, lmax);
    let (gprime, _) = transcendental(SetTag::Gprime, lmax);
    Some(GCache { g, gprime, coverage })
}

fn members(tag: SetTag, lmax: f64) -> Vec<CriticalLength> {
    if tag.is_lattice() {
        enum_lattice_set(tag, lmax)
    } else {
        let (v, coverage) = transcendental(tag, lmax);
        if coverage < lmax {
            eprintln!("note: {} search box covers L <= {coverage:.3}", tag.name());
        }
        v
    }
}

const VERDICT_HEADER: [&str; 5] = ["L", "set", "verdict", "nearest", "distance"];

fn verdict_row(l: f64, set: &str, critical: bool, nearest: Option<f64>, distance: f64) -> Vec<String> {
    vec![
        num(l),
        set.into(),
        if critical { "critical" } else { "not critical" }.into(),
        nearest.map(num).unwrap_or_default(),
        if distance.is_finite() { num(distance) } else { String::new() },
    ]
}

pub fn critical(a: &CriticalArgs) -> Result<()> {
    let target = parse_set(&a.set)?;
    if !(a.tol > 0.0) {
        return Err(KdvError::validation("tol: must be positive"));
    }
    match (a.lmax, a.l) {
        (Some(lmax), None) => {
            if !(lmax > 0.0) || !lmax.is_finite() {
                return Err(KdvError::validation("lmax: must be positive"));
            }
            let mut all: Vec<CriticalLength> = match target {
                Target::Set(tag) => members(tag, lmax),
                Target::Case(id) => case_sets(id)?.iter().flat_map(|&t| members(t, lmax)).collect(),
            };
            all.sort_by(|x, y| x.value.total_cmp(&y.value));
            let rows: Vec<Vec<String>> = all.iter().map(|c| c.csv_row()).collect();
            emit(&a.out, &CSV_HEADER, &rows)
        }
        (None, Some(l)) => {
            if !(l > 0.0) || !l.is_finite() {
                return Err(KdvError::validation("l: must be positive"));
            }
            let row = match target {
                Target::Set(tag) if tag.is_lattice() => {
                    let m = member_lattice(l, tag, a.tol);
                    let nearest = enum_lattice_set(tag, l + m.distance.min(l) + 1.0)
                        .into_iter()
                        .map(|c| c.value)
                        .min_by(|x, y| (x - l).abs().total_cmp(&(y - l).abs()));
                    verdict_row(l, tag.name(), m.member, nearest, m.distance)
                }
                Target::Set(tag) => {
                    let (v, _) = transcendental(tag, l + 1.0);
                    let nearest = v.iter().map(|c| c.value).min_by(|x, y| (x - l).abs().total_cmp(&(y - l).abs()));
                    let d = nearest.map_or(f64::INFINITY, |x| (x - l).abs());
                    verdict_row(l, tag.name(), d <= a.tol, nearest, d)
                }
                Target::Case(id) => {
                    let cache = g_cache(case_sets(id)?, l + 1.0);
                    let v = criticality(l, id, a.tol, cache.as_ref())?;
                    if v.incomplete_g_coverage {
                        eprintln!("note: negative verdict relies on G/Gprime beyond the searched range");
                    }
                    verdict_row(l, &a.set, v.critical, v.nearest.as_ref().map(|c| c.value), v.distance)
                }
            };
            emit(&a.out, &VERDICT_HEADER, &[row])
        }
        (None, None) => Err(KdvError::validation("critical: give --lmax to enumerate or --l to test a length")),
        (Some(_), Some(_)) => Err(KdvError::validation("critical: --lmax and --l are exclusive")),
    }
}

pub fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let s = eig_b(a.l, a.n_from, a.n_to)?;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<Vec<String>> = s.pairs.iter().map(|p| p.csv_row()).collect();
    emit(&a.out, &SPECTRUM_CSV_HEADER, &rows)
}

/// p = s³ on a uniform s grid over [−p_max^{1/3}, p_max^{1/3}], spaced as the default grid.
fn p_grid(l: f64, p_max: f64) -> Vec<f64> {
    let s_max = p_max.cbrt();
    let m = (s_max / (TAU / l / 10.0)).ceil().max(2.0) as i64;
    (-m..=m).map(|i| (s_max * i as f64 / m as f64).powi(3)).collect()
}

pub fn sweep_sv(a: &SweepSvArgs) -> Result<()> {
    if !(a.l > 0.0) || !a.l.is_finite() {
        return Err(KdvError::validation("L: must be positive"));
    }
    let case = CaseSpec::new(a.case)?;
    let grid = match a.p_max {
        Some(p) if p > 0.0 && p.is_finite() => p_grid(a.l, p),
        Some(_) => return Err(KdvError::validation("p-max: must be positive")),
        None => default_p_grid(a.l, 3),
    };
    let rep = min_sv_sweep(a.l, &case, &grid)?;
    for d in rep.dips() {
        eprintln!("dip: p = {:.12e}, sigma_min = {:.3e}", d.p, d.sigma);
    }
    if rep.dips().is_empty() {
        eprintln!("no dip below {:.0e}", rep.threshold);
    }
    emit(&a.out, &io::SWEEP_CSV_HEADER, &io::sweep_rows(&rep))
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let output = cfg.output.clone().unwrap_or_default();
    let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from(&output.dir));
    std::fs::create_dir_all(&dir)?;
    let traj = run_sim(&cfg.sim_config(), &cfg.initial_state()?)?;
    let write = |name: &str, bytes: Vec<u8>| -> Result<PathBuf> {
        let p = dir.join(name);
        std::fs::write(&p, bytes)?;
        Ok(p)
    };
    let mut written = vec![write("effective_config.json", (cfg.echo() + "\n").into_bytes())?];
    match output.trajectory {
        TrajectoryFormat::None => {}
        TrajectoryFormat::Csv => {
            written.push(write("trajectory.csv", csv_bytes(&io::TRAJECTORY_CSV_HEADER, &io::trajectory_rows(&traj))?)?)
        }
        TrajectoryFormat::Binary => written.push(write("trajectory.bin", io::encode_snapshots(&traj))?),
    }
    if output.energy {
        let d = diagnostics(&traj, None)?;
        written.push(write("energy.csv", csv_bytes(&ENERGY_CSV_HEADER, &d.csv_rows())?)?);
    }
    let last = traj.samples.last().map_or(f64::NAN, |s| s.norm_sq.sqrt());
    eprintln!(
        "{} steps to T = {}; X0 norm {:.6e} -> {:.6e}",
        traj.samples.len().saturating_sub(1),
        traj.t_end,
        traj.initial_norm(),
        last
    );
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

pub fn gramian(a: &GramianArgs) -> Result<()> {
    let case = CaseSpec::new(a.case)?;
    let g = if a.allow_resonant {
        observability_gramian_allow_resonant(a.l, a.t, &case, a.modes)?
    } else {
        observability_gramian(a.l, a.t, &case, a.modes)?
    };
    eprintln!("min-eig {:.6e}, max-eig {:.6e}, condition {:.6e}", g.min_eig, g.max_eig, g.condition);
    emit(&a.out, &GRAMIAN_CSV_HEADER, &g.csv_rows())
}

fn coords(spec: &str, dim: usize, what: &str) -> Result<Vec<f64>> {
    let v = match spec.strip_prefix("random:") {
        Some(seed) => {
            let seed: u64 = seed.parse().map_err(|_| KdvError::validation(format!("{what}: bad seed `{seed}`")))?;
            acceptance::unit_random(dim, seed)
        }
        None => io::read_vector(Path::new(spec), what)?,
    };
    if v.len() != dim {
        return Err(KdvError::validation(format!("{what}: need {dim} coordinates, got {}", v.len())));
    }
    Ok(v)
}

pub fn hum(a: &HumArgs) -> Result<()> {
    let dim = 2 * a.modes;
    let init = coords(&a.init, dim, "init")?;
    let target = match &a.target {
        Some(s) => coords(s, dim, "target")?,
        None => vec![0.0; dim],
    };
    let s = hum_control(&init, &target, a.t, a.l, a.alpha, a.modes, a.intervals)?;
    eprintln!(
        "condition {:.6e}, control L2 norm {:.6e}, modal terminal error {:.3e}",
        s.condition,
        s.signal_norm_sq().sqrt(),
        s.modal_terminal_error(1024, 10)
    );
    if let Some(n) = a.replay {
        let grid = Grid::new(a.l, n)?;
        let basis = ModalBasis::smallest(grid, a.modes)?;
        let r = verify_terminal(&s.signal, a.alpha, &basis.reconstruct(&init), &basis.reconstruct(&target), grid, a.t, a.intervals)?;
        eprintln!("replay on {n} points: terminal error {:.6e} ({:.3e} of the initial norm)", r.error, r.relative_error);
    }
    emit(&a.out, &io::CONTROL_CSV_HEADER, &io::control_rows(&s.signal))
}

pub fn obs_sweep(a: &ObsSweepArgs) -> Result<()> {
    let case = CaseSpec::new(a.case)?;
    let cache = g_cache(case_sets(a.case)?, a.to + 1.0);
    let rep = observability_sweep(a.from, a.to, a.step, &case, a.t, a.modes, cache.as_ref())?;
    for d in &rep.dips {
        let near = d.nearest_critical.map_or("none".to_string(), |c| format!("{c:.9}"));
        eprintln!("dip: L = {:.9}, min/max {:.3e}, nearest critical {near}", d.l, d.ratio);
    }
    if !rep.masked.is_empty() {
        eprintln!("masked (2πZ): {:?}", rep.masked);
    }
    emit(&a.out, &OBS_CSV_HEADER, &rep.csv_rows())
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    let ids: Vec<u8> = if a.criteria.is_empty() { (1..=acceptance::CRITERIA).collect() } else { a.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::CRITERIA) {
        return Err(KdvError::validation(format!("criteria: no criterion {bad}")));
    }
    let reports = acceptance::run_many(&ids);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&reports).map_err(|e| KdvError::numerical(e.to_string()))?);
    } else {
        for r in &reports {
            println!("{}", r.line());
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(KdvError::numerical(format!("{failed} of {} criteria failed", reports.len())));
    }
    Ok(())
}
