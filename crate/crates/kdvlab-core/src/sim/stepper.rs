use super::generator::{traces, Generator};
use super::grid::{Grid, StateField};
use crate::error::{KdvError, Result};
use crate::numerics::BandedCholesky;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LinearHomogeneous,
    Feedback,
    Nonhomogeneous,
    NonlinearFeedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CrankNicolson,
    Imex,
}

/// Samples at t = i·dt, linearly interpolated and held constant past the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn from_fn(f: impl Fn(f64) -> f64, t_end: f64, intervals: usize) -> Self {
        let dt = t_end / intervals as f64;
        TimeSeries { dt, values: (0..=intervals).map(|i| f(i as f64 * dt)).collect() }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.values.len() {
            0 => 0.0,
            1 => self.values[0],
            m => {
                let s = (t / self.dt).clamp(0.0, (m - 1) as f64);
                let i = (s.floor() as usize).min(m - 2);
                let w = s - i as f64;
                self.values[i] * (1.0 - w) + self.values[i + 1] * w
            }
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.dt > 0.0) || self.values.is_empty() || self.values.iter().any(|x| !x.is_finite()) {
            return Err(KdvError::validation(format!("{name}: need dt > 0 and finite, nonempty samples")));
        }
        Ok(())
    }
}

/// Boundary data η(0)=h₀, η(L)=h₁, η_x(0)=h₂, v(0)=g₀, v(L)=g₁, v_x(L)=g₂.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    #[serde(default)]
    pub h0: Option<TimeSeries>,
    #[serde(default)]
    pub h1: Option<TimeSeries>,
    #[serde(default)]
    pub h2: Option<TimeSeries>,
    #[serde(default)]
    pub g0: Option<TimeSeries>,
    #[serde(default)]
    pub g1: Option<TimeSeries>,
    #[serde(default)]
    pub g2: Option<TimeSeries>,
}

impl BoundaryData {
    pub fn slots(&self) -> [&Option<TimeSeries>; 6] {
        [&self.h0, &self.h1, &self.h2, &self.g0, &self.g1, &self.g2]
    }

    pub fn at(&self, t: f64) -> [f64; 6] {
        self.slots().map(|s| s.as_ref().map_or(0.0, |s| s.eval(t)))
    }

    pub fn is_zero(&self) -> bool {
        self.slots().iter().all(|s| s.is_none())
    }
}

pub const DATA_NAMES: [&str; 6] = ["h0", "h1", "h2", "g0", "g1", "g2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub l: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    pub alpha: f64,
    pub scheme: Scheme,
    pub boundary: BoundaryData,
    /// Additive control on v_x(L) in feedback modes.
    pub control: Option<TimeSeries>,
    pub save_every: usize,
    /// Small-data bound on the initial X₀ norm in nonlinear mode.
    pub delta: f64,
}

impl SimConfig {
    pub fn new(mode: Mode, l: f64, t_end: f64) -> Self {
        SimConfig {
            mode,
            l,
            n: 512,
            t_end,
            dt: t_end / 4096.0,
            alpha: if matches!(mode, Mode::Feedback | Mode::NonlinearFeedback) { 1.0 } else { 0.0 },
            scheme: if mode == Mode::NonlinearFeedback { Scheme::Imex } else { Scheme::CrankNicolson },
            boundary: BoundaryData::default(),
            control: None,
            save_every: usize::MAX,
            delta: 0.1,
        }
    }

    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(KdvError::validation("L: must be positive"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(KdvError::validation("T: must be positive"));
        }
        if !(self.dt > 0.0) || self.dt > self.t_end {
            return Err(KdvError::validation("dt: must satisfy 0 < dt <= T"));
        }
        if self.n < 16 {
            return Err(KdvError::validation("n: must be at least 16"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(KdvError::validation("alpha: must be nonnegative"));
        }
        if matches!(self.mode, Mode::Feedback | Mode::NonlinearFeedback) && !(self.alpha > 0.0) {
            return Err(KdvError::validation("alpha: feedback modes require alpha > 0"));
        }
        if self.mode == Mode::NonlinearFeedback && self.scheme != Scheme::Imex {
            return Err(KdvError::validation("scheme: nonlinear mode requires imex"));
        }
        if self.mode == Mode::Nonhomogeneous && self.boundary.is_zero() {
            return Err(KdvError::validation("boundary: nonhomogeneous mode needs boundary data"));
        }
        if self.save_every == 0 {
            return Err(KdvError::validation("save_every: must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(KdvError::validation("delta: must be positive"));
        }
        for (s, name) in self.boundary.slots().iter().zip(DATA_NAMES) {
            if let Some(s) = s {
                s.validate(name)?;
            }
        }
        if let Some(c) = &self.control {
            c.validate("control")?;
        }
        Ok(())
    }
}

/// Hermite lifting profiles φ_j (value, first and third x-derivative) for the six data.
fn lifting_profile(j: usize, l: f64, x: f64) -> (f64, f64, f64) {
    let s = x / l;
    match j % 3 {
        // value at 0
        0 => (2.0 * s * s * s - 3.0 * s * s + 1.0, (6.0 * s * s - 6.0 * s) / l, 12.0 / (l * l * l)),
        // value at L
        1 => (-2.0 * s * s * s + 3.0 * s * s, (-6.0 * s * s + 6.0 * s) / l, -12.0 / (l * l * l)),
        // slope at 0 for η, slope at L for v
        _ if j == 2 => (l * (s * s * s - 2.0 * s * s + s), 3.0 * s * s - 4.0 * s + 1.0, 6.0 / (l * l)),
        _ => (l * (s * s * s - s * s), 3.0 * s * s - 2.0 * s, 6.0 / (l * l)),
    }
}

/// Cubic lifting ℓ(t) sampled on the interior points for boundary values `d`.
pub fn lifting(grid: &Grid, d: &[f64; 6]) -> StateField {
    let mut y = StateField::zeros(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        for j in 0..3 {
            y.eta[i] += d[j] * lifting_profile(j, grid.l, x).0;
            y.v[i] += d[j + 3] * lifting_profile(j + 3, grid.l, x).0;
        }
    }
    y
}

/// c_j = (P − G)φ_j: the discrete boundary-input vectors of the six data.
pub fn boundary_inputs(gen: &Generator) -> [StateField; 6] {
    let grid = gen.grid;
    let n = grid.n;
    std::array::from_fn(|j| {
        let prof: Vec<(f64, f64, f64)> = (0..n).map(|i| lifting_profile(j, grid.l, grid.x(i))).collect();
        let samples: Vec<f64> = prof.iter().map(|p| p.0).collect();
        let exact: Vec<f64> = prof.iter().map(|p| -p.1 - p.2).collect();
        let mut c = StateField::zeros(n);
        let mut tmp = vec![0.0; n];
        if j < 3 {
            // η-slot: v-equation has D_η = −D_vᵀ
            gen.apply_dvt(&samples, &mut tmp);
            for i in 0..n {
                c.v[i] = exact[i] + tmp[i];
            }
        } else {
            gen.apply_dv(&samples, &mut tmp);
            for i in 0..n {
                c.eta[i] = exact[i] - tmp[i];
            }
        }
        c
    })
}

/// (−(ηv)_x, −(v²/2)_x) by central differences with zero boundary values.
pub fn nonlinear_term(y: &StateField, h: f64) -> StateField {
    let n = y.len();
    let at = |f: &[f64], i: i64| if i < 0 || i >= n as i64 { 0.0 } else { f[i as usize] };
    let mut out = StateField::zeros(n);
    for i in 0..n as i64 {
        let p = at(&y.eta, i + 1) * at(&y.v, i + 1) - at(&y.eta, i - 1) * at(&y.v, i - 1);
        let q = 0.5 * (at(&y.v, i + 1).powi(2) - at(&y.v, i - 1).powi(2));
        out.eta[i as usize] = -p / (2.0 * h);
        out.v[i as usize] = -q / (2.0 * h);
    }
    out
}

/// Crank–Nicolson step for y′ = G_α y + b·u + f with G_α = [[−αh bbᵀ, D_v], [−D_vᵀ, 0]].
#[derive(Debug, Clone)]
pub struct Stepper {
    pub gen: Generator,
    pub dt: f64,
    pub alpha: f64,
    chol: BandedCholesky,
}

impl Stepper {
    pub fn new(gen: Generator, dt: f64, alpha: f64) -> Result<Self> {
        let a = 0.5 * dt;
        let n = gen.n();
        let h = gen.grid.h;
        let corner = a * alpha / (h * h * h);
        let chol = BandedCholesky::factor(n, 4, |i, j| {
            let mut k = a * a * gen.dvdvt_entry(i, j);
            if i == j {
                k += 1.0;
                if i == n - 1 {
                    k += corner;
                }
            }
            k
        })
        .ok_or_else(|| KdvError::numerical("Crank-Nicolson matrix is not positive definite"))?;
        Ok(Stepper { gen, dt, alpha, chol })
    }

    /// Advance one step. `u_bar` is the averaged additive control on v_x(L)
    /// and `forcing` the averaged source.
    pub fn step(&self, y: &mut StateField, u_bar: f64, forcing: Option<&StateField>) {
        let n = self.gen.n();
        let a = 0.5 * self.dt;
        // right-hand side (I + aG_α) y + dt (b ū + f̄)
        let mut rhs = self.apply_shifted(y, a);
        rhs.eta[n - 1] += self.dt * self.gen.b_last() * u_bar;
        if let Some(f) = forcing {
            rhs.axpy(self.dt, f);
        }
        let mut next = self.solve_shifted(&rhs);
        // K ~ a²D_vD_vᵀ squares the conditioning; refinement on the block system
        // restores a residual at round-off level of (I − aG_α)
        for _ in 0..2 {
            let mut res = rhs.clone();
            res.axpy(-1.0, &self.apply_shifted(&next, -a));
            next.axpy(1.0, &self.solve_shifted(&res));
        }
        *y = next;
    }

    /// (I + sG_α) y.
    fn apply_shifted(&self, y: &StateField, s: f64) -> StateField {
        let n = self.gen.n();
        let h = self.gen.grid.h;
        let mut dv_v = vec![0.0; n];
        let mut dvt_eta = vec![0.0; n];
        self.gen.apply_dv(&y.v, &mut dv_v);
        self.gen.apply_dvt(&y.eta, &mut dvt_eta);
        let mut out = StateField {
            eta: (0..n).map(|i| y.eta[i] + s * dv_v[i]).collect(),
            v: (0..n).map(|i| y.v[i] - s * dvt_eta[i]).collect(),
        };
        // −αh bbᵀη = −α η_n / h³ on the last row
        out.eta[n - 1] -= s * self.alpha * y.eta[n - 1] / (h * h * h);
        out
    }

    /// Solve (I − aG_α) y = r through the η Schur complement
    /// K = I + a²D_vD_vᵀ + aαh bbᵀ.
    fn solve_shifted(&self, r: &StateField) -> StateField {
        let n = self.gen.n();
        let a = 0.5 * self.dt;
        let mut eta = vec![0.0; n];
        self.gen.apply_dv(&r.v, &mut eta);
        for i in 0..n {
            eta[i] = r.eta[i] + a * eta[i];
        }
        self.chol.solve_in_place(&mut eta);
        let mut dvt_eta = vec![0.0; n];
        self.gen.apply_dvt(&eta, &mut dvt_eta);
        let v = (0..n).map(|i| r.v[i] - a * dvt_eta[i]).collect();
        StateField { eta, v }
    }
}

/// Scalar record of one time level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub t: f64,
    pub norm_sq: f64,
    pub eta_x_l: f64,
    pub v_x_0: f64,
    pub eta_xx_0: f64,
    pub eta_xx_l: f64,
    pub v_xx_0: f64,
    pub v_xx_l: f64,
    /// ∫(η_x² + v_x²) by forward differences.
    pub grad_sq: f64,
    pub x_eta_v: f64,
    pub boundary: [f64; 6],
}

impl Sample {
    pub fn measure(grid: &Grid, t: f64, y: &StateField, d: &[f64; 6]) -> Self {
        let h = grid.h;
        let x_eta_v = h * (0..grid.n).map(|i| grid.x(i) * y.eta[i] * y.v[i]).sum::<f64>();
        Sample {
            t,
            norm_sq: y.norm_sq(grid),
            eta_x_l: traces::dx_right(&y.eta, d[1], h),
            v_x_0: traces::dx_left(&y.v, d[3], h),
            eta_xx_0: traces::dxx_left(&y.eta, d[0], h),
            eta_xx_l: traces::dxx_right(&y.eta, d[1], h),
            v_xx_0: traces::dxx_left(&y.v, d[3], h),
            v_xx_l: traces::dxx_right(&y.v, d[4], h),
            grad_sq: traces::grad_sq(&y.eta, d[0], d[1], h) + traces::grad_sq(&y.v, d[3], d[4], h),
            x_eta_v,
            boundary: *d,
        }
    }
}

/// Inputs averaged over one step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepInput {
    pub control: f64,
    pub data: [f64; 6],
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    pub alpha: f64,
    pub samples: Vec<Sample>,
    pub inputs: Vec<StepInput>,
    pub snapshots: Vec<(f64, StateField)>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateField {
        &self.snapshots.last().expect("trajectory has a final snapshot").1
    }

    pub fn initial_norm(&self) -> f64 {
        self.samples[0].norm_sq.sqrt()
    }

    /// True when every time level was stored.
    pub fn is_dense(&self) -> bool {
        self.snapshots.len() == self.samples.len()
    }
}

pub fn simulate(config: &SimConfig, init: &StateField) -> Result<Trajectory> {
    let control = config.control.clone();
    let feedback = matches!(config.mode, Mode::Feedback | Mode::NonlinearFeedback);
    simulate_with(config, init, |t| if feedback { control.as_ref().map_or(0.0, |c| c.eval(t)) } else { 0.0 })
}

/// As `simulate`, with the additive control on v_x(L) supplied as a function of time.
pub fn simulate_with(config: &SimConfig, init: &StateField, control: impl Fn(f64) -> f64) -> Result<Trajectory> {
    config.validate()?;
    let grid = Grid::new(config.l, config.n)?;
    init.validate(&grid)?;
    let steps = config.steps();
    let dt = config.t_end / steps as f64;
    let alpha = match config.mode {
        Mode::LinearHomogeneous => 0.0,
        _ => config.alpha,
    };
    let nonlinear = config.mode == Mode::NonlinearFeedback;
    let nonhomogeneous = config.mode == Mode::Nonhomogeneous;
    let n0 = init.norm(&grid);
    if nonlinear && n0 > config.delta {
        return Err(KdvError::validation(format!(
            "init: X0 norm {n0:.6e} exceeds the small-data bound delta = {}",
            config.delta
        )));
    }
    let gen = Generator::new(grid);
    let inputs_c = nonhomogeneous.then(|| boundary_inputs(&gen));
    let stepper = Stepper::new(gen, dt, alpha)?;
    let data_at = |t: f64| if nonhomogeneous { config.boundary.at(t) } else { [0.0; 6] };

    let mut y = init.clone();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    let mut snapshots = vec![(0.0, y.clone())];
    samples.push(Sample::measure(&grid, 0.0, &y, &data_at(0.0)));
    let mut n_prev: Option<StateField> = None;
    let limit = 1e6 * if n0 > 0.0 { n0 } else { 1.0 };
    let mut forcing = StateField::zeros(grid.n);
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        let u_bar = 0.5 * (control(t0) + control(t1));
        let (d0, d1) = (data_at(t0), data_at(t1));
        let d_bar: [f64; 6] = std::array::from_fn(|j| 0.5 * (d0[j] + d1[j]));
        let mut use_forcing = false;
        forcing.eta.iter_mut().chain(forcing.v.iter_mut()).for_each(|x| *x = 0.0);
        if let Some(c) = &inputs_c {
            for j in 0..6 {
                if d_bar[j] != 0.0 {
                    forcing.axpy(d_bar[j], &c[j]);
                    use_forcing = true;
                }
            }
        }
        if nonlinear {
            let nk = nonlinear_term(&y, grid.h);
            match &n_prev {
                Some(np) => {
                    forcing.axpy(1.5, &nk);
                    forcing.axpy(-0.5, np);
                }
                None => forcing.axpy(1.0, &nk),
            }
            n_prev = Some(nk);
            use_forcing = true;
        }
        stepper.step(&mut y, u_bar, use_forcing.then_some(&forcing));
        let s = Sample::measure(&grid, t1, &y, &d1);
        if !y.is_finite() || s.norm_sq.sqrt() > limit {
            return Err(KdvError::numerical(format!("blow-up at step {} (t = {t1:.6e})", k + 1)));
        }
        samples.push(s);
        inputs.push(StepInput { control: u_bar, data: d_bar });
        if (k + 1) % config.save_every == 0 || k + 1 == steps {
            snapshots.push((t1, y.clone()));
        }
    }
    Ok(Trajectory { grid, mode: config.mode, dt, t_end: config.t_end, alpha, samples, inputs, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(grid: &Grid) -> StateField {
        let l = grid.l;
        StateField::from_fn(
            grid,
            |x| (x * (l - x)).powi(2) / l.powi(4) * 8.0,
            |x| (std::f64::consts::PI * x / l).sin().powi(3),
        )
    }

    #[test]
    fn time_series_interpolates() {
        let s = TimeSeries { dt: 0.5, values: vec![0.0, 1.0, 4.0] };
        assert_eq!(s.eval(0.25), 0.5);
        assert_eq!(s.eval(0.75), 2.5);
        assert_eq!(s.eval(9.0), 4.0);
    }

    #[test]
    fn lifting_matches_boundary_values() {
        for j in 0..6 {
            let (v0, d0, _) = lifting_profile(j, 3.0, 0.0);
            let (vl, dl, _) = lifting_profile(j, 3.0, 3.0);
            let want = match j {
                0 | 3 => [1.0, 0.0, 0.0, 0.0],
                1 | 4 => [0.0, 1.0, 0.0, 0.0],
                2 => [0.0, 0.0, 1.0, 0.0],
                _ => [0.0, 0.0, 0.0, 1.0],
            };
            let got = [v0, vl, d0, dl];
            for k in 0..4 {
                assert!((got[k] - want[k]).abs() < 1e-14, "slot {j}: {got:?}");
            }
        }
    }

    #[test]
    fn homogeneous_step_preserves_norm() {
        let mut cfg = SimConfig::new(Mode::LinearHomogeneous, 4.0, 1.0);
        cfg.n = 128;
        cfg.dt = 1e-3;
        let grid = Grid::new(4.0, 128).unwrap();
        let tr = simulate(&cfg, &bump(&grid)).unwrap();
        let e0 = tr.samples[0].norm_sq;
        for w in tr.samples.windows(2) {
            assert!((w[1].norm_sq - w[0].norm_sq).abs() <= 1e-12 * e0);
        }
        assert!((tr.samples.last().unwrap().norm_sq - e0).abs() <= 1e-10 * e0);
    }

    #[test]
    fn feedback_requires_positive_alpha() {
        let mut cfg = SimConfig::new(Mode::Feedback, 4.0, 1.0);
        cfg.alpha = 0.0;
        assert!(cfg.validate().unwrap_err().is_validation());
        cfg.alpha = -1.0;
        assert!(cfg.validate().unwrap_err().is_validation());
    }

    #[test]
    fn nonlinear_rejects_large_data() {
        let mut cfg = SimConfig::new(Mode::NonlinearFeedback, 4.0, 1.0);
        cfg.n = 64;
        let grid = Grid::new(4.0, 64).unwrap();
        let err = simulate(&cfg, &bump(&grid).scaled(10.0)).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = SimConfig::new(Mode::NonlinearFeedback, 4.0, 50.0);
        cfg.n = 32;
        cfg.dt = 0.5;
        cfg.delta = 1e9;
        let grid = Grid::new(4.0, 32).unwrap();
        let err = simulate(&cfg, &bump(&grid).scaled(1e3)).unwrap_err();
        assert!(matches!(err, KdvError::Numerical(ref m) if m.contains("blow-up")), "{err}");
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut cfg = SimConfig::new(Mode::Feedback, 5.0, 0.5);
        cfg.n = 64;
        let tr = simulate(&cfg, &StateField::zeros(64)).unwrap();
        assert_eq!(tr.final_state().norm_sq(&tr.grid), 0.0);
    }
}
