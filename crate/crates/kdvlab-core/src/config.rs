//! Schema-versioned JSON run configuration for simulations.

use crate::error::{KdvError, Result};
use crate::io::{parse_json, read_json};
use crate::sim::{BoundaryData, Grid, ModalBasis, Mode, Scheme, SimConfig, StateField, TimeSeries};
use crate::spectral::UncontrollableMode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn one() -> f64 {
    1.0
}

/// Initial state on the simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    Zero,
    /// Smooth profiles vanishing with their first derivative at both ends, scaled by `amplitude`.
    Smooth { amplitude: f64 },
    /// Coordinates (a₀, b₀, a₁, b₁, …) in the real eigenbasis of the `modes` smallest |λ|.
    Modal { modes: usize, coords: Vec<f64> },
    /// Real part of the explicit uncontrollable mode with witness (k, l); requires L to match.
    Uncontrollable {
        k: i64,
        l: i64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Gaussian modal coordinates rescaled to X₀ norm `norm`.
    Random { seed: u64, modes: usize, norm: f64 },
    Samples { eta: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryFormat {
    None,
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    #[serde(default)]
    pub trajectory: TrajectoryFormat,
    #[serde(default = "yes")]
    pub energy: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: ".".into(), trajectory: TrajectoryFormat::Csv, energy: true }
    }
}

/// Simulation run. Optional fields are filled by `resolve`; the resolved record is what gets
/// echoed and reloads to itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub boundary: BoundaryData,
    #[serde(default)]
    pub control: Option<TimeSeries>,
    #[serde(default)]
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub save_every: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    /// Defaults: n = 512, dt = T/4096, scheme crank-nicolson (imex in nonlinear mode),
    /// alpha 1 in feedback modes and 0 otherwise, 64 saved frames, delta 0.1,
    /// init smooth with amplitude 0.05.
    pub fn resolve(mut self) -> Self {
        let base = SimConfig::new(self.mode, self.l, self.t);
        self.n.get_or_insert(base.n);
        self.dt.get_or_insert(base.dt);
        self.alpha.get_or_insert(base.alpha);
        self.scheme.get_or_insert(base.scheme);
        self.delta.get_or_insert(base.delta);
        let dt = self.dt.unwrap();
        if self.save_every.is_none() {
            let steps = if dt > 0.0 && self.t > 0.0 { ((self.t / dt) - 1e-9).ceil().max(1.0) as usize } else { 1 };
            self.save_every = Some((steps / 64).max(1));
        }
        self.init.get_or_insert(InitSpec::Smooth { amplitude: 0.05 });
        self.output.get_or_insert_with(OutputSpec::default);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = parse_json(text, "config")?;
        let c = c.resolve();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: RunConfig = read_json(path, "config")?;
        let c = c.resolve();
        c.validate()?;
        Ok(c)
    }

    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Requires a resolved config.
    pub fn sim_config(&self) -> SimConfig {
        let mut s = SimConfig::new(self.mode, self.l, self.t);
        s.n = self.n.unwrap_or(s.n);
        s.dt = self.dt.unwrap_or(s.dt);
        s.alpha = self.alpha.unwrap_or(s.alpha);
        s.scheme = self.scheme.unwrap_or(s.scheme);
        s.boundary = self.boundary.clone();
        s.control = self.control.clone();
        s.save_every = self.save_every.unwrap_or(s.save_every);
        s.delta = self.delta.unwrap_or(s.delta);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(KdvError::validation(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        self.sim_config().validate()?;
        if self.control.is_some() && !matches!(self.mode, Mode::Feedback | Mode::NonlinearFeedback) {
            return Err(KdvError::validation("control: only used in feedback modes"));
        }
        match &self.init {
            Some(InitSpec::Smooth { amplitude }) if !amplitude.is_finite() => {
                return Err(KdvError::validation("init.amplitude: must be finite"))
            }
            Some(InitSpec::Modal { modes, coords }) if coords.len() != 2 * modes || *modes == 0 => {
                return Err(KdvError::validation("init.coords: need 2·modes entries"))
            }
            Some(InitSpec::Random { modes, norm, .. }) if *modes == 0 || !(*norm >= 0.0) => {
                return Err(KdvError::validation("init: random needs modes > 0 and norm >= 0"))
            }
            Some(InitSpec::Samples { eta, v }) if Some(eta.len()) != self.n || Some(v.len()) != self.n => {
                return Err(KdvError::validation("init.eta/init.v: need n samples each"))
            }
            Some(InitSpec::Uncontrollable { k, l, scale }) => {
                let m = UncontrollableMode::new(*k, *l)?;
                if (m.l - self.l).abs() > 1e-9 * self.l {
                    return Err(KdvError::validation(format!(
                        "init: uncontrollable mode ({k}, {l}) lives at L = {}, not {}",
                        m.l, self.l
                    )));
                }
                if !scale.is_finite() {
                    return Err(KdvError::validation("init.scale: must be finite"));
                }
            }
            _ => {}
        }
        if let Some(o) = &self.output {
            if o.dir.is_empty() {
                return Err(KdvError::validation("output.dir: must not be empty"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.l, self.n.unwrap_or(512))
    }

    pub fn initial_state(&self) -> Result<StateField> {
        let grid = self.grid()?;
        let l = self.l;
        let y = match self.init.as_ref().unwrap_or(&InitSpec::Zero) {
            InitSpec::Zero => StateField::zeros(grid.n),
            InitSpec::Smooth { amplitude } => StateField::from_fn(
                &grid,
                |x| amplitude * 16.0 * (x * (l - x) / (l * l)).powi(2),
                |x| amplitude * (PI * x / l).sin().powi(3) * (1.0 - 0.3 * x / l),
            ),
            InitSpec::Modal { modes, coords } => ModalBasis::smallest(grid, *modes)?.reconstruct(coords),
            InitSpec::Uncontrollable { k, l: li, scale } => {
                let m = UncontrollableMode::new(*k, *li)?;
                let xs = grid.points();
                StateField {
                    eta: xs.iter().map(|&x| scale * m.theta(0, x).re).collect(),
                    v: xs.iter().map(|&x| scale * m.u(0, x).re).collect(),
                }
            }
            InitSpec::Random { seed, modes, norm } => {
                let basis = ModalBasis::smallest(grid, *modes)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let q: Vec<f64> = (0..basis.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let y = basis.reconstruct(&q);
                let n0 = y.norm(&grid);
                if n0 > 0.0 {
                    y.scaled(norm / n0)
                } else {
                    y
                }
            }
            InitSpec::Samples { eta, v } => StateField { eta: eta.clone(), v: v.clone() },
        };
        y.validate(&grid)?;
        Ok(y)
    }
}
