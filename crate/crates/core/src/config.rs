//! Scenario configuration (TOML). Every section rejects unknown keys.
//!
//! ```toml
//! seed = 42
//!
//! [grids.system]
//! n = 32
//! length = 12.0
//!
//! [grids.environment]
//! n = 32
//! length = 12.0
//!
//! [hamiltonian]
//! preset = "coupled_harmonic"
//! params = { lambda = 0.1 }
//!
//! [evolution]
//! t = 1.0
//! steps = 256
//! ```
//!
//! The full schema is documented in the repository README.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, Splitting, StepOptions, SubsystemFactor};
use crate::fixtures::gaussian_packet;
use crate::hamiltonian::{HamiltonianSpec, Preset, Sign};
use crate::io;
use crate::lattice::{embed_gaussian, make_grid, GaussianMeasureSpec, Grid};
use crate::states::{product_state, CompositeState};
use crate::unravel::Representation;
use crate::wigner::JOINT_ENTRY_CAP;
use crate::C64;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    pub grids: GridsSection,
    pub hamiltonian: HamiltonianSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub unravel: UnravelSection,
    #[serde(default)]
    pub wigner: WignerSection,
    #[serde(default)]
    pub gaussian: GaussianSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    pub system: GridSpec,
    pub environment: GridSpec,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub preset: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub custom: Option<CustomPotentials>,
    /// `"-"` for `e^{−itĤ}` (default) or `"+"`.
    #[serde(default = "default_sign")]
    pub sign: String,
}

fn default_sign() -> String {
    "-".into()
}

/// Tabulated potentials read from CSV files, relative to the config file.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CustomPotentials {
    #[serde(default = "one")]
    pub m1: f64,
    #[serde(default = "one")]
    pub m2: f64,
    pub v1: Option<PathBuf>,
    pub v2: Option<PathBuf>,
    pub v12: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub system: PacketSpec,
    #[serde(default)]
    pub environment: EnvironmentInit,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    #[serde(default)]
    pub center: f64,
    /// Position spread; defaults to the oscillator ground-state width.
    pub sigma: Option<f64>,
    #[serde(default)]
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentInit {
    /// The constant function 1 of `L²(N(mean, variance))`, carried to the
    /// flat lattice. Variance defaults to `1/(2 m₂ ω₂)`.
    Reference {
        #[serde(default)]
        mean: f64,
        variance: Option<f64>,
    },
    Packet {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default)]
        momentum: f64,
    },
}

impl Default for EnvironmentInit {
    fn default() -> Self {
        EnvironmentInit::Reference { mean: 0.0, variance: None }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub t: f64,
    pub steps: usize,
    pub snapshot_every: Option<usize>,
    #[serde(default = "lie")]
    pub splitting: String,
    #[serde(default = "exact")]
    pub subsystem: String,
    #[serde(default = "default_convergence")]
    pub convergence_steps: Vec<usize>,
}

fn lie() -> String {
    "lie".into()
}

fn exact() -> String {
    "exact".into()
}

fn default_convergence() -> Vec<usize> {
    vec![64, 128, 256, 512]
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct UnravelSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sampling times; empty means every snapshot.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "position")]
    pub representation: String,
    #[serde(default)]
    pub exhaustive: bool,
}

impl Default for UnravelSection {
    fn default() -> Self {
        Self { samples: default_samples(), times: Vec::new(), representation: position(), exhaustive: false }
    }
}

fn default_samples() -> usize {
    10_000
}

fn position() -> String {
    "position".into()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    #[serde(default = "default_cap")]
    pub joint_cap: usize,
    /// `(k₂, j₂)` lattice indices of environment phase-space points at which
    /// slices of the joint table are exported.
    #[serde(default)]
    pub slices: Vec<[usize; 2]>,
}

impl Default for WignerSection {
    fn default() -> Self {
        Self { joint_cap: default_cap(), slices: Vec::new() }
    }
}

fn default_cap() -> usize {
    JOINT_ENTRY_CAP
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for GaussianSection {
    fn default() -> Self {
        Self { samples: default_samples() }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { dir: default_dir(), snapshots: false }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok((Self::from_toml_str(&text)?, text))
    }
}

/// Everything needed to run: grids, Hamiltonian, initial state, options.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: Config,
    pub grid1: Grid,
    pub grid2: Grid,
    pub spec: HamiltonianSpec,
    pub initial: CompositeState,
    pub options: EvolveOptions,
    pub representation: Representation,
}

impl Scenario {
    /// `base` resolves relative CSV paths (usually the config's directory).
    pub fn from_config(config: Config, base: &Path) -> Result<Self> {
        let grid = |g: GridSpec, which: &str| {
            make_grid(g.n, g.length, g.center).map_err(|e| Error::Config(format!("grids.{which}: {e}")))
        };
        let grid1 = grid(config.grids.system, "system")?;
        let grid2 = grid(config.grids.environment, "environment")?;
        let h = &config.hamiltonian;
        let (spec, omega1, omega2) = match (&h.preset, &h.custom) {
            (Some(name), None) => {
                let preset = Preset::from_params(name, &h.params)?;
                let (w1, w2) = match preset {
                    Preset::CoupledHarmonic { omega1, omega2, .. } => (omega1, omega2),
                    Preset::FreePlusHarmonicEnv { omega2, .. } | Preset::DoubleWellSystem { omega2, .. } => (1.0, omega2),
                };
                (preset.build(grid1, grid2)?, w1, w2)
            }
            (None, Some(c)) => {
                if !h.params.is_empty() {
                    return Err(Error::Config("hamiltonian.params only applies to presets".into()));
                }
                let v1 = load_or_zero(base, c.v1.as_deref(), grid1.n())?;
                let v2 = load_or_zero(base, c.v2.as_deref(), grid2.n())?;
                let v12 = match &c.v12 {
                    Some(p) => io::read_matrix_csv(&base.join(p), grid1.n(), grid2.n())?,
                    None => Array2::zeros((grid1.n(), grid2.n())),
                };
                (HamiltonianSpec::tabulated(grid1, grid2, c.m1, c.m2, v1, v2, v12, "custom")?, 1.0, 1.0)
            }
            _ => return Err(Error::Config("hamiltonian: give exactly one of `preset` or `custom`".into())),
        };
        let sign = Sign::parse(&h.sign).map_err(|e| Error::Config(format!("hamiltonian.sign: {e}")))?;

        let init = &config.initial;
        let sigma1 = match init.system.sigma {
            Some(s) if s > 0.0 => s,
            Some(s) => return Err(Error::Config(format!("initial.system.sigma must be positive, got {s}"))),
            None => (0.5 / (spec.m1() * omega1)).sqrt(),
        };
        let psi1 = gaussian_packet(&grid1, init.system.center, sigma1, init.system.momentum);
        let psi2 = match init.environment {
            EnvironmentInit::Reference { mean, variance } => {
                let var = variance.unwrap_or(0.5 / (spec.m2() * omega2));
                let nu = GaussianMeasureSpec::new(mean, var)
                    .map_err(|e| Error::Config(format!("initial.environment: {e}")))?;
                let g = embed_gaussian(Array1::from_elem(grid2.n(), C64::new(1.0, 0.0)).view(), &nu, &grid2)?;
                crate::fixtures::normalize(&grid2, g)
            }
            EnvironmentInit::Packet { center, sigma, momentum } => {
                if !(sigma > 0.0) {
                    return Err(Error::Config(format!("initial.environment.sigma must be positive, got {sigma}")));
                }
                gaussian_packet(&grid2, center, sigma, momentum)
            }
        };
        let initial = product_state(&grid1, psi1.view(), &grid2, psi2.view())?;

        let ev = &config.evolution;
        if ev.steps == 0 {
            return Err(Error::Config("evolution.steps must be at least 1".into()));
        }
        if !ev.t.is_finite() {
            return Err(Error::Config("evolution.t must be finite".into()));
        }
        let splitting = match ev.splitting.as_str() {
            "lie" => Splitting::Lie,
            "strang" => Splitting::Strang,
            other => return Err(Error::Config(format!("evolution.splitting: expected \"lie\" or \"strang\", got \"{other}\""))),
        };
        let subsystem = match ev.subsystem.as_str() {
            "exact" => SubsystemFactor::Exact,
            "phase_split" => SubsystemFactor::PhaseSplit,
            other => {
                return Err(Error::Config(format!(
                    "evolution.subsystem: expected \"exact\" or \"phase_split\", got \"{other}\""
                )))
            }
        };
        let options = EvolveOptions {
            step: StepOptions { splitting, subsystem, sign },
            snapshot_every: Some(ev.snapshot_every.unwrap_or(1).max(1)),
        };
        if ev.snapshot_every == Some(0) {
            return Err(Error::Config("evolution.snapshot_every must be at least 1".into()));
        }
        let representation = match config.unravel.representation.as_str() {
            "position" => Representation::Position,
            "momentum" => Representation::Momentum,
            other => {
                return Err(Error::Config(format!(
                    "unravel.representation: expected \"position\" or \"momentum\", got \"{other}\""
                )))
            }
        };
        if config.unravel.samples < 2 || config.gaussian.samples < 2 {
            return Err(Error::Config("sample counts must be at least 2".into()));
        }
        Ok(Self { config, grid1, grid2, spec, initial, options, representation })
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        Self::from_config(Config::from_toml_str(text)?, base)
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.options.step.sign = sign;
        self
    }

    pub fn dt(&self) -> f64 {
        self.config.evolution.t / self.config.evolution.steps as f64
    }
}

fn load_or_zero(base: &Path, path: Option<&Path>, n: usize) -> Result<Array1<f64>> {
    match path {
        Some(p) => io::read_vector_csv(&base.join(p), n),
        None => Ok(Array1::zeros(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 7
[grids.system]
n = 16
length = 10.0
[grids.environment]
n = 16
length = 10.0
[hamiltonian]
preset = "coupled_harmonic"
params = { lambda = 0.2 }
[evolution]
t = 0.5
steps = 20
"#;

    #[test]
    fn minimal_config_builds() {
        let s = Scenario::from_toml_str(BASIC, Path::new(".")).unwrap();
        assert_eq!(s.config.seed, 7);
        assert_eq!(s.grid1.n(), 16);
        assert!((s.initial.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(s.options.step.sign, Sign::Minus);
        // reference environment state is the oscillator ground state
        let g = crate::fixtures::harmonic_ground_state(&s.grid2, 1.0, 1.0);
        let col: Vec<C64> = s.initial.amplitudes().row(8).to_vec();
        let ratio = col[3] / g[3];
        assert!(col.iter().zip(g.iter()).all(|(a, b)| (a - b * ratio).norm() < 1e-12));
    }

    #[test]
    fn unknown_keys_are_fatal() {
        for bad in [
            BASIC.replace("steps = 20", "steps = 20\nstpes = 3"),
            BASIC.replace("seed = 7", "seed = 7\n[unravel]\nsample = 4"),
            BASIC.replace("lambda = 0.2", "lamda = 0.2"),
            format!("{BASIC}\n[extra]\nx = 1\n"),
        ] {
            let e = Scenario::from_toml_str(&bad, Path::new(".")).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{e}");
        }
    }

    #[test]
    fn field_level_messages() {
        let e = Scenario::from_toml_str(&BASIC.replace("n = 16\nlength = 10.0\n[grids.env", "n = 12\nlength = 10.0\n[grids.env"), Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(e.contains("grids.system"), "{e}");
        let e = Scenario::from_toml_str(&BASIC.replace("stpes", "x").replace("steps = 20", "steps = \"many\""), Path::new("."))
            .unwrap_err()
            .to_string();
        assert!(e.contains("steps"), "{e}");
    }

    #[test]
    fn custom_potentials_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(8, 6.0, 0.0).unwrap();
        let v1 = g.points().mapv(|q| 0.5 * q * q);
        io::write_vector_csv(&dir.path().join("v1.csv"), "v", &v1).unwrap();
        let text = r#"
[grids.system]
n = 8
length = 6.0
[grids.environment]
n = 8
length = 6.0
[hamiltonian.custom]
v1 = "v1.csv"
[initial.environment]
kind = "packet"
sigma = 0.7
[evolution]
t = 0.1
steps = 2
"#;
        let s = Scenario::from_toml_str(text, dir.path()).unwrap();
        assert_eq!(s.spec.v1(), &v1);
        assert!(s.spec.is_uncoupled());
    }
}
