use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use qheat_core::bath::BathParameters;
use qheat_core::floquet::{
    bare_to_floquet_populations, rabi_floquet_with_grid, InitialState, RabiParameters,
};
use qheat_core::rates::{
    coupling_fourier, partial_rates, sigma_x_elements, sigma_z_elements, RateTable,
};
use qheat_core::tilted::dss;
use serde::Deserialize;

use crate::{Cli, CliError};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub bath: BathSection,
    pub coupling: CouplingSection,
    #[serde(default)]
    pub initial: InitialSection,
    /// Absolute evaluation times; mutually exclusive with `times_tau`.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Evaluation times in units of the drive period.
    #[serde(default)]
    pub times_tau: Vec<f64>,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Test hook for the validate command: corrupts one rate so the
    /// structural check must fail.
    #[serde(default)]
    pub inject_negative_rate: bool,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega: f64,
    pub g: f64,
    /// Drive frequency; mutually exclusive with `delta`.
    #[serde(default)]
    pub omega_drive: Option<f64>,
    /// Detuning omega - Omega; mutually exclusive with `omega_drive`.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub phi: f64,
}

impl ModelSection {
    pub fn rabi(&self) -> Result<RabiParameters, CliError> {
        let omega_drive = match (self.omega_drive, self.delta) {
            (Some(w), None) => w,
            (None, Some(d)) => self.omega - d,
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "model: set either omega_drive or delta, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "model: one of omega_drive or delta is required".into(),
                ))
            }
        };
        Ok(RabiParameters {
            omega: self.omega,
            g: self.g,
            omega_drive,
            phi: self.phi,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub eta: f64,
    /// Inverse temperature; mutually exclusive with `temperature`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Temperature k_B T; mutually exclusive with `beta`.
    #[serde(default)]
    pub temperature: Option<f64>,
}

impl BathSection {
    pub fn bath(&self) -> Result<BathParameters, CliError> {
        let beta = match (self.beta, self.temperature) {
            (Some(b), None) => b,
            (None, Some(t)) if t > 0.0 => 1.0 / t,
            (None, Some(t)) => {
                return Err(CliError::Config(format!(
                    "bath: temperature must be positive, got {t}"
                )))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "bath: set either beta or temperature, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "bath: one of beta or temperature is required".into(),
                ))
            }
        };
        Ok(BathParameters::new(self.eta, beta)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    SigmaX,
    SigmaZ,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub kind: CouplingKind,
    /// Row-major 2x2 matrix of [re, im] pairs, required for `custom`.
    #[serde(default)]
    pub matrix: Option<[[[f64; 2]; 2]; 2]>,
}

impl CouplingSection {
    fn matrix(&self) -> Result<[[Complex64; 2]; 2], CliError> {
        let m = self
            .matrix
            .ok_or_else(|| CliError::Config("coupling: custom kind requires a matrix".into()))?;
        Ok([
            [
                Complex64::new(m[0][0][0], m[0][0][1]),
                Complex64::new(m[0][1][0], m[0][1][1]),
            ],
            [
                Complex64::new(m[1][0][0], m[1][0][1]),
                Complex64::new(m[1][1][0], m[1][1][1]),
            ],
        ])
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// Dynamic steady state of the assembled rate table.
    #[default]
    Dss,
    /// Bare-basis Bloch angles cos(delta)|0> + sin(delta) e^{i gamma}|1>,
    /// projected onto the Floquet modes at t = 0.
    Bare {
        #[serde(default)]
        delta: f64,
        #[serde(default)]
        gamma: f64,
    },
    /// Explicit Floquet-mode populations.
    Floquet { p1: f64, p2: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// Counting-field grid for the finite-time inversion.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Harmonic cutoff for coupling Fourier elements.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Samples per period for the Floquet modes.
    #[serde(default = "default_grid")]
    pub mode_grid: usize,
    /// Half-width of the long-time comb window; autosized when absent.
    #[serde(default)]
    pub n_range: Option<u32>,
}

fn default_grid() -> usize {
    512
}

fn default_k_max() -> usize {
    3
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            k_max: default_k_max(),
            mode_grid: default_grid(),
            n_range: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Delta,
    Temperature,
    Phi,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Temperature => "temperature",
            Self::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSection {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.count < 2 {
            return Err(CliError::Config(format!(
                "sweep: count must be at least 2, got {}",
                self.count
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config("sweep: bounds must be finite".into()));
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

impl RunConfig {
    /// Resolves the time list against the drive period. Exactly one of
    /// `times` and `times_tau` must be set.
    pub fn resolve_times(&self, tau: f64) -> Result<Vec<f64>, CliError> {
        let times = match (self.times.is_empty(), self.times_tau.is_empty()) {
            (false, true) => self.times.clone(),
            (true, false) => self.times_tau.iter().map(|x| x * tau).collect(),
            (false, false) => {
                return Err(CliError::Config(
                    "set either times or times_tau, not both".into(),
                ))
            }
            (true, true) => {
                return Err(CliError::Config(
                    "one of times or times_tau is required".into(),
                ))
            }
        };
        for &t in &times {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::Config(format!(
                    "times must be finite and nonnegative, got {t}"
                )));
            }
        }
        Ok(times)
    }
}

/// Everything the commands consume, assembled from one parameter point.
pub struct Assembled {
    pub table: RateTable,
    pub init: InitialState,
}

pub fn assemble(config: &RunConfig) -> Result<Assembled, CliError> {
    let params = config.model.rabi()?;
    let bath = config.bath.bath()?;
    let sol = rabi_floquet_with_grid(&params, config.numerics.mode_grid)?;
    let elements = match config.coupling.kind {
        CouplingKind::SigmaX => sigma_x_elements(sol.theta, config.numerics.k_max)?,
        CouplingKind::SigmaZ => sigma_z_elements(sol.theta),
        CouplingKind::Custom => {
            coupling_fourier(&config.coupling.matrix()?, &sol, config.numerics.k_max)?
        }
    };
    let table = partial_rates(&elements, &sol, &bath);
    let init = match config.initial {
        InitialSection::Dss => dss(&table)?,
        InitialSection::Bare { delta, gamma } => bare_to_floquet_populations(delta, gamma, &sol),
        InitialSection::Floquet { p1, p2 } => InitialState::new(p1, p2)?,
    };
    Ok(Assembled { table, init })
}

/// Assembles with one swept parameter overridden.
pub fn assemble_at(
    config: &RunConfig,
    variable: SweepVariable,
    value: f64,
) -> Result<Assembled, CliError> {
    let mut c = config.clone();
    match variable {
        SweepVariable::Delta => {
            c.model.delta = Some(value);
            c.model.omega_drive = None;
        }
        SweepVariable::Temperature => {
            c.bath.temperature = Some(value);
            c.bath.beta = None;
        }
        SweepVariable::Phi => c.model.phi = value,
    }
    assemble(&c)
}

/// Reads the config file (if any), folds in `--set` overrides, then the
/// dedicated flags; flags win over file keys.
pub fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut root = toml::Table::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        root = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    for spec in &cli.set {
        apply_set(&mut root, spec)?;
    }
    if let Some(dir) = &cli.out {
        let entry = root
            .entry("output".to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(
                    "dir".to_string(),
                    toml::Value::String(dir.display().to_string()),
                );
            }
            _ => return Err(CliError::Config("output must be a table".into())),
        }
    }
    if let Some(seed) = cli.seed {
        let v = i64::try_from(seed)
            .map_err(|_| CliError::Config("seed exceeds the TOML integer range".into()))?;
        root.insert("seed".to_string(), toml::Value::Integer(v));
    }
    if let Some(threads) = cli.threads {
        root.insert("threads".to_string(), toml::Value::Integer(threads as i64));
    }
    toml::Value::Table(root)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// `--set key=value`: the pair is parsed as a one-line TOML document (dotted
/// keys give nesting), retrying with the value quoted so bare strings like
/// `coupling.kind=sigma_z` work, then deep-merged over the current tree.
fn apply_set(root: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let Some((key, value)) = spec.split_once('=') else {
        return Err(CliError::Config(format!(
            "--set expects key=value, got `{spec}`"
        )));
    };
    let (key, value) = (key.trim(), value.trim());
    let parsed: toml::Table = toml::from_str(&format!("{key} = {value}"))
        .or_else(|_| toml::from_str(&format!("{key} = \"{value}\"")))
        .map_err(|e| CliError::Config(format!("--set {spec}: {e}")))?;
    merge(root, parsed);
    Ok(())
}

fn merge(dst: &mut toml::Table, src: toml::Table) {
    for (k, v) in src {
        match v {
            toml::Value::Table(s) => {
                if let Some(toml::Value::Table(d)) = dst.get_mut(&k) {
                    merge(d, s);
                } else {
                    dst.insert(k, toml::Value::Table(s));
                }
            }
            other => {
                dst.insert(k, other);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> toml::Table {
        toml::from_str(
            r#"
            times_tau = [80.0]
            [model]
            omega = 1.0
            g = 0.1
            delta = 0.02
            [bath]
            eta = 0.01
            beta = 10.0
            [coupling]
            kind = "sigma_x"
            "#,
        )
        .unwrap()
    }

    fn into_config(root: toml::Table) -> Result<RunConfig, CliError> {
        toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = into_config(base()).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.numerics.grid, 512);
        assert!(matches!(c.initial, InitialSection::Dss));
        let params = c.model.rabi().unwrap();
        assert!((params.omega_drive - 0.98).abs() < 1e-15);
    }

    #[test]
    fn set_overrides_nest_and_win() {
        let mut root = base();
        apply_set(&mut root, "model.g=0.2").unwrap();
        apply_set(&mut root, "coupling.kind=sigma_z").unwrap();
        apply_set(&mut root, "seed=7").unwrap();
        let c = into_config(root).unwrap();
        assert_eq!(c.model.g, 0.2);
        assert_eq!(c.coupling.kind, CouplingKind::SigmaZ);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn unknown_fields_are_rejected_by_name() {
        let mut root = base();
        apply_set(&mut root, "model.gg=0.2").unwrap();
        let err = into_config(root).unwrap_err();
        let CliError::Config(msg) = err else {
            panic!("expected config error")
        };
        assert!(msg.contains("gg"), "message should name the field: {msg}");
    }

    #[test]
    fn exclusive_pairs_are_enforced() {
        let mut root = base();
        apply_set(&mut root, "model.omega_drive=0.97").unwrap();
        let c = into_config(root).unwrap();
        assert!(c.model.rabi().is_err());

        let mut root = base();
        apply_set(&mut root, "bath.temperature=0.1").unwrap();
        let c = into_config(root).unwrap();
        assert!(c.bath.bath().is_err());

        let mut root = base();
        apply_set(&mut root, "times=[1.0]").unwrap();
        let c = into_config(root).unwrap();
        assert!(c.resolve_times(1.0).is_err());
    }

    #[test]
    fn sweep_points_are_a_uniform_grid() {
        let s = SweepSection {
            variable: SweepVariable::Delta,
            start: 0.0,
            stop: 0.3,
            count: 11,
        };
        let pts = s.points().unwrap();
        assert_eq!(pts.len(), 11);
        assert!((pts[10] - 0.3).abs() < 1e-15);
        assert!((pts[1] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn custom_coupling_requires_a_matrix() {
        let mut root = base();
        apply_set(&mut root, "coupling.kind=custom").unwrap();
        let c = into_config(root).unwrap();
        assert!(matches!(assemble(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn bare_superposition_projects_onto_modes() {
        let mut root = base();
        apply_set(&mut root, "initial.kind=bare").unwrap();
        apply_set(&mut root, "initial.delta=0.7853981633974483").unwrap();
        let c = into_config(root).unwrap();
        let asm = assemble(&c).unwrap();
        assert!((asm.init.p[0] + asm.init.p[1] - 1.0).abs() < 1e-12);
    }
}
