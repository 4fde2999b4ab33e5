// Guards spelled !(x >= 0.0) reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use qheat_core::closed_forms::{sigma_z_pdf, LongitudinalRates};
use qheat_core::heat::{
    finite_time_pdf, gaussian_envelope, integrated_mean_heat, longtime_cumulants, longtime_pdf,
    longtime_valid, mean_heat_power, HeatDistribution,
};
use qheat_core::tilted::{dss, propagate_populations};
use qheat_core::validation::{check_rate_table, run_all, Check};

use config::{assemble, assemble_at, CouplingKind, RunConfig};
use output::{csv_table, distribution_json, fmt_f, report_json, write_text};

#[derive(Debug, Parser)]
#[command(
    name = "qheat",
    version,
    about = "Heat statistics of a periodically driven two-level system in an ohmic bath"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set model.g=0.2 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// RNG seed (overrides the config seed).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean heat power along the relaxation trajectory and at the steady state.
    Power,
    /// First three heat cumulants over a parameter sweep.
    Cumulants,
    /// Atomic heat distributions and the long-time Gaussian envelope.
    Pdf,
    /// Self-check suite; nonzero exit when any check fails.
    Validate,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(qheat_core::Error),
    Validation(String),
    Io(String),
}

impl From<qheat_core::Error> for CliError {
    fn from(e: qheat_core::Error) -> Self {
        Self::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Core(qheat_core::Error::Domain(_)) => 2,
            Self::Core(_) => 3,
            Self::Validation(_) => 4,
            Self::Io(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Config(m) => format!("config error: {m}"),
            Self::Core(e) => format!("error: {e}"),
            Self::Validation(m) => format!("validation failed: {m}"),
            Self::Io(m) => format!("io error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = config::load(cli)?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Power => cmd_power(&config),
        Command::Cumulants => cmd_cumulants(&config),
        Command::Pdf => cmd_pdf(&config),
        Command::Validate => cmd_validate(&config),
    }
}

/// power.csv: t, populations, instantaneous power, steady-state power and the
/// exact integrated mean heat, one row per requested time.
fn cmd_power(config: &RunConfig) -> Result<(), CliError> {
    let asm = assemble(config)?;
    let times = config.resolve_times(asm.table.tau())?;
    let power_dss = if asm.table.sigma() > 0.0 {
        mean_heat_power(&asm.table, &dss(&asm.table)?)
    } else {
        0.0
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let pops = propagate_populations(&asm.table, &asm.init, t)?;
        rows.push(vec![
            fmt_f(t),
            fmt_f(pops.p[0]),
            fmt_f(pops.p[1]),
            fmt_f(mean_heat_power(&asm.table, &pops)),
            fmt_f(power_dss),
            fmt_f(integrated_mean_heat(&asm.table, &asm.init, t)?),
        ]);
    }
    let csv = csv_table("t,p1,p2,power,power_dss,integrated_heat", &rows);
    write_text(&config.output.dir.join("power.csv"), &csv)
}

fn third_central_moment(dist: &HeatDistribution) -> f64 {
    let mu = dist.mean();
    dist.atoms
        .iter()
        .map(|a| a.w * (dist.heat_of(a) - mu).powi(3))
        .sum()
}

/// cumulants.csv: one row per (sweep point, time) with Qbar, variance and the
/// third cumulant. Longitudinal coupling saturates, so its rows come from the
/// exact finite-time atoms instead of the long-time rate expansion.
fn cmd_cumulants(config: &RunConfig) -> Result<(), CliError> {
    let sweep = config.sweep.ok_or_else(|| {
        CliError::Config("cumulants needs a [sweep] section (delta, temperature or phi)".into())
    })?;
    let points = sweep.points()?;
    let per_point: Vec<Vec<Vec<String>>> = points
        .par_iter()
        .map(|&value| -> Result<Vec<Vec<String>>, CliError> {
            let asm = assemble_at(config, sweep.variable, value)?;
            let times = config.resolve_times(asm.table.tau())?;
            let mut rows = Vec::with_capacity(times.len());
            for &t in &times {
                let (mean, variance, third, valid) = if config.coupling.kind == CouplingKind::SigmaZ
                {
                    let rates = LongitudinalRates::from_table(&asm.table)?;
                    let dist = sigma_z_pdf(&rates, &asm.init, t)?;
                    (
                        dist.mean(),
                        dist.variance(),
                        third_central_moment(&dist),
                        true,
                    )
                } else {
                    let cum = longtime_cumulants(&asm.table, t, 3)?;
                    (
                        cum.mean,
                        cum.variance.unwrap_or(f64::NAN),
                        cum.skewness.unwrap_or(f64::NAN),
                        longtime_valid(&asm.table, t),
                    )
                };
                rows.push(vec![
                    sweep.variable.name().to_string(),
                    fmt_f(value),
                    fmt_f(t),
                    fmt_f(mean),
                    fmt_f(variance),
                    fmt_f(third),
                    valid.to_string(),
                ]);
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = per_point.into_iter().flatten().collect();
    let invalid = rows.iter().filter(|r| r[6] == "false").count();
    if invalid > 0 {
        eprintln!(
            "warning: {invalid} rows have t below ~10 relaxation times; \
             the long-time cumulant expansion is unreliable there"
        );
    }
    let csv = csv_table(
        "variable,value,t,mean,variance,third_cumulant,longtime_valid",
        &rows,
    );
    write_text(&config.output.dir.join("cumulants.csv"), &csv)
}

/// Per time index i: pdf_finite_i.json (counting-field inversion),
/// pdf_longtime_i.json (comb asymptotics, exact three-atom law for sigma_z)
/// and envelope_i.csv (Gaussian envelope samples).
fn cmd_pdf(config: &RunConfig) -> Result<(), CliError> {
    let asm = assemble(config)?;
    let times = config.resolve_times(asm.table.tau())?;
    let dir = &config.output.dir;
    for (i, &t) in times.iter().enumerate() {
        let finite = finite_time_pdf(&asm.table, &asm.init, t, config.numerics.grid)?;
        write_text(
            &dir.join(format!("pdf_finite_{i}.json")),
            &distribution_json(&finite),
        )?;
        if t == 0.0 {
            eprintln!("note: t = 0 at index {i}; long-time comb and envelope skipped");
            continue;
        }
        let comb = if config.coupling.kind == CouplingKind::SigmaZ {
            let rates = LongitudinalRates::from_table(&asm.table)?;
            sigma_z_pdf(&rates, &asm.init, t)?
        } else {
            longtime_pdf(&asm.table, &asm.init, t, config.numerics.n_range)?
        };
        write_text(
            &dir.join(format!("pdf_longtime_{i}.json")),
            &distribution_json(&comb),
        )?;
        if config.coupling.kind == CouplingKind::SigmaZ {
            eprintln!("note: sigma_z heat saturates, no Gaussian envelope at index {i}");
            continue;
        }
        match envelope_csv(&asm.table, t) {
            Ok(csv) => write_text(&dir.join(format!("envelope_{i}.csv")), &csv)?,
            Err(CliError::Core(qheat_core::Error::InvalidExpansion { b })) => {
                eprintln!("note: envelope curvature b = {b:.3e} at index {i}; envelope skipped");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Samples the envelope density on mean +- 5 sigma, 201 points.
fn envelope_csv(table: &qheat_core::rates::RateTable, t: f64) -> Result<String, CliError> {
    let (a, b) = qheat_core::heat::envelope_coefficients(table)?;
    let omega = table.omega_drive;
    let mu = a * t * omega;
    let sd = (2.0 * b * t).sqrt() * omega;
    let mut rows = Vec::with_capacity(201);
    for j in 0..201 {
        let q = mu + sd * (-5.0 + 0.05 * j as f64);
        rows.push(vec![fmt_f(q), fmt_f(gaussian_envelope(q, t, table)?)]);
    }
    Ok(csv_table("q,density", &rows))
}

/// Runs the structural rate-table check on the configured geometry plus the
/// full cross-check suite, prints one line per check and writes report.json.
fn cmd_validate(config: &RunConfig) -> Result<(), CliError> {
    let asm = assemble(config)?;
    let mut table = asm.table;
    if config.inject_negative_rate {
        if let Some(ch) = table.channels.iter_mut().find(|ch| ch.rate > 0.0) {
            ch.rate = -ch.rate;
        }
    }
    let structural = match check_rate_table(&table) {
        Ok(()) => Check {
            id: 0,
            name: "rate-table-structure",
            passed: true,
            detail: format!(
                "{} channels, Sigma = {:.6e}",
                table.channels.len(),
                table.sigma()
            ),
        },
        Err(e) => Check {
            id: 0,
            name: "rate-table-structure",
            passed: false,
            detail: e.to_string(),
        },
    };
    let mut checks = vec![structural];
    checks.extend(run_all(config.seed));
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {:<26} {}", c.id, c.name, c.detail);
    }
    write_text(
        &config.output.dir.join("report.json"),
        &report_json(config.seed, &checks),
    )?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}
