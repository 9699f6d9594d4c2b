//! Command-line driver: wires JSON configs to the library and emits
//! plot-ready CSV files plus a hashed manifest.
//!
//! Exit codes: 0 on success, 1 when a computation or verification assertion
//! fails, 2 on configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use eplab_core::ensemble::{sample_factors, truncate_and_center, EnsembleSpec, EntryDist};
use eplab_core::io;
use eplab_core::limitlaw::LimitLaw;
use eplab_core::potential::{laplacian_density, mean_potential_grid, GridSpec};
use eplab_core::rng::{stream_rng, StreamKind};
use eplab_core::spectra::{build_linearization, eigenvalues, product, symmetrized_spectrum};
use eplab_core::stieltjes::{density_from_inversion, SystemForm};
use eplab_core::verify::{run_verification, VerifyConfig};
use eplab_core::{Error, C64};

#[derive(Parser)]
#[command(
    name = "eplab",
    about = "Spectral statistics of products of correlated random matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a config key, e.g. --set ensemble.rho=0.3 (repeatable).
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override the dimension ladder, e.g. --ladder 64,128,256.
    #[arg(long, global = true)]
    ladder: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample ensemble factor matrices (and their truncations) to CSV.
    Sample,
    /// Eigenvalues and symmetrized singular values of one product.
    Spectrum,
    /// Closed-form limit law: density/CDF/potential grids and samples.
    Limit,
    /// Solve the Stieltjes system on a grid and recover the density.
    Solve,
    /// Monte Carlo potential grid and its Laplacian density.
    Potential,
    /// Run the full verification harness.
    Verify,
}

// ---------------------------------------------------------------------------
// per-subcommand configs

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SampleConfig {
    ensemble: EnsembleSpec,
    trials: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            ensemble: EnsembleSpec::new(16, 2, 0.5, EntryDist::Gaussian, 1),
            trials: 1,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpectrumConfig {
    ensemble: EnsembleSpec,
    trial: u64,
    z: C64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            ensemble: EnsembleSpec::new(64, 2, 0.5, EntryDist::Gaussian, 1),
            trial: 0,
            z: C64::new(0.5, 0.2),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LimitConfig {
    m: u32,
    grid: GridSpec,
    samples: usize,
    sample_seed: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            m: 2,
            grid: GridSpec::centered_square(1.2, 0.02),
            samples: 10_000,
            sample_seed: 1,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolveConfig {
    z: C64,
    m: u32,
    form: SystemForm,
    x_max: f64,
    x_step: f64,
    eps: f64,
    tol: f64,
    max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            z: C64::new(0.5, 0.2),
            m: 2,
            form: SystemForm::Statement,
            x_max: 3.6,
            x_step: 0.01,
            eps: 0.01,
            tol: 1e-8,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PotentialConfig {
    ensemble: EnsembleSpec,
    grid: GridSpec,
    trials: usize,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            ensemble: EnsembleSpec::new(128, 2, 0.5, EntryDist::Gaussian, 1),
            grid: GridSpec::centered_square(0.9, 0.05),
            trials: 10,
        }
    }
}

// ---------------------------------------------------------------------------
// config loading with overrides

enum CliError {
    Config(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) | Error::Contract(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Run(other),
        }
    }
}

fn parse_override(raw: &str) -> Result<(Vec<String>, serde_json::Value), CliError> {
    let (path, value) = raw.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override '{raw}' must have the form key.path=value"))
    })?;
    let parsed = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    Ok((path.split('.').map(str::to_string).collect(), parsed))
}

fn apply_override(
    root: &mut serde_json::Value,
    path: &[String],
    value: serde_json::Value,
) -> Result<(), CliError> {
    let mut cursor = root;
    for key in &path[..path.len() - 1] {
        cursor = cursor
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override path '{key}' is not an object")))?
            .entry(key.clone())
            .or_insert(serde_json::Value::Object(Default::default()));
    }
    let last = path.last().unwrap().clone();
    cursor
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override path '{last}' is not an object")))?
        .insert(last, value);
    Ok(())
}

/// Load a typed config: file (or defaults), then --set overrides, then the
/// --seed and --ladder flags; unknown keys are rejected at deserialization.
fn load_config<T: DeserializeOwned + Serialize + Default>(cli: &Cli) -> Result<T, CliError> {
    let mut value: serde_json::Value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!(
                    "malformed JSON in {} at line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?
        }
        None => serde_json::to_value(T::default())
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    for raw in &cli.overrides {
        let (path, v) = parse_override(raw)?;
        apply_override(&mut value, &path, v)?;
    }
    if let Some(seed) = cli.seed {
        for key in ["master_seed"] {
            if value.get(key).is_some() {
                value[key] = serde_json::json!(seed);
            }
        }
        if let Some(ensemble) = value.get_mut("ensemble") {
            if ensemble.get("master_seed").is_some() {
                ensemble["master_seed"] = serde_json::json!(seed);
            }
        }
    }
    if let Some(ladder) = &cli.ladder {
        let rungs: Result<Vec<usize>, _> =
            ladder.split(',').map(|s| s.trim().parse::<usize>()).collect();
        let rungs = rungs.map_err(|e| CliError::Config(format!("bad --ladder: {e}")))?;
        for key in ["ladder", "tail_ladder", "appendix_ladder"] {
            if value.get(key).is_some() {
                value[key] = serde_json::json!(rungs);
            }
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_sample(cli: &Cli) -> Result<(), CliError> {
    let config: SampleConfig = load_config(cli)?;
    config.ensemble.validate()?;
    let mut manifest = io::Manifest::default();
    for trial in 0..config.trials as u64 {
        let factors = sample_factors(&config.ensemble, trial)?;
        for (qi, factor) in factors.iter().enumerate() {
            let path = cli.out.join(format!("factor_t{trial}_q{}.csv", qi + 1));
            io::write_matrix_csv(&path, factor)?;
            manifest.record(&cli.out, &path)?;
            if let Some(policy) = &config.ensemble.truncation {
                let truncated =
                    truncate_and_center(factor, policy.c, policy.tau_n(config.ensemble.n))?;
                let path = cli.out.join(format!("truncated_t{trial}_q{}.csv", qi + 1));
                io::write_matrix_csv(&path, &truncated)?;
                manifest.record(&cli.out, &path)?;
            }
        }
    }
    let spec_path = cli.out.join("ensemble.json");
    io::write_json(&spec_path, &config.ensemble)?;
    manifest.record(&cli.out, &spec_path)?;
    manifest.write(&cli.out)?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSidecar {
    n: usize,
    m: usize,
    rho: f64,
    z_re: f64,
    z_im: f64,
    seed: u64,
}

fn cmd_spectrum(cli: &Cli) -> Result<(), CliError> {
    let config: SpectrumConfig = load_config(cli)?;
    config.ensemble.validate()?;
    let mut manifest = io::Manifest::default();
    let factors = sample_factors(&config.ensemble, config.trial)?;
    let w = product(&factors)?;
    let eig = eigenvalues(&w)?;
    let eig_path = cli.out.join("eigenvalues.csv");
    io::write_complex_spectrum_csv(&eig_path, &eig)?;
    manifest.record(&cli.out, &eig_path)?;

    let lin = build_linearization(&factors, config.z)?;
    let sym = symmetrized_spectrum(&lin)?;
    let sym_path = cli.out.join("symmetrized.csv");
    io::write_symmetrized_csv(&sym_path, &sym)?;
    manifest.record(&cli.out, &sym_path)?;

    let sidecar = SpectrumSidecar {
        n: config.ensemble.n,
        m: config.ensemble.m,
        rho: config.ensemble.rho,
        z_re: config.z.re,
        z_im: config.z.im,
        seed: config.ensemble.master_seed,
    };
    let meta_path = cli.out.join("metadata.json");
    io::write_json(&meta_path, &sidecar)?;
    manifest.record(&cli.out, &meta_path)?;
    manifest.write(&cli.out)?;
    Ok(())
}

fn cmd_limit(cli: &Cli) -> Result<(), CliError> {
    let config: LimitConfig = load_config(cli)?;
    let law = LimitLaw::new(config.m)?;
    config.grid.validate()?;
    let mut manifest = io::Manifest::default();
    let mut density = Vec::new();
    let mut cdf = Vec::new();
    let mut potential = Vec::new();
    for iy in 0..config.grid.ny() {
        for ix in 0..config.grid.nx() {
            let z = config.grid.point(ix, iy);
            density.push((z.re, z.im, law.density(z.re, z.im)));
            cdf.push((z.re, z.im, law.radial_cdf(z.norm())?));
            potential.push((z.re, z.im, law.potential(z)));
        }
    }
    for (name, rows) in [
        ("density.csv", &density),
        ("radial_cdf.csv", &cdf),
        ("potential.csv", &potential),
    ] {
        let path = cli.out.join(name);
        io::write_xy_grid_csv(&path, rows)?;
        manifest.record(&cli.out, &path)?;
    }
    let mut rng = stream_rng(config.sample_seed, StreamKind::LimitSample, 0, 0);
    let samples = eplab_core::spectra::ComplexSpectrum {
        values: (0..config.samples).map(|_| law.sample(&mut rng)).collect(),
        n: config.samples,
    };
    let sample_path = cli.out.join("samples.csv");
    io::write_complex_spectrum_csv(&sample_path, &samples)?;
    manifest.record(&cli.out, &sample_path)?;
    manifest.write(&cli.out)?;
    Ok(())
}

fn cmd_solve(cli: &Cli) -> Result<(), CliError> {
    let config: SolveConfig = load_config(cli)?;
    let count = (2.0 * config.x_max / config.x_step).round() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| -config.x_max + i as f64 * config.x_step)
        .collect();
    let density = density_from_inversion(
        config.z,
        config.m,
        config.form,
        &grid,
        config.eps,
        config.tol,
        config.max_iter,
    )?;
    let mut manifest = io::Manifest::default();
    let path = cli.out.join("stieltjes.csv");
    io::write_stieltjes_csv(&path, &density)?;
    manifest.record(&cli.out, &path)?;
    let meta = cli.out.join("query.json");
    io::write_json(&meta, &config)?;
    manifest.record(&cli.out, &meta)?;
    manifest.write(&cli.out)?;
    eprintln!(
        "solved {} points, mass {:.4}, {} failures",
        count,
        density.mass(),
        density.failures.len()
    );
    Ok(())
}

fn cmd_potential(cli: &Cli) -> Result<(), CliError> {
    let config: PotentialConfig = load_config(cli)?;
    config.ensemble.validate()?;
    let grid = mean_potential_grid(&config.ensemble, &config.grid, config.trials)?;
    let mut manifest = io::Manifest::default();
    let upath = cli.out.join("potential.csv");
    io::write_potential_csv(&upath, &grid)?;
    manifest.record(&cli.out, &upath)?;
    let field = laplacian_density(&grid)?;
    let dpath = cli.out.join("density.csv");
    io::write_density_field_csv(&dpath, &field)?;
    manifest.record(&cli.out, &dpath)?;
    let meta = cli.out.join("config.json");
    io::write_json(&meta, &config)?;
    manifest.record(&cli.out, &meta)?;
    manifest.write(&cli.out)?;
    Ok(())
}

fn cmd_verify(cli: &Cli) -> Result<bool, CliError> {
    let config: VerifyConfig = load_config(cli)?;
    let (report, timings) = run_verification(&config)?;
    for criterion in &report.criteria {
        println!("{}", criterion.summary_line());
        for check in &criterion.checks {
            println!(
                "    [{}] {}: {:.6} (bound {})",
                if check.pass { "ok" } else { "FAIL" },
                check.name,
                check.statistic,
                check.bound
            );
        }
    }
    let mut manifest = io::Manifest::default();
    let report_path = cli.out.join("report.json");
    io::write_json(&report_path, &report)?;
    manifest.record(&cli.out, &report_path)?;
    // wall clock lives outside the deterministic report
    let timing_path = cli.out.join("timings.json");
    io::write_json(&timing_path, &timings)?;
    manifest.write(&cli.out)?;
    println!(
        "verification {}: report at {}",
        if report.all_pass { "PASSED" } else { "FAILED" },
        report_path.display()
    );
    Ok(report.all_pass)
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    if let Some(threads) = cli.threads {
        // a pre-existing global pool only matters in tests; ignore
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
    match cli.command {
        Command::Sample => cmd_sample(cli).map(|_| true),
        Command::Spectrum => cmd_spectrum(cli).map(|_| true),
        Command::Limit => cmd_limit(cli).map(|_| true),
        Command::Solve => cmd_solve(cli).map(|_| true),
        Command::Potential => cmd_potential(cli).map(|_| true),
        Command::Verify => cmd_verify(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
