//! Command-line front end: `tis`, `sweep`, `clock`, `verify`, `spectrum-check`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 IO.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::clock::{ProjectedClock, PROTOCOL_HEADER};
use crate::dynamics::{self, SWEEP_HEADER};
use crate::error::{Error, Result};
use crate::operators::fmt_f64;
use crate::spectrum::{Commensurability, Level, Spectrum, SpectrumKind};
use crate::time_invariant::{gcd_stabilization, invariant_set, STABILIZATION_HEADER};
use crate::verify::{run_suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tclock",
    version,
    about = "Characteristic time operator and quantum clock toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Spectrum family [default: harmonic]
    #[arg(long, global = true, value_enum)]
    pub spectrum: Option<SpectrumArg>,
    /// Base angular frequency ω [default: 1]
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Reduced Planck constant ħ [default: 1]
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Number of levels, which is also the truncation M [default: 64]
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Level pair `k,l` with k > l [default: 1,0]
    #[arg(long, global = true, value_parser = parse_pair)]
    pub pair: Option<(usize, usize)>,
    /// Spectrum config file (TOML); flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for Born-rule sampling and random test vectors
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Measurement shots; 0 reads the exact expectation
    #[arg(long, global = true, default_value_t = 0)]
    pub shots: u64,
    /// Offset τ from the nearest tick
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// End of the τ grid [default: one pair period 2π/ω_kl]
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    /// Number of τ grid points [default: 200]
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Completed clock cycles n, so that t = τ + n·P
    #[arg(long, global = true, default_value_t = 0, allow_negative_numbers = true)]
    pub cycles: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumArg {
    Harmonic,
    Box,
    Larmor,
    Custom,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-invariant set and gcd stabilization table
    Tis,
    /// Expectation and variance of T over a τ grid, closed form and matrix oracle
    Sweep,
    /// Two-level clock readout
    Clock {
        /// Spin-1/2 Larmor clock, H = ω·S_z
        #[arg(long)]
        larmor: bool,
    },
    /// Run the invariant suite; exits 1 if any check fails
    Verify {
        /// Flip the sign of T[row][col]
        #[arg(long, value_parser = parse_pair)]
        inject_fault: Option<(usize, usize)>,
        /// Emit machine-readable JSON only
        #[arg(long)]
        json: bool,
    },
    /// Partial sums of Σ E_s⁻² and a tail estimate
    SpectrumCheck,
}

fn parse_pair(text: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `k,l`, got `{text}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Spectrum config file: `kind`, `omega`, `hbar`, `levels` (`p/q` or
/// `irr:<float>` strings), `n_levels`, and optional `tag`/`label`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub kind: Option<SpectrumKind>,
    pub omega: Option<f64>,
    pub hbar: Option<f64>,
    pub levels: Option<Vec<String>>,
    pub n_levels: Option<usize>,
    pub tag: Option<Commensurability>,
    pub label: Option<String>,
}

impl SpectrumFile {
    pub fn load(path: &Path) -> Result<SpectrumFile> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        SpectrumFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<SpectrumFile> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spectrum: Spectrum,
    pub truncation: usize,
    pub pair: (usize, usize),
    pub tau: f64,
    pub tau_max: Option<f64>,
    pub steps: Option<usize>,
    pub shots: u64,
    pub seed: u64,
    pub cycles: i64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs, larmor: bool) -> Result<RunConfig> {
        let file = match &args.config {
            Some(path) => SpectrumFile::load(path)?,
            None => SpectrumFile::default(),
        };
        let kind = if larmor {
            SpectrumKind::Larmor
        } else {
            match args.spectrum {
                Some(SpectrumArg::Harmonic) => SpectrumKind::Harmonic,
                Some(SpectrumArg::Box) => SpectrumKind::Box,
                Some(SpectrumArg::Larmor) => SpectrumKind::Larmor,
                Some(SpectrumArg::Custom) => SpectrumKind::Custom,
                None => file.kind.unwrap_or(SpectrumKind::Harmonic),
            }
        };
        let omega = args.omega.or(file.omega).unwrap_or(1.0);
        let hbar = args.hbar.or(file.hbar).unwrap_or(1.0);
        let n_levels = args.levels.or(file.n_levels);
        let spectrum = match kind {
            SpectrumKind::Harmonic => with_hbar(Spectrum::harmonic(omega, n_levels.unwrap_or(64))?, hbar)?,
            SpectrumKind::Box => with_hbar(Spectrum::particle_in_box(omega, n_levels.unwrap_or(64))?, hbar)?,
            SpectrumKind::Larmor => Spectrum::larmor(omega, hbar)?,
            SpectrumKind::Custom => {
                let raw = file.levels.as_ref().ok_or_else(|| {
                    Error::InvalidSpectrum("custom spectrum needs `levels` in the config file".into())
                })?;
                let mut levels = raw.iter().map(|t| Level::parse(t)).collect::<Result<Vec<_>>>()?;
                if let Some(n) = n_levels {
                    if n > levels.len() {
                        return Err(Error::Truncation {
                            requested: n,
                            available: levels.len(),
                        });
                    }
                    levels.truncate(n);
                }
                if levels.len() < 2 {
                    return Err(Error::InvalidSpectrum("need at least 2 levels".into()));
                }
                Spectrum::custom(omega, hbar, levels, file.tag.unwrap_or(Commensurability::Commensurable))?
            }
        };
        let spectrum = match &file.label {
            Some(label) => spectrum.with_label(label.clone()),
            None => spectrum,
        };
        let truncation = spectrum.len();
        let pair = if larmor { (1, 0) } else { args.pair.unwrap_or((1, 0)) };
        if pair.0 >= truncation || pair.1 >= truncation || pair.0 <= pair.1 {
            return Err(Error::Index(format!(
                "pair ({},{}) needs {truncation} > k > l",
                pair.0, pair.1
            )));
        }
        if let Some(tau_max) = args.tau_max {
            if tau_max.is_nan() || tau_max <= 0.0 {
                return Err(Error::InvalidInput(format!("tau-max must be positive, got {tau_max}")));
            }
        }
        if args.steps == Some(0) {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        Ok(RunConfig {
            spectrum,
            truncation,
            pair,
            tau: args.tau.unwrap_or(0.0),
            tau_max: args.tau_max,
            steps: args.steps,
            shots: args.shots,
            seed: args.seed,
            cycles: args.cycles,
            out: args.out.clone(),
            format: args.format,
        })
    }

    fn tau_grid(&self) -> Vec<f64> {
        let (k, l) = self.pair;
        let period = std::f64::consts::TAU / self.spectrum.transition_frequency(k, l);
        dynamics::tau_grid(
            self.tau_max.unwrap_or(period),
            self.steps.unwrap_or(dynamics::DEFAULT_GRID_POINTS),
        )
    }
}

fn with_hbar(spectrum: Spectrum, hbar: f64) -> Result<Spectrum> {
    if hbar == 1.0 {
        return Ok(spectrum);
    }
    let kind = spectrum.kind();
    let label = spectrum.label().to_string();
    let rebuilt = Spectrum::custom(spectrum.omega(), hbar, spectrum.levels().to_vec(), spectrum.tag())?;
    debug_assert!(matches!(kind, SpectrumKind::Harmonic | SpectrumKind::Box));
    Ok(rebuilt.with_label(label))
}

enum Failure {
    BadInput(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::Io(io),
            other => Failure::BadInput(other),
        }
    }
}

fn emit(config: &RunConfig, text: &str) -> std::result::Result<(), Failure> {
    match &config.out {
        Some(path) => fs::write(path, text).map_err(Failure::Io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Failure::Io),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Tis => cmd_tis(&cli.global),
        Command::Sweep => cmd_sweep(&cli.global),
        Command::Clock { larmor } => cmd_clock(&cli.global, *larmor),
        Command::Verify { inject_fault, json } => cmd_verify(&cli.global, *inject_fault, *json),
        Command::SpectrumCheck => cmd_spectrum_check(&cli.global),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::BadInput(e)) => {
            eprintln!("error: {e}");
            EXIT_BAD_INPUT
        }
        Err(Failure::Io(e)) => {
            eprintln!("io error: {e}");
            EXIT_IO
        }
    }
}

#[derive(Serialize)]
struct TisJson {
    spectrum: String,
    truncation: usize,
    lattice: String,
    base_period: Option<f64>,
    gcd: Option<String>,
    stabilization: Vec<StabilizationJson>,
}

#[derive(Serialize)]
struct StabilizationJson {
    n: usize,
    gcd_p: String,
    gcd_q: String,
    stable: bool,
}

fn cmd_tis(args: &GlobalArgs) -> std::result::Result<i32, Failure> {
    let config = RunConfig::resolve(args, false)?;
    let s = &config.spectrum;
    let n = config.truncation;
    let set = invariant_set(s, n)?;
    let all_exact = s.levels().iter().all(|l| l.exact().is_some());
    let rows = if all_exact {
        gcd_stabilization(s, 2, n)?
    } else {
        Vec::new()
    };
    let text = match config.format {
        Format::Csv => {
            let mut text = format!("{set}\n");
            if set.is_lattice() {
                text.push_str(STABILIZATION_HEADER);
                text.push('\n');
                for row in &rows {
                    text.push_str(&row.to_csv_line());
                    text.push('\n');
                }
            }
            text
        }
        Format::Json => to_json(&TisJson {
            spectrum: s.label().to_string(),
            truncation: n,
            lattice: set.to_string(),
            base_period: set.base_period(),
            gcd: set.exact_base().map(|b| crate::rational::format_rational(&b.recip())),
            stabilization: rows
                .iter()
                .map(|r| StabilizationJson {
                    n: r.n,
                    gcd_p: r.gcd.numer().to_string(),
                    gcd_q: r.gcd.denom().to_string(),
                    stable: r.stable,
                })
                .collect(),
        }),
    };
    emit(&config, &text)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(args: &GlobalArgs) -> std::result::Result<i32, Failure> {
    let config = RunConfig::resolve(args, false)?;
    let (k, l) = config.pair;
    let rows = dynamics::sweep(
        &config.spectrum,
        k,
        l,
        config.cycles,
        config.truncation,
        &config.tau_grid(),
    )?;
    let text = match config.format {
        Format::Csv => {
            let mut text = format!("{SWEEP_HEADER}\n");
            for row in &rows {
                text.push_str(&row.to_csv_line());
                text.push('\n');
            }
            text
        }
        Format::Json => to_json(&rows),
    };
    emit(&config, &text)?;
    Ok(EXIT_OK)
}

fn cmd_clock(args: &GlobalArgs, larmor: bool) -> std::result::Result<i32, Failure> {
    let config = RunConfig::resolve(args, larmor)?;
    let (k, l) = config.pair;
    let clock = ProjectedClock::new(&config.spectrum, k, l)?;
    let taus = match config.steps {
        Some(_) => config.tau_grid(),
        None => vec![config.tau],
    };
    let rows = taus
        .iter()
        .map(|&tau| clock.run_protocol(tau, config.cycles, config.shots, config.seed))
        .collect::<Result<Vec<_>>>()?;
    for row in rows.iter().filter(|r| !r.reading.near_tick) {
        eprintln!(
            "note: tau = {} is far from tick (uncertainty product {})",
            fmt_f64(row.tau_true),
            fmt_f64(row.reading.uncertainty_product)
        );
    }
    for row in rows.iter().filter(|r| r.reading.clamped) {
        eprintln!(
            "note: tau = {} readout clamped to the principal branch",
            fmt_f64(row.tau_true)
        );
    }
    let text = match config.format {
        Format::Csv => {
            let mut text = format!("{PROTOCOL_HEADER}\n");
            for row in &rows {
                text.push_str(&row.to_csv_line());
                text.push('\n');
            }
            text
        }
        Format::Json => to_json(&rows),
    };
    emit(&config, &text)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &GlobalArgs, fault: Option<(usize, usize)>, json: bool) -> std::result::Result<i32, Failure> {
    if let Some((r, c)) = fault {
        if r == c {
            return Err(Failure::BadInput(Error::InvalidInput(
                "fault must be off-diagonal; the diagonal of T is zero".into(),
            )));
        }
    }
    let config = VerifyConfig {
        omega: args.omega.unwrap_or(1.0),
        levels: args.levels.unwrap_or(64),
        seed: args.seed,
        fault,
    };
    if config.levels < 10 {
        return Err(Failure::BadInput(Error::InvalidInput(format!(
            "verify needs at least 10 levels, got {}",
            config.levels
        ))));
    }
    let report = run_suite(&config);
    let json_text = to_json(&report);
    if json || args.format == Format::Json {
        match &args.out {
            Some(path) => fs::write(path, &json_text).map_err(Failure::Io)?,
            None => std::io::stdout().write_all(json_text.as_bytes()).map_err(Failure::Io)?,
        }
    } else {
        std::io::stdout()
            .write_all(report.table().as_bytes())
            .map_err(Failure::Io)?;
        if let Some(path) = &args.out {
            fs::write(path, &json_text).map_err(Failure::Io)?;
        }
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_spectrum_check(args: &GlobalArgs) -> std::result::Result<i32, Failure> {
    let config = RunConfig::resolve(args, false)?;
    let s = &config.spectrum;
    let report = s.growth_condition_report(s.natural_extension());
    let text = match config.format {
        Format::Csv => {
            let mut text = String::from("s,f,energy,partial_sum\n");
            for (i, sum) in report.partial_sums.iter().enumerate() {
                text.push_str(&format!(
                    "{i},{},{},{}\n",
                    s.levels()[i],
                    fmt_f64(s.energy(i)),
                    fmt_f64(*sum)
                ));
            }
            match report.tail_estimate {
                Some(tail) => text.push_str(&format!(
                    "# tail_estimate={} total_estimate={} condition_plausible={}\n",
                    fmt_f64(tail),
                    fmt_f64(report.stored_sum() + tail),
                    report.condition_plausible.unwrap_or(false)
                )),
                None => text.push_str("# no extension rule; plausibility not assessed\n"),
            }
            text
        }
        Format::Json => to_json(&report),
    };
    emit(&config, &text)?;
    Ok(EXIT_OK)
}
