//! The `tweedie` command-line tool.
//!
//! Every subcommand writes a report to stdout, JSON unless `--format csv` is
//! given (`sample` defaults to CSV). Failures are reported on stderr as
//! `{"error": {"kind": ..., "message": ...}}`.
//!
//! Exit codes: 0 on success, 1 for domain, input and numerical errors, 2 for
//! usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tweedie_divergence as tw;
use tweedie_divergence::{DensityMethod, FitOptions, PowerIndex, SamplerConfig, TweedieParams};

pub mod input;
pub mod table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "tweedie",
    version,
    about = "Tweedie divergences, densities, sampling and fitting"
)]
pub struct Cli {
    /// Output format; `sample` defaults to csv, everything else to json.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an alpha or beta divergence.
    #[command(allow_negative_numbers = true)]
    Div(DivArgs),
    /// Evaluate a log-density.
    #[command(allow_negative_numbers = true)]
    Pdf(PdfArgs),
    /// Draw variates.
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Fit mean, dispersion and power index to a column of data.
    #[command(allow_negative_numbers = true)]
    Fit(FitArgs),
    /// Tabulate deviance and profile log-likelihood over a grid of p.
    #[command(allow_negative_numbers = true)]
    Profile(ProfileArgs),
    /// Print the p / distribution / divergence correspondence.
    #[command(allow_negative_numbers = true)]
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Series,
    Saddlepoint,
}

impl From<Method> for DensityMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Exact => DensityMethod::ExactClosedForm,
            Method::Series => DensityMethod::Series,
            Method::Saddlepoint => DensityMethod::Saddlepoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct DivArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub mu: f64,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub phi: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub phi: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Write the variates here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with one numeric column, or `-` for stdin.
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub input: String,
    /// Comma-separated power indices.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p_min", "p_max", "grid_step"])]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Emit duality curves instead of the table.
    #[arg(long)]
    pub curves: bool,
    #[arg(long, value_delimiter = ',', default_value = "0,1,1.5,2,3")]
    pub powers: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.05)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 80)]
    pub points: usize,
}

/// Errors that end a run with exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] tw::Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(e) => match e {
                tw::Error::NonFinite { .. } => "non_finite",
                tw::Error::Domain { .. } => "domain",
                tw::Error::NoModel(_) => "no_model",
                tw::Error::UnsupportedMethod { .. } => "unsupported_method",
                tw::Error::OutsideSupport { .. } => "outside_support",
                tw::Error::SeriesNonConvergence { .. } => "series_non_convergence",
                tw::Error::UnsupportedSampler(_) => "unsupported_sampler",
                tw::Error::EmptyData => "empty_data",
                tw::Error::NoFeasiblePower => "no_feasible_power",
                tw::Error::InvalidArgument(_) => "invalid_argument",
            },
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdin, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let report = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            let _ = writeln!(stderr, "{report}");
            1
        }
    }
}

fn execute(
    cli: &Cli,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::Sample(_) => Format::Csv,
        _ => Format::Json,
    });
    match &cli.command {
        Command::Div(a) => div(a, format, stdout),
        Command::Pdf(a) => pdf(a, format, stdout),
        Command::Sample(a) => sample(a, format, stdout),
        Command::Fit(a) => fit(a, format, stdin, stdout, stderr),
        Command::Profile(a) => profile(a, format, stdin, stdout),
        Command::Table(a) => table(a, format, stdout),
    }
}

/// Formats a float with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io::Error::from)?;
    for row in rows {
        w.write_record(row).map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn div(a: &DivArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let p = PowerIndex::new(a.p)?;
    let value = match a.kind {
        Kind::Alpha => tw::alpha_divergence(p, a.x, a.mu)?,
        Kind::Beta => tw::beta_divergence(p, a.x, a.mu)?,
    };
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "version": VERSION,
                "command": "div",
                "kind": a.kind,
                "p": a.p,
                "x": a.x,
                "mu": a.mu,
                "value": value,
            }),
        ),
        Format::Csv => write_csv(
            out,
            &["kind", "p", "x", "mu", "value"],
            &[vec![
                serde_json::to_value(a.kind)
                    .map_or(String::new(), |v| v.as_str().unwrap_or("").to_string()),
                num(a.p),
                num(a.x),
                num(a.mu),
                num(value),
            ]],
        ),
    }
}

fn pdf(a: &PdfArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let params = TweedieParams::new(a.mu, a.phi, PowerIndex::new(a.p)?)?;
    let eval = tw::log_density(&params, a.x, a.method.map(Into::into))?;
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "version": VERSION,
                "command": "pdf",
                "p": a.p,
                "mu": a.mu,
                "phi": a.phi,
                "x": a.x,
                "log_density": eval.log_density,
                "method": eval.method,
                "series_terms_used": eval.series_terms_used,
                "warnings": eval.warnings,
            }),
        ),
        Format::Csv => write_csv(
            out,
            &[
                "p",
                "mu",
                "phi",
                "x",
                "log_density",
                "method",
                "series_terms_used",
            ],
            &[vec![
                num(a.p),
                num(a.mu),
                num(a.phi),
                num(a.x),
                num(eval.log_density),
                eval.method.as_str().to_string(),
                eval.series_terms_used.to_string(),
            ]],
        ),
    }
}

fn sample(a: &SampleArgs, format: Format, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = TweedieParams::new(a.mu, a.phi, PowerIndex::new(a.p)?)?;
    let values = tw::sample(&params, SamplerConfig::new(a.seed, a.n))?;

    let mut file;
    let out: &mut dyn Write = match &a.output {
        Some(path) => {
            file = BufWriter::new(File::create(path)?);
            &mut file
        }
        None => stdout,
    };
    match format {
        Format::Csv => {
            writeln!(out, "x")?;
            for v in &values {
                writeln!(out, "{}", num(*v))?;
            }
        }
        Format::Json => write_json(
            out,
            &json!({
                "version": VERSION,
                "command": "sample",
                "seed": a.seed,
                "p": a.p,
                "mu": a.mu,
                "phi": a.phi,
                "n": a.n,
                "values": values,
            }),
        )?,
    }
    out.flush()?;
    Ok(())
}

fn fit(
    a: &FitArgs,
    format: Format,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let data = input::read_dataset(&a.input, stdin)?;
    let mut opts = FitOptions {
        p_min: a.p_min,
        p_max: a.p_max,
        ..FitOptions::default()
    };
    if let Some(step) = a.grid_step {
        opts.grid_step = step;
    }
    let r = tw::fit(&data, &opts)?;
    if !r.converged {
        writeln!(
            stderr,
            "warning: the optimizer did not fully converge; see \"converged\" in the report"
        )?;
    }
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "version": VERSION,
                "command": "fit",
                "input": a.input,
                "n": data.len(),
                "options": opts,
                "result": r,
            }),
        ),
        Format::Csv => write_csv(
            out,
            &[
                "p_hat",
                "mu_hat",
                "phi_hat",
                "log_likelihood",
                "total_deviance",
                "mean_deviance_phi",
                "density_method",
                "converged",
                "p_feasible_min",
                "p_feasible_max",
            ],
            &[vec![
                num(r.p_hat),
                num(r.mu_hat),
                num(r.phi_hat),
                num(r.log_likelihood),
                num(r.total_deviance),
                num(r.mean_deviance_phi),
                r.density_method.as_str().to_string(),
                r.converged.to_string(),
                num(r.p_feasible_interval.0),
                num(r.p_feasible_interval.1),
            ]],
        ),
    }
}

fn profile(
    a: &ProfileArgs,
    format: Format,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let grid = match &a.grid {
        Some(g) => g.clone(),
        None => {
            let step_ok = a.grid_step > 0.0 && a.grid_step.is_finite();
            if !step_ok || a.p_min > a.p_max {
                return Err(tw::Error::InvalidArgument(format!(
                    "bad grid: p-min {} p-max {} step {}",
                    a.p_min, a.p_max, a.grid_step
                ))
                .into());
            }
            let n = ((a.p_max - a.p_min) / a.grid_step + 1e-9).floor() as usize;
            (0..=n).map(|i| a.p_min + i as f64 * a.grid_step).collect()
        }
    };
    let data = input::read_dataset(&a.input, stdin)?;
    let rows = tw::deviance_profile(&data, &grid, &FitOptions::default());
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "version": VERSION,
                "command": "profile",
                "input": a.input,
                "n": data.len(),
                "rows": rows,
            }),
        ),
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.p),
                        r.feasible.to_string(),
                        opt_num(r.total_deviance),
                        opt_num(r.log_likelihood),
                        opt_num(r.phi_hat),
                        r.method.map(|m| m.as_str().to_string()).unwrap_or_default(),
                        r.note.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv(
                out,
                &[
                    "p",
                    "feasible",
                    "total_deviance",
                    "log_likelihood",
                    "phi_hat",
                    "method",
                    "note",
                ],
                &body,
            )
        }
    }
}

fn table(a: &TableArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    if a.curves {
        let curves = table::duality_curves(&a.powers, a.mu, a.x_min, a.x_max, a.points)?;
        return match format {
            Format::Json => write_json(
                out,
                &json!({ "version": VERSION, "command": "table", "curves": curves }),
            ),
            Format::Csv => {
                let body: Vec<Vec<String>> = curves
                    .iter()
                    .map(|c| {
                        vec![
                            num(c.p),
                            num(c.x),
                            num(c.mu),
                            num(c.alpha),
                            num(c.alpha_dual),
                            num(c.beta),
                        ]
                    })
                    .collect();
                write_csv(out, &["p", "x", "mu", "alpha", "alpha_dual", "beta"], &body)
            }
        };
    }
    match format {
        Format::Json => write_json(
            out,
            &json!({ "version": VERSION, "command": "table", "rows": table::TABLE }),
        ),
        Format::Csv => {
            let body: Vec<Vec<String>> = table::TABLE
                .iter()
                .map(|r| {
                    [r.p, r.ratio, r.distribution, r.beta, r.alpha, r.entropy]
                        .map(str::to_string)
                        .to_vec()
                })
                .collect();
            write_csv(
                out,
                &["p", "ratio", "distribution", "beta", "alpha", "entropy"],
                &body,
            )
        }
    }
}
