mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagrangian_lab::error::GeomError;
use lagrangian_lab::gallery::REGISTRY;

use crate::commands::{AsymptoticsArgs, CurvatureTarget, Outcome};
use crate::config::{Format, Overrides};
use crate::output::RunOutput;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "LAGLAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Check(String),
    Geom(GeomError),
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Geom(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Check(_) | CliError::Geom(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Geom(e) => write!(f, "computation failed: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lagrangian-lab", version, about = "Verification runs for Lagrangian geometry in C^n")]
struct Cli {
    /// Tolerance overriding every check's default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Quadrature resolution (default 48).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Directory for the report and CSV tables; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value file with defaults for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|e| format!("'{v}': {e}"))?;
    Ok((k.to_string(), v))
}

#[derive(Args, Debug)]
struct Example {
    /// Gallery example: plane, lawlor2, sl-z2, grim-reaper, hl-cone, hl-smoothing.
    #[arg(long)]
    name: String,
    /// Example parameter as key=value; `--key value` is accepted too.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
}

impl Example {
    fn params(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Angle, Lagrangian, exactness and curvature checks for a gallery example.
    GalleryVerify(Example),
    /// Classify a plane curve and measure the total curvature of its rotation.
    Classify {
        #[arg(long)]
        poly: String,
        /// Truncation of the curve parametrization, in units of its neck scale.
        #[arg(long, default_value_t = 20.0)]
        curve_extent: f64,
    },
    /// Gaussian densities of an example over a range of scales.
    Density {
        #[command(flatten)]
        example: Example,
        /// Centre as 2n comma-separated real coordinates (x1,y1,x2,y2,...); origin by default.
        #[arg(long)]
        x0: Option<String>,
        #[arg(long, default_value = "0.01,0.1,1,4")]
        scales: String,
    },
    /// Soliton and angle-evolution residuals.
    FlowCheck(Example),
    /// Decay of the graph over a plane and radial energy identities.
    Asymptotics {
        #[command(flatten)]
        example: Example,
        #[arg(long, default_value = "2,10")]
        annulus: String,
        /// Angles of the reference plane.
        #[arg(long, default_value = "0,0")]
        plane: String,
        #[arg(long, default_value_t = 16)]
        stations: usize,
        #[arg(long, default_value_t = 12)]
        angles: usize,
        /// Radii for the energy table (comma-separated).
        #[arg(long)]
        rho: Option<String>,
    },
    /// Total curvature of a polynomial curve or a gallery example.
    Curvature {
        #[arg(long, required_unless_present = "name", conflicts_with = "name")]
        poly: Option<String>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 20.0)]
        curve_extent: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GalleryVerify(_) => "gallery-verify",
            Command::Classify { .. } => "classify",
            Command::Density { .. } => "density",
            Command::FlowCheck(_) => "flow-check",
            Command::Asymptotics { .. } => "asymptotics",
            Command::Curvature { .. } => "curvature",
        }
    }
}

/// Rewrites `--key value` and `--key=value` for gallery parameter names into `--param key=value`.
fn expand_param_flags(args: Vec<String>) -> Vec<String> {
    let known: Vec<&str> = REGISTRY.iter().flat_map(|e| e.params.iter().map(|p| p.name)).collect();
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter().peekable();
    while let Some(a) = it.next() {
        if let Some(flag) = a.strip_prefix("--") {
            if let Some((k, v)) = flag.split_once('=') {
                if known.contains(&k) {
                    out.push("--param".into());
                    out.push(format!("{k}={v}"));
                    continue;
                }
            } else if known.contains(&flag) {
                if let Some(v) = it.next() {
                    out.push("--param".into());
                    out.push(format!("{flag}={v}"));
                    continue;
                }
            }
        }
        out.push(a);
    }
    out
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let settings = config::resolve(
        Overrides {
            tol: cli.tol,
            grid: cli.grid,
            out: cli.out,
            format: cli.format,
            seed: cli.seed,
        },
        cli.config.as_deref(),
    )?;
    let s = &settings;
    let name = cli.command.name();
    let Outcome { reports, data, tables } = match &cli.command {
        Command::GalleryVerify(ex) => commands::gallery_verify(&ex.name, &ex.params(), s)?,
        Command::Classify { poly, curve_extent } => commands::classify(poly, *curve_extent, s)?,
        Command::Density { example, x0, scales } => {
            commands::density(&example.name, &example.params(), x0.as_deref(), scales, s)?
        }
        Command::FlowCheck(ex) => commands::flow_check(&ex.name, &ex.params(), s)?,
        Command::Asymptotics {
            example,
            annulus,
            plane,
            stations,
            angles,
            rho,
        } => commands::asymptotics(
            &example.name,
            &example.params(),
            AsymptoticsArgs {
                annulus,
                plane,
                stations: *stations,
                angles: *angles,
                rho: rho.as_deref(),
            },
            s,
        )?,
        Command::Curvature {
            poly,
            name: example,
            params,
            curve_extent,
        } => {
            let params: BTreeMap<String, f64> = params.iter().cloned().collect();
            let target = match (poly, example) {
                (Some(p), _) => CurvatureTarget::Poly(p),
                (None, Some(n)) => CurvatureTarget::Gallery(n, &params),
                (None, None) => return Err(CliError::Usage("give --poly or --name".into())),
            };
            commands::curvature(target, *curve_extent, s)?
        }
    };
    for r in &reports {
        eprintln!("{}", r.summary());
    }
    let out = RunOutput::new(name, s, reports, data);
    output::emit(&out, &tables, s)?;
    Ok(out.pass)
}

fn main() -> ExitCode {
    let args = expand_param_flags(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn gallery_flags_become_params() {
        let out = expand_param_flags(strings(&["bin", "gallery-verify", "--name", "lawlor2", "--a", "2", "--b=0.5"]));
        assert_eq!(
            out,
            strings(&["bin", "gallery-verify", "--name", "lawlor2", "--param", "a=2", "--param", "b=0.5"])
        );
        let untouched = strings(&["bin", "classify", "--poly", "x*y - 1", "--grid", "32"]);
        assert_eq!(expand_param_flags(untouched.clone()), untouched);
    }

    #[test]
    fn key_value_parsing() {
        assert_eq!(parse_kv("a=1.5").unwrap(), ("a".to_string(), 1.5));
        assert!(parse_kv("a").is_err());
        assert!(parse_kv("a=x").is_err());
    }
}
