//! Command-line front end: `couple`, `validate` and `quadrature`.
//!
//! Exit codes: 0 on success, 1 when validation or the run fails, 2 on usage
//! errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use csvt_core::{
    parse_coupling_config, parse_mesh, quadrature_points, run_couple, validate_dataset,
    write_targets_csv, Backend, CouplingConfig, Overrides, TimeMode, TimeSpec,
};
use log::{error, info, warn, LevelFilter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "csvt-couple",
    version,
    about = "Interpolate scattered time-series data onto FEM quadrature points"
)]
struct Cli {
    /// Log level written to stderr (error, warn, info, debug, trace)
    #[arg(long, global = true, default_value = "warn")]
    log_level: LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interpolate the configured dataset and write a new csvt hierarchy
    Couple(CoupleArgs),
    /// Check the configuration and every referenced file
    Validate {
        /// Coupling configuration XML
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the quadrature points of a mesh as CSV
    Quadrature {
        /// Mesh file
        #[arg(long)]
        mesh: PathBuf,
        /// Only elements tagged with this region
        #[arg(long)]
        region: Option<String>,
        /// Quadrature order
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Output CSV path
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CoupleArgs {
    /// Coupling configuration XML
    #[arg(long)]
    config: PathBuf,
    /// Mesh whose quadrature points are the targets
    #[arg(long, conflicts_with = "targets_file")]
    mesh: Option<PathBuf>,
    /// Only elements tagged with this region
    #[arg(long)]
    region: Option<String>,
    /// Quadrature order (points per direction; degree for triangles)
    #[arg(long)]
    order: Option<usize>,
    /// Explicit target points, laid out like the coordinates file
    #[arg(long)]
    targets_file: Option<PathBuf>,
    /// Neighbors per target
    #[arg(long)]
    k: Option<usize>,
    /// Inverse-distance exponent
    #[arg(long)]
    p: Option<f64>,
    /// nearest, hold_previous or linear
    #[arg(long)]
    time_mode: Option<TimeMode>,
    /// Comma-separated query times, or all-steps
    #[arg(long)]
    times: Option<TimeSpec>,
    /// kdtree or linear
    #[arg(long)]
    backend: Option<Backend>,
    /// Output directory for the new csvt hierarchy
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Command-line paths are relative to the working directory, not the config file.
fn absolute(p: &Path) -> String {
    let abs = if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().unwrap_or_default().join(p)
    };
    abs.to_string_lossy().into_owned()
}

impl CoupleArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mesh: self.mesh.as_deref().map(absolute),
            region: self.region.clone(),
            order: self.order,
            targets_file: self.targets_file.as_deref().map(absolute),
            k: self.k,
            p: self.p,
            time_mode: self.time_mode,
            times: self.times.clone(),
            backend: self.backend,
            output: self.output.as_deref().map(absolute),
        }
    }
}

fn init_logging(level: LevelFilter) {
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
    log::set_max_level(level);
}

fn load_config(path: &Path) -> Result<CouplingConfig, i32> {
    parse_coupling_config(path).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAILURE
    })
}

/// Prints the report; returns false when it holds errors.
fn report_ok(config: &CouplingConfig) -> bool {
    let report = validate_dataset(config);
    for f in report.warnings() {
        warn!("{}: {}", f.location, f.message);
    }
    if report.has_errors() {
        eprint!("{report}");
        return false;
    }
    true
}

fn couple(args: &CoupleArgs) -> Result<(), i32> {
    let mut config = load_config(&args.config)?;
    config.apply_overrides(&args.overrides()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })?;
    if !report_ok(&config) {
        return Err(EXIT_FAILURE);
    }
    let out = run_couple(&config).map_err(|e| {
        error!("{e}");
        eprintln!("error: {e}");
        EXIT_FAILURE
    })?;
    info!("output master {}", out.master.display());
    Ok(())
}

fn validate(config: &Path) -> Result<(), i32> {
    let config = load_config(config)?;
    let report = validate_dataset(&config);
    eprint!("{report}");
    if report.has_errors() {
        Err(EXIT_FAILURE)
    } else {
        Ok(())
    }
}

fn quadrature(mesh: &Path, region: Option<&str>, order: usize, output: &Path) -> Result<(), i32> {
    let fail = |e: csvt_core::Error| {
        eprintln!("error: {e}");
        EXIT_FAILURE
    };
    let mesh = parse_mesh(mesh).map_err(fail)?;
    let targets = quadrature_points(&mesh, order, region).map_err(fail)?;
    write_targets_csv(&targets, output).map_err(fail)?;
    info!("wrote {} quadrature points to {}", targets.len(), output.display());
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.log_level);
    let result = match &cli.command {
        Command::Couple(args) => couple(args),
        Command::Validate { config } => validate(config),
        Command::Quadrature {
            mesh,
            region,
            order,
            output,
        } => quadrature(mesh, region.as_deref(), *order, output),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
