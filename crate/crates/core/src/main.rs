use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vkf::cli_io::run::{certify, pressure_report, validate_config};
use vkf::cli_io::{fit_order, run, ConfigError, FieldKind, RunError, ScenarioConfig, Snapshot};
use vkf::coupling::EnergyLedger;
use vkf::mesh::{CellMagnitudes, ScalarField};
use vkf::orlicz::luxemburg_norm;

#[derive(Parser)]
#[command(name = "vkf", version, about = "Vlasov / variable-exponent fluid simulator and numerics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check scenario configs: structure, exponent bounds, covering and stress certificates.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Luxemburg norm of a snapshot field.
    Norm {
        #[arg(long)]
        field: PathBuf,
        /// Exponent snapshot file (concatenated slabs).
        #[arg(long, conflicts_with = "s")]
        exponent: Option<PathBuf>,
        /// Constant exponent.
        #[arg(long)]
        s: Option<f64>,
        /// Domain extents `Lx,Ly`.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
        extent: Vec<f64>,
    },
    /// Monotonicity and coercivity certificates of the configured stress law.
    StressAudit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
    },
    /// Pressure bound ratios and locality report as CSV.
    PressureTest {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Coupled simulation writing a ledger and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Fixed time step overriding the config.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Convergence order of the accumulated energy residual over ledgers at decreasing dt.
    EnergyReport {
        #[arg(required = true, num_args = 2..)]
        ledgers: Vec<PathBuf>,
        /// Exit with status 1 when the fitted order is below this value.
        #[arg(long)]
        min_order: Option<f64>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn from_run_error(e: RunError) -> ExitCode {
    let code = e.exit_code() as u8;
    fail(code, e)
}

fn load_config(path: &Path) -> Result<ScenarioConfig, RunError> {
    Ok(ScenarioConfig::load(path)?)
}

fn validate_cmd(paths: &[PathBuf]) -> ExitCode {
    let mut worst = 0u8;
    for p in paths {
        let outcome = load_config(p).and_then(|cfg| {
            let (exponent, report, balls) = validate_config(&cfg)?;
            let (_, cert, mono) = certify(&cfg, exponent)?;
            Ok((report, balls, cert, mono))
        });
        match outcome {
            Ok((report, balls, cert, mono)) => {
                let holder = report.log_holder.iter().copied().fold(0.0, f64::max);
                println!(
                    "{}: pass  s in [{}, {}], log-Holder {:.4}, {} balls, c = {}, h_bar = {:e}, monotone min {:e}",
                    p.display(),
                    report.min,
                    report.max,
                    holder,
                    balls,
                    cert.c,
                    cert.h_bar,
                    mono.worst_normalized
                );
            }
            Err(e) => {
                println!("{}: FAIL  {e}", p.display());
                worst = worst.max(e.exit_code() as u8);
            }
        }
    }
    ExitCode::from(worst)
}

fn read_snapshots(path: &Path) -> Result<Vec<Snapshot>, String> {
    let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Snapshot::read_all(&mut BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
}

fn norm_cmd(field: &Path, exponent: Option<&Path>, s: Option<f64>, extent: [f64; 2]) -> Result<f64, String> {
    let snaps = read_snapshots(field)?;
    let snap = match snaps.as_slice() {
        [one] => one,
        _ => return Err(format!("{}: expected exactly one snapshot", field.display())),
    };
    let xi: Box<dyn CellMagnitudes> = match snap.kind {
        FieldKind::Scalar => Box::new(snap.to_scalar(extent).map_err(|e| e.to_string())?),
        FieldKind::CellVector => Box::new(snap.to_cell_vector(extent).map_err(|e| e.to_string())?),
        FieldKind::SymTensor => Box::new(snap.to_tensor(extent).map_err(|e| e.to_string())?),
        FieldKind::MacVelocity => Box::new(snap.to_velocity(extent).map_err(|e| e.to_string())?),
        FieldKind::Particles => return Err("particle snapshots have no norm".into()),
    };
    let mesh = *xi.mesh();
    let s_field = match (exponent, s) {
        (_, Some(v)) => ScalarField::constant(mesh, v),
        (Some(path), None) => {
            let slabs = read_snapshots(path)?;
            let slab = slabs
                .iter()
                .filter(|sl| sl.time <= snap.time)
                .last()
                .ok_or_else(|| format!("{}: no slab starts before t = {}", path.display(), snap.time))?;
            let f = slab.to_scalar(extent).map_err(|e| e.to_string())?;
            if f.mesh != mesh {
                return Err("exponent and field grids differ".into());
            }
            f
        }
        (None, None) => return Err("give --exponent or --s".into()),
    };
    luxemburg_norm(xi.as_ref(), &s_field).map_err(|e| e.to_string())
}

fn stress_audit(path: &Path, pairs: usize) -> Result<(), RunError> {
    let cfg = load_config(path)?;
    let exponent = cfg.exponent_field()?;
    let (law, cert, _) = certify(&cfg, exponent)?;
    let mono = vkf::rheology::certify_monotone(&law, pairs, vkf::cli_io::module_seed(cfg.seed, "rheology"));
    println!("monotone_pairs,{}", mono.samples);
    println!("monotone_worst_inner,{:e}", mono.worst_inner);
    println!("monotone_worst_normalized,{:e}", mono.worst_normalized);
    println!("coercivity_c,{}", cert.c);
    println!("coercivity_h_bar,{:e}", cert.h_bar);
    println!("coercivity_worst_margin,{:e}", cert.worst_margin);
    if let Some(r) = cert.regularized {
        println!("regularized_c,{}", r.c_theta);
        println!("regularized_h,{:e}", r.h_theta);
        println!("regularized_worst_margin,{:e}", r.worst_margin);
    }
    if mono.worst_normalized < vkf::cli_io::run::MONOTONE_TOL {
        return Err(RunError::Certificate(format!("monotonicity inner product {:e}", mono.worst_normalized)));
    }
    Ok(())
}

fn pressure_cmd(path: &Path, output: Option<&Path>) -> Result<(), RunError> {
    let cfg = load_config(path)?;
    let report = pressure_report(&cfg)?;
    match output {
        Some(p) => report.write_csv(File::create(p)?)?,
        None => report.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn run_cmd(path: &Path, dt: Option<f64>, out: Option<PathBuf>) -> Result<(), RunError> {
    let mut cfg = load_config(path)?;
    if let Some(dt) = dt {
        cfg.time.dt = Some(dt);
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg.check()?;
    let outcome = run(&cfg, &cfg.output_dir)?;
    let last = outcome.ledger.last().copied().unwrap_or_default();
    println!(
        "{} steps to t = {}; E_fluid = {:e}, E_kin = {:e}, residual_cum = {:e}; ledger in {}",
        outcome.steps,
        last.t,
        last.e_fluid,
        last.e_kin,
        last.residual_cum,
        cfg.output_dir.join("ledger.csv").display()
    );
    Ok(())
}

fn energy_report(paths: &[PathBuf], min_order: Option<f64>) -> Result<bool, RunError> {
    let ledgers = paths
        .iter()
        .map(|p| {
            let f = File::open(p).map_err(|e| ConfigError::Io { path: p.clone(), source: e })?;
            Ok(EnergyLedger::read_csv(BufReader::new(f))?)
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let fit = fit_order(&ledgers)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "dt,residual_cum")?;
    for (dt, r) in fit.dts.iter().zip(&fit.residuals) {
        writeln!(out, "{dt},{r}")?;
    }
    writeln!(out, "order = {:.4}", fit.order)?;
    Ok(min_order.is_none_or(|m| fit.order >= m))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { configs } => validate_cmd(&configs),
        Command::Norm { extent, .. } if extent.len() != 2 => fail(2, "--extent takes Lx,Ly"),
        Command::Norm { field, exponent, s, extent } => {
            match norm_cmd(&field, exponent.as_deref(), s, [extent[0], extent[1]]) {
                Ok(v) => {
                    println!("{v}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(2, e),
            }
        }
        Command::StressAudit { config, pairs } => match stress_audit(&config, pairs) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => from_run_error(e),
        },
        Command::PressureTest { config, output } => match pressure_cmd(&config, output.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => from_run_error(e),
        },
        Command::Run { config, dt, output_dir } => match run_cmd(&config, dt, output_dir) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => from_run_error(e),
        },
        Command::EnergyReport { ledgers, min_order } => match energy_report(&ledgers, min_order) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => fail(1, "fitted order below the requested minimum"),
            Err(e) => from_run_error(e),
        },
    }
}
