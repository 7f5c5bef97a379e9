//! `photologic`: figure tables as CSV and the self-check suite.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use photologic_core::chsh::linspace;
use photologic_core::figures::{
    bell_max_table, bell_sweep_table, fidelity_vs_t_table, fidelity_vs_xi_table, scatter_table, tcrit_table,
};
use photologic_core::validation::{self, ValidationOptions};
use photologic_core::{Decoherence, MissedPhoton, Table, VarianceMode};

use config::{merge, ConfigFile, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "photologic", version, about = "Heralded two-atom logic: figure tables and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo samples per estimate.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Aperture half-angle, rad.
    #[arg(long, global = true)]
    theta0: Option<f64>,
    #[arg(long, global = true, conflicts_with = "temperature")]
    t_over_tcr: Option<f64>,
    /// Kelvin.
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Scatter ratios, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    xi: Option<Vec<f64>>,
    #[arg(long, global = true)]
    nu_perp: Option<f64>,
    #[arg(long, global = true)]
    nu_par: Option<f64>,
    #[arg(long, global = true)]
    nu_recoil: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pattern: Option<Pattern>,
    #[arg(long, global = true)]
    x_min: Option<f64>,
    #[arg(long, global = true)]
    x_max: Option<f64>,
    /// Points on the x grid.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Thermal displacement variances.
    #[arg(long, global = true, value_enum)]
    variance: Option<Variance>,
    /// Where the undetected photon of a double excitation may go.
    #[arg(long, global = true, value_enum)]
    missed_photon: Option<Missed>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Standard,
    Mirrored,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variance {
    Classical,
    Quantum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Missed {
    FullSphere,
    ConeComplement,
}

#[derive(Subcommand)]
enum Command {
    /// Critical temperature against aperture angle.
    Tcrit {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// S-values of all four initial states across the angle pattern.
    BellSweep,
    /// Largest |S| of both families against temperature.
    BellMax {
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// S_gg with double excitation, printed and first-principles forms.
    Scatter,
    /// Bell-measurement and CNOT fidelities; writes a vs-T and a vs-xi table.
    Fidelity {
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 2.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Temperatures T/T_cr for the vs-xi table, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0,0.2,0.5,1")]
        t_list: Vec<f64>,
    },
    /// Run the self-check suite.
    Validate {
        /// Use the published post-detection matrix in the CNOT identity.
        #[arg(long)]
        use_printed_h2: bool,
    },
}

const SCATTER_XI: [f64; 4] = [0.0, 0.05, 0.15, 1.0];

enum Failure {
    Usage(String),
    Checks,
}

impl From<photologic_core::Error> for Failure {
    fn from(e: photologic_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        nu_perp: c.nu_perp,
        nu_par: c.nu_par,
        nu_recoil: c.nu_recoil,
        temperature: c.temperature,
        t_over_tcr: c.t_over_tcr,
        theta0: c.theta0,
        xi: c.xi.clone(),
        kind: c.pattern.map(|p| match p {
            Pattern::Standard => "standard".to_string(),
            Pattern::Mirrored => "mirrored".to_string(),
        }),
        x_min: c.x_min,
        x_max: c.x_max,
        n: c.n,
        samples: c.samples,
        seed: c.seed,
        variance: c.variance.map(|v| match v {
            Variance::Classical => VarianceMode::Classical,
            Variance::Quantum => VarianceMode::QuantumExact,
        }),
        missed_photon: c.missed_photon.map(|m| match m {
            Missed::FullSphere => MissedPhoton::FullSphere,
            Missed::ConeComplement => MissedPhoton::ConeComplement,
        }),
    }
}

/// Twelve significant digits.
fn number(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(format!("csv: {e}"));
    w.write_record(&t.columns).map_err(io)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|&v| number(v))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Usage(format!("csv: {e}")))
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, t: &Table) -> Result<(), Failure> {
    let bytes = csv_bytes(t)?;
    match out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

/// `fig.csv` becomes `fig_vs_t.csv` and `fig_vs_xi.csv`.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn figure_d(cfg: &RunConfig) -> Result<Decoherence, Failure> {
    Ok(Decoherence::from_temperature_ratio(cfg.t_over_tcr())?)
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    linspace(cfg.x_min, cfg.x_max, cfg.n)
}

fn points_ok(points: usize) -> Result<(), Failure> {
    if points < 2 {
        return Err(Failure::Usage(format!("need at least 2 points, got {points}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Failure::Usage(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.common.config {
        Some(p) => ConfigFile::load(p).map_err(Failure::Usage)?,
        None => ConfigFile::default(),
    };
    let cfg = merge(file, overrides(&cli.common), 0.5).map_err(Failure::Usage)?;
    let out = cli.common.out.as_deref();

    match cli.command {
        Command::Tcrit { points } => {
            points_ok(points)?;
            emit(out, &tcrit_table(&cfg.trap, &cfg.optics, points)?)
        }
        Command::BellSweep => emit(out, &bell_sweep_table(figure_d(&cfg)?, cfg.kind, &grid(&cfg))),
        Command::BellMax { t_max, points } => {
            points_ok(points)?;
            positive("t-max", t_max)?;
            emit(out, &bell_max_table(cfg.kind, &linspace(0.0, t_max, points))?)
        }
        Command::Scatter => {
            let xis = cfg.xi.clone().unwrap_or_else(|| SCATTER_XI.to_vec());
            emit(out, &scatter_table(figure_d(&cfg)?, &xis, cfg.kind, &grid(&cfg))?)
        }
        Command::Fidelity { t_max, xi_max, points, t_list } => {
            points_ok(points)?;
            positive("t-max", t_max)?;
            positive("xi-max", xi_max)?;
            let xis = cfg.xi.clone().unwrap_or_else(|| SCATTER_XI.to_vec());
            let vs_t = fidelity_vs_t_table(&linspace(0.0, t_max, points), &xis)?;
            let vs_xi = fidelity_vs_xi_table(&linspace(0.0, xi_max, points), &t_list)?;
            match out {
                Some(p) => {
                    emit(Some(&suffixed(p, "vs_t")), &vs_t)?;
                    emit(Some(&suffixed(p, "vs_xi")), &vs_xi)
                }
                None => {
                    emit(None, &vs_t)?;
                    println!();
                    emit(None, &vs_xi)
                }
            }
        }
        Command::Validate { use_printed_h2 } => {
            let opts = ValidationOptions { trap: cfg.trap, optics: cfg.optics, mc: cfg.mc, use_printed_h2 };
            let report = validation::run(&opts)?;
            let mut text = String::new();
            for c in &report.checks {
                text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
                for m in &c.mc {
                    text.push_str(&format!(
                        "    estimate = {:.8}, closed_form = {:.8}, std_error = {:.3e}\n",
                        m.estimate, m.closed_form, m.std_error
                    ));
                }
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            text.push_str(&format!("{passed} of {} checks passed\n", report.checks.len()));
            match out {
                Some(p) => write_atomic(p, text.as_bytes())?,
                None => print!("{text}"),
            }
            if report.all_passed() { Ok(()) } else { Err(Failure::Checks) }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(number(0.1), "1.00000000000e-1");
        assert_eq!(number(2.0f64.sqrt()).len(), "1.41421356237e0".len());
    }

    #[test]
    fn suffix_names() {
        assert_eq!(suffixed(Path::new("out/fig.csv"), "vs_t"), PathBuf::from("out/fig_vs_t.csv"));
        assert_eq!(suffixed(Path::new("fig"), "vs_xi"), PathBuf::from("fig_vs_xi"));
    }
}
