use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cavsim::amplitude::Backend;
use cavsim::io::{emit, render, reproduce, run, Format, Mode, RunConfig, Units};
use cavsim::sweeps::Observable;
use cavsim::Error;
use clap::{Args, Parser, Subcommand};

/// Qubits in coupled lossy cavities: coherence, non-Markovianity and
/// two-qubit entanglement.
///
/// Rates are in units of gamma1 unless `--units mhz` is given. Values are
/// resolved with the precedence flag > config file > built-in default.
#[derive(Parser, Debug)]
#[command(name = "cavsim", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-site propagator z(t) (columns gamma1_t, z_re, z_im, abs_z, u).
    Simulate(RunArgs),
    /// l1 coherence of one qubit (columns gamma1_t, coherence).
    Coherence(RunArgs),
    /// BLP non-Markovianity; writes D(t) of the optimal pair, N in the metadata.
    Nonmarkov(RunArgs),
    /// Concurrence of two qubits in independent sites (columns gamma_t, concurrence).
    Twoqubit(RunArgs),
    /// One-parameter sweep of an observable (needs --vary, --values, --observable).
    Sweep(RunArgs),
    /// Regenerate the data files of a named figure or table preset.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Configuration file: JSON, `{key: value, ...}` or `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Qubit-cavity coupling (site A).
    #[arg(long)]
    kappa: Option<f64>,
    /// Cavity-cavity coupling (site A).
    #[arg(long)]
    j: Option<f64>,
    /// Loss rate of the first cavity; the unit of all rates.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Loss rate of the second cavity (site A).
    #[arg(long)]
    gamma2: Option<f64>,
    /// Qubit-cavity detuning (site A).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Common cavity frequency.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Real part of the weight of |0> (|00> for two qubits).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Real part of the weight of |1> (|11> for two qubits).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Imaginary part of alpha.
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    /// Imaginary part of beta.
    #[arg(long, allow_hyphen_values = true)]
    beta_im: Option<f64>,
    /// Qubit-cavity coupling of site B (defaults to --kappa).
    #[arg(long)]
    kappa_b: Option<f64>,
    /// Cavity-cavity coupling of site B (defaults to --j).
    #[arg(long)]
    j_b: Option<f64>,
    /// Second-cavity loss of site B (defaults to --gamma2).
    #[arg(long)]
    gamma2_b: Option<f64>,
    /// Detuning of site B (defaults to --delta).
    #[arg(long, allow_hyphen_values = true)]
    delta_b: Option<f64>,
    /// End of the time grid.
    #[arg(long)]
    t_end: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    n: Option<usize>,
    /// Propagator backend.
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Swept parameter, e.g. j, kappa, delta, j_b, alpha.
    #[arg(long)]
    vary: Option<String>,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
    /// Swept observable: coherence, blp, concurrence, esd_time or trapped.
    #[arg(long, value_parser = parse_observable)]
    observable: Option<Observable>,
    /// Unit system of the inputs: gamma1 or mhz.
    #[arg(long, value_parser = parse_units)]
    units: Option<Units>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Preset name (fig2a ... fig8, table1).
    preset: String,
    /// Directory receiving the data files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Output format.
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    format: Format,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_observable(s: &str) -> Result<Observable, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_units(s: &str) -> Result<Units, String> {
    match s {
        "gamma1" => Ok(Units::Gamma1),
        "mhz" => Ok(Units::Mhz),
        other => Err(format!("unknown units `{other}` (expected gamma1 or mhz)")),
    }
}

impl RunArgs {
    fn flags(&self, mode: Mode) -> RunConfig {
        RunConfig {
            mode: Some(mode),
            kappa: self.kappa,
            j: self.j,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            delta: self.delta,
            omega: self.omega,
            alpha: self.alpha,
            beta: self.beta,
            alpha_im: self.alpha_im,
            beta_im: self.beta_im,
            kappa_b: self.kappa_b,
            j_b: self.j_b,
            gamma2_b: self.gamma2_b,
            delta_b: self.delta_b,
            t_end: self.t_end,
            n: self.n,
            backend: self.backend,
            out: self.out.clone(),
            format: self.format,
            vary: self.vary.clone(),
            values: self.values.clone(),
            observable: self.observable,
            units: self.units,
            ..RunConfig::default()
        }
    }

    fn resolve(&self, mode: Mode) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(file.overlay(&self.flags(mode)))
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (mode, args) = match cli.command {
        Command::Reproduce(r) => {
            for path in reproduce(&r.preset, &r.out_dir, r.format)? {
                println!("{}", path.display());
            }
            return Ok(());
        }
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Coherence(a) => (Mode::Coherence, a),
        Command::Nonmarkov(a) => (Mode::Nonmarkov, a),
        Command::Twoqubit(a) => (Mode::Twoqubit, a),
        Command::Sweep(a) => (Mode::Sweep, a),
    };
    let cfg = args.resolve(mode)?;
    let table = run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            emit(&table, cfg.format(), path)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(render(&table, cfg.format()).as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source: e,
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
