mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use error::CliError;
use output::Outputs;
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Chiral waveguide QED experiments: directionality maps, the photon-photon
/// CNOT gate, magneto-optical spectra, photon correlations and scattering.
///
/// Exit codes: 0 success, 1 I/O failure, 2 bad input data, 3 bad config or
/// usage, 4 numerical non-convergence.
#[derive(Parser)]
#[command(name = "chiral", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory [default: $CHIRAL_OUT_DIR, else ./chiral-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Does not change any output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct ConfigArg {
    /// Flat TOML config; omitted keys take their defaults.
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// F_dir and β_dir over a mode-field unit cell.
    Map(ConfigArg),
    /// Run the CNOT protocol on one photonic input, optionally sweeping β_dir.
    Gate(ConfigArg),
    /// Synthesize Zeeman spectra and extract F_dir versus field.
    Spectra(ConfigArg),
    /// Correlation histogram, pulsed g²(0) and lifetime.
    G2(ConfigArg),
    /// Transmission and reflection over a detuning sweep.
    Scatter(ConfigArg),
}

trait Seeded {
    fn set_seed(&mut self, seed: u64);
}

macro_rules! seeded {
    ($($t:ty),*) => {$(
        impl Seeded for $t {
            fn set_seed(&mut self, seed: u64) {
                self.seed = seed;
            }
        }
    )*};
}
seeded!(
    config::MapConfig,
    config::GateFileConfig,
    config::SpectraConfig,
    config::G2Config,
    config::ScatterConfig
);

fn execute<T>(
    name: &str,
    path: Option<&Path>,
    seed: Option<u64>,
    run: fn(&T) -> Result<(Outputs, String), CliError>,
) -> Result<(Outputs, String), CliError>
where
    T: serde::de::DeserializeOwned + Default + Serialize + Seeded,
{
    let mut cfg: T = config::load(path)?;
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    let (mut out, line) = run(&cfg)?;
    out.toml(&format!("{name}_config.toml"), &cfg)?;
    Ok((out, line))
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("CHIRAL_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("chiral-out"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("chiral: {e}");
        return ExitCode::from(1);
    }
    let dir = out_dir(cli.out);
    let result = match &cli.command {
        Command::Map(a) => execute("map", a.config.as_deref(), cli.seed, commands::map::run),
        Command::Gate(a) => execute("gate", a.config.as_deref(), cli.seed, commands::gate::run),
        Command::Spectra(a) => execute("spectra", a.config.as_deref(), cli.seed, commands::spectra::run),
        Command::G2(a) => execute("g2", a.config.as_deref(), cli.seed, commands::g2::run),
        Command::Scatter(a) => execute("scatter", a.config.as_deref(), cli.seed, commands::scatter::run),
    }
    .and_then(|(out, line)| {
        let names: Vec<String> = out.names().map(String::from).collect();
        out.commit(&dir)?;
        Ok((names, line))
    });
    match result {
        Ok((names, line)) => {
            // outputs are already on disk; a closed stdout is not a failure
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{line}");
            for n in names {
                let _ = writeln!(stdout, "wrote {}", dir.join(n).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("chiral: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
