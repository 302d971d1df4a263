use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qspec::cli::{self, AlgebraSelector, Command, Format, QuantaleSource, RunConfig, EXIT_CONFIG};
use qspec::subalgebra::EnumerationMode;

#[derive(Parser)]
#[command(name = "qspec", version, about = "Spectra and contextuality of quantale-valued relation algebras")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Verify the quantale axioms and relation laws.
    CheckQuantale,
    /// Enumerate the commutative von Neumann subalgebras of End(X).
    Algebras,
    /// Gelfand and prime spectra of each algebra.
    Spectrum,
    /// Global sections of both spectral presheaves.
    Sections,
    /// Kochen-Specker style verdict.
    Verdict,
    /// Zariski topologies, separation and continuity.
    Topology,
    /// Every stage in sequence.
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Generated,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Dot,
}

#[derive(clap::Args)]
struct Common {
    /// Builtin quantale tag, e.g. boolean2, godel3, lukasiewicz3, powerset2.
    #[arg(long, global = true, conflicts_with = "file")]
    quantale: Option<String>,
    /// Quantale table in JSON.
    #[arg(long, global = true)]
    file: Option<PathBuf>,
    /// Cardinality of the carrier X.
    #[arg(long, global = true, default_value_t = 2)]
    size: usize,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    /// Generator bound in generated mode.
    #[arg(long, global = true, default_value_t = 2)]
    max_generators: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// trivial, diagonal or an object index.
    #[arg(long, global = true)]
    algebra: Option<String>,
}

fn config(args: &Args) -> qspec::Result<RunConfig> {
    let c = &args.common;
    let quantale = match (&c.quantale, &c.file) {
        (_, Some(path)) => QuantaleSource::File(path.clone()),
        (Some(tag), None) => QuantaleSource::Builtin(tag.clone()),
        (None, None) => QuantaleSource::Builtin("boolean2".into()),
    };
    Ok(RunConfig {
        command: match args.command {
            Cmd::CheckQuantale => Command::CheckQuantale,
            Cmd::Algebras => Command::Algebras,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Sections => Command::Sections,
            Cmd::Verdict => Command::Verdict,
            Cmd::Topology => Command::Topology,
            Cmd::All => Command::All,
        },
        quantale,
        size: c.size,
        mode: match c.mode {
            Mode::Exhaustive => EnumerationMode::Exhaustive,
            Mode::Generated => EnumerationMode::Generated(c.max_generators),
        },
        format: match c.format {
            OutFormat::Text => Format::Text,
            OutFormat::Json => Format::Json,
            OutFormat::Dot => Format::Dot,
        },
        seed: c.seed,
        algebra: c.algebra.as_deref().map(str::parse::<AlgebraSelector>).transpose()?,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let outcome = cli::run(&config);
    eprint!("{}", outcome.diagnostics);
    let written = match &args.common.out {
        Some(path) => std::fs::write(path, &outcome.output),
        None => std::io::stdout().write_all(outcome.output.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(outcome.code as u8)
}
