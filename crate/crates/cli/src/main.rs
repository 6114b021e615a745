use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use su2seq_cli::commands::{self, Command, Options};
use su2seq_cli::config::{RunConfig, Tolerances};

#[derive(Parser)]
#[command(name = "su2seq", version, about = "Build, verify and export the gauge-fixed SU(2) lattice Hamiltonian")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replace every check tolerance with this value.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record the contributing terms of every nonzero.
    #[arg(long, global = true)]
    debug_provenance: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble the Hamiltonian and write the matrix, its metadata and a build report.
    Build,
    /// Run a verification check.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Write an artifact.
    Export {
        #[command(subcommand)]
        what: ExportCmd,
    },
    /// Lowest eigenvalues of the assembled Hamiltonian.
    Spectrum,
    /// Term counts and cost envelopes.
    Resources,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Frame identities and chain rules on random configurations.
    Frames,
    /// Catalog matrix elements against quadrature.
    Oracle,
    /// Term-class totals against their closed forms.
    Counts,
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Ordered angular basis, one state per line.
    Basis,
    /// Matrix Market file plus metadata sidecar.
    Matrix,
    /// Operator catalog with footprints.
    Catalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        // Read by the global pool on first use; nothing has started it yet.
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    let path = cli.config.ok_or_else(|| anyhow::anyhow!("config error: --config <path> is required"))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(t) = cli.tolerance {
        anyhow::ensure!(t > 0.0, "config error: --tolerance must be positive");
        cfg.tolerances = Tolerances::uniform(t);
    }
    let command = match cli.command {
        Cmd::Build => Command::Build,
        Cmd::Check { what: CheckCmd::Frames } => Command::CheckFrames,
        Cmd::Check { what: CheckCmd::Oracle } => Command::CheckOracle,
        Cmd::Check { what: CheckCmd::Counts } => Command::CheckCounts,
        Cmd::Export { what: ExportCmd::Basis } => Command::ExportBasis,
        Cmd::Export { what: ExportCmd::Matrix } => Command::ExportMatrix,
        Cmd::Export { what: ExportCmd::Catalog } => Command::ExportCatalog,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Resources => Command::Resources,
    };
    let opts = Options { out: cli.out.unwrap_or_else(|| cfg.output_dir.clone()), debug_provenance: cli.debug_provenance };
    let report = commands::run(command, &cfg, &opts)?;
    print!("{}", report.text());
    if let Some(f) = &report.failure {
        eprintln!("check failed: {f}");
    }
    Ok(report.pass)
}
