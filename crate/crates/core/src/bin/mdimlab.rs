use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdimlab::runner::{self, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "mdimlab", version, about = "Finite mean-dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Run a config and write its reports.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; falls back to the config, then `MDIMLAB_OUT_DIR`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiment kinds.
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<18} {}", k.name(), k.description());
            }
            0
        }
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(c) => {
                println!("ok: {} ({})", config.display(), c.experiment);
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                runner::exit_code(&Err(e))
            }
        },
        Command::Run {
            config,
            seed,
            jobs,
            out,
        } => {
            let result = ExperimentConfig::load(&config).and_then(|mut c| {
                if seed.is_some() {
                    c.seed = seed;
                }
                if jobs.is_some() {
                    c.jobs = jobs;
                }
                let dir = c.resolve_out_dir(out.as_deref());
                runner::run_experiment(&c, &dir)
            });
            match &result {
                Ok(s) => {
                    println!("{}: {} instances, {} passed, {} failed", s.experiment, s.total, s.passes, s.failures);
                    for f in &s.files {
                        println!("  {}", f.display());
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            }
            runner::exit_code(&result)
        }
    };
    ExitCode::from(code as u8)
}
