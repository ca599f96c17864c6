use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qmon::cli::{run, Command, Flags, EXIT_BAD_CONFIG};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Check the network and every path it must carry against the budget.
    Validate,
    /// Worst-case path losses per x-closest access network.
    LossReport,
    /// Largest network of this kind within budget.
    Capacity,
    /// Channel plan: CWDM assignments, DWDM roles and sources.
    Plan,
    /// Switch configurations covering all demands of a mesh.
    Schedule,
}

#[derive(Debug, Parser)]
#[command(name = "qmon", version, about = "Quantum metropolitan optical network planner")]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Network description (TOML). Without one the passive ring reference is used.
    config: Option<PathBuf>,
    /// Print line records instead of tables.
    #[arg(long)]
    records: bool,
    /// With `capacity`: also check growing the network by this many access networks.
    #[arg(long)]
    extend: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(EXIT_BAD_CONFIG as u8);
            }
        },
        None => String::new(),
    };
    let command = match args.command {
        Cmd::Validate => Command::Validate,
        Cmd::LossReport => Command::LossReport,
        Cmd::Capacity => Command::Capacity,
        Cmd::Plan => Command::Plan,
        Cmd::Schedule => Command::Schedule,
    };
    let out = run(command, &text, Flags { records: args.records, extend: args.extend });
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
