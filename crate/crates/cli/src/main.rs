use std::path::PathBuf;
use std::process::ExitCode;

use cartan_cli::{
    emit_report, exit_code, fixture, parse_input, replay_report, run_command, CliError, Command,
    Format, Options,
};
use clap::{Parser, Subcommand};

/// Decides whether the isotropy interior of a graph, k-graph or topological graph groupoid is closed.
///
/// Edge syntax: `edge <id> [color <c>] from <source> to <range>`.
#[derive(Parser)]
#[command(name = "cartan", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Input file (`-` for stdin).
    #[arg(global = true)]
    input: Option<PathBuf>,
    /// Use a bundled example instead of an input file.
    #[arg(long, global = true, value_parser = ["G1", "G2", "G3", "K1", "K2", "TG1"])]
    example: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Exit with status 3 on an Unknown verdict.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(clap::Args, Clone)]
struct BoundArgs {
    #[arg(long, default_value_t = 3)]
    pq_max: u32,
    #[arg(long, default_value_t = 3)]
    prefix_bound: u32,
    #[arg(long, default_value_t = 3)]
    cycle_bound: u32,
    /// Probe depth; for seqgraph input, the largest n checked directly.
    #[arg(long, default_value_t = 3)]
    depth: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate the input.
    Validate,
    /// Flags, freeness, cycline inventory and the closedness decision.
    Analyze {
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// All cycline pairs up to a degree bound.
    Cycline {
        #[arg(long)]
        max_degree: u32,
    },
    /// Decide closedness of the isotropy interior.
    Decide {
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Re-check the witnesses recorded in a report.
    Witness {
        #[arg(long)]
        replay: PathBuf,
    },
}

fn read(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut options = Options::default();
    let command = match cli.command {
        Cmd::Validate => Command::Validate,
        Cmd::Analyze { bounds } => {
            set_bounds(&mut options, &bounds);
            Command::Analyze
        }
        Cmd::Decide { bounds } => {
            set_bounds(&mut options, &bounds);
            Command::Decide
        }
        Cmd::Cycline { max_degree } => Command::Cycline { max_degree },
        Cmd::Witness { replay } => {
            let text = read(&replay)
                .map_err(|e| CliError::Replay(format!("{}: {e}", replay.display())))?;
            let report = replay_report(&text, &options)?;
            print!("{}", emit_report(&report, cli.format));
            return Ok(0);
        }
    };
    let doc = match (&cli.example, &cli.input) {
        (Some(name), _) => parse_input(fixture(name).unwrap())?,
        (None, Some(path)) => {
            let text =
                read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_input(&text)?
        }
        (None, None) => return Err(CliError::Usage("give an input file or --example".into())),
    };
    let report = run_command(&command, &doc, &options)?;
    print!("{}", emit_report(&report, cli.format));
    Ok(exit_code(&report, cli.strict))
}

fn set_bounds(o: &mut Options, b: &BoundArgs) {
    o.bounds.pq_max = b.pq_max;
    o.bounds.prefix_bound = b.prefix_bound;
    o.bounds.cycle_bound = b.cycle_bound;
    o.bounds.depth = b.depth;
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
