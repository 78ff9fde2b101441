//! Text input format, command dispatch and reports for the `cartan` tool.

pub mod commands;
pub mod input;
pub mod report;

pub use commands::{exit_code, replay_report, run_command, CliError, Command, Options};
pub use input::{parse_input, InputDocument, InputError, Parsed};
pub use report::{emit_report, Format, Report};

pub const EXAMPLES: [&str; 6] = ["G1", "G2", "G3", "K1", "K2", "TG1"];

/// Bundled example source text.
pub fn fixture(name: &str) -> Option<&'static str> {
    Some(match name {
        "G1" => include_str!("../fixtures/G1.txt"),
        "G2" => include_str!("../fixtures/G2.txt"),
        "G3" => include_str!("../fixtures/G3.txt"),
        "K1" => include_str!("../fixtures/K1.txt"),
        "K2" => include_str!("../fixtures/K2.txt"),
        "TG1" => include_str!("../fixtures/TG1.txt"),
        _ => return None,
    })
}
