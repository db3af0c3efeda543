//! Graph documents, reports and the command line tool.

mod cli;
pub mod document;
pub mod report;

pub use cli::{cli_main, run, CliOutput, EXIT_ERROR, EXIT_FAILS, EXIT_SUCCESS, EXIT_UNDECIDED};
pub use document::{parse_graph, write_graph, DocumentError, GraphDocument};
pub use report::Report;
