//! Library half of the `can-coord` command-line tool.

pub mod commands;
pub mod error;
pub mod report;
pub mod svg;
pub mod table;

pub use commands::{reproduce_paper, Format, Method};
pub use error::CliError;
pub use report::RunReport;
