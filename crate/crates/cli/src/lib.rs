//! Library side of the `paneitz-lab` command-line tool.

pub mod error;
pub mod report;
pub mod run;
pub mod specfile;
pub mod sweep;
