//! File formats, reports, and plotting for the `poscon` command-line tool.

pub mod plot;
pub mod report;
pub mod spec_file;
