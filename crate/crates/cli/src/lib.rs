//! Front end for the `qcorr` binary: canonical reports, suites and fixtures.

pub mod canon;
pub mod commands;
pub mod fixtures;
pub mod suites;
