//! Library side of the `reactor` command: configuration parsing and the
//! gain-sweep pipeline, kept separate from the binary so they can be
//! driven directly from tests.

pub mod config;
pub mod sweep;
