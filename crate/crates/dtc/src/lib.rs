//! Cluster harness, stream IO and CLI for the streaming triangle-counting
//! estimators in [`dtc_core`].

pub mod cli;
pub mod harness;
pub mod io;
pub mod report;
