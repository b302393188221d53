//! Problem generators, baselines and the run/benchmark pipeline behind the
//! `decompopt` command-line tool.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod run;
pub mod spec;
