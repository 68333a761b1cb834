//! Configuration-driven pipeline around the core library: generate or
//! ingest a noise trace, classify its slots, search the Gaussian portion
//! length, whiten, sweep capacity over an SNR grid, and render report
//! plots. Every stage writes its artifacts into the output directory and
//! later stages read them back, so stages compose to the same bytes as a
//! single `run`.

pub mod config;
pub mod pipeline;
pub mod plot;
pub mod seed;
