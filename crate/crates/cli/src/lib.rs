//! Batch harness around `umd-core`: TOML experiment configs, CSV dataset
//! ingestion, parallel step-size sweeps and CSV trace emission.

pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;
