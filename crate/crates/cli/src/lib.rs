//! Batch driver around the `chi0_emos` core: CSV ingestion, run
//! configuration, the station × forecaster pipeline and SVG output.

pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod svg;

pub use config::RunConfig;
pub use ingest::{ingest_csv, Ingested};
pub use pipeline::{run_pipeline, PipelineReport, Stage};
