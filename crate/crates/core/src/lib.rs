//! Daily news-attention time series, constrained peak segmentation into news
//! events, per-event attention measures, and temporal alignment of events
//! with disaster-registry entries.
//!
//! The stages compose as plain functions:
//!
//! ```text
//! documents ──filter──▶ count series ──peaks──▶ events ──▶ measures
//!                                                   └────▶ alignment ◀── registries
//! ```
//!
//! [`pipeline`] wires the stages together and writes the output files used
//! by the `attn-peaks` command line tool.

pub mod align;
pub mod config;
pub mod error;
pub mod hazard;
pub mod ingest;
pub mod measures;
pub mod peaks;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use hazard::Hazard;
