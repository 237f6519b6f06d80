//! End-to-end pipeline for 8-lead ECG analysis: signal parsing and
//! normalization, deterministic dataset splitting, 1D-CNN training for both
//! interval regression and 5-class diagnosis, and regression-to-classification
//! transfer experiments over a 16-cell grid.
//!
//! The modules follow the pipeline stages:
//!
//! - [`signal`] — raw file parsing (ASCII matrices, header + 16-bit signal
//!   files), lead selection, min-max normalization, and the canonical binary
//!   record store.
//! - [`dataset`] — label handling, stratified halving, 70/10/20 splits, and
//!   deterministic batching.
//! - [`model`] — the 1D-CNN (plus RNN/LSTM baselines) with an ordered-layer
//!   view used for freezing.
//! - [`training`] — losses, Adam, the exponential LR schedule, the epoch loop
//!   with early stopping, and checkpoints.
//! - [`transfer`] — head swapping, prefix freezing, and the experiment grid.
//! - [`metrics`] — MAE, accuracy, and one-vs-rest ROC AUC.
//! - [`report`] — results tables (CSV/Markdown), ROC dumps, and SVG plots.
//! - [`toy`] — a synthetic quasi-ECG generator with exact labels, used by the
//!   test suite and for desk-scale experiments.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod rng;
pub mod signal;
pub mod toy;
pub mod training;
pub mod transfer;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
