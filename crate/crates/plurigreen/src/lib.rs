//! Sweeps, file formats and command-line plumbing around
//! [`plurigreen_core`].
//!
//! - [`config`]: the JSON sweep config and its validation.
//! - [`harness`]: eps-sweeps over a test grid and convergence diagnostics.
//! - [`output`]: CSV rows and JSON summaries.
//! - [`schema`]: serializable records for the core types.
//! - [`acceptance`]: the built-in verification suite behind `plurigreen verify`.

pub mod acceptance;
pub mod config;
pub mod harness;
pub mod output;
pub mod schema;
