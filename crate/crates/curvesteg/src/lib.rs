//! File formats, WAV IO, codec round trips, the experiment harness and the
//! command line for `curvesteg-core`.

pub mod codec;
pub mod config;
mod error;
pub mod formats;
pub mod harness;
pub mod wav;

pub use error::{Error, Result};
