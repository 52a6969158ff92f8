//! Hiding artistic closed curves in musical audio.
//!
//! The crate is `no_std` and only needs an allocator. It covers the whole
//! numerical side of the pipeline:
//!
//! * [`stipple`] and [`tour`] turn a grayscale image into a simple closed
//!   tour (TSP art) and smooth it with a step of curvature-shortening flow.
//! * [`hamiltonian`] builds a closed loop over a watertight triangle mesh
//!   from a perfect matching of its dual graph.
//! * [`spectral`] is the non-overlapping STFT and the sliding window sum.
//! * [`embed`] perturbs selected STFT magnitude rows so that their sliding
//!   window sums trace out the curve, and stores per-dimension scales in
//!   the phase.
//! * [`extract`] reads the curve back from audio alone, including frame
//!   alignment recovery.
//! * [`metrics`] measures audio SNR and geometric distortion.
//!
//! File formats, WAV IO, codecs and the command line live in the
//! `curvesteg` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod art;
pub mod audio;
pub mod embed;
mod error;
pub mod extract;
pub mod fft;
pub mod hamiltonian;
pub mod mesh;
pub mod metrics;
pub mod nnls;
pub mod spectral;
pub mod stats;
pub mod stipple;
pub mod synth;
pub mod tour;

pub use audio::AudioClip;
pub use embed::{encode, EncodingConfig, PreparedTarget, Sidecar, StegoResult};
pub use error::{Error, Result};
pub use extract::{decode_at_shift, recover_alignment, DecodedCurve};
pub use mesh::TriangleMesh;
pub use spectral::Spectrogram;
pub use tour::Curve;

