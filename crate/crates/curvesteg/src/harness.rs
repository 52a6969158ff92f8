//! Encode, optionally compress, decode and score; singly or as a sweep.

use std::path::PathBuf;
use std::time::Instant;

use curvesteg_core::embed::{describe, encode, EncodingConfig, StegoResult};
use curvesteg_core::extract::{decode_at_shift, recover_alignment};
use curvesteg_core::metrics::{aligned_distortion, snr};
use curvesteg_core::stats::pearson;
use curvesteg_core::{AudioClip, Curve};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{codec_roundtrip, CodecSpec};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripMetrics {
    pub clip: String,
    pub curve: String,
    pub config: EncodingConfig,
    pub codec: Option<String>,
    pub n_embedded: usize,
    /// Stego against carrier, before any codec.
    pub snr_db: f64,
    /// Codec output against carrier.
    pub post_codec_snr_db: Option<f64>,
    /// Aligned distortion of the decode (at the true alignment) against
    /// the embedded target.
    pub distortion: f64,
    pub correlation: Vec<f64>,
    pub planted_shift: Option<usize>,
    pub recovered_shift: Option<usize>,
    pub shift_error: Option<usize>,
    pub clipped_samples: usize,
    pub warnings: Vec<String>,
    pub encode_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub codec: Option<CodecSpec>,
    pub scratch: PathBuf,
    /// Drop this many samples from the front (wrapping them to the end)
    /// before alignment recovery.
    pub planted_shift: Option<usize>,
}

/// Everything a round trip produced, for callers that want more than the
/// metrics.
#[derive(Debug, Clone)]
pub struct RoundtripOutput {
    pub metrics: RoundtripMetrics,
    pub stego: StegoResult,
    pub received: AudioClip,
    pub decoded: Curve,
}

pub fn describe_codec(codec: &CodecSpec) -> String {
    if codec == &CodecSpec::identity() {
        "identity".into()
    } else {
        format!("{} kbps {}", codec.bitrate_kbps, codec.extension)
    }
}

/// Rotates the clip left by `shift` samples, so the embedding's frame grid
/// starts at `(w − shift) mod w`.
pub fn plant_shift(clip: &AudioClip, shift: usize) -> AudioClip {
    let mut samples = clip.samples.clone();
    if !samples.is_empty() {
        let s = shift % samples.len();
        samples.rotate_left(s);
    }
    AudioClip { samples, sample_rate: clip.sample_rate }
}

/// Frame offset at which a decoder should find the embedding after
/// [`plant_shift`].
pub fn expected_shift(planted: usize, w: usize) -> usize {
    (w - planted % w) % w
}

pub fn circular_distance(a: usize, b: usize, w: usize) -> usize {
    let d = (a % w).abs_diff(b % w);
    d.min(w - d)
}

pub fn roundtrip(
    clip_name: &str,
    carrier: &AudioClip,
    curve_name: &str,
    curve: &Curve,
    cfg: &EncodingConfig,
    opts: &RunOptions,
) -> Result<RoundtripOutput> {
    let t0 = Instant::now();
    let stego = encode(carrier, curve, cfg)?;
    let encode_seconds = t0.elapsed().as_secs_f64();
    let snr_db = snr(&stego.stego, carrier)?;
    let received = match &opts.codec {
        Some(c) => codec_roundtrip(&stego.stego, c, &opts.scratch)?,
        None => stego.stego.clone(),
    };
    let post_codec_snr_db = opts.codec.as_ref().map(|_| snr(&received, carrier)).transpose()?;

    let decoded = decode_at_shift(&received, 0, cfg)?;
    let distortion = aligned_distortion(&decoded, &stego.sidecar)?;
    let correlation =
        (0..curve.dimension).map(|i| pearson(&decoded.coordinate(i), &stego.sidecar.prepared.values[i])).collect();

    let (recovered_shift, shift_error) = match opts.planted_shift {
        Some(s) => {
            let w = cfg.window_length;
            let found = recover_alignment(&plant_shift(&received, s), cfg)?.shift;
            (Some(found), Some(circular_distance(found, expected_shift(s, w), w)))
        }
        None => (None, None),
    };

    let metrics = RoundtripMetrics {
        clip: clip_name.into(),
        curve: curve_name.into(),
        config: cfg.clone(),
        codec: opts.codec.as_ref().map(describe_codec),
        n_embedded: stego.sidecar.prepared.len(),
        snr_db,
        post_codec_snr_db,
        distortion,
        correlation,
        planted_shift: opts.planted_shift,
        recovered_shift,
        shift_error,
        clipped_samples: stego.report.clipped_samples,
        warnings: stego.report.warnings.iter().map(describe).collect(),
        encode_seconds,
    };
    Ok(RoundtripOutput { metrics, stego, received, decoded })
}

/// One cell of a sweep.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub clip_name: &'a str,
    pub carrier: &'a AudioClip,
    pub curve_name: &'a str,
    pub curve: &'a Curve,
    pub config: EncodingConfig,
    pub planted_shift: Option<usize>,
}

/// Runs all jobs in parallel; results keep the job order.
pub fn sweep(jobs: &[Job<'_>], codec: Option<&CodecSpec>, scratch: &std::path::Path) -> Vec<Result<RoundtripMetrics>> {
    jobs.par_iter()
        .map(|job| {
            let opts = RunOptions { codec: codec.cloned(), scratch: scratch.to_path_buf(), planted_shift: job.planted_shift };
            roundtrip(job.clip_name, job.carrier, job.curve_name, job.curve, &job.config, &opts).map(|o| o.metrics)
        })
        .collect()
}
