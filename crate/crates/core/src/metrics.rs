//! Audio and geometric fidelity measures.

use alloc::vec::Vec;


use crate::audio::AudioClip;
use crate::embed::Sidecar;
use crate::stats::mean;
use crate::tour::{dist, Curve};
use crate::{Error, Result};

/// Signal to noise ratio of `y` against the clean signal `x`, in dB.
/// Identical signals give `+∞`.
pub fn snr(y: &AudioClip, x: &AudioClip) -> Result<f64> {
    if y.sample_rate != x.sample_rate {
        return Err(Error::InvalidParameter(alloc::format!(
            "sample rates differ: {} vs {}",
            y.sample_rate,
            x.sample_rate
        )));
    }
    snr_samples(&y.samples, &x.samples)
}

pub fn snr_samples(y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    let signal: f64 = x.iter().map(|v| v * v).sum();
    let noise: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * signal.log10() - 10.0 * noise.log10())
}

/// Mean Euclidean distance between corresponding points.
pub fn distortion(y: &Curve, x: &Curve) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    if y.dimension != x.dimension {
        return Err(Error::DimensionMismatch(alloc::format!("{}-d vs {}-d curves", y.dimension, x.dimension)));
    }
    Ok(mean_distance(&y.points, &x.points))
}

fn mean_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(p, q)| dist(p, q)).sum::<f64>() / a.len() as f64
}

/// Least squares `(α, β)` minimizing `Σ (α·x + β − y)²`. A constant `x`
/// gets `α = 0`.
pub fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let alpha = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (alpha, my - alpha * mx)
}

/// Distortion of a decoded curve against the target that was embedded,
/// after mapping each decoded dimension onto the target by a least squares
/// affine fit. Point `j` of the decode pairs with column `j` of the
/// prepared target, i.e. target sample `θ_j`.
pub fn aligned_distortion(decoded: &Curve, sidecar: &Sidecar) -> Result<f64> {
    let target = &sidecar.prepared.values;
    if target.len() != decoded.dimension {
        return Err(Error::DimensionMismatch(alloc::format!(
            "decoded curve is {}-d, embedded target is {}-d",
            decoded.dimension,
            target.len()
        )));
    }
    let m = sidecar.prepared.len();
    if decoded.len() != m {
        return Err(Error::LengthMismatch(decoded.len(), m));
    }
    let mut mapped = Vec::with_capacity(target.len());
    for (i, t) in target.iter().enumerate() {
        let x = decoded.coordinate(i);
        let (a, b) = affine_fit(&x, t);
        mapped.push(x.iter().map(|v| a * v + b).collect::<Vec<f64>>());
    }
    let d = target.len();
    let fitted: Vec<Vec<f64>> = (0..m).map(|j| (0..d).map(|i| mapped[i][j]).collect()).collect();
    let truth: Vec<Vec<f64>> = (0..m).map(|j| (0..d).map(|i| target[i][j]).collect()).collect();
    Ok(mean_distance(&fitted, &truth))
}
