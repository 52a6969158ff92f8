//! Reading a hidden curve back out of audio, without any side information.

use alloc::vec::Vec;

use crate::audio::AudioClip;
use crate::embed::{EncodingConfig, MIN_EMBEDDED_SAMPLES};
use crate::spectral::{sliding_bin, stft_samples, sws};
use crate::stats::{mean, median, z_normalize};
use crate::tour::{closed_length, Curve};
use crate::{Error, Result};

/// Smallest decoded scale ratio; keeps a dimension alive when its phase
/// carries nothing useful.
pub const MIN_SCALE_RATIO: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecodedCurve {
    pub curve: Curve,
    pub shift: usize,
    pub scale_ratios: Vec<f64>,
    /// Closed length per point of the z-normalized decode at every shift.
    pub lengths_by_shift: Vec<f64>,
}

/// Scale ratio stored in a phase row. The median of `|phase|` is used so
/// that values near `π` wrapping to `−π` still count as `π`.
pub fn decode_scale(phase_row: &[f64]) -> f64 {
    let abs: Vec<f64> = phase_row.iter().map(|p| p.abs()).collect();
    let r = median(&abs) / core::f64::consts::PI;
    if r.is_finite() {
        r.clamp(MIN_SCALE_RATIO, 1.0)
    } else {
        1.0
    }
}

/// Turns magnitude rows and phase rows (one pair per dimension) into the
/// normalized curve.
fn assemble(mags: &[Vec<f64>], phases: &[Vec<f64>], ell: usize) -> Result<(Curve, Vec<f64>)> {
    let mut coords = Vec::with_capacity(mags.len());
    let mut ratios = Vec::with_capacity(mags.len());
    for (m, p) in mags.iter().zip(phases) {
        let r = decode_scale(p);
        let z = z_normalize(&sws(m, ell)?).ok_or(Error::ZeroVariance)?;
        let scaled: Vec<f64> = z.iter().map(|v| v * r).collect();
        let c = mean(&scaled);
        coords.push(scaled.iter().map(|v| v - c).collect::<Vec<f64>>());
        ratios.push(r);
    }
    Ok((Curve::from_coordinates(&coords)?, ratios))
}

fn check_frames(frames: usize, cfg: &EncodingConfig) -> Result<()> {
    let needed = MIN_EMBEDDED_SAMPLES.max(cfg.sliding_window + 2);
    if frames < needed {
        return Err(Error::CarrierTooShort { frames, needed });
    }
    Ok(())
}

/// Decodes with frames starting `shift` samples into the clip.
pub fn decode_at_shift(clip: &AudioClip, shift: usize, cfg: &EncodingConfig) -> Result<Curve> {
    Ok(decode_with_ratios(clip, shift, cfg)?.0)
}

fn decode_with_ratios(clip: &AudioClip, shift: usize, cfg: &EncodingConfig) -> Result<(Curve, Vec<f64>)> {
    cfg.validate()?;
    let w = cfg.window_length;
    if shift >= clip.len() {
        return Err(Error::CarrierTooShort { frames: 0, needed: MIN_EMBEDDED_SAMPLES });
    }
    let samples = &clip.samples[shift..];
    check_frames(samples.len() / w, cfg)?;
    let spec = stft_samples(samples, w)?;
    let mags: Vec<Vec<f64>> = cfg.freqs.iter().map(|&k| spec.mag[k].clone()).collect();
    let phases: Vec<Vec<f64>> = cfg.freqs.iter().map(|&k| spec.phase[k].clone()).collect();
    assemble(&mags, &phases, cfg.sliding_window)
}

/// Tries every frame offset in `[0, w)` and keeps the one whose decoded
/// curve is shortest; misaligned frames smear the embedding into noise,
/// which makes the curve longer.
///
/// Shifts are ranked on the z-normalized curve, before the phase-coded
/// scales are applied. Misalignment rotates the phase by `2πks/w`, which
/// can drive the decoded scales towards zero and make a wrong shift look
/// short. Each shift uses every whole frame it has, exactly as
/// [`decode_at_shift`] would, and lengths are divided by the point count
/// so a shift is not favoured just for having one frame fewer. Ties go to
/// the lowest shift.
pub fn recover_alignment(clip: &AudioClip, cfg: &EncodingConfig) -> Result<DecodedCurve> {
    cfg.validate()?;
    let w = cfg.window_length;
    if clip.len() < w {
        return Err(Error::CarrierTooShort { frames: 0, needed: MIN_EMBEDDED_SAMPLES });
    }
    check_frames((clip.len() - (w - 1)) / w, cfg)?;

    let bins = cfg.freqs.iter().map(|&k| sliding_bin(&clip.samples, w, k)).collect::<Result<Vec<_>>>()?;
    let mut lengths = Vec::with_capacity(w);
    for s in 0..w {
        let mut coords = Vec::with_capacity(bins.len());
        let frames = (clip.len() - s) / w;
        for row in &bins {
            let mags: Vec<f64> = (0..frames).map(|j| row[s + j * w].norm()).collect();
            match z_normalize(&sws(&mags, cfg.sliding_window)?) {
                Some(z) => coords.push(z),
                None => break,
            }
        }
        let length = if coords.len() == bins.len() {
            Curve::from_coordinates(&coords).map_or(f64::INFINITY, |c| closed_length(&c.points) / c.len() as f64)
        } else {
            f64::INFINITY
        };
        lengths.push(length);
    }
    let shift = lengths
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc })
        .0;
    let (curve, scale_ratios) = decode_with_ratios(clip, shift, cfg)?;
    Ok(DecodedCurve { curve, shift, scale_ratios, lengths_by_shift: lengths })
}
