//! Seeded synthetic music, used as carrier audio in tests and experiments
//! when no recordings are at hand.
//!
//! A clip is a few bars of kick drum, bass line, chords with harmonics and
//! noisy hi-hats, so it has energy across the spectrum including the lowest
//! STFT bins, like real mixes do.

use alloc::vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioClip;

/// Length of a nominally 30 s excerpt from the usual genre datasets, which
/// run slightly long; 1292 frames at `w = 1024`.
pub const GENRE_CLIP_SAMPLES: usize = 1_323_588;

pub const PEAK: f64 = 0.5;

fn midi_hz(note: f64) -> f64 {
    440.0 * 2f64.powf((note - 69.0) / 12.0)
}

fn add_tone(out: &mut [f64], sr: f64, start: usize, len: usize, hz: f64, amp: f64, harmonics: usize, decay: f64) {
    let end = (start + len).min(out.len());
    if start >= end {
        return;
    }
    for (n, s) in out[start..end].iter_mut().enumerate() {
        let t = n as f64 / sr;
        let env = (t * 200.0).min(1.0) * (-t * decay).exp();
        let mut v = 0.0;
        for h in 1..=harmonics {
            let f = hz * h as f64;
            if f < sr / 2.0 {
                v += (2.0 * PI * f * t).sin() / h as f64;
            }
        }
        *s += amp * env * v;
    }
}

fn add_kick(out: &mut [f64], sr: f64, start: usize, amp: f64) {
    let len = (0.35 * sr) as usize;
    let end = (start + len).min(out.len());
    if start >= end {
        return;
    }
    let mut phase = 0.0;
    for (n, s) in out[start..end].iter_mut().enumerate() {
        let t = n as f64 / sr;
        let f = 45.0 + 90.0 * (-t * 30.0).exp();
        phase += 2.0 * PI * f / sr;
        *s += amp * (-t * 9.0).exp() * phase.sin();
    }
}

fn add_hat(out: &mut [f64], sr: f64, start: usize, amp: f64, rng: &mut ChaCha8Rng) {
    let len = (0.05 * sr) as usize;
    let end = (start + len).min(out.len());
    if start >= end {
        return;
    }
    let mut prev = 0.0;
    for (n, s) in out[start..end].iter_mut().enumerate() {
        let t = n as f64 / sr;
        let white: f64 = rng.random_range(-1.0..1.0);
        // First difference tilts the noise towards high frequencies.
        *s += amp * (-t * 60.0).exp() * (white - prev);
        prev = white;
    }
}

/// A `n_samples` long clip at `sample_rate`, peak-normalized to [`PEAK`].
pub fn music_clip(n_samples: usize, sample_rate: u32, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = sample_rate as f64;
    let mut out = vec![0.0; n_samples.max(1)];
    let bpm: f64 = rng.random_range(85.0..140.0);
    let beat = (60.0 / bpm * sr) as usize;
    let root: f64 = rng.random_range(40.0..52.0f64).round();
    let minor = rng.random_bool(0.5);
    let third = if minor { 3.0 } else { 4.0 };
    let progression = [0.0, 5.0, 7.0, if minor { 8.0 } else { 9.0 }];
    let kick_amp: f64 = rng.random_range(0.4..1.0);
    let bass_amp: f64 = rng.random_range(0.2..0.5);
    let chord_amp: f64 = rng.random_range(0.08..0.2);
    let hat_amp: f64 = rng.random_range(0.05..0.2);

    let mut b = 0;
    while b * beat < out.len() {
        let start = b * beat;
        let bar = b / 4;
        let degree = progression[bar % progression.len()];
        if b % 2 == 0 || rng.random_bool(0.25) {
            add_kick(&mut out, sr, start, kick_amp);
        }
        for half in 0..2 {
            add_hat(&mut out, sr, start + half * beat / 2, hat_amp * rng.random_range(0.5..1.0), &mut rng);
        }
        let bass_note = root - 12.0 + degree + if rng.random_bool(0.3) { 7.0 } else { 0.0 };
        add_tone(&mut out, sr, start, beat, midi_hz(bass_note), bass_amp, 3, 3.0);
        if b % 4 == 0 {
            for iv in [0.0, third, 7.0] {
                let note = root + 12.0 + degree + iv;
                add_tone(&mut out, sr, start, 4 * beat, midi_hz(note), chord_amp, 6, 0.8);
            }
        }
        if rng.random_bool(0.6) {
            let mel = root + 24.0 + degree + [0.0, third, 7.0, 12.0][rng.random_range(0..4)];
            let len = beat / if rng.random_bool(0.5) { 1 } else { 2 };
            add_tone(&mut out, sr, start, len, midi_hz(mel), chord_amp * 0.8, 4, 4.0);
        }
        b += 1;
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= PEAK / peak);
    }
    AudioClip { samples: out, sample_rate }
}

/// Sinusoids centred on STFT bins `min_bin..` of a `w`-sample window plus
/// faint noise. Such a clip has almost no energy in the lowest bins, so
/// perturbing those bins barely changes the waveform.
pub fn bin_aligned_tones(n_samples: usize, sample_rate: u32, w: usize, min_bin: usize, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; n_samples.max(1)];
    for _ in 0..6 {
        let k = rng.random_range(min_bin..w / 8) as f64;
        let amp: f64 = rng.random_range(0.02..0.08);
        let ph: f64 = rng.random_range(0.0..2.0 * PI);
        for (n, s) in out.iter_mut().enumerate() {
            *s += amp * (2.0 * PI * k * n as f64 / w as f64 + ph).sin();
        }
    }
    for s in out.iter_mut() {
        *s += 1e-4 * rng.random_range(-1.0..1.0);
    }
    AudioClip { samples: out, sample_rate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::stft;

    #[test]
    fn clip_is_deterministic_and_bounded() {
        let a = music_clip(44100, 44100, 3);
        let b = music_clip(44100, 44100, 3);
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
        let peak = a.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - PEAK).abs() < 1e-12);
        assert_ne!(a, music_clip(44100, 44100, 4));
    }

    #[test]
    fn low_bins_carry_energy() {
        let clip = music_clip(4 * 44100, 44100, 1);
        let spec = stft(&clip, 1024).unwrap();
        for k in 1..=3 {
            let e: f64 = spec.mag[k].iter().sum();
            assert!(e > 1.0, "bin {k}: {e}");
        }
    }
}
