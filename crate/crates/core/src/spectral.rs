//! Non-overlapping STFT with a rectangular window, its exact inverse, and
//! the sliding window sum (SWS) operator with its adjoint.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::Dft;
use crate::{AudioClip, Error, Result};

/// Magnitude/phase factorization of a non-overlapping STFT.
///
/// Rows are frequency bins `0..=w/2`, columns are frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub mag: Vec<Vec<f64>>,
    pub phase: Vec<Vec<f64>>,
    pub window_length: usize,
    pub n_frames: usize,
}

impl Spectrogram {
    pub fn n_bins(&self) -> usize {
        self.window_length / 2 + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bins = self.n_bins();
        if self.mag.len() != bins || self.phase.len() != bins {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {bins} bins, got {} magnitude and {} phase rows",
                self.mag.len(),
                self.phase.len()
            )));
        }
        for (m, p) in self.mag.iter().zip(&self.phase) {
            if m.len() != self.n_frames || p.len() != self.n_frames {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "row lengths {} / {} differ from {} frames",
                    m.len(),
                    p.len(),
                    self.n_frames
                )));
            }
        }
        Ok(())
    }
}

fn check_window(w: usize) -> Result<()> {
    if w == 0 || !w.is_multiple_of(2) {
        return Err(Error::InvalidWindow(w));
    }
    Ok(())
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(p: f64) -> f64 {
    let mut p = p;
    while p <= -PI {
        p += 2.0 * PI;
    }
    while p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Forward transform of `floor(len / w)` back-to-back frames.
pub fn stft(clip: &AudioClip, w: usize) -> Result<Spectrogram> {
    stft_samples(&clip.samples, w)
}

pub fn stft_samples(samples: &[f64], w: usize) -> Result<Spectrogram> {
    check_window(w)?;
    if samples.len() < w {
        return Err(Error::WindowTooLong { window: w, len: samples.len() });
    }
    let n_frames = samples.len() / w;
    let bins = w / 2 + 1;
    let dft = Dft::new(w);
    let mut mag = vec![vec![0.0; n_frames]; bins];
    let mut phase = vec![vec![0.0; n_frames]; bins];
    for j in 0..n_frames {
        let mut spectrum = dft.forward_real(&samples[j * w..(j + 1) * w]);
        // DC and Nyquist are real for real input.
        spectrum[0].im = 0.0;
        spectrum[bins - 1].im = 0.0;
        for (k, s) in spectrum.iter().enumerate() {
            mag[k][j] = s.norm();
            phase[k][j] = wrap_phase(s.im.atan2(s.re));
        }
    }
    Ok(Spectrogram { mag, phase, window_length: w, n_frames })
}

/// The samples past the last whole frame, which the inverse passes through.
pub fn remainder(samples: &[f64], w: usize) -> &[f64] {
    let used = (samples.len() / w) * w;
    &samples[used..]
}

/// Inverse transform of `mag · e^{i·phase}`, with `remainder` appended
/// verbatim.
pub fn istft(spec: &Spectrogram, remainder: &[f64], sample_rate: u32) -> Result<AudioClip> {
    check_window(spec.window_length)?;
    spec.validate()?;
    let w = spec.window_length;
    let bins = spec.n_bins();
    let dft = Dft::new(w);
    let mut samples = Vec::with_capacity(spec.n_frames * w + remainder.len());
    let mut half = vec![Complex64::new(0.0, 0.0); bins];
    for j in 0..spec.n_frames {
        for k in 0..bins {
            half[k] = Complex64::from_polar(spec.mag[k][j], spec.phase[k][j]);
        }
        // Only the real part of the edge bins survives in a real signal.
        half[0].im = 0.0;
        half[bins - 1].im = 0.0;
        samples.extend(dft.inverse_real(&half));
    }
    samples.extend_from_slice(remainder);
    AudioClip::new(samples, sample_rate)
}

/// Complex DFT bin `k` of every length-`w` window `samples[p..p + w]`,
/// for `p = 0..=len - w`.
///
/// Uses the sliding DFT recurrence, re-anchored with an exact sum at every
/// multiple of `w` so rounding error cannot build up.
pub fn sliding_bin(samples: &[f64], w: usize, k: usize) -> Result<Vec<Complex64>> {
    check_window(w)?;
    if samples.len() < w {
        return Err(Error::WindowTooLong { window: w, len: samples.len() });
    }
    let positions = samples.len() - w + 1;
    let twiddle: Vec<Complex64> = (0..w)
        .map(|n| Complex64::from_polar(1.0, -2.0 * PI * ((k * n) % w) as f64 / w as f64))
        .collect();
    let step = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / w as f64);
    let mut out = Vec::with_capacity(positions);
    let mut current = Complex64::new(0.0, 0.0);
    for p in 0..positions {
        if p % w == 0 {
            current = samples[p..p + w].iter().zip(&twiddle).map(|(x, t)| t * x).sum();
        } else {
            current = (current - samples[p - 1] + samples[p - 1 + w]) * step;
        }
        out.push(current);
    }
    Ok(out)
}

/// Sliding window sum: `out[j] = Σ_{n<ℓ} row[j + n]`, computed from prefix
/// sums in `O(N)`.
pub fn sws(row: &[f64], ell: usize) -> Result<Vec<f64>> {
    let n = row.len();
    if ell == 0 || ell > n {
        return Err(Error::SlidingWindowOutOfRange { window: ell, len: n });
    }
    if ell == 1 {
        return Ok(row.to_vec());
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in row {
        acc += x;
        prefix.push(acc);
    }
    Ok((0..n - ell + 1).map(|j| prefix[j + ell] - prefix[j]).collect())
}

/// Adjoint of [`sws`] for rows of length `n`: spreads each window value
/// back over the `ℓ` entries it summed.
pub fn sws_adjoint(values: &[f64], ell: usize, n: usize) -> Result<Vec<f64>> {
    if ell == 0 || ell > n {
        return Err(Error::SlidingWindowOutOfRange { window: ell, len: n });
    }
    if values.len() != n - ell + 1 {
        return Err(Error::DimensionMismatch(alloc::format!(
            "adjoint input has {} entries, expected {}",
            values.len(),
            n - ell + 1
        )));
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in values {
        acc += v;
        prefix.push(acc);
    }
    let last = values.len();
    Ok((0..n)
        .map(|m| {
            let lo = m.saturating_sub(ell - 1);
            let hi = (m + 1).min(last);
            if hi > lo {
                prefix[hi] - prefix[lo]
            } else {
                0.0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn naive_sws(row: &[f64], ell: usize) -> Vec<f64> {
        (0..row.len() - ell + 1).map(|j| (0..ell).map(|n| row[j + n]).sum()).collect()
    }

    #[test]
    fn constant_signal_is_dc_only() {
        let clip = AudioClip::new(vec![1.0; 12], 8000).unwrap();
        let spec = stft(&clip, 4).unwrap();
        assert_eq!(spec.n_frames, 3);
        for j in 0..3 {
            assert!((spec.mag[0][j] - 4.0).abs() < 1e-12);
            for k in 1..3 {
                assert!(spec.mag[k][j].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_at_bin_one_has_half_window_magnitude() {
        let w = 8;
        let samples: Vec<f64> = (0..3 * w).map(|n| (2.0 * PI * n as f64 / w as f64).cos()).collect();
        let spec = stft_samples(&samples, w).unwrap();
        for j in 0..3 {
            assert!((spec.mag[1][j] - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_count_and_edge_bin_phases() {
        let x = noise(10 * 16 + 5, 1);
        let spec = stft_samples(&x, 16).unwrap();
        assert_eq!(spec.n_frames, 10);
        for j in 0..10 {
            for k in [0, 8] {
                let p = spec.phase[k][j];
                assert!(p == 0.0 || p == PI, "bin {k} phase {p}");
            }
        }
    }

    #[test]
    fn round_trip_on_white_noise() {
        let x = noise(4096 + 37, 2);
        let spec = stft_samples(&x, 256).unwrap();
        let y = istft(&spec, remainder(&x, 256), 8000).unwrap();
        assert_eq!(y.len(), x.len());
        let err = x.iter().zip(&y.samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert_eq!(&y.samples[4096..], &x[4096..]);
    }

    #[test]
    fn empty_remainder_gives_whole_frames() {
        let x = noise(64, 3);
        let spec = stft_samples(&x, 16).unwrap();
        assert_eq!(istft(&spec, &[], 8000).unwrap().len(), 64);
    }

    #[test]
    fn doubling_one_bin_adds_one_sinusoid_per_frame() {
        let w = 32;
        let x = noise(4 * w, 4);
        let mut spec = stft_samples(&x, w).unwrap();
        let k = 3;
        let orig = spec.clone();
        for j in 0..spec.n_frames {
            spec.mag[k][j] *= 2.0;
        }
        let y = istft(&spec, &[], 8000).unwrap();
        for j in 0..spec.n_frames {
            let (m, p) = (orig.mag[k][j], orig.phase[k][j]);
            for n in 0..w {
                let added = 2.0 / w as f64 * m * (2.0 * PI * (k * n) as f64 / w as f64 + p).cos();
                let diff = y.samples[j * w + n] - x[j * w + n];
                assert!((diff - added).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn window_errors() {
        assert!(matches!(stft_samples(&[0.0; 4], 8), Err(Error::WindowTooLong { .. })));
        assert!(matches!(stft_samples(&[0.0; 9], 3), Err(Error::InvalidWindow(3))));
    }

    #[test]
    fn sws_examples() {
        assert_eq!(sws(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), vec![3.0, 5.0, 7.0]);
        let row = noise(20, 5);
        assert_eq!(sws(&row, 1).unwrap(), row);
        assert!(sws(&row, 0).is_err());
        assert!(sws(&row, 21).is_err());
    }

    #[test]
    fn sws_matches_naive_oracle() {
        let row: Vec<f64> = noise(1000, 6).iter().map(|x| x.abs()).collect();
        for ell in [1, 2, 16, 1000] {
            let fast = sws(&row, ell).unwrap();
            let slow = naive_sws(&row, ell);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn adjoint_inner_product() {
        for (n, ell) in [(50, 1), (50, 7), (50, 50), (333, 16)] {
            let u = noise(n, n as u64);
            let v = noise(n - ell + 1, ell as u64 + 100);
            let au = sws(&u, ell).unwrap();
            let atv = sws_adjoint(&v, ell, n).unwrap();
            let lhs: f64 = au.iter().zip(&v).map(|(a, b)| a * b).sum();
            let rhs: f64 = u.iter().zip(&atv).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn sliding_bin_matches_frame_stft() {
        let w = 64;
        let x = noise(20 * w + 11, 8);
        let k = 2;
        let slide = sliding_bin(&x, w, k).unwrap();
        for shift in [0usize, 1, 13, 63] {
            let spec = stft_samples(&x[shift..], w).unwrap();
            for j in 0..spec.n_frames {
                let c = slide[shift + j * w];
                assert!((c.norm() - spec.mag[k][j]).abs() < 1e-9);
                let dp = wrap_phase(c.im.atan2(c.re) - spec.phase[k][j]);
                assert!(dp.abs() < 1e-8);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn perfect_reconstruction(seed in 0u64..1000, half_w in 1usize..40, extra in 0usize..100) {
            let w = 2 * half_w;
            let x = noise(w * 3 + extra, seed);
            let spec = stft_samples(&x, w).unwrap();
            let y = istft(&spec, remainder(&x, w), 8000).unwrap();
            for (a, b) in x.iter().zip(&y.samples) {
                proptest::prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn sws_is_linear(seed in 0u64..1000, ell in 1usize..30, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let u = noise(40, seed);
            let v = noise(40, seed + 1);
            let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = sws(&mix, ell).unwrap();
            let su = sws(&u, ell).unwrap();
            let sv = sws(&v, ell).unwrap();
            for j in 0..lhs.len() {
                proptest::prop_assert!((lhs[j] - (a * su[j] + b * sv[j])).abs() < 1e-9);
            }
        }
    }
}
