//! Lossy codec round trips through external programs.
//!
//! Commands are templates split on whitespace and run without a shell.
//! `{in}` and `{out}` are replaced by file paths, `{bitrate}` by the
//! bitrate in kbps and `{rate}` by the input sample rate.

use std::path::{Path, PathBuf};
use std::process::Command;

use curvesteg_core::fft::Dft;
use curvesteg_core::AudioClip;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wav::{load_wav, save_wav, WavFormat};

/// Environment variable naming an ffmpeg binary.
pub const FFMPEG_ENV: &str = "CURVESTEG_FFMPEG";

/// Largest codec delay, in samples, that compensation searches for.
pub const MAX_LAG: usize = 4096;

/// Largest relative duration change a codec may introduce.
pub const MAX_DURATION_CHANGE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecSpec {
    pub encode_command: String,
    pub decode_command: String,
    pub bitrate_kbps: u32,
    /// Extension of the intermediate compressed file.
    #[serde(default = "default_ext")]
    pub extension: String,
}

fn default_ext() -> String {
    "bin".into()
}

impl CodecSpec {
    pub fn new(encode_command: &str, decode_command: &str, bitrate_kbps: u32, extension: &str) -> Result<Self> {
        let spec = Self {
            encode_command: encode_command.into(),
            decode_command: decode_command.into(),
            bitrate_kbps,
            extension: extension.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("encode", &self.encode_command), ("decode", &self.decode_command)] {
            let ins = t.matches("{in}").count();
            let outs = t.matches("{out}").count();
            if ins != 1 || outs != 1 {
                return Err(Error::Codec(format!(
                    "{name} template needs exactly one {{in}} and one {{out}}, found {ins} and {outs}"
                )));
            }
        }
        if self.bitrate_kbps == 0 {
            return Err(Error::Codec("bitrate must be positive".into()));
        }
        Ok(())
    }

    /// Plain file copy; a lossless stand-in.
    pub fn identity() -> Self {
        Self {
            encode_command: "cp {in} {out}".into(),
            decode_command: "cp {in} {out}".into(),
            bitrate_kbps: 1411,
            extension: "wav".into(),
        }
    }

    /// MP3 through the given ffmpeg binary.
    pub fn mp3(ffmpeg: &Path, bitrate_kbps: u32) -> Self {
        let exe = ffmpeg.display();
        Self {
            encode_command: format!("{exe} -nostdin -y -loglevel error -i {{in}} -f mp3 -codec:a libmp3lame -b:a {{bitrate}}k {{out}}"),
            decode_command: format!("{exe} -nostdin -y -loglevel error -i {{in}} -ac 1 -ar {{rate}} -c:a pcm_f32le {{out}}"),
            bitrate_kbps,
            extension: "mp3".into(),
        }
    }

    /// MP3 through whichever ffmpeg [`find_ffmpeg`] turns up.
    pub fn default_mp3(bitrate_kbps: u32) -> Option<Self> {
        find_ffmpeg().map(|p| Self::mp3(&p, bitrate_kbps))
    }
}

fn on_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file())
}

/// Looks for ffmpeg in `$CURVESTEG_FFMPEG`, then on `PATH`, then as the
/// binary bundled with the `imageio-ffmpeg` Python package.
pub fn find_ffmpeg() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(FFMPEG_ENV) {
        let p = PathBuf::from(p);
        return p.is_file().then_some(p);
    }
    if let Some(p) = on_path("ffmpeg") {
        return Some(p);
    }
    let out = Command::new("python3")
        .args(["-c", "import imageio_ffmpeg; print(imageio_ffmpeg.get_ffmpeg_exe())"])
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    let p = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
    p.is_file().then_some(p)
}

fn run(template: &str, input: &Path, output: &Path, spec: &CodecSpec, rate: u32) -> Result<()> {
    let args: Vec<String> = template
        .split_whitespace()
        .map(|tok| {
            tok.replace("{in}", &input.to_string_lossy())
                .replace("{out}", &output.to_string_lossy())
                .replace("{bitrate}", &spec.bitrate_kbps.to_string())
                .replace("{rate}", &rate.to_string())
        })
        .collect();
    let (program, rest) = args.split_first().ok_or_else(|| Error::Codec("empty command".into()))?;
    let out = Command::new(program)
        .args(rest)
        .output()
        .map_err(|e| Error::Codec(format!("cannot run {program}: {e}")))?;
    if !out.status.success() {
        return Err(Error::Codec(format!(
            "{program} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(())
}

/// Linear-interpolation resampling; only used when a codec changes the
/// sample rate despite being asked not to.
pub fn resample_linear(samples: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to || samples.is_empty() {
        return samples.to_vec();
    }
    let n_out = ((samples.len() as u64 * to as u64) / from as u64).max(1) as usize;
    let ratio = from as f64 / to as f64;
    (0..n_out)
        .map(|i| {
            let x = i as f64 * ratio;
            let j = x.floor() as usize;
            let f = x - j as f64;
            let a = samples[j.min(samples.len() - 1)];
            let b = samples[(j + 1).min(samples.len() - 1)];
            a + f * (b - a)
        })
        .collect()
}

/// Lag `L` in `[-max_lag, max_lag]` maximizing the normalized
/// cross-correlation `Σ x[i]·y[i+L]` of `y` against `x`.
pub fn estimate_delay(x: &[f64], y: &[f64], max_lag: usize) -> isize {
    if x.is_empty() || y.is_empty() {
        return 0;
    }
    let n = (x.len() + y.len()).next_power_of_two();
    let dft = Dft::new(n);
    let mut fx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fx.resize(n, Complex64::new(0.0, 0.0));
    let mut fy: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fy.resize(n, Complex64::new(0.0, 0.0));
    dft.forward(&mut fx);
    dft.forward(&mut fy);
    let mut prod: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| a.conj() * b).collect();
    dft.inverse(&mut prod);

    // Energies over the overlapping ranges, from prefix sums of squares.
    let prefix = |s: &[f64]| {
        let mut p = Vec::with_capacity(s.len() + 1);
        p.push(0.0);
        let mut acc = 0.0;
        for v in s {
            acc += v * v;
            p.push(acc);
        }
        p
    };
    let (px, py) = (prefix(x), prefix(y));
    let energy = |p: &[f64], lo: usize, hi: usize| p[hi.min(p.len() - 1)] - p[lo.min(p.len() - 1)];

    let mut best = (0isize, f64::NEG_INFINITY);
    let max_lag = max_lag as isize;
    for lag in -max_lag..=max_lag {
        // Overlap: i in [max(0, −lag), min(len x, len y − lag)).
        let lo = (-lag).max(0) as usize;
        let hi = (x.len() as isize).min(y.len() as isize - lag);
        if hi <= lo as isize {
            continue;
        }
        let hi = hi as usize;
        let ex = energy(&px, lo, hi);
        let ey = energy(&py, (lo as isize + lag) as usize, (hi as isize + lag) as usize);
        if ex <= 0.0 || ey <= 0.0 {
            continue;
        }
        let c = prod[lag.rem_euclid(n as isize) as usize].re / (ex * ey).sqrt();
        if c > best.1 {
            best = (lag, c);
        }
    }
    best.0
}

/// Shifts `y` left by `lag` (right for negative lags), zero-padding and
/// trimming to `len` samples.
pub fn align(y: &[f64], lag: isize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let j = i as isize + lag;
            if j >= 0 && (j as usize) < y.len() {
                y[j as usize]
            } else {
                0.0
            }
        })
        .collect()
}

/// Encodes and decodes `clip` with `codec`, then undoes any change in
/// sample rate, leading delay and length.
pub fn codec_roundtrip(clip: &AudioClip, codec: &CodecSpec, scratch: &Path) -> Result<AudioClip> {
    codec.validate()?;
    clip.validate()?;
    std::fs::create_dir_all(scratch).map_err(crate::error::io_err(scratch))?;
    let dir = tempfile::Builder::new().prefix("codec-").tempdir_in(scratch).map_err(crate::error::io_err(scratch))?;
    let input = dir.path().join("in.wav");
    let mid = dir.path().join(format!("mid.{}", codec.extension));
    let output = dir.path().join("out.wav");
    save_wav(clip, &input, WavFormat::Float32)?;
    run(&codec.encode_command, &input, &mid, codec, clip.sample_rate)?;
    run(&codec.decode_command, &mid, &output, codec, clip.sample_rate)?;
    let decoded = load_wav(&output)?;

    let in_secs = clip.duration_secs();
    let out_secs = decoded.duration_secs();
    if (out_secs - in_secs).abs() > MAX_DURATION_CHANGE * in_secs {
        return Err(Error::Codec(format!("codec changed duration from {in_secs:.3} s to {out_secs:.3} s")));
    }
    let resampled = resample_linear(&decoded.samples, decoded.sample_rate, clip.sample_rate);
    let lag = estimate_delay(&clip.samples, &resampled, MAX_LAG);
    let samples = align(&resampled, lag, clip.len());
    Ok(AudioClip::new(samples, clip.sample_rate)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_of_shifted_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        for lag in [0isize, 1, 37, 1000, -25] {
            let y = if lag >= 0 {
                let mut y = vec![0.0; lag as usize];
                y.extend_from_slice(&x);
                y
            } else {
                x[(-lag) as usize..].to_vec()
            };
            assert_eq!(estimate_delay(&x, &y, 4096), lag);
            let back = align(&y, lag, x.len());
            let k = (-lag).max(0) as usize;
            assert!(back[..k].iter().all(|&v| v == 0.0));
            assert_eq!(&back[k..], &x[k..]);
        }
    }

    #[test]
    fn templates_are_checked() {
        assert!(CodecSpec::new("cp {in} {out}", "cp {in}", 64, "x").is_err());
        assert!(CodecSpec::new("cp {in} {in} {out}", "cp {in} {out}", 64, "x").is_err());
        assert!(CodecSpec::identity().validate().is_ok());
    }

    #[test]
    fn linear_resample_keeps_ramps() {
        let r: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let up = resample_linear(&r, 1, 2);
        assert_eq!(up.len(), 200);
        assert!((up[51] - 25.5).abs() < 1e-12);
    }
}
