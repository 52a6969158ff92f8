//! WAV reading and writing via `hound`.

use std::path::Path;

use curvesteg_core::AudioClip;
use hound::{SampleFormat, WavSpec};

use crate::error::{Error, Result};

/// Sample encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavFormat {
    Pcm16,
    #[default]
    Float32,
}

/// Loads any PCM or float WAV, averaging channels to mono and scaling
/// integer samples into [-1, 1].
pub fn load_wav(path: &Path) -> Result<AudioClip> {
    let wav_err = |source| Error::Wav { path: path.to_path_buf(), source };
    let mut reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => {
            reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>().map_err(wav_err)?
        }
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader.samples::<i32>().map(|s| s.map(|v| v as f64 * scale)).collect::<Result<_, _>>().map_err(wav_err)?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedWav { path: path.to_path_buf(), detail: format!("{fmt:?} {bits}-bit") })
        }
    };
    if channels == 0 {
        return Err(Error::UnsupportedWav { path: path.to_path_buf(), detail: "zero channels".into() });
    }
    let samples: Vec<f64> =
        interleaved.chunks_exact(channels).map(|frame| frame.iter().sum::<f64>() / channels as f64).collect();
    Ok(AudioClip::new(samples, spec.sample_rate)?)
}

pub fn save_wav(clip: &AudioClip, path: &Path, format: WavFormat) -> Result<()> {
    clip.validate()?;
    let wav_err = |source| Error::Wav { path: path.to_path_buf(), source };
    let spec = match format {
        WavFormat::Pcm16 => {
            WavSpec { channels: 1, sample_rate: clip.sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int }
        }
        WavFormat::Float32 => {
            WavSpec { channels: 1, sample_rate: clip.sample_rate, bits_per_sample: 32, sample_format: SampleFormat::Float }
        }
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &clip.samples {
        match format {
            WavFormat::Pcm16 => {
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q).map_err(wav_err)?;
            }
            WavFormat::Float32 => writer.write_sample(s as f32).map_err(wav_err)?,
        }
    }
    writer.finalize().map_err(wav_err)
}
