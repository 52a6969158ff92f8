use curvesteg::wav::{load_wav, save_wav, WavFormat};
use curvesteg_core::AudioClip;
use hound::{SampleFormat, WavSpec, WavWriter};
use proptest::prelude::*;

fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
    WavSpec { channels, sample_rate: 22050, bits_per_sample: bits, sample_format: format }
}

#[test]
fn pcm16_is_rescaled() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.wav");
    let mut w = WavWriter::create(&p, spec(1, 16, SampleFormat::Int)).unwrap();
    for v in [16384i16, -32768, 0] {
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();
    let clip = load_wav(&p).unwrap();
    assert_eq!(clip.sample_rate, 22050);
    assert!((clip.samples[0] - 0.5).abs() < 1e-4);
    assert_eq!(clip.samples[1], -1.0);
    assert_eq!(clip.samples[2], 0.0);
}

#[test]
fn stereo_is_averaged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.wav");
    let mut w = WavWriter::create(&p, spec(2, 32, SampleFormat::Float)).unwrap();
    for v in [0.2f32, 0.4, -1.0, 1.0] {
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();
    let clip = load_wav(&p).unwrap();
    assert_eq!(clip.len(), 2);
    assert!((clip.samples[0] - 0.3).abs() < 1e-7);
    assert_eq!(clip.samples[1], 0.0);
}

#[test]
fn twenty_four_bit_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.wav");
    let mut w = WavWriter::create(&p, spec(1, 24, SampleFormat::Int)).unwrap();
    w.write_sample(1i32 << 22).unwrap();
    w.finalize().unwrap();
    assert_eq!(load_wav(&p).unwrap().samples, vec![0.5]);
}

#[test]
fn empty_and_missing_files_fail() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.wav");
    WavWriter::create(&p, spec(1, 16, SampleFormat::Int)).unwrap().finalize().unwrap();
    assert!(load_wav(&p).is_err());
    assert!(load_wav(&dir.path().join("nope.wav")).is_err());
}

#[test]
fn full_scale_survives_pcm16() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("max.wav");
    let clip = AudioClip::new(vec![1.0, -1.0, 0.0], 8000).unwrap();
    save_wav(&clip, &p, WavFormat::Pcm16).unwrap();
    let back = load_wav(&p).unwrap();
    assert!(back.samples[0] > 0.0 && (back.samples[0] - 1.0).abs() <= 2f64.powi(-15));
    assert_eq!(back.samples[1], -1.0);
}

#[test]
fn unwritable_path_fails() {
    let clip = AudioClip::new(vec![0.0], 8000).unwrap();
    assert!(save_wav(&clip, std::path::Path::new("/nonexistent-dir/x.wav"), WavFormat::Float32).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trips_within_quantization(samples in prop::collection::vec(-1.0f64..=1.0, 1..2000)) {
        let dir = tempfile::tempdir().unwrap();
        let clip = AudioClip::new(samples, 44100).unwrap();
        for (format, bound) in [(WavFormat::Float32, 1e-7), (WavFormat::Pcm16, 2f64.powi(-15))] {
            let p = dir.path().join("r.wav");
            save_wav(&clip, &p, format).unwrap();
            let back = load_wav(&p).unwrap();
            prop_assert_eq!(back.len(), clip.len());
            prop_assert_eq!(back.sample_rate, 44100);
            let worst = back.samples.iter().zip(&clip.samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(worst <= bound, "{:?}: {}", format, worst);
        }
    }
}
