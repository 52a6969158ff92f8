use std::f64::consts::PI;

use curvesteg_core::embed::{encode, EncodingConfig, PreparedTarget, Sidecar};
use curvesteg_core::extract::{decode_at_shift, recover_alignment};
use curvesteg_core::metrics::{aligned_distortion, snr};
use curvesteg_core::spectral::stft;
use curvesteg_core::stats::{pearson, stdev};
use curvesteg_core::synth::{bin_aligned_tones, music_clip, GENRE_CLIP_SAMPLES};
use curvesteg_core::tour::closed_length;
use curvesteg_core::{AudioClip, Curve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flower(n: usize, aspect: f64) -> Curve {
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let r = 1.0 + 0.35 * (5.0 * t).cos();
            vec![r * t.cos(), aspect * r * t.sin()]
        })
        .collect();
    Curve::new(pts).unwrap()
}

fn aspect(c: &Curve) -> f64 {
    stdev(&c.coordinate(1)) / stdev(&c.coordinate(0))
}

#[test]
fn uncompressed_round_trip_correlates() {
    let clip = music_clip(GENRE_CLIP_SAMPLES, 44100, 3);
    let cfg = EncodingConfig::default();
    let res = encode(&clip, &flower(700, 1.0), &cfg).unwrap();
    assert_eq!(res.stego.len(), clip.len());
    let dec = decode_at_shift(&res.stego, 0, &cfg).unwrap();
    assert_eq!(dec.len(), 1277);
    for i in 0..2 {
        let r = pearson(&dec.coordinate(i), &res.sidecar.prepared.values[i]);
        assert!(r >= 0.99, "dimension {i}: {r}");
    }
    let p = &res.sidecar.prepared;
    let steps: usize = p.reparam.windows(2).map(|w| (w[1] + cfg.target_samples - w[0]) % cfg.target_samples).sum();
    assert!(p.full_loop && steps >= cfg.target_samples);
    assert!(p.max_step <= 4, "K = {}", p.max_step);
}

#[test]
fn aspect_ratio_survives() {
    let clip = music_clip(GENRE_CLIP_SAMPLES / 2, 44100, 4);
    let cfg = EncodingConfig::default();
    for a in [1.0, 0.5, 0.25] {
        let res = encode(&clip, &flower(700, a), &cfg).unwrap();
        let dec = decode_at_shift(&res.stego, 0, &cfg).unwrap();
        let got = aspect(&dec);
        assert!((got - a).abs() <= 0.02 * a, "planted {a}, decoded {got}");
    }
}

#[test]
fn pure_carrier_still_decodes() {
    let clip = music_clip(44100 * 4, 44100, 5);
    let cfg = EncodingConfig::default();
    let c = decode_at_shift(&clip, 0, &cfg).unwrap();
    assert!(c.points.iter().flatten().all(|v| v.is_finite()));
    let d = recover_alignment(&clip, &cfg).unwrap();
    assert!(d.shift < cfg.window_length);
}

#[test]
fn true_shift_is_nearly_shortest() {
    let cfg = EncodingConfig::default();
    for (seed, a) in [(6, 0.7), (16, 0.4), (26, 1.0)] {
        let clip = music_clip(GENRE_CLIP_SAMPLES / 2, 44100, seed);
        let res = encode(&clip, &flower(700, a), &cfg).unwrap();
        let d = recover_alignment(&res.stego, &cfg).unwrap();
        let at_truth = d.lengths_by_shift[0];
        let longer = d.lengths_by_shift[1..].iter().filter(|&&l| at_truth <= l).count();
        assert!(longer as f64 >= 0.95 * (cfg.window_length - 1) as f64, "seed {seed}: {longer}");
        assert!(d.shift.min(cfg.window_length - d.shift) <= 10, "seed {seed}: shift {}", d.shift);
    }
}

#[test]
fn first_half_decodes_like_the_whole() {
    let clip = music_clip(GENRE_CLIP_SAMPLES / 2, 44100, 7);
    let cfg = EncodingConfig::default();
    let res = encode(&clip, &flower(500, 0.6), &cfg).unwrap();
    let full = decode_at_shift(&res.stego, 0, &cfg).unwrap();
    let half_len = res.stego.len() / 2;
    let half = AudioClip::new(res.stego.samples[..half_len].to_vec(), 44100).unwrap();
    let part = decode_at_shift(&half, 0, &cfg).unwrap();
    for i in 0..2 {
        let a = part.coordinate(i);
        let b = &full.coordinate(i)[..a.len()];
        assert!(pearson(&a, b) > 1.0 - 1e-9);
    }
}

#[test]
fn only_selected_rows_change() {
    let clip = music_clip(44100 * 6, 44100, 8);
    let cfg = EncodingConfig { freqs: vec![2, 5], ..EncodingConfig::default() };
    let res = encode(&clip, &flower(500, 1.0), &cfg).unwrap();
    assert_eq!(res.report.clipped_samples, 0);
    let a = stft(&clip, cfg.window_length).unwrap();
    let b = stft(&res.stego, cfg.window_length).unwrap();
    let mut worst: f64 = 0.0;
    for k in (0..a.n_bins()).filter(|k| !cfg.freqs.contains(k)) {
        for j in 0..a.n_frames {
            let za = num_complex::Complex64::from_polar(a.mag[k][j], a.phase[k][j]);
            let zb = num_complex::Complex64::from_polar(b.mag[k][j], b.phase[k][j]);
            worst = worst.max((za - zb).norm());
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn huge_lambda_is_near_silent() {
    let clip = bin_aligned_tones(44100 * 10, 44100, 1024, 8, 9);
    let cfg = EncodingConfig { lam: 1e9, ..EncodingConfig::default() };
    let res = encode(&clip, &flower(400, 1.0), &cfg).unwrap();
    let s = snr(&res.stego, &clip).unwrap();
    assert!(s > 60.0, "{s} dB");
}

#[test]
fn uniform_fallback_round_trips() {
    let clip = music_clip(44100 * 10, 44100, 10);
    let cfg = EncodingConfig { viterbi: false, ..EncodingConfig::default() };
    let res = encode(&clip, &flower(500, 1.0), &cfg).unwrap();
    assert_eq!(res.sidecar.prepared.max_step, 0);
    let dec = decode_at_shift(&res.stego, 0, &cfg).unwrap();
    for i in 0..2 {
        assert!(pearson(&dec.coordinate(i), &res.sidecar.prepared.values[i]) > 0.99);
    }
}

#[test]
fn three_dimensional_curve() {
    let clip = music_clip(44100 * 10, 44100, 11);
    let cfg = EncodingConfig::for_dimension(3);
    let knot = Curve::new(
        (0..600)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 600.0;
                vec![(t).sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin()]
            })
            .collect(),
    )
    .unwrap();
    let res = encode(&clip, &knot, &cfg).unwrap();
    let dec = decode_at_shift(&res.stego, 0, &cfg).unwrap();
    assert_eq!(dec.dimension, 3);
    for i in 0..3 {
        assert!(pearson(&dec.coordinate(i), &res.sidecar.prepared.values[i]) > 0.99);
    }
}

fn sidecar_for(values: Vec<Vec<f64>>) -> Sidecar {
    let d = values.len();
    let n = values[0].len();
    Sidecar {
        config: EncodingConfig::for_dimension(d),
        prepared: PreparedTarget {
            values,
            scale_factors: vec![1.0; d],
            offsets: vec![0.0; d],
            reparam: (0..n).collect(),
            reversed: false,
            max_step: 0,
            cost: 0.0,
            full_loop: true,
        },
        scale_ratios: vec![1.0; d],
        n_frames: n,
    }
}

#[test]
fn aligned_distortion_ignores_affine_maps() {
    let target = flower(1500, 0.8);
    let side = sidecar_for(vec![target.coordinate(0), target.coordinate(1)]);
    assert!(aligned_distortion(&target, &side).unwrap() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let noisy = Curve::new(
        target.points.iter().map(|p| vec![p[0] + rng.random_range(-0.1..0.1), p[1] + rng.random_range(-0.1..0.1)]).collect(),
    )
    .unwrap();
    let base = aligned_distortion(&noisy, &side).unwrap();
    let mapped =
        Curve::new(noisy.points.iter().map(|p| vec![2.0 * p[0] + 7.0, -0.3 * p[1] - 4.0]).collect()).unwrap();
    assert!((aligned_distortion(&mapped, &side).unwrap() - base).abs() < 1e-9);
}

#[test]
fn aligned_distortion_of_gaussian_noise() {
    // Per-coordinate N(0, σ²) noise in 2-d has Rayleigh distributed norms
    // with mean σ·√(π/2). Checked against both the closed form and a
    // direct Monte-Carlo mean of the noise norms.
    let sigma = 0.05;
    let target = flower(4000, 1.0);
    let side = sidecar_for(vec![target.coordinate(0), target.coordinate(1)]);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut gauss = || {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos() * sigma
    };
    let noise: Vec<[f64; 2]> = (0..target.len()).map(|_| [gauss(), gauss()]).collect();
    let mc = noise.iter().map(|e| e[0].hypot(e[1])).sum::<f64>() / noise.len() as f64;
    let noisy =
        Curve::new(target.points.iter().zip(&noise).map(|(p, e)| vec![p[0] + e[0], p[1] + e[1]]).collect()).unwrap();
    let got = aligned_distortion(&noisy, &side).unwrap();
    let rayleigh = sigma * (PI / 2.0).sqrt();
    assert!((got - rayleigh).abs() < 0.1 * rayleigh, "{got} vs {rayleigh}");
    assert!((got - mc).abs() < 0.05 * mc, "{got} vs {mc}");
}

#[test]
fn closed_length_grows_under_misalignment() {
    let clip = music_clip(44100 * 8, 44100, 14);
    let cfg = EncodingConfig::default();
    let res = encode(&clip, &flower(500, 1.0), &cfg).unwrap();
    let aligned = closed_length(&decode_at_shift(&res.stego, 0, &cfg).unwrap().points);
    let off = closed_length(&decode_at_shift(&res.stego, 512, &cfg).unwrap().points);
    assert!(off > aligned);
}
