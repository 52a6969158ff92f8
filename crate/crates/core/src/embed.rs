//! Hiding a closed curve in the magnitudes of a few STFT rows.
//!
//! For each curve dimension `i` a carrier bin `k_i` is chosen. The target
//! coordinate is shifted and scaled to the range of the carrier row's
//! sliding window sum, re-parameterized in time by a Viterbi search so it
//! matches that row as well as possible, and finally embedded by solving a
//! nonnegative least squares problem for the row's magnitudes. The
//! relative scale of each dimension goes into the phase of its row.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::audio::AudioClip;
use crate::nnls::{self, solve_magnitudes};
use crate::spectral::{istft, remainder, stft, sws, Spectrogram};
use crate::stats::{mean, stdev};
use crate::tour::{resample_closed, Curve};
use crate::{Error, Result};

/// Fewest sliding-window-sum samples an embedding may use.
pub const MIN_EMBEDDED_SAMPLES: usize = 64;

/// Largest Viterbi step tried while searching for full-loop coverage.
pub const MAX_STEP_LIMIT: usize = 64;

/// Fraction of clipped samples above which encode reports a warning.
pub const CLIP_WARNING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct EncodingConfig {
    pub window_length: usize,
    pub sliding_window: usize,
    pub lam: f64,
    pub freqs: Vec<usize>,
    pub target_samples: usize,
    pub viterbi: bool,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self::for_dimension(2)
    }
}

impl EncodingConfig {
    /// Defaults with the `d` lowest non-DC bins as carriers.
    pub fn for_dimension(d: usize) -> Self {
        Self {
            window_length: 1024,
            sliding_window: 16,
            lam: 0.1,
            freqs: (1..=d).collect(),
            target_samples: 2000,
            viterbi: true,
            solver_tol: nnls::DEFAULT_TOL,
            solver_max_iter: nnls::DEFAULT_MAX_ITER,
        }
    }

    pub fn dimension(&self) -> usize {
        self.freqs.len()
    }

    /// Checks everything that does not depend on the carrier length.
    pub fn validate(&self) -> Result<()> {
        let w = self.window_length;
        if w < 4 || !w.is_multiple_of(2) {
            return Err(Error::InvalidWindow(w));
        }
        if self.sliding_window == 0 {
            return Err(Error::InvalidParameter("sliding window must be at least 1".into()));
        }
        if !(self.lam >= 0.0) || !self.lam.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("lambda must be finite and >= 0, got {}", self.lam)));
        }
        if !(2..=3).contains(&self.freqs.len()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "need 2 or 3 carrier bins, got {}",
                self.freqs.len()
            )));
        }
        for (i, &k) in self.freqs.iter().enumerate() {
            if k == 0 || k >= w / 2 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "carrier bin {k} must lie strictly between 0 and {}",
                    w / 2
                )));
            }
            if self.freqs[..i].contains(&k) {
                return Err(Error::InvalidParameter(alloc::format!("carrier bin {k} listed twice")));
            }
        }
        if self.target_samples < 3 {
            return Err(Error::InvalidParameter("target needs at least 3 samples".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Number of embedded samples for a carrier with `n_frames` frames,
    /// checking the carrier-dependent constraints.
    pub fn embedded_len(&self, n_frames: usize) -> Result<usize> {
        let needed = MIN_EMBEDDED_SAMPLES + self.sliding_window - 1;
        if n_frames < needed {
            return Err(Error::CarrierTooShort { frames: n_frames, needed });
        }
        Ok(n_frames - self.sliding_window + 1)
    }
}

/// The target as actually embedded, plus how it was derived.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreparedTarget {
    /// `d × N_M`, shifted, scaled and re-parameterized.
    pub values: Vec<Vec<f64>>,
    pub scale_factors: Vec<f64>,
    pub offsets: Vec<f64>,
    /// Indices into the (possibly reversed) resampled target.
    pub reparam: Vec<usize>,
    pub reversed: bool,
    /// Largest step allowed in the final Viterbi run; 0 for uniform.
    pub max_step: usize,
    pub cost: f64,
    pub full_loop: bool,
}

impl PreparedTarget {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Record of an embedding, for evaluation only. Decoding never reads it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sidecar {
    pub config: EncodingConfig,
    pub prepared: PreparedTarget,
    pub scale_ratios: Vec<f64>,
    pub n_frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Warning {
    NoFullLoop { max_step: usize },
    SolverNotConverged { dimension: usize, iterations: usize },
    ExcessiveClipping { clipped: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodeReport {
    pub clipped_samples: usize,
    pub solver_iterations: Vec<usize>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StegoResult {
    pub stego: AudioClip,
    pub sidecar: Sidecar,
    pub report: EncodeReport,
}

/// Matches one target coordinate to the range of a carrier row: scale by
/// the ratio of standard deviations, then shift so the means agree.
/// Returns `(a, b, a·target + b)`.
pub fn fit_shift_scale(target_dim: &[f64], sws_row: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let st = stdev(target_dim);
    let ss = stdev(sws_row);
    if target_dim.is_empty() || sws_row.is_empty() || !(st > 0.0) || !(ss > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let a = ss / st;
    let b = mean(sws_row) - a * mean(target_dim);
    Ok((a, b, target_dim.iter().map(|t| a * t + b).collect()))
}

/// Relative spread of each dimension, `stdev_i / max stdev`.
pub fn scale_ratios(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let s: Vec<f64> = rows.iter().map(|r| stdev(r)).collect();
    let max = s.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) || s.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::ZeroVariance);
    }
    Ok(s.iter().map(|v| v / max).collect())
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<usize> {
    let n = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(alloc::format!("{what} rows must be non-empty and equally long")));
    }
    Ok(n)
}

/// Viterbi search for indices `Θ` into a cyclic target (`d × N_T`) that
/// best match `sws` (`d × N_M`) in squared error, with circular steps in
/// `[1, K]`. Returns `(Θ, cost)`. Ties prefer the smaller step and then
/// the lower end index.
pub fn viterbi_reparam(target: &[Vec<f64>], sws: &[Vec<f64>], k: usize) -> Result<(Vec<usize>, f64)> {
    let nt = check_rows(target, "target")?;
    let nm = check_rows(sws, "sws")?;
    if target.len() != sws.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "target has {} dimensions, sws has {}",
            target.len(),
            sws.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("maximum step must be at least 1".into()));
    }
    let k = k.min(nt);
    let local = |t: usize, j: usize| -> f64 {
        target.iter().zip(sws).map(|(tr, sr)| (tr[t] - sr[j]) * (tr[t] - sr[j])).sum()
    };

    let mut prev: Vec<f64> = (0..nt).map(|t| local(t, 0)).collect();
    let mut cur = vec![0.0; nt];
    let mut back: Vec<u32> = vec![0; nt * nm];
    for j in 1..nm {
        for t in 0..nt {
            let mut best = f64::INFINITY;
            let mut best_step = 1;
            for s in 1..=k {
                let v = prev[(t + nt - s) % nt];
                if v < best {
                    best = v;
                    best_step = s;
                }
            }
            cur[t] = best + local(t, j);
            back[j * nt + t] = best_step as u32;
        }
        core::mem::swap(&mut prev, &mut cur);
    }

    let (mut t, cost) = prev
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut theta = vec![0usize; nm];
    for j in (0..nm).rev() {
        theta[j] = t;
        if j > 0 {
            t = (t + nt - back[j * nt + t] as usize) % nt;
        }
    }
    Ok((theta, cost))
}

/// Total circular distance travelled by `Θ` on a cyclic target of `nt`
/// samples.
pub fn loop_coverage(theta: &[usize], nt: usize) -> usize {
    theta.windows(2).map(|p| (p[1] + nt - p[0]) % nt).sum()
}

/// Outcome of [`choose_reparam`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reparam {
    pub theta: Vec<usize>,
    pub cost: f64,
    pub max_step: usize,
    pub reversed: bool,
    pub full_loop: bool,
}

fn smallest_covering_run(target: &[Vec<f64>], sws: &[Vec<f64>]) -> Result<(Vec<usize>, f64, usize, bool)> {
    let nt = target[0].len();
    let nm = sws[0].len();
    // Steps smaller than this cannot add up to a full loop in N_M − 1 moves.
    let first = if nm > 1 { nt.div_ceil(nm - 1).max(1) } else { nt };
    let mut best = None;
    for k in first..=nt.min(MAX_STEP_LIMIT.max(first)) {
        let (theta, cost) = viterbi_reparam(target, sws, k)?;
        if loop_coverage(&theta, nt) >= nt {
            return Ok((theta, cost, k, true));
        }
        best = Some((theta, cost, k));
    }
    let (theta, cost, k) = match best {
        Some(b) => b,
        None => {
            let (theta, cost) = viterbi_reparam(target, sws, nt)?;
            (theta, cost, nt)
        }
    };
    Ok((theta, cost, k, false))
}

/// Raises `K` until the optimal path covers the whole loop, for the target
/// and for its reversal, and keeps the cheaper direction. Values of `K`
/// too small to ever cover the loop are skipped, and the search gives up
/// (with `full_loop = false`) past [`MAX_STEP_LIMIT`].
pub fn choose_reparam(target: &[Vec<f64>], sws: &[Vec<f64>]) -> Result<Reparam> {
    let nt = check_rows(target, "target")?;
    let nm = check_rows(sws, "sws")?;
    if nt <= nm {
        return Err(Error::InvalidParameter(alloc::format!(
            "target needs more samples ({nt}) than the carrier offers ({nm})"
        )));
    }
    let forward = smallest_covering_run(target, sws)?;
    let rev_target: Vec<Vec<f64>> = target.iter().map(|r| r.iter().rev().copied().collect()).collect();
    let backward = smallest_covering_run(&rev_target, sws)?;
    // A run that covers the loop beats one that does not.
    let take_backward = (backward.3, -backward.1) > (forward.3, -forward.1);
    let (theta, cost, max_step, full_loop) = if take_backward { backward } else { forward };
    Ok(Reparam { theta, cost, max_step, reversed: take_backward, full_loop })
}

/// Shifts, scales and re-parameterizes the target rows (`d × N_T`) against
/// the carrier's sliding window sums (`d × N_M`).
pub fn prepare_target(target: &[Vec<f64>], sws_rows: &[Vec<f64>], viterbi: bool) -> Result<PreparedTarget> {
    let nt = check_rows(target, "target")?;
    let nm = check_rows(sws_rows, "sws")?;
    if target.len() != sws_rows.len() {
        return Err(Error::DimensionMismatch("target and carrier dimensions differ".into()));
    }
    let mut scale_factors = Vec::with_capacity(target.len());
    let mut offsets = Vec::with_capacity(target.len());
    let mut shifted = Vec::with_capacity(target.len());
    for (t, s) in target.iter().zip(sws_rows) {
        let (a, b, row) = fit_shift_scale(t, s)?;
        scale_factors.push(a);
        offsets.push(b);
        shifted.push(row);
    }

    if viterbi {
        let rp = choose_reparam(&shifted, sws_rows)?;
        let values = shifted
            .iter()
            .map(|row| {
                let src: Vec<f64> = if rp.reversed { row.iter().rev().copied().collect() } else { row.clone() };
                rp.theta.iter().map(|&t| src[t]).collect()
            })
            .collect();
        return Ok(PreparedTarget {
            values,
            scale_factors,
            offsets,
            reparam: rp.theta,
            reversed: rp.reversed,
            max_step: rp.max_step,
            cost: rp.cost,
            full_loop: rp.full_loop,
        });
    }

    // Uniform arc-length resampling of the unscaled target to N_M points.
    let points: Vec<Vec<f64>> = (0..nt).map(|j| target.iter().map(|r| r[j]).collect()).collect();
    let uniform = resample_closed(&Curve::new(points)?, nm)?;
    let values: Vec<Vec<f64>> = (0..target.len())
        .map(|i| uniform.points.iter().map(|p| scale_factors[i] * p[i] + offsets[i]).collect())
        .collect();
    let cost = values
        .iter()
        .zip(sws_rows)
        .map(|(v, s)| v.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    let reparam = (0..nm).map(|j| ((j * nt + nm / 2) / nm) % nt).collect();
    Ok(PreparedTarget { values, scale_factors, offsets, reparam, reversed: false, max_step: 0, cost, full_loop: true })
}

/// Sets the phase of every frame of row `freqs[i]` to `ratios[i]·π`.
pub fn encode_scales_in_phase(spec: &mut Spectrogram, freqs: &[usize], ratios: &[f64]) -> Result<()> {
    if freqs.len() != ratios.len() {
        return Err(Error::DimensionMismatch("one ratio per carrier bin".into()));
    }
    for (&k, &r) in freqs.iter().zip(ratios) {
        if k >= spec.n_bins() {
            return Err(Error::InvalidParameter(alloc::format!("bin {k} out of range")));
        }
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("scale ratio {r} outside (0, 1]")));
        }
        spec.phase[k].iter_mut().for_each(|p| *p = r * core::f64::consts::PI);
    }
    Ok(())
}

/// Embeds `curve` into `carrier`.
pub fn encode(carrier: &AudioClip, curve: &Curve, cfg: &EncodingConfig) -> Result<StegoResult> {
    cfg.validate()?;
    carrier.validate()?;
    curve.validate()?;
    if curve.dimension != cfg.dimension() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "curve is {}-dimensional but {} carrier bins are configured",
            curve.dimension,
            cfg.dimension()
        )));
    }
    let mut spec = stft(carrier, cfg.window_length)?;
    let n_frames = spec.n_frames;
    let nm = cfg.embedded_len(n_frames)?;
    if cfg.target_samples <= nm {
        return Err(Error::InvalidParameter(alloc::format!(
            "target_samples ({}) must exceed the {nm} embedded samples",
            cfg.target_samples
        )));
    }

    let target = resample_closed(curve, cfg.target_samples)?;
    let rows: Vec<Vec<f64>> = (0..curve.dimension).map(|i| target.coordinate(i)).collect();
    let ratios = scale_ratios(&rows)?;
    let sws_rows = cfg.freqs.iter().map(|&k| sws(&spec.mag[k], cfg.sliding_window)).collect::<Result<Vec<_>>>()?;
    let prepared = prepare_target(&rows, &sws_rows, cfg.viterbi)?;

    let mut warnings = Vec::new();
    if !prepared.full_loop {
        warnings.push(Warning::NoFullLoop { max_step: prepared.max_step });
    }
    let mut solver_iterations = Vec::with_capacity(cfg.freqs.len());
    for (i, &k) in cfg.freqs.iter().enumerate() {
        let rep = solve_magnitudes(
            &spec.mag[k],
            &prepared.values[i],
            cfg.sliding_window,
            cfg.lam,
            cfg.solver_tol,
            cfg.solver_max_iter,
        )?;
        if !rep.converged {
            warnings.push(Warning::SolverNotConverged { dimension: i, iterations: rep.iterations });
        }
        solver_iterations.push(rep.iterations);
        spec.mag[k] = rep.solution;
    }
    encode_scales_in_phase(&mut spec, &cfg.freqs, &ratios)?;

    let mut stego = istft(&spec, remainder(&carrier.samples, cfg.window_length), carrier.sample_rate)?;
    let clipped = stego.hard_clip();
    if clipped as f64 > CLIP_WARNING_FRACTION * stego.len() as f64 {
        warnings.push(Warning::ExcessiveClipping { clipped, total: stego.len() });
    }
    Ok(StegoResult {
        stego,
        sidecar: Sidecar { config: cfg.clone(), prepared, scale_ratios: ratios, n_frames },
        report: EncodeReport { clipped_samples: clipped, solver_iterations, warnings },
    })
}

/// Human-readable one-liner for a warning.
pub fn describe(w: &Warning) -> String {
    match w {
        Warning::NoFullLoop { max_step } => {
            alloc::format!("re-parameterization never covered the whole target (max step {max_step})")
        }
        Warning::SolverNotConverged { dimension, iterations } => {
            alloc::format!("magnitude solve for dimension {dimension} stopped after {iterations} iterations")
        }
        Warning::ExcessiveClipping { clipped, total } => alloc::format!("{clipped} of {total} samples clipped"),
    }
}
