use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvesteg::codec::CodecSpec;
use curvesteg::config::{
    load_config, resolve_codec, resolve_encoding, resolve_scratch, CodecOverrides, ConfigFile, EncodingOverrides,
};
use curvesteg::formats::{
    curve_obj, curve_svg, load_curve, load_gray_image, load_mesh, read_json, save_curve, write_json, write_text,
    StippleFile,
};
use curvesteg::harness::{roundtrip, sweep, Job, RunOptions};
use curvesteg::wav::{load_wav, save_wav, WavFormat};
use curvesteg_core::art::{stipple_image, tour_stipple};
use curvesteg_core::embed::{describe, encode};
use curvesteg_core::extract::{decode_at_shift, recover_alignment};
use curvesteg_core::hamiltonian::mesh_loop;
use curvesteg_core::synth::{music_clip, GENRE_CLIP_SAMPLES};
use curvesteg_core::{AudioClip, Curve};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "curvesteg", version, about = "Hide closed curves in music and get them back")]
struct Cli {
    /// Directory for codec temporary files (default: config file, then
    /// $CURVESTEG_SCRATCH, then the system temp dir).
    #[arg(long, global = true)]
    scratch_dir: Option<PathBuf>,
    /// TOML config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted Voronoi stippling of an image.
    Stipple(StippleArgs),
    /// Closed tour through stipple points.
    Tour(TourArgs),
    /// Closed loop over the faces of a watertight triangle mesh.
    Hamcycle(HamcycleArgs),
    /// Hide a curve in a carrier WAV.
    Encode(EncodeArgs),
    /// Recover a curve from audio alone.
    Decode(DecodeArgs),
    /// Encode, pass through a codec, decode and score.
    Roundtrip(RoundtripArgs),
    /// Round trips over a grid of clips, curves and settings.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct StippleArgs {
    image: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Brightness above which pixels get no weight.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    blur_sigma: Option<f64>,
    #[arg(long)]
    canny_low: Option<f64>,
    #[arg(long)]
    canny_high: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TourArgs {
    stipple: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Skip the curvature-flow smoothing pass.
    #[arg(long)]
    no_smooth: bool,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args)]
struct HamcycleArgs {
    mesh: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the loop as an OBJ polyline.
    #[arg(long)]
    obj: Option<PathBuf>,
}

#[derive(Args, Default)]
struct EncodingFlags {
    /// STFT window length.
    #[arg(long)]
    window: Option<usize>,
    /// Sliding window sum length.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    lam: Option<f64>,
    /// Carrier bins, comma separated.
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<usize>>,
    #[arg(long)]
    target_samples: Option<usize>,
    /// Uniform resampling instead of the Viterbi re-parameterization.
    #[arg(long)]
    no_viterbi: bool,
    #[arg(long)]
    solver_tol: Option<f64>,
    #[arg(long)]
    solver_max_iter: Option<usize>,
}

impl EncodingFlags {
    fn overrides(&self) -> EncodingOverrides {
        EncodingOverrides {
            window_length: self.window,
            sliding_window: self.ell,
            lam: self.lam,
            freqs: self.freqs.clone(),
            target_samples: self.target_samples,
            viterbi: self.no_viterbi.then_some(false),
            solver_tol: self.solver_tol,
            solver_max_iter: self.solver_max_iter,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    carrier: PathBuf,
    curve: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Evaluation record (prepared target, re-parameterization, config).
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Write 16-bit PCM instead of 32-bit float.
    #[arg(long)]
    pcm16: bool,
    #[command(flatten)]
    enc: EncodingFlags,
}

#[derive(Args)]
struct DecodeArgs {
    audio: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Dimension of the hidden curve.
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    /// Frame offset to decode at; searched for when omitted.
    #[arg(long)]
    shift: Option<usize>,
    /// Shift search results.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    obj: Option<PathBuf>,
    #[command(flatten)]
    enc: EncodingFlags,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecChoice {
    None,
    Identity,
    Mp3,
}

#[derive(Args)]
struct CodecFlags {
    #[arg(long, value_enum, default_value_t = CodecChoice::Mp3)]
    codec: CodecChoice,
    #[arg(long)]
    bitrate: Option<u32>,
}

impl CodecFlags {
    fn resolve(&self, file: Option<&ConfigFile>) -> anyhow::Result<Option<CodecSpec>> {
        match self.codec {
            CodecChoice::None => Ok(None),
            CodecChoice::Identity => Ok(Some(CodecSpec::identity())),
            CodecChoice::Mp3 => {
                let flags = CodecOverrides { bitrate_kbps: self.bitrate, ..Default::default() };
                match resolve_codec(file, &flags)? {
                    Some(c) => Ok(Some(c)),
                    None => bail!("no ffmpeg found; set CURVESTEG_FFMPEG or pass --codec none"),
                }
            }
        }
    }
}

#[derive(Args)]
struct RoundtripArgs {
    carrier: PathBuf,
    curve: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Rotate the received audio by this many samples and recover the
    /// alignment.
    #[arg(long)]
    shift: Option<usize>,
    #[command(flatten)]
    codec: CodecFlags,
    #[command(flatten)]
    enc: EncodingFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Carrier WAV files.
    #[arg(long, num_args = 1..)]
    clips: Vec<PathBuf>,
    /// Generate this many synthetic carriers instead.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, num_args = 1.., required = true)]
    curves: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    lams: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    ells: Vec<usize>,
    /// Seed for synthetic carriers and planted shifts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plant a random shift in every job and report recovery.
    #[arg(long)]
    shifts: bool,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    codec: CodecFlags,
    #[command(flatten)]
    enc: EncodingFlags,
}

#[derive(Serialize)]
struct Diagnostics {
    shift: usize,
    searched: bool,
    scale_ratios: Vec<f64>,
    lengths_by_shift: Vec<f64>,
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn write_curve_extras(curve: &Curve, svg: Option<&Path>, obj: Option<&Path>) -> anyhow::Result<()> {
    if let Some(p) = svg {
        write_text(p, &curve_svg(curve)?)?;
    }
    if let Some(p) = obj {
        write_text(p, &curve_obj(curve))?;
    }
    Ok(())
}

fn cmd_stipple(a: &StippleArgs, file: Option<&ConfigFile>) -> anyhow::Result<()> {
    let img = load_gray_image(&a.image)?;
    let mut opts = file.and_then(|f| f.stipple.clone()).unwrap_or_default();
    if let Some(seed) = file.and_then(|f| f.seed) {
        opts.seed = seed;
    }
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut opts.threshold, a.threshold);
    set(&mut opts.blur_sigma, a.blur_sigma);
    set(&mut opts.canny_low, a.canny_low);
    set(&mut opts.canny_high, a.canny_high);
    opts.n_points = a.points.unwrap_or(opts.n_points);
    opts.n_iters = a.iters.unwrap_or(opts.n_iters);
    opts.seed = a.seed.unwrap_or(opts.seed);
    let pattern = stipple_image(&img, &opts)?;
    write_json(&a.output, &StippleFile::new(img.width, img.height, &pattern))?;
    Ok(())
}

fn cmd_tour(a: &TourArgs) -> anyhow::Result<()> {
    let stipple: StippleFile = read_json(&a.stipple)?;
    let curve = tour_stipple(&stipple.pattern(), (!a.no_smooth).then_some(a.sigma))?;
    save_curve(&a.output, &curve)?;
    write_curve_extras(&curve, a.svg.as_deref(), None)
}

fn cmd_hamcycle(a: &HamcycleArgs) -> anyhow::Result<()> {
    let mesh = load_mesh(&a.mesh)?;
    let lp = mesh_loop(&mesh)?;
    save_curve(&a.output, &lp.curve)?;
    write_curve_extras(&lp.curve, None, a.obj.as_deref())
}

fn cmd_encode(a: &EncodeArgs, file: Option<&ConfigFile>) -> anyhow::Result<()> {
    let carrier = load_wav(&a.carrier)?;
    let curve = load_curve(&a.curve)?;
    let cfg = resolve_encoding(curve.dimension, file, &a.enc.overrides());
    let res = encode(&carrier, &curve, &cfg)?;
    for w in &res.report.warnings {
        eprintln!("warning: {}", describe(w));
    }
    let format = if a.pcm16 { WavFormat::Pcm16 } else { WavFormat::Float32 };
    save_wav(&res.stego, &a.output, format)?;
    if let Some(p) = &a.sidecar {
        write_json(p, &res.sidecar)?;
    }
    Ok(())
}

fn cmd_decode(a: &DecodeArgs, file: Option<&ConfigFile>) -> anyhow::Result<()> {
    let clip = load_wav(&a.audio)?;
    let cfg = resolve_encoding(a.dimension, file, &a.enc.overrides());
    let (curve, diag) = match a.shift {
        Some(s) => {
            let curve = decode_at_shift(&clip, s, &cfg)?;
            let ratios = (0..curve.dimension)
                .map(|i| curvesteg_core::stats::stdev(&curve.coordinate(i)))
                .collect();
            (curve, Diagnostics { shift: s, searched: false, scale_ratios: ratios, lengths_by_shift: Vec::new() })
        }
        None => {
            let d = recover_alignment(&clip, &cfg)?;
            let diag = Diagnostics {
                shift: d.shift,
                searched: true,
                scale_ratios: d.scale_ratios.clone(),
                lengths_by_shift: d.lengths_by_shift.clone(),
            };
            (d.curve, diag)
        }
    };
    save_curve(&a.output, &curve)?;
    if let Some(p) = &a.diagnostics {
        write_json(p, &diag)?;
    }
    write_curve_extras(&curve, a.svg.as_deref(), a.obj.as_deref())
}

fn cmd_roundtrip(a: &RoundtripArgs, file: Option<&ConfigFile>, scratch: PathBuf) -> anyhow::Result<()> {
    let carrier = load_wav(&a.carrier)?;
    let curve = load_curve(&a.curve)?;
    let cfg = resolve_encoding(curve.dimension, file, &a.enc.overrides());
    let opts = RunOptions { codec: a.codec.resolve(file)?, scratch, planted_shift: a.shift };
    let out = roundtrip(&stem(&a.carrier), &carrier, &stem(&a.curve), &curve, &cfg, &opts)?;
    write_json(&a.output, &out.metrics)?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, file: Option<&ConfigFile>, scratch: PathBuf) -> anyhow::Result<()> {
    use rand::{Rng, SeedableRng};

    let mut clips: Vec<(String, AudioClip)> = Vec::new();
    for p in &a.clips {
        clips.push((stem(p), load_wav(p)?));
    }
    for i in 0..a.synthetic.unwrap_or(0) {
        let seed = a.seed.wrapping_add(i as u64);
        clips.push((format!("synthetic-{seed}"), music_clip(GENRE_CLIP_SAMPLES, 44100, seed)));
    }
    if clips.is_empty() {
        bail!("no carriers: pass --clips or --synthetic");
    }
    let curves: Vec<(String, Curve)> =
        a.curves.iter().map(|p| Ok((stem(p), load_curve(p)?))).collect::<anyhow::Result<_>>()?;
    let codec = a.codec.resolve(file)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let mut jobs = Vec::new();
    for (clip_name, carrier) in &clips {
        for (curve_name, curve) in &curves {
            for &ell in &a.ells {
                for &lam in &a.lams {
                    let mut over = a.enc.overrides();
                    over.sliding_window = Some(ell);
                    over.lam = Some(lam);
                    let config = resolve_encoding(curve.dimension, file, &over);
                    let planted_shift = a.shifts.then(|| rng.random_range(0..config.window_length));
                    jobs.push(Job { clip_name, carrier, curve_name, curve, config, planted_shift });
                }
            }
        }
    }
    let results = sweep(&jobs, codec.as_ref(), &scratch);
    let mut metrics = Vec::with_capacity(results.len());
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(m) => metrics.push(m),
            Err(e) => eprintln!("{} / {}: {e}", job.clip_name, job.curve_name),
        }
    }
    write_json(&a.output, &metrics)?;
    if metrics.len() < jobs.len() {
        bail!("{} of {} jobs failed", jobs.len() - metrics.len(), jobs.len());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => Some(load_config(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let file = file.as_ref();
    let scratch = resolve_scratch(cli.scratch_dir.as_deref(), file);
    match &cli.command {
        Command::Stipple(a) => cmd_stipple(a, file),
        Command::Tour(a) => cmd_tour(a),
        Command::Hamcycle(a) => cmd_hamcycle(a),
        Command::Encode(a) => cmd_encode(a, file),
        Command::Decode(a) => cmd_decode(a, file),
        Command::Roundtrip(a) => cmd_roundtrip(a, file, scratch),
        Command::Sweep(a) => cmd_sweep(a, file, scratch),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
