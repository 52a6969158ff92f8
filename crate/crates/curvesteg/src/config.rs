//! Configuration files and precedence: command-line flags, then the config
//! file, then built-in defaults.

use std::path::{Path, PathBuf};

use curvesteg_core::art::StippleOptions;
use curvesteg_core::EncodingConfig;
use serde::{Deserialize, Serialize};

use crate::codec::CodecSpec;
use crate::error::{io_err, Error, Result};

/// Environment variable for the scratch directory used by codec runs.
pub const SCRATCH_ENV: &str = "CURVESTEG_SCRATCH";

pub const DEFAULT_BITRATE_KBPS: u32 = 64;
pub const DEFAULT_SAMPLE_RATE: u32 = 44100;

/// Encoding settings where every field may be missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingOverrides {
    pub window_length: Option<usize>,
    pub sliding_window: Option<usize>,
    pub lam: Option<f64>,
    pub freqs: Option<Vec<usize>>,
    pub target_samples: Option<usize>,
    pub viterbi: Option<bool>,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
}

impl EncodingOverrides {
    pub fn apply(&self, cfg: &mut EncodingConfig) {
        if let Some(v) = self.window_length {
            cfg.window_length = v;
        }
        if let Some(v) = self.sliding_window {
            cfg.sliding_window = v;
        }
        if let Some(v) = self.lam {
            cfg.lam = v;
        }
        if let Some(v) = &self.freqs {
            cfg.freqs = v.clone();
        }
        if let Some(v) = self.target_samples {
            cfg.target_samples = v;
        }
        if let Some(v) = self.viterbi {
            cfg.viterbi = v;
        }
        if let Some(v) = self.solver_tol {
            cfg.solver_tol = v;
        }
        if let Some(v) = self.solver_max_iter {
            cfg.solver_max_iter = v;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecOverrides {
    pub bitrate_kbps: Option<u32>,
    pub encode_command: Option<String>,
    pub decode_command: Option<String>,
    pub extension: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub scratch_dir: Option<PathBuf>,
    pub encoding: EncodingOverrides,
    pub codec: CodecOverrides,
    pub stipple: Option<StippleOptions>,
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|source| Error::Toml { path: path.to_path_buf(), source })
}

/// Defaults for a `dimension`-d curve, then the file, then the flags.
pub fn resolve_encoding(dimension: usize, file: Option<&ConfigFile>, flags: &EncodingOverrides) -> EncodingConfig {
    let mut cfg = EncodingConfig::for_dimension(dimension);
    if let Some(f) = file {
        f.encoding.apply(&mut cfg);
    }
    flags.apply(&mut cfg);
    cfg
}

/// The codec to use: explicit templates from flags or file win; otherwise
/// MP3 through a discovered ffmpeg, if any.
pub fn resolve_codec(file: Option<&ConfigFile>, flags: &CodecOverrides) -> Result<Option<CodecSpec>> {
    let pick = |f: &dyn Fn(&CodecOverrides) -> Option<String>| f(flags).or_else(|| file.and_then(|c| f(&c.codec)));
    let bitrate = flags.bitrate_kbps.or(file.and_then(|c| c.codec.bitrate_kbps)).unwrap_or(DEFAULT_BITRATE_KBPS);
    let enc = pick(&|c| c.encode_command.clone());
    let dec = pick(&|c| c.decode_command.clone());
    match (enc, dec) {
        (Some(e), Some(d)) => {
            let ext = pick(&|c| c.extension.clone()).unwrap_or_else(|| "bin".into());
            Ok(Some(CodecSpec::new(&e, &d, bitrate, &ext)?))
        }
        (None, None) => Ok(CodecSpec::default_mp3(bitrate)),
        _ => Err(Error::Invalid("codec needs both an encode and a decode command".into())),
    }
}

/// Flag, then config file, then `$CURVESTEG_SCRATCH`, then the system
/// temporary directory.
pub fn resolve_scratch(flag: Option<&Path>, file: Option<&ConfigFile>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.and_then(|f| f.scratch_dir.clone()))
        .or_else(|| std::env::var_os(SCRATCH_ENV).map(PathBuf::from))
        .unwrap_or_else(|| std::env::temp_dir().join("curvesteg"))
}
