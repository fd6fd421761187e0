//! Shared key-value configuration.
//!
//! Format: one `key = value` per line, `#` comments and blank lines
//! ignored. Unknown keys are errors. Precedence is flags > config file >
//! built-in defaults; this module resolves the bottom two layers and the
//! subcommands apply flag overrides on top.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use streammotion_core::attention::FusionMode;
use streammotion_core::mask::MaskParams;
use streammotion_core::metrics::{LossWeights, RegularizerParams};
use streammotion_core::smoother::SmootherConfig;
use streammotion_core::spectral::{ChannelMode, StftParams};

pub const CONFIG_ENV_VAR: &str = "STREAMMOTION_CONFIG";

#[derive(Debug, Clone)]
pub struct GlobalConfig {
    pub smoother: SmootherConfig,
    pub attention_window: usize,
    pub fusion: FusionMode,
    pub stft: StftParams,
    pub mask: MaskParams,
    pub metrics_fps: Option<f64>,
    pub segment_len: usize,
    pub root_joint: usize,
    pub loss_weights: LossWeights,
    pub regularizers: RegularizerParams,
    pub scale_first_k: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            smoother: SmootherConfig::default(),
            attention_window: 3,
            fusion: FusionMode::Add,
            stft: StftParams::default(),
            mask: MaskParams::default(),
            metrics_fps: None,
            segment_len: 100,
            root_joint: 0,
            loss_weights: LossWeights::default(),
            regularizers: RegularizerParams::default(),
            scale_first_k: 10,
            input: None,
            output: None,
        }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<()> {
        self.smoother
            .validate()
            .map_err(|e| anyhow!("config: {e}"))?;
        self.stft.validate().map_err(|e| anyhow!("config: {e}"))?;
        self.mask.validate().map_err(|e| anyhow!("config: {e}"))?;
        if self.attention_window == 0 {
            bail!("config: attention.window must be >= 1");
        }
        if self.segment_len < 2 {
            bail!("config: metrics.segment_len must be >= 2");
        }
        if let Some(fps) = self.metrics_fps {
            if !(fps > 0.0) {
                bail!("config: metrics.fps must be > 0");
            }
        }
        if self.scale_first_k == 0 {
            bail!("config: scale.first_k must be >= 1");
        }
        Ok(())
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => bail!("bad boolean `{other}` for key `{key}`"),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| anyhow!("bad value `{value}` for key `{key}`"))
}

/// Parses a config file over the built-in defaults. Unknown keys are
/// rejected rather than silently tolerated.
pub fn load_config(path: &Path) -> Result<GlobalConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut config = GlobalConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut config, key, value)
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
    }
    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut GlobalConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "smoother.alpha" => config.smoother.alpha = parse_num(key, value)?,
        "smoother.buffer" => config.smoother.buffer_size = parse_num(key, value)?,
        "smoother.lambda_clamp" => config.smoother.lambda_clamp = parse_num(key, value)?,
        "smoother.clamp" => config.smoother.clamp_enabled = parse_bool(key, value)?,
        "smoother.recency_flip" => config.smoother.recency_flip = parse_bool(key, value)?,
        "attention.window" => config.attention_window = parse_num(key, value)?,
        "attention.fusion" => {
            config.fusion = value
                .parse::<FusionMode>()
                .map_err(|e| anyhow!("{e}"))?
        }
        "stft.n_fft" => config.stft.n_fft = parse_num(key, value)?,
        "stft.hop" => config.stft.hop = parse_num(key, value)?,
        "stft.channel_mode" => {
            config.stft.channel_mode = value
                .parse::<ChannelMode>()
                .map_err(|e| anyhow!("{e}"))?
        }
        "stft.symmetric_hann" => config.stft.symmetric_hann = parse_bool(key, value)?,
        "mask.kernel_size" => config.mask.kernel_size = parse_num(key, value)?,
        "mask.dilation_iterations" => config.mask.dilation_iterations = parse_num(key, value)?,
        "mask.sigma" => config.mask.sigma = parse_num(key, value)?,
        "metrics.fps" => config.metrics_fps = Some(parse_num(key, value)?),
        "metrics.segment_len" => config.segment_len = parse_num(key, value)?,
        "metrics.root_joint" => config.root_joint = parse_num(key, value)?,
        "losses.lambda_2d" => config.loss_weights.lambda_2d = parse_num(key, value)?,
        "losses.lambda_3d" => config.loss_weights.lambda_3d = parse_num(key, value)?,
        "losses.lambda_smpl" => config.loss_weights.lambda_smpl = parse_num(key, value)?,
        "losses.lambda_vertices" => config.loss_weights.lambda_vertices = parse_num(key, value)?,
        "losses.lambda_velocity" => {
            config.regularizers.lambda_velocity = parse_num(key, value)?
        }
        "losses.lambda_accel" => config.regularizers.lambda_accel = parse_num(key, value)?,
        "scale.first_k" => config.scale_first_k = parse_num(key, value)?,
        "paths.input" => config.input = Some(PathBuf::from(value)),
        "paths.output" => config.output = Some(PathBuf::from(value)),
        other => bail!("unknown config key `{other}`"),
    }
    Ok(())
}

/// Resolves the effective config: explicit --config flag, then the
/// environment variable, then pure defaults.
pub fn resolve_config(flag: Option<&Path>) -> Result<GlobalConfig> {
    if let Some(path) = flag {
        return load_config(path);
    }
    if let Ok(env_path) = std::env::var(CONFIG_ENV_VAR) {
        if !env_path.is_empty() {
            return load_config(Path::new(&env_path));
        }
    }
    Ok(GlobalConfig::default())
}
