//! Command line surface. Flags that mirror config keys are optional here;
//! precedence is flags > config file > built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "streammotion",
    about = "Streaming motion-processing toolkit: causal attention, EMA pose smoothing, world placement, soft masks, spectrograms, metrics, and delay accounting",
    version
)]
pub struct Cli {
    /// Key-value config file (fallback: $STREAMMOTION_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run windowed attention over a binary feature stream.
    Attend(AttendArgs),
    /// EMA-correct a camera trajectory.
    Smooth(SmoothArgs),
    /// Turn a binary human mask into a soft confidence mask.
    Mask(MaskArgs),
    /// Estimate the metric scale factor from depth-map pairs.
    Scale(ScaleArgs),
    /// STFT magnitude spectrogram of a motion sequence.
    Spectrogram(SpectrogramArgs),
    /// Evaluation metrics between predicted and ground-truth motion.
    Metrics(MetricsArgs),
    /// Generate a synthetic clean/noisy trajectory pair.
    Synth(SynthArgs),
    /// Drive the full online pipeline over aligned streams.
    Run(RunArgs),
    /// Online vs offline delay accounting.
    Delay(DelayArgs),
}

#[derive(Args)]
pub struct AttendArgs {
    /// Input feature stream (u32-LE P, u32-LE d, then f32-LE frames).
    #[arg(long)]
    pub features: PathBuf,
    /// streaming | offline
    #[arg(long, default_value = "streaming")]
    pub mode: String,
    /// Output stream path (same binary format).
    #[arg(long)]
    pub out: PathBuf,
    /// Temporal window size N.
    #[arg(long)]
    pub window: Option<usize>,
    /// add | average
    #[arg(long)]
    pub fusion: Option<String>,
    /// identity | random
    #[arg(long, default_value = "identity")]
    pub proj: String,
    /// Seed for random projections.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SmoothArgs {
    /// Input trajectory JSONL.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Output trajectory JSONL.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub buffer: Option<usize>,
    #[arg(long)]
    pub lambda_clamp: Option<f64>,
    /// Disable velocity-dependent clamping.
    #[arg(long)]
    pub no_clamp: bool,
    /// Put the largest EMA weight on the newest sample instead of the oldest.
    #[arg(long)]
    pub recency_flip: bool,
}

#[derive(Args)]
pub struct MaskArgs {
    /// Input binary mask PGM (P2 or P5).
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Output soft mask PGM (16-bit P5).
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[arg(long)]
    pub kernel_size: Option<usize>,
    #[arg(long)]
    pub dilation_iterations: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Args)]
pub struct ScaleArgs {
    /// SLAM depth maps, one per frame (PGM with optional .scale sidecar, or
    /// raw f32 grids).
    #[arg(long, value_delimiter = ',', required = true)]
    pub slam: Vec<PathBuf>,
    /// Metric depth maps, parallel to --slam.
    #[arg(long, value_delimiter = ',', required = true)]
    pub metric: Vec<PathBuf>,
    /// Binary human masks, parallel to --slam (default: no exclusion).
    #[arg(long, value_delimiter = ',')]
    pub human_mask: Vec<PathBuf>,
    /// Binary validity masks, parallel to --slam (default: all valid).
    #[arg(long, value_delimiter = ',')]
    pub validity: Vec<PathBuf>,
    /// Use only the first K frames.
    #[arg(long)]
    pub first_k: Option<usize>,
    /// Write the pooled ratio histogram as CSV.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SpectrogramArgs {
    /// Input motion file (csv or jsonl).
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// csv | jsonl (default: inferred from the extension).
    #[arg(long)]
    pub format: Option<String>,
    /// Output magnitude CSV (rows = bins, cols = frames).
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Ground-truth motion file; adds RMSE_norm/Corr_norm to the output.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Write the comparison metrics JSON here as well.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub n_fft: Option<usize>,
    #[arg(long)]
    pub hop: Option<usize>,
    /// per_channel_mean | flattened
    #[arg(long)]
    pub channel_mode: Option<String>,
    #[arg(long)]
    pub symmetric_hann: bool,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// csv | jsonl (default: inferred from the extensions).
    #[arg(long)]
    pub format: Option<String>,
    /// Trajectory JSONL providing predicted root orientations for ERVE.
    #[arg(long)]
    pub pred_traj: Option<PathBuf>,
    /// Trajectory JSONL providing ground-truth root orientations for ERVE.
    #[arg(long)]
    pub gt_traj: Option<PathBuf>,
    /// Convert Accel/Jitter/ERVE to per-second units.
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub segment_len: Option<usize>,
    #[arg(long)]
    pub root_joint: Option<usize>,
    /// Also compute the velocity/acceleration regularizers on --pred.
    #[arg(long)]
    pub regularizers: bool,
    /// Measure regularizers relative to the pelvis joint.
    #[arg(long)]
    pub relative_to_pelvis: bool,
    /// Flat CSV row for tabulation.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// circle | line-walk | random-walk
    #[arg(long, default_value = "circle")]
    pub kind: String,
    #[arg(long)]
    pub frames: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma_t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma_r: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_clean: PathBuf,
    #[arg(long)]
    pub out_noisy: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    /// Input feature stream; omit with --synth.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Input trajectory JSONL; omit with --synth.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Generate synthetic features and poses instead of reading files.
    #[arg(long)]
    pub synth: bool,
    /// Synthetic stream length (with --synth).
    #[arg(long, default_value_t = 120)]
    pub frames: usize,
    /// Synthetic tokens per frame P (with --synth).
    #[arg(long, default_value_t = 4)]
    pub tokens: usize,
    /// Synthetic feature dimension d >= 3 (with --synth).
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// circle | line-walk | random-walk (with --synth).
    #[arg(long, default_value = "circle")]
    pub synth_kind: String,
    #[arg(long, default_value_t = 0.02)]
    pub noise_sigma_t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub noise_sigma_r: f64,
    /// Seed for synthetic features/poses and random projections.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSONL (one record per frame).
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Write the latency/op-count probe report JSON.
    #[arg(long)]
    pub probe_out: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    /// add | average
    #[arg(long)]
    pub fusion: Option<String>,
    /// identity | random
    #[arg(long, default_value = "identity")]
    pub proj: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub buffer: Option<usize>,
    #[arg(long)]
    pub no_clamp: bool,
    #[arg(long, default_value_t = 1.0)]
    pub world_scale: f64,
}

#[derive(Args)]
pub struct DelayArgs {
    /// online | offline
    #[arg(long)]
    pub mode: String,
    #[arg(long)]
    pub fps: f64,
    #[arg(long)]
    pub frames: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
