//! Subcommand implementations. Each function resolves flag overrides on
//! top of the shared config, runs the corresponding core operation, and
//! emits machine-readable JSON on stdout (or to --out where that is the
//! artifact path).

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::json;

use streammotion_core::attention::{
    offline_window_forward, AttentionParams, AttentionStream, FusionMode,
};
use streammotion_core::harness::{
    avg_delay, generate, latency_probe, run_pipeline, synth_features, total_delay, DelayModel,
    DelayMode, Pipeline, PipelineConfig, SynthKind, SynthSpec,
};
use streammotion_core::io;
use streammotion_core::mask::soft_mask;
use streammotion_core::mat::Mat;
use streammotion_core::metrics::{metric_report, velocity_regularizers, MetricReport, ReportOptions};
use streammotion_core::motion::{Quaternion, ScalarGrid, Trajectory};
use streammotion_core::smoother::smooth_trajectory;
use streammotion_core::spectral::{corr_norm, rmse_norm, spectrogram, Spectrogram};
use streammotion_core::world::{estimate_scale, scale_ratios, DepthPair};

use crate::args;
use crate::config::GlobalConfig;

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string(value)?;
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn motion_format(path: &Path, flag: Option<&str>) -> Result<io::MotionFormat> {
    if let Some(f) = flag {
        return Ok(f.parse::<io::MotionFormat>()?);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(io::MotionFormat::Csv),
        Some("jsonl") | Some("json") => Ok(io::MotionFormat::Jsonl),
        _ => bail!(
            "cannot infer motion format from `{}`; pass --format csv|jsonl",
            path.display()
        ),
    }
}

// ---------------------------------------------------------------------------
// attend
// ---------------------------------------------------------------------------

fn build_projections(dim: usize, proj: &str, seed: u64) -> Result<(Mat, Mat, Mat)> {
    match proj {
        "identity" => Ok((Mat::identity(dim), Mat::identity(dim), Mat::identity(dim))),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).unwrap();
            let mut sample = || -> Result<Mat> {
                let data: Vec<f64> = (0..dim * dim).map(|_| normal.sample(&mut rng)).collect();
                Ok(Mat::from_vec(dim, dim, data)?)
            };
            Ok((sample()?, sample()?, sample()?))
        }
        other => Err(
            streammotion_core::Error::Validation(format!("unknown projection kind `{other}`"))
                .into(),
        ),
    }
}

pub fn attend(config: &GlobalConfig, a: &args::AttendArgs) -> Result<()> {
    let frames = io::load_feature_stream(&a.features)?;
    let dim = frames[0].tokens().cols();
    let window = a.window.unwrap_or(config.attention_window);
    let fusion = match &a.fusion {
        Some(f) => f.parse::<FusionMode>()?,
        None => config.fusion,
    };
    let (w_q, w_k, w_v) = build_projections(dim, &a.proj, a.seed)?;
    let params = AttentionParams::new(w_q, w_k, w_v, window, fusion)?;

    let outputs = match a.mode.as_str() {
        "streaming" => {
            let mut stream = AttentionStream::new(params);
            frames
                .iter()
                .map(|f| stream.step(f))
                .collect::<streammotion_core::Result<Vec<_>>>()?
        }
        "offline" => offline_window_forward(&frames, &params)?,
        other => {
            return Err(streammotion_core::Error::Validation(format!(
                "unknown attend mode `{other}` (streaming|offline)"
            ))
            .into())
        }
    };

    let fused_frames: Vec<streammotion_core::attention::FeatureFrame> = outputs
        .iter()
        .map(|o| streammotion_core::attention::FeatureFrame::new(o.fused.clone()))
        .collect::<streammotion_core::Result<Vec<_>>>()?;
    io::save_feature_stream(&fused_frames, &a.out)?;

    emit_json(
        &json!({
            "frames": frames.len(),
            "tokens": frames[0].tokens().rows(),
            "dim": dim,
            "window": window,
            "mode": a.mode,
            "out": a.out.display().to_string(),
        }),
        None,
    )
}

// ---------------------------------------------------------------------------
// smooth
// ---------------------------------------------------------------------------

pub fn smooth(config: &GlobalConfig, a: &args::SmoothArgs) -> Result<()> {
    let mut smoother = config.smoother;
    if let Some(alpha) = a.alpha {
        smoother.alpha = alpha;
    }
    if let Some(buffer) = a.buffer {
        smoother.buffer_size = buffer;
    }
    if let Some(lambda) = a.lambda_clamp {
        smoother.lambda_clamp = lambda;
    }
    if a.no_clamp {
        smoother.clamp_enabled = false;
    }
    if a.recency_flip {
        smoother.recency_flip = true;
    }
    smoother.validate()?;

    let traj = io::load_trajectory(&a.input)?;
    let smoothed = smooth_trajectory(&traj, &smoother)?;
    io::save_trajectory(&smoothed, &a.out)?;
    emit_json(
        &json!({
            "frames": traj.len(),
            "alpha": smoother.alpha,
            "buffer": smoother.buffer_size,
            "lambda_clamp": smoother.lambda_clamp,
            "clamp": smoother.clamp_enabled,
            "out": a.out.display().to_string(),
        }),
        None,
    )
}

// ---------------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------------

pub fn mask(config: &GlobalConfig, a: &args::MaskArgs) -> Result<()> {
    let mut params = config.mask;
    if let Some(k) = a.kernel_size {
        params.kernel_size = k;
    }
    if let Some(n) = a.dilation_iterations {
        params.dilation_iterations = n;
    }
    if let Some(s) = a.sigma {
        params.sigma = s;
    }
    params.validate()?;

    let grid = io::load_mask_pgm(&a.input)?;
    let out = soft_mask(&grid, &params)?;
    io::save_mask_pgm(&out, &a.out, 65535)?;
    emit_json(
        &json!({
            "width": out.width(),
            "height": out.height(),
            "kernel_size": params.kernel_size,
            "dilation_iterations": params.dilation_iterations,
            "sigma": params.sigma,
            "max": out.max_value(),
            "out": a.out.display().to_string(),
        }),
        None,
    )
}

// ---------------------------------------------------------------------------
// scale
// ---------------------------------------------------------------------------

fn is_pgm(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 2];
    use std::io::Read;
    let mut f = std::fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let n = f.read(&mut magic)?;
    Ok(n == 2 && (&magic == b"P2" || &magic == b"P5"))
}

fn load_depth_grid(path: &Path) -> Result<ScalarGrid> {
    if is_pgm(path)? {
        Ok(io::load_depth_pgm(path)?)
    } else {
        Ok(io::load_grid_f32(path)?)
    }
}

fn load_binary_grid(path: &Path) -> Result<ScalarGrid> {
    let grid = if is_pgm(path)? {
        io::load_mask_pgm(path)?
    } else {
        io::load_grid_f32(path)?
    };
    grid.ensure_binary(&path.display().to_string())?;
    Ok(grid)
}

pub fn scale(config: &GlobalConfig, a: &args::ScaleArgs) -> Result<()> {
    if a.slam.len() != a.metric.len() {
        return Err(streammotion_core::Error::Validation(format!(
            "{} SLAM depth files vs {} metric depth files",
            a.slam.len(),
            a.metric.len()
        ))
        .into());
    }
    for (name, list) in [("--human-mask", &a.human_mask), ("--validity", &a.validity)] {
        if !list.is_empty() && list.len() != a.slam.len() {
            return Err(streammotion_core::Error::Validation(format!(
                "{name} must list one file per frame"
            ))
            .into());
        }
    }
    let first_k = a.first_k.unwrap_or(config.scale_first_k);
    let n = a.slam.len().min(first_k);

    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let slam = load_depth_grid(&a.slam[i])?;
        let metric = load_depth_grid(&a.metric[i])?;
        let human = if a.human_mask.is_empty() {
            ScalarGrid::filled(slam.width(), slam.height(), 0.0)?
        } else {
            load_binary_grid(&a.human_mask[i])?
        };
        let pair = if a.validity.is_empty() {
            DepthPair::fully_valid(slam, metric, human)?
        } else {
            DepthPair::new(slam, metric, human, load_binary_grid(&a.validity[i])?)?
        };
        pairs.push(pair);
    }

    let ratios = scale_ratios(&pairs)?;
    let s = estimate_scale(&pairs)?;

    if let Some(hist_path) = &a.hist_out {
        write_ratio_histogram(&ratios, hist_path)?;
    }
    emit_json(
        &json!({
            "scale": s,
            "frames_used": n,
            "pixels_used": ratios.len(),
        }),
        a.out.as_deref(),
    )
}

fn write_ratio_histogram(ratios: &[f64], path: &Path) -> Result<()> {
    const BINS: usize = 32;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((max - min) / BINS as f64).max(f64::MIN_POSITIVE);
    let mut counts = [0u64; BINS];
    for r in ratios {
        let idx = (((r - min) / width) as usize).min(BINS - 1);
        counts[idx] += 1;
    }
    let mut text = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in counts.iter().enumerate() {
        text.push_str(&format!(
            "{},{},{}\n",
            min + i as f64 * width,
            min + (i + 1) as f64 * width,
            c
        ));
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

// ---------------------------------------------------------------------------
// spectrogram
// ---------------------------------------------------------------------------

fn write_spectrogram_csv(s: &Spectrogram, path: &Path) -> Result<()> {
    let mut text = String::new();
    for b in 0..s.bins() {
        for f in 0..s.frames() {
            if f > 0 {
                text.push(',');
            }
            text.push_str(&format!("{}", s.at(b, f)));
        }
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn spectrogram_cmd(config: &GlobalConfig, a: &args::SpectrogramArgs) -> Result<()> {
    let mut params = config.stft;
    if let Some(n) = a.n_fft {
        params.n_fft = n;
    }
    if let Some(h) = a.hop {
        params.hop = h;
    }
    if let Some(mode) = &a.channel_mode {
        params.channel_mode = mode.parse()?;
    }
    if a.symmetric_hann {
        params.symmetric_hann = true;
    }
    params.validate()?;

    let format = motion_format(&a.input, a.format.as_deref())?;
    let seq = io::load_motion(&a.input, format)?;
    let spec = spectrogram(&seq, &params)?;
    write_spectrogram_csv(&spec, &a.out)?;

    let mut summary = json!({
        "bins": spec.bins(),
        "frames": spec.frames(),
        "n_fft": params.n_fft,
        "hop": params.hop,
        "out": a.out.display().to_string(),
    });
    if let Some(gt_path) = &a.gt {
        let gt_format = motion_format(gt_path, a.format.as_deref())?;
        let gt_seq = io::load_motion(gt_path, gt_format)?;
        let gt_spec = spectrogram(&gt_seq, &params)?;
        let metrics = json!({
            "rmse_norm": rmse_norm(&gt_spec, &spec)?,
            "corr_norm": corr_norm(&gt_spec, &spec)?,
        });
        if let Some(metrics_path) = &a.metrics_out {
            emit_json(&metrics, Some(metrics_path))?;
        }
        summary["metrics"] = metrics;
    }
    emit_json(&summary, None)
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

fn report_csv(report: &MetricReport, fps: Option<f64>) -> String {
    let t = if fps.is_some() { "s" } else { "frame" };
    let header = format!(
        "mpjpe(mm),pa_mpjpe(mm),pve(mm),accel_error(mm/{t}^2),jitter(mm/{t}^3),wa_mpjpe_100(mm),w_mpjpe_100(mm),rte(%),erve(mm/{t})"
    );
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        report.mpjpe,
        report.pa_mpjpe,
        report.pve,
        report.accel_error,
        report.jitter,
        report.wa_mpjpe_100,
        report.w_mpjpe_100,
        report.rte_percent,
        report.erve
    );
    format!("{header}\n{row}\n")
}

fn trajectory_rotations(traj: &Trajectory, frames: usize) -> Result<Vec<Quaternion>> {
    if traj.len() != frames {
        return Err(streammotion_core::Error::Dimension(format!(
            "trajectory has {} samples, motion has {frames} frames",
            traj.len()
        ))
        .into());
    }
    Ok(traj.samples().iter().map(|s| s.rotation).collect())
}

pub fn metrics(config: &GlobalConfig, a: &args::MetricsArgs) -> Result<()> {
    let pred_format = motion_format(&a.pred, a.format.as_deref())?;
    let gt_format = motion_format(&a.gt, a.format.as_deref())?;
    let pred = io::load_motion(&a.pred, pred_format)?;
    let gt = io::load_motion(&a.gt, gt_format)?;

    let mut opts = ReportOptions {
        segment_len: a.segment_len.unwrap_or(config.segment_len),
        fps: a.fps.or(config.metrics_fps),
        root_joint: a.root_joint.unwrap_or(config.root_joint),
        ..Default::default()
    };
    if let Some(path) = &a.pred_traj {
        opts.pred_rotations = Some(trajectory_rotations(&io::load_trajectory(path)?, pred.frames())?);
    }
    if let Some(path) = &a.gt_traj {
        opts.gt_rotations = Some(trajectory_rotations(&io::load_trajectory(path)?, gt.frames())?);
    }

    let report = metric_report(&pred, &gt, &opts)?;
    if let Some(csv_path) = &a.csv_out {
        std::fs::write(csv_path, report_csv(&report, opts.fps))
            .with_context(|| format!("cannot write {}", csv_path.display()))?;
    }

    let mut value = serde_json::to_value(&report)?;
    if a.regularizers {
        let mut reg = config.regularizers;
        reg.relative_to_pelvis = a.relative_to_pelvis;
        let (l_v, l_a) = velocity_regularizers(&pred, &reg)?;
        value["l_v"] = json!(l_v);
        value["l_a"] = json!(l_a);
    }
    emit_json(&value, a.out.as_deref())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn synth(a: &args::SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        kind: a.kind.parse::<SynthKind>()?,
        frames: a.frames,
        noise_sigma_t: a.noise_sigma_t,
        noise_sigma_r: a.noise_sigma_r,
        seed: a.seed,
    };
    let (clean, noisy) = generate(&spec)?;
    io::save_trajectory(&clean, &a.out_clean)?;
    io::save_trajectory(&noisy, &a.out_noisy)?;
    emit_json(
        &json!({
            "kind": a.kind,
            "frames": a.frames,
            "seed": a.seed,
            "out_clean": a.out_clean.display().to_string(),
            "out_noisy": a.out_noisy.display().to_string(),
        }),
        None,
    )
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunPose {
    frame: usize,
    t: [f64; 3],
    q: [f64; 4],
}

#[derive(Serialize)]
struct RunRecord {
    frame: usize,
    fused: Vec<Vec<f64>>,
    pose: RunPose,
    world: Vec<[f64; 3]>,
}

pub fn run(config: &GlobalConfig, a: &args::RunArgs) -> Result<()> {
    let (features, poses) = if a.synth {
        let features = synth_features(a.frames, a.tokens, a.dim, a.seed)?;
        let spec = SynthSpec {
            kind: a.synth_kind.parse::<SynthKind>()?,
            frames: a.frames,
            noise_sigma_t: a.noise_sigma_t,
            noise_sigma_r: a.noise_sigma_r,
            seed: a.seed.wrapping_add(1),
        };
        let (_, noisy) = generate(&spec)?;
        (features, noisy.samples().to_vec())
    } else {
        let features_path = a
            .features
            .as_ref()
            .ok_or_else(|| anyhow!("--features is required without --synth"))?;
        let poses_path = a
            .poses
            .as_ref()
            .ok_or_else(|| anyhow!("--poses is required without --synth"))?;
        let features = io::load_feature_stream(features_path)?;
        let traj = io::load_trajectory(poses_path)?;
        (features, traj.samples().to_vec())
    };

    let dim = features[0].tokens().cols();
    let window = a.window.unwrap_or(config.attention_window);
    let fusion = match &a.fusion {
        Some(f) => f.parse::<FusionMode>()?,
        None => config.fusion,
    };
    let (w_q, w_k, w_v) = build_projections(dim, &a.proj, a.seed)?;

    let mut smoother = config.smoother;
    if let Some(alpha) = a.alpha {
        smoother.alpha = alpha;
    }
    if let Some(buffer) = a.buffer {
        smoother.buffer_size = buffer;
    }
    if a.no_clamp {
        smoother.clamp_enabled = false;
    }

    let pipeline_config = PipelineConfig {
        attention: AttentionParams::new(w_q, w_k, w_v, window, fusion)?,
        smoother,
        world_scale: a.world_scale,
    };
    let warmup = Pipeline::new(pipeline_config.clone())?.warmup_frames();
    let run = run_pipeline(&features, &poses, pipeline_config)?;

    let mut text = String::new();
    for frame in &run {
        let fused: Vec<Vec<f64>> = (0..frame.attention.fused.rows())
            .map(|r| frame.attention.fused.row(r).to_vec())
            .collect();
        let record = RunRecord {
            frame: frame.frame,
            fused,
            pose: RunPose {
                frame: frame.pose.frame_index,
                t: frame.pose.translation.to_array(),
                q: [
                    frame.pose.rotation.x,
                    frame.pose.rotation.y,
                    frame.pose.rotation.z,
                    frame.pose.rotation.w,
                ],
            },
            world: frame.world.points().iter().map(|p| p.to_array()).collect(),
        };
        text.push_str(&serde_json::to_string(&record)?);
        text.push('\n');
    }
    std::fs::write(&a.out, text).with_context(|| format!("cannot write {}", a.out.display()))?;

    if let Some(probe_path) = &a.probe_out {
        let probe = latency_probe(&run, warmup);
        let value = serde_json::to_value(&probe)?;
        emit_json(&value, Some(probe_path))?;
    }
    emit_json(
        &json!({
            "frames": run.len(),
            "window": window,
            "warmup_frames": warmup,
            "out": a.out.display().to_string(),
        }),
        None,
    )
}

// ---------------------------------------------------------------------------
// delay
// ---------------------------------------------------------------------------

pub fn delay(a: &args::DelayArgs) -> Result<()> {
    let model = DelayModel {
        mode: a.mode.parse::<DelayMode>()?,
        fps: a.fps,
        frames: a.frames,
    };
    model.validate()?;
    emit_json(
        &json!({
            "avg_delay_s": avg_delay(&model),
            "total_delay_s": total_delay(&model),
            "mode": a.mode,
            "fps": a.fps,
            "frames": a.frames,
        }),
        a.out.as_deref(),
    )
}

