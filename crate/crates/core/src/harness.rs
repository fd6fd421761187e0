//! Synthetic stream generation, the end-to-end online pipeline (attention
//! step -> pose smoothing -> world placement), and delay/efficiency
//! accounting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::Serialize;

use crate::attention::{AttentionOutput, AttentionParams, AttentionStream, FeatureFrame};
use crate::error::{Error, Result};
use crate::motion::{PoseSample, Quaternion, Trajectory, Vec3};
use crate::smoother::{SmootherConfig, SmootherState};
use crate::world::{to_world, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Unit circle in the xy-plane, one revolution, yaw tracking the angle.
    Circle,
    /// Unit-length straight walk along +x, identity rotation.
    LineWalk,
    /// Gaussian-step random walk with small random yaw increments.
    RandomWalk,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Self::Circle),
            "line-walk" | "line_walk" => Ok(Self::LineWalk),
            "random-walk" | "random_walk" => Ok(Self::RandomWalk),
            other => Err(Error::Validation(format!("unknown synth kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub frames: usize,
    /// Translation jitter std, same units as the trajectory.
    pub noise_sigma_t: f64,
    /// Rotation jitter std in radians.
    pub noise_sigma_r: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Validation("need F >= 1".into()));
        }
        if self.noise_sigma_t < 0.0 || self.noise_sigma_r < 0.0 {
            return Err(Error::Validation("noise sigmas must be >= 0".into()));
        }
        Ok(())
    }
}

fn circle_pose(frame: usize, frames: usize) -> PoseSample {
    let theta = 2.0 * std::f64::consts::PI * frame as f64 / frames as f64;
    let t = Vec3::new(theta.cos(), theta.sin(), 0.0);
    let q = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), theta).unwrap();
    PoseSample::new(frame, t, q).unwrap()
}

fn line_pose(frame: usize, frames: usize) -> PoseSample {
    let step = if frames > 1 { 1.0 / (frames - 1) as f64 } else { 0.0 };
    PoseSample::new(frame, Vec3::new(frame as f64 * step, 0.0, 0.0), Quaternion::IDENTITY).unwrap()
}

/// Deterministic synthetic trajectory pair: (clean, noisy). The noisy copy
/// adds zero-mean Gaussian translation jitter and a small-angle rotation
/// perturbation about a uniformly random axis; zero sigmas reproduce the
/// clean stream bit-exactly.
pub fn generate(spec: &SynthSpec) -> Result<(Trajectory, Trajectory)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise_t = Normal::new(0.0, spec.noise_sigma_t.max(0.0))
        .map_err(|e| Error::Validation(format!("bad translation sigma: {e}")))?;
    let noise_r = Normal::new(0.0, spec.noise_sigma_r.max(0.0))
        .map_err(|e| Error::Validation(format!("bad rotation sigma: {e}")))?;

    let mut clean = Vec::with_capacity(spec.frames);
    match spec.kind {
        SynthKind::Circle => clean.extend((0..spec.frames).map(|i| circle_pose(i, spec.frames))),
        SynthKind::LineWalk => clean.extend((0..spec.frames).map(|i| line_pose(i, spec.frames))),
        SynthKind::RandomWalk => {
            let step = Normal::new(0.0, 0.05).unwrap();
            let yaw_step = Normal::new(0.0, 0.02).unwrap();
            let mut t = Vec3::ZERO;
            let mut q = Quaternion::IDENTITY;
            for i in 0..spec.frames {
                if i > 0 {
                    t = t + Vec3::new(step.sample(&mut rng), step.sample(&mut rng), step.sample(&mut rng));
                    let dq = Quaternion::from_axis_angle(
                        Vec3::new(0.0, 0.0, 1.0),
                        yaw_step.sample(&mut rng),
                    )
                    .unwrap();
                    let raw = q.mul(&dq);
                    q = Quaternion::normalized(raw.x, raw.y, raw.z, raw.w).unwrap();
                }
                clean.push(PoseSample::new(i, t, q).unwrap());
            }
        }
    }

    let mut noisy = Vec::with_capacity(spec.frames);
    for sample in &clean {
        let translation = if spec.noise_sigma_t > 0.0 {
            sample.translation
                + Vec3::new(
                    noise_t.sample(&mut rng),
                    noise_t.sample(&mut rng),
                    noise_t.sample(&mut rng),
                )
        } else {
            sample.translation
        };
        let rotation = if spec.noise_sigma_r > 0.0 {
            let axis: [f64; 3] = UnitSphere.sample(&mut rng);
            let angle = noise_r.sample(&mut rng);
            let dq = Quaternion::from_axis_angle(Vec3::from_array(axis), angle).unwrap();
            let q = sample.rotation.mul(&dq);
            Quaternion::normalized(q.x, q.y, q.z, q.w).unwrap()
        } else {
            sample.rotation
        };
        noisy.push(PoseSample::new(sample.frame_index, translation, rotation)?);
    }

    Ok((Trajectory::new(clean, 1.0)?, Trajectory::new(noisy, 1.0)?))
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub attention: AttentionParams,
    pub smoother: SmootherConfig,
    /// Metric scale applied at world placement.
    pub world_scale: f64,
}

/// One emitted pipeline frame.
#[derive(Debug, Clone)]
pub struct PipelineFrame {
    pub frame: usize,
    pub attention: AttentionOutput,
    pub pose: PoseSample,
    pub world: PointSet,
    /// Instrumented operation count for this step.
    pub ops: u64,
    /// Wall time of this step in seconds (measurement only; not part of
    /// the deterministic output surface).
    pub wall_s: f64,
}

/// Single-stream pipeline state. `step` can only see inputs it is handed,
/// so causality is structural; inputs must arrive with contiguous frame
/// indices starting at 0.
pub struct Pipeline {
    attention: AttentionStream,
    smoother: SmootherState,
    config: PipelineConfig,
    next_frame: usize,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.smoother.validate()?;
        if config.attention.dim() < 3 {
            return Err(Error::Validation(
                "pipeline needs feature dim d >= 3 to decode world points".into(),
            ));
        }
        if !(config.world_scale > 0.0 && config.world_scale.is_finite()) {
            return Err(Error::Validation("world scale must be > 0".into()));
        }
        Ok(Self {
            attention: AttentionStream::new(config.attention.clone()),
            smoother: SmootherState::new(),
            config,
            next_frame: 0,
        })
    }

    /// Post-warm-up steps do identical work; warm-up covers cache and
    /// history fill.
    pub fn warmup_frames(&self) -> usize {
        (self.config.attention.window() - 1).max(self.config.smoother.buffer_size)
    }

    pub fn step(&mut self, features: &FeatureFrame, pose: &PoseSample) -> Result<PipelineFrame> {
        if pose.frame_index != self.next_frame {
            return Err(Error::Desync(format!(
                "expected pose frame {}, got {}",
                self.next_frame, pose.frame_index
            )));
        }
        let start = std::time::Instant::now();
        let attention = self.attention.step(features)?;
        let smoothed = self.smoother.smooth_step(pose, &self.config.smoother)?;

        // decode a point per token from the first three feature channels
        let points: Vec<Vec3> = (0..attention.fused.rows())
            .map(|r| {
                Vec3::new(
                    attention.fused.get(r, 0),
                    attention.fused.get(r, 1),
                    attention.fused.get(r, 2),
                )
            })
            .collect();
        let camera_points = PointSet::new(points)?;
        let world = to_world(&camera_points, &smoothed, self.config.world_scale)?;
        let world_ops = 18 * world.len() as u64 + 3;

        let ops = self.attention.last_step_ops() + self.smoother.last_step_ops() + world_ops;
        self.next_frame += 1;
        Ok(PipelineFrame {
            frame: pose.frame_index,
            attention,
            pose: smoothed,
            world,
            ops,
            wall_s: start.elapsed().as_secs_f64(),
        })
    }

    pub fn cache_len(&self) -> usize {
        self.attention.cache_len()
    }
}

/// Drives aligned feature/pose streams through the pipeline. Streams must
/// have equal length and contiguous pose frame indices starting at 0.
pub fn run_pipeline(
    features: &[FeatureFrame],
    poses: &[PoseSample],
    config: PipelineConfig,
) -> Result<Vec<PipelineFrame>> {
    if features.len() != poses.len() {
        return Err(Error::Desync(format!(
            "{} feature frames vs {} poses",
            features.len(),
            poses.len()
        )));
    }
    let mut pipeline = Pipeline::new(config)?;
    features
        .iter()
        .zip(poses)
        .map(|(f, p)| pipeline.step(f, p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMode {
    Online,
    OfflineBatch,
}

impl std::str::FromStr for DelayMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(Self::Online),
            "offline" | "offline_batch" => Ok(Self::OfflineBatch),
            other => Err(Error::Validation(format!("unknown delay mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DelayModel {
    pub mode: DelayMode,
    pub fps: f64,
    pub frames: usize,
}

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Validation(format!("fps {} must be > 0", self.fps)));
        }
        if self.frames == 0 {
            return Err(Error::Validation("need F >= 1".into()));
        }
        Ok(())
    }
}

/// Mean per-frame waiting time in seconds. Offline batch processing waits
/// for the whole clip: (F - 1) / (2 fps); online streaming waits one frame
/// period regardless of F.
pub fn avg_delay(model: &DelayModel) -> f64 {
    match model.mode {
        DelayMode::OfflineBatch => (model.frames as f64 - 1.0) / (2.0 * model.fps),
        DelayMode::Online => 1.0 / model.fps,
    }
}

/// Total waiting time across all frames.
pub fn total_delay(model: &DelayModel) -> f64 {
    match model.mode {
        DelayMode::OfflineBatch => {
            model.frames as f64 * (model.frames as f64 - 1.0) / (2.0 * model.fps)
        }
        DelayMode::Online => model.frames as f64 / model.fps,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub frames: usize,
    pub warmup_frames: usize,
    pub per_frame_ops: Vec<u64>,
    pub max_ops: u64,
    pub mean_ops: f64,
    /// True when every post-warm-up frame did exactly the same work.
    pub constant_post_warmup: bool,
    pub mean_wall_s: f64,
    pub max_wall_s: f64,
}

/// Summarizes an instrumented run: op-count statistics plus wall timings.
pub fn latency_probe(run: &[PipelineFrame], warmup_frames: usize) -> ProbeReport {
    let per_frame_ops: Vec<u64> = run.iter().map(|f| f.ops).collect();
    let max_ops = per_frame_ops.iter().copied().max().unwrap_or(0);
    let mean_ops = if run.is_empty() {
        0.0
    } else {
        per_frame_ops.iter().sum::<u64>() as f64 / run.len() as f64
    };
    let steady = &per_frame_ops[warmup_frames.min(per_frame_ops.len())..];
    let constant_post_warmup = steady.windows(2).all(|w| w[0] == w[1]);
    let mean_wall_s = if run.is_empty() {
        0.0
    } else {
        run.iter().map(|f| f.wall_s).sum::<f64>() / run.len() as f64
    };
    let max_wall_s = run.iter().map(|f| f.wall_s).fold(0.0, f64::max);
    ProbeReport {
        frames: run.len(),
        warmup_frames,
        per_frame_ops,
        max_ops,
        mean_ops,
        constant_post_warmup,
        mean_wall_s,
        max_wall_s,
    }
}

/// Deterministic random feature stream for synthetic runs.
pub fn synth_features(
    frames: usize,
    tokens: usize,
    dim: usize,
    seed: u64,
) -> Result<Vec<FeatureFrame>> {
    if frames == 0 || tokens == 0 || dim == 0 {
        return Err(Error::Validation("frames, P and d must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..frames)
        .map(|_| {
            let data: Vec<f64> = (0..tokens * dim).map(|_| normal.sample(&mut rng)).collect();
            FeatureFrame::new(crate::mat::Mat::from_vec(tokens, dim, data)?)
        })
        .collect()
}
