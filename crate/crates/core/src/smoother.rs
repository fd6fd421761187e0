//! Online EMA correction of camera translation and rotation with
//! velocity-dependent clamping.
//!
//! Weights follow `w_m = (1 - alpha)^(B-1-m)` over a history buffer of the
//! most recent raw translations, so the OLDEST buffer entry carries the
//! largest weight. That inverts the usual EMA recency convention but is
//! kept as-is; `recency_flip` reverses the exponent for the conventional
//! behavior.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::motion::{PoseSample, Quaternion, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct SmootherConfig {
    /// EMA factor in (0, 1]. alpha = 1 is exact passthrough (with clamping
    /// disabled).
    pub alpha: f64,
    /// History buffer size B >= 1.
    pub buffer_size: usize,
    /// Clamp threshold multiplier: tau = lambda_clamp * mean velocity.
    pub lambda_clamp: f64,
    pub clamp_enabled: bool,
    /// Reverse the weight exponent so the newest entry weighs most.
    pub recency_flip: bool,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            buffer_size: 8,
            lambda_clamp: 3.0,
            clamp_enabled: true,
            recency_flip: false,
        }
    }
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Validation(format!(
                "alpha {} must be in (0, 1]",
                self.alpha
            )));
        }
        if self.buffer_size == 0 {
            return Err(Error::Validation("buffer size B must be >= 1".into()));
        }
        if !(self.lambda_clamp > 0.0 && self.lambda_clamp.is_finite()) {
            return Err(Error::Validation(format!(
                "lambda_clamp {} must be > 0",
                self.lambda_clamp
            )));
        }
        Ok(())
    }
}

/// Normalized EMA weights, index m = 0 for the most recent entry.
///
/// `w_m` is proportional to `(1 - alpha)^(B-1-m)` with `0^0 = 1`, so for
/// alpha = 1 the whole mass sits on the oldest slot.
pub fn ema_weights(alpha: f64, buffer: usize) -> Vec<f64> {
    let base = 1.0 - alpha;
    let raw: Vec<f64> = (0..buffer)
        .map(|m| base.powi((buffer - 1 - m) as i32))
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| w / sum).collect()
}

fn weights_for(config: &SmootherConfig, len: usize) -> Vec<f64> {
    let w = ema_weights(config.alpha, len);
    if config.recency_flip {
        w.into_iter().rev().collect()
    } else {
        w
    }
}

/// Per-stream mutable state: translation history plus the last smoothed
/// rotation.
#[derive(Debug, Clone, Default)]
pub struct SmootherState {
    history: VecDeque<Vec3>,
    last_rotation: Option<Quaternion>,
    last_frame_index: Option<usize>,
    frames_seen: usize,
    last_step_ops: u64,
}

impl SmootherState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn last_step_ops(&self) -> u64 {
        self.last_step_ops
    }

    /// Mean consecutive-step length over the history buffer; `None` with
    /// fewer than two entries (clamping is skipped then).
    pub fn average_velocity(&self) -> Option<f64> {
        if self.history.len() < 2 {
            return None;
        }
        let mut total = 0.0;
        let mut prev: Option<&Vec3> = None;
        for t in &self.history {
            if let Some(p) = prev {
                total += (*t - *p).norm();
            }
            prev = Some(t);
        }
        Some(total / (self.history.len() - 1) as f64)
    }

    /// One translation update: weighted history blend, velocity-clamped
    /// delta, EMA step. The raw (unsmoothed) input enters the history
    /// afterwards.
    pub fn smooth_translation(&mut self, t: Vec3, config: &SmootherConfig) -> Vec3 {
        let mut ops = 0u64;
        let out = self.smooth_translation_counted(t, config, &mut ops);
        self.last_step_ops = ops;
        out
    }

    fn smooth_translation_counted(
        &mut self,
        t: Vec3,
        config: &SmootherConfig,
        ops: &mut u64,
    ) -> Vec3 {
        if self.history.is_empty() {
            self.push_history(t, config);
            return t;
        }
        let len = self.history.len();
        let weights = weights_for(config, len);
        *ops += 2 * len as u64;

        // m = 0 is the newest history entry
        let mut mean = Vec3::ZERO;
        for (m, w) in weights.iter().enumerate() {
            let sample = self.history[len - 1 - m];
            mean = mean + sample * *w;
        }
        *ops += 6 * len as u64;

        let mut delta = t - mean;
        let mut clamped = false;
        if config.clamp_enabled {
            if let Some(v_bar) = self.average_velocity() {
                *ops += 8 * (len as u64 - 1);
                // tau = 0 would freeze motion onset from rest; skip clamping
                // for that frame instead
                if v_bar > 0.0 {
                    let tau = config.lambda_clamp * v_bar;
                    let norm = delta.norm();
                    *ops += 8;
                    if norm > tau {
                        delta = delta * (tau / norm);
                        clamped = true;
                    }
                }
            }
        }

        let out = if config.alpha == 1.0 && !clamped {
            // exact passthrough, no float round-trip through mean + delta
            t
        } else {
            mean + delta * config.alpha
        };
        *ops += 6;
        self.push_history(t, config);
        out
    }

    fn push_history(&mut self, t: Vec3, config: &SmootherConfig) {
        if self.history.len() == config.buffer_size {
            self.history.pop_front();
        }
        self.history.push_back(t);
    }

    /// Hemisphere-aligned linear quaternion blend (normalized), seeded with
    /// the first rotation. With alpha = 1 the aligned input passes through
    /// unchanged; an input stream that itself flips hemispheres comes back
    /// sign-flipped (same rotation).
    pub fn smooth_rotation(&mut self, q: Quaternion, config: &SmootherConfig) -> Quaternion {
        let prev = match self.last_rotation {
            None => {
                self.last_rotation = Some(q);
                return q;
            }
            Some(p) => p,
        };
        let aligned = if prev.dot(&q) < 0.0 { q.neg() } else { q };
        let out = if config.alpha == 1.0 {
            aligned
        } else {
            let a = config.alpha;
            let x = (1.0 - a) * prev.x + a * aligned.x;
            let y = (1.0 - a) * prev.y + a * aligned.y;
            let z = (1.0 - a) * prev.z + a * aligned.z;
            let w = (1.0 - a) * prev.w + a * aligned.w;
            match Quaternion::normalized(x, y, z, w) {
                Ok(q) => q,
                // degenerate sum cannot occur after the flip, but keep the
                // previous rotation rather than emitting NaN if it ever does
                Err(_) => prev,
            }
        };
        self.last_rotation = Some(out);
        out
    }

    /// Smooths one pose; poses must arrive in increasing frame order.
    pub fn smooth_step(&mut self, pose: &PoseSample, config: &SmootherConfig) -> Result<PoseSample> {
        config.validate()?;
        if let Some(last) = self.last_frame_index {
            if pose.frame_index <= last {
                return Err(Error::Sequencing(format!(
                    "pose frame {} after frame {last}",
                    pose.frame_index
                )));
            }
        }
        let mut ops = 0u64;
        let translation = self.smooth_translation_counted(pose.translation, config, &mut ops);
        let rotation = self.smooth_rotation(pose.rotation, config);
        ops += 16;
        self.last_frame_index = Some(pose.frame_index);
        self.frames_seen += 1;
        self.last_step_ops = ops;
        PoseSample::new(pose.frame_index, translation, rotation)
    }
}

/// Smooths a whole trajectory, preserving its scale.
pub fn smooth_trajectory(
    traj: &crate::motion::Trajectory,
    config: &SmootherConfig,
) -> Result<crate::motion::Trajectory> {
    config.validate()?;
    let mut state = SmootherState::new();
    let samples: Result<Vec<PoseSample>> = traj
        .samples()
        .iter()
        .map(|p| state.smooth_step(p, config))
        .collect();
    crate::motion::Trajectory::new(samples?, traj.scale())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: evaluates the weight/blend formulas directly
    /// over an explicit buffer (newest last), without touching the state
    /// machinery.
    fn translation_oracle(buffer: &[Vec3], t: Vec3, alpha: f64) -> Vec3 {
        let b = buffer.len();
        let raw: Vec<f64> = (0..b).map(|m| (1.0 - alpha).powi((b - 1 - m) as i32)).collect();
        let sum: f64 = raw.iter().sum();
        let mut mean = Vec3::ZERO;
        for m in 0..b {
            // m indexes lag: buffer[b-1-m] is the sample m frames back
            mean = mean + buffer[b - 1 - m] * (raw[m] / sum);
        }
        let delta = t - mean;
        mean + delta * alpha
    }

    fn config(alpha: f64, buffer: usize, clamp: bool) -> SmootherConfig {
        SmootherConfig {
            alpha,
            buffer_size: buffer,
            lambda_clamp: 3.0,
            clamp_enabled: clamp,
            recency_flip: false,
        }
    }

    #[test]
    fn ema_weights_alpha_one_puts_mass_on_oldest() {
        assert_eq!(ema_weights(1.0, 3), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn ema_weights_single_slot() {
        assert_eq!(ema_weights(0.5, 1), vec![1.0]);
    }

    #[test]
    fn ema_weights_half_alpha_exact() {
        let w = ema_weights(0.5, 3);
        let expected = [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0];
        for (a, b) in w.iter().zip(expected.iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ema_weights_sum_to_one_and_nonnegative() {
        for &alpha in &[0.05, 0.3, 0.7, 0.99, 1.0] {
            for b in 1..=12 {
                let w = ema_weights(alpha, b);
                assert!(w.iter().all(|&x| x >= 0.0));
                let sum: f64 = w.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_stream_is_fixpoint() {
        let cfg = config(0.5, 4, true);
        let mut state = SmootherState::new();
        let c = Vec3::new(1.0, -2.0, 0.5);
        for _ in 0..10 {
            let out = state.smooth_translation(c, &cfg);
            assert!((out - c).norm() < 1e-15);
        }
    }

    #[test]
    fn alpha_one_no_clamp_is_exact_passthrough() {
        let cfg = config(1.0, 5, false);
        let mut state = SmootherState::new();
        for i in 0..20 {
            let t = Vec3::new(i as f64 * 1.7, (i * i) as f64 * -0.3, 10.0 / (i + 1) as f64);
            let out = state.smooth_translation(t, &cfg);
            assert_eq!(out, t);
        }
    }

    #[test]
    fn frozen_case_from_direct_oracle() {
        // history (0,0,0), (1,0,0), (2,0,0) then input (10,0,0),
        // alpha = 0.5, B = 3, clamp disabled.
        // Oracle: weights [1/7, 2/7, 4/7] (newest->oldest), so
        //   mean = (1/7)*2 + (2/7)*1 + (4/7)*0 = 4/7
        //   out  = 4/7 + 0.5 * (10 - 4/7)     = 37/7
        let buffer = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let input = Vec3::new(10.0, 0.0, 0.0);
        let expected = translation_oracle(&buffer, input, 0.5);
        assert!((expected.x - 37.0 / 7.0).abs() < 1e-12);

        let cfg = config(0.5, 3, false);
        let mut state = SmootherState::new();
        // first push returns the sample unchanged; replay the buffer
        state.smooth_translation(buffer[0], &cfg);
        state.smooth_translation(buffer[1], &cfg);
        state.smooth_translation(buffer[2], &cfg);
        let out = state.smooth_translation(input, &cfg);
        assert!((out - expected).norm() < 1e-12);
        assert!((out.x - 37.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn shorter_history_renormalizes_weights() {
        let cfg = config(0.5, 8, false);
        let mut state = SmootherState::new();
        state.smooth_translation(Vec3::new(1.0, 0.0, 0.0), &cfg);
        state.smooth_translation(Vec3::new(3.0, 0.0, 0.0), &cfg);
        let out = state.smooth_translation(Vec3::new(5.0, 0.0, 0.0), &cfg);
        let expected = translation_oracle(
            &[Vec3::new(1.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0)],
            Vec3::new(5.0, 0.0, 0.0),
            0.5,
        );
        assert!((out - expected).norm() < 1e-12);
    }

    #[test]
    fn average_velocity_static_and_uniform() {
        let cfg = config(0.5, 6, false);
        let mut state = SmootherState::new();
        for _ in 0..4 {
            state.smooth_translation(Vec3::new(2.0, 2.0, 2.0), &cfg);
        }
        assert_eq!(state.average_velocity(), Some(0.0));

        let mut state = SmootherState::new();
        for i in 0..5 {
            state.smooth_translation(Vec3::new(0.1 * i as f64, 0.0, 0.0), &cfg);
        }
        assert!((state.average_velocity().unwrap() - 0.1).abs() < 1e-12);

        let mut short = SmootherState::new();
        short.smooth_translation(Vec3::ZERO, &cfg);
        assert_eq!(short.average_velocity(), None);
    }

    #[test]
    fn average_velocity_matches_pairwise_oracle() {
        let cfg = config(0.5, 5, false);
        let pts = [
            Vec3::new(0.3, -0.1, 0.2),
            Vec3::new(0.5, 0.4, -0.2),
            Vec3::new(-0.1, 0.2, 0.9),
            Vec3::new(0.7, 0.7, 0.7),
            Vec3::new(1.0, -1.0, 0.0),
        ];
        let mut state = SmootherState::new();
        for p in &pts {
            state.smooth_translation(*p, &cfg);
        }
        let mut expected = 0.0;
        for w in pts.windows(2) {
            expected += (w[1] - w[0]).norm();
        }
        expected /= (pts.len() - 1) as f64;
        assert!((state.average_velocity().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn clamp_limits_delta_norm() {
        let cfg = SmootherConfig {
            alpha: 0.5,
            buffer_size: 4,
            lambda_clamp: 1.0,
            clamp_enabled: true,
            recency_flip: false,
        };
        let mut state = SmootherState::new();
        // steady motion of step 0.1 then a jump
        for i in 0..4 {
            state.smooth_translation(Vec3::new(0.1 * i as f64, 0.0, 0.0), &cfg);
        }
        let v_bar = state.average_velocity().unwrap();
        let tau = cfg.lambda_clamp * v_bar;
        // rebuild the weighted history mean with the oracle weights
        let buffer: Vec<Vec3> = (0..4).map(|i| Vec3::new(0.1 * i as f64, 0.0, 0.0)).collect();
        let raw: Vec<f64> = (0..4i32).map(|m| 0.5f64.powi(3 - m)).collect();
        let sum: f64 = raw.iter().sum();
        let mut mean = Vec3::ZERO;
        for m in 0..4 {
            mean = mean + buffer[3 - m] * (raw[m] / sum);
        }
        let out = state.smooth_translation(Vec3::new(50.0, 0.0, 0.0), &cfg);
        let applied_delta = (out - mean) * (1.0 / cfg.alpha);
        assert!(applied_delta.norm() <= tau + 1e-12);
    }

    #[test]
    fn zero_velocity_suspends_clamping() {
        let cfg = SmootherConfig {
            alpha: 1.0,
            buffer_size: 4,
            lambda_clamp: 3.0,
            clamp_enabled: true,
            recency_flip: false,
        };
        let mut state = SmootherState::new();
        for _ in 0..4 {
            state.smooth_translation(Vec3::ZERO, &cfg);
        }
        // static history: v_bar = 0 so the clamp must not freeze the onset
        let out = state.smooth_translation(Vec3::new(1.0, 0.0, 0.0), &cfg);
        assert_eq!(out, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn translation_equivariance() {
        let cfg = config(0.4, 5, true);
        let offset = Vec3::new(11.0, -7.0, 3.0);
        let inputs: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new((i as f64 * 0.37).sin(), (i as f64 * 0.21).cos(), 0.05 * i as f64))
            .collect();
        let mut a = SmootherState::new();
        let mut b = SmootherState::new();
        for t in &inputs {
            let out_a = a.smooth_translation(*t, &cfg);
            let out_b = b.smooth_translation(*t + offset, &cfg);
            assert!((out_b - (out_a + offset)).norm() < 1e-9);
        }
    }

    #[test]
    fn scale_equivariance() {
        let cfg = config(0.4, 5, true);
        let s = 3.5;
        let inputs: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new((i as f64 * 0.37).sin(), (i as f64 * 0.21).cos(), 0.05 * i as f64))
            .collect();
        let mut a = SmootherState::new();
        let mut b = SmootherState::new();
        for t in &inputs {
            let out_a = a.smooth_translation(*t, &cfg);
            let out_b = b.smooth_translation(*t * s, &cfg);
            assert!((out_b - out_a * s).norm() < 1e-9);
        }
    }

    #[test]
    fn rotation_fixpoint_and_double_cover() {
        let cfg = config(0.5, 4, false);
        let mut state = SmootherState::new();
        let q = Quaternion::normalized(0.1, 0.2, 0.3, 0.9).unwrap();
        assert_eq!(state.smooth_rotation(q, &cfg), q);
        // same rotation again: fixpoint
        let out = state.smooth_rotation(q, &cfg);
        assert!((out.dot(&q) - 1.0).abs() < 1e-12);

        // antipodal identity flips back to the previous hemisphere
        let mut state = SmootherState::new();
        state.smooth_rotation(Quaternion::IDENTITY, &cfg);
        let out = state.smooth_rotation(
            Quaternion::new(0.0, 0.0, 0.0, -1.0).unwrap(),
            &cfg,
        );
        assert!((out.w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_blend_matches_normalize_of_average_oracle() {
        let cfg = config(0.5, 4, false);
        let mut state = SmootherState::new();
        state.smooth_rotation(Quaternion::IDENTITY, &cfg);
        let ninety =
            Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2)
                .unwrap();
        let out = state.smooth_rotation(ninety, &cfg);

        // oracle: normalize(0.5 * identity + 0.5 * q)
        let ex = Quaternion::normalized(
            0.5 * ninety.x,
            0.5 * ninety.y,
            0.5 * ninety.z,
            0.5 + 0.5 * ninety.w,
        )
        .unwrap();
        assert!((out.dot(&ex) - 1.0).abs() < 1e-12);
        // angle strictly between 0 and 90 degrees
        let angle = out.angle().to_degrees();
        assert!(angle > 0.0 && angle < 90.0, "angle {angle}");
    }

    #[test]
    fn output_quaternions_stay_unit_with_nonnegative_dots() {
        let cfg = config(0.3, 4, false);
        let mut state = SmootherState::new();
        let mut prev: Option<Quaternion> = None;
        for i in 0..50 {
            let angle = i as f64 * 0.41;
            let q = Quaternion::from_axis_angle(
                Vec3::new((i as f64).sin() + 1.5, 0.3, (i as f64 * 0.7).cos()),
                angle,
            )
            .unwrap();
            let out = state.smooth_rotation(q, &cfg);
            assert!((out.norm() - 1.0).abs() <= 1e-9);
            if let Some(p) = prev {
                assert!(p.dot(&out) >= 0.0);
            }
            prev = Some(out);
        }
    }

    #[test]
    fn smooth_step_first_pose_unchanged_and_ordering_enforced() {
        let cfg = SmootherConfig::default();
        let mut state = SmootherState::new();
        let pose = PoseSample::new(
            0,
            Vec3::new(0.4, 0.5, 0.6),
            Quaternion::normalized(0.0, 0.3, 0.0, 0.95).unwrap(),
        )
        .unwrap();
        let out = state.smooth_step(&pose, &cfg).unwrap();
        assert_eq!(out, pose);

        let out_of_order = PoseSample::identity(0);
        assert!(matches!(
            state.smooth_step(&out_of_order, &cfg),
            Err(Error::Sequencing(_))
        ));
    }

    #[test]
    fn constant_pose_stream_is_identity() {
        let cfg = SmootherConfig::default();
        let mut state = SmootherState::new();
        let q = Quaternion::normalized(0.2, -0.1, 0.4, 0.88).unwrap();
        for i in 0..12 {
            let pose = PoseSample::new(i, Vec3::new(1.0, 2.0, 3.0), q).unwrap();
            let out = state.smooth_step(&pose, &cfg).unwrap();
            assert!((out.translation - pose.translation).norm() < 1e-12);
            assert!((out.rotation.dot(&q).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn recency_flip_reverses_weighting() {
        let base = config(0.5, 3, false);
        let flipped = SmootherConfig {
            recency_flip: true,
            ..base
        };
        let buffer = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let mut a = SmootherState::new();
        let mut b = SmootherState::new();
        for p in &buffer {
            a.smooth_translation(*p, &base);
            b.smooth_translation(*p, &flipped);
        }
        let input = Vec3::new(10.0, 0.0, 0.0);
        let out_a = a.smooth_translation(input, &base);
        let out_b = b.smooth_translation(input, &flipped);
        // flipped: mean = (4/7)*2 + (2/7)*1 + (1/7)*0 = 10/7, out = 10/7 + 0.5*(10-10/7)
        assert!((out_b.x - (10.0 / 7.0 + 0.5 * (10.0 - 10.0 / 7.0))).abs() < 1e-12);
        assert!(out_a.x != out_b.x);
    }
}
