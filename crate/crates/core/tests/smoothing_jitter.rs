//! Cross-module check: EMA correction on a jittered synthetic circle must
//! cut third-difference jitter and not hurt rigid-aligned trajectory error.

use streammotion_core::harness::{generate, SynthKind, SynthSpec};
use streammotion_core::metrics::{jitter_only, rte};
use streammotion_core::motion::{MotionSequence, Trajectory, Vec3};
use streammotion_core::smoother::{smooth_trajectory, SmootherConfig};

fn translations(traj: &Trajectory) -> Vec<Vec3> {
    traj.samples().iter().map(|s| s.translation).collect()
}

fn as_motion(traj: &Trajectory) -> MotionSequence {
    MotionSequence::from_positions(
        traj.samples().iter().map(|s| vec![s.translation]).collect(),
        30.0,
    )
    .unwrap()
}

#[test]
fn smoothing_cuts_jerk_on_jittered_circle() {
    let spec = SynthSpec {
        kind: SynthKind::Circle,
        frames: 300,
        noise_sigma_t: 0.05, // 5% of the unit radius
        noise_sigma_r: 0.02,
        seed: 20260811,
    };
    let (clean, noisy) = generate(&spec).unwrap();
    let config = SmootherConfig {
        alpha: 0.25,
        buffer_size: 8,
        lambda_clamp: 3.0,
        clamp_enabled: true,
        recency_flip: false,
    };
    let smoothed = smooth_trajectory(&noisy, &config).unwrap();

    let raw_jerk = jitter_only(&as_motion(&noisy)).unwrap();
    let smooth_jerk = jitter_only(&as_motion(&smoothed)).unwrap();
    assert!(
        smooth_jerk < 0.5 * raw_jerk,
        "jerk ratio {} (raw {raw_jerk}, smoothed {smooth_jerk})",
        smooth_jerk / raw_jerk
    );

    let clean_t = translations(&clean);
    let rte_raw = rte(&translations(&noisy), &clean_t).unwrap();
    let rte_smoothed = rte(&translations(&smoothed), &clean_t).unwrap();
    assert!(
        rte_smoothed <= rte_raw,
        "rte smoothed {rte_smoothed} vs raw {rte_raw}"
    );
}

#[test]
fn smoothed_stream_has_strictly_lower_jerk_than_raw_for_defaults_too() {
    // the library defaults smooth more gently; jerk still goes down
    let spec = SynthSpec {
        kind: SynthKind::Circle,
        frames: 100,
        noise_sigma_t: 0.05,
        noise_sigma_r: 0.0,
        seed: 7,
    };
    let (_, noisy) = generate(&spec).unwrap();
    let smoothed = smooth_trajectory(&noisy, &SmootherConfig::default()).unwrap();
    let raw_jerk = jitter_only(&as_motion(&noisy)).unwrap();
    let smooth_jerk = jitter_only(&as_motion(&smoothed)).unwrap();
    assert!(smooth_jerk < raw_jerk);
}
