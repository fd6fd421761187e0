//! Streaming KV-cache inference must reproduce the offline windowed
//! forward pass frame for frame, with bounded memory and constant
//! per-step work.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use streammotion_core::attention::{
    offline_window_forward, AttentionParams, AttentionStream, FeatureFrame, FusionMode,
};
use streammotion_core::mat::Mat;

fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    Mat::from_vec(rows, cols, data).unwrap()
}

fn random_stream(
    rng: &mut ChaCha8Rng,
    frames: usize,
    tokens: usize,
    dim: usize,
) -> Vec<FeatureFrame> {
    (0..frames)
        .map(|_| FeatureFrame::new(random_mat(rng, tokens, dim)).unwrap())
        .collect()
}

fn rel_err(a: &Mat, b: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.data().iter().zip(b.data()) {
        let denom = x.abs().max(y.abs()).max(1.0);
        worst = worst.max((x - y).abs() / denom);
    }
    worst
}

#[test]
fn streaming_matches_offline_on_many_random_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for case in 0..200 {
        let frames = rng.random_range(1..=32);
        let tokens = rng.random_range(1..=8);
        let dim = rng.random_range(1..=16);
        let window = rng.random_range(1..=6);
        let params = AttentionParams::new(
            random_mat(&mut rng, dim, dim),
            random_mat(&mut rng, dim, dim),
            random_mat(&mut rng, dim, dim),
            window,
            FusionMode::Add,
        )
        .unwrap();
        let stream = random_stream(&mut rng, frames, tokens, dim);
        let offline = offline_window_forward(&stream, &params).unwrap();
        let mut state = AttentionStream::new(params);
        for (i, frame) in stream.iter().enumerate() {
            let out = state.step(frame).unwrap();
            let err = rel_err(&out.fused, &offline[i].fused);
            assert!(
                err <= 1e-9,
                "case {case}: frame {i}/{frames} N={window} err={err}"
            );
            assert!(state.cache_len() < window.max(2));
        }
    }
}

#[test]
fn perturbing_frame_j_only_affects_later_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let params = AttentionParams::identity(5, 3, FusionMode::Add).unwrap();
    let stream = random_stream(&mut rng, 12, 3, 5);
    let base = offline_window_forward(&stream, &params).unwrap();
    for j in 0..12 {
        let mut mutated = stream.clone();
        mutated[j] = FeatureFrame::new(random_mat(&mut rng, 3, 5)).unwrap();
        let out = offline_window_forward(&mutated, &params).unwrap();
        for i in 0..j {
            assert_eq!(
                base[i].fused.max_abs_diff(&out[i].fused),
                0.0,
                "mutating frame {j} changed earlier frame {i}"
            );
        }
        assert!(base[j].fused.max_abs_diff(&out[j].fused) > 0.0);
    }
}

#[test]
fn op_count_is_constant_across_stream_lengths() {
    for &frames in &[10usize, 100, 1000] {
        let mut rng = ChaCha8Rng::seed_from_u64(frames as u64);
        let params = AttentionParams::identity(4, 3, FusionMode::Add).unwrap();
        let stream = random_stream(&mut rng, frames, 2, 4);
        let mut state = AttentionStream::new(params);
        let mut steady: Option<u64> = None;
        for (i, frame) in stream.iter().enumerate() {
            state.step(frame).unwrap();
            assert!(state.cache_len() <= 2);
            if i >= 2 {
                match steady {
                    None => steady = Some(state.last_step_ops()),
                    Some(s) => assert_eq!(state.last_step_ops(), s, "frame {i} of {frames}"),
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Softmax row-stochasticity holds for arbitrary streams: feeding
    /// all-ones values through self attention returns all-ones rows.
    #[test]
    fn row_stochastic_for_random_inputs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_mat(&mut rng, 4, 3);
        let k = random_mat(&mut rng, 4, 3);
        let v = Mat::from_vec(4, 1, vec![1.0; 4]).unwrap();
        let out = streammotion_core::attention::attend_self(&q, &k, &v).unwrap();
        for i in 0..4 {
            prop_assert!((out.get(i, 0) - 1.0).abs() <= 1e-9);
        }
    }

    /// Equivalence also holds under the average fusion mode.
    #[test]
    fn equivalence_with_average_fusion(seed in any::<u64>(), window in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = AttentionParams::new(
            random_mat(&mut rng, 4, 4),
            random_mat(&mut rng, 4, 4),
            random_mat(&mut rng, 4, 4),
            window,
            FusionMode::Average,
        ).unwrap();
        let stream = random_stream(&mut rng, 10, 2, 4);
        let offline = offline_window_forward(&stream, &params).unwrap();
        let mut state = AttentionStream::new(params);
        for (i, frame) in stream.iter().enumerate() {
            let out = state.step(frame).unwrap();
            prop_assert!(rel_err(&out.fused, &offline[i].fused) <= 1e-9);
        }
    }
}
