//! Streaming motion-processing toolkit: causal KV-cache attention with an
//! offline-equivalent windowed forward, online EMA pose correction,
//! camera-to-world placement with metric-scale recovery, soft human
//! masking, motion/trajectory evaluation metrics, STFT jitter spectrograms,
//! and online-vs-offline delay accounting.
//!
//! Data-parallel inner loops run on rayon when the default `parallel`
//! feature is enabled; disabling it swaps in sequential fallbacks with
//! bit-identical results.

pub mod attention;
pub mod error;
pub mod harness;
pub mod io;
pub mod mask;
pub mod mat;
pub mod metrics;
pub mod motion;
pub mod smoother;
pub mod spectral;
pub mod world;

mod par;

pub use error::{Error, Result};
pub use motion::{Joint3, MotionSequence, PoseSample, Quaternion, ScalarGrid, Trajectory, Vec3};
