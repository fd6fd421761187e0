//! Frequency-domain jitter analysis: STFT spectrograms of motion sequences
//! and the sigma-normalized RMSE / Pearson-correlation metrics between them.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::motion::MotionSequence;
use crate::par;

/// How a F x J x 3 sequence becomes STFT input channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelMode {
    /// One STFT per coordinate series (3J channels), magnitudes averaged.
    #[default]
    PerChannelMean,
    /// Joints and axes concatenated into one long series per frame.
    /// Manufactures inter-joint frequencies; provided for parity with the
    /// flatten-to-1D convention.
    Flattened,
}

impl std::str::FromStr for ChannelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_channel_mean" => Ok(Self::PerChannelMean),
            "flattened" => Ok(Self::Flattened),
            other => Err(Error::Validation(format!("unknown channel mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StftParams {
    /// Window length N_w (= n_fft), >= 2.
    pub n_fft: usize,
    /// Hop length L in samples, 1 <= L <= N_w.
    pub hop: usize,
    pub channel_mode: ChannelMode,
    /// Symmetric Hann (2*pi*k/(N-1)) instead of the periodic default.
    pub symmetric_hann: bool,
}

impl Default for StftParams {
    fn default() -> Self {
        Self {
            n_fft: 128,
            hop: 32,
            channel_mode: ChannelMode::PerChannelMean,
            symmetric_hann: false,
        }
    }
}

impl StftParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_fft < 2 {
            return Err(Error::Validation(format!(
                "n_fft {} must be >= 2",
                self.n_fft
            )));
        }
        if self.hop == 0 || self.hop > self.n_fft {
            return Err(Error::Validation(format!(
                "hop {} must be in [1, n_fft]",
                self.hop
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    fn window(&self) -> Vec<f64> {
        if self.symmetric_hann {
            hann_window_symmetric(self.n_fft)
        } else {
            hann_window(self.n_fft)
        }
    }
}

/// Periodic Hann: w(k) = 0.5 (1 - cos(2 pi k / N)), k = 0..N-1.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Symmetric Hann variant: w(k) = 0.5 (1 - cos(2 pi k / (N - 1))).
pub fn hann_window_symmetric(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// One-sided magnitude spectrogram: (N_w/2 + 1) x F, non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    mags: Mat,
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.mags.rows()
    }

    pub fn frames(&self) -> usize {
        self.mags.cols()
    }

    pub fn at(&self, bin: usize, frame: usize) -> f64 {
        self.mags.get(bin, frame)
    }

    pub fn magnitudes(&self) -> &Mat {
        &self.mags
    }

    /// Per-bin mean over the frame axis.
    pub fn time_averaged(&self) -> Vec<f64> {
        (0..self.bins())
            .map(|b| (0..self.frames()).map(|f| self.at(b, f)).sum::<f64>() / self.frames() as f64)
            .collect()
    }
}

/// Windowed one-sided DFT magnitudes of one series, before any time-axis
/// interpolation. The series is zero-padded by N_w/2 at both ends so the
/// window at hop t is centered on sample t*L; columns are returned bins x T.
pub fn stft_magnitudes(series: &[f64], params: &StftParams) -> Result<Mat> {
    params.validate()?;
    if series.is_empty() {
        return Err(Error::Validation("series must be non-empty".into()));
    }
    let n = params.n_fft;
    let pad = n / 2;
    let mut padded = vec![0.0; series.len() + 2 * pad];
    padded[pad..pad + series.len()].copy_from_slice(series);

    let window = params.window();
    let n_cols = (padded.len() - n) / params.hop + 1;
    let bins = params.bins();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let columns: Vec<Vec<f64>> = par::map_range(n_cols, |t| {
        let start = t * params.hop;
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|k| Complex::new(padded[start + k] * window[k], 0.0))
            .collect();
        fft.process(&mut buf);
        buf[..bins].iter().map(|c| c.norm()).collect()
    });

    let mut out = Mat::zeros(bins, n_cols);
    for (t, col) in columns.iter().enumerate() {
        for (b, v) in col.iter().enumerate() {
            out.set(b, t, *v);
        }
    }
    Ok(out)
}

/// Linear interpolation of hop-spaced columns onto `frames` targets with
/// positions `target_spacing * g`, clamped at both ends.
fn interpolate_columns(cols: &Mat, hop: usize, frames: usize, target_spacing: f64) -> Mat {
    let mut out = Mat::zeros(cols.rows(), frames);
    let last = cols.cols() - 1;
    for g in 0..frames {
        let pos = target_spacing * g as f64 / hop as f64;
        let (t0, t1, lambda) = if pos <= 0.0 {
            (0, 0, 0.0)
        } else if pos >= last as f64 {
            (last, last, 0.0)
        } else {
            let t0 = pos.floor() as usize;
            (t0, t0 + 1, pos - t0 as f64)
        };
        for b in 0..cols.rows() {
            let v = (1.0 - lambda) * cols.get(b, t0) + lambda * cols.get(b, t1);
            out.set(b, g, v);
        }
    }
    out
}

/// STFT magnitude spectrogram of a motion sequence, resampled to the
/// original frame count along the time axis.
pub fn spectrogram(seq: &MotionSequence, params: &StftParams) -> Result<Spectrogram> {
    params.validate()?;
    let frames = seq.frames();
    let joints = seq.joints_per_frame();

    let mags = match params.channel_mode {
        ChannelMode::PerChannelMean => {
            let n_channels = 3 * joints;
            let channels: Vec<Vec<f64>> = (0..n_channels)
                .map(|c| {
                    let joint = c / 3;
                    let axis = c % 3;
                    (0..frames)
                        .map(|f| {
                            let p = seq.position(f, joint);
                            match axis {
                                0 => p.x,
                                1 => p.y,
                                _ => p.z,
                            }
                        })
                        .collect()
                })
                .collect();
            let per_channel: Vec<Result<Mat>> =
                par::map_slice(&channels, |series| stft_magnitudes(series, params));
            // sequential fold in channel order keeps the mean deterministic
            let mut acc: Option<Mat> = None;
            for m in per_channel {
                let m = m?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => a.add(&m)?,
                });
            }
            let sum = acc.expect("at least one channel");
            let mean = sum.scale(1.0 / n_channels as f64);
            // columns sit at frame positions t * hop; frame g is one sample
            interpolate_columns(&mean, params.hop, frames, 1.0)
        }
        ChannelMode::Flattened => {
            let mut series = Vec::with_capacity(frames * joints * 3);
            for f in 0..frames {
                for j in 0..joints {
                    let p = seq.position(f, j);
                    series.extend_from_slice(&[p.x, p.y, p.z]);
                }
            }
            let cols = stft_magnitudes(&series, params)?;
            // window centers live in flattened-sample coordinates; frame g
            // maps to sample g * 3J
            interpolate_columns(&cols, params.hop, frames, (3 * joints) as f64)
        }
    };
    Ok(Spectrogram { mags })
}

fn spectrogram_stats(s: &Spectrogram) -> (f64, f64) {
    let n = (s.bins() * s.frames()) as f64;
    let sum: f64 = s.magnitudes().data().iter().sum();
    let mean = sum / n;
    let var: f64 = s
        .magnitudes()
        .data()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

const NORM_EPSILON: f64 = 1e-8;

fn check_shapes(gt: &Spectrogram, pred: &Spectrogram) -> Result<()> {
    if gt.bins() != pred.bins() || gt.frames() != pred.frames() {
        return Err(Error::Dimension(format!(
            "spectrogram shapes differ: {}x{} vs {}x{}",
            gt.bins(),
            gt.frames(),
            pred.bins(),
            pred.frames()
        )));
    }
    Ok(())
}

/// RMSE normalized by the ground-truth standard deviation:
/// 100 * RMSE / (sigma_gt + epsilon). Asymmetric by construction.
pub fn rmse_norm(gt: &Spectrogram, pred: &Spectrogram) -> Result<f64> {
    check_shapes(gt, pred)?;
    let n = (gt.bins() * gt.frames()) as f64;
    let mse: f64 = gt
        .magnitudes()
        .data()
        .iter()
        .zip(pred.magnitudes().data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let (_, sigma_gt) = spectrogram_stats(gt);
    Ok(100.0 * mse.sqrt() / (sigma_gt + NORM_EPSILON))
}

/// Pearson correlation mapped to [0, 100]: 100 * (1 - Corr) / 2.
/// Identical non-constant inputs give 0, anti-correlated inputs give 100.
/// Exactly one constant input is treated as uncorrelated (Corr = 0 -> 50);
/// two constant inputs are an error.
pub fn corr_norm(gt: &Spectrogram, pred: &Spectrogram) -> Result<f64> {
    check_shapes(gt, pred)?;
    let (mu_gt, sigma_gt) = spectrogram_stats(gt);
    let (mu_pred, sigma_pred) = spectrogram_stats(pred);
    if sigma_gt == 0.0 && sigma_pred == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation of two constant spectrograms".into(),
        ));
    }
    let corr = if sigma_gt == 0.0 || sigma_pred == 0.0 {
        0.0
    } else {
        let n = (gt.bins() * gt.frames()) as f64;
        let cov: f64 = gt
            .magnitudes()
            .data()
            .iter()
            .zip(pred.magnitudes().data())
            .map(|(a, b)| (a - mu_gt) * (b - mu_pred))
            .sum::<f64>()
            / n;
        cov / (sigma_gt * sigma_pred)
    };
    Ok(100.0 * (1.0 - corr) / 2.0)
}
