//! Soft confidence mask: n-fold square dilation, truncated Gaussian blur,
//! max-normalization.

use crate::error::{Error, Result};
use crate::motion::ScalarGrid;
use crate::par;

#[derive(Debug, Clone, Copy)]
pub struct MaskParams {
    /// Structuring element side k (odd, >= 1).
    pub kernel_size: usize,
    /// Dilation iterations n (0 = identity).
    pub dilation_iterations: usize,
    /// Gaussian sigma in pixels, > 0. Kernel truncated at radius ceil(3*sigma).
    pub sigma: f64,
    /// Divisor guard for empty masks.
    pub epsilon: f64,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            kernel_size: 5,
            dilation_iterations: 2,
            sigma: 3.0,
            epsilon: 1e-12,
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size % 2 == 0 {
            return Err(Error::Validation(format!(
                "kernel size {} must be odd and >= 1",
                self.kernel_size
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Validation(format!(
                "sigma {} must be > 0",
                self.sigma
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Validation("epsilon must be > 0".into()));
        }
        Ok(())
    }
}

/// 1D max filter with radius r; out-of-bounds contributes nothing.
fn max_filter_rows(grid: &ScalarGrid, radius: usize) -> ScalarGrid {
    let (w, h) = (grid.width(), grid.height());
    let rows = par::map_range(h, |row| {
        let mut out = vec![0.0f64; w];
        for col in 0..w {
            let lo = col.saturating_sub(radius);
            let hi = (col + radius).min(w - 1);
            let mut m: f64 = 0.0;
            for c in lo..=hi {
                m = m.max(grid.at(row, c));
            }
            out[col] = m;
        }
        out
    });
    ScalarGrid::new(w, h, rows.concat()).expect("same dims")
}

fn max_filter_cols(grid: &ScalarGrid, radius: usize) -> ScalarGrid {
    let (w, h) = (grid.width(), grid.height());
    let rows = par::map_range(h, |row| {
        let lo = row.saturating_sub(radius);
        let hi = (row + radius).min(h - 1);
        let mut out = vec![0.0f64; w];
        for col in 0..w {
            let mut m: f64 = 0.0;
            for r in lo..=hi {
                m = m.max(grid.at(r, col));
            }
            out[col] = m;
        }
        out
    });
    ScalarGrid::new(w, h, rows.concat()).expect("same dims")
}

/// n iterations of morphological dilation with a k x k square structuring
/// element. Monotone: the output support contains the input support.
pub fn dilate(mask: &ScalarGrid, kernel_size: usize, iterations: usize) -> Result<ScalarGrid> {
    if kernel_size == 0 || kernel_size % 2 == 0 {
        return Err(Error::Validation(format!(
            "kernel size {kernel_size} must be odd and >= 1"
        )));
    }
    mask.ensure_binary("dilate")?;
    let radius = (kernel_size - 1) / 2;
    let mut out = mask.clone();
    for _ in 0..iterations {
        // square SE is separable into row and column max filters
        out = max_filter_cols(&max_filter_rows(&out, radius), radius);
    }
    Ok(out)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

/// Separable convolution with a truncated, renormalized Gaussian and
/// replicate-edge padding. Constant grids are fixpoints.
pub fn gaussian_blur(grid: &ScalarGrid, sigma: f64) -> Result<ScalarGrid> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Validation(format!("sigma {sigma} must be > 0")));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() - 1) / 2;
    let (w, h) = (grid.width(), grid.height());

    // horizontal pass
    let horiz = par::map_range(h, |row| {
        let mut out = vec![0.0f64; w];
        for col in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let offset = i as isize - radius as isize;
                let c = (col as isize + offset).clamp(0, w as isize - 1) as usize;
                acc += k * grid.at(row, c);
            }
            out[col] = acc;
        }
        out
    });
    let horiz = ScalarGrid::new(w, h, horiz.concat()).expect("same dims");

    // vertical pass
    let vert = par::map_range(h, |row| {
        let mut out = vec![0.0f64; w];
        for col in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let offset = i as isize - radius as isize;
                let r = (row as isize + offset).clamp(0, h as isize - 1) as usize;
                acc += k * horiz.at(r, col);
            }
            out[col] = acc;
        }
        out
    });
    ScalarGrid::new(w, h, vert.concat())
}

/// Dilation, blur, then division by the global maximum. The output lies in
/// [0, 1] with max exactly 1 for any nonempty mask; an empty mask maps to
/// the zero grid (epsilon guard), never NaN.
pub fn soft_mask(mask: &ScalarGrid, params: &MaskParams) -> Result<ScalarGrid> {
    params.validate()?;
    let dilated = dilate(mask, params.kernel_size, params.dilation_iterations)?;
    let blurred = gaussian_blur(&dilated, params.sigma)?;
    let max = blurred.max_value();
    if max <= params.epsilon {
        return ScalarGrid::filled(mask.width(), mask.height(), 0.0);
    }
    let values = blurred.values().iter().map(|v| v / max).collect();
    ScalarGrid::new(mask.width(), mask.height(), values)
}
