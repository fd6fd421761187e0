//! Camera-to-world placement of point sets, pinhole projection, and metric
//! scale recovery from paired depth maps with human-region exclusion.

use crate::error::{Error, Result};
use crate::mask;
use crate::motion::{PoseSample, ScalarGrid, Vec3};
use crate::par;

/// V x 3 point set; stands in for a mesh or a joint set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vec3>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("point set needs V >= 1".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("non-finite point".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::Validation("focal lengths must be > 0".into()));
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

/// One frame's SLAM depth, metric depth, human mask, and validity mask.
#[derive(Debug, Clone)]
pub struct DepthPair {
    slam_depth: ScalarGrid,
    metric_depth: ScalarGrid,
    human_mask: ScalarGrid,
    validity: ScalarGrid,
}

impl DepthPair {
    pub fn new(
        slam_depth: ScalarGrid,
        metric_depth: ScalarGrid,
        human_mask: ScalarGrid,
        validity: ScalarGrid,
    ) -> Result<Self> {
        let dims = (slam_depth.width(), slam_depth.height());
        for (name, g) in [
            ("metric_depth", &metric_depth),
            ("human_mask", &human_mask),
            ("validity", &validity),
        ] {
            if (g.width(), g.height()) != dims {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {}x{}",
                    g.width(),
                    g.height(),
                    dims.0,
                    dims.1
                )));
            }
        }
        human_mask.ensure_binary("human_mask")?;
        validity.ensure_binary("validity")?;
        for i in 0..slam_depth.values().len() {
            if validity.values()[i] == 1.0
                && (slam_depth.values()[i] <= 0.0 || metric_depth.values()[i] <= 0.0)
            {
                return Err(Error::Validation(
                    "depths must be > 0 where validity = 1".into(),
                ));
            }
        }
        Ok(Self {
            slam_depth,
            metric_depth,
            human_mask,
            validity,
        })
    }

    /// Convenience: validity = everywhere.
    pub fn fully_valid(
        slam_depth: ScalarGrid,
        metric_depth: ScalarGrid,
        human_mask: ScalarGrid,
    ) -> Result<Self> {
        let validity = ScalarGrid::filled(slam_depth.width(), slam_depth.height(), 1.0)?;
        Self::new(slam_depth, metric_depth, human_mask, validity)
    }
}

/// World placement: p' = R(q) * p + s * t. Rigid for fixed s (s scales the
/// translation only).
pub fn to_world(points: &PointSet, pose: &PoseSample, scale: f64) -> Result<PointSet> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Validation(format!("scale {scale} must be > 0")));
    }
    let offset = pose.translation * scale;
    let out = par::map_slice(points.points(), |p| pose.rotation.rotate(*p) + offset);
    PointSet::new(out)
}

/// Inverse of [`to_world`]: expresses world points back in the camera frame.
pub fn to_camera(points: &PointSet, pose: &PoseSample, scale: f64) -> Result<PointSet> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Validation(format!("scale {scale} must be > 0")));
    }
    let offset = pose.translation * scale;
    let out = par::map_slice(points.points(), |p| pose.rotation.rotate_inverse(*p - offset));
    PointSet::new(out)
}

/// Pinhole projection; points with non-positive depth get `None` instead of
/// failing the whole batch.
pub fn project_points(points: &PointSet, intrinsics: &CameraIntrinsics) -> Vec<Option<[f64; 2]>> {
    par::map_slice(points.points(), |p| {
        if p.z > 0.0 {
            Some([
                intrinsics.fx * p.x / p.z + intrinsics.cx,
                intrinsics.fy * p.y / p.z + intrinsics.cy,
            ])
        } else {
            None
        }
    })
}

/// Lifts a pixel at the given depth back to camera coordinates.
pub fn backproject(pixel: [f64; 2], depth: f64, intrinsics: &CameraIntrinsics) -> Vec3 {
    Vec3::new(
        (pixel[0] - intrinsics.cx) * depth / intrinsics.fx,
        (pixel[1] - intrinsics.cy) * depth / intrinsics.fy,
        depth,
    )
}

/// Pooled metric/SLAM depth ratios over valid, non-human pixels across all
/// frames, in pixel order. The human mask gets a 1-pixel dilation before
/// exclusion to suppress boundary bleed.
pub fn scale_ratios(pairs: &[DepthPair]) -> Result<Vec<f64>> {
    let per_frame: Vec<Result<Vec<f64>>> = par::map_slice(pairs, |pair| {
        let excluded = mask::dilate(&pair.human_mask, 3, 1)?;
        let mut ratios = Vec::new();
        for i in 0..pair.slam_depth.values().len() {
            if pair.validity.values()[i] == 1.0
                && excluded.values()[i] == 0.0
                && pair.slam_depth.values()[i] > 0.0
                && pair.metric_depth.values()[i] > 0.0
            {
                ratios.push(pair.metric_depth.values()[i] / pair.slam_depth.values()[i]);
            }
        }
        Ok(ratios)
    });
    let mut all = Vec::new();
    for r in per_frame {
        all.extend(r?);
    }
    Ok(all)
}

/// Median of [`scale_ratios`]: one scaler for the whole sequence. Callers
/// that want "first K frames then freeze" slice the input accordingly.
pub fn estimate_scale(pairs: &[DepthPair]) -> Result<f64> {
    let mut all = scale_ratios(pairs)?;
    if all.is_empty() {
        return Err(Error::ScaleEstimation(
            "no valid non-human pixels in any frame".into(),
        ));
    }
    all.sort_unstable_by(f64::total_cmp);
    let n = all.len();
    let median = if n % 2 == 1 {
        all[n / 2]
    } else {
        0.5 * (all[n / 2 - 1] + all[n / 2])
    };
    Ok(median)
}
