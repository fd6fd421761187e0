//! Time-domain evaluation metrics (MPJPE family, segment-aligned world
//! errors, RTE, ERVE, Accel/Jitter) and the sliding-window training
//! regularizers.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::motion::{MotionSequence, Quaternion, Vec3};
use crate::par;
use crate::world::PointSet;

/// Alignment applied before joint errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentMode {
    /// Raw world/camera coordinates.
    None,
    /// One rigid fit on the pooled joints of the first two frames, applied
    /// to the whole sequence (W-MPJPE style).
    FirstTwoFrames,
    /// One rigid fit on the pooled joints of every frame (WA-MPJPE style).
    FullSegment,
    /// Per-frame rigid Procrustes (rotation + translation).
    Rigid,
    /// Per-frame similarity Procrustes (rotation + translation + scale);
    /// this is PA-MPJPE.
    Similarity,
}

/// Least-squares similarity transform `y ~ s R x + t`.
#[derive(Debug, Clone, Copy)]
pub struct SimilarityTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
    pub scale: f64,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: Vec3::ZERO,
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let r = &self.rotation;
        let rotated = Vec3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
        );
        rotated * self.scale + self.translation
    }
}

/// Umeyama least-squares alignment of `source` onto `target`, minimizing
/// sum |s R x + t - y|^2 (rigid when `with_scale` is false).
///
/// Degenerate inputs (all source or all target points coincident) are
/// rejected; lower-rank but nonzero configurations (collinear paths,
/// planar point sets) return the det-corrected minimizer, which is then
/// not unique.
pub fn umeyama_align(
    source: &PointSet,
    target: &PointSet,
    with_scale: bool,
) -> Result<SimilarityTransform> {
    if source.len() != target.len() {
        return Err(Error::Dimension(format!(
            "point counts differ: {} vs {}",
            source.len(),
            target.len()
        )));
    }
    let n = source.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least 2 point pairs".into()));
    }
    let nf = n as f64;

    let mut mu_src = Vec3::ZERO;
    let mut mu_tgt = Vec3::ZERO;
    for i in 0..n {
        mu_src = mu_src + source.points()[i];
        mu_tgt = mu_tgt + target.points()[i];
    }
    mu_src = mu_src * (1.0 / nf);
    mu_tgt = mu_tgt * (1.0 / nf);

    let mut cov = Matrix3::<f64>::zeros();
    let mut var_src = 0.0;
    for i in 0..n {
        let x = source.points()[i] - mu_src;
        let y = target.points()[i] - mu_tgt;
        let xv = Vector3::new(x.x, x.y, x.z);
        let yv = Vector3::new(y.x, y.y, y.z);
        cov += yv * xv.transpose();
        var_src += x.dot(&x);
    }
    cov /= nf;
    var_src /= nf;

    if var_src < 1e-30 || cov.norm() < 1e-30 {
        return Err(Error::Degenerate(
            "zero-variance point configuration".into(),
        ));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Degenerate("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD failed".into()))?;

    let mut s_diag = Vector3::new(1.0, 1.0, 1.0);
    if (u.determinant() * v_t.determinant()) < 0.0 {
        s_diag[2] = -1.0;
    }
    let rotation = u * Matrix3::from_diagonal(&s_diag) * v_t;

    let scale = if with_scale {
        // trace(D S) / sigma_src^2, singular values sorted descending
        let d = svd.singular_values;
        (d[0] * s_diag[0] + d[1] * s_diag[1] + d[2] * s_diag[2]) / var_src
    } else {
        1.0
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Degenerate(format!("non-positive scale {scale}")));
    }

    let rot = [
        [rotation[(0, 0)], rotation[(0, 1)], rotation[(0, 2)]],
        [rotation[(1, 0)], rotation[(1, 1)], rotation[(1, 2)]],
        [rotation[(2, 0)], rotation[(2, 1)], rotation[(2, 2)]],
    ];
    let t = SimilarityTransform {
        rotation: rot,
        translation: Vec3::ZERO,
        scale,
    };
    let translation = mu_tgt - t.apply(mu_src);
    Ok(SimilarityTransform {
        translation,
        ..t
    })
}

fn check_shape(pred: &MotionSequence, gt: &MotionSequence) -> Result<()> {
    if pred.frames() != gt.frames() || pred.joints_per_frame() != gt.joints_per_frame() {
        return Err(Error::Dimension(format!(
            "sequence shapes differ: {}x{} vs {}x{}",
            pred.frames(),
            pred.joints_per_frame(),
            gt.frames(),
            gt.joints_per_frame()
        )));
    }
    Ok(())
}

fn pooled_points(seq: &MotionSequence, frames: std::ops::Range<usize>) -> PointSet {
    let mut pts = Vec::new();
    for f in frames {
        pts.extend_from_slice(seq.frame_positions(f));
    }
    PointSet::new(pts).expect("non-empty sequence slice")
}

fn mean_error_with_transform(
    pred: &MotionSequence,
    gt: &MotionSequence,
    frames: std::ops::Range<usize>,
    transform: &SimilarityTransform,
) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for f in frames {
        for j in 0..pred.joints_per_frame() {
            total += (transform.apply(pred.position(f, j)) - gt.position(f, j)).norm();
            count += 1;
        }
    }
    total / count as f64
}

fn per_frame_procrustes_error(
    pred: &MotionSequence,
    gt: &MotionSequence,
    with_scale: bool,
) -> Result<f64> {
    let per_frame: Vec<Result<f64>> = par::map_range(pred.frames(), |f| {
        let src = PointSet::new(pred.frame_positions(f).to_vec())?;
        let tgt = PointSet::new(gt.frame_positions(f).to_vec())?;
        let transform = umeyama_align(&src, &tgt, with_scale)?;
        let mut total = 0.0;
        for j in 0..pred.joints_per_frame() {
            total += (transform.apply(pred.position(f, j)) - gt.position(f, j)).norm();
        }
        Ok(total / pred.joints_per_frame() as f64)
    });
    let mut sum = 0.0;
    for e in per_frame {
        sum += e?;
    }
    Ok(sum / pred.frames() as f64)
}

/// Mean per-joint position error after the chosen alignment. PVE is this
/// same operation applied to vertex sets.
pub fn mpjpe_family(
    pred: &MotionSequence,
    gt: &MotionSequence,
    mode: AlignmentMode,
) -> Result<f64> {
    check_shape(pred, gt)?;
    match mode {
        AlignmentMode::None => {
            Ok(mean_error_with_transform(
                pred,
                gt,
                0..pred.frames(),
                &SimilarityTransform::identity(),
            ))
        }
        AlignmentMode::Rigid => per_frame_procrustes_error(pred, gt, false),
        AlignmentMode::Similarity => per_frame_procrustes_error(pred, gt, true),
        AlignmentMode::FirstTwoFrames => {
            if pred.frames() < 2 {
                return Err(Error::Validation(
                    "first-two-frame alignment needs F >= 2".into(),
                ));
            }
            let t = umeyama_align(
                &pooled_points(pred, 0..2),
                &pooled_points(gt, 0..2),
                false,
            )?;
            Ok(mean_error_with_transform(pred, gt, 0..pred.frames(), &t))
        }
        AlignmentMode::FullSegment => {
            let t = umeyama_align(
                &pooled_points(pred, 0..pred.frames()),
                &pooled_points(gt, 0..gt.frames()),
                false,
            )?;
            Ok(mean_error_with_transform(pred, gt, 0..pred.frames(), &t))
        }
    }
}

/// Splits into `segment_len`-frame segments (trailing partial kept when it
/// has >= 2 frames), aligns each segment rigidly on all frames resp. the
/// first two, and pools the joint errors. Returns (WA-MPJPE, W-MPJPE).
pub fn segment_metrics(
    pred: &MotionSequence,
    gt: &MotionSequence,
    segment_len: usize,
) -> Result<(f64, f64)> {
    check_shape(pred, gt)?;
    if pred.frames() < 2 {
        return Err(Error::Validation("segment metrics need F >= 2".into()));
    }
    if segment_len < 2 {
        return Err(Error::Validation("segment length must be >= 2".into()));
    }
    let mut segments = Vec::new();
    let mut start = 0;
    while start < pred.frames() {
        let end = (start + segment_len).min(pred.frames());
        if end - start >= 2 {
            segments.push(start..end);
        }
        start = end;
    }

    let per_segment: Vec<Result<(f64, f64, usize)>> = par::map_slice(&segments, |range| {
        let full = umeyama_align(
            &pooled_points(pred, range.clone()),
            &pooled_points(gt, range.clone()),
            false,
        )?;
        let first_two = umeyama_align(
            &pooled_points(pred, range.start..range.start + 2),
            &pooled_points(gt, range.start..range.start + 2),
            false,
        )?;
        let count = (range.end - range.start) * pred.joints_per_frame();
        let wa = mean_error_with_transform(pred, gt, range.clone(), &full);
        let w = mean_error_with_transform(pred, gt, range.clone(), &first_two);
        Ok((wa * count as f64, w * count as f64, count))
    });

    let mut wa_total = 0.0;
    let mut w_total = 0.0;
    let mut n_total = 0usize;
    for seg in per_segment {
        let (wa, w, n) = seg?;
        wa_total += wa;
        w_total += w;
        n_total += n;
    }
    Ok((wa_total / n_total as f64, w_total / n_total as f64))
}

/// Root translation error: rigid alignment of the root paths, then the mean
/// residual as a percentage of the total ground-truth path length.
pub fn rte(pred_root: &[Vec3], gt_root: &[Vec3]) -> Result<f64> {
    if pred_root.len() != gt_root.len() {
        return Err(Error::Dimension("root path lengths differ".into()));
    }
    if pred_root.len() < 2 {
        return Err(Error::Validation("rte needs F >= 2".into()));
    }
    let mut path_len = 0.0;
    for w in gt_root.windows(2) {
        path_len += (w[1] - w[0]).norm();
    }
    if path_len <= 0.0 {
        return Err(Error::UndefinedMetric(
            "rte is undefined for zero ground-truth displacement".into(),
        ));
    }
    let src = PointSet::new(pred_root.to_vec())?;
    let tgt = PointSet::new(gt_root.to_vec())?;
    // collinear paths make the rotation non-unique; fall back to a
    // translation-only (centroid) alignment in that case
    let transform = match umeyama_align(&src, &tgt, false) {
        Ok(t) => t,
        Err(Error::Degenerate(_)) => {
            let n = pred_root.len() as f64;
            let mut mu_src = Vec3::ZERO;
            let mut mu_tgt = Vec3::ZERO;
            for i in 0..pred_root.len() {
                mu_src = mu_src + pred_root[i];
                mu_tgt = mu_tgt + gt_root[i];
            }
            SimilarityTransform {
                translation: mu_tgt * (1.0 / n) - mu_src * (1.0 / n),
                ..SimilarityTransform::identity()
            }
        }
        Err(e) => return Err(e),
    };
    let mut total = 0.0;
    for i in 0..pred_root.len() {
        total += (transform.apply(pred_root[i]) - gt_root[i]).norm();
    }
    let mean = total / pred_root.len() as f64;
    Ok(100.0 * mean / path_len)
}

/// (accel_error, jitter):
/// * accel_error = mean |d2 pred - d2 gt| over second central differences,
///   per-frame units.
/// * jitter = mean |d3 pred| over third differences, ground-truth free.
///
/// With `fps` supplied the values convert to per-second units (x fps^2,
/// x fps^3).
pub fn accel_and_jitter(
    pred: &MotionSequence,
    gt: &MotionSequence,
    fps: Option<f64>,
) -> Result<(f64, f64)> {
    check_shape(pred, gt)?;
    let f = pred.frames();
    if f < 3 {
        return Err(Error::Validation("accel needs F >= 3".into()));
    }
    if f < 4 {
        return Err(Error::Validation("jitter needs F >= 4".into()));
    }
    let joints = pred.joints_per_frame();

    let mut accel_total = 0.0;
    for t in 1..f - 1 {
        for j in 0..joints {
            let ap = pred.position(t + 1, j) - pred.position(t, j) * 2.0 + pred.position(t - 1, j);
            let ag = gt.position(t + 1, j) - gt.position(t, j) * 2.0 + gt.position(t - 1, j);
            accel_total += (ap - ag).norm();
        }
    }
    let accel = accel_total / ((f - 2) * joints) as f64;

    let jitter = jitter_only(pred)?;
    match fps {
        Some(r) if r > 0.0 => Ok((accel * r * r, jitter * r * r * r)),
        Some(r) => Err(Error::Validation(format!("fps {r} must be > 0"))),
        None => Ok((accel, jitter)),
    }
}

/// Mean third-difference magnitude of a sequence (per-frame units).
pub fn jitter_only(seq: &MotionSequence) -> Result<f64> {
    let f = seq.frames();
    if f < 4 {
        return Err(Error::Validation("jitter needs F >= 4".into()));
    }
    let joints = seq.joints_per_frame();
    let mut total = 0.0;
    for t in 0..f - 3 {
        for j in 0..joints {
            let d3 = seq.position(t + 3, j) - seq.position(t + 2, j) * 3.0
                + seq.position(t + 1, j) * 3.0
                - seq.position(t, j);
            total += d3.norm();
        }
    }
    Ok(total / ((f - 3) * joints) as f64)
}

/// Egocentric root velocity error: per-frame root velocity expressed in the
/// previous frame's root orientation, error norms averaged.
pub fn erve(
    pred_root: &[Vec3],
    gt_root: &[Vec3],
    pred_rot: &[Quaternion],
    gt_rot: &[Quaternion],
) -> Result<f64> {
    let f = pred_root.len();
    if gt_root.len() != f || pred_rot.len() != f || gt_rot.len() != f {
        return Err(Error::Dimension("erve input lengths differ".into()));
    }
    if f < 2 {
        return Err(Error::Validation("erve needs F >= 2".into()));
    }
    let mut total = 0.0;
    for t in 1..f {
        let vp = pred_rot[t - 1].rotate_inverse(pred_root[t] - pred_root[t - 1]);
        let vg = gt_rot[t - 1].rotate_inverse(gt_root[t] - gt_root[t - 1]);
        total += (vp - vg).norm();
    }
    Ok(total / (f - 1) as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct RegularizerParams {
    /// Velocity term weight (lambda_5).
    pub lambda_velocity: f64,
    /// Acceleration term weight (lambda_6).
    pub lambda_accel: f64,
    /// Denominator guard.
    pub epsilon: f64,
    /// Measure positions relative to the pelvis joint.
    pub relative_to_pelvis: bool,
    pub pelvis_joint: usize,
}

impl Default for RegularizerParams {
    fn default() -> Self {
        Self {
            lambda_velocity: 10.0,
            lambda_accel: 5.0,
            epsilon: 1e-8,
            relative_to_pelvis: false,
            pelvis_joint: 0,
        }
    }
}

/// Confidence-weighted mean squared joint velocity and acceleration
/// (L_v, L_a). Velocity terms are weighted by the later frame's confidence,
/// acceleration terms by the center frame's. All-zero confidence returns
/// (0, 0) through the epsilon guard.
pub fn velocity_regularizers(
    seq: &MotionSequence,
    params: &RegularizerParams,
) -> Result<(f64, f64)> {
    let f = seq.frames();
    let joints = seq.joints_per_frame();
    if params.relative_to_pelvis && params.pelvis_joint >= joints {
        return Err(Error::Validation(format!(
            "pelvis joint {} out of range",
            params.pelvis_joint
        )));
    }
    let pos = |t: usize, j: usize| -> Vec3 {
        if params.relative_to_pelvis {
            seq.position(t, j) - seq.position(t, params.pelvis_joint)
        } else {
            seq.position(t, j)
        }
    };

    let mut v_num = 0.0;
    let mut v_den = 0.0;
    if f >= 2 {
        for t in 1..f {
            for j in 0..joints {
                let c = seq.confidence(t, j);
                let d = pos(t, j) - pos(t - 1, j);
                v_num += c * d.dot(&d);
                v_den += c;
            }
        }
    }
    let l_v = params.lambda_velocity * v_num / (v_den + params.epsilon);

    let mut a_num = 0.0;
    let mut a_den = 0.0;
    if f >= 3 {
        for t in 1..f - 1 {
            for j in 0..joints {
                let c = seq.confidence(t, j);
                let d = pos(t + 1, j) - pos(t, j) * 2.0 + pos(t - 1, j);
                a_num += c * d.dot(&d);
                a_den += c;
            }
        }
    }
    let l_a = params.lambda_accel * a_num / (a_den + params.epsilon);
    Ok((l_v, l_a))
}

#[derive(Debug, Clone, Copy)]
pub struct LossWeights {
    pub lambda_2d: f64,
    pub lambda_3d: f64,
    pub lambda_smpl: f64,
    pub lambda_vertices: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_2d: 5.0,
            lambda_3d: 5.0,
            lambda_smpl: 1.0,
            lambda_vertices: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLosses {
    pub l_2d: f64,
    pub l_3d: f64,
    pub l_smpl: f64,
    pub l_vertices: f64,
    /// Weighted sum of the four components.
    pub total: f64,
}

pub struct FrameLossInputs<'a> {
    pub pred_joints: &'a MotionSequence,
    pub gt_joints: &'a MotionSequence,
    /// Ground-truth 2D keypoints, F x J x 2 in pixels.
    pub gt_joints_2d: &'a [Vec<[f64; 2]>],
    /// Opaque per-frame parameter vectors (equal lengths frame by frame).
    pub pred_params: &'a [Vec<f64>],
    pub gt_params: &'a [Vec<f64>],
    pub pred_vertices: &'a MotionSequence,
    pub gt_vertices: &'a MotionSequence,
}

/// Squared-norm frame losses: 2D reprojection (through the pinhole
/// projection of the predicted joints), 3D joints, parameter vectors, and
/// vertices, plus their weighted total.
pub fn frame_losses(
    inputs: &FrameLossInputs,
    weights: &LossWeights,
    intrinsics: &crate::world::CameraIntrinsics,
) -> Result<FrameLosses> {
    check_shape(inputs.pred_joints, inputs.gt_joints)?;
    check_shape(inputs.pred_vertices, inputs.gt_vertices)?;
    let f = inputs.pred_joints.frames();
    let joints = inputs.pred_joints.joints_per_frame();
    if inputs.gt_joints_2d.len() != f || inputs.gt_joints_2d.iter().any(|j| j.len() != joints) {
        return Err(Error::Dimension("2D keypoints shape mismatch".into()));
    }
    if inputs.pred_params.len() != f || inputs.gt_params.len() != f {
        return Err(Error::Dimension("parameter sequence length mismatch".into()));
    }
    for (p, g) in inputs.pred_params.iter().zip(inputs.gt_params) {
        if p.len() != g.len() {
            return Err(Error::Dimension("parameter vector length mismatch".into()));
        }
    }

    let mut l_2d = 0.0;
    for t in 0..f {
        for j in 0..joints {
            let p = inputs.pred_joints.position(t, j);
            if p.z <= 0.0 {
                return Err(Error::Validation(format!(
                    "non-positive depth at frame {t} joint {j}; 2D loss undefined"
                )));
            }
            let u = intrinsics.fx * p.x / p.z + intrinsics.cx;
            let v = intrinsics.fy * p.y / p.z + intrinsics.cy;
            let g = inputs.gt_joints_2d[t][j];
            l_2d += (g[0] - u).powi(2) + (g[1] - v).powi(2);
        }
    }

    let mut l_3d = 0.0;
    for t in 0..f {
        for j in 0..joints {
            let d = inputs.gt_joints.position(t, j) - inputs.pred_joints.position(t, j);
            l_3d += d.dot(&d);
        }
    }

    let mut l_smpl = 0.0;
    for (p, g) in inputs.pred_params.iter().zip(inputs.gt_params) {
        for (a, b) in p.iter().zip(g) {
            l_smpl += (b - a).powi(2);
        }
    }

    let mut l_vertices = 0.0;
    for t in 0..inputs.pred_vertices.frames() {
        for j in 0..inputs.pred_vertices.joints_per_frame() {
            let d = inputs.gt_vertices.position(t, j) - inputs.pred_vertices.position(t, j);
            l_vertices += d.dot(&d);
        }
    }

    let total = weights.lambda_2d * l_2d
        + weights.lambda_3d * l_3d
        + weights.lambda_smpl * l_smpl
        + weights.lambda_vertices * l_vertices;
    Ok(FrameLosses {
        l_2d,
        l_3d,
        l_smpl,
        l_vertices,
        total,
    })
}

/// The flat evaluation report emitted by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub mpjpe: f64,
    pub pa_mpjpe: f64,
    pub pve: f64,
    pub accel_error: f64,
    pub jitter: f64,
    pub wa_mpjpe_100: f64,
    pub w_mpjpe_100: f64,
    pub rte_percent: f64,
    pub erve: f64,
    /// "frame" for per-frame units, "s" when converted with an fps.
    pub time_unit: String,
}

pub struct ReportOptions {
    pub segment_len: usize,
    /// Convert Accel/Jitter to per-second units.
    pub fps: Option<f64>,
    pub root_joint: usize,
    /// Root orientations for ERVE; identity when absent.
    pub pred_rotations: Option<Vec<Quaternion>>,
    pub gt_rotations: Option<Vec<Quaternion>>,
    /// Vertex sequences for PVE; joint sequences stand in when absent.
    pub pred_vertices: Option<MotionSequence>,
    pub gt_vertices: Option<MotionSequence>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            segment_len: 100,
            fps: None,
            root_joint: 0,
            pred_rotations: None,
            gt_rotations: None,
            pred_vertices: None,
            gt_vertices: None,
        }
    }
}

pub fn metric_report(
    pred: &MotionSequence,
    gt: &MotionSequence,
    opts: &ReportOptions,
) -> Result<MetricReport> {
    check_shape(pred, gt)?;
    if opts.root_joint >= pred.joints_per_frame() {
        return Err(Error::Validation(format!(
            "root joint {} out of range",
            opts.root_joint
        )));
    }
    let mpjpe = mpjpe_family(pred, gt, AlignmentMode::None)?;
    let pa_mpjpe = mpjpe_family(pred, gt, AlignmentMode::Similarity)?;
    let pve = match (&opts.pred_vertices, &opts.gt_vertices) {
        (Some(pv), Some(gv)) => mpjpe_family(pv, gv, AlignmentMode::None)?,
        _ => mpjpe,
    };
    let (accel_error, jitter) = accel_and_jitter(pred, gt, opts.fps)?;
    let (wa, w) = segment_metrics(pred, gt, opts.segment_len)?;

    let pred_root: Vec<Vec3> = (0..pred.frames())
        .map(|f| pred.position(f, opts.root_joint))
        .collect();
    let gt_root: Vec<Vec3> = (0..gt.frames())
        .map(|f| gt.position(f, opts.root_joint))
        .collect();
    let rte_percent = rte(&pred_root, &gt_root)?;

    let identity = vec![Quaternion::IDENTITY; pred.frames()];
    let pred_rot = opts.pred_rotations.as_deref().unwrap_or(&identity);
    let gt_rot = opts.gt_rotations.as_deref().unwrap_or(&identity);
    let erve_val = erve(&pred_root, &gt_root, pred_rot, gt_rot)?;

    Ok(MetricReport {
        mpjpe,
        pa_mpjpe,
        pve,
        accel_error,
        jitter,
        wa_mpjpe_100: wa,
        w_mpjpe_100: w,
        rte_percent,
        erve: erve_val,
        time_unit: if opts.fps.is_some() { "s" } else { "frame" }.into(),
    })
}
