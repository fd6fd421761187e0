//! File formats: motion CSV/JSONL, trajectory JSONL, PGM grids, raw f32
//! grids, and binary feature streams.
//!
//! Floats are written with Rust's shortest-round-trip formatting, so
//! load(save(x)) reproduces values exactly.
//!
//! Formats:
//! * motion CSV: optional `# frame_rate=<fps>` comment line, then a
//!   `frame,joint,x,y,z,confidence` header (confidence column optional,
//!   defaults to 1), one row per joint, frames and joints in order.
//! * motion JSONL: `{"frame_rate":..}` header line, then
//!   `{"frame":i,"joints":[[x,y,z],..],"confidence":[..]}` per frame.
//! * trajectory JSONL: optional `{"scale":..}` header line, then
//!   `{"frame":i,"t":[x,y,z],"q":[x,y,z,w]}` per sample.
//! * PGM: P2/P5, maxval <= 65535 (16-bit P5 is big-endian per Netpbm);
//!   mask loaders divide by maxval, depth loaders multiply raw values by an
//!   optional `<path>.scale` sidecar factor.
//! * feature stream: u32-LE token-count P, u32-LE feature dim d, then one
//!   row-major P*d block of f32-LE per frame.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attention::FeatureFrame;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::motion::{Joint3, MotionSequence, PoseSample, Quaternion, ScalarGrid, Trajectory, Vec3};

pub const DEFAULT_FRAME_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for MotionFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Validation(format!("unknown motion format `{other}`"))),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Motion sequences
// ---------------------------------------------------------------------------

pub fn load_motion(path: &Path, format: MotionFormat) -> Result<MotionSequence> {
    match format {
        MotionFormat::Csv => load_motion_csv(path),
        MotionFormat::Jsonl => load_motion_jsonl(path),
    }
}

pub fn save_motion(seq: &MotionSequence, path: &Path, format: MotionFormat) -> Result<()> {
    match format {
        MotionFormat::Csv => save_motion_csv(seq, path),
        MotionFormat::Jsonl => save_motion_jsonl(seq, path),
    }
}

fn load_motion_csv(path: &Path) -> Result<MotionSequence> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut frame_rate = DEFAULT_FRAME_RATE;

    // Scan leading comment lines for the frame-rate annotation.
    let mut reader = BufReader::new(file);
    let mut content = String::new();
    reader
        .read_to_string(&mut content)
        .map_err(|e| io_err(path, e))?;
    for line in content.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("frame_rate=") {
                frame_rate = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, 1, format!("bad frame_rate `{v}`")))?;
            }
        } else {
            break;
        }
    }

    let mut csv_reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());

    let headers = csv_reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let has_confidence = headers.iter().any(|h| h == "confidence");
    let expected = if has_confidence { 6 } else { 5 };

    let mut positions: Vec<Vec<Joint3>> = Vec::new();
    let mut confidence: Vec<Vec<f64>> = Vec::new();

    for record in csv_reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != expected {
            return Err(parse_err(
                path,
                line,
                format!("expected {expected} columns, got {}", record.len()),
            ));
        }
        let field = |idx: usize, name: &str| -> Result<f64> {
            record[idx]
                .parse::<f64>()
                .map_err(|_| parse_err(path, line, format!("bad {name} `{}`", &record[idx])))
        };
        let frame = field(0, "frame")? as usize;
        let joint = field(1, "joint")? as usize;
        let pos = Joint3::new(field(2, "x")?, field(3, "y")?, field(4, "z")?);
        let conf = if has_confidence { field(5, "confidence")? } else { 1.0 };

        if frame == positions.len() {
            positions.push(Vec::new());
            confidence.push(Vec::new());
        } else if frame + 1 != positions.len() {
            return Err(parse_err(
                path,
                line,
                format!("frame index {frame} out of order"),
            ));
        }
        if joint != positions[frame].len() {
            return Err(parse_err(
                path,
                line,
                format!("joint index {joint} out of order"),
            ));
        }
        positions[frame].push(pos);
        confidence[frame].push(conf);
    }

    MotionSequence::new(positions, confidence, frame_rate)
}

fn save_motion_csv(seq: &MotionSequence, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# frame_rate={}", seq.frame_rate()).map_err(|e| io_err(path, e))?;
    writeln!(w, "frame,joint,x,y,z,confidence").map_err(|e| io_err(path, e))?;
    for f in 0..seq.frames() {
        for j in 0..seq.joints_per_frame() {
            let p = seq.position(f, j);
            writeln!(w, "{f},{j},{},{},{},{}", p.x, p.y, p.z, seq.confidence(f, j))
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct MotionHeaderRecord {
    frame_rate: f64,
}

#[derive(Serialize, Deserialize)]
struct MotionFrameRecord {
    frame: usize,
    joints: Vec<[f64; 3]>,
    confidence: Vec<f64>,
}

fn load_motion_jsonl(path: &Path) -> Result<MotionSequence> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut frame_rate = DEFAULT_FRAME_RATE;
    let mut positions: Vec<Vec<Joint3>> = Vec::new();
    let mut confidence: Vec<Vec<f64>> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line_no = (idx + 1) as u64;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            if let Ok(header) = serde_json::from_str::<MotionHeaderRecord>(&line) {
                frame_rate = header.frame_rate;
                continue;
            }
        }
        let rec: MotionFrameRecord = serde_json::from_str(&line)
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        if rec.frame != positions.len() {
            return Err(parse_err(
                path,
                line_no,
                format!("frame index {} out of order", rec.frame),
            ));
        }
        if rec.confidence.len() != rec.joints.len() {
            return Err(parse_err(
                path,
                line_no,
                "confidence length must match joints".to_string(),
            ));
        }
        positions.push(rec.joints.into_iter().map(Joint3::from_array).collect());
        confidence.push(rec.confidence);
    }
    MotionSequence::new(positions, confidence, frame_rate)
}

fn save_motion_jsonl(seq: &MotionSequence, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let header = serde_json::to_string(&MotionHeaderRecord {
        frame_rate: seq.frame_rate(),
    })
    .expect("serialize");
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for f in 0..seq.frames() {
        let rec = MotionFrameRecord {
            frame: f,
            joints: seq.frame_positions(f).iter().map(|p| p.to_array()).collect(),
            confidence: seq.frame_confidence(f).to_vec(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec).expect("serialize"))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TrajectoryHeaderRecord {
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    frame: usize,
    t: [f64; 3],
    q: [f64; 4],
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut scale = 1.0;
    let mut samples = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line_no = (idx + 1) as u64;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            if let Ok(header) = serde_json::from_str::<TrajectoryHeaderRecord>(&line) {
                scale = header.scale;
                continue;
            }
        }
        let rec: PoseRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(path, line_no, e.to_string()))?;
        let rotation = Quaternion::from_stored(rec.q[0], rec.q[1], rec.q[2], rec.q[3])
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        let sample = PoseSample::new(rec.frame, Vec3::from_array(rec.t), rotation)
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        samples.push(sample);
    }
    // malformed files (non-increasing frames, bad scale) are parse errors
    Trajectory::new(samples, scale).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    if traj.scale() != 1.0 {
        let header = serde_json::to_string(&TrajectoryHeaderRecord {
            scale: traj.scale(),
        })
        .expect("serialize");
        writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    }
    for s in traj.samples() {
        let rec = PoseRecord {
            frame: s.frame_index,
            t: s.translation.to_array(),
            q: [s.rotation.x, s.rotation.y, s.rotation.z, s.rotation.w],
        };
        writeln!(w, "{}", serde_json::to_string(&rec).expect("serialize"))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// PGM grids
// ---------------------------------------------------------------------------

struct PgmRaw {
    width: usize,
    height: usize,
    maxval: u32,
    values: Vec<u32>,
}

fn load_pgm_raw(path: &Path) -> Result<PgmRaw> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let mut pos = 0usize;

    // Header tokens are separated by whitespace; `#` starts a comment.
    let mut next_token = |bytes: &[u8]| -> Result<String> {
        let mut tok = String::new();
        while pos < bytes.len() {
            let b = bytes[pos];
            if b == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                if !tok.is_empty() {
                    return Ok(tok);
                }
                pos += 1;
            } else {
                tok.push(b as char);
                pos += 1;
            }
        }
        if tok.is_empty() {
            Err(parse_err(path, 0, "unexpected end of PGM header"))
        } else {
            Ok(tok)
        }
    };

    let magic = next_token(&bytes)?;
    if magic != "P2" && magic != "P5" {
        return Err(parse_err(path, 1, format!("not a PGM file (magic `{magic}`)")));
    }
    let width: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad width"))?;
    let height: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad height"))?;
    let maxval: u32 = next_token(&bytes)?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(path, 1, format!("unsupported maxval {maxval}")));
    }

    let count = width * height;
    let mut values = Vec::with_capacity(count);
    if magic == "P2" {
        for _ in 0..count {
            let v: u32 = next_token(&bytes)?
                .parse()
                .map_err(|_| parse_err(path, 0, "bad P2 sample"))?;
            values.push(v);
        }
    } else {
        // single whitespace byte after maxval, then binary samples
        pos += 1;
        let wide = maxval > 255;
        let needed = count * if wide { 2 } else { 1 };
        if bytes.len() < pos + needed {
            return Err(parse_err(path, 0, "truncated P5 payload"));
        }
        for i in 0..count {
            let v = if wide {
                u32::from(bytes[pos + 2 * i]) << 8 | u32::from(bytes[pos + 2 * i + 1])
            } else {
                u32::from(bytes[pos + i])
            };
            values.push(v);
        }
    }
    if values.iter().any(|&v| v > maxval) {
        return Err(parse_err(path, 0, "sample exceeds maxval"));
    }
    Ok(PgmRaw {
        width,
        height,
        maxval,
        values,
    })
}

/// Loads a PGM as a [0, 1] grid (values divided by maxval). Used for masks.
pub fn load_mask_pgm(path: &Path) -> Result<ScalarGrid> {
    let raw = load_pgm_raw(path)?;
    let maxval = f64::from(raw.maxval);
    let values = raw.values.iter().map(|&v| f64::from(v) / maxval).collect();
    ScalarGrid::new(raw.width, raw.height, values)
}

/// Loads a PGM depth map: raw integer samples times the `<path>.scale`
/// sidecar factor (1.0 when the sidecar is absent).
pub fn load_depth_pgm(path: &Path) -> Result<ScalarGrid> {
    let raw = load_pgm_raw(path)?;
    let sidecar = sidecar_scale_path(path);
    let factor = if sidecar.exists() {
        let text = std::fs::read_to_string(&sidecar).map_err(|e| io_err(&sidecar, e))?;
        text.trim()
            .parse::<f64>()
            .map_err(|_| parse_err(&sidecar, 1, "bad sidecar scale"))?
    } else {
        1.0
    };
    let values = raw.values.iter().map(|&v| f64::from(v) * factor).collect();
    ScalarGrid::new(raw.width, raw.height, values)
}

fn sidecar_scale_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".scale");
    std::path::PathBuf::from(s)
}

/// Saves a [0, 1] grid as binary PGM with the given maxval (16-bit when
/// maxval > 255). Values are quantized to round(v * maxval).
pub fn save_mask_pgm(grid: &ScalarGrid, path: &Path, maxval: u32) -> Result<()> {
    grid.ensure_unit_range("save_mask_pgm")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Validation(format!("unsupported maxval {maxval}")));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{} {}\n{}\n", grid.width(), grid.height(), maxval)
        .map_err(|e| io_err(path, e))?;
    let wide = maxval > 255;
    for &v in grid.values() {
        let q = (v * f64::from(maxval)).round() as u32;
        if wide {
            w.write_all(&[(q >> 8) as u8, (q & 0xff) as u8])
                .map_err(|e| io_err(path, e))?;
        } else {
            w.write_all(&[q as u8]).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Saves a non-negative grid as a 16-bit PGM plus a `<path>.scale` sidecar
/// such that raw * sidecar reproduces the values (up to quantization).
pub fn save_depth_pgm(grid: &ScalarGrid, path: &Path) -> Result<()> {
    let max = grid.max_value();
    if max < 0.0 {
        return Err(Error::Validation("depth values must be >= 0".into()));
    }
    let maxval = 65535u32;
    let factor = if max > 0.0 { max / f64::from(maxval) } else { 1.0 };
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{} {}\n{}\n", grid.width(), grid.height(), maxval)
        .map_err(|e| io_err(path, e))?;
    for &v in grid.values() {
        let q = (v / factor).round() as u32;
        let q = q.min(maxval);
        w.write_all(&[(q >> 8) as u8, (q & 0xff) as u8])
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    let sidecar = sidecar_scale_path(path);
    std::fs::write(&sidecar, format!("{factor}\n")).map_err(|e| io_err(&sidecar, e))
}

// ---------------------------------------------------------------------------
// Raw f32 grids
// ---------------------------------------------------------------------------

/// Raw binary grid: u32-LE width, u32-LE height, then width*height f32-LE
/// values in row-major order.
pub fn load_grid_f32(path: &Path) -> Result<ScalarGrid> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 8 {
        return Err(parse_err(path, 0, "truncated grid header"));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let needed = 8 + width * height * 4;
    if bytes.len() != needed {
        return Err(parse_err(
            path,
            0,
            format!("expected {needed} bytes, got {}", bytes.len()),
        ));
    }
    let values = bytes[8..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    ScalarGrid::new(width, height, values)
}

pub fn save_grid_f32(grid: &ScalarGrid, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&(grid.width() as u32).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    w.write_all(&(grid.height() as u32).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    for &v in grid.values() {
        w.write_all(&(v as f32).to_le_bytes())
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Feature streams
// ---------------------------------------------------------------------------

pub fn load_feature_stream(path: &Path) -> Result<Vec<FeatureFrame>> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 8 {
        return Err(parse_err(path, 0, "truncated feature stream header"));
    }
    let p = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if p == 0 || d == 0 {
        return Err(parse_err(path, 0, "feature dims must be >= 1"));
    }
    let frame_bytes = p * d * 4;
    let payload = &bytes[8..];
    if payload.is_empty() || payload.len() % frame_bytes != 0 {
        return Err(parse_err(
            path,
            0,
            format!("payload not a multiple of {frame_bytes}-byte frames"),
        ));
    }
    payload
        .chunks_exact(frame_bytes)
        .map(|chunk| {
            let data: Vec<f64> = chunk
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
                .collect();
            FeatureFrame::new(Mat::from_vec(p, d, data)?)
        })
        .collect()
}

pub fn save_feature_stream(frames: &[FeatureFrame], path: &Path) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Validation("feature stream needs at least one frame".into()))?;
    let (p, d) = (first.tokens().rows(), first.tokens().cols());
    if frames
        .iter()
        .any(|f| f.tokens().rows() != p || f.tokens().cols() != d)
    {
        return Err(Error::Dimension(
            "all frames in a stream must share P and d".into(),
        ));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&(p as u32).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    w.write_all(&(d as u32).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    for frame in frames {
        for &v in frame.tokens().data() {
            w.write_all(&(v as f32).to_le_bytes())
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("streammotion-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn csv_zero_case() {
        let path = tmp("zero.csv");
        std::fs::write(&path, "frame,joint,x,y,z\n0,0,0,0,0\n1,0,0,0,0\n").unwrap();
        let seq = load_motion(&path, MotionFormat::Csv).unwrap();
        assert_eq!(seq.frames(), 2);
        assert_eq!(seq.joints_per_frame(), 1);
        assert_eq!(seq.position(1, 0), Joint3::ZERO);
        // missing confidence column defaults to 1
        assert_eq!(seq.confidence(0, 0), 1.0);
        assert_eq!(seq.frame_rate(), DEFAULT_FRAME_RATE);
    }

    #[test]
    fn csv_inconsistent_joint_count_is_schema_error() {
        let path = tmp("ragged.csv");
        std::fs::write(
            &path,
            "frame,joint,x,y,z\n0,0,0,0,0\n0,1,1,1,1\n1,0,0,0,0\n1,1,0,0,0\n1,2,0,0,0\n",
        )
        .unwrap();
        let err = load_motion(&path, MotionFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn csv_rejects_out_of_range_confidence() {
        let path = tmp("badconf.csv");
        std::fs::write(&path, "frame,joint,x,y,z,confidence\n0,0,0,0,0,1.5\n").unwrap();
        assert!(load_motion(&path, MotionFormat::Csv).is_err());
    }

    #[test]
    fn csv_parse_error_carries_line_number() {
        let path = tmp("badline.csv");
        std::fs::write(&path, "frame,joint,x,y,z\n0,0,0,0,oops\n").unwrap();
        match load_motion(&path, MotionFormat::Csv).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn trajectory_bad_norm_rejected() {
        let path = tmp("badq.jsonl");
        std::fs::write(
            &path,
            "{\"frame\":0,\"t\":[0,0,0],\"q\":[0,0,0,0.5]}\n",
        )
        .unwrap();
        assert!(load_trajectory(&path).is_err());
    }

    #[test]
    fn trajectory_non_increasing_frames_is_parse_error() {
        let path = tmp("reorder.jsonl");
        std::fs::write(
            &path,
            "{\"frame\":1,\"t\":[0,0,0],\"q\":[0,0,0,1]}\n{\"frame\":0,\"t\":[0,0,0],\"q\":[0,0,0,1]}\n",
        )
        .unwrap();
        assert!(matches!(
            load_trajectory(&path).unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn trajectory_single_identity_sample() {
        let path = tmp("single.jsonl");
        std::fs::write(&path, "{\"frame\":0,\"t\":[0,0,0],\"q\":[0,0,0,1]}\n").unwrap();
        let traj = load_trajectory(&path).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.scale(), 1.0);
        assert_eq!(traj.samples()[0].rotation, Quaternion::IDENTITY);
    }

    #[test]
    fn pgm_p2_and_p5_roundtrip() {
        let grid =
            ScalarGrid::new(3, 2, vec![0.0, 0.5, 1.0, 0.25, 0.75, 1.0]).unwrap();
        let path = tmp("mask.pgm");
        save_mask_pgm(&grid, &path, 65535).unwrap();
        let back = load_mask_pgm(&path).unwrap();
        for (a, b) in grid.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-4);
        }

        let p2 = tmp("ascii.pgm");
        std::fs::write(&p2, "P2\n# comment\n2 2\n255\n0 255\n128 64\n").unwrap();
        let g = load_mask_pgm(&p2).unwrap();
        assert_eq!(g.at(0, 1), 1.0);
        assert_eq!(g.at(0, 0), 0.0);
    }

    #[test]
    fn depth_pgm_sidecar_roundtrip() {
        let grid = ScalarGrid::new(2, 2, vec![0.0, 1.5, 3.0, 12.0]).unwrap();
        let path = tmp("depth.pgm");
        save_depth_pgm(&grid, &path).unwrap();
        let back = load_depth_pgm(&path).unwrap();
        for (a, b) in grid.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 12.0 / 65535.0 + 1e-9);
        }
    }

    #[test]
    fn grid_f32_roundtrip() {
        let grid = ScalarGrid::new(4, 3, (0..12).map(|i| i as f64 * 0.125).collect()).unwrap();
        let path = tmp("grid.bin");
        save_grid_f32(&grid, &path).unwrap();
        let back = load_grid_f32(&path).unwrap();
        assert_eq!(grid, back);
    }

    #[test]
    fn feature_stream_roundtrip() {
        let frames: Vec<FeatureFrame> = (0..3)
            .map(|i| {
                FeatureFrame::new(
                    Mat::from_vec(2, 4, (0..8).map(|k| (i * 8 + k) as f64 * 0.5).collect())
                        .unwrap(),
                )
                .unwrap()
            })
            .collect();
        let path = tmp("features.bin");
        save_feature_stream(&frames, &path).unwrap();
        let back = load_feature_stream(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in frames.iter().zip(&back) {
            assert_eq!(a.tokens(), b.tokens());
        }
    }
}
