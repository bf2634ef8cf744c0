use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory::Trajectory;

/// A contiguous run of observations of one pedestrian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub ped_id: String,
    pub start_frame: i64,
    pub points: Vec<Vec2>,
}

impl Track {
    pub fn trajectory(&self, dt: f64) -> Result<Trajectory> {
        Trajectory::new(self.points.clone(), dt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDataset {
    pub tracks: Vec<Track>,
    pub dt: f64,
    /// Distance between consecutive frame numbers in the source file.
    pub frame_step: i64,
    pub source: String,
}

impl TrajectoryDataset {
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }
}

/// Reads whitespace-separated `frame ped_id x y` rows.
pub fn load_tsv(path: &Path, dt: f64) -> Result<TrajectoryDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tsv(&text, dt, &path.display().to_string())
}

/// Groups rows per pedestrian in frame order and splits a pedestrian's rows
/// wherever consecutive frames are more than one frame step apart. The frame
/// step is the smallest positive frame difference seen for any pedestrian.
pub fn parse_tsv(text: &str, dt: f64, source: &str) -> Result<TrajectoryDataset> {
    let mut rows: BTreeMap<String, Vec<(i64, Vec2)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { path: source.to_string(), line: line_no, msg };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(perr(format!("expected 4 fields, found {}", fields.len())));
        }
        let frame: f64 = fields[0].parse().map_err(|_| perr(format!("bad frame '{}'", fields[0])))?;
        if !frame.is_finite() || frame.fract() != 0.0 {
            return Err(perr(format!("frame '{}' is not an integer", fields[0])));
        }
        let x: f64 = fields[2].parse().map_err(|_| perr(format!("bad x coordinate '{}'", fields[2])))?;
        let y: f64 = fields[3].parse().map_err(|_| perr(format!("bad y coordinate '{}'", fields[3])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(perr("non-finite coordinate".into()));
        }
        rows.entry(fields[1].to_string()).or_default().push((frame as i64, [x, y]));
    }

    let mut frame_step = i64::MAX;
    for obs in rows.values_mut() {
        obs.sort_by_key(|o| o.0);
        for w in obs.windows(2) {
            let d = w[1].0 - w[0].0;
            if d == 0 {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: 0,
                    msg: format!("duplicate frame {} for one pedestrian", w[0].0),
                });
            }
            frame_step = frame_step.min(d);
        }
    }
    if frame_step == i64::MAX {
        frame_step = 1;
    }

    let mut tracks = Vec::new();
    for (ped_id, obs) in rows {
        let mut cur = Track { ped_id: ped_id.clone(), start_frame: obs[0].0, points: vec![obs[0].1] };
        for w in obs.windows(2) {
            if w[1].0 - w[0].0 > frame_step {
                tracks.push(std::mem::replace(
                    &mut cur,
                    Track { ped_id: ped_id.clone(), start_frame: w[1].0, points: Vec::new() },
                ));
            }
            cur.points.push(w[1].1);
        }
        tracks.push(cur);
    }
    Ok(TrajectoryDataset { tracks, dt, frame_step, source: source.to_string() })
}

/// Writes the dataset back out in `frame ped_id x y` form, ordered by frame.
pub fn write_tsv(path: &Path, dataset: &TrajectoryDataset) -> Result<()> {
    let mut rows: Vec<(i64, &str, Vec2)> = Vec::new();
    for t in &dataset.tracks {
        for (k, &p) in t.points.iter().enumerate() {
            rows.push((t.start_frame + k as i64 * dataset.frame_step, &t.ped_id, p));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut out = String::new();
    for (frame, ped, p) in rows {
        writeln!(out, "{frame}\t{ped}\t{}\t{}", p[0], p[1]).expect("writing to a String");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
