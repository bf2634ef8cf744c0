//! Whitespace-separated candidate files for zero-shot filtering.
//!
//! ```text
//! # case head t x y
//! scene1 obs 0 1.0 2.0        observed past, at least two frames
//! scene1 obs 1 1.4 2.1
//! scene1 pose pelvis 1.4 2.1 0.95   optional joints of the last observed frame
//! scene1 0 0 1.8 2.2          candidate 0, future frame 0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{scale, sub, Vec2};
use crate::humanoid::{ObservableState, Pose};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCase {
    pub case: String,
    pub past: Trajectory,
    pub candidates: Vec<Trajectory>,
    pub pose: Option<Pose>,
}

impl CandidateCase {
    /// Observation at the last past frame; velocity from the last two frames.
    pub fn observable(&self) -> ObservableState {
        let pts = self.past.points();
        let v = scale(sub(pts[pts.len() - 1], pts[pts.len() - 2]), 1.0 / self.past.dt());
        match &self.pose {
            Some(p) => ObservableState::with_pose(p.clone(), v),
            None => ObservableState::pose_free(self.past.last(), v),
        }
    }
}

#[derive(Default)]
struct Raw {
    past: BTreeMap<i64, Vec2>,
    heads: BTreeMap<usize, BTreeMap<i64, Vec2>>,
    joints: BTreeMap<String, [f64; 3]>,
    first_line: usize,
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, msg: msg.into() }
}

fn frames_in_order(path: &str, line: usize, what: &str, rows: &BTreeMap<i64, Vec2>) -> Result<Vec<Vec2>> {
    let keys: Vec<i64> = rows.keys().copied().collect();
    if keys.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(parse_err(path, line, format!("{what} frames are not consecutive")));
    }
    Ok(rows.values().copied().collect())
}

pub fn parse_candidates(text: &str, dt: f64, source: &str) -> Result<Vec<CandidateCase>> {
    let mut cases: BTreeMap<String, Raw> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| parse_err(source, n, format!("not a number: {s}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(source, n, "non-finite coordinate"))
            }
        };
        let frame = |s: &str| -> Result<i64> { s.parse().map_err(|_| parse_err(source, n, format!("bad frame index: {s}"))) };
        if f.len() < 5 {
            return Err(parse_err(source, n, format!("expected at least 5 fields, got {}", f.len())));
        }
        let case = f[0].to_string();
        if !cases.contains_key(&case) {
            order.push(case.clone());
        }
        let raw = cases.entry(case).or_insert_with(|| Raw { first_line: n, ..Raw::default() });
        let dup = || parse_err(source, n, "duplicate row");
        match f[1] {
            "obs" if f.len() == 5 => {
                if raw.past.insert(frame(f[2])?, [num(f[3])?, num(f[4])?]).is_some() {
                    return Err(dup());
                }
            }
            "pose" if f.len() == 6 => {
                if raw.joints.insert(f[2].to_string(), [num(f[3])?, num(f[4])?, num(f[5])?]).is_some() {
                    return Err(dup());
                }
            }
            head if f.len() == 5 => {
                let k: usize = head
                    .parse()
                    .map_err(|_| parse_err(source, n, format!("head must be an index, 'obs' or 'pose', got {head}")))?;
                if raw.heads.entry(k).or_default().insert(frame(f[2])?, [num(f[3])?, num(f[4])?]).is_some() {
                    return Err(dup());
                }
            }
            _ => return Err(parse_err(source, n, format!("unexpected field count {} for '{}'", f.len(), f[1]))),
        }
    }

    let mut out = Vec::with_capacity(order.len());
    for name in order {
        let raw = cases.remove(&name).unwrap();
        let at = raw.first_line;
        if raw.past.len() < 2 {
            return Err(parse_err(source, at, format!("case {name}: need at least two observed frames")));
        }
        if raw.heads.is_empty() {
            return Err(parse_err(source, at, format!("case {name}: no candidates")));
        }
        if raw.heads.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(parse_err(source, at, format!("case {name}: head indices must be 0..K")));
        }
        let past = Trajectory::new(frames_in_order(source, at, "observed", &raw.past)?, dt)?;
        let mut candidates = Vec::with_capacity(raw.heads.len());
        for (k, rows) in &raw.heads {
            let pts = frames_in_order(source, at, &format!("head {k}"), rows)?;
            candidates.push(Trajectory::new(pts, dt).map_err(|e| parse_err(source, at, e.to_string()))?);
        }
        if candidates.iter().any(|c| c.len() != candidates[0].len()) {
            return Err(parse_err(source, at, format!("case {name}: candidates differ in length")));
        }
        let pose = if raw.joints.is_empty() {
            None
        } else {
            Some(Pose::new(raw.joints).map_err(|e| parse_err(source, at, e.to_string()))?)
        };
        out.push(CandidateCase { case: name, past, candidates, pose });
    }
    if out.is_empty() {
        return Err(parse_err(source, 0, "no cases"));
    }
    Ok(out)
}

pub fn load_candidates(path: &Path, dt: f64) -> Result<Vec<CandidateCase>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_candidates(&text, dt, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "# case head t x y
a obs 0 0.0 0.0
a obs 1 0.4 0.0
a 0 0 0.8 0.0
a 0 1 1.2 0.0
a 1 0 0.8 0.1
a 1 1 1.2 0.3
b obs 5 1.0 1.0
b obs 6 1.0 1.4
b 0 7 1.0 1.8
b 0 8 1.0 2.2
";

    #[test]
    fn parses_cases_in_file_order() {
        let c = parse_candidates(TEXT, 0.4, "t").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].case, "a");
        assert_eq!(c[0].candidates.len(), 2);
        assert_eq!(c[1].candidates[0].points(), &[[1.0, 1.8], [1.0, 2.2]]);
        let o = c[1].observable();
        assert!((o.root_velocity[1] - 1.0).abs() < 1e-12);
        assert_eq!(o.root, [1.0, 1.4]);
    }

    #[test]
    fn missing_past_is_parse_error() {
        let e = parse_candidates("a 0 0 1 1\na 0 1 1 2\n", 0.4, "t").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn bad_number_reports_line() {
        let e = parse_candidates("a obs 0 0 0\na obs 1 x 0\n", 0.4, "t").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn gap_in_heads_rejected() {
        let text = "a obs 0 0 0\na obs 1 0 1\na 0 0 0 2\na 0 1 0 3\na 2 0 0 2\na 2 1 0 3\n";
        assert!(parse_candidates(text, 0.4, "t").is_err());
    }

    #[test]
    fn unequal_lengths_rejected() {
        let text = "a obs 0 0 0\na obs 1 0 1\na 0 0 0 2\na 0 1 0 3\na 1 0 0 2\na 1 1 0 3\na 1 2 0 4\n";
        assert!(parse_candidates(text, 0.4, "t").is_err());
    }
}
