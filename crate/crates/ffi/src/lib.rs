//! C interface to the plausibility surrogate, the multi-head predictor and the
//! candidate filter.
//!
//! Models are opaque handles created by the `*_load` functions and released
//! with the matching `*_free`. Every fallible call returns a [`TpStatus`]; on
//! failure, [`tp_last_error`] describes the most recent error on the calling
//! thread. Trajectories are flat `x0 y0 x1 y1 ...` arrays of `f64`; poses are
//! flat `x y z` triples in the joint order reported by the model.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trajplaus::filter::locoval_filter;
use trajplaus::locoval::LocoValModel;
use trajplaus::predictor::{PredictionSet, PredictorCheckpoint, PredictorModel};
use trajplaus::{Error, ObservableState, Pose, Trajectory};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Shape = 5,
    Config = 6,
    Numeric = 7,
    Panic = 8,
}

impl From<&Error> for TpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => TpStatus::Io,
            Error::Parse { .. } | Error::Json(_) => TpStatus::Parse,
            Error::Shape { .. } => TpStatus::Shape,
            Error::Config(_) => TpStatus::Config,
            Error::NonFinite { .. } | Error::Numeric(_) => TpStatus::Numeric,
            _ => TpStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: TpStatus, msg: impl Into<String>) -> TpStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), TpStatus>) -> TpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(TpStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> TpStatus {
    let status = TpStatus::from(&e);
    fail(status, e.to_string())
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Opaque plausibility surrogate.
pub struct TpLocoVal {
    model: LocoValModel,
    joint_names: Vec<CString>,
}

/// Opaque multi-head predictor.
pub struct TpPredictor {
    model: PredictorModel,
    joint_names: Vec<CString>,
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, TpStatus> {
    if path.is_null() {
        return Err(fail(TpStatus::NullPointer, "path is null"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| fail(TpStatus::InvalidArgument, "path is not valid UTF-8"))?;
    Ok(Path::new(s))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], TpStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TpStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, TpStatus> {
    p.as_mut().ok_or_else(|| fail(TpStatus::NullPointer, format!("{what} is null")))
}

fn names(list: &[String]) -> Vec<CString> {
    list.iter().map(|n| CString::new(n.as_str()).unwrap_or_default()).collect()
}

fn trajectory(xy: &[f64], dt: f64) -> Result<Trajectory, TpStatus> {
    if xy.len() % 2 != 0 {
        return Err(fail(TpStatus::Shape, "trajectory array length must be even"));
    }
    Trajectory::new(xy.chunks_exact(2).map(|c| [c[0], c[1]]).collect(), dt).map_err(lib_err)
}

fn pose(joints: &[f64], names: &[CString]) -> Result<Option<Pose>, TpStatus> {
    if joints.is_empty() {
        return Ok(None);
    }
    if joints.len() != 3 * names.len() {
        return Err(fail(
            TpStatus::Shape,
            format!("expected {} joint coordinates, got {}", 3 * names.len(), joints.len()),
        ));
    }
    let map = names
        .iter()
        .zip(joints.chunks_exact(3))
        .map(|(n, c)| (n.to_string_lossy().into_owned(), [c[0], c[1], c[2]]))
        .collect();
    Pose::new(map).map(Some).map_err(lib_err)
}

fn joint_name(names: &[CString], index: usize) -> *const c_char {
    match names.get(index) {
        Some(n) => n.as_ptr(),
        None => {
            set_error(format!("joint index {index} out of range"));
            ptr::null()
        }
    }
}

/// Loads a surrogate checkpoint. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_load(path: *const c_char, out: *mut *mut TpLocoVal) -> TpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let model = LocoValModel::load(path_arg(path)?).map_err(lib_err)?;
        let joint_names = names(&model.layout().joint_names);
        *out = Box::into_raw(Box::new(TpLocoVal { model, joint_names }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`tp_locoval_load`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_free(h: *mut TpLocoVal) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of future points the surrogate expects, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_future_len(h: *const TpLocoVal) -> usize {
    h.as_ref().map_or(0, |h| h.model.layout().t_f)
}

/// Number of joints in a pose, or 0 when the surrogate ignores poses.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_joint_count(h: *const TpLocoVal) -> usize {
    h.as_ref().map_or(0, |h| h.joint_names.len())
}

/// Name of joint `index`, owned by the handle; null when out of range.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_joint_name(h: *const TpLocoVal, index: usize) -> *const c_char {
    match h.as_ref() {
        Some(h) => joint_name(&h.joint_names, index),
        None => ptr::null(),
    }
}

/// Observation at the current frame: root position, root velocity and an
/// optional pose (`joints` may be null with `n_joint_coords` 0).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TpObservation {
    pub root_x: f64,
    pub root_y: f64,
    pub vel_x: f64,
    pub vel_y: f64,
    pub joints: *const f64,
    pub n_joint_coords: usize,
}

unsafe fn observation(obs: *const TpObservation, names: &[CString]) -> Result<ObservableState, TpStatus> {
    let o = obs.as_ref().ok_or_else(|| fail(TpStatus::NullPointer, "observation is null"))?;
    let joints = pose(slice_arg(o.joints, o.n_joint_coords, "joints")?, names)?;
    Ok(ObservableState { root: [o.root_x, o.root_y], joints, root_velocity: [o.vel_x, o.vel_y] })
}

/// Scores one future trajectory of `n_points` points.
///
/// # Safety
/// `xy` must hold `2 * n_points` values; `obs` and `score` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_score(
    h: *const TpLocoVal,
    xy: *const f64,
    n_points: usize,
    dt: f64,
    obs: *const TpObservation,
    score: *mut f64,
) -> TpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| fail(TpStatus::NullPointer, "handle is null"))?;
        let score = out_arg(score, "score")?;
        let traj = trajectory(slice_arg(xy, 2 * n_points, "xy")?, dt)?;
        let obs = observation(obs, &h.joint_names)?;
        *score = h.model.score(&traj, &obs).map_err(lib_err)?;
        Ok(())
    })
}

/// Scores `k` candidates of `n_points` points each (stored back to back) and
/// keeps those scoring at least `lambda`, or the best one when none do.
/// `keep[i]` is set to 1 for kept candidates and 0 otherwise; `scores` may be null.
///
/// # Safety
/// `xy` must hold `2 * k * n_points` values, `keep` `k` bytes and `scores`
/// (when non-null) `k` values.
#[no_mangle]
pub unsafe extern "C" fn tp_locoval_filter(
    h: *const TpLocoVal,
    xy: *const f64,
    k: usize,
    n_points: usize,
    dt: f64,
    obs: *const TpObservation,
    lambda: f64,
    keep: *mut u8,
    scores: *mut f64,
    fallback_used: *mut bool,
) -> TpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| fail(TpStatus::NullPointer, "handle is null"))?;
        if keep.is_null() {
            return Err(fail(TpStatus::NullPointer, "keep is null"));
        }
        let flat = slice_arg(xy, 2 * k * n_points, "xy")?;
        let obs = observation(obs, &h.joint_names)?;
        let trajectories = flat
            .chunks_exact(2 * n_points.max(1))
            .map(|c| trajectory(c, dt))
            .collect::<Result<Vec<_>, _>>()?;
        let set = PredictionSet { anchor: obs.root, trajectories };
        let r = locoval_filter(&h.model, &set, &obs, lambda).map_err(lib_err)?;
        let keep = std::slice::from_raw_parts_mut(keep, k);
        keep.fill(0);
        for c in &r.kept {
            keep[c.head] = 1;
        }
        if !scores.is_null() {
            let out = std::slice::from_raw_parts_mut(scores, k);
            for c in r.kept.iter().chain(&r.rejected) {
                out[c.head] = c.score;
            }
        }
        if let Some(f) = fallback_used.as_mut() {
            *f = r.fallback_used;
        }
        Ok(())
    })
}

/// Loads a predictor checkpoint. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_load(path: *const c_char, out: *mut *mut TpPredictor) -> TpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ck = PredictorCheckpoint::load(path_arg(path)?).map_err(lib_err)?;
        let model = ck.to_model().map_err(lib_err)?;
        let joint_names = if model.layout().include_pose { names(&model.layout().joint_names) } else { Vec::new() };
        *out = Box::into_raw(Box::new(TpPredictor { model, joint_names }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`tp_predictor_load`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_free(h: *mut TpPredictor) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of heads, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_heads(h: *const TpPredictor) -> usize {
    h.as_ref().map_or(0, |h| h.model.k())
}

/// Number of observed points the predictor consumes.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_past_len(h: *const TpPredictor) -> usize {
    h.as_ref().map_or(0, |h| h.model.layout().t_p)
}

/// Number of points in each predicted future.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_future_len(h: *const TpPredictor) -> usize {
    h.as_ref().map_or(0, |h| h.model.layout().t_f)
}

/// Number of joints the predictor expects, or 0 when it ignores poses.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_joint_count(h: *const TpPredictor) -> usize {
    h.as_ref().map_or(0, |h| h.joint_names.len())
}

/// Name of joint `index`, owned by the handle; null when out of range.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_joint_name(h: *const TpPredictor, index: usize) -> *const c_char {
    match h.as_ref() {
        Some(h) => joint_name(&h.joint_names, index),
        None => ptr::null(),
    }
}

/// Predicts `heads * future_len` points from `n_past` observed points and,
/// when the model uses poses, the pose at the last observed frame.
///
/// # Safety
/// `past` must hold `2 * n_past` values, `joints` `n_joint_coords` values (or
/// be null with 0) and `out` `2 * heads * future_len` values.
#[no_mangle]
pub unsafe extern "C" fn tp_predictor_predict(
    h: *const TpPredictor,
    past: *const f64,
    n_past: usize,
    dt: f64,
    joints: *const f64,
    n_joint_coords: usize,
    out: *mut f64,
    out_len: usize,
) -> TpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| fail(TpStatus::NullPointer, "handle is null"))?;
        let l = h.model.layout();
        let need = 2 * h.model.k() * l.t_f;
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        if out_len != need {
            return Err(fail(TpStatus::Shape, format!("output buffer needs {need} values, got {out_len}")));
        }
        let past = trajectory(slice_arg(past, 2 * n_past, "past")?, dt)?;
        let pose = pose(slice_arg(joints, n_joint_coords, "joints")?, &h.joint_names)?;
        let set = h.model.predict(&past, pose.as_ref()).map_err(lib_err)?;
        let out = std::slice::from_raw_parts_mut(out, need);
        for (dst, p) in out.chunks_exact_mut(2).zip(set.trajectories.iter().flat_map(|t| t.points())) {
            dst.copy_from_slice(p);
        }
        Ok(())
    })
}
