//! C interface to the fxsim engine.
//!
//! Scenarios and finished runs are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`FxStatus`]; on failure a message for the calling thread is available
//! from [`fx_last_error`]. Angles cross the boundary in degrees, arm lengths
//! in mm and chassis lengths in m.

use fxsim::kinematics::{EndEffectorPose, JointAngles, KinematicsError, LimitCheck};
use fxsim::mission::MissionError;
use fxsim::sim::{self, MetricsReport, ScenarioConfig, SimError, SimOutput};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ValidationError = 4,
    Unreachable = 5,
    JointLimit = 6,
    MissionError = 7,
    SimulationError = 8,
    IoError = 9,
    Panic = 10,
}

/// Scenario configuration.
pub struct FxScenario {
    config: ScenarioConfig,
}

/// A finished mission run: log, report and plan.
pub struct FxRun {
    output: SimOutput,
}

/// Report figures of a run. `convergence_time` is NaN when the chassis
/// errors never settle inside the band.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FxMetrics {
    pub ee_error_avg: [f64; 3],
    pub ee_error_max: [f64; 3],
    pub chassis_error_max: [f64; 3],
    pub convergence_time: f64,
    pub peak_speed: f64,
    pub torque_chatter: [f64; 4],
    pub stage1_time: f64,
    pub top_spray_time: f64,
    pub stage2_time: f64,
    pub total_time: f64,
    pub discharge_time: f64,
    pub sweep_samples: u64,
    pub fires_serviced: u32,
    pub within_discharge_time: bool,
}

impl From<&MetricsReport> for FxMetrics {
    fn from(r: &MetricsReport) -> Self {
        Self {
            ee_error_avg: r.ee_error_avg,
            ee_error_max: r.ee_error_max,
            chassis_error_max: r.chassis_error_max,
            convergence_time: r.convergence_time.unwrap_or(f64::NAN),
            peak_speed: r.peak_speed,
            torque_chatter: r.torque_chatter,
            stage1_time: r.stage1_time,
            top_spray_time: r.top_spray_time,
            stage2_time: r.stage2_time,
            total_time: r.total_time,
            discharge_time: r.discharge_time,
            sweep_samples: r.sweep_samples as u64,
            fires_serviced: r.fires_serviced as u32,
            within_discharge_time: r.within_discharge_time,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FxStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::Parse(_) => FxStatus::ParseError,
            SimError::Validation { .. } => FxStatus::ValidationError,
            SimError::Io(_) => FxStatus::IoError,
            SimError::EmptyLog => FxStatus::InvalidArgument,
            SimError::Mission(_) => FxStatus::MissionError,
            SimError::Dynamics { .. } | SimError::Chassis { .. } => FxStatus::SimulationError,
        };
        Failure(status, e.to_string())
    }
}

impl From<KinematicsError> for Failure {
    fn from(e: KinematicsError) -> Self {
        let status = match e {
            KinematicsError::Unreachable { .. } => FxStatus::Unreachable,
            KinematicsError::JointLimitViolation(_) => FxStatus::JointLimit,
        };
        Failure(status, e.to_string())
    }
}

impl From<MissionError> for Failure {
    fn from(e: MissionError) -> Self {
        Failure(FxStatus::MissionError, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FxStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status and a thread-local
/// message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FxStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {message}"));
            FxStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FxStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn scenario_or_default(s: *const FxScenario) -> ScenarioConfig {
    if s.is_null() {
        ScenarioConfig::default()
    } else {
        (*s).config.clone()
    }
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_scenario(config: ScenarioConfig) -> *mut FxScenario {
    Box::into_raw(Box::new(FxScenario { config }))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New scenario with every key at its default.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn fx_scenario_default(out: *mut *mut FxScenario) -> FxStatus {
    guard(|| put(out, boxed_scenario(ScenarioConfig::default()), "out"))
}

/// Scenario parsed from TOML text and validated.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fx_scenario_from_toml(toml: *const c_char, out: *mut *mut FxScenario) -> FxStatus {
    guard(|| {
        let config = sim::parse_scenario(text(toml, "toml")?)?;
        config.validate()?;
        put(out, boxed_scenario(config), "out")
    })
}

/// Scenario loaded from a TOML file and validated.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fx_scenario_load(path: *const c_char, out: *mut *mut FxScenario) -> FxStatus {
    guard(|| {
        let config = sim::load_scenario(text(path, "path")?)?;
        config.validate()?;
        put(out, boxed_scenario(config), "out")
    })
}

/// The scenario as TOML; free the result with [`fx_string_free`].
///
/// # Safety
/// `scenario` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fx_scenario_to_toml(scenario: *const FxScenario, out: *mut *mut c_char) -> FxStatus {
    guard(|| {
        if scenario.is_null() {
            return Err(null("scenario"));
        }
        let toml = CString::new((*scenario).config.to_toml()).expect("TOML has no NULs");
        put(out, toml.into_raw(), "out")
    })
}

/// # Safety
/// `scenario` must come from this library and not have been freed. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn fx_scenario_free(scenario: *mut FxScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Joint angles (degrees) reaching tool position `x, y, z` (mm, arm base
/// frame) with pitch `phi` (degrees). A NULL scenario uses the defaults.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `joints_deg` must point to
/// four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fx_ik(
    scenario: *const FxScenario,
    x: f64,
    y: f64,
    z: f64,
    phi_deg: f64,
    joints_deg: *mut f64,
) -> FxStatus {
    guard(|| {
        if joints_deg.is_null() {
            return Err(null("joints_deg"));
        }
        let config = scenario_or_default(scenario);
        let pose = EndEffectorPose::new(x, y, z, phi_deg.to_radians());
        let q = config.manipulator().inverse_kinematics(&pose, config.tool())?;
        ptr::copy_nonoverlapping(q.to_degrees().as_ptr(), joints_deg, 4);
        Ok(())
    })
}

/// Tool pose `[x, y, z, phi]` (mm, degrees) for joint angles in degrees.
/// Joint limits are enforced.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `joints_deg` must point to
/// four readable doubles and `pose` to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fx_fk(scenario: *const FxScenario, joints_deg: *const f64, pose: *mut f64) -> FxStatus {
    guard(|| {
        if joints_deg.is_null() {
            return Err(null("joints_deg"));
        }
        if pose.is_null() {
            return Err(null("pose"));
        }
        let config = scenario_or_default(scenario);
        let mut q = [0.0; 4];
        ptr::copy_nonoverlapping(joints_deg, q.as_mut_ptr(), 4);
        let p = config
            .manipulator()
            .forward_kinematics(&JointAngles::from_degrees(q), config.tool(), LimitCheck::Enforce)?;
        let values = [p.x, p.y, p.z, p.phi.to_degrees()];
        ptr::copy_nonoverlapping(values.as_ptr(), pose, 4);
        Ok(())
    })
}

/// Minimum and maximum working radius (mm) over a θ2/θ3 grid of
/// `resolution_deg`.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `r_min` and `r_max` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fx_workspace_radii(
    scenario: *const FxScenario,
    resolution_deg: f64,
    r_min: *mut f64,
    r_max: *mut f64,
) -> FxStatus {
    guard(|| {
        if !(resolution_deg > 0.0 && resolution_deg.is_finite()) {
            return Err(Failure(FxStatus::InvalidArgument, "resolution must be positive".into()));
        }
        let config = scenario_or_default(scenario);
        let w = config.manipulator().workspace_analysis(resolution_deg.to_radians());
        put(r_min, w.r_min, "r_min")?;
        put(r_max, w.r_max, "r_max")
    })
}

/// Plan summary (circuit, stops, commands and timing) as JSON; free the
/// result with [`fx_string_free`].
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fx_plan_json(scenario: *const FxScenario, out: *mut *mut c_char) -> FxStatus {
    guard(|| {
        let plan = scenario_or_default(scenario).plan()?;
        let json = serde_json::to_string_pretty(&sim::plan_summary(&plan)).expect("plan serializes");
        put(out, CString::new(json).expect("JSON has no NULs").into_raw(), "out")
    })
}

/// Runs the full mission.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fx_simulate(scenario: *const FxScenario, out: *mut *mut FxRun) -> FxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let output = sim::run_mission(&scenario_or_default(scenario))?;
        put(out, Box::into_raw(Box::new(FxRun { output })), "out")
    })
}

/// # Safety
/// `run` must come from [`fx_simulate`] and not have been freed. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn fx_run_free(run: *mut FxRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of logged samples, or 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fx_run_row_count(run: *const FxRun) -> usize {
    if run.is_null() {
        0
    } else {
        (*run).output.log.rows.len()
    }
}

/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fx_run_metrics(run: *const FxRun, out: *mut FxMetrics) -> FxStatus {
    guard(|| {
        if run.is_null() {
            return Err(null("run"));
        }
        put(out, FxMetrics::from(&(*run).output.report), "out")
    })
}

/// The mission log as CSV text; free the result with [`fx_string_free`].
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fx_run_log_csv(run: *const FxRun, out: *mut *mut c_char) -> FxStatus {
    guard(|| {
        if run.is_null() {
            return Err(null("run"));
        }
        let csv = CString::new((*run).output.log.to_csv_string()).expect("CSV has no NULs");
        put(out, csv.into_raw(), "out")
    })
}

/// Writes the log, metrics and plot tables into `dir`, creating it.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fx_run_export(run: *const FxRun, dir: *const c_char) -> FxStatus {
    guard(|| {
        if run.is_null() {
            return Err(null("run"));
        }
        let out = &(*run).output;
        sim::export(&out.log, &out.report, text(dir, "dir")?)?;
        Ok(())
    })
}

/// Recomputes the report from a log file. A NULL scenario supplies the
/// default error band and discharge time.
///
/// # Safety
/// `path` must be a NUL-terminated string, `scenario` NULL or a live
/// handle, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fx_metrics_from_csv(
    path: *const c_char,
    scenario: *const FxScenario,
    out: *mut FxMetrics,
) -> FxStatus {
    guard(|| {
        let log = sim::SimLog::load_csv(text(path, "path")?)?;
        let report = sim::compute_metrics(&log, &scenario_or_default(scenario).metrics_params())?;
        put(out, FxMetrics::from(&report), "out")
    })
}
