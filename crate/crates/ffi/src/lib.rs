//! C ABI over the layerpaint planner.
//!
//! Objects are opaque handles created by `lp_*_create`/`lp_*_load` and
//! released with the matching `lp_*_free`. Every fallible call returns an
//! [`LpStatus`]; on failure [`lp_last_error_message`] describes the cause for
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use layerpaint::ordering::GridDims;
use layerpaint::palette::Palette;
use layerpaint::robotplan::{export_plan, Arm};
use layerpaint::{
    build_palette, generate_all, layered_depth_plan, load_depth, load_image, load_labels,
    map_to_canvas, render_plan, schedule_bimanual, split_canvas, ArmSchedule, BinMode,
    DepthConvention, DepthMap, Error, Image, PlanParams, RasterMode, Segmentation, StrokeParams,
    StrokePlan, Timing,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InputError = 4,
    OutputError = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpDepthConvention {
    NearerHigh = 0,
    NearerLow = 1,
}

/// Planning and stroke parameters. Obtain defaults from
/// [`lp_plan_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpPlanOptions {
    pub strokes: u64,
    /// Palette size; 0 leaves colors unrestricted.
    pub colors: u32,
    pub width_px: u32,
    pub bins: u32,
    pub grid_rows: u32,
    pub grid_cols: u32,
    /// Depth smoothing sigma; negative selects diagonal / 200.
    pub sigma: f64,
    /// Non-zero selects equal-population bins.
    pub equal_population: u8,
    pub min_points: u32,
    pub max_points: u32,
    pub color_tolerance: f64,
    /// Non-zero renders with coverage blending.
    pub antialias: u8,
    pub rng_seed: u64,
    pub kmeans_iters: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpStrokeInfo {
    pub prediction_id: u32,
    pub bin_index: u32,
    pub frame_index: u32,
    pub width_px: u32,
    pub r: u8,
    pub g: u8,
    pub b: u8,
    /// Palette index, or -1 for unrestricted color.
    pub color_index: i32,
    pub point_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpTiming {
    pub pen_speed_mm_s: f64,
    pub travel_speed_mm_s: f64,
    pub tool_change_s: f64,
}

/// Target image, depth map and segmentation.
pub struct LpScene {
    image: Image,
    depth: DepthMap,
    seg: Segmentation,
}

/// An ordered stroke plan.
pub struct LpPlan {
    plan: StrokePlan,
}

/// A two-arm drawing schedule.
pub struct LpSchedule {
    schedule: ArmSchedule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> LpStatus {
    if err.is_output() {
        LpStatus::OutputError
    } else if matches!(err, Error::InvalidParameter(_)) {
        LpStatus::InvalidArgument
    } else {
        LpStatus::InputError
    }
}

struct Failure(LpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LpStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure(LpStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure(LpStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(LpStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(LpStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn lp_plan_options_default() -> LpPlanOptions {
    let s = StrokeParams::default();
    let p = PlanParams::default();
    LpPlanOptions {
        strokes: 2000,
        colors: 0,
        width_px: s.width_px,
        bins: p.bin_count as u32,
        grid_rows: p.grid.rows,
        grid_cols: p.grid.cols,
        sigma: -1.0,
        equal_population: 0,
        min_points: s.min_points as u32,
        max_points: s.max_points as u32,
        color_tolerance: s.color_tolerance,
        antialias: 0,
        rng_seed: 0,
        kmeans_iters: 50,
    }
}

#[no_mangle]
pub extern "C" fn lp_timing_default() -> LpTiming {
    let t = Timing::default();
    LpTiming {
        pen_speed_mm_s: t.pen_speed_mm_s,
        travel_speed_mm_s: t.travel_speed_mm_s,
        tool_change_s: t.tool_change_s,
    }
}

/// Loads a scene from a PNG image, a 16-bit PGM depth map, a label PNG and
/// its JSON metadata.
///
/// # Safety
/// Path arguments must be null or NUL-terminated strings; `out` must be null
/// or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lp_scene_load(
    image_path: *const c_char,
    depth_path: *const c_char,
    labels_path: *const c_char,
    meta_path: *const c_char,
    convention: LpDepthConvention,
    out: *mut *mut LpScene,
) -> LpStatus {
    guard(|| {
        out_arg(out, "out")?;
        let image = load_image(&path_arg(image_path, "image_path")?)?;
        let conv = match convention {
            LpDepthConvention::NearerHigh => DepthConvention::NearerHigh,
            LpDepthConvention::NearerLow => DepthConvention::NearerLow,
        };
        let depth = load_depth(&path_arg(depth_path, "depth_path")?, conv)?;
        let seg = load_labels(&path_arg(labels_path, "labels_path")?, &path_arg(meta_path, "meta_path")?)?;
        depth.check_dims(&image)?;
        seg.check_dims(&image)?;
        *out = Box::into_raw(Box::new(LpScene { image, depth, seg }));
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a handle from [`lp_scene_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_scene_free(scene: *mut LpScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Width and height of a scene.
///
/// # Safety
/// `scene` must be a live handle; `width` and `height` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_scene_size(scene: *const LpScene, width: *mut u32, height: *mut u32) -> LpStatus {
    guard(|| {
        let s = ref_arg(scene, "scene")?;
        out_arg(width, "width")?;
        out_arg(height, "height")?;
        *width = s.image.width;
        *height = s.image.height;
        Ok(())
    })
}

fn convert_options(o: &LpPlanOptions) -> Result<(PlanParams, StrokeParams), Failure> {
    if o.strokes == 0 {
        return Err(Failure(LpStatus::InvalidArgument, "stroke count must be >= 1".into()));
    }
    if o.bins == 0 || o.grid_rows == 0 || o.grid_cols == 0 {
        return Err(Failure(LpStatus::InvalidArgument, "bins and grid dimensions must be >= 1".into()));
    }
    let plan = PlanParams {
        sigma: (o.sigma >= 0.0).then_some(o.sigma),
        bin_count: o.bins as usize,
        grid: GridDims { rows: o.grid_rows, cols: o.grid_cols },
        bin_mode: if o.equal_population != 0 { BinMode::EqualPopulation } else { BinMode::EqualWidth },
        interleave_first_k: None,
    };
    let stroke = StrokeParams {
        width_px: o.width_px,
        min_points: o.min_points as usize,
        max_points: o.max_points as usize,
        color_tolerance: o.color_tolerance,
        raster: if o.antialias != 0 { RasterMode::Antialiased } else { RasterMode::Hard },
    };
    stroke.validate()?;
    Ok((plan, stroke))
}

/// Plans and grows strokes for a scene.
///
/// # Safety
/// `scene` must be a live handle, `options` null or a valid pointer (null
/// selects defaults), and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_create(
    scene: *const LpScene,
    options: *const LpPlanOptions,
    out: *mut *mut LpPlan,
) -> LpStatus {
    guard(|| {
        let s = ref_arg(scene, "scene")?;
        out_arg(out, "out")?;
        let o = options.as_ref().copied().unwrap_or_else(|| lp_plan_options_default());
        let (plan_params, stroke_params) = convert_options(&o)?;
        let palette: Option<Palette> = match o.colors {
            0 => None,
            k => Some(build_palette(&s.image, k as usize, o.rng_seed, o.kmeans_iters as usize)?),
        };
        let seeds = layered_depth_plan(&s.image, &s.seg, &s.depth, o.strokes, &plan_params)?;
        let plan = generate_all(&seeds, &s.image, palette.as_ref(), stroke_params)?;
        *out = Box::into_raw(Box::new(LpPlan { plan }));
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or a handle from [`lp_plan_create`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_free(plan: *mut LpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Number of strokes in a plan, 0 for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_stroke_count(plan: *const LpPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.strokes.len())
}

/// Describes stroke `index`.
///
/// # Safety
/// `plan` must be a live handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_stroke(plan: *const LpPlan, index: usize, info: *mut LpStrokeInfo) -> LpStatus {
    guard(|| {
        let p = ref_arg(plan, "plan")?;
        out_arg(info, "info")?;
        let s = p.plan.strokes.get(index).ok_or_else(|| {
            Failure(LpStatus::OutOfRange, format!("stroke {index} out of range"))
        })?;
        *info = LpStrokeInfo {
            prediction_id: s.prediction_id,
            bin_index: s.bin_index as u32,
            frame_index: s.frame_index as u32,
            width_px: s.width_px,
            r: s.color[0],
            g: s.color[1],
            b: s.color[2],
            color_index: s.color_index.map_or(-1, |c| c as i32),
            point_count: s.points.len(),
        };
        Ok(())
    })
}

/// Copies up to `capacity` points of stroke `index` as interleaved `x, y`
/// pairs into `xy` (which must hold `2 * capacity` doubles) and stores the
/// number copied in `written`.
///
/// # Safety
/// `plan` must be a live handle, `xy` valid for `2 * capacity` writes and
/// `written` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_stroke_points(
    plan: *const LpPlan,
    index: usize,
    xy: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> LpStatus {
    guard(|| {
        let p = ref_arg(plan, "plan")?;
        out_arg(written, "written")?;
        let s = p.plan.strokes.get(index).ok_or_else(|| {
            Failure(LpStatus::OutOfRange, format!("stroke {index} out of range"))
        })?;
        let n = s.points.len().min(capacity);
        if n > 0 {
            out_arg(xy, "xy")?;
            let buf = std::slice::from_raw_parts_mut(xy, 2 * n);
            for (k, pt) in s.points.iter().take(n).enumerate() {
                buf[2 * k] = pt[0];
                buf[2 * k + 1] = pt[1];
            }
        }
        *written = n;
        Ok(())
    })
}

/// Writes the plan as JSON Lines.
///
/// # Safety
/// `plan` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_write_jsonl(plan: *const LpPlan, path: *const c_char) -> LpStatus {
    guard(|| {
        let p = ref_arg(plan, "plan")?;
        p.plan.write_jsonl(&path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Renders `painting.png`, `frames.txt` and a `frameNNNN.png` snapshot for
/// each of the `count` ascending stroke counts in `snapshots`.
///
/// # Safety
/// `plan` must be a live handle, `snapshots` valid for `count` reads (or
/// null when `count` is 0) and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lp_plan_render(
    plan: *const LpPlan,
    snapshots: *const usize,
    count: usize,
    out_dir: *const c_char,
    antialias: u8,
) -> LpStatus {
    guard(|| {
        let p = ref_arg(plan, "plan")?;
        let snaps: &[usize] = if count == 0 {
            &[]
        } else {
            ref_arg(snapshots, "snapshots")?;
            std::slice::from_raw_parts(snapshots, count)
        };
        let mode = if antialias != 0 { RasterMode::Antialiased } else { RasterMode::Hard };
        render_plan(&p.plan, snaps, &path_arg(out_dir, "out_dir")?, mode)?;
        Ok(())
    })
}

/// Maps a plan onto a `width_mm` x `height_mm` canvas and schedules both arms.
///
/// # Safety
/// `plan` must be a live handle, `timing` null (defaults) or valid, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lp_schedule_create(
    plan: *const LpPlan,
    width_mm: f64,
    height_mm: f64,
    margin_mm: f64,
    timing: *const LpTiming,
    out: *mut *mut LpSchedule,
) -> LpStatus {
    guard(|| {
        let p = ref_arg(plan, "plan")?;
        out_arg(out, "out")?;
        let t = timing.as_ref().copied().unwrap_or_else(|| lp_timing_default());
        let physical = map_to_canvas(&p.plan, (width_mm, height_mm), margin_mm)?;
        let schedule = schedule_bimanual(
            &split_canvas(&physical),
            Timing {
                pen_speed_mm_s: t.pen_speed_mm_s,
                travel_speed_mm_s: t.travel_speed_mm_s,
                tool_change_s: t.tool_change_s,
            },
        )?;
        *out = Box::into_raw(Box::new(LpSchedule { schedule }));
        Ok(())
    })
}

/// # Safety
/// `schedule` must be null or a handle from [`lp_schedule_create`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lp_schedule_free(schedule: *mut LpSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Makespan in seconds, or a negative value for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_schedule_makespan(schedule: *const LpSchedule) -> f64 {
    schedule.as_ref().map_or(-1.0, |s| s.schedule.makespan)
}

/// Tool changes of one arm (0 = left, otherwise right).
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lp_schedule_tool_changes(schedule: *const LpSchedule, arm: u32) -> usize {
    let arm = if arm == 0 { Arm::Left } else { Arm::Right };
    schedule.as_ref().map_or(0, |s| s.schedule.tool_changes(arm))
}

/// Writes the schedule as JSON Lines with a trailing summary record.
///
/// # Safety
/// `schedule` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lp_schedule_export(schedule: *const LpSchedule, path: *const c_char) -> LpStatus {
    guard(|| {
        let s = ref_arg(schedule, "schedule")?;
        export_plan(&s.schedule, &path_arg(path, "path")?)?;
        Ok(())
    })
}
