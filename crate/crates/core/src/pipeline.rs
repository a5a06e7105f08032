//! End-to-end run: inputs on disk to paintings, plans and schedules on disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imagecore::{load_depth, load_image, load_labels, DepthConvention, DepthMap};
use crate::ordering::{layered_depth_plan_detailed, PlanDetails, PlanParams, SeedPlan};
use crate::palette::{build_palette, Palette};
use crate::render::{default_snapshots, render_plan};
use crate::robotplan::{
    export_plan, map_to_canvas, schedule_bimanual, split_canvas, write_svg, ArmSchedule, Timing,
};
use crate::strokes::{generate_all, StrokeParams, StrokePlan};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const DEFAULT_KMEANS_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RobotConfig {
    pub canvas_mm: (f64, f64),
    pub margin_mm: f64,
    pub timing: Timing,
}

impl Default for RobotConfig {
    fn default() -> Self {
        RobotConfig {
            canvas_mm: (160.0, 160.0),
            margin_mm: 5.0,
            timing: Timing::default(),
        }
    }
}

/// Every parameter of a run. Serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub input: PathBuf,
    pub depth: PathBuf,
    pub depth_convention: DepthConvention,
    pub labels: PathBuf,
    pub meta: PathBuf,
    pub strokes: u64,
    /// Palette size; `None` leaves stroke colors unrestricted.
    pub colors: Option<usize>,
    pub stroke: StrokeParams,
    pub plan: PlanParams,
    /// Snapshot stroke counts; `None` uses the default cadence.
    pub snapshots: Option<Vec<usize>>,
    pub robot: Option<RobotConfig>,
    pub rng_seed: u64,
    pub kmeans_iters: usize,
    pub debug_dumps: bool,
    pub out: PathBuf,
}

impl RunConfig {
    /// A configuration with default parameters for the given inputs.
    pub fn new(input: &Path, depth: &Path, labels: &Path, meta: &Path, out: &Path) -> Self {
        RunConfig {
            input: input.to_path_buf(),
            depth: depth.to_path_buf(),
            depth_convention: DepthConvention::default(),
            labels: labels.to_path_buf(),
            meta: meta.to_path_buf(),
            strokes: 2000,
            colors: None,
            stroke: StrokeParams::default(),
            plan: PlanParams::default(),
            snapshots: None,
            robot: None,
            rng_seed: 0,
            kmeans_iters: DEFAULT_KMEANS_ITERS,
            debug_dumps: false,
            out: out.to_path_buf(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strokes == 0 {
            return Err(Error::InvalidParameter("stroke count must be >= 1".into()));
        }
        if self.colors == Some(0) {
            return Err(Error::InvalidParameter("color count must be >= 1".into()));
        }
        if self.plan.bin_count == 0 {
            return Err(Error::InvalidParameter("bin count must be >= 1".into()));
        }
        if let Some(s) = self.plan.sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidParameter(format!("sigma must be finite and >= 0, got {s}")));
            }
        }
        if let Some(snaps) = &self.snapshots {
            if snaps.windows(2).any(|w| w[0] >= w[1]) || snaps.first() == Some(&0) {
                return Err(Error::InvalidParameter(format!(
                    "snapshot counts must be positive and strictly ascending: {snaps:?}"
                )));
            }
        }
        self.stroke.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<OutputEntry>,
    pub stroke_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub makespan_s: Option<f64>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Fails if any recorded input no longer matches its digest.
    pub fn verify_inputs(&self) -> Result<()> {
        for i in &self.inputs {
            let got = sha256_file(&i.path)?;
            if got != i.sha256 {
                return Err(Error::Decode {
                    path: i.path.clone(),
                    reason: format!("sha256 {got} differs from manifest {}", i.sha256),
                });
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::read(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub seed_plan: SeedPlan,
    pub stroke_plan: StrokePlan,
    pub palette: Option<Palette>,
    pub schedule: Option<ArmSchedule>,
}

/// Runs the full pipeline and writes every artifact under `config.out`.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let image = load_image(&config.input)?;
    let depth = load_depth(&config.depth, config.depth_convention)?;
    let seg = load_labels(&config.labels, &config.meta)?;
    depth.check_dims(&image)?;
    seg.check_dims(&image)?;

    let palette = match config.colors {
        Some(k) => Some(build_palette(&image, k, config.rng_seed, config.kmeans_iters)?),
        None => None,
    };
    let (seed_plan, details) = layered_depth_plan_detailed(&image, &seg, &depth, config.strokes, &config.plan)?;
    let stroke_plan = generate_all(&seed_plan, &image, palette.as_ref(), config.stroke)?;

    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| Error::write(out, e))?;
    let mut written: Vec<PathBuf> = Vec::new();

    let snapshots = config
        .snapshots
        .clone()
        .unwrap_or_else(|| default_snapshots(stroke_plan.strokes.len()));
    let rendered = render_plan(&stroke_plan, &snapshots, out, config.stroke.raster)?;
    written.extend(rendered.snapshots.iter().map(|(_, p)| p.clone()));
    written.push(rendered.painting_path.clone());
    written.push(rendered.frame_list.clone());

    if let Some(p) = &palette {
        let path = out.join("palette.json");
        p.save_json(&path)?;
        written.push(path);
    }
    let seeds_path = out.join("seeds.json");
    seed_plan.save_json(&seeds_path)?;
    written.push(seeds_path);
    let strokes_path = out.join("strokes.jsonl");
    stroke_plan.write_jsonl(&strokes_path)?;
    written.push(strokes_path);

    let schedule = match &config.robot {
        Some(robot) => {
            let physical = map_to_canvas(&stroke_plan, robot.canvas_mm, robot.margin_mm)?;
            let parts = split_canvas(&physical);
            let schedule = schedule_bimanual(&parts, robot.timing)?;
            let jsonl = out.join("schedule.jsonl");
            export_plan(&schedule, &jsonl)?;
            let svg = out.join("schedule.svg");
            write_svg(&physical, &parts, &svg)?;
            written.push(jsonl);
            written.push(svg);
            Some(schedule)
        }
        None => None,
    };

    if config.debug_dumps {
        written.extend(write_debug(out, &depth, &details)?);
    }

    let inputs = [&config.input, &config.depth, &config.labels, &config.meta]
        .into_iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outputs = written
        .iter()
        .map(|p| {
            let rel = p.strip_prefix(out).unwrap_or(p);
            Ok(OutputEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                sha256: sha256_file(p).map_err(|e| match e {
                    Error::Read { path, source } => Error::Write { path, source },
                    other => other,
                })?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        inputs,
        outputs,
        stroke_count: stroke_plan.strokes.len(),
        makespan_s: schedule.as_ref().map(|s| s.makespan),
    };
    let manifest_path = out.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&manifest_path, text).map_err(|e| Error::write(&manifest_path, e))?;

    Ok(RunReport {
        manifest,
        manifest_path,
        seed_plan,
        stroke_plan,
        palette,
        schedule,
    })
}

/// Re-runs a recorded configuration, optionally into another directory.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<RunReport> {
    let manifest = Manifest::load(manifest_path)?;
    manifest.verify_inputs()?;
    let mut config = manifest.config;
    if let Some(o) = out {
        config.out = o.to_path_buf();
    }
    run(&config)
}

fn write_debug(out: &Path, depth: &DepthMap, details: &PlanDetails) -> Result<Vec<PathBuf>> {
    let dir = out.join("debug");
    fs::create_dir_all(&dir).map_err(|e| Error::write(&dir, e))?;
    let mut written = Vec::new();

    let raw = dir.join("depth_input.pgm");
    depth.save_pgm(&raw)?;
    written.push(raw);
    let smoothed = dir.join("depth_smoothed.pgm");
    details.smoothed.save_pgm(&smoothed)?;
    written.push(smoothed);

    let hist = &details.histogram;
    let summary = serde_json::json!({
        "edges": hist.edges,
        "counts": hist.counts,
        "traversal": hist.traversal,
        "order": details.order.iter().map(|p| p.id).collect::<Vec<_>>(),
        "budgets": details.budgets,
    });
    let hist_path = dir.join("plan.json");
    fs::write(&hist_path, serde_json::to_string_pretty(&summary).expect("json") + "\n")
        .map_err(|e| Error::write(&hist_path, e))?;
    written.push(hist_path);

    for (pred, regions) in details.order.iter().zip(&details.regions) {
        if let Some(r) = regions {
            let p = dir.join(format!("superpixels_{:05}.png", pred.id));
            r.save_png(&p)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::random_scene;

    fn config(dir: &Path) -> RunConfig {
        let scene = random_scene(48, 40, 5);
        let p = scene.write(&dir.join("in")).unwrap();
        let mut c = RunConfig::new(&p.image, &p.depth, &p.labels, &p.meta, &dir.join("out"));
        c.strokes = 60;
        c.colors = Some(3);
        c.robot = Some(RobotConfig::default());
        c
    }

    #[test]
    fn run_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path());
        let report = run(&c).unwrap();
        assert_eq!(report.stroke_plan.strokes.len(), 60);
        for name in ["painting.png", "frame0050.png", "frames.txt", "palette.json", "seeds.json", "strokes.jsonl", "schedule.jsonl", "schedule.svg", "manifest.json"] {
            assert!(c.out.join(name).exists(), "{name}");
        }
        let m = Manifest::load(&report.manifest_path).unwrap();
        assert_eq!(m, report.manifest);
        assert_eq!(m.inputs.len(), 4);
    }

    #[test]
    fn replay_reproduces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path());
        let first = run(&c).unwrap();
        let again = replay(&first.manifest_path, Some(&dir.path().join("again"))).unwrap();
        assert_eq!(first.manifest.outputs, again.manifest.outputs);
    }

    #[test]
    fn replay_detects_changed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path());
        let first = run(&c).unwrap();
        random_scene(48, 40, 6).image.save_png(&c.input).unwrap();
        assert!(replay(&first.manifest_path, None).is_err());
    }

    #[test]
    fn debug_dumps_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path());
        c.debug_dumps = true;
        c.robot = None;
        let r = run(&c).unwrap();
        assert!(r.manifest.outputs.iter().any(|o| o.path == "debug/plan.json"));
        assert!(r.manifest.outputs.iter().any(|o| o.path.starts_with("debug/superpixels_")));
    }

    #[test]
    fn zero_strokes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path());
        c.strokes = 0;
        assert!(matches!(run(&c), Err(Error::InvalidParameter(_))));
    }
}
