//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 input error, 4 output error.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::depth::BinMode;
use crate::error::Error;
use crate::imagecore::DepthConvention;
use crate::ordering::{GridDims, PlanParams};
use crate::pipeline::{self, RobotConfig, RunConfig, DEFAULT_KMEANS_ITERS};
use crate::render::RasterMode;
use crate::robotplan::Timing;
use crate::strokes::StrokeParams;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_OUTPUT: u8 = 4;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    NearerHigh,
    NearerLow,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BinModeArg {
    EqualWidth,
    EqualPopulation,
}

fn parse_canvas(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: f64 = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: f64 = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(format!("canvas dimensions must be positive, got {s:?}"));
    }
    Ok((w, h))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative number, got {s:?}")),
    }
}

/// Depth-layered stroke planning and painterly rendering.
#[derive(Debug, Parser)]
#[command(name = "layerpaint", version)]
struct Cli {
    /// Target image (PNG).
    #[arg(long, required_unless_present = "from_manifest")]
    input: Option<PathBuf>,
    /// Depth map (16-bit binary PGM).
    #[arg(long, required_unless_present = "from_manifest")]
    depth: Option<PathBuf>,
    /// Which end of the depth range is closer to the viewer.
    #[arg(long, value_enum, default_value = "nearer-high")]
    depth_convention: ConventionArg,
    /// Panoptic label map (8- or 16-bit PNG of prediction ids).
    #[arg(long, required_unless_present = "from_manifest")]
    labels: Option<PathBuf>,
    /// Label metadata (JSON array).
    #[arg(long, required_unless_present = "from_manifest")]
    meta: Option<PathBuf>,
    /// Total number of strokes.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    strokes: u64,
    /// Palette size; omit for unrestricted colors.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    colors: Option<u64>,
    /// Stroke width in pixels.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    width: u32,
    /// Number of depth histogram bins.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    #[arg(long, value_enum, default_value = "equal-width")]
    bin_mode: BinModeArg,
    /// Seed sort grid as RxC.
    #[arg(long, default_value = "5x5")]
    grid: GridDims,
    /// Depth smoothing sigma in pixels (default: image diagonal / 200).
    #[arg(long, value_parser = parse_non_negative)]
    sigma: Option<f64>,
    /// Comma-separated snapshot stroke counts (default: 50,250,500,1000 then every 500).
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<usize>>,
    /// Emit the first K frames of every thing before going prediction by prediction.
    #[arg(long)]
    interleave_first_k: Option<usize>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    min_points: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    max_points: u64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_non_negative)]
    color_tolerance: f64,
    /// Blend stroke edges by coverage instead of hard disc stamping.
    #[arg(long)]
    antialias: bool,
    #[arg(long, default_value_t = DEFAULT_KMEANS_ITERS)]
    kmeans_iters: usize,
    /// Map the plan to a physical canvas and schedule two arms.
    #[arg(long)]
    robot: bool,
    /// Physical canvas as WxH in millimetres.
    #[arg(long, default_value = "160x160", value_parser = parse_canvas)]
    canvas_mm: (f64, f64),
    #[arg(long, default_value_t = 5.0, value_parser = parse_non_negative)]
    margin_mm: f64,
    /// Pen-down speed in mm/s.
    #[arg(long, default_value_t = 40.0, value_parser = parse_positive)]
    pen_speed: f64,
    /// Pen-up travel speed in mm/s.
    #[arg(long, default_value_t = 100.0, value_parser = parse_positive)]
    travel_speed: f64,
    /// Seconds per tool change.
    #[arg(long, default_value_t = 15.0, value_parser = parse_non_negative)]
    toolchange_s: f64,
    /// Seed for every random choice (palette initialization).
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Write intermediate depth, histogram and superpixel dumps under out/debug.
    #[arg(long)]
    debug_dumps: bool,
    /// Output directory.
    #[arg(long, required_unless_present = "from_manifest")]
    out: Option<PathBuf>,
    /// Re-run the configuration recorded in a manifest (with --out, into another directory).
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let robot = self.robot.then_some(RobotConfig {
            canvas_mm: self.canvas_mm,
            margin_mm: self.margin_mm,
            timing: Timing {
                pen_speed_mm_s: self.pen_speed,
                travel_speed_mm_s: self.travel_speed,
                tool_change_s: self.toolchange_s,
            },
        });
        RunConfig {
            input: self.input.expect("required by clap"),
            depth: self.depth.expect("required by clap"),
            depth_convention: match self.depth_convention {
                ConventionArg::NearerHigh => DepthConvention::NearerHigh,
                ConventionArg::NearerLow => DepthConvention::NearerLow,
            },
            labels: self.labels.expect("required by clap"),
            meta: self.meta.expect("required by clap"),
            strokes: self.strokes,
            colors: self.colors.map(|k| k as usize),
            stroke: StrokeParams {
                width_px: self.width,
                min_points: self.min_points as usize,
                max_points: self.max_points as usize,
                color_tolerance: self.color_tolerance,
                raster: if self.antialias { RasterMode::Antialiased } else { RasterMode::Hard },
            },
            plan: PlanParams {
                sigma: self.sigma,
                bin_count: self.bins as usize,
                grid: self.grid,
                bin_mode: match self.bin_mode {
                    BinModeArg::EqualWidth => BinMode::EqualWidth,
                    BinModeArg::EqualPopulation => BinMode::EqualPopulation,
                },
                interleave_first_k: self.interleave_first_k,
            },
            snapshots: self.snapshots,
            robot,
            rng_seed: self.rng_seed,
            kmeans_iters: self.kmeans_iters,
            debug_dumps: self.debug_dumps,
            out: self.out.expect("required by clap"),
        }
    }
}

/// Exit code for a pipeline failure.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_output() {
        EXIT_OUTPUT
    } else if matches!(err, Error::InvalidParameter(_)) {
        EXIT_USAGE
    } else {
        EXIT_INPUT
    }
}

fn class(code: u8) -> &'static str {
    match code {
        EXIT_USAGE => "usage error",
        EXIT_OUTPUT => "output error",
        _ => "input error",
    }
}

/// Parses `args` (including the program name), runs the pipeline and returns
/// the exit code. Diagnostics go to stderr as a single line.
pub fn run_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let text = e.to_string();
                let line = text.lines().next().unwrap_or("invalid arguments");
                eprintln!("layerpaint: {}", line.trim_start_matches("error: "));
                return EXIT_USAGE;
            }
            print!("{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.from_manifest.clone() {
        Some(m) => pipeline::replay(&m, cli.out.as_deref()),
        None => pipeline::run(&cli.into_config()),
    };
    match result {
        Ok(report) => {
            eprintln!(
                "layerpaint: {} strokes written to {}",
                report.stroke_plan.strokes.len(),
                report.manifest.config.out.display()
            );
            EXIT_OK
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("layerpaint: {}: {e}", class(code));
            code
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_with_args(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("layerpaint").chain(args.iter().copied()))
    }

    const BASE: [&str; 10] = [
        "--input", "i.png", "--depth", "d.pgm", "--labels", "l.png", "--meta", "l.json", "--out", "o",
    ];

    #[test]
    fn defaults_match_documented_values() {
        let c = parse(&BASE).unwrap().into_config();
        assert_eq!(c.strokes, 2000);
        assert_eq!(c.stroke, StrokeParams::default());
        assert_eq!(c.plan, PlanParams::default());
        assert_eq!(c.colors, None);
        assert_eq!(c.snapshots, None);
        assert!(c.robot.is_none());
    }

    #[test]
    fn zero_strokes_is_usage_error() {
        let mut args = BASE.to_vec();
        args.extend(["--strokes", "0"]);
        assert!(parse(&args).is_err());
        let code = run_with_args(std::iter::once("layerpaint").chain(args));
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn full_flag_set_parses() {
        let mut args = BASE.to_vec();
        args.extend([
            "--depth-convention", "nearer-low", "--strokes", "500", "--colors", "4", "--width", "4",
            "--bins", "6", "--grid", "3x4", "--sigma", "2.5", "--snapshots", "10,20,30", "--robot",
            "--canvas-mm", "160x200", "--margin-mm", "7", "--pen-speed", "50", "--travel-speed", "120",
            "--toolchange-s", "9", "--rng-seed", "7", "--interleave-first-k", "2", "--bin-mode",
            "equal-population", "--antialias",
        ]);
        let c = parse(&args).unwrap().into_config();
        assert_eq!(c.depth_convention, DepthConvention::NearerLow);
        assert_eq!(c.colors, Some(4));
        assert_eq!(c.plan.grid, GridDims { rows: 3, cols: 4 });
        assert_eq!(c.plan.bin_count, 6);
        assert_eq!(c.plan.sigma, Some(2.5));
        assert_eq!(c.plan.bin_mode, BinMode::EqualPopulation);
        assert_eq!(c.plan.interleave_first_k, Some(2));
        assert_eq!(c.snapshots, Some(vec![10, 20, 30]));
        assert_eq!(c.stroke.raster, RasterMode::Antialiased);
        let r = c.robot.unwrap();
        assert_eq!(r.canvas_mm, (160.0, 200.0));
        assert_eq!(r.timing.tool_change_s, 9.0);
        assert_eq!(c.rng_seed, 7);
    }

    #[test]
    fn bad_values_are_rejected() {
        for extra in [
            ["--grid", "5"],
            ["--canvas-mm", "0x10"],
            ["--pen-speed", "0"],
            ["--colors", "0"],
            ["--width", "0"],
            ["--depth-convention", "up"],
        ] {
            let mut args = BASE.to_vec();
            args.extend(extra);
            assert!(parse(&args).is_err(), "{extra:?}");
        }
    }

    #[test]
    fn missing_inputs_are_usage_errors() {
        assert!(parse(&["--out", "o"]).is_err());
        assert!(parse(&["--from-manifest", "m.json"]).is_ok());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::ZeroDimension), EXIT_INPUT);
        let io = std::io::Error::other("x");
        assert_eq!(exit_code(&Error::Write { path: "p".into(), source: io }), EXIT_OUTPUT);
    }
}
