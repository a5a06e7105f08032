//! Depth-layered stroke planning for painterly rendering and robotic drawing.
//!
//! The pipeline turns a target image, a depth map and a panoptic label map
//! into an ordered stroke plan:
//!
//! 1. predictions are ordered (things by weight, then stuff by semantic group),
//! 2. each prediction receives a share of the stroke budget and is split into
//!    watershed superpixels whose centroids become stroke seeds,
//! 3. seeds are grouped into *frames* by a back-to-front sweep through the
//!    smoothed depth histogram and sorted on a coarse grid,
//! 4. strokes are grown from the seeds along image isophotes,
//! 5. the plan is rendered to PNG snapshots and optionally mapped to a
//!    physical canvas and scheduled across two drawing arms.
//!
//! [`pipeline::run`] ties everything together; the `layerpaint` binary exposes
//! it on the command line.

pub mod cli;
pub mod depth;
pub mod error;
pub mod fixtures;
pub mod gradient;
pub mod imagecore;
pub mod ordering;
pub mod palette;
pub mod pipeline;
pub mod render;
pub mod robotplan;
pub mod segmentation;
pub mod strokes;

pub use depth::{bin_of, build_histogram, smooth_depth, BinMode, DepthHistogram};
pub use error::{Error, Result};
pub use imagecore::{
    load_depth, load_image, load_labels, DepthConvention, DepthMap, Image, Prediction,
    PredictionKind, Rgb, Segmentation,
};
pub use ordering::{compute_frames, layered_depth_plan, Frame, PlanParams, SeedPlan};
pub use palette::{build_palette, quantize, Palette};
pub use render::{raster_stroke, render_plan, RasterMode};
pub use robotplan::{
    map_to_canvas, schedule_bimanual, split_canvas, ArmSchedule, PhysicalPlan, Timing,
};
pub use segmentation::{order_predictions, seed_budget, superpixels, Mask, SeedSet};
pub use strokes::{generate_all, generate_stroke, Stroke, StrokeParams, StrokePlan};
