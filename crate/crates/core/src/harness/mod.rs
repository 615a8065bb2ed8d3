//! Experiment plumbing: method dispatch, factor export, noise-robustness
//! sweeps with CSV reports, and PGM heatmaps.
//!
//! Single decompositions report `‖T − T̂‖_F` against their input. Sweeps add
//! noise `N` to a clean tensor `X` and report the denoising error `‖X − T̂‖_F`.

mod heatmap;
mod method;
mod sweep;

pub use heatmap::{heatmap_pgm, render_heatmap};
pub use method::{export_decomposition, run_method, Decomposition, Method, RunSummary};
pub use sweep::{
    median, robustness_sweep, robustness_sweep_on, summary_file_name, write_report, CellSummary, RobustnessConfig,
    RobustnessReport, RunRecord,
};
