//! Artifacts and experiments: SIP fields, rasters, isolines, and the
//! deviation experiment with its constant fit.

mod experiment;
mod isolines;
mod sip;

pub use experiment::{
    fit_sample_constant, read_deviation_csv, run_deviation_experiment, write_deviation_csv, DeviationTable,
    ExperimentConfig, ExperimentReport, FitResult, Generator, MeasureReport,
};
pub use isolines::{extract_isolines, isolines_to_svg, Isoline, DEFAULT_LEVELS};
pub use sip::{decode_pgm, encode_pgm, load_raster, rasterize_sip, save_raster, Bounds, Raster, SipField, WeightedShapes};
