//! Grid-search inversion, sensitivity sweeps and characteristic numbers.

pub mod charnums;
pub mod grid;
pub mod harness;
pub mod search;

pub use charnums::{characteristic_numbers, similitude_report, CharNumbers, SimilitudeEntry, SIMILITUDE_TOLERANCE};
pub use grid::SearchGrid;
pub use harness::{add_noise, closed_loop, prepare, sensitivity_sweep, Scenario, SweepCase, SweepReport, VideoPath};
pub use search::{grid_search, EstimationResult, FemConfig, Landscape, SearchMode, SearchOptions};
