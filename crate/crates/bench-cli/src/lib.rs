//! Sweeps over `(algo, n, p, M, B, seed)` on the simulated machine, CSV
//! output, and bound-ratio band checks.

pub mod bands;
pub mod config;
pub mod run;

pub use bands::{check_bands, exit_code, SeriesReport, Verdict};
pub use config::{override_seeds, parse_config, parse_list, Algo, Bound, Sweep};
pub use run::{csv_string, read_csv, run_point, run_sweep, write_csv, Measured, Point, ScenarioRow, HEADER};
