//! Operational shell: synthetic clips, tensor files, mask export, and the
//! end-to-end experiment harness behind the CLI.

mod experiment;
mod io;
mod masks;
mod report;
mod synthetic;

pub use experiment::{run_experiment, DataSource, ExperimentConfig};
pub use io::{
    atomic_write, read_tensor, read_tokens32, read_video32, write_tensor, write_tokens32,
    write_video32,
};
pub use masks::export_masks;
pub use report::{
    read_report, write_report, Aggregate, Deterministic, MeanStd, Report, RunRecord, Timing,
    TrajectoryTriple, REPORT_SCHEMA_VERSION,
};
pub use synthetic::{gen_synthetic_video, BackgroundKind, Foreground, SyntheticSpec};
