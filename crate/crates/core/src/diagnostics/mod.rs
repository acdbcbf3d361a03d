//! Analysis instruments: redundancy metric, analytic cost model,
//! finite-difference gradient heatmaps, and retention statistics.

mod flops;
mod gradnorm;
mod retention;
mod trajectory;

pub use flops::{flops_model, BlockFlops, FlopsReport};
pub use gradnorm::{fd_heatmap, gradnorm_fd, GradHeatmap};
pub use retention::{retention_stats, RetentionStats};
pub use trajectory::trajectory_sum;
