use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::stapune::SelectionTrace;

/// How well a pruning stage preserved the semantically strongest tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionStats {
    /// Fraction of top-decile semantic tokens that survived, over all frames.
    pub top_decile_retention: f64,
    /// Same fraction per frame.
    pub per_frame_overlap: Vec<f64>,
}

/// Top decile of each frame's semantic map (at least one token, ties to the
/// lower index) intersected with the kept set.
pub fn retention_stats<S: Scalar>(trace: &SelectionTrace<S>, f_sem: &[Vec<S>]) -> RetentionStats {
    let mut per_frame = Vec::with_capacity(f_sem.len());
    let mut hits = 0usize;
    let mut total = 0usize;
    for (frame, sem) in f_sem.iter().enumerate() {
        let n_s = sem.len();
        let k = n_s.div_ceil(10).max(1);
        let mut idx: Vec<usize> = (0..n_s).collect();
        idx.sort_by(|&a, &b| sem[b].partial_cmp(&sem[a]).expect("finite semantic scores"));
        let top = &idx[..k];
        let kept = &trace.kept[frame];
        let overlap = top.iter().filter(|i| kept.binary_search(i).is_ok()).count();
        per_frame.push(overlap as f64 / k as f64);
        hits += overlap;
        total += k;
    }
    RetentionStats {
        top_decile_retention: if total == 0 { 1.0 } else { hits as f64 / total as f64 },
        per_frame_overlap: per_frame,
    }
}
