//! Token-mask export: one PGM image per frame per stage showing which grid
//! cells that stage dropped, plus a JSON record of the kept indices.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vitcore::PruneTrace;

use super::io::atomic_write;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MasksJson {
    schema_version: u32,
    grid_rows: usize,
    grid_cols: usize,
    stages: Vec<StageMasks>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageMasks {
    stage: usize,
    /// Kept indices exactly as recorded in the trace (coordinates of the
    /// token set the stage operated on).
    kept_indices: Vec<Vec<usize>>,
}

fn pgm(rows: usize, cols: usize, white: &[bool]) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(white.iter().map(|&w| if w { 255u8 } else { 0u8 }));
    out
}

/// Write one P5 PGM per frame per stage (kept cells white, that stage's
/// dropped cells black, in original-grid coordinates) and a `masks.json`
/// mirroring the trace's kept indices. Returns the written paths.
pub fn export_masks<S: Scalar>(
    trace: &PruneTrace<S>,
    grid: (usize, usize),
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let (rows, cols) = grid;
    let n_s0 = rows * cols;
    if let Some(stage0) = trace.stages.first() {
        if stage0.n_s_before != n_s0 {
            return Err(Error::Shape(format!(
                "grid {rows}x{cols} does not cover {} tokens",
                stage0.n_s_before
            )));
        }
    }
    std::fs::create_dir_all(out_dir)?;

    let n_t = trace.stages.first().map_or(0, |s| s.kept.len());
    // Original-grid position of each live token, per frame, updated stage by
    // stage as the coordinate system shrinks.
    let mut origin: Vec<Vec<usize>> = vec![(0..n_s0).collect(); n_t];
    let mut written = Vec::new();

    for stage in &trace.stages {
        for (t, kept) in stage.kept.iter().enumerate() {
            let mut white = vec![true; n_s0];
            let mut is_kept = vec![false; stage.n_s_before];
            for &i in kept {
                is_kept[i] = true;
            }
            for (cur, &orig) in origin[t].iter().enumerate() {
                if !is_kept[cur] {
                    white[orig] = false;
                }
            }
            let path = out_dir.join(format!("stage{}_frame{}.pgm", stage.stage, t));
            atomic_write(&path, &pgm(rows, cols, &white))?;
            written.push(path);
            origin[t] = kept.iter().map(|&i| origin[t][i]).collect();
        }
    }

    let json = MasksJson {
        schema_version: 1,
        grid_rows: rows,
        grid_cols: cols,
        stages: trace
            .stages
            .iter()
            .map(|s| StageMasks {
                stage: s.stage,
                kept_indices: s.kept.clone(),
            })
            .collect(),
    };
    let path = out_dir.join("masks.json");
    atomic_write(
        &path,
        serde_json::to_string_pretty(&json)
            .map_err(|e| Error::Numeric(format!("mask json: {e}")))?
            .as_bytes(),
    )?;
    written.push(path);
    Ok(written)
}
