//! Report artifacts: `cells.csv`, `summary.json` and `heatmap.pgm`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::EvalReport;
use crate::error::{Error, Result};

pub const CELLS_FILE: &str = "cells.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const HEATMAP_FILE: &str = "heatmap.pgm";

pub fn cells_csv(report: &EvalReport) -> String {
    let mut s = String::from("x,y,attempts,successes,score\n");
    for c in &report.cells {
        let _ = writeln!(s, "{:.6},{:.6},{},{},{}", c.x, c.y, c.attempts, c.successes, c.total_score);
    }
    s
}

/// Plain PGM, one pixel per cell, success fraction scaled to 0..=255. The
/// top image row is the high-y grid row.
pub fn heatmap_pgm(report: &EvalReport) -> String {
    let r = report.grid.resolution;
    let mut s = format!("P2\n{r} {r}\n255\n");
    for j in (0..r).rev() {
        let row: Vec<String> = (0..r)
            .map(|i| {
                let v = (report.cells[j * r + i].success_rate() * 255.0).round() as u32;
                v.to_string()
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn write(path: PathBuf, body: &[u8]) -> Result<()> {
    fs::write(&path, body).map_err(|e| Error::io(path, e))
}

/// Writes the three report files into `dir`, creating it if needed.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir.join(CELLS_FILE), cells_csv(report).as_bytes())?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::format(SUMMARY_FILE, e.to_string()))?;
    write(dir.join(SUMMARY_FILE), json.as_bytes())?;
    write(dir.join(HEATMAP_FILE), heatmap_pgm(report).as_bytes())
}

pub fn read_summary(dir: &Path) -> Result<EvalReport> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(SUMMARY_FILE, e.to_string()))
}
