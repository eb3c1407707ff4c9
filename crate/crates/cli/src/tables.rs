//! CSV emission of the aggregated metrics.
//!
//! Every number is written in Rust's shortest round-trip decimal form, rows
//! are sorted by their leading key columns, and a header row is always
//! present, so repeated runs of the same experiment produce byte-identical
//! files.

use bbo_infer::harness::MetricsTable;
use std::io;
use std::path::{Path, PathBuf};

/// Orders the alpha levels ascending, keeping their original indices into
/// the per-cell coverage vectors.
fn sorted_alphas(table: &MetricsTable) -> Vec<(usize, f64)> {
    let mut alphas: Vec<(usize, f64)> = table.alpha_levels.iter().copied().enumerate().collect();
    alphas.sort_by(|a, b| a.1.total_cmp(&b.1));
    alphas
}

fn rmse_csv(table: &MetricsTable) -> String {
    let mut out = String::from("problem,case,algorithm,checkpoint,mean,std\n");
    for cell in &table.cells {
        let Some(curve) = &cell.rmse else { continue };
        for (k, mean, std) in curve {
            out.push_str(&format!(
                "{},{},{},{k},{mean},{std}\n",
                cell.problem_id, cell.case_id, cell.algorithm_id
            ));
        }
    }
    out
}

fn gap_csv(table: &MetricsTable) -> String {
    let mut out = String::from("problem,case,algorithm,mean,std\n");
    for cell in &table.cells {
        let Some((mean, std)) = cell.gap else { continue };
        out.push_str(&format!(
            "{},{},{},{mean},{std}\n",
            cell.problem_id, cell.case_id, cell.algorithm_id
        ));
    }
    out
}

fn coverage_csv(table: &MetricsTable) -> String {
    let mut out = String::from("problem,case,algorithm,checkpoint,alpha,coverage\n");
    let alphas = sorted_alphas(table);
    for cell in &table.cells {
        if cell.coverage.iter().all(|c| c.is_empty()) {
            continue;
        }
        for point_idx in 0..cell.checkpoints.len() {
            for &(alpha_idx, alpha) in &alphas {
                let (k, fraction) = cell.coverage[alpha_idx][point_idx];
                out.push_str(&format!(
                    "{},{},{},{k},{alpha},{fraction}\n",
                    cell.problem_id, cell.case_id, cell.algorithm_id
                ));
            }
        }
    }
    out
}

fn tstats_csv(table: &MetricsTable) -> String {
    let mut out = String::from("problem,case,algorithm,mean,std\n");
    for cell in &table.cells {
        let Some((mean, std)) = cell.tstats else { continue };
        out.push_str(&format!(
            "{},{},{},{mean},{std}\n",
            cell.problem_id, cell.case_id, cell.algorithm_id
        ));
    }
    out
}

fn histogram_csv(table: &MetricsTable) -> String {
    let mut out = String::from("problem,case,algorithm,bin_left,bin_right,count\n");
    for cell in &table.cells {
        for (i, &count) in cell.histogram.counts.iter().enumerate() {
            let (left, right) = cell.histogram.bin_edges(i);
            out.push_str(&format!(
                "{},{},{},{left},{right},{count}\n",
                cell.problem_id, cell.case_id, cell.algorithm_id
            ));
        }
    }
    out
}

/// Writes the five metric tables into `output_dir`, returning the paths.
pub fn write_tables(table: &MetricsTable, output_dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(output_dir)?;
    let files = [
        ("rmse.csv", rmse_csv(table)),
        ("gap.csv", gap_csv(table)),
        ("coverage.csv", coverage_csv(table)),
        ("tstats.csv", tstats_csv(table)),
        ("histogram.csv", histogram_csv(table)),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = output_dir.join(name);
        std::fs::write(&path, contents)?;
        paths.push(path);
    }
    Ok(paths)
}
