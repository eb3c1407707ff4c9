//! Self-contained SVG renderings of the metric tables: error curves on a
//! log10 iteration axis with Monte Carlo confidence bands, coverage curves
//! against the nominal level, and normalized-estimator histograms overlaid
//! with the standard normal density.

use bbo_infer::harness::{CellMetrics, MetricsTable};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: &[(&str, &str)] = &[
    ("spsa-si", "#1f77b4"),
    ("ordinary", "#d62728"),
    ("forward", "#2ca02c"),
    ("four-point", "#9467bd"),
    ("mts", "#ff7f0e"),
    ("mts-four-point", "#8c564b"),
];

fn color_for(algorithm: &str) -> &'static str {
    PALETTE
        .iter()
        .find(|(name, _)| *name == algorithm)
        .map(|(_, c)| *c)
        .unwrap_or("#333333")
}

/// Linear mapping from data coordinates to the plot area.
struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-300);
        MARGIN_LEFT + (x - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-300);
        HEIGHT - MARGIN_BOTTOM - (y - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn document(title: &str, body: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>",
            "<text x=\"{tx}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{title}</text>",
            "{body}</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = title,
        body = body
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str, x_ticks: &[(f64, String)]) -> String {
    let mut out = String::new();
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        x1 - x0,
        y0 - y1
    );
    for (x, label) in x_ticks {
        let sx = frame.sx(*x);
        let _ = writeln!(
            out,
            "<line x1=\"{sx}\" y1=\"{y0}\" x2=\"{sx}\" y2=\"{}\" stroke=\"#444\"/>",
            y0 + 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{sx}\" y=\"{}\" text-anchor=\"middle\">{label}</text>",
            y0 + 17.0
        );
    }
    for i in 0..=4 {
        let value = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let sy = frame.sy(value);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{sy}\" x2=\"{x0}\" y2=\"{sy}\" stroke=\"#444\"/>",
            x0 - 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>",
            x0 - 7.0,
            sy + 3.5,
            value
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{y_label}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    out
}

fn legend(entries: &[(&str, &str)]) -> String {
    let mut out = String::new();
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 14.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT - 150.0;
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            x + 18.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{name}</text>",
            x + 23.0,
            y + 3.5
        );
    }
    out
}

fn polyline(points: &[(f64, f64)], color: &str, dash: Option<&str>) -> String {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash_attr = dash
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>",
        coords.join(" ")
    )
}

fn band(upper: &[(f64, f64)], lower: &[(f64, f64)], color: &str) -> String {
    let mut coords: Vec<String> = upper.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    coords.extend(lower.iter().rev().map(|(x, y)| format!("{x:.2},{y:.2}")));
    format!(
        "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.18\" stroke=\"none\"/>",
        coords.join(" ")
    )
}

fn log_ticks(x_min: f64, x_max: f64) -> Vec<(f64, String)> {
    let lo = x_min.ceil() as i64;
    let hi = x_max.floor() as i64;
    (lo..=hi)
        .map(|e| (e as f64, format!("1e{e}")))
        .collect()
}

fn group_cells(table: &MetricsTable) -> BTreeMap<(String, String), Vec<&CellMetrics>> {
    let mut groups: BTreeMap<(String, String), Vec<&CellMetrics>> = BTreeMap::new();
    for cell in &table.cells {
        groups
            .entry((cell.problem_id.clone(), cell.case_id.clone()))
            .or_default()
            .push(cell);
    }
    groups
}

fn rmse_plot(problem: &str, case: &str, cells: &[&CellMetrics]) -> Option<String> {
    let mut series = Vec::new();
    for cell in cells {
        let curve = cell.rmse.as_ref()?;
        let scale = (cell.successes.max(1) as f64).sqrt();
        let points: Vec<(f64, f64, f64)> = curve
            .iter()
            .filter(|(k, _, _)| *k >= 1)
            .map(|(k, mean, std)| ((*k as f64).log10(), *mean, 1.96 * std / scale))
            .collect();
        if points.is_empty() {
            return None;
        }
        series.push((cell.algorithm_id.clone(), points));
    }
    let x_min = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(x, _, _)| *x))
        .fold(f64::INFINITY, f64::min);
    let x_max = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(x, _, _)| *x))
        .fold(f64::NEG_INFINITY, f64::max);
    let y_max = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(_, m, b)| m + b))
        .fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x_min,
        x_max,
        y_min: 0.0,
        y_max: (y_max * 1.05).max(1e-12),
    };
    let mut body = axes(
        &frame,
        "iterations (log10)",
        "parameter error",
        &log_ticks(x_min, x_max),
    );
    let mut legend_entries = Vec::new();
    for (algorithm, points) in &series {
        let color = color_for(algorithm);
        let upper: Vec<(f64, f64)> = points
            .iter()
            .map(|(x, m, b)| (frame.sx(*x), frame.sy(m + b)))
            .collect();
        let lower: Vec<(f64, f64)> = points
            .iter()
            .map(|(x, m, b)| (frame.sx(*x), frame.sy((m - b).max(0.0))))
            .collect();
        body.push_str(&band(&upper, &lower, color));
        let line: Vec<(f64, f64)> = points
            .iter()
            .map(|(x, m, _)| (frame.sx(*x), frame.sy(*m)))
            .collect();
        body.push_str(&polyline(&line, color, None));
        legend_entries.push((algorithm.as_str(), color));
    }
    body.push_str(&legend(&legend_entries));
    Some(document(
        &format!("parameter error, {problem} / {case}"),
        &body,
    ))
}

fn coverage_plot(
    problem: &str,
    case: &str,
    cells: &[&CellMetrics],
    alpha_idx: usize,
    alpha: f64,
) -> Option<String> {
    let mut series = Vec::new();
    for cell in cells {
        let curve = cell.coverage.get(alpha_idx)?;
        if curve.is_empty() {
            continue;
        }
        let points: Vec<(f64, f64)> = curve
            .iter()
            .filter(|(k, _)| *k >= 1)
            .map(|(k, fraction)| ((*k as f64).log10(), *fraction))
            .collect();
        if !points.is_empty() {
            series.push((cell.algorithm_id.clone(), points));
        }
    }
    if series.is_empty() {
        return None;
    }
    let x_min = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(x, _)| *x))
        .fold(f64::INFINITY, f64::min);
    let x_max = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(x, _)| *x))
        .fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x_min,
        x_max,
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut body = axes(
        &frame,
        "iterations (log10)",
        "coverage",
        &log_ticks(x_min, x_max),
    );
    // nominal confidence level
    let nominal = frame.sy(1.0 - alpha);
    body.push_str(&format!(
        "<line x1=\"{}\" y1=\"{nominal}\" x2=\"{}\" y2=\"{nominal}\" stroke=\"#555\" stroke-dasharray=\"6,4\"/>",
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT
    ));
    let mut legend_entries = Vec::new();
    for (algorithm, points) in &series {
        let color = color_for(algorithm);
        let line: Vec<(f64, f64)> = points
            .iter()
            .map(|(x, y)| (frame.sx(*x), frame.sy(*y)))
            .collect();
        body.push_str(&polyline(&line, color, None));
        legend_entries.push((algorithm.as_str(), color));
    }
    body.push_str(&legend(&legend_entries));
    Some(document(
        &format!("coverage at alpha = {alpha}, {problem} / {case}"),
        &body,
    ))
}

fn histogram_plot(cell: &CellMetrics) -> Option<String> {
    let total: u64 = cell.histogram.counts.iter().sum();
    if total == 0 {
        return None;
    }
    let bins = cell.histogram.counts.len();
    let bin_width = (cell.histogram.hi - cell.histogram.lo) / bins as f64;
    let densities: Vec<f64> = cell
        .histogram
        .counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * bin_width))
        .collect();
    let normal_peak = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let y_max = densities
        .iter()
        .copied()
        .fold(normal_peak, f64::max)
        * 1.1;
    let frame = Frame {
        x_min: cell.histogram.lo,
        x_max: cell.histogram.hi,
        y_min: 0.0,
        y_max,
    };
    let ticks: Vec<(f64, String)> = (-4..=4)
        .map(|t| (t as f64, format!("{t}")))
        .filter(|(t, _)| *t >= cell.histogram.lo && *t <= cell.histogram.hi)
        .collect();
    let mut body = axes(&frame, "normalized estimate", "density", &ticks);
    let color = color_for(&cell.algorithm_id);
    for (i, density) in densities.iter().enumerate() {
        let (left, right) = cell.histogram.bin_edges(i);
        let x = frame.sx(left);
        let w = frame.sx(right) - x;
        let y = frame.sy(*density);
        let h = frame.sy(0.0) - y;
        body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{color}\" fill-opacity=\"0.55\" stroke=\"#555\" stroke-width=\"0.4\"/>",
        ));
    }
    // standard normal density overlay
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = cell.histogram.lo
                + (cell.histogram.hi - cell.histogram.lo) * i as f64 / 200.0;
            let density = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            (frame.sx(x), frame.sy(density))
        })
        .collect();
    body.push_str(&polyline(&curve, "#111111", Some("5,3")));
    Some(document(
        &format!(
            "normalized estimates, {} / {} / {}",
            cell.problem_id, cell.case_id, cell.algorithm_id
        ),
        &body,
    ))
}

/// Writes every available plot into `output_dir`, returning the paths.
/// Empty metrics produce no files.
pub fn write_plots(table: &MetricsTable, output_dir: &Path) -> io::Result<Vec<PathBuf>> {
    let groups = group_cells(table);
    if groups.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(output_dir)?;
    let mut paths = Vec::new();
    let mut emit = |name: String, contents: String| -> io::Result<()> {
        let path = output_dir.join(name);
        std::fs::write(&path, contents)?;
        paths.push(path);
        Ok(())
    };
    for ((problem, case), cells) in &groups {
        if let Some(svg) = rmse_plot(problem, case, cells) {
            emit(format!("rmse_{problem}_{case}.svg"), svg)?;
        }
        for (alpha_idx, alpha) in table.alpha_levels.iter().enumerate() {
            if let Some(svg) = coverage_plot(problem, case, cells, alpha_idx, *alpha) {
                emit(format!("coverage_{problem}_{case}_alpha{alpha}.svg"), svg)?;
            }
        }
        for cell in cells {
            if let Some(svg) = histogram_plot(cell) {
                emit(
                    format!("hist_{problem}_{case}_{}.svg", cell.algorithm_id),
                    svg,
                )?;
            }
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbo_infer::harness::Histogram;

    fn cell() -> CellMetrics {
        CellMetrics {
            problem_id: "quad1d-sharp".into(),
            case_id: "normal".into(),
            algorithm_id: "spsa-si".into(),
            checkpoints: vec![10, 100, 1000],
            rmse: Some(vec![(10, 0.5, 0.1), (100, 0.25, 0.05), (1000, 0.1, 0.02)]),
            gap: Some((0.1, 0.01)),
            coverage: vec![vec![(10, 0.8), (100, 0.92), (1000, 0.95)]],
            tstats: Some((0.05, 1.02)),
            histogram: Histogram {
                lo: -4.0,
                hi: 4.0,
                counts: {
                    let mut c = vec![0u64; 40];
                    c[18] = 5;
                    c[20] = 9;
                    c[22] = 4;
                    c
                },
            },
            replications: 20,
            successes: 18,
            failures: 2,
        }
    }

    fn table() -> MetricsTable {
        MetricsTable {
            cells: vec![cell()],
            alpha_levels: vec![0.05],
            replications: 20,
        }
    }

    #[test]
    fn coverage_plot_has_nominal_reference_line() {
        let table = table();
        let cells: Vec<&CellMetrics> = table.cells.iter().collect();
        let svg = coverage_plot("quad1d-sharp", "normal", &cells, 0, 0.05).unwrap();
        // dashed horizontal at 1 - alpha = 0.95
        assert!(svg.contains("stroke-dasharray=\"6,4\""), "{svg}");
        let frame = Frame {
            x_min: 1.0,
            x_max: 3.0,
            y_min: 0.0,
            y_max: 1.0,
        };
        let expected_y = format!("y1=\"{}\"", frame.sy(0.95));
        assert!(svg.contains(&expected_y), "missing line at 0.95");
    }

    #[test]
    fn histogram_plot_overlays_normal_density() {
        let svg = histogram_plot(&cell()).unwrap();
        // dashed density curve plus one rect per bin
        assert!(svg.contains("stroke-dasharray=\"5,3\""));
        // 40 bins + background + axes frame
        assert_eq!(svg.matches("<rect").count(), 42);
    }

    #[test]
    fn empty_metrics_produce_no_files() {
        let empty = MetricsTable {
            cells: vec![],
            alpha_levels: vec![0.05],
            replications: 0,
        };
        let dir = tempfile::tempdir().unwrap();
        let paths = write_plots(&empty, dir.path()).unwrap();
        assert!(paths.is_empty());
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }

    #[test]
    fn full_table_emits_all_plot_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_plots(&table(), dir.path()).unwrap();
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert!(names.contains(&"rmse_quad1d-sharp_normal.svg".to_string()));
        assert!(names.contains(&"coverage_quad1d-sharp_normal_alpha0.05.svg".to_string()));
        assert!(names.contains(&"hist_quad1d-sharp_normal_spsa-si.svg".to_string()));
    }
}
