use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::boundary::BoundaryReport;
use super::rate::{fit_rate_slope, RateReport, TARGET_EXPONENT};
use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Rate(RateReport),
    Boundary(BoundaryReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// One line of `radii.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub scenario: String,
    pub n: usize,
    pub replication: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Report {
    pub fn scenario(&self) -> &str {
        match self {
            Report::Rate(r) => &r.scenario,
            Report::Boundary(b) => &b.scenario,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Report::Rate(r) => r.verdict.passed,
            Report::Boundary(b) => b.verdict.passed,
        }
    }

    /// Per-replication radii; for the boundary experiment the radius is the
    /// posterior median's absolute error at zero.
    pub fn radius_rows(&self) -> Vec<RadiusRow> {
        match self {
            Report::Rate(r) => r
                .records
                .iter()
                .map(|rec| RadiusRow {
                    scenario: r.scenario.clone(),
                    n: rec.n,
                    replication: rec.replication,
                    radius: rec.radius,
                    seed: rec.seed,
                })
                .collect(),
            Report::Boundary(b) => b
                .records
                .iter()
                .map(|rec| RadiusRow {
                    scenario: b.scenario.clone(),
                    n: rec.n,
                    replication: rec.replication,
                    radius: (rec.posterior_median - b.truth_at_zero).abs(),
                    seed: rec.seed,
                })
                .collect(),
        }
    }

    /// Points of the log-log plot: `(n, radius)` pairs entering the fit.
    fn fit_points(&self) -> Vec<(usize, f64)> {
        match self {
            Report::Rate(r) => r.fit_points(),
            Report::Boundary(b) => b
                .cells
                .iter()
                .filter_map(|c| Some((c.n, c.posterior_median?.mae)))
                .collect(),
        }
    }
}

fn csv_text(report: &Report) -> Result<String, ExperimentError> {
    let ser = |e: csv::Error| ExperimentError::Serialize(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // The header is written explicitly so an empty report still gets one.
    w.write_record(["scenario", "n", "replication", "radius", "seed"]).map_err(ser)?;
    for row in report.radius_rows() {
        w.write_record(&[
            row.scenario,
            row.n.to_string(),
            row.replication.to_string(),
            format!("{:?}", row.radius),
            row.seed.to_string(),
        ])
        .map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ExperimentError::Serialize(e.to_string()))
}

fn json_text(report: &Report) -> Result<String, ExperimentError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| ExperimentError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a `radii.csv` written by [`emit_report`].
pub fn read_radii_csv(path: &Path) -> Result<Vec<RadiusRow>, ExperimentError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ExperimentError::Serialize(e.to_string()))?;
    r.deserialize()
        .collect::<Result<Vec<RadiusRow>, _>>()
        .map_err(|e| ExperimentError::Serialize(e.to_string()))
}

/// Log mean radius against `log(n / log n)`, with the fitted line and a
/// reference line of slope −1/3 through the centroid. Those two are the only
/// `<line>` elements.
pub fn render_svg(report: &Report) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let pts: Vec<(f64, f64)> = report
        .fit_points()
        .into_iter()
        .map(|(n, r)| {
            let n = n as f64;
            ((n / n.ln()).ln(), r.ln())
        })
        .collect();
    let fit = fit_rate_slope(&report.fit_points()).ok();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        W / 2.0,
        escape(report.scenario())
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {M} L{M} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">log(n / log n)</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 {})">log radius</text>"#,
        H / 2.0,
        H / 2.0
    );

    if let (Some(fit), true) = (fit, pts.len() >= 2) {
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let fitted = |x: f64| fit.intercept + fit.slope * x;
        let reference = |x: f64| cy + TARGET_EXPONENT * (x - cx);
        let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        ys.extend([fitted(x0), fitted(x1), reference(x0), reference(x1)]);
        let (y0, y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
        let pad_y = ((y1 - y0) * 0.1).max(1e-3);
        let pad_x = ((x1 - x0) * 0.05).max(1e-3);
        let sx = |x: f64| M + (x - (x0 - pad_x)) / ((x1 - x0) + 2.0 * pad_x) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - (y0 - pad_y)) / ((y1 - y0) + 2.0 * pad_y) * (H - 2.0 * M);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f77b4" stroke-width="2"/>"##,
            sx(x0),
            sy(fitted(x0)),
            sx(x1),
            sy(fitted(x1))
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            sx(x0),
            sy(reference(x0)),
            sx(x1),
            sy(reference(x1))
        );
        for &(x, y) in &pts {
            let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#d62728"/>"##, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">fitted slope {:.3} (reference {:.3})</text>"#,
            M + 10.0,
            M + 16.0,
            fit.slope,
            TARGET_EXPONENT
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes one artefact of the report to `path`.
pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<(), ExperimentError> {
    let text = match format {
        Format::Csv => csv_text(report)?,
        Format::Json => json_text(report)?,
        Format::Svg => render_svg(report),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

/// Writes `report.json`, `radii.csv` and `plot.svg` into `dir`.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<(), ExperimentError> {
    emit_report(report, Format::Json, &dir.join("report.json"))?;
    emit_report(report, Format::Csv, &dir.join("radii.csv"))?;
    emit_report(report, Format::Svg, &dir.join("plot.svg"))
}
