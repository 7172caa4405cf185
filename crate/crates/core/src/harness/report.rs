use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::model::{PayoffKind, SetId};
use crate::stepping::SchemeKind;

pub const CSV_HEADER: &str = "set,payoff,scheme,m,N,N_prime,error,observed_order,wall_ms";

/// How the reference solution of a study is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceKind {
    /// MCS2 on the same grid with this many steps.
    Mcs2 { steps: usize },
    /// The semi-closed put-on-the-min series at every grid node.
    Analytic,
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReferenceKind::Mcs2 { steps } => write!(f, "MCS2@{steps}"),
            ReferenceKind::Analytic => f.write_str("analytic"),
        }
    }
}

/// One (scheme, N) measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub set: SetId,
    pub payoff: PayoffKind,
    pub scheme: SchemeKind,
    pub m: usize,
    pub n: usize,
    /// Steps actually taken after the equal-work adjustment.
    pub n_prime: usize,
    /// Maximum absolute error over the region of interest.
    pub error: f64,
    /// Order measured against the previous row of the same scheme.
    pub observed_order: Option<f64>,
    pub wall_ms: f64,
}

/// Which quantity the rows sweep over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    /// Fixed grid, varying `N`.
    Temporal,
    /// `N` tied to `m`, varying `m`.
    Total,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub kind: StudyKind,
    pub reference: ReferenceKind,
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    pub fn new(kind: StudyKind, reference: ReferenceKind) -> Self {
        ErrorReport { kind, reference, rows: Vec::new() }
    }

    /// Rows of one scheme, in insertion order.
    pub fn scheme_rows(&self, scheme: SchemeKind) -> impl Iterator<Item = &ReportRow> + '_ {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn schemes(&self) -> Vec<SchemeKind> {
        let mut s: Vec<SchemeKind> = Vec::new();
        for r in &self.rows {
            if !s.contains(&r.scheme) {
                s.push(r.scheme);
            }
        }
        s
    }

    pub fn error(&self, scheme: SchemeKind, n: usize, m: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.scheme == scheme && r.n == n && r.m == m).map(|r| r.error)
    }

    /// Least-squares slope of `log2(error)` against `log2(N)` (temporal) or
    /// `log2(m)` (total) for one scheme.
    pub fn fitted_slope(&self, scheme: SchemeKind) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .scheme_rows(scheme)
            .filter(|r| r.error > 0.0)
            .map(|r| {
                let x = match self.kind {
                    StudyKind::Temporal => r.n,
                    StudyKind::Total => r.m,
                };
                ((x as f64).log2(), r.error.log2())
            })
            .collect();
        least_squares_slope(&pts)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let order = r.observed_order.map(|o| format!("{o:.6}")).unwrap_or_default();
            writeln!(
                s,
                "{},{},{},{},{},{},{:.12e},{},{:.3}",
                r.set.number(),
                r.payoff.short_name(),
                r.scheme,
                r.m,
                r.n,
                r.n_prime,
                r.error,
                order,
                r.wall_ms
            )
            .expect("writing to a String");
        }
        s
    }

    /// Log-log error plot, one polyline per scheme.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 480.0);
        let (left, right, top, bottom) = (70.0, 130.0, 30.0, 50.0);
        let xs = |r: &ReportRow| match self.kind {
            StudyKind::Temporal => r.n as f64,
            StudyKind::Total => r.m as f64,
        };
        let pts: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.error > 0.0).map(|r| (xs(r).log10(), r.error.log10())).collect();
        let mut svg = String::new();
        writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
        writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
        let (x_label, title) = match self.kind {
            StudyKind::Temporal => ("N", "temporal error"),
            StudyKind::Total => ("m", "total error"),
        };
        writeln!(svg, r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title} (reference {})</text>"#, (left + w - right) / 2.0, self.reference).unwrap();
        if pts.is_empty() {
            svg.push_str("</svg>\n");
            return svg;
        }
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let (y0, y1) = bounds(pts.iter().map(|p| p.1));
        let (pw, ph) = (w - left - right, h - top - bottom);
        let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| top + (y1 - y) / (y1 - y0) * ph;
        writeln!(svg, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
        for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
            let x = d as f64;
            if x >= x0 && x <= x1 {
                writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{d}</text>"#, px(x), top + ph + 16.0).unwrap();
            }
        }
        for d in (y0.floor() as i32)..=(y1.ceil() as i32) {
            let y = d as f64;
            if y >= y0 && y <= y1 {
                writeln!(svg, r##"<line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#dddddd"/>"##, py(y), left + pw).unwrap();
                writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">1e{d}</text>"#, left - 6.0, py(y) + 4.0).unwrap();
            }
        }
        writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{x_label}</text>"#, left + pw / 2.0, h - 10.0).unwrap();
        for (k, scheme) in self.schemes().into_iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let line: Vec<String> = self
                .scheme_rows(scheme)
                .filter(|r| r.error > 0.0)
                .map(|r| format!("{:.2},{:.2}", px(xs(r).log10()), py(r.error.log10())))
                .collect();
            writeln!(svg, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, line.join(" ")).unwrap();
            for p in &line {
                let (cx, cy) = p.split_once(',').expect("formatted pair");
                writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{colour}"/>"#).unwrap();
            }
            let ly = top + 16.0 * (k as f64 + 1.0);
            writeln!(svg, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#, w - right + 12.0, w - right + 32.0).unwrap();
            writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{scheme}</text>"#, w - right + 38.0, ly + 4.0).unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

const PALETTE: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Writes `<stem>.csv` and `<stem>.svg` into `dir` and returns both paths.
pub fn emit_report(report: &ErrorReport, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let svg = dir.join(format!("{stem}.svg"));
    fs::write(&csv, report.to_csv())?;
    fs::write(&svg, report.to_svg())?;
    Ok((csv, svg))
}
