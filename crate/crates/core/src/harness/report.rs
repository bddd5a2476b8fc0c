//! Experiment reports: CSV with a self-describing `# key: value` header, and
//! a minimal SVG line plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// Curve label, e.g. `Lf=2` or `B=4`.
    pub curve: String,
    /// SNR or Eb/N0 in dB, or a sweep parameter.
    pub x: f64,
    pub value: f64,
    pub predicted: Option<f64>,
    /// Monte Carlo trials (frames or subset draws).
    pub trials: u64,
    /// Samples the value averages over (bits for BER, subsets for MSE).
    pub samples: u64,
    pub errors: Option<u64>,
    pub ci95: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    /// Ordered `(key, value)` header entries.
    pub metadata: Vec<(String, String)>,
    pub records: Vec<Record>,
}

const COLUMNS: [&str; 9] = [
    "curve",
    "x",
    "value",
    "predicted",
    "trials",
    "samples",
    "errors",
    "ci95",
    "reliable",
];

impl ExperimentReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        self.metadata.push((key.to_string(), value));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn curves(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.curve) {
                out.push(r.curve.clone());
            }
        }
        out
    }

    pub fn curve(&self, name: &str) -> Vec<&Record> {
        self.records.iter().filter(|r| r.curve == name).collect()
    }

    pub fn has_unreliable(&self) -> bool {
        self.records.iter().any(|r| !r.reliable)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for r in &self.records {
            w.write_record([
                r.curve.clone(),
                r.x.to_string(),
                r.value.to_string(),
                r.predicted.map(|p| p.to_string()).unwrap_or_default(),
                r.trials.to_string(),
                r.samples.to_string(),
                r.errors.map(|e| e.to_string()).unwrap_or_default(),
                r.ci95.to_string(),
                r.reliable.to_string(),
            ])?;
        }
        let body = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Report(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut report = ExperimentReport::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else {
                break;
            };
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest
                .split_once(": ")
                .ok_or_else(|| Error::Report(format!("bad header line `{rest}`")))?;
            report.metadata.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut rd = csv::ReaderBuilder::new().from_reader(text[body_start..].as_bytes());
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != COLUMNS {
            return Err(Error::Report(format!("unexpected columns {headers:?}")));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Report(format!("`{s}`: {e}")))
        };
        let int = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|e| Error::Report(format!("`{s}`: {e}")))
        };
        for row in rd.records() {
            let row = row?;
            let opt = |i: usize| (!row[i].is_empty()).then(|| row[i].to_string());
            report.records.push(Record {
                curve: row[0].to_string(),
                x: num(&row[1])?,
                value: num(&row[2])?,
                predicted: opt(3).map(|s| num(&s)).transpose()?,
                trials: int(&row[4])?,
                samples: int(&row[5])?,
                errors: opt(6).map(|s| int(&s)).transpose()?,
                ci95: num(&row[7])?,
                reliable: row[8]
                    .parse::<bool>()
                    .map_err(|e| Error::Report(e.to_string()))?,
            });
        }
        Ok(report)
    }

    /// Line plot of `value` against `x`, one polyline per curve, log-scaled
    /// y axis when every value is positive.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 640.0;
        const H: f64 = 440.0;
        const M: f64 = 60.0;
        const COLORS: [&str; 8] = [
            "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
        ];
        let pts: Vec<&Record> = self
            .records
            .iter()
            .filter(|r| r.value.is_finite())
            .collect();
        let log_y = !pts.is_empty() && pts.iter().all(|r| r.value > 0.0);
        let ty = |v: f64| if log_y { v.log10() } else { v };
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for r in &pts {
            x0 = x0.min(r.x);
            x1 = x1.max(r.x);
            y0 = y0.min(ty(r.value));
            y1 = y1.max(ty(r.value));
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let py = |y: f64| H - M - (ty(y) - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        )
        .unwrap();
        writeln!(s, "<title>{}</title>", escape(title)).unwrap();
        writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        )
        .unwrap();
        let y_label = if log_y { "log10(value)" } else { "value" };
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">x [{x0} .. {x1}]</text>"#,
            W / 2.0,
            H - 20.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{y_label} [{y0:.3} .. {y1:.3}]</text>"#,
            H / 2.0,
            H / 2.0
        )
        .unwrap();
        for (i, name) in self.curves().iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let points: Vec<String> = self
                .curve(name)
                .into_iter()
                .filter(|r| r.value.is_finite() && (!log_y || r.value > 0.0))
                .map(|r| format!("{:.2},{:.2}", px(r.x), py(r.value)))
                .collect();
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                points.join(" "),
                escape(name)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
                W - M + 4.0,
                M + 14.0 * (i as f64 + 1.0),
                escape(name)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "svg" | "svg-plot" => Ok(ReportFormat::Svg),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Writes `<out_dir>/<stem>.csv`, plus `<stem>.svg` when `format` is SVG.
/// Returns the paths written.
pub fn emit_report(
    report: &ExperimentReport,
    out_dir: &Path,
    stem: &str,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, report.to_csv()?)?;
    let mut written = vec![csv_path];
    if format == ReportFormat::Svg {
        let svg_path = out_dir.join(format!("{stem}.svg"));
        std::fs::write(&svg_path, report.to_svg(stem))?;
        written.push(svg_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new();
        r.meta("experiment", "mse");
        r.meta("convention", "snr = E|s|^2 / sigma_n^2, with: colon");
        for (curve, k) in [("Lf=2", 1.0), ("Lf=8", 3.0)] {
            for x in [0.0, 10.5, 20.0] {
                r.records.push(Record {
                    curve: curve.into(),
                    x,
                    value: k * 0.1 / (1.0 + x),
                    predicted: if x > 5.0 { Some(0.013) } else { None },
                    trials: 4,
                    samples: 1000,
                    errors: None,
                    ci95: 1e-4,
                    reliable: x < 15.0,
                });
            }
        }
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = ExperimentReport::new().to_csv().unwrap();
        assert_eq!(
            csv,
            "curve,x,value,predicted,trials,samples,errors,ci95,reliable\n"
        );
        let back = ExperimentReport::from_csv(&csv).unwrap();
        assert!(back.records.is_empty() && back.metadata.is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = r.to_csv().unwrap();
        let back = ExperimentReport::from_csv(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv().unwrap(), text);
        assert!(r.has_unreliable());
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let r = sample();
        let svg = r.to_svg("mse");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(
            ExperimentReport::new()
                .to_svg("x")
                .matches("<polyline")
                .count(),
            0
        );
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&sample(), dir.path(), "mse", ReportFormat::Svg).unwrap();
        assert_eq!(paths.len(), 2);
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(ExperimentReport::from_csv(&csv).unwrap(), sample());
    }
}
