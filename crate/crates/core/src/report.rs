//! CSV and SVG output.
//!
//! CSV files start with one or more `#` comment lines (the configuration
//! first), then the header. Reals are written with 17 significant digits so
//! that they parse back to the same `f64`; missing values are empty fields.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{CoverageRow, PlanRecord, StudyRow};
use crate::intervals::Method;

/// A row type with a fixed CSV schema.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;

    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String>;
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_real(s: &str, name: &str) -> std::result::Result<f64, String> {
    s.parse().map_err(|_| format!("field `{name}`: bad number `{s}`"))
}

fn parse_opt_real(s: &str, name: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_real(s, name).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("field `{name}`: bad integer `{s}`"))
}

impl CsvRecord for StudyRow {
    const HEADER: &'static [&'static str] = &[
        "study", "p", "param", "n", "estimate", "truth", "abs_error", "rel_error", "ci_lower", "ci_upper", "method",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.study.clone(),
            opt_int(self.p),
            opt_real(self.param),
            self.n.to_string(),
            opt_real(self.estimate),
            opt_real(self.truth),
            opt_real(self.abs_error),
            opt_real(self.rel_error),
            opt_real(self.ci_lower),
            opt_real(self.ci_upper),
            self.method.clone(),
            self.seed.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self {
            study: f[0].to_string(),
            p: if f[1].is_empty() { None } else { Some(parse_int(f[1], "p")?) },
            param: parse_opt_real(f[2], "param")?,
            n: parse_int(f[3], "n")?,
            estimate: parse_opt_real(f[4], "estimate")?,
            truth: parse_opt_real(f[5], "truth")?,
            abs_error: parse_opt_real(f[6], "abs_error")?,
            rel_error: parse_opt_real(f[7], "rel_error")?,
            ci_lower: parse_opt_real(f[8], "ci_lower")?,
            ci_upper: parse_opt_real(f[9], "ci_upper")?,
            method: f[10].to_string(),
            seed: parse_int(f[11], "seed")?,
        })
    }
}

impl CsvRecord for CoverageRow {
    const HEADER: &'static [&'static str] =
        &["k", "alpha", "p_true", "method", "replications", "coverage", "exact_coverage", "avg_width"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            format_real(self.alpha),
            format_real(self.p_true),
            self.method.label().to_string(),
            self.replications.to_string(),
            format_real(self.coverage),
            format_real(self.exact_coverage),
            format_real(self.avg_width),
        ]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self {
            k: parse_int(f[0], "k")?,
            alpha: parse_real(f[1], "alpha")?,
            p_true: parse_real(f[2], "p_true")?,
            method: f[3].parse::<Method>().map_err(|e| e.to_string())?,
            replications: parse_int(f[4], "replications")?,
            coverage: parse_real(f[5], "coverage")?,
            exact_coverage: parse_real(f[6], "exact_coverage")?,
            avg_width: parse_real(f[7], "avg_width")?,
        })
    }
}

impl CsvRecord for PlanRecord {
    const HEADER: &'static [&'static str] = &["example", "p", "param", "delta", "alpha", "n_continuous", "n_required"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.example.clone(),
            self.p.to_string(),
            opt_real(self.param),
            format_real(self.delta),
            format_real(self.alpha),
            format_real(self.n_continuous),
            opt_int(self.n_required),
        ]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self {
            example: f[0].to_string(),
            p: parse_int(f[1], "p")?,
            param: parse_opt_real(f[2], "param")?,
            delta: parse_real(f[3], "delta")?,
            alpha: parse_real(f[4], "alpha")?,
            n_continuous: parse_real(f[5], "n_continuous")?,
            n_required: if f[6].is_empty() { None } else { Some(parse_int(f[6], "n_required")?) },
        })
    }
}

pub fn write_csv<W: Write, R: CsvRecord>(mut out: W, comments: &[String], rows: &[R]) -> std::io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    writeln!(out, "{}", R::HEADER.join(","))?;
    for r in rows {
        writeln!(out, "{}", r.fields().join(","))?;
    }
    out.flush()
}

pub fn csv_string<R: CsvRecord>(comments: &[String], rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, comments, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn emit_csv<R: CsvRecord>(rows: &[R], comments: &[String], path: &Path) -> Result<()> {
    fs::write(path, csv_string(comments, rows)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Comment lines (without `#`) and records of a CSV produced by [`write_csv`].
pub fn parse_csv<R: CsvRecord>(text: &str) -> Result<(Vec<String>, Vec<R>)> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if !header_seen {
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols != R::HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected header `{}`", R::HEADER.join(",")),
                });
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != R::HEADER.len() {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected {} fields, found {}", R::HEADER.len(), fields.len()),
            });
        }
        rows.push(R::from_fields(&fields).map_err(|reason| Error::Parse { line: line_no, reason })?);
    }
    if !header_seen {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            reason: "missing header".into(),
        });
    }
    Ok((comments, rows))
}

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    pub title: Option<String>,
    /// Horizontal reference line, e.g. the nominal coverage.
    pub reference_y: Option<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

fn color_for(group: &str, index: usize) -> &'static str {
    match group {
        "hoeffding" => "red",
        "clopper_pearson" => "black",
        "jeffreys" => "blue",
        _ => PALETTE[index % PALETTE.len()],
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn column<R: CsvRecord>(field: &str) -> Result<usize> {
    R::HEADER
        .iter()
        .position(|h| *h == field)
        .ok_or_else(|| Error::UnknownField(field.to_string()))
}

/// A line chart of `y_field` against `x_field`, one polyline per distinct
/// value of `group_field`. Rows with an empty `x` or `y` are skipped.
pub fn render_svg<R: CsvRecord>(
    rows: &[R],
    x_field: &str,
    y_field: &str,
    group_field: &str,
    opts: &SvgOptions,
) -> Result<String> {
    let (xi, yi, gi) = (column::<R>(x_field)?, column::<R>(y_field)?, column::<R>(group_field)?);

    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let f = r.fields();
        if f[xi].is_empty() || f[yi].is_empty() {
            continue;
        }
        let parse = |s: &str, name: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                reason: format!("field `{name}` is not numeric: `{s}`"),
            })
        };
        let point = (parse(&f[xi], x_field)?, parse(&f[yi], y_field)?);
        groups.entry(f[gi].clone()).or_default().push(point);
    }
    for pts in groups.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let all = groups.values().flatten();
    let (mut x_min, mut x_max, mut y_min, mut y_max) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if let Some(r) = opts.reference_y {
        y_min = y_min.min(r);
        y_max = y_max.max(r);
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| {
        if x_max > x_min {
            LEFT + (x - x_min) / (x_max - x_min) * plot_w
        } else {
            LEFT + plot_w / 2.0
        }
    };
    let sy = |y: f64| {
        if y_max > y_min {
            TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h
        } else {
            TOP + plot_h / 2.0
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(t) = &opts.title {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(t)
        );
    }
    let (x0, x1, y0, y1) = (LEFT, LEFT + plot_w, TOP + plot_h, TOP);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (v, anchor) in [(x_min, "start"), (x_max, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
            sx(v),
            y0 + 18.0,
            tick(v)
        );
    }
    for v in [y_min, y_max] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.3}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
            x0 - 6.0,
            sy(v) + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x_field)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_field)
    );
    if let Some(r) = opts.reference_y {
        let y = sy(r);
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{y:.3}" x2="{x1}" y2="{y:.3}" stroke="gray" stroke-dasharray="6,4"/>"#
        );
    }

    for (i, (name, pts)) in groups.iter().enumerate() {
        let color = color_for(name, i);
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        if pts.len() == 1 {
            let (x, y) = pts[0];
            let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 20.0 * i as f64 + 10.0;
        let lx = x1 + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        let t = format!("{v:.4}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn emit_svg<R: CsvRecord>(
    rows: &[R],
    x_field: &str,
    y_field: &str,
    group_field: &str,
    opts: &SvgOptions,
    path: &Path,
) -> Result<()> {
    let svg = render_svg(rows, x_field, y_field, group_field, opts)?;
    fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, method: Method, cov: f64) -> CoverageRow {
        CoverageRow {
            k: 10,
            alpha: 0.1,
            p_true: p,
            method,
            replications: 100,
            coverage: cov,
            exact_coverage: cov,
            avg_width: 0.3,
        }
    }

    #[test]
    fn reals_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 123456789.123, -0.0] {
            let back: f64 = format_real(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn coverage_csv_round_trip() {
        let rows = vec![row(0.01, Method::Hoeffding, 0.99), row(0.02, Method::Jeffreys, 0.875)];
        let text = csv_string(&["cfg a=1".to_string(), "note".to_string()], &rows);
        assert!(text.starts_with("# cfg a=1\n# note\nk,alpha,p_true,"));
        let (comments, back) = parse_csv::<CoverageRow>(&text).unwrap();
        assert_eq!(comments, vec!["cfg a=1", "note"]);
        assert_eq!(back, rows);
    }

    #[test]
    fn study_csv_empty_fields() {
        let r = StudyRow {
            study: "hypersphere".into(),
            p: Some(30),
            param: None,
            n: 5,
            estimate: None,
            truth: Some(2.0e-5),
            abs_error: None,
            rel_error: None,
            ci_lower: None,
            ci_upper: None,
            method: "infeasible".into(),
            seed: 9,
        };
        let text = csv_string(&[], std::slice::from_ref(&r));
        assert!(text.lines().nth(1).unwrap().starts_with("hypersphere,30,,5,,"));
        let (_, back) = parse_csv::<StudyRow>(&text).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(parse_csv::<CoverageRow>("# only comments\n").is_err());
        assert!(parse_csv::<CoverageRow>("a,b\n").is_err());
        let bad = format!("{}\n1,2\n", CoverageRow::HEADER.join(","));
        assert!(matches!(parse_csv::<CoverageRow>(&bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn svg_structure() {
        let rows: Vec<CoverageRow> = Method::ALL
            .into_iter()
            .flat_map(|m| (1..=5).map(move |i| row(i as f64 / 10.0, m, 0.9 + i as f64 / 100.0)))
            .collect();
        let opts = SvgOptions {
            title: Some("k=10".into()),
            reference_y: Some(0.9),
        };
        let svg = render_svg(&rows, "p_true", "coverage", "method", &opts).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(r#"stroke="red""#));
        assert!(svg.contains(r#"stroke="black" stroke-width="1.5""#));
        assert!(svg.contains(r#"stroke="blue""#));
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn svg_single_point_and_unknown_field() {
        let rows = vec![row(0.5, Method::Jeffreys, 0.9)];
        let svg = render_svg(&rows, "p_true", "coverage", "method", &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(matches!(
            render_svg(&rows, "p_true", "nope", "method", &SvgOptions::default()),
            Err(Error::UnknownField(_))
        ));
    }
}
