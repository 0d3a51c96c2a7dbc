use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::records::{format_sig9, Column, TrialRecord};
use super::stats::{aggregate, Regressor, Series};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#e377c2", "#2ca02c", "#9467bd", "#8c564b"];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub regressor: Regressor,
    pub group_by: Vec<Column>,
    pub title: String,
}

impl PlotStyle {
    /// Error against `m`, one curve per (δ, dithering) combination.
    pub fn error_vs_m() -> Self {
        PlotStyle {
            regressor: Regressor::M,
            group_by: vec![Column::Delta, Column::Dithered],
            title: "PBP reconstruction error vs m".into(),
        }
    }

    /// Error against δ, one curve per (set, m).
    pub fn error_vs_delta() -> Self {
        PlotStyle {
            regressor: Regressor::Delta,
            group_by: vec![Column::Set, Column::M],
            title: "PBP reconstruction error vs delta".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSummary {
    pub curves: usize,
    pub guide_lines: usize,
    pub svg_path: PathBuf,
    pub sidecar_path: PathBuf,
    /// The aggregates that were drawn (and written to the sidecar).
    pub series: Vec<Series>,
}

/// Sidecar path: `fig.svg` → `fig.data.csv`.
pub fn sidecar_path(svg: &Path) -> PathBuf {
    let mut name = svg.file_stem().unwrap_or_default().to_os_string();
    name.push(".data.csv");
    svg.with_file_name(name)
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(min: f64, max: f64, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = (min.log10(), max.log10());
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v.log10() - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// Decades, plus 2× and 5× marks when the span is under two decades.
    fn ticks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let fine = self.hi - self.lo < 2.0;
        for e in self.lo.floor() as i32..=self.hi.ceil() as i32 {
            for mult in [1.0, 2.0, 5.0] {
                if mult != 1.0 && !fine {
                    continue;
                }
                let v = mult * 10f64.powi(e);
                let l = v.log10();
                if l >= self.lo && l <= self.hi {
                    out.push(v);
                }
            }
        }
        out
    }
}

fn marker(out: &mut String, shape: usize, x: f64, y: f64, color: &str) {
    let r = 4.5;
    let _ = match shape % 4 {
        0 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            x, y - r, x + r, y, x, y + r, x - r, y
        ),
        1 => writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#),
        2 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            x, y - r, x + r, y + r, x - r, y + r
        ),
        _ => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{color}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes a log-log SVG of median error (one curve per group, markers at
/// every aggregate point) and a CSV sidecar with the plotted aggregates.
/// Error-vs-m plots with at least two distinct `m` also get dashed
/// `m^{-1/2}` and `m^{-1}` guide lines through the first curve's first
/// point.
pub fn emit_plot(records: &[TrialRecord], style: &PlotStyle, out: &Path) -> Result<PlotSummary> {
    if records.is_empty() {
        return Err(Error::invalid("no records to plot"));
    }
    let series = aggregate(records, &style.group_by, style.regressor);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts.filter(|p| p.median > 0.0 && p.x > 0.0) {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.median);
        ymax = ymax.max(p.median);
    }
    if xmin > xmax {
        return Err(Error::invalid("no positive errors to draw on a log scale"));
    }

    let distinct_x = {
        let mut xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.x)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    let guides: Vec<(f64, &str)> = if style.regressor == Regressor::M && distinct_x >= 2 {
        vec![(-0.5, "m^-1/2"), (-1.0, "m^-1")]
    } else {
        Vec::new()
    };
    let anchor = series[0]
        .points
        .iter()
        .find(|p| p.median > 0.0)
        .map(|p| (p.x, p.median));
    if let Some((x0, y0)) = anchor {
        for (rate, _) in &guides {
            ymin = ymin.min(y0 * (xmax / x0).powf(*rate));
        }
    }

    let xa = Axis::new(xmin, xmax, LEFT, WIDTH - RIGHT);
    let ya = Axis::new(ymin, ymax, HEIGHT - BOTTOM, TOP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&style.title)
    );
    let (plot_l, plot_r, plot_t, plot_b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{plot_l}" y="{plot_t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        plot_r - plot_l,
        plot_b - plot_t
    );
    for t in xa.ticks() {
        let x = xa.map(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{plot_b}\" x2=\"{x:.2}\" y2=\"{plot_t}\" stroke=\"#ddd\"/>\n<text x=\"{x:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            plot_b + 16.0,
            format_sig9(t)
        );
    }
    for t in ya.ticks() {
        let y = ya.map(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{plot_l}\" y1=\"{y:.2}\" x2=\"{plot_r}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            plot_l - 6.0,
            y + 4.0,
            format_sig9(t)
        );
    }
    let xlabel = match style.regressor {
        Regressor::M => "m",
        Regressor::Delta => "delta",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
        (plot_l + plot_r) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">median ||x - x_hat||</text>"#,
        (plot_t + plot_b) / 2.0,
        (plot_t + plot_b) / 2.0
    );

    if let Some((x0, y0)) = anchor {
        for (rate, label) in &guides {
            let y1 = y0 * (xmax / x0).powf(*rate);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6,4" class="guide"/>"#,
                xa.map(x0),
                ya.map(y0),
                xa.map(xmax),
                ya.map(y1)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" fill="gray">{label}</text>"#,
                xa.map(xmax) + 4.0,
                ya.map(y1) + 4.0
            );
        }
    }

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let visible: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.median > 0.0)
            .map(|p| (xa.map(p.x), ya.map(p.median)))
            .collect();
        let _ = writeln!(svg, r#"<g class="curve">"#);
        if visible.len() >= 2 {
            let path: Vec<String> = visible.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for (x, y) in &visible {
            marker(&mut svg, i, *x, *y, color);
        }
        let _ = writeln!(svg, "</g>");
        let ly = TOP + 10.0 + 18.0 * i as f64;
        marker(&mut svg, i, WIDTH - RIGHT + 16.0, ly, color);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - RIGHT + 26.0,
            ly + 4.0,
            escape(&s.label())
        );
    }
    let _ = writeln!(svg, "</svg>");

    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, svg)?;

    let side = sidecar_path(out);
    let mut w = csv::Writer::from_path(&side)?;
    w.write_record(["series", "x", "median", "mean", "count"])?;
    for s in &series {
        for p in &s.points {
            w.write_record([
                s.label(),
                format_sig9(p.x),
                format_sig9(p.median),
                format_sig9(p.mean),
                p.count.to_string(),
            ])?;
        }
    }
    w.flush()?;

    Ok(PlotSummary {
        curves: series.len(),
        guide_lines: if anchor.is_some() { guides.len() } else { 0 },
        svg_path: out.to_path_buf(),
        sidecar_path: side,
        series,
    })
}
