//! Minimal hand-written SVG figures.
//!
//! Axes are drawn with a `<rect>` frame and tick labels, so the only
//! `<line>` elements are the data lines: fitted + dashed slope-1 reference
//! on convergence plots, and the dashed `-pλ` reference on stability plots.

use std::fmt::Write as _;
use std::path::Path;

use super::CliError;
use crate::experiments::{StabilityReport, StrongErrorReport};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// A report to render; stability plots carry an optional dashed reference level.
pub enum PlotData<'a> {
    Convergence(&'a StrongErrorReport),
    Stability(&'a StabilityReport, Option<f64>),
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Self {
        let (x0, x1) = padded(xs);
        let (y0, y1) = padded(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }

    /// Clips the segment `y = y_at(x)` to the frame's x-range.
    fn segment(&self, y_at: impl Fn(f64) -> f64, style: &str) -> String {
        format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" {style}/>\n",
            self.px(self.x0),
            self.py(y_at(self.x0)),
            self.px(self.x1),
            self.py(y_at(self.x1))
        )
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <clipPath id=\"plot\"><rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\"/></clipPath>\n\
             <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"30\" text-anchor=\"middle\">{title}</text>", W / 2.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>", W / 2.0, H - 15.0);
        let _ = writeln!(
            s,
            "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{ylabel}</text>",
            H / 2.0,
            H / 2.0
        );
        for i in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * i as f64 / 4.0;
            let fy = self.y0 + (self.y1 - self.y0) * i as f64 / 4.0;
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.2}</text>",
                self.px(fx),
                H - MARGIN + 16.0,
                fx
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>",
                MARGIN - 6.0,
                self.py(fy) + 4.0,
                fy
            );
        }
        s.push_str("<g clip-path=\"url(#plot)\">\n");
        s
    }
}

fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.08 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

pub fn convergence_svg(report: &StrongErrorReport) -> Result<String, CliError> {
    if report.deltas.is_empty() {
        return Err(CliError::input("cannot plot an empty convergence report"));
    }
    let pts: Vec<(f64, f64)> = report
        .deltas
        .iter()
        .zip(&report.errors)
        .map(|(d, e)| (d.log2(), e.log2()))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let frame = Frame::new(pts.iter().map(|p| p.0), pts.iter().map(|p| p.1));
    let mut s = frame.open("strong error at terminal time", "log2(delta)", "log2(error)");
    if let Some(fit) = report.fit {
        s += &frame.segment(
            |x| fit.intercept + fit.slope * x,
            "class=\"fit\" stroke=\"steelblue\" stroke-width=\"1.5\"",
        );
    }
    // slope-1 reference through the first point
    let anchor = pts.first().copied().unwrap_or((0.0, 0.0));
    s += &frame.segment(
        |x| anchor.1 + (x - anchor.0),
        "class=\"reference\" stroke=\"gray\" stroke-dasharray=\"6 4\"",
    );
    for (x, y) in &pts {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"crimson\"/>",
            frame.px(*x),
            frame.py(*y)
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn stability_svg(report: &StabilityReport, reference: Option<f64>) -> Result<String, CliError> {
    if report.ks.is_empty() {
        return Err(CliError::input("cannot plot an empty stability report"));
    }
    let pts: Vec<(f64, f64)> = report
        .times()
        .zip(&report.exponents)
        .filter_map(|(t, e)| e.map(|e| (t, e)))
        .collect();
    let ys = pts.iter().map(|p| p.1).chain(reference);
    let xs = report.times();
    let frame = Frame::new(xs, ys);
    let title = format!("moment exponent, p = {}", report.p);
    let mut s = frame.open(&title, "t = k delta", "log E|Y_k|^p / (k delta)");
    let points: Vec<String> = pts
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline class=\"exponent\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>",
        points.join(" ")
    );
    if let Some(level) = reference {
        s += &frame.segment(
            |_| level,
            &format!("class=\"reference\" data-level=\"{level}\" stroke=\"gray\" stroke-dasharray=\"6 4\""),
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Renders and writes the plot. An empty report is an error and leaves no file.
pub fn emit_plot(data: PlotData<'_>, path: &Path) -> Result<(), CliError> {
    let svg = match data {
        PlotData::Convergence(r) => convergence_svg(r)?,
        PlotData::Stability(r, reference) => stability_svg(r, reference)?,
    };
    std::fs::write(path, svg)
        .map_err(|e| CliError::output(format!("cannot write {}: {e}", path.display())))
}
