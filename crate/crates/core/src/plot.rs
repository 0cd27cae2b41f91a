//! Static SVG plots of rate sweeps and arc distributions.

use std::fmt::Write;

use crate::domain::rate_exponent;
use crate::error::{Error, Result};
use crate::experiments::rate_scale;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Rows `alpha,n,sup_error,...`.
    RateLogLog,
    /// Rows `k,measure,...`.
    ArcHistogram,
}

/// Renders CSV text (header row first) as an SVG document.
pub fn render_plot(csv: &str, kind: PlotKind) -> Result<String> {
    let rows = parse_rows(csv)?;
    match kind {
        PlotKind::RateLogLog => {
            let pts = rows
                .iter()
                .map(|r| {
                    if r.len() < 3 {
                        return Err(Error::Plot("rate rows need alpha,n,sup_error".into()));
                    }
                    Ok((r[0], r[1] as u32, r[2]))
                })
                .collect::<Result<Vec<_>>>()?;
            rate_loglog(&pts)
        }
        PlotKind::ArcHistogram => {
            let probs = rows
                .iter()
                .map(|r| r.get(1).copied().ok_or_else(|| Error::Plot("arc rows need k,measure".into())))
                .collect::<Result<Vec<_>>>()?;
            arc_histogram(&probs)
        }
    }
}

fn parse_rows(csv: &str) -> Result<Vec<Vec<f64>>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Plot(format!("cannot parse field {f:?}")))
                })
                .collect()
        })
        .collect()
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
            (lo - pad, hi + pad)
        };
        Frame {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(out, "</g>");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
            f.px(xv),
            y0 + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#,
            x0 - 6.0,
            f.py(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{ylabel}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

/// Log-log scatter of `sup_error` against `ln² n / n`, one series per `α`,
/// each with a reference line of slope `c_α` through the series centroid.
pub fn rate_loglog(points: &[(f64, u32, f64)]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Plot("no rate data".into()));
    }
    if let Some(p) = points.iter().find(|p| p.2.is_nan() || p.2 <= 0.0 || p.1 < 2) {
        return Err(Error::Plot(format!("cannot place {p:?} on a log-log plot")));
    }
    let mut alphas: Vec<f64> = Vec::new();
    for p in points {
        if !alphas.contains(&p.0) {
            alphas.push(p.0);
        }
    }
    let xy: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.0, rate_scale(p.1).ln(), p.2.ln())).collect();
    let frame = Frame::new(xy.iter().map(|p| p.1), xy.iter().map(|p| p.2));
    let mut out = String::new();
    header(&mut out, "sup error against ln² n / n");
    axes(&mut out, &frame, "ln(ln² n / n)", "ln(sup error)");
    for (i, &alpha) in alphas.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let series: Vec<(f64, f64)> = xy.iter().filter(|p| p.0 == alpha).map(|p| (p.1, p.2)).collect();
        let _ = writeln!(out, r#"<g class="series" data-alpha="{alpha}" fill="{color}">"#);
        for &(x, y) in &series {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4"/>"#, frame.px(x), frame.py(y));
        }
        let _ = writeln!(out, "</g>");
        let c = rate_exponent(alpha.clamp(0.0, std::f64::consts::PI));
        let m = series.len() as f64;
        let cx = series.iter().map(|p| p.0).sum::<f64>() / m;
        let cy = series.iter().map(|p| p.1).sum::<f64>() / m;
        let (xa, xb) = frame.x;
        let _ = writeln!(
            out,
            r#"<line class="reference" data-slope="{c}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            frame.px(xa),
            frame.py(cy + c * (xa - cx)),
            frame.px(xb),
            frame.py(cy + c * (xb - cx))
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{:.1}" y="{ly:.1}" fill="{color}">α = {alpha}</text>"#,
            WIDTH - MARGIN - 120.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Bar chart of an arc distribution; bar `k` has height `probs[k − 1]`.
pub fn arc_histogram(probs: &[f64]) -> Result<String> {
    if probs.is_empty() {
        return Err(Error::Plot("no arc data".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Plot(format!("arc measure {p} is not a probability")));
    }
    let frame = Frame {
        x: (0.5, probs.len() as f64 + 0.5),
        y: (0.0, probs.iter().cloned().fold(0.0, f64::max).max(1e-12) * 1.05),
    };
    let mut out = String::new();
    header(&mut out, "exit distribution over arcs");
    axes(&mut out, &frame, "arc k", "measure");
    let bar = (frame.px(1.0) - frame.px(0.0)) * 0.8;
    let _ = writeln!(out, r##"<g class="bars" fill="#1f77b4">"##);
    for (i, &p) in probs.iter().enumerate() {
        let k = (i + 1) as f64;
        let top = frame.py(p);
        let _ = writeln!(
            out,
            r#"<rect class="bar" data-k="{}" data-value="{p:e}" x="{:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}"/>"#,
            i + 1,
            frame.px(k) - bar / 2.0,
            frame.py(0.0) - top
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
