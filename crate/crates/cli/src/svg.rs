//! Self-contained SVG 1.1 plots. Coordinates are printed with two decimals so
//! identical input gives byte-identical documents.

use std::fmt::Write as _;

use prosody_core::aems::{FrequencyZone, PolyFit, Spectrum};
use prosody_core::contour::{F0Track, PolyContourModel};
use prosody_core::rhythm::QuadrantStats;
use prosody_core::timetree::TimeTree;

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

pub const BLUE: &str = "#0000ff";
pub const RED: &str = "#ff0000";

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".into()
    } else {
        s.into()
    }
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"##,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(out, "<title>{}</title>", esc(title));
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, num(width), num(height));
    let _ = writeln!(
        out,
        r##"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"##,
        num(width / 2.0),
        esc(title)
    );
}

fn footer(out: &mut String) {
    out.push_str("</svg>\n");
}

/// Linear data-to-pixel mapping for the standard plot frame.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, x1) = (LEFT, W - RIGHT);
        let (y0, y1) = (H - BOTTOM, TOP);
        let _ = writeln!(
            out,
            r##"<g class="axes" stroke="#000000" fill="none"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"##,
            num(x0), num(y0), num(x1), num(y0), num(x0), num(y0), num(x0), num(y1)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
                num(self.px(xv)),
                num(y0 + 16.0),
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
                num(x0 - 6.0),
                num(self.py(yv) + 4.0),
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
            num((x0 + x1) / 2.0),
            num(H - 8.0),
            esc(x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"##,
            num((y0 + y1) / 2.0),
            num((y0 + y1) / 2.0),
            esc(y_label)
        );
    }

    fn polyline(&self, out: &mut String, class: &str, color: &str, pts: impl Iterator<Item = (f64, f64)>) {
        let coords: Vec<String> = pts
            .map(|(x, y)| format!("{},{}", num(self.px(x)), num(self.py(y))))
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"##,
            coords.join(" ")
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Magnitude spectrum with the polynomial shape and one vertical marker per zone.
pub fn spectrum_plot(spec: &Spectrum, shape: Option<&PolyFit>, zones: &[FrequencyZone], title: &str) -> String {
    let freqs = spec.freqs();
    let x_hi = freqs.last().copied().unwrap_or(0.0);
    let samples: Vec<(f64, f64)> = match shape {
        Some(p) => (0..=200)
            .map(|i| {
                let x = x_hi * i as f64 / 200.0;
                (x, p.eval(x))
            })
            .collect(),
        None => Vec::new(),
    };
    let (mut lo, mut hi) = bounds(spec.magnitudes.iter().copied().chain(samples.iter().map(|p| p.1)));
    lo = lo.min(0.0);
    if !hi.is_finite() {
        hi = 1.0;
    }
    let frame = Frame::new((0.0, x_hi), (lo, hi));
    let mut out = String::new();
    header(&mut out, W, H, title);
    frame.axes(&mut out, "frequency (Hz)", "magnitude");
    frame.polyline(&mut out, "spectrum", "#333333", freqs.iter().copied().zip(spec.magnitudes.iter().copied()));
    if !samples.is_empty() {
        frame.polyline(&mut out, "shape", "#d95f02", samples.into_iter());
    }
    for z in zones {
        let x = frame.px(z.center_hz);
        let _ = writeln!(
            out,
            r##"<line class="zone" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1b9e77" stroke-dasharray="4 3"/>"##,
            num(x),
            num(TOP),
            num(x),
            num(H - BOTTOM)
        );
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" fill="#1b9e77">{} Hz</text>"##,
            num(x + 3.0),
            num(TOP + 10.0),
            tick_label(z.center_hz)
        );
    }
    footer(&mut out);
    out
}

/// `#rrggbb` on the straight blue-to-red line for `t` in [0, 1].
pub fn gradient(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}00{b:02x}")
}

/// Rows of z-scored magnitudes as coloured cells. The smallest z value across
/// all rows maps to pure blue, the largest to pure red.
pub fn heatmap(rows: &[(String, Vec<f64>)], freqs: &[f64], title: &str) -> String {
    let (lo, hi) = bounds(rows.iter().flat_map(|r| r.1.iter().copied()));
    let cols = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(1);
    let cell_w = (W - LEFT - RIGHT) / cols as f64;
    let cell_h = 24.0;
    let height = TOP + BOTTOM + cell_h * rows.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, W, height, title);
    let _ = writeln!(
        out,
        "<metadata>colour scale: z-scored magnitude, linear from {BLUE} at the minimum to {RED} at the maximum</metadata>"
    );
    for (r, (label, z)) in rows.iter().enumerate() {
        let y = TOP + r as f64 * cell_h;
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
            num(LEFT - 6.0),
            num(y + cell_h / 2.0 + 4.0),
            esc(label)
        );
        for (c, &v) in z.iter().enumerate() {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let _ = writeln!(
                out,
                r##"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"##,
                num(LEFT + c as f64 * cell_w),
                num(y),
                num(cell_w),
                num(cell_h),
                gradient(t)
            );
        }
    }
    let base = TOP + cell_h * rows.len().max(1) as f64;
    if let (Some(first), Some(last)) = (freqs.first(), freqs.last()) {
        let _ = writeln!(out, r##"<text x="{}" y="{}">{} Hz</text>"##, num(LEFT), num(base + 16.0), tick_label(*first));
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" text-anchor="end">{} Hz</text>"##,
            num(W - RIGHT),
            num(base + 16.0),
            tick_label(*last)
        );
    }
    footer(&mut out);
    out
}

/// Voiced F0 frames as dots with fitted contours overlaid.
pub fn f0_plot(track: &F0Track, models: &[PolyContourModel], title: &str) -> String {
    let times = bounds(track.frames().iter().map(|f| f.time_s));
    let x = if times.0.is_finite() { times } else { (0.0, 1.0) };
    let curves: Vec<Vec<(f64, f64)>> = models
        .iter()
        .map(|m| {
            let [a, b] = m.fit.domain;
            let shift = x_origin(m);
            (0..=100)
                .map(|i| {
                    let t = a + (b - a) * i as f64 / 100.0;
                    (t + shift, m.fit.eval(t))
                })
                .collect()
        })
        .collect();
    let (mut lo, mut hi) = bounds(track.voiced().map(|v| v.1).chain(curves.iter().flatten().map(|p| p.1)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let frame = Frame::new(x, (lo, hi));
    let mut out = String::new();
    header(&mut out, W, H, title);
    frame.axes(&mut out, "time (s)", "F0 (Hz)");
    out.push_str("<g class=\"f0\" fill=\"#333333\">\n");
    for (t, f) in track.voiced() {
        let _ = writeln!(out, r##"<circle cx="{}" cy="{}" r="1.5"/>"##, num(frame.px(t)), num(frame.py(f)));
    }
    out.push_str("</g>\n");
    for c in curves {
        frame.polyline(&mut out, "contour", "#d95f02", c.into_iter());
    }
    footer(&mut out);
    out
}

fn x_origin(m: &PolyContourModel) -> f64 {
    match m.domain {
        prosody_core::contour::ContourDomain::WholeTrack => 0.0,
        prosody_core::contour::ContourDomain::Ipu { start_s, .. } => start_s,
    }
}

/// Tree diagram: leaves evenly spaced along the bottom, parents centred above
/// their children, edges labelled with their s/w mark.
pub fn tree_plot(tree: &TimeTree, title: &str) -> String {
    let leaves = tree.fringe().len().max(1);
    let depth = tree.depth().max(1);
    let width = (LEFT + RIGHT + 56.0 * leaves as f64).max(320.0);
    let height = TOP + BOTTOM + 48.0 * depth as f64;
    let step_x = (width - LEFT - RIGHT) / leaves as f64;
    let step_y = (height - TOP - BOTTOM) / depth as f64;
    let mut out = String::new();
    header(&mut out, width, height, title);
    let mut next_leaf = 0usize;
    let root = layout(tree, 0, &mut next_leaf, step_x, step_y, &mut out);
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="middle" font-weight="bold">r</text>"##,
        num(root.0),
        num(root.1 - 6.0)
    );
    footer(&mut out);
    out
}

fn layout(t: &TimeTree, level: usize, next_leaf: &mut usize, sx: f64, sy: f64, out: &mut String) -> (f64, f64) {
    let y = TOP + 12.0 + level as f64 * sy;
    match t {
        TimeTree::Leaf { label, .. } => {
            let x = LEFT + (*next_leaf as f64 + 0.5) * sx;
            *next_leaf += 1;
            let _ = writeln!(
                out,
                r##"<text class="leaf" x="{}" y="{}" text-anchor="middle">{}</text>"##,
                num(x),
                num(y + 14.0),
                esc(label)
            );
            (x, y)
        }
        TimeTree::Node { children, .. } => {
            let pos: Vec<(f64, f64)> = children
                .iter()
                .map(|(_, c)| layout(c, level + 1, next_leaf, sx, sy, out))
                .collect();
            let x = pos.iter().map(|p| p.0).sum::<f64>() / pos.len() as f64;
            for ((mark, _), (cx, cy)) in children.iter().zip(&pos) {
                let strong = matches!(mark, prosody_core::timetree::Mark::Strong);
                let _ = writeln!(
                    out,
                    r##"<line class="edge" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}"/>"##,
                    num(x),
                    num(y),
                    num(*cx),
                    num(*cy),
                    if strong { "#000000" } else { "#888888" },
                    if strong { "2" } else { "1" }
                );
                let _ = writeln!(
                    out,
                    r##"<text class="mark" x="{}" y="{}" text-anchor="middle">{}</text>"##,
                    num((x + cx) / 2.0 + if *cx < x { -6.0 } else { 6.0 }),
                    num((y + cy) / 2.0),
                    if strong { "s" } else { "w" }
                );
            }
            (x, y)
        }
    }
}

/// Scatter of successive z-score pairs with the four quadrants labelled.
pub fn quadrant_plot(stats: &QuadrantStats, title: &str) -> String {
    let m = stats
        .points
        .iter()
        .fold(1.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()))
        * 1.1;
    let frame = Frame::new((-m, m), (-m, m));
    let mut out = String::new();
    header(&mut out, W, H, title);
    frame.axes(&mut out, "z(i)", "z(i+1)");
    let _ = writeln!(
        out,
        r##"<g stroke="#999999" stroke-dasharray="3 3"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"##,
        num(frame.px(-m)),
        num(frame.py(0.0)),
        num(frame.px(m)),
        num(frame.py(0.0)),
        num(frame.px(0.0)),
        num(frame.py(-m)),
        num(frame.px(0.0)),
        num(frame.py(m))
    );
    let c = &stats.counts;
    for (label, count, qx, qy) in [
        ("LL", c.ll, 0.5, 0.5),
        ("SL", c.sl, -0.5, 0.5),
        ("SS", c.ss, -0.5, -0.5),
        ("LS", c.ls, 0.5, -0.5),
    ] {
        let _ = writeln!(
            out,
            r##"<text class="quadrant" x="{}" y="{}" text-anchor="middle" fill="#777777">{label} ({count})</text>"##,
            num(frame.px(qx * m * 1.6)),
            num(frame.py(qy * m * 1.6))
        );
    }
    out.push_str("<g class=\"points\" fill=\"#d95f02\">\n");
    for &(a, b) in &stats.points {
        let _ = writeln!(out, r##"<circle cx="{}" cy="{}" r="3"/>"##, num(frame.px(a)), num(frame.py(b)));
    }
    out.push_str("</g>\n");
    footer(&mut out);
    out
}
