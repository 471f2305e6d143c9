//! Standalone SVG figures: region maps, Bode plots, robust-performance
//! curves and time responses.

use std::f64::consts::PI;
use std::fmt::Write;

use pidspace_core::analyzer::LoopContext;
use pidspace_core::boundary::BoundaryKind;
use pidspace_core::region::{self, RegionMap};
use pidspace_core::{grid, PidGains};

use crate::error::AppResult;
use crate::schema::SimDoc;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Linear or base-10 log axis from data range to pixel range.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    p0: f64,
    p1: f64,
    log: bool,
}

impl Axis {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64, log: bool) -> Self {
        let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        let (lo, hi) = if hi - lo > 1e-300 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { lo, hi, p0, p1, log }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.p0 + (v - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            return (a..=b).map(|e| 10f64.powi(e)).collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = write!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, esc(title));
}

/// Frame, ticks, grid lines and labels for one panel.
fn frame(out: &mut String, xa: &Axis, ya: &Axis, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (xa.p0, xa.p1, ya.p1, ya.p0);
    for t in xa.ticks() {
        let px = xa.map(t);
        let _ = write!(out, r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{y1:.2}" stroke="#e4e4e4"/>"##);
        let _ = write!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 16.0, fmt_tick(t));
    }
    for t in ya.ticks() {
        let py = ya.map(t);
        let _ = write!(out, r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#e4e4e4"/>"##);
        let _ = write!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, fmt_tick(t));
    }
    let _ = write!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    let _ = write!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, y1 + 34.0, esc(xlabel));
    let (lx, ly) = (x0 - 50.0, (y0 + y1) / 2.0);
    let _ = write!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        esc(ylabel)
    );
}

/// Polyline pieces, broken at non-finite values and at `max_jump` pixel jumps.
fn polylines(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64, max_jump: f64) {
    let mut piece: Vec<(f64, f64)> = Vec::new();
    let flush = |out: &mut String, piece: &mut Vec<(f64, f64)>| {
        if piece.len() >= 2 {
            let mut d = String::new();
            for (x, y) in piece.iter() {
                let _ = write!(d, "{x:.2},{y:.2} ");
            }
            let _ = write!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
                d.trim_end()
            );
        }
        piece.clear();
    };
    for &(x, y) in pts {
        if !(x.is_finite() && y.is_finite()) {
            flush(out, &mut piece);
            continue;
        }
        if let Some(&(px, py)) = piece.last() {
            if (x - px).abs() > max_jump || (y - py).abs() > max_jump {
                flush(out, &mut piece);
            }
        }
        piece.push((x, y));
    }
    flush(out, &mut piece);
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(&str, &str, bool)]) {
    for (k, (label, color, filled)) in entries.iter().enumerate() {
        let yy = y + 18.0 * k as f64;
        if *filled {
            let _ = write!(out, r#"<rect x="{x}" y="{:.1}" width="14" height="10" fill="{color}" stroke="black" stroke-width="0.5"/>"#, yy - 9.0);
        } else {
            let _ = write!(out, r#"<line x1="{x}" y1="{:.1}" x2="{}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#, yy - 4.0, x + 14.0, yy - 4.0);
        }
        let _ = write!(out, r#"<text x="{}" y="{yy:.1}">{}</text>"#, x + 20.0, esc(label));
    }
}

fn kind_color(k: BoundaryKind) -> &'static str {
    match k {
        BoundaryKind::Crb => "#1f3fbf",
        BoundaryKind::RrbPlusOne | BoundaryKind::RrbMinusOne => "#7a1fbf",
        BoundaryKind::Pm => "#d46a00",
        BoundaryKind::Gm => "#b0006a",
        BoundaryKind::Ms => "#2b8a3e",
    }
}

/// All-bits cells in green, cells that are only stable in grey, boundary
/// curves on top.
pub fn region_svg(map: &RegionMap) -> String {
    let g = &map.grid;
    let plane = &map.plane;
    let xa = Axis::new(g.x_range[0], g.x_range[1], LEFT, W - RIGHT, false);
    let ya = Axis::new(g.y_range[0], g.y_range[1], H - BOTTOM, TOP, false);
    let mut out = String::new();
    let title = format!("{} region, {} = {}", plane.structure, plane.fixed_axis(), fmt_tick(plane.fixed_value));
    header(&mut out, W, H, &title);

    let (cw, ch) = ((xa.p1 - xa.p0) / g.nx as f64, (ya.p0 - ya.p1) / g.ny as f64);
    let color = |bits: u8| -> Option<&'static str> {
        if bits & map.required == map.required {
            Some("#8fd19e")
        } else if bits & region::STABLE != 0 && map.evaluated != region::STABLE {
            Some("#e8e8e8")
        } else {
            None
        }
    };
    for j in 0..g.ny {
        let mut i = 0;
        while i < g.nx {
            let c = color(map.cells[j * g.nx + i]);
            let start = i;
            while i < g.nx && color(map.cells[j * g.nx + i]) == c {
                i += 1;
            }
            if let Some(c) = c {
                let _ = write!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#,
                    xa.p0 + start as f64 * cw,
                    ya.p0 - (j + 1) as f64 * ch,
                    (i - start) as f64 * cw + 0.3,
                    ch + 0.3
                );
            }
        }
    }
    let _ = write!(
        out,
        r#"<clipPath id="plot"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath><g clip-path="url(#plot)">"#,
        xa.p0,
        ya.p1,
        xa.p1 - xa.p0,
        ya.p0 - ya.p1
    );
    let jump = 0.25 * (xa.p1 - xa.p0).max(ya.p0 - ya.p1);
    for c in &map.boundaries {
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (xa.map(p.x), ya.map(p.y))).collect();
        let width = if c.kind == BoundaryKind::Ms { 0.6 } else { 1.4 };
        polylines(&mut out, &pts, kind_color(c.kind), width, jump);
        for l in &c.singular_segments {
            let far = 1e3 * (g.x_range[1] - g.x_range[0]).abs().max((g.y_range[1] - g.y_range[0]).abs());
            let a = (l.point[0] - far * l.direction[0], l.point[1] - far * l.direction[1]);
            let b = (l.point[0] + far * l.direction[0], l.point[1] + far * l.direction[1]);
            let _ = write!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.4" stroke-dasharray="5,3"/>"#,
                xa.map(a.0),
                ya.map(a.1),
                xa.map(b.0),
                ya.map(b.1),
                kind_color(c.kind)
            );
        }
    }
    out.push_str("</g>");
    frame(&mut out, &xa, &ya, plane.x_axis.name(), plane.y_axis.name());

    let mut entries: Vec<(&str, &str, bool)> = vec![("all constraints", "#8fd19e", true)];
    if map.evaluated != region::STABLE {
        entries.push(("stable only", "#e8e8e8", true));
    }
    let mut seen = Vec::new();
    for c in &map.boundaries {
        let label = match c.kind {
            BoundaryKind::Crb => "complex root",
            BoundaryKind::RrbPlusOne | BoundaryKind::RrbMinusOne => "real root",
            BoundaryKind::Pm => "phase margin",
            BoundaryKind::Gm => "gain margin",
            BoundaryKind::Ms => "mixed sensitivity",
        };
        if !seen.contains(&label) {
            seen.push(label);
            entries.push((label, kind_color(c.kind), false));
        }
    }
    legend(&mut out, W - RIGHT + 16.0, TOP + 10.0, &entries);
    out.push_str("</svg>\n");
    out
}

/// One panel of `(x, y)` series with optional horizontal reference lines.
struct Panel<'a> {
    xlabel: &'a str,
    ylabel: &'a str,
    log_x: bool,
    series: Vec<(&'a str, &'a str, Vec<(f64, f64)>)>,
    hlines: Vec<(f64, &'a str)>,
}

fn draw_panel(out: &mut String, p: &Panel, top: f64, bottom: f64) {
    let finite = |v: f64| v.is_finite();
    let xs = p.series.iter().flat_map(|s| s.2.iter().map(|q| q.0)).filter(|v| finite(*v) && (!p.log_x || *v > 0.0));
    let ys = p
        .series
        .iter()
        .flat_map(|s| s.2.iter().map(|q| q.1))
        .chain(p.hlines.iter().map(|h| h.0))
        .filter(|v| finite(*v));
    let (xlo, xhi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (ylo, yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (xlo, xhi) = if xlo.is_finite() { (xlo, xhi) } else { (0.1, 1.0) };
    let (ylo, yhi) = if ylo.is_finite() { (ylo, yhi) } else { (0.0, 1.0) };
    let pad = 0.05 * (yhi - ylo).max(1e-9);
    let xa = Axis::new(xlo, xhi, LEFT, W - RIGHT, p.log_x);
    let ya = Axis::new(ylo - pad, yhi + pad, bottom, top, false);
    frame(out, &xa, &ya, p.xlabel, p.ylabel);
    for (v, color) in &p.hlines {
        let py = ya.map(*v);
        let _ = write!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="{color}" stroke-dasharray="6,4"/>"#,
            xa.p0,
            xa.p1
        );
    }
    for (_, color, pts) in &p.series {
        let px: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (xa.map(*x), ya.map(*y))).collect();
        polylines(out, &px, color, 1.5, f64::INFINITY);
    }
    let entries: Vec<(&str, &str, bool)> = p.series.iter().map(|s| (s.0, s.1, false)).collect();
    legend(out, W - RIGHT + 16.0, top + 10.0, &entries);
}

fn figure(title: &str, panels: &[Panel]) -> String {
    let h = 40.0 + panels.len() as f64 * 300.0;
    let mut out = String::new();
    header(&mut out, W, h, title);
    for (k, p) in panels.iter().enumerate() {
        let top = 40.0 + k as f64 * 300.0;
        draw_panel(&mut out, p, top, top + 300.0 - BOTTOM - 10.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Frequencies in rad/s for response plots: log-spaced up to Nyquist.
fn frequencies(sample_time: f64, n: usize) -> Vec<f64> {
    grid::log_spaced(n, 1e-3 * PI, (1.0 - 1e-4) * PI)
        .into_iter()
        .map(|th| th / sample_time)
        .collect()
}

/// Open-loop Bode magnitude (dB) and continuous phase (degrees).
pub fn bode_svg(ctx: &LoopContext, gains: &PidGains) -> AppResult<String> {
    let t = ctx.sample_time();
    let mut mag = Vec::new();
    let mut phase = Vec::new();
    let mut prev: Option<f64> = None;
    for w in frequencies(t, 600) {
        match ctx.loop_value(gains, w * t)? {
            Some(l) => {
                let mut ph = l.arg().to_degrees();
                if let Some(p) = prev {
                    ph -= 360.0 * ((ph - p) / 360.0).round();
                }
                prev = Some(ph);
                mag.push((w, 20.0 * l.norm().log10()));
                phase.push((w, ph));
            }
            None => {
                mag.push((w, f64::NAN));
                phase.push((w, f64::NAN));
            }
        }
    }
    let panels = [
        Panel {
            xlabel: "frequency (rad/s)",
            ylabel: "magnitude (dB)",
            log_x: true,
            series: vec![("|L|", "#1f3fbf", mag)],
            hlines: vec![(0.0, "#888888")],
        },
        Panel {
            xlabel: "frequency (rad/s)",
            ylabel: "phase (deg)",
            log_x: true,
            series: vec![("arg L", "#d46a00", phase)],
            hlines: vec![(-180.0, "#888888")],
        },
    ];
    Ok(figure("Open-loop frequency response", &panels))
}

/// `|W_S S| + |W_T T|` in dB against the 0 dB bound.
pub fn rp_svg(ctx: &LoopContext, gains: &PidGains) -> AppResult<String> {
    let t = ctx.sample_time();
    let mut pts = Vec::new();
    for w in frequencies(t, 600) {
        let v = ctx.rp_value(gains, w * t)?;
        pts.push((w, if v.is_nan() { f64::NAN } else { 20.0 * v.log10() }));
    }
    let panels = [Panel {
        xlabel: "frequency (rad/s)",
        ylabel: "|W_S S| + |W_T T| (dB)",
        log_x: true,
        series: vec![("robust performance", "#2b8a3e", pts)],
        hlines: vec![(0.0, "#b00020")],
    }];
    Ok(figure("Robust performance", &panels))
}

/// Reference and output against time.
pub fn response_svg(sim: &SimDoc) -> String {
    let r = sim.time.iter().copied().zip(sim.reference.iter().copied()).collect();
    let y = sim.time.iter().copied().zip(sim.output.iter().copied()).collect();
    let panels = [Panel {
        xlabel: "time (s)",
        ylabel: "output",
        log_x: false,
        series: vec![("reference", "#888888", r), ("output", "#1f3fbf", y)],
        hlines: vec![],
    }];
    figure("Closed-loop response", &panels)
}
