use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use super::svg::{escape, num, Doc};
use super::{VizKind, VizSpec};
use crate::error::{Error, Result};
use crate::models::{HistoryRow, KcId, LearnerHistory, SnapshotEntry};

pub const OPACITY_MIN: f64 = 0.15;
pub const OPACITY_MAX: f64 = 1.0;

const INK: &str = "#08519c";
const MEAN_HUE: &str = "#d62728";
const VARIANCE_HUE: &str = "#1f77b4";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Low variance renders dark: `clamp(1 - variance / variance_max, 0.15, 1)`.
pub fn fill_opacity(variance: f64, variance_max: f64) -> f64 {
    if !(variance_max > 0.0) || !variance_max.is_finite() {
        return OPACITY_MAX;
    }
    (1.0 - variance / variance_max).clamp(OPACITY_MIN, OPACITY_MAX)
}

struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn of(spec: &VizSpec) -> Frame {
        let top = if spec.title.is_empty() { 20.0 } else { 40.0 };
        let (left, right, bottom) = (50.0, 20.0, 70.0);
        Frame {
            x: left,
            y: top,
            w: spec.width as f64 - left - right,
            h: spec.height as f64 - top - bottom,
        }
    }

    fn centre(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

fn clipped(mean: f64) -> f64 {
    mean.max(0.0)
}

fn variance_max(entries: &[SnapshotEntry]) -> f64 {
    entries.iter().map(|e| e.variance).filter(|v| v.is_finite()).fold(0.0, f64::max)
}

fn max_clipped(entries: &[SnapshotEntry]) -> f64 {
    entries.iter().map(|e| clipped(e.mean)).fold(0.0, f64::max)
}

fn per_unit(pixels: f64, extent: f64) -> f64 {
    if extent > 0.0 {
        pixels / extent
    } else {
        0.0
    }
}

fn start(spec: &VizSpec, scale: f64, var_max: f64, extra: &[(&str, String)]) -> Doc {
    let mut attrs = vec![
        ("data-scale", num(scale)),
        ("data-variance-max", num(var_max)),
        ("data-opacity-min", num(OPACITY_MIN)),
        ("data-opacity-max", num(OPACITY_MAX)),
    ];
    attrs.extend(extra.iter().cloned());
    let mut doc = Doc::new(spec.width, spec.height, spec.kind.as_str(), &attrs);
    if !spec.title.is_empty() {
        doc.text(spec.width as f64 / 2.0, 26.0, 16.0, "middle", &spec.title);
    }
    doc
}

fn legend(doc: &mut Doc, spec: &VizSpec, text: &str) {
    doc.text(10.0, spec.height as f64 - 10.0, 11.0, "start", text);
}

const OPACITY_NOTE: &str = "darker = lower variance";

pub(super) fn render(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    match spec.kind {
        VizKind::Bar | VizKind::Dot => bar_or_dot(entries, spec),
        VizKind::Pie => pie(entries, spec),
        VizKind::Rose => rose(entries, spec),
        VizKind::Bubble => bubble(entries, spec),
        VizKind::Treemap => treemap(entries, spec),
        VizKind::Radar => radar(entries, spec),
        VizKind::Wordcloud => wordcloud(entries, spec),
        VizKind::Line => unreachable!("line charts are rendered from a history"),
    }
}

/// Value range covering zero and every `mean +- 2 sd`.
fn value_range<'a>(points: impl Iterator<Item = (f64, f64)> + 'a) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (mean, variance) in points {
        let sd = if variance.is_finite() { variance.sqrt() } else { 0.0 };
        lo = lo.min(mean - 2.0 * sd);
        hi = hi.max(mean + 2.0 * sd);
    }
    if hi - lo <= 0.0 {
        hi = lo + 1.0;
    }
    (lo, hi)
}

fn bar_or_dot(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let (lo, hi) = value_range(entries.iter().map(|e| (e.mean, e.variance)));
    let scale = f.h / (hi - lo);
    let zero = f.y + hi * scale;
    let mut doc = start(spec, scale, variance_max(entries), &[("data-zero", num(zero))]);
    doc.raw(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\"/>",
        num(f.x),
        num(zero),
        num(f.x + f.w),
        num(zero)
    ));
    doc.text(f.x - 4.0, zero + 4.0, 10.0, "end", "0");

    let slot = f.w / entries.len() as f64;
    for (i, e) in entries.iter().enumerate() {
        let cx = f.x + slot * (i as f64 + 0.5);
        let sd = if e.variance.is_finite() { e.variance.sqrt() } else { 0.0 };
        let y = zero - e.mean * scale;
        let shape = if spec.kind == VizKind::Bar {
            let bw = slot * 0.7;
            format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{INK}\"/>",
                num(cx - bw / 2.0),
                num(y.min(zero)),
                num(bw),
                num(e.mean.abs() * scale)
            )
        } else {
            format!("<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{INK}\"/>", num(cx), num(y))
        };
        let whisker = format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444444\" stroke-width=\"1.5\"/>",
            num(cx),
            num(zero - (e.mean + 2.0 * sd) * scale),
            num(cx),
            num(zero - (e.mean - 2.0 * sd) * scale)
        );
        let ly = f.y + f.h + 12.0;
        let label = format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-40 {} {})\">{}</text>",
            num(cx),
            num(ly),
            num(cx),
            num(ly),
            escape(&short(&e.title, 18))
        );
        doc.mark(e, &[shape, whisker, label]);
    }
    legend(&mut doc, spec, "height = mean, whiskers = mean +/- 2 sd");
    doc.finish()
}

fn short(title: &str, max: usize) -> String {
    if title.chars().count() <= max {
        title.to_string()
    } else {
        let mut s: String = title.chars().take(max - 1).collect();
        s.push('.');
        s
    }
}

fn wedge(cx: f64, cy: f64, r: f64, a0: f64, sweep: f64) -> String {
    if sweep >= TAU - 1e-9 {
        return format!(
            "M {} {} A {} {} 0 1 1 {} {} A {} {} 0 1 1 {} {} Z",
            num(cx),
            num(cy - r),
            num(r),
            num(r),
            num(cx),
            num(cy + r),
            num(r),
            num(r),
            num(cx),
            num(cy - r)
        );
    }
    let (x1, y1) = (cx + r * a0.cos(), cy + r * a0.sin());
    let (x2, y2) = (cx + r * (a0 + sweep).cos(), cy + r * (a0 + sweep).sin());
    format!(
        "M {} {} L {} {} A {} {} 0 {} 1 {} {} Z",
        num(cx),
        num(cy),
        num(x1),
        num(y1),
        num(r),
        num(r),
        (sweep > std::f64::consts::PI) as u8,
        num(x2),
        num(y2)
    )
}

fn pie(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let (cx, cy) = f.centre();
    let r = f.w.min(f.h) / 2.0 * 0.9;
    let total: f64 = entries.iter().map(|e| clipped(e.mean)).sum();
    let scale = per_unit(TAU, total);
    let var_max = variance_max(entries);
    let mut doc = start(spec, scale, var_max, &[("data-radius", num(r))]);
    let mut a0 = -FRAC_PI_2;
    for (i, e) in entries.iter().enumerate() {
        let sweep = clipped(e.mean) * scale;
        let path = format!(
            "<path d=\"{}\" data-sweep=\"{}\" fill=\"{}\" fill-opacity=\"{}\" stroke=\"#ffffff\"/>",
            wedge(cx, cy, r, a0, sweep),
            num(sweep),
            PALETTE[i % PALETTE.len()],
            num(fill_opacity(e.variance, var_max))
        );
        doc.mark(e, &[path]);
        a0 += sweep;
    }
    legend(&mut doc, spec, &format!("slice area proportional to mean (negative means clipped to 0); {OPACITY_NOTE}"));
    doc.finish()
}

fn rose(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let (cx, cy) = f.centre();
    let r_max = f.w.min(f.h) / 2.0 * 0.9;
    let scale = per_unit(r_max, max_clipped(entries));
    let var_max = variance_max(entries);
    let mut doc = start(spec, scale, var_max, &[]);
    let sweep = TAU / entries.len() as f64;
    for (i, e) in entries.iter().enumerate() {
        let r = clipped(e.mean) * scale;
        let path = format!(
            "<path d=\"{}\" data-radius=\"{}\" fill=\"{INK}\" fill-opacity=\"{}\" stroke=\"#ffffff\"/>",
            wedge(cx, cy, r, -FRAC_PI_2 + sweep * i as f64, sweep),
            num(r),
            num(fill_opacity(e.variance, var_max))
        );
        doc.mark(e, &[path]);
    }
    legend(&mut doc, spec, &format!("radius proportional to mean (negative means clipped to 0); {OPACITY_NOTE}"));
    doc.finish()
}

fn bubble(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let n = entries.len();
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let (cw, ch) = (f.w / cols as f64, f.h / rows as f64);
    let r_max = cw.min(ch) / 2.0 * 0.95;
    let scale = per_unit(r_max, max_clipped(entries));
    let var_max = variance_max(entries);
    let mut doc = start(spec, scale, var_max, &[]);
    for (i, e) in entries.iter().enumerate() {
        let (col, row) = (i % cols, i / cols);
        let cx = f.x + cw * (col as f64 + 0.5);
        let cy = f.y + ch * (row as f64 + 0.5);
        let circle = format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{INK}\" fill-opacity=\"{}\"/>",
            num(cx),
            num(cy),
            num(clipped(e.mean) * scale),
            num(fill_opacity(e.variance, var_max))
        );
        let label = format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333333\">{}</text>",
            num(cx),
            num(cy + ch / 2.0 - 2.0),
            escape(&short(&e.title, 20))
        );
        doc.mark(e, &[circle, label]);
    }
    legend(&mut doc, spec, &format!("radius proportional to mean (negative means clipped to 0); {OPACITY_NOTE}"));
    doc.finish()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn worst(row: &[f64], side: f64) -> f64 {
    let s: f64 = row.iter().sum();
    let max = row.iter().cloned().fold(0.0, f64::max);
    let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
    (side * side * max / (s * s)).max(s * s / (side * side * min))
}

/// Squarified layout of positive `areas` (sorted descending) filling
/// `bounds`; the areas must sum to the bounds' area.
fn squarify(areas: &[f64], bounds: Rect) -> Vec<Rect> {
    let mut out = Vec::with_capacity(areas.len());
    let mut r = bounds;
    let mut i = 0;
    while i < areas.len() {
        let side = r.w.min(r.h);
        let mut j = i + 1;
        while j < areas.len() && worst(&areas[i..=j], side) <= worst(&areas[i..j], side) {
            j += 1;
        }
        let row = &areas[i..j];
        let s: f64 = row.iter().sum();
        if r.w >= r.h {
            let rw = per_unit(s, r.h);
            let mut y = r.y;
            for a in row {
                let h = per_unit(*a, rw);
                out.push(Rect { x: r.x, y, w: rw, h });
                y += h;
            }
            r.x += rw;
            r.w = (r.w - rw).max(0.0);
        } else {
            let rh = per_unit(s, r.w);
            let mut x = r.x;
            for a in row {
                let w = per_unit(*a, rh);
                out.push(Rect { x, y: r.y, w, h: rh });
                x += w;
            }
            r.y += rh;
            r.h = (r.h - rh).max(0.0);
        }
        i = j;
    }
    out
}

fn treemap(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let total: f64 = entries.iter().map(|e| clipped(e.mean)).sum();
    let scale = per_unit(f.w * f.h, total);
    let var_max = variance_max(entries);
    let mut doc = start(spec, scale, var_max, &[]);

    let positive: Vec<f64> = entries.iter().map(|e| clipped(e.mean) * scale).filter(|a| *a > 0.0).collect();
    let mut rects = squarify(&positive, Rect { x: f.x, y: f.y, w: f.w, h: f.h }).into_iter();
    for (i, e) in entries.iter().enumerate() {
        let r = if clipped(e.mean) > 0.0 {
            rects.next().expect("one rectangle per positive area")
        } else {
            Rect { x: f.x, y: f.y, w: 0.0, h: 0.0 }
        };
        let rect = format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"{}\" stroke=\"#ffffff\"/>",
            num(r.x),
            num(r.y),
            num(r.w),
            num(r.h),
            PALETTE[i % PALETTE.len()],
            num(fill_opacity(e.variance, var_max))
        );
        let mut shapes = vec![rect];
        if r.w > 40.0 && r.h > 14.0 {
            shapes.push(format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#111111\">{}</text>",
                num(r.x + 4.0),
                num(r.y + 13.0),
                escape(&short(&e.title, ((r.w - 8.0) / 6.5).max(2.0) as usize))
            ));
        }
        doc.mark(e, &shapes);
    }
    legend(&mut doc, spec, &format!("area proportional to mean (negative means clipped to 0); {OPACITY_NOTE}"));
    doc.finish()
}

fn polygon(points: &[(f64, f64)], colour: &str, class: &str) -> String {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
    format!(
        "<polygon class=\"{class}\" points=\"{}\" fill=\"{colour}\" fill-opacity=\"0.25\" stroke=\"{colour}\" stroke-width=\"2\"/>",
        pts.join(" ")
    )
}

fn radar(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let (cx, cy) = f.centre();
    let r_max = f.w.min(f.h) / 2.0 * 0.8;
    let scale = per_unit(r_max, max_clipped(entries));
    let var_max = variance_max(entries);
    let var_scale = per_unit(r_max, var_max);
    let mut doc = start(spec, scale, var_max, &[("data-variance-scale", num(var_scale))]);

    let n = entries.len() as f64;
    let angle = |i: usize| -FRAC_PI_2 + TAU * i as f64 / n;
    let at = |i: usize, r: f64| (cx + r * angle(i).cos(), cy + r * angle(i).sin());
    for i in 0..entries.len() {
        let (x, y) = at(i, r_max);
        doc.raw(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\"/>",
            num(cx),
            num(cy),
            num(x),
            num(y)
        ));
    }
    let radius = |e: &SnapshotEntry| clipped(e.mean) * scale;
    let var_radius = |e: &SnapshotEntry| if e.variance.is_finite() { e.variance * var_scale } else { r_max };
    let means: Vec<_> = entries.iter().enumerate().map(|(i, e)| at(i, radius(e))).collect();
    let vars: Vec<_> = entries.iter().enumerate().map(|(i, e)| at(i, var_radius(e))).collect();
    doc.raw(&polygon(&vars, VARIANCE_HUE, "variance"));
    doc.raw(&polygon(&means, MEAN_HUE, "mean"));

    for (i, e) in entries.iter().enumerate() {
        let (mx, my) = means[i];
        let (vx, vy) = vars[i];
        let (lx, ly) = at(i, r_max + 12.0);
        let anchor = if (lx - cx).abs() < 1.0 {
            "middle"
        } else if lx > cx {
            "start"
        } else {
            "end"
        };
        doc.mark(
            e,
            &[
                format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" data-radius=\"{}\" fill=\"{MEAN_HUE}\"/>",
                    num(mx),
                    num(my),
                    num(radius(e))
                ),
                format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" data-radius=\"{}\" fill=\"{VARIANCE_HUE}\"/>",
                    num(vx),
                    num(vy),
                    num(var_radius(e))
                ),
                format!(
                    "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"{anchor}\">{}</text>",
                    num(lx),
                    num(ly + 3.0),
                    escape(&short(&e.title, 18))
                ),
            ],
        );
    }
    legend(&mut doc, spec, "red = mean (negative clipped to 0), blue = variance");
    doc.finish()
}

fn overlaps(a: &Rect, b: &Rect) -> bool {
    a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h
}

fn wordcloud(entries: &[SnapshotEntry], spec: &VizSpec) -> String {
    let f = Frame::of(spec);
    let (cx, cy) = f.centre();
    let size_max = (f.h / 5.0).min(48.0);
    let scale = per_unit(size_max, max_clipped(entries));
    let var_max = variance_max(entries);
    let mut doc = start(spec, scale, var_max, &[]);

    let bounds = Rect { x: f.x, y: f.y, w: f.w, h: f.h };
    let inside = |r: &Rect| r.x >= bounds.x && r.y >= bounds.y && r.x + r.w <= bounds.x + bounds.w && r.y + r.h <= bounds.y + bounds.h;
    let mut placed: Vec<Rect> = Vec::new();
    for e in entries {
        let size = clipped(e.mean) * scale;
        let w = 0.6 * size * e.title.chars().count() as f64;
        let h = size;
        // Archimedean spiral r = a * theta, first fit wins.
        let mut spot = (cx, cy);
        let mut theta = 0.0f64;
        while theta < 400.0 {
            let r = 1.5 * theta;
            let (x, y) = (cx + r * theta.cos(), cy + r * theta.sin());
            let b = Rect { x: x - w / 2.0, y: y - h / 2.0, w, h };
            if inside(&b) && placed.iter().all(|p| !overlaps(p, &b)) {
                spot = (x, y);
                placed.push(b);
                break;
            }
            theta += 0.05;
        }
        let text = format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" fill=\"{INK}\" fill-opacity=\"{}\">{}</text>",
            num(spot.0),
            num(spot.1 + 0.35 * h),
            num(size),
            num(fill_opacity(e.variance, var_max)),
            escape(&e.title)
        );
        doc.mark(e, &[text]);
    }
    legend(&mut doc, spec, &format!("font size proportional to mean (negative means clipped to 0); {OPACITY_NOTE}"));
    doc.finish()
}

pub(super) fn line(entries: &[SnapshotEntry], history: &LearnerHistory, spec: &VizSpec) -> Result<String> {
    let series: BTreeMap<KcId, Vec<&HistoryRow>> = history.series();
    let chosen: Vec<(&SnapshotEntry, &Vec<&HistoryRow>)> =
        entries.iter().filter_map(|e| series.get(&e.kc_id).map(|s| (e, s))).collect();
    if chosen.is_empty() {
        return Err(Error::MissingHistory);
    }
    let rows = || chosen.iter().flat_map(|(_, s)| s.iter());
    let x_lo = rows().map(|r| r.event_index).min().unwrap_or(0) as f64;
    let x_hi = rows().map(|r| r.event_index).max().unwrap_or(0) as f64;
    let (lo, hi) = value_range(rows().map(|r| (r.mean, r.variance)));

    let f = Frame::of(spec);
    let scale = f.h / (hi - lo);
    let zero = f.y + hi * scale;
    let x_scale = f.w / (x_hi - x_lo).max(1.0);
    let mut doc = start(
        spec,
        scale,
        variance_max(entries),
        &[("data-zero", num(zero)), ("data-x-scale", num(x_scale)), ("data-x-origin", num(x_lo))],
    );
    doc.raw(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\"/>",
        num(f.x),
        num(zero),
        num(f.x + f.w),
        num(zero)
    ));
    doc.text(f.x + f.w / 2.0, f.y + f.h + 30.0, 11.0, "middle", "event index");

    let px = |r: &HistoryRow| f.x + (r.event_index as f64 - x_lo) * x_scale;
    let py = |v: f64| zero - v * scale;
    for (i, (e, s)) in chosen.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let sd = |r: &HistoryRow| if r.variance.is_finite() { r.variance.sqrt() } else { 0.0 };
        let line: Vec<String> = s.iter().map(|r| format!("{},{}", num(px(r)), num(py(r.mean)))).collect();
        let upper = s.iter().map(|r| format!("{},{}", num(px(r)), num(py(r.mean + 2.0 * sd(r)))));
        let lower = s.iter().rev().map(|r| format!("{},{}", num(px(r)), num(py(r.mean - 2.0 * sd(r)))));
        let band: Vec<String> = upper.chain(lower).collect();
        doc.mark(
            e,
            &[
                format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>",
                    line.join(" ")
                ),
                format!("<polygon points=\"{}\" fill=\"{colour}\" fill-opacity=\"0.15\"/>", band.join(" ")),
            ],
        );
    }
    legend(&mut doc, spec, "line = mean after each event, band = mean +/- 2 sd");
    Ok(doc.finish())
}
