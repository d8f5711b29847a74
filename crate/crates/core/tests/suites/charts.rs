//! Rendered charts decoded back from their mark annotations, plus golden
//! snapshots.

use std::f64::consts::TAU;
use std::fs;

use openlearner::harness::run_sequential;
use openlearner::models::snapshot;
use openlearner::viz::{export_html, render, VizKind, VizSpec};
use openlearner::{ClassifierParams, LearnerHistory, LearnerModel, ModelKind, SnapshotEntry, StateKind};

use super::fixtures;

pub struct Fixture {
    pub id: String,
    pub state: StateKind,
    pub learner: LearnerModel,
    pub history: LearnerHistory,
}

/// Three test learners of the sample after replaying their streams; the
/// second one is shown through its interest map.
pub fn learners() -> Vec<Fixture> {
    let (_, test) = fixtures::peek_sample_streams();
    let ids = ["10", "19", "22"];
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let (model, state) = if i == 1 {
                (ModelKind::Interest, StateKind::Interest)
            } else {
                (ModelKind::Knowledge, StateKind::Knowledge)
            };
            let c = model.build(ClassifierParams::default()).expect("default params");
            let run = run_sequential(c.as_ref(), id, &test[*id], 0).expect("replay");
            Fixture {
                id: id.to_string(),
                state,
                learner: run.learner,
                history: run.history,
            }
        })
        .collect()
}

fn attr(node: roxmltree::Node, name: &str) -> Result<f64, String> {
    node.attribute(name)
        .ok_or_else(|| format!("<{}> lacks {name}", node.tag_name().name()))?
        .parse()
        .map_err(|e| format!("{name}: {e}"))
}

fn close(got: f64, want: f64, what: &str) -> Result<(), String> {
    if (got - want).abs() <= 1e-9 * want.abs().max(1.0) {
        Ok(())
    } else {
        Err(format!("{what}: rendered {got}, expected {want}"))
    }
}

fn opacity(variance: f64, max: f64) -> f64 {
    if max > 0.0 {
        (1.0 - variance / max).clamp(0.15, 1.0)
    } else {
        1.0
    }
}

fn shapes<'a>(mark: roxmltree::Node<'a, 'a>) -> Vec<roxmltree::Node<'a, 'a>> {
    mark.children().filter(|c| c.is_element()).collect()
}

fn points(s: &str) -> Vec<(f64, f64)> {
    s.split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').expect("x,y");
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

/// Decodes every mark and checks its geometry against the encoding rules.
/// Returns the number of marks.
pub fn verify(svg: &str, kind: VizKind, entries: &[SnapshotEntry], history: &LearnerHistory) -> Result<usize, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| format!("not well-formed: {e}"))?;
    let root = doc.root_element();
    let scale = attr(root, "data-scale")?;
    let var_max = attr(root, "data-variance-max")?;
    let marks: Vec<_> = root.descendants().filter(|n| n.attribute("class") == Some("mark")).collect();

    let ids: Vec<String> = marks.iter().map(|m| m.attribute("data-kc-id").unwrap_or("").to_string()).collect();
    let want_ids: Vec<String> = entries.iter().map(|e| e.kc_id.to_string()).collect();
    if ids != want_ids {
        return Err(format!("{kind}: marks {ids:?}, snapshot {want_ids:?}"));
    }
    let want_max = entries.iter().map(|e| e.variance).fold(0.0, f64::max);
    close(var_max, want_max, "variance max")?;

    let mut sweep_total = 0.0;
    let mut last_radius = f64::INFINITY;
    for (mark, e) in marks.iter().zip(entries) {
        let mean = attr(*mark, "data-mean")?;
        let variance = attr(*mark, "data-variance")?;
        if mean != e.mean || variance != e.variance {
            return Err(format!("{kind}: annotation of {} does not round-trip", e.kc_id));
        }
        let clipped = mean.max(0.0);
        let s = shapes(*mark);
        let shape = s[0];
        match kind {
            VizKind::Bar => {
                let zero = attr(root, "data-zero")?;
                close(attr(shape, "height")?, mean.abs() * scale, "bar height")?;
                close(attr(shape, "y")?, zero - clipped * scale, "bar top")?;
            }
            VizKind::Dot => {
                let zero = attr(root, "data-zero")?;
                close(attr(shape, "cy")?, zero - mean * scale, "dot position")?;
                let sd = variance.sqrt();
                close(attr(s[1], "y1")?, zero - (mean + 2.0 * sd) * scale, "whisker top")?;
                close(attr(s[1], "y2")?, zero - (mean - 2.0 * sd) * scale, "whisker bottom")?;
            }
            VizKind::Bubble => {
                let r = attr(shape, "r")?;
                close(r, clipped * scale, "bubble radius")?;
                close(attr(shape, "fill-opacity")?, opacity(variance, var_max), "bubble opacity")?;
                if r > last_radius {
                    return Err("bubble radii increase".into());
                }
                last_radius = r;
            }
            VizKind::Rose => {
                close(attr(shape, "data-radius")?, clipped * scale, "rose radius")?;
                close(attr(shape, "fill-opacity")?, opacity(variance, var_max), "rose opacity")?;
            }
            VizKind::Pie => {
                let sweep = attr(shape, "data-sweep")?;
                close(sweep, clipped * scale, "pie sweep")?;
                sweep_total += sweep;
                close(attr(shape, "fill-opacity")?, opacity(variance, var_max), "pie opacity")?;
            }
            VizKind::Treemap => {
                let area = attr(shape, "width")? * attr(shape, "height")?;
                if (area - clipped * scale).abs() > 1e-6 * (clipped * scale).max(1.0) {
                    return Err(format!("treemap area {area}, expected {}", clipped * scale));
                }
                close(attr(shape, "fill-opacity")?, opacity(variance, var_max), "treemap opacity")?;
            }
            VizKind::Radar => {
                close(attr(shape, "data-radius")?, clipped * scale, "radar mean radius")?;
                let vscale = attr(root, "data-variance-scale")?;
                close(attr(s[1], "data-radius")?, variance * vscale, "radar variance radius")?;
            }
            VizKind::Wordcloud => {
                close(attr(shape, "font-size")?, clipped * scale, "word size")?;
                close(attr(shape, "fill-opacity")?, opacity(variance, var_max), "word opacity")?;
            }
            VizKind::Line => {
                let zero = attr(root, "data-zero")?;
                let rows: Vec<f64> = history.snapshots.iter().filter(|r| r.kc_id == e.kc_id).map(|r| r.mean).collect();
                let pts = points(shape.attribute("points").unwrap_or(""));
                if pts.len() != rows.len() {
                    return Err(format!("line {}: {} points for {} rows", e.kc_id, pts.len(), rows.len()));
                }
                for ((_, y), m) in pts.iter().zip(&rows) {
                    close(*y, zero - m * scale, "line point")?;
                }
                close(*rows.last().unwrap(), mean, "line ends at the snapshot")?;
            }
        }
    }
    if kind == VizKind::Pie && entries.iter().any(|e| e.mean > 0.0) {
        close(sweep_total, TAU, "pie total")?;
    }
    if kind == VizKind::Radar {
        let hue = |class: &str| {
            root.descendants()
                .find(|n| n.attribute("class") == Some(class))
                .and_then(|n| n.attribute("stroke"))
                .map(str::to_string)
        };
        if hue("mean") == hue("variance") || hue("mean").is_none() {
            return Err("radar polygons must differ in hue".into());
        }
    }
    Ok(marks.len())
}

pub fn check() -> Result<String, String> {
    let golden = fixtures::dir().join("viz");
    if fixtures::update_golden() {
        fs::create_dir_all(&golden).map_err(|e| e.to_string())?;
    }
    let mut marks = 0;
    let mut files = 0;
    for f in learners() {
        let entries = snapshot(&f.learner, f.state, 15).map_err(|e| e.to_string())?;
        if entries.len() < 3 {
            return Err(format!("learner {} has only {} components", f.id, entries.len()));
        }
        for kind in VizKind::ALL {
            let spec = VizSpec::new(kind).with_title(format!("Learner {} {:?}", f.id, f.state));
            let svg = render(&entries, Some(&f.history), &spec).map_err(|e| e.to_string())?;
            if render(&entries, Some(&f.history), &spec).map_err(|e| e.to_string())? != svg {
                return Err(format!("{kind} rendering is not deterministic"));
            }
            marks += verify(&svg, kind, &entries, &f.history).map_err(|e| format!("learner {}: {e}", f.id))?;

            let html = export_html(&svg, &spec);
            if html.matches("<svg").count() != 1 || html.matches("class=\"mark\"").count() != entries.len() {
                return Err(format!("{kind} html wrapper is malformed"));
            }
            if html.contains("http://") || html.contains("https://") {
                return Err(format!("{kind} html references the network"));
            }

            for (name, text) in [(format!("{}.{kind}.svg", f.id), &svg), (format!("{}.{kind}.html", f.id), &html)] {
                let path = golden.join(&name);
                if fixtures::update_golden() {
                    fs::write(&path, text).map_err(|e| e.to_string())?;
                } else {
                    let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    if &want != text {
                        return Err(format!("{name} differs from its golden file"));
                    }
                }
                files += 1;
            }
        }
    }
    Ok(format!("{marks} marks decoded, {files} golden files matched"))
}
