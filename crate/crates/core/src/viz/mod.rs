//! Learner-state charts as static SVG, plus a self-contained HTML wrapper.
//!
//! Every mark is an SVG group with `class="mark"` and `data-kc-id`,
//! `data-mean` and `data-variance` attributes; its first child is the shape
//! carrying the encoding. The root element records the scale used
//! (`data-scale`, in pixels per unit of the encoded quantity) and the
//! variance normaliser (`data-variance-max`).

mod charts;
mod svg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{snapshot, LearnerHistory, LearnerModel, SnapshotEntry, StateKind};

pub use charts::{fill_opacity, OPACITY_MAX, OPACITY_MIN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VizKind {
    Bar,
    Dot,
    Line,
    Pie,
    Rose,
    Bubble,
    Treemap,
    Radar,
    Wordcloud,
}

impl VizKind {
    pub const ALL: [VizKind; 9] = [
        VizKind::Bar,
        VizKind::Dot,
        VizKind::Line,
        VizKind::Pie,
        VizKind::Rose,
        VizKind::Bubble,
        VizKind::Treemap,
        VizKind::Radar,
        VizKind::Wordcloud,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VizKind::Bar => "bar",
            VizKind::Dot => "dot",
            VizKind::Line => "line",
            VizKind::Pie => "pie",
            VizKind::Rose => "rose",
            VizKind::Bubble => "bubble",
            VizKind::Treemap => "treemap",
            VizKind::Radar => "radar",
            VizKind::Wordcloud => "wordcloud",
        }
    }
}

impl fmt::Display for VizKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VizKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VizKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid_parameter("kind", format!("unknown chart kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VizSpec {
    pub kind: VizKind,
    pub top_k: usize,
    pub width: u32,
    pub height: u32,
    pub title: String,
}

impl VizSpec {
    pub const MIN_SIZE: u32 = 100;

    pub fn new(kind: VizKind) -> Self {
        VizSpec {
            kind,
            top_k: 15,
            width: 800,
            height: 600,
            title: String::new(),
        }
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_top_k(mut self, top_k: usize) -> Self {
        self.top_k = top_k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < Self::MIN_SIZE || self.height < Self::MIN_SIZE {
            return Err(Error::invalid_parameter(
                "size",
                format!("width and height must be at least {} pixels", Self::MIN_SIZE),
            ));
        }
        if self.top_k == 0 {
            return Err(Error::invalid_parameter("top_k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Renders a snapshot; `history` is only read for line charts, which plot
/// the components of the snapshot over time.
pub fn render(entries: &[SnapshotEntry], history: Option<&LearnerHistory>, spec: &VizSpec) -> Result<String> {
    spec.validate()?;
    if entries.is_empty() {
        return Err(Error::NothingToVisualise);
    }
    let entries = &entries[..entries.len().min(spec.top_k)];
    if spec.kind == VizKind::Line {
        let history = history.filter(|h| !h.is_empty()).ok_or(Error::MissingHistory)?;
        return charts::line(entries, history, spec);
    }
    Ok(charts::render(entries, spec))
}

/// Snapshot of `state` followed by [`render`].
pub fn render_learner(
    learner: &LearnerModel,
    state: StateKind,
    history: Option<&LearnerHistory>,
    spec: &VizSpec,
) -> Result<String> {
    spec.validate()?;
    let entries = snapshot(learner, state, spec.top_k)?;
    render(&entries, history, spec)
}

/// Wraps a rendered chart in a standalone HTML page. Marks already carry
/// `<title>` children, which browsers show as hover tooltips.
pub fn export_html(svg: &str, spec: &VizSpec) -> String {
    let title = if spec.title.is_empty() {
        format!("{} chart", spec.kind)
    } else {
        spec.title.clone()
    };
    let inline = svg.replacen(&format!(" xmlns=\"{}\"", svg::SVG_NS), "", 1);
    format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n\
         <style>body{{font-family:sans-serif;margin:1em}}</style>\n</head>\n<body>\n{}</body>\n</html>\n",
        svg::escape(&title),
        inline
    )
}

/// `<learner_id>.<kind>.svg` or `.html`.
pub fn file_name(learner_id: &str, kind: VizKind, html: bool) -> String {
    let safe: String = learner_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}.{kind}.{}", if html { "html" } else { "svg" })
}
