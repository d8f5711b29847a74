use std::fmt::Write as _;

use crate::models::SnapshotEntry;

pub(crate) const SVG_NS: &str = "http://www.w3.org/2000/svg";

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Shortest round-trip decimal, never `-0`.
pub(crate) fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// SVG document under construction.
pub(crate) struct Doc {
    out: String,
}

impl Doc {
    pub(crate) fn new(width: u32, height: u32, kind: &str, attrs: &[(&str, String)]) -> Self {
        let mut out = String::new();
        let _ = write!(
            out,
            "<svg xmlns=\"{SVG_NS}\" version=\"1.1\" width=\"{width}\" height=\"{height}\" \
             viewBox=\"0 0 {width} {height}\" data-kind=\"{kind}\""
        );
        for (k, v) in attrs {
            let _ = write!(out, " {k}=\"{}\"", escape(v));
        }
        out.push_str(">\n");
        let _ = writeln!(out, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
        Doc { out }
    }

    pub(crate) fn raw(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    pub(crate) fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, text: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{anchor}\" fill=\"#333333\">{}</text>",
            num(x),
            num(y),
            num(size),
            escape(text)
        );
    }

    /// One mark: a group annotated with the entry, its shapes, and a
    /// tooltip title.
    pub(crate) fn mark(&mut self, e: &SnapshotEntry, shapes: &[String]) {
        let _ = writeln!(
            self.out,
            "<g class=\"mark\" data-kc-id=\"{}\" data-title=\"{}\" data-mean=\"{:?}\" data-variance=\"{:?}\">",
            e.kc_id,
            escape(&e.title),
            e.mean,
            e.variance
        );
        for s in shapes {
            self.out.push_str(s);
            self.out.push('\n');
        }
        let _ = writeln!(
            self.out,
            "<title>{}: mean {:.4}, variance {:.4}</title>\n</g>",
            escape(&e.title),
            e.mean,
            e.variance
        );
    }

    pub(crate) fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}
