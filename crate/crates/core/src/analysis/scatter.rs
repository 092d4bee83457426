use std::fmt::Write as _;
use std::path::Path;

use super::{format_sig6, ModelRecord};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PAD: f64 = 0.05;

/// Axis range over `values` widened by 5% on each side. A single distinct
/// value maps to the unit range centered on it.
fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let pad = (hi - lo) * PAD;
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
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

/// Standalone SVG scatter of `y_key` against `x_key`, one labeled circle
/// per record.
pub fn render_scatter(records: &[ModelRecord], x_key: &str, y_key: &str) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Invalid("scatter needs at least one record".into()));
    }
    let xs = records.iter().map(|r| r.require(x_key)).collect::<Result<Vec<f64>>>()?;
    let ys = records.iter().map(|r| r.require(y_key)).collect::<Result<Vec<f64>>>()?;
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("scatter values must be finite".into()));
    }
    let (x0, x1) = padded_range(&xs);
    let (y0, y1) = padded_range(&ys);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let py = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - top);

    let mut svg = String::new();
    let w = &mut svg;
    // writes into a String cannot fail
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<line x1="{left:.2}" y1="{bottom:.2}" x2="{right:.2}" y2="{bottom:.2}" stroke="black"/>"#
    );
    let _ = writeln!(w, r#"<line x1="{left:.2}" y1="{top:.2}" x2="{left:.2}" y2="{bottom:.2}" stroke="black"/>"#);
    for (value, anchor, x) in [(x0, "start", left), (x1, "end", right)] {
        let _ = writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            bottom + 16.0,
            format_sig6(value)
        );
    }
    for (value, y) in [(y0, bottom), (y1, top)] {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + 4.0,
            format_sig6(value)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 16.0,
        escape(x_key)
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_key)
    );
    for ((r, &x), &y) in records.iter().zip(&xs).zip(&ys) {
        let (cx, cy) = (px(x), py(y));
        let name = escape(&r.model);
        let _ = writeln!(
            w,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="steelblue"><title>{name}</title></circle>"#
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, cx + 6.0, cy - 6.0);
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

pub fn emit_scatter(records: &[ModelRecord], x_key: &str, y_key: &str, path: &Path) -> Result<()> {
    let svg = render_scatter(records, x_key, y_key)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
