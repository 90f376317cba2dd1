//! Proportional-area information diagrams.
//!
//! Three nested disks: `H(F)` outermost, `I(F;A)` inside it, `I(F;T)` inside
//! that. Every radius is `sqrt(bits / pi) * scale` with one scale for the
//! whole figure, so areas compare directly.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{ChannelDecomposition, RegionReport, RegionStatus};
use crate::units::Unit;

pub const DEFAULT_CANVAS: f64 = 400.0;
pub const DEFAULT_MARGIN: f64 = 20.0;
const CONTAINMENT_SLACK: f64 = 1e-9;
const LEGEND_LINE: f64 = 16.0;
const MARKER_RADIUS: f64 = 3.0;

/// Fill colours of the outer, middle and inner disk.
pub const PALETTE: [&str; 3] = ["#d9d9d9", "#8fb9e0", "#f4a259"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub label: String,
    pub bits: f64,
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub fill: String,
}

impl Circle {
    pub fn area(&self) -> f64 {
        PI * self.r * self.r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub title: String,
    /// Free text written into the SVG `desc` element.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub width: f64,
    pub height: f64,
    /// Outermost first.
    pub circles: Vec<Circle>,
    /// `(inner, outer)` indices into `circles`.
    pub containment: Vec<(usize, usize)>,
    /// Dashed annotation lines drawn under the figure.
    pub legend: Vec<String>,
}

impl DiagramSpec {
    /// Checks `distance(centres) + r_inner <= r_outer` for every declared pair.
    pub fn check_containment(&self) -> Result<()> {
        for &(i, o) in &self.containment {
            let (a, b) = (&self.circles[i], &self.circles[o]);
            let d = (a.cx - b.cx).hypot(a.cy - b.cy);
            if d + a.r > b.r + CONTAINMENT_SLACK {
                return Err(Error::InconsistentDecomposition(format!(
                    "{} is not contained in {}",
                    a.label, b.label
                )));
            }
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.circles.iter().all(|c| c.r == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutOptions {
    pub canvas: f64,
    pub margin: f64,
    /// 0 places inner disks concentrically; 1 pushes each against the edge
    /// of its container.
    pub offset: f64,
    pub legend: Vec<String>,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions {
            canvas: DEFAULT_CANVAS,
            margin: DEFAULT_MARGIN,
            offset: 0.0,
            legend: Vec::new(),
        }
    }
}

impl LayoutOptions {
    /// Adds a legend line naming every underdetermined region.
    pub fn with_region_legend(mut self, report: &RegionReport) -> Self {
        let names: Vec<String> = report
            .regions
            .iter()
            .filter(|r| r.status == RegionStatus::Underdetermined)
            .map(|r| format!("{} {}", r.index, r.quantity))
            .collect();
        if !names.is_empty() {
            self.legend.push("not drawn (underdetermined):".into());
            self.legend.extend(names);
        }
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.canvas.is_finite() && self.margin >= 0.0 && self.canvas > 2.0 * self.margin) {
            return Err(Error::InvalidInput(format!(
                "canvas {} must exceed twice the margin {}",
                self.canvas, self.margin
            )));
        }
        if !(0.0..=1.0).contains(&self.offset) {
            return Err(Error::InvalidInput(format!("offset {} outside [0, 1]", self.offset)));
        }
        Ok(())
    }
}

/// Lays out a decomposition, converting it to bits first.
pub fn layout(decomp: &ChannelDecomposition, opts: &LayoutOptions) -> Result<DiagramSpec> {
    let d = decomp.in_unit(Unit::Bits);
    let mut spec = layout_values(d.h_f.value, d.mi_f_audio.value, d.mi_f_text.value, opts)?;
    spec.title = d.feature_name;
    Ok(spec)
}

/// Lays out `H(F) >= I(F;A) >= I(F;T) >= 0`, all in bits.
pub fn layout_values(h: f64, i_a: f64, i_t: f64, opts: &LayoutOptions) -> Result<DiagramSpec> {
    opts.validate()?;
    let named = [("H(F)", h), ("I(F;A)", i_a), ("I(F;T)", i_t)];
    if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} = {v} is not finite")));
    }
    for pair in named.windows(2) {
        let [(big, bv), (small, sv)] = [pair[0], pair[1]];
        if sv > bv {
            return Err(Error::OrderingViolation(format!(
                "{small} = {sv:.4} exceeds {big} = {bv:.4}"
            )));
        }
    }
    if i_t < 0.0 {
        return Err(Error::OrderingViolation(format!(
            "I(F;T) = {i_t:.4} is negative"
        )));
    }

    let outer = opts.canvas / 2.0 - opts.margin;
    let scale = if h > 0.0 { outer / (h / PI).sqrt() } else { 0.0 };
    let centre = opts.canvas / 2.0;
    let mut circles: Vec<Circle> = Vec::with_capacity(3);
    for (i, (label, bits)) in named.into_iter().enumerate() {
        let r = (bits / PI).sqrt() * scale;
        let (cx, cy) = match circles.last() {
            None => (centre, centre),
            Some(parent) => (parent.cx - opts.offset * (parent.r - r), parent.cy),
        };
        circles.push(Circle {
            label: label.into(),
            bits,
            cx,
            cy,
            r,
            fill: PALETTE[i].into(),
        });
    }
    let legend_height = if opts.legend.is_empty() {
        0.0
    } else {
        LEGEND_LINE * (opts.legend.len() as f64 + 1.0)
    };
    let spec = DiagramSpec {
        title: String::new(),
        description: String::new(),
        width: opts.canvas,
        height: opts.canvas + legend_height,
        circles,
        containment: vec![(1, 0), (2, 1)],
        legend: opts.legend.clone(),
    };
    spec.check_containment()?;
    Ok(spec)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone SVG 1.1; coordinates use four decimals.
pub fn render_svg(spec: &DiagramSpec) -> String {
    let mut s = String::new();
    let (w, h) = (spec.width, spec.height);
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.4}" height="{h:.4}" viewBox="0 0 {w:.4} {h:.4}">"#
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(&spec.title)).unwrap();
    if !spec.description.is_empty() {
        writeln!(s, "<desc>{}</desc>", escape(&spec.description)).unwrap();
    }
    writeln!(s, r##"<rect x="0" y="0" width="{w:.4}" height="{h:.4}" fill="#ffffff"/>"##).unwrap();

    if spec.is_degenerate() {
        let c = &spec.circles[0];
        writeln!(
            s,
            r##"<circle class="marker" data-label="{}" data-bits="{:.4}" cx="{:.4}" cy="{:.4}" r="{MARKER_RADIUS:.4}" fill="#333333"/>"##,
            escape(&c.label),
            c.bits,
            c.cx,
            c.cy
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.4}" y="{:.4}" font-family="sans-serif" font-size="12" text-anchor="middle">{} = 0 bits</text>"#,
            c.cx,
            c.cy - 2.0 * MARKER_RADIUS - 4.0,
            escape(&c.label)
        )
        .unwrap();
    } else {
        for c in &spec.circles {
            writeln!(
                s,
                r##"<circle data-label="{}" data-bits="{:.4}" cx="{:.4}" cy="{:.4}" r="{:.4}" fill="{}" stroke="#333333" stroke-width="1"/>"##,
                escape(&c.label),
                c.bits,
                c.cx,
                c.cy,
                c.r,
                c.fill
            )
            .unwrap();
        }
        for c in spec.circles.iter().filter(|c| c.r > 0.0) {
            writeln!(
                s,
                r#"<text x="{:.4}" y="{:.4}" font-family="sans-serif" font-size="11" text-anchor="middle">{} {:.4}</text>"#,
                c.cx,
                c.cy - c.r + 13.0,
                escape(&c.label),
                c.bits
            )
            .unwrap();
        }
    }

    if !spec.legend.is_empty() {
        let top = spec.width;
        writeln!(
            s,
            r##"<rect x="4.0000" y="{:.4}" width="{:.4}" height="{:.4}" fill="none" stroke="#666666" stroke-dasharray="4 3"/>"##,
            top,
            w - 8.0,
            h - top - 4.0
        )
        .unwrap();
        for (i, line) in spec.legend.iter().enumerate() {
            writeln!(
                s,
                r#"<text x="10.0000" y="{:.4}" font-family="sans-serif" font-size="11">{}</text>"#,
                top + LEGEND_LINE * (i as f64 + 1.0),
                escape(line)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_ratio_is_root_of_bit_ratio() {
        let spec = layout_values(1.0, 0.22, 0.02, &LayoutOptions::default()).unwrap();
        let [h, a, t] = [&spec.circles[0], &spec.circles[1], &spec.circles[2]];
        assert!((a.r / h.r - 0.22f64.sqrt()).abs() < 1e-12);
        assert!((t.area() / h.area() - 0.02).abs() < 1e-9);
        assert_eq!(h.r, DEFAULT_CANVAS / 2.0 - DEFAULT_MARGIN);
    }

    #[test]
    fn equal_values_coincide() {
        let spec = layout_values(0.7, 0.7, 0.7, &LayoutOptions { offset: 0.8, ..Default::default() }).unwrap();
        let c = &spec.circles;
        assert!(c.windows(2).all(|p| p[0].r == p[1].r && p[0].cx == p[1].cx && p[0].cy == p[1].cy));
    }

    #[test]
    fn ordering_violations_name_the_pair() {
        let err = layout_values(1.0, 0.1, 0.2, &LayoutOptions::default()).unwrap_err();
        assert!(err.to_string().contains("I(F;T)") && err.to_string().contains("I(F;A)"), "{err}");
        assert!(matches!(
            layout_values(1.0, 0.1, -0.05, &LayoutOptions::default()),
            Err(Error::OrderingViolation(_))
        ));
        assert!(matches!(
            layout_values(0.5, 0.6, 0.1, &LayoutOptions::default()),
            Err(Error::OrderingViolation(_))
        ));
    }

    #[test]
    fn offsets_stay_contained() {
        for offset in [0.0, 0.3, 1.0] {
            let spec = layout_values(3.32, 0.664, 0.05, &LayoutOptions { offset, ..Default::default() }).unwrap();
            spec.check_containment().unwrap();
        }
        assert!(layout_values(1.0, 0.5, 0.1, &LayoutOptions { offset: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn zero_diagram_is_a_marker() {
        let spec = layout_values(0.0, 0.0, 0.0, &LayoutOptions::default()).unwrap();
        assert!(spec.is_degenerate());
        let svg = render_svg(&spec);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(r#"class="marker""#));
    }

    #[test]
    fn render_is_stable_and_escaped() {
        let mut spec = layout_values(1.0, 0.22, 0.02, &LayoutOptions::default()).unwrap();
        spec.title = "a<b & c".into();
        let svg = render_svg(&spec);
        assert_eq!(svg, render_svg(&spec));
        assert!(svg.contains("a&lt;b &amp; c"));
        assert!(svg.contains(r#"data-bits="0.2200""#));
        assert!(svg.contains(r#"r="180.0000""#));
    }
}
