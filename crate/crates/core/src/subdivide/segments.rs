//! Marching-squares polylines and SVG rendering for plane curves.
//!
//! The polylines are a visualization aid only; they are not certified to be
//! isotopic to the curve.

use std::fmt::Write as _;

use serde::Serialize;

use super::Subdivision;
use crate::error::{Error, Result};
use crate::geometry::Branch;
use crate::poly::AffinePolynomial;

pub const SVG_SIZE: u32 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub from: [f64; 2],
    pub to: [f64; 2],
    /// Width of the leaf the segment was extracted from.
    pub leaf_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
    pub certified: bool,
}

fn require_plane(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::UnsupportedSpace {
            n,
            d: 0,
            reason: "curve extraction needs n = 2",
        });
    }
    Ok(())
}

fn crossing(p: [f64; 2], q: [f64; 2], vp: f64, vq: f64) -> [f64; 2] {
    let t = vp / (vp - vq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Linear interpolation of sign changes of `f` along the edges of each leaf.
pub fn extract_segments(f: &AffinePolynomial, s: &Subdivision) -> Result<SegmentSet> {
    require_plane(f.n())?;
    require_plane(s.n)?;
    let mut segments = Vec::new();
    for leaf in &s.leaves {
        let (cx, cy, h) = (leaf.m[0], leaf.m[1], 0.5 * leaf.w);
        let corners = [[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]];
        let vals = corners.map(|c| f.value_at(&c));
        let inside = vals.map(|v| v < 0.0);
        // Edge k joins corner k and corner k+1.
        let mut cut: [Option<[f64; 2]>; 4] = [None; 4];
        for k in 0..4 {
            let j = (k + 1) % 4;
            if inside[k] != inside[j] {
                cut[k] = Some(crossing(corners[k], corners[j], vals[k], vals[j]));
            }
        }
        let mut push = |a: usize, b: usize| {
            if let (Some(p), Some(q)) = (cut[a], cut[b]) {
                segments.push(Segment {
                    from: p,
                    to: q,
                    leaf_width: leaf.w,
                });
            }
        };
        match cut.iter().filter(|c| c.is_some()).count() {
            2 => {
                let mut e = (0..4).filter(|&k| cut[k].is_some());
                let (a, b) = (e.next().unwrap(), e.next().unwrap());
                push(a, b);
            }
            4 => {
                let center_inside = f.value_at(&leaf.m) < 0.0;
                if center_inside == inside[0] {
                    // Corners 0 and 2 connect through the center; cut off corners 1 and 3.
                    push(0, 1);
                    push(2, 3);
                } else {
                    push(3, 0);
                    push(1, 2);
                }
            }
            _ => {}
        }
    }
    Ok(SegmentSet {
        segments,
        certified: false,
    })
}

/// Renders the leaves (and optionally segments) with `[-a, a]^2` mapped onto
/// a `1024 x 1024` viewport, `y` pointing up.
pub fn render_svg(s: &Subdivision, segments: Option<&SegmentSet>) -> Result<String> {
    require_plane(s.n)?;
    let size = SVG_SIZE as f64;
    let scale = size / (2.0 * s.a);
    let px = |x: f64| (x + s.a) * scale;
    let py = |y: f64| (s.a - y) * scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="#ffffff"/>"##
    );
    let _ = writeln!(out, r##"<g stroke="#555555" stroke-width="0.5">"##);
    for leaf in &s.leaves {
        let h = 0.5 * leaf.w;
        let fill = match leaf.branch {
            Branch::Value => "#dbe9f6",
            Branch::Gradient => "#fce5cd",
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            px(leaf.m[0] - h),
            py(leaf.m[1] + h),
            leaf.w * scale,
            leaf.w * scale
        );
    }
    let _ = writeln!(out, "</g>");
    if let Some(set) = segments {
        let _ = writeln!(out, r##"<g stroke="#c0392b" stroke-width="2" stroke-linecap="round">"##);
        for seg in &set.segments {
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                px(seg.from[0]),
                py(seg.from[1]),
                px(seg.to[0]),
                py(seg.to[1])
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
