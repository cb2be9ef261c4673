//! Static SVG plots: the shadow of the region surface on the `(1/p, 1/q)`
//! square and its `s = 0` slice.

use std::fmt::Write;

use crate::rational::{to_f64, Q};
use crate::regions::{RegionSet, Slice};

const SIZE: f64 = 420.0;
const PAD: f64 = 40.0;

fn px(x: f64) -> f64 {
    PAD + x * (SIZE - 2.0 * PAD)
}

fn py(y: f64) -> f64 {
    SIZE - PAD - y * (SIZE - 2.0 * PAD)
}

fn frame(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="20">{title}</text>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        w = SIZE - 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="2,3"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">1/p</text>"#, SIZE / 2.0, SIZE - 10.0);
    let _ = writeln!(s, r#"<text x="8" y="{}">1/q</text>"#, SIZE / 2.0);
    s
}

fn polygon(points: &[(f64, f64)], fill: &str) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{:.3},{:.3}", px(*x), py(*y)))
        .collect();
    format!(
        r#"<polygon points="{}" fill="{fill}" stroke="black" stroke-width="0.8"/>"#,
        pts.join(" ")
    )
}

fn excluded_line(offset: &Q) -> String {
    let c = to_f64(offset);
    format!(
        r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="red" stroke-dasharray="6,4"/>"#,
        px(c),
        py(0.0),
        px(1.0),
        py(1.0 - c)
    )
}

/// Pieces of the surface projected to the `(x, y)` square, shaded by mean height.
pub fn region_svg(regions: &RegionSet) -> String {
    let mut s = frame(&format!(
        "surface shadow, g = {}, k = {}",
        crate::rational::format_rational(regions.g()),
        crate::rational::format_rational(regions.k())
    ));
    let heights: Vec<f64> = regions
        .pieces
        .iter()
        .flat_map(|p| p.vertices.iter().map(|v| to_f64(&v.z)))
        .collect();
    let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for piece in &regions.pieces {
        let pts: Vec<(f64, f64)> = piece.vertices.iter().map(|v| (to_f64(&v.x), to_f64(&v.y))).collect();
        let mean = piece.vertices.iter().map(|v| to_f64(&v.z)).sum::<f64>() / pts.len() as f64;
        let t = if hi > lo { (mean - lo) / (hi - lo) } else { 0.5 };
        let shade = (230.0 - 150.0 * t).round() as u8;
        s.push_str(&polygon(&pts, &format!("rgb({shade},{shade},255)")));
        s.push('\n');
        let (cx, cy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            px(cx / pts.len() as f64),
            py(cy / pts.len() as f64),
            piece.label
        );
    }
    if let Some((a, b)) = &regions.segment_l {
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="darkgreen" stroke-width="2"/>"#,
            px(to_f64(&a.x)),
            py(to_f64(&a.y)),
            px(to_f64(&b.x)),
            py(to_f64(&b.y))
        );
    }
    s.push_str(&excluded_line(&regions.plane.zero_level_offset()));
    s.push_str("\n</svg>\n");
    s
}

/// The `s = 0` slice with the excluded line `y = x - offset`.
pub fn slice_svg(slice: &Slice) -> String {
    let mut s = frame("L^p -> L^q slice (s = 0)");
    let pts: Vec<(f64, f64)> = slice.vertices.iter().map(|(x, y)| (to_f64(x), to_f64(y))).collect();
    s.push_str(&polygon(&pts, "rgb(180,210,255)"));
    s.push('\n');
    s.push_str(&excluded_line(&slice.excluded_offset));
    s.push_str("\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::BlockStructure;
    use crate::rational::qi;
    use crate::regions::{build_profile, build_regions, lq_slice, A0Input};

    #[test]
    fn well_formed_documents() {
        let blocks = BlockStructure::unweighted(1);
        let p = build_profile(qi(3), 0, A0Input::predicted(Q::new(1.into(), 3.into())), None, &blocks, true).unwrap();
        let r = build_regions(&p);
        for doc in [region_svg(&r), slice_svg(&lq_slice(&r))] {
            assert!(doc.starts_with("<svg") && doc.trim_end().ends_with("</svg>"));
            assert_eq!(doc.matches("<polygon").count(), doc.matches("/>").count() - doc.matches("<line").count() - 2);
        }
    }
}
