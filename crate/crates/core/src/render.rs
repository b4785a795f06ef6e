//! Deterministic SVG pictures of two-dimensional artifacts.
//!
//! The first coordinate runs left to right and the second bottom to top.

use std::fmt::Write as _;

use crate::approximant::{Covering, Provenance, RingPartition};
use crate::dyadic::{DyadicCube, DyadicSet};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::grid::GridFunction;
use crate::ring_cover::{CubeRole, CycleCover, DyadicBox};

/// Side of the drawing in user units.
pub const CANVAS: f64 = 512.0;
const MARGIN: f64 = 8.0;

fn require_2d(d: usize) -> Result<()> {
    if d == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

fn provenance_color(p: Provenance) -> &'static str {
    match p {
        Provenance::Root => "#000000",
        Provenance::Tail => "#1f77b4",
        Provenance::Head => "#d62728",
        Provenance::TailSon => "#2ca02c",
        Provenance::Fixup => "#7f7f7f",
    }
}

/// Maps a square window `[x0, x0+side) × [y0, y0+side)` onto the canvas.
struct View {
    x0: f64,
    y0: f64,
    side: f64,
}

impl View {
    fn unit() -> Self {
        Self { x0: 0.0, y0: 0.0, side: 1.0 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / self.side * CANVAS
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + CANVAS - (y - self.y0) / self.side * CANVAS
    }

    /// `x`, `y`, `width`, `height` attributes of an axis-aligned box.
    fn rect_attrs(&self, lo: [f64; 2], hi: [f64; 2]) -> String {
        format!(
            "x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"",
            sig12(self.px(lo[0])),
            sig12(self.py(hi[1])),
            sig12(self.px(hi[0]) - self.px(lo[0])),
            sig12(self.py(lo[1]) - self.py(hi[1]))
        )
    }

    fn outline(&self, lo: [f64; 2], hi: [f64; 2]) -> String {
        let (x0, x1) = (sig12(self.px(lo[0])), sig12(self.px(hi[0])));
        let (y0, y1) = (sig12(self.py(lo[1])), sig12(self.py(hi[1])));
        format!("M{x0} {y0}H{x1}V{y1}H{x0}Z")
    }
}

fn cube_bounds(q: &DyadicCube) -> ([f64; 2], [f64; 2]) {
    let s = q.side();
    let a = q.index();
    ([a[0] as f64 * s, a[1] as f64 * s], [(a[0] + 1) as f64 * s, (a[1] + 1) as f64 * s])
}

fn box_bounds(b: &DyadicBox) -> ([f64; 2], [f64; 2]) {
    let s = (-(b.level as f64)).exp2();
    ([b.lo[0] as f64 * s, b.lo[1] as f64 * s], [b.hi[0] as f64 * s, b.hi[1] as f64 * s])
}

fn open(title: &str) -> String {
    let size = sig12(CANVAS + 2.0 * MARGIN);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n<title>{}</title>\n",
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One outline per member of the covering, coarse to fine, stroked by the
/// first reason the member was included.
pub fn covering_svg(cov: &Covering) -> Result<String> {
    require_2d(cov.dim)?;
    let v = View::unit();
    let mut out = open(&format!("covering with {} cubes", cov.len()));
    for (q, tags) in &cov.members {
        let tag = *tags.iter().next().expect("member without provenance");
        let (lo, hi) = cube_bounds(q);
        let _ = writeln!(
            out,
            "<rect {} fill=\"none\" stroke=\"{}\" stroke-width=\"1\"><title>{q}</title></rect>",
            v.rect_attrs(lo, hi),
            provenance_color(tag)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Each ring as one even-odd path; the fill encodes the polynomial's value at the ring centre.
pub fn rings_svg(rp: &RingPartition) -> Result<String> {
    require_2d(rp.dim)?;
    let v = View::unit();
    let values: Vec<f64> = rp
        .rings
        .iter()
        .map(|(r, m)| r.outer_cube().map_or(0.0, |c| m.eval(&c.center())))
        .collect();
    let (lo_v, hi_v) = range(&values);
    let mut out = open(&format!("ring partition with {} pieces", rp.len()));
    for ((r, _), val) in rp.rings.iter().zip(&values) {
        let mut d = String::new();
        match r {
            DyadicSet::Cube(c) => d.push_str(&outline_of(&v, c)),
            DyadicSet::Ring { outer, inner } => {
                d.push_str(&outline_of(&v, outer));
                d.push_str(&outline_of(&v, inner));
            }
            DyadicSet::Union(cs) => cs.iter().for_each(|c| d.push_str(&outline_of(&v, c))),
        }
        let _ = writeln!(
            out,
            "<path d=\"{d}\" fill=\"{}\" fill-rule=\"evenodd\" stroke=\"#000000\" stroke-width=\"0.5\"><title>{}</title></path>",
            gray(*val, lo_v, hi_v),
            escape(&r.id())
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn outline_of(v: &View, c: &DyadicCube) -> String {
    let (lo, hi) = cube_bounds(c);
    v.outline(lo, hi)
}

/// The cover cubes over dashed outlines of `Q*` and `Q`, zoomed to `Q*`.
pub fn cycle_cover_svg(cc: &CycleCover) -> Result<String> {
    require_2d(cc.q.dim())?;
    let (slo, shi) = cube_bounds(&cc.qstar);
    let v = View { x0: slo[0], y0: slo[1], side: shi[0] - slo[0] };
    let mut out = open(&format!("cover of {}\\{} by {} boxes", cc.qstar, cc.q, cc.len()));
    for (i, c) in cc.cubes.iter().enumerate() {
        let (lo, hi) = box_bounds(&c.cube);
        let color = match c.role {
            CubeRole::Primary => "#1f77b4",
            CubeRole::Shift => "#ff7f0e",
        };
        let _ = writeln!(
            out,
            "<rect {} fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"{color}\" stroke-width=\"1\"><title>{i}</title></rect>",
            v.rect_attrs(lo, hi)
        );
    }
    for c in [&cc.qstar, &cc.q] {
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\"/>",
            outline_of(&v, c)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Gray-level heatmap, one rectangle per run of equal shade along a row.
pub fn grid_svg(f: &GridFunction) -> Result<String> {
    require_2d(f.dim())?;
    let v = View::unit();
    let n = f.side_cells();
    let h = 1.0 / n as f64;
    let (lo_v, hi_v) = range(f.values());
    let mut out = open(&format!("heatmap of {}", f.source()));
    for row in 0..n {
        let mut start = 0;
        while start < n {
            let shade = gray(f.values()[row * n + start], lo_v, hi_v);
            let mut end = start + 1;
            while end < n && gray(f.values()[row * n + end], lo_v, hi_v) == shade {
                end += 1;
            }
            let lo = [start as f64 * h, row as f64 * h];
            let hi = [end as f64 * h, (row + 1) as f64 * h];
            let _ = writeln!(out, "<rect {} fill=\"{shade}\"/>", v.rect_attrs(lo, hi));
            start = end;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn range(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

fn gray(x: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let g = (t * 255.0).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}
