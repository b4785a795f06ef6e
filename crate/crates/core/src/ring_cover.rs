//! Covers of a dyadic ring `Q* \ Q` by `4(2^d − 1)` cubes chained along a
//! Hamiltonian cycle of the hypercube graph, each consecutive pair
//! overlapping in at least half the smaller volume.
//!
//! All geometry is exact: boxes carry integer endpoints at a common dyadic
//! level (a quarter of the side of `Q`).

use std::fmt;

use serde::Serialize;

use crate::dyadic::{DyadicCube, DyadicSet};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, NormExponent};
use crate::polyfit::Fitter;
use crate::variation::VariationTable;

/// `Π [lo_i / 2^level, hi_i / 2^level)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicBox {
    pub level: u32,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl DyadicBox {
    pub fn from_cube(c: &DyadicCube, level: u32) -> Self {
        assert!(level >= c.level());
        let f = 1i64 << (level - c.level());
        Self {
            level,
            lo: c.index().iter().map(|&a| a as i64 * f).collect(),
            hi: c.index().iter().map(|&a| (a as i64 + 1) * f).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a >= b)
    }

    pub fn width(&self, i: usize) -> i64 {
        (self.hi[i] - self.lo[i]).max(0)
    }

    /// Volume in units of `2^{-level·d}`.
    pub fn volume(&self) -> u128 {
        (0..self.dim()).map(|i| self.width(i) as u128).product()
    }

    pub fn intersect(&self, o: &DyadicBox) -> DyadicBox {
        debug_assert_eq!(self.level, o.level);
        DyadicBox {
            level: self.level,
            lo: self.lo.iter().zip(&o.lo).map(|(a, b)| *a.max(b)).collect(),
            hi: self.hi.iter().zip(&o.hi).map(|(a, b)| *a.min(b)).collect(),
        }
    }

    pub fn contains(&self, o: &DyadicBox) -> bool {
        o.is_empty() || (0..self.dim()).all(|i| self.lo[i] <= o.lo[i] && o.hi[i] <= self.hi[i])
    }

    pub fn overlap(&self, o: &DyadicBox) -> u128 {
        self.intersect(o).volume()
    }

    pub fn is_cube(&self) -> bool {
        !self.is_empty() && (1..self.dim()).all(|i| self.width(i) == self.width(0))
    }

    /// `(d−1)`-volume of the common face of the closures, zero unless they touch
    /// along exactly one axis and overlap in all others.
    pub fn face_contact(&self, o: &DyadicBox) -> u128 {
        let d = self.dim();
        let touching: Vec<usize> =
            (0..d).filter(|&i| self.hi[i] == o.lo[i] || o.hi[i] == self.lo[i]).collect();
        if touching.len() != 1 {
            return 0;
        }
        let t = touching[0];
        (0..d)
            .filter(|&i| i != t)
            .map(|i| (self.hi[i].min(o.hi[i]) - self.lo[i].max(o.lo[i])).max(0) as u128)
            .product()
    }

    fn shifted(&self, axis: usize, by: i64) -> DyadicBox {
        let mut b = self.clone();
        b.lo[axis] += by;
        b.hi[axis] += by;
        b
    }

    /// Endpoints as `"num/2^level"` strings, one pair per axis.
    pub fn rational_endpoints(&self) -> Vec<[String; 2]> {
        let r = |x: i64| format!("{}/2^{}", x, self.level);
        self.lo.iter().zip(&self.hi).map(|(a, b)| [r(*a), r(*b)]).collect()
    }

    /// Level-`j` cells whose centers lie in the box.
    pub fn cells(&self, j: u32) -> Vec<usize> {
        let d = self.dim();
        let side = 1i64 << j;
        // center of cell α at level j is (2α+1)/2^{j+1}; compare at a common level
        let common = j.max(self.level) + 1;
        let sb = 1i64 << (common - self.level);
        let sc = 1i64 << (common - j - 1);
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| {
                let lo = self.lo[i] * sb;
                let hi = self.hi[i] * sb;
                let first = (0..side).find(|a| (2 * a + 1) * sc >= lo).unwrap_or(side);
                let last = (0..side).rev().find(|a| (2 * a + 1) * sc < hi).map_or(0, |a| a + 1);
                (first, last.max(first))
            })
            .collect();
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.0 >= r.1) {
            return out;
        }
        loop {
            out.push(idx.iter().enumerate().map(|(i, &a)| (a as usize) << (j as usize * i)).sum());
            let mut i = 0;
            loop {
                if i == d {
                    out.sort_unstable();
                    return out;
                }
                idx[i] += 1;
                if idx[i] < ranges[i].1 {
                    break;
                }
                idx[i] = ranges[i].0;
                i += 1;
            }
        }
    }
}

impl fmt::Display for DyadicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.rational_endpoints().into_iter().map(|[a, b]| format!("[{a},{b})")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl Serialize for DyadicBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rational_endpoints().serialize(s)
    }
}

/// Reflected Gray code as bitmasks (bit `i` is axis `i`); consecutive entries,
/// including last and first, differ in one bit.
pub fn hamiltonian_cycle(d: usize) -> Result<Vec<u32>> {
    if !(2..=16).contains(&d) {
        return Err(Error::BadDimension(d));
    }
    Ok((0..1u32 << d).map(|i| i ^ (i >> 1)).collect())
}

/// `ε` as a binary string, highest axis first.
pub fn vertex_label(v: u32, d: usize) -> String {
    (0..d).rev().map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// A parallelotop of one of the two partitions, labelled by its vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "partition", content = "vertex")]
pub enum CellLabel {
    /// `Π_ε` of the partition through the low vertex of `Q`.
    Outer(u32),
    /// `Π_v` of the partition of `Π_e` through the high vertex of `Q`.
    Inner(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubeRole {
    /// Extension of a parallelotop of the cycle.
    Primary,
    /// Half-shift between two consecutive primaries.
    Shift,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverCube {
    pub cube: DyadicBox,
    pub role: CubeRole,
    pub label: Option<CellLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleCover {
    pub q: DyadicCube,
    pub qstar: DyadicCube,
    pub interior: bool,
    /// The merged Hamiltonian cycle.
    pub cycle: Vec<CellLabel>,
    /// Parallelotops of the cycle, clipped to `Q*`, in cycle order.
    pub parallelotops: Vec<DyadicBox>,
    /// `Q_1, Q_{1+1/2}, Q_2, …` after discarding empty members.
    pub cubes: Vec<CoverCube>,
    /// Designed pairs `(Q_i, Q_{i+1/2})` and `(Q_{i+1/2}, Q_{i+1})`, as indices into `cubes`.
    pub pairs: Vec<(usize, usize)>,
}

impl CycleCover {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

/// Maps the construction frame `[0, 4M)^d` (quarter units of `Q`) to absolute boxes.
struct Frame {
    origin: Vec<i64>,
    reflect: Vec<bool>,
    side: i64,
    level: u32,
}

impl Frame {
    fn to_abs(&self, b: &DyadicBox) -> DyadicBox {
        let d = b.dim();
        let mut out = DyadicBox { level: self.level, lo: vec![0; d], hi: vec![0; d] };
        for i in 0..d {
            if self.reflect[i] {
                out.lo[i] = self.origin[i] + self.side - b.hi[i];
                out.hi[i] = self.origin[i] + self.side - b.lo[i];
            } else {
                out.lo[i] = self.origin[i] + b.lo[i];
                out.hi[i] = self.origin[i] + b.hi[i];
            }
        }
        out
    }
}

const UNIT: i64 = 4;

/// Interior construction in a frame where `Q* = [0, M)^d` and `Q = [a, a+1)`
/// with `M/2 ≤ a_i ≤ M − 2` (units of the side of `Q`).
fn build_local(a: &[i64], m: i64, level: u32) -> Result<(Vec<CellLabel>, Vec<DyadicBox>, Vec<DyadicBox>)> {
    let d = a.len();
    let big = UNIT * m;
    let lo_a: Vec<i64> = a.iter().map(|x| UNIT * x).collect();
    let hi_b: Vec<i64> = a.iter().map(|x| UNIT * (x + 1)).collect();
    let all = (1u32 << d) - 1;
    let bx = |lo: Vec<i64>, hi: Vec<i64>| DyadicBox { level, lo, hi };

    let outer_cell = |eps: u32| {
        let mut lo = vec![0; d];
        let mut hi = vec![0; d];
        for i in 0..d {
            if eps >> i & 1 == 1 {
                lo[i] = lo_a[i];
                hi[i] = big;
            } else {
                hi[i] = lo_a[i];
            }
        }
        bx(lo, hi)
    };
    let inner_cell = |v: u32| {
        let mut lo = vec![0; d];
        let mut hi = vec![0; d];
        for i in 0..d {
            if v >> i & 1 == 1 {
                lo[i] = hi_b[i];
                hi[i] = big;
            } else {
                lo[i] = lo_a[i];
                hi[i] = hi_b[i];
            }
        }
        bx(lo, hi)
    };
    // extensions by the longest edge, smallest axis on ties
    let outer_cube = |eps: u32| {
        let l = (0..d).filter(|i| eps >> i & 1 == 0).map(|i| lo_a[i]).max().expect("eps != e");
        let lo = (0..d).map(|i| if eps >> i & 1 == 1 { big - l } else { 0 }).collect();
        let hi = (0..d).map(|i| if eps >> i & 1 == 1 { big } else { l }).collect();
        bx(lo, hi)
    };
    let inner_cube = |v: u32| {
        let l = (0..d).filter(|i| v >> i & 1 == 1).map(|i| big - hi_b[i]).max().expect("v != 0");
        let lo = (0..d).map(|i| if v >> i & 1 == 1 { big - l } else { hi_b[i] - l }).collect();
        let hi = (0..d).map(|i| if v >> i & 1 == 1 { big } else { hi_b[i] }).collect();
        bx(lo, hi)
    };

    let gray = hamiltonian_cycle(d)?;
    let n = gray.len();
    let pos_e = gray.iter().position(|&g| g == all).expect("e in cycle");
    let c1: Vec<u32> = (1..n).map(|s| gray[(pos_e + s) % n]).collect();
    let c2: Vec<u32> = (1..n).map(|s| gray[s]).collect(); // 0 is gray[0]
    let axis_of = |x: u32| x.trailing_zeros() as usize;
    let t_first = axis_of(all ^ c1[0]);
    let t_last = axis_of(all ^ c1[n - 2]);
    let u_first = axis_of(c2[0]);
    let u_last = axis_of(c2[n - 2]);
    // leave π through its last cell into an inner cell sharing a face with it
    let forward = t_last != u_first && u_last != t_first;
    let c2: Vec<u32> = if forward { c2 } else { c2.into_iter().rev().collect() };
    debug_assert!(axis_of(c2[0]) != t_last && axis_of(c2[n - 2]) != t_first);

    let mut cycle = Vec::with_capacity(2 * (n - 1));
    cycle.extend(c1.iter().map(|&e| CellLabel::Outer(e)));
    cycle.extend(c2.iter().map(|&v| CellLabel::Inner(v)));
    let cells: Vec<DyadicBox> = cycle
        .iter()
        .map(|l| match *l {
            CellLabel::Outer(e) => outer_cell(e),
            CellLabel::Inner(v) => inner_cell(v),
        })
        .collect();
    let primaries: Vec<DyadicBox> = cycle
        .iter()
        .map(|l| match *l {
            CellLabel::Outer(e) => outer_cube(e),
            CellLabel::Inner(v) => inner_cube(v),
        })
        .collect();

    let frame = bx(vec![0; d], vec![big; d]);
    let hole = bx(lo_a.clone(), hi_b.clone());
    let mut shifts = Vec::with_capacity(cycle.len());
    for i in 0..cycle.len() {
        let j = (i + 1) % cycle.len();
        let axis = match (cycle[i], cycle[j]) {
            (CellLabel::Outer(x), CellLabel::Outer(y)) | (CellLabel::Inner(x), CellLabel::Inner(y)) => axis_of(x ^ y),
            (CellLabel::Outer(e), CellLabel::Inner(_)) | (CellLabel::Inner(_), CellLabel::Outer(e)) => axis_of(all ^ e),
        };
        shifts.push(bridge(&primaries[i], &primaries[j], axis, &frame, &hole));
    }
    let mut boxes = Vec::with_capacity(2 * cycle.len());
    for (p, m) in primaries.into_iter().zip(shifts) {
        boxes.push(p);
        boxes.push(m);
    }
    Ok((cycle, cells, boxes))
}

/// Intermediate box between two clipped primaries: the designed half-shift when
/// it still works, else their intersection, else a box straddling their common face.
fn rebridge(x: &DyadicBox, y: &DyadicBox, designed: Option<DyadicBox>, star: &DyadicBox, hole: &DyadicBox) -> DyadicBox {
    let mut candidates: Vec<DyadicBox> = designed.into_iter().collect();
    let inter = x.intersect(y);
    candidates.push(inter.clone());
    let d = x.dim();
    for t in 0..d {
        let face = if x.hi[t] == y.lo[t] {
            x.hi[t]
        } else if y.hi[t] == x.lo[t] {
            x.lo[t]
        } else {
            continue;
        };
        let w = x.width(t).min(y.width(t)) / 2;
        if w == 0 {
            continue;
        }
        let mut c = inter.clone();
        c.lo[t] = face - w;
        c.hi[t] = face + w;
        candidates.push(c);
    }
    for c in &candidates {
        if admissible(c, x, y, star, hole) {
            return c.clone();
        }
    }
    candidates.swap_remove(0)
}

fn half_overlap(c: &DyadicBox, other: &DyadicBox) -> bool {
    2 * c.overlap(other) >= c.volume().min(other.volume())
}

fn admissible(c: &DyadicBox, s: &DyadicBox, t: &DyadicBox, frame: &DyadicBox, hole: &DyadicBox) -> bool {
    !c.is_empty() && frame.contains(c) && c.overlap(hole) == 0 && half_overlap(c, s) && half_overlap(c, t)
}

/// The intermediate cube between consecutive primaries `x`, `y` whose
/// parallelotops meet across `axis`. Tries the half-shift of the smaller cube
/// toward the larger, then the half of the shift that would place it inside
/// the larger one along `axis`, then cubes straddling the common face.
fn bridge(x: &DyadicBox, y: &DyadicBox, axis: usize, frame: &DyadicBox, hole: &DyadicBox) -> DyadicBox {
    let (s, t) = if x.width(0) <= y.width(0) { (x, y) } else { (y, x) };
    let side = s.width(0);
    let toward = if t.lo[axis] + t.hi[axis] >= s.lo[axis] + s.hi[axis] { 1 } else { -1 };
    let mut candidates = vec![s.shifted(axis, toward * side / 2)];
    let delta = if toward > 0 { (t.lo[axis] - s.lo[axis]).max(0) } else { (s.hi[axis] - t.hi[axis]).max(0) };
    candidates.push(s.shifted(axis, toward * (delta / 2)));
    candidates.push(s.shifted(axis, -toward * side / 2));

    let d = s.dim();
    let inter = s.intersect(t);
    let face = if s.hi[axis] <= t.lo[axis] {
        s.hi[axis]
    } else if t.hi[axis] <= s.lo[axis] {
        s.lo[axis]
    } else {
        (inter.lo[axis] + inter.hi[axis]) / 2
    };
    let mut r = (0..d).filter(|&i| i != axis).map(|i| inter.width(i)).min().unwrap_or(side).min(side).min(t.width(0));
    r -= r % 2;
    while r >= 2 {
        for mask in 0..1u32 << d {
            let mut c = DyadicBox { level: s.level, lo: vec![0; d], hi: vec![0; d] };
            for i in 0..d {
                if i == axis {
                    c.lo[i] = face - r / 2;
                } else if mask >> i & 1 == 0 {
                    c.lo[i] = inter.lo[i];
                } else {
                    c.lo[i] = inter.hi[i] - r;
                }
                c.hi[i] = c.lo[i] + r;
            }
            candidates.push(c);
        }
        r /= 2;
        r -= r % 2;
    }
    for c in &candidates {
        if admissible(c, s, t, frame, hole) {
            return c.clone();
        }
    }
    candidates.swap_remove(0)
}

/// Cover of `Q* \ Q` (see the module docs). Interior rings give exactly
/// `4(2^d − 1)` cubes; rings where `Q` touches the boundary of `Q*` are built
/// in the doubled cube and clipped, which drops the empty members.
pub fn cover_ring(q: &DyadicCube, qstar: &DyadicCube) -> Result<CycleCover> {
    if q.dim() != qstar.dim() {
        return Err(Error::DimensionMismatch(format!("{q} and {qstar}")));
    }
    if q == qstar || !q.is_subset_of(qstar) {
        return Err(Error::NotProperSubcube { inner: q.to_string(), outer: qstar.to_string() });
    }
    let d = q.dim();
    hamiltonian_cycle(d)?;
    let level = q.level() + 2;
    let l = 1i64 << (q.level() - qstar.level());
    let star_origin: Vec<i64> = qstar.index().iter().map(|&x| (x as i64) * l * UNIT).collect();
    let rel: Vec<i64> = q.index().iter().zip(qstar.index()).map(|(&a, &o)| a as i64 - (o as i64) * l).collect();
    let interior = rel.iter().all(|&a| a > 0 && a + 1 < l);
    let (frame, a, m) = if interior {
        let reflect: Vec<bool> = rel.iter().map(|&a| 2 * a < l).collect();
        let a = rel.iter().zip(&reflect).map(|(&x, &r)| if r { l - 1 - x } else { x }).collect::<Vec<_>>();
        (Frame { origin: star_origin.clone(), reflect, side: UNIT * l, level }, a, l)
    } else {
        // first put Q in the upper half, then double away from the touched faces and reflect back
        let first: Vec<bool> = rel.iter().map(|&a| 2 * a < l).collect();
        let a1: Vec<i64> = rel.iter().zip(&first).map(|(&x, &r)| if r { l - 1 - x } else { x }).collect();
        let origin = star_origin.iter().zip(&first).map(|(&o, &r)| if r { o - UNIT * l } else { o }).collect();
        let reflect = first.iter().map(|r| !r).collect();
        let a = a1.iter().map(|x| 2 * l - 1 - x).collect();
        (Frame { origin, reflect, side: UNIT * 2 * l, level }, a, 2 * l)
    };
    let (cycle, cells, boxes) = build_local(&a, m, level)?;
    let star_box = DyadicBox::from_cube(qstar, level);
    let hole_box = DyadicBox::from_cube(q, level);
    let clip = |b: &DyadicBox| frame.to_abs(b).intersect(&star_box);
    let parallelotops: Vec<DyadicBox> = cells.iter().map(clip).collect();
    let n = cycle.len();
    // a member survives when its parallelotop meets Q*; the others are fictional
    let alive: Vec<usize> = (0..n).filter(|&i| !parallelotops[i].is_empty()).collect();
    let mut cubes = Vec::with_capacity(2 * alive.len());
    let mut pairs = Vec::with_capacity(2 * alive.len());
    for (pos, &i) in alive.iter().enumerate() {
        let j = alive[(pos + 1) % alive.len()];
        let here = clip(&boxes[2 * i]);
        let next = clip(&boxes[2 * j]);
        let designed = (j == (i + 1) % n).then(|| clip(&boxes[2 * i + 1]));
        let mid = if interior {
            designed.expect("every member survives")
        } else {
            rebridge(&here, &next, designed, &star_box, &hole_box)
        };
        let base = cubes.len();
        cubes.push(CoverCube { cube: here, role: CubeRole::Primary, label: Some(cycle[i]) });
        cubes.push(CoverCube { cube: mid, role: CubeRole::Shift, label: None });
        pairs.push((base, base + 1));
        pairs.push((base + 1, (base + 2) % (2 * alive.len())));
    }
    Ok(CycleCover { q: *q, qstar: *qstar, interior, cycle, parallelotops, cubes, pairs })
}

/// Outcome of the exact checks on a cover.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CoverReport {
    pub count: usize,
    /// Cubes leaving `Q*` or meeting `Q`.
    pub containment_violations: Vec<usize>,
    /// Number of elementary cells of `Q* \ Q` missed by every cube.
    pub uncovered_cells: usize,
    /// Designed pairs with `|K_1 ∩ K_2| < ½ min |K_i|`.
    pub overlap_violations: Vec<(usize, usize)>,
    /// Consecutive parallelotops of the cycle without a common face.
    pub face_violations: Vec<usize>,
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        self.containment_violations.is_empty()
            && self.uncovered_cells == 0
            && self.overlap_violations.is_empty()
            && self.face_violations.is_empty()
    }
}

/// Exact checks: containment in `Q* \ Q`, coverage of `Q* \ Q`, the half-overlap
/// inequality on designed pairs, and face adjacency along the cycle.
pub fn verify_cover(cc: &CycleCover, q: &DyadicCube, qstar: &DyadicCube) -> CoverReport {
    let level = cc.cubes.first().map_or(q.level() + 2, |c| c.cube.level);
    let star = DyadicBox::from_cube(qstar, level);
    let hole = DyadicBox::from_cube(q, level);
    let d = q.dim();
    let mut report = CoverReport { count: cc.cubes.len(), ..Default::default() };
    for (i, c) in cc.cubes.iter().enumerate() {
        if c.cube.level != level || !star.contains(&c.cube) || c.cube.overlap(&hole) > 0 {
            report.containment_violations.push(i);
        }
    }
    // coverage on the grid generated by all endpoints
    let cuts: Vec<Vec<i64>> = (0..d)
        .map(|i| {
            let mut v = vec![star.lo[i], star.hi[i], hole.lo[i], hole.hi[i]];
            for c in &cc.cubes {
                v.push(c.cube.lo[i].clamp(star.lo[i], star.hi[i]));
                v.push(c.cube.hi[i].clamp(star.lo[i], star.hi[i]));
            }
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let dims: Vec<usize> = cuts.iter().map(|v| v.len() - 1).collect();
    let total: usize = dims.iter().product();
    let mut hit = vec![false; total];
    let stride: Vec<usize> = (0..d).map(|i| dims[..i].iter().product()).collect();
    let mark = |b: &DyadicBox, hit: &mut Vec<bool>| {
        let ranges: Vec<(usize, usize)> = (0..d)
            .map(|i| {
                let s = cuts[i].partition_point(|&x| x < b.lo[i].max(star.lo[i]));
                let e = cuts[i].partition_point(|&x| x < b.hi[i].min(star.hi[i]));
                (s, e)
            })
            .collect();
        if ranges.iter().any(|r| r.0 >= r.1) {
            return;
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            hit[idx.iter().zip(&stride).map(|(a, s)| a * s).sum::<usize>()] = true;
            let mut i = 0;
            loop {
                if i == d {
                    return;
                }
                idx[i] += 1;
                if idx[i] < ranges[i].1 {
                    break;
                }
                idx[i] = ranges[i].0;
                i += 1;
            }
        }
    };
    mark(&hole, &mut hit);
    for c in &cc.cubes {
        mark(&c.cube, &mut hit);
    }
    report.uncovered_cells = hit.iter().filter(|h| !**h).count();
    for &(a, b) in &cc.pairs {
        let (x, y) = (&cc.cubes[a].cube, &cc.cubes[b].cube);
        if !half_overlap(x, y) {
            report.overlap_violations.push((a, b));
        }
    }
    if cc.interior {
        let n = cc.parallelotops.len();
        for i in 0..n {
            if cc.parallelotops[i].face_contact(&cc.parallelotops[(i + 1) % n]) == 0 {
                report.face_violations.push(i);
            }
        }
    }
    report
}

/// Quantities of the ring estimate for one ring.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainBound {
    /// `E_k(f; Q* \ Q; L_q)`.
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub lhs: f64,
    /// Dyadic variation of the ring.
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub rhs: f64,
    /// `Σ_K E_k(f; K; L_q)` over the cover.
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub chain_sum: f64,
}

pub fn ring_chain_bound(
    f: &GridFunction,
    q: &DyadicCube,
    qstar: &DyadicCube,
    k: usize,
    qn: NormExponent,
    p: f64,
) -> Result<ChainBound> {
    let table = VariationTable::build(f, k, p, qn)?;
    ring_chain_bound_with(f, &table, q, qstar)
}

/// As [`ring_chain_bound`], reusing a variation table of `f`.
pub fn ring_chain_bound_with(f: &GridFunction, table: &VariationTable, q: &DyadicCube, qstar: &DyadicCube) -> Result<ChainBound> {
    if q.level() > f.level() {
        return Err(Error::ResolutionTooCoarse { needed: q.level(), got: f.level() });
    }
    let fitter = Fitter::new(f, table.k(), table.q())?;
    let ring = DyadicSet::ring(*qstar, Some(*q));
    let lhs = fitter.fit_set(&ring)?.error;
    let rhs = table.variation(&ring);
    let cover = cover_ring(q, qstar)?;
    let mut chain_sum = 0.0;
    for c in &cover.cubes {
        let cells = c.cube.cells(f.level());
        if !cells.is_empty() {
            chain_sum += fitter.fit_cells(&cells)?.error;
        }
    }
    Ok(ChainBound { lhs, rhs, chain_sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(s: &str) -> DyadicCube {
        s.parse().unwrap()
    }

    #[test]
    fn gray_cycles() {
        let c = hamiltonian_cycle(2).unwrap();
        let labels: Vec<String> = c.iter().map(|&v| vertex_label(v, 2)).collect();
        assert_eq!(labels, ["00", "01", "11", "10"]);
        for d in 2..=10 {
            let c = hamiltonian_cycle(d).unwrap();
            assert_eq!(c.len(), 1 << d);
            for i in 0..c.len() {
                assert_eq!((c[i] ^ c[(i + 1) % c.len()]).count_ones(), 1);
            }
        }
        assert!(hamiltonian_cycle(1).is_err());
    }

    #[test]
    fn interior_counts() {
        let cc = cover_ring(&cube("2:1,1"), &DyadicCube::root(2)).unwrap();
        assert!(cc.interior);
        assert_eq!(cc.len(), 12);
        let r = verify_cover(&cc, &cc.q, &cc.qstar);
        assert!(r.is_ok(), "{r:?}");
        let cc = cover_ring(&cube("3:2,5,3"), &DyadicCube::root(3)).unwrap();
        assert_eq!(cc.len(), 28);
        let r = verify_cover(&cc, &cc.q, &cc.qstar);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn corner_case_count() {
        let cc = cover_ring(&cube("2:3,3"), &DyadicCube::root(2)).unwrap();
        assert!(!cc.interior);
        assert!((6..12).contains(&cc.len()), "{}", cc.len());
        let r = verify_cover(&cc, &cc.q, &cc.qstar);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn corrupted_cover_is_caught() {
        let mut cc = cover_ring(&cube("2:1,2"), &DyadicCube::root(2)).unwrap();
        for c in cc.cubes.iter_mut() {
            let b = &mut c.cube;
            b.hi[0] = b.lo[0] + (b.hi[0] - b.lo[0]) / 2;
        }
        let r = verify_cover(&cc, &cc.q, &cc.qstar);
        assert!(r.uncovered_cells > 0);
    }

    #[test]
    fn improper_pairs_rejected() {
        let q = cube("1:0,0");
        assert!(matches!(cover_ring(&q, &q), Err(Error::NotProperSubcube { .. })));
        assert!(cover_ring(&cube("1:0,0"), &cube("1:1,0")).is_err());
    }

    #[test]
    fn box_cells() {
        let b = DyadicBox::from_cube(&cube("1:1,0"), 3);
        assert_eq!(b.cells(2), cube("1:1,0").cell_indices(2).unwrap());
    }
}
