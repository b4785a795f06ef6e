//! The covering `Δ_N`, the piecewise polynomial `g_N` built on it, and its
//! rewrite over a partition of the unit cube into rings.
//!
//! With `M_Q = Σ_{Q' son of Q} m_{Q'} 1_{Q'} − m_Q 1_Q` and, per basic path
//! `B`, `B⁺ = H_B`, `B⁰ = H_B \ T_B`, `B⁻ = T_B`:
//!
//! `g_N = m_{Q^d} + M_{Q^d} + Σ_B [(m_{B⁰} − m_{B⁺}) 1_{B⁺} + (m_{B⁻} − m_{B⁰}) 1_{B⁻} + M_{B⁻}]`
//!
//! so that `f − g_N = Σ_B S_B + Σ_{Q ∈ ∂G_N} (f − m_Q) 1_Q` with
//! `S_B = Σ_{Q ∈ B \ {B⁻}} Σ_{Q' ∈ D_1(Q) \ B} (m_{Q'} − m_{B⁰}) 1_{Q'}`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{AscendingPath, DyadicCube, DyadicSet};
use crate::error::{Error, Result};
use crate::grid::{weighted_norm, GridFunction, NormExponent};
use crate::polyfit::{FitResult, Fitter, Polynomial};
use crate::tree::{BadSet, BasicPathSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Root,
    Tail,
    Head,
    TailSon,
    /// Son of the unit cube outside `G_N`, added so the members other than
    /// the root cover `Q^d`.
    Fixup,
}

/// Members of `Δ_N` with the reasons they were included.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Covering {
    pub dim: usize,
    pub members: BTreeMap<DyadicCube, BTreeSet<Provenance>>,
}

impl Covering {
    /// `{Q^d}` alone, for functions without variation.
    pub fn trivial(dim: usize) -> Self {
        let mut members = BTreeMap::new();
        members.insert(DyadicCube::root(dim), BTreeSet::from([Provenance::Root]));
        Self { dim, members }
    }

    fn add(&mut self, q: DyadicCube, tag: Provenance) {
        self.members.entry(q).or_default().insert(tag);
    }

    /// Members, coarse to fine.
    pub fn cubes(&self) -> Vec<DyadicCube> {
        self.members.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.members.contains_key(q)
    }

    /// Size of the set before the fix-up.
    pub fn literal_len(&self) -> usize {
        self.members.values().filter(|t| t.iter().any(|p| *p != Provenance::Fixup)).count()
    }

    /// Whether the members other than `Q^d` cover every level-`level` cell.
    /// The trivial covering `{Q^d}` counts as covering.
    pub fn covers(&self, level: u32) -> bool {
        let root = DyadicCube::root(self.dim);
        if self.members.len() == 1 && self.members.contains_key(&root) {
            return true;
        }
        let mut hit = vec![false; 1usize << (level as usize * self.dim)];
        for q in self.members.keys().filter(|q| **q != root && q.level() <= level) {
            for c in q.cell_indices(level).expect("member above grid level") {
                hit[c] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    /// Adds the sons of `Q^d` outside `G_N` when the other members miss part
    /// of the unit cube. A no-op when they already cover it.
    pub fn ensure_covering(&mut self, bs: &BadSet) {
        let root = DyadicCube::root(self.dim);
        let covered = root.sons().iter().all(|s| self.members.contains_key(s));
        if covered {
            return;
        }
        for s in root.sons() {
            if !bs.contains(&s) {
                self.add(s, Provenance::Fixup);
            }
        }
    }
}

/// `Δ_N = {Q^d} ∪ ⋃_B ({T_B, H_B} ∪ D_1(T_B))`, without the fix-up.
pub fn literal_covering(bp: &BasicPathSet, dim: usize) -> Covering {
    let mut cov = Covering::trivial(dim);
    for b in &bp.paths {
        cov.add(b.tail(), Provenance::Tail);
        cov.add(b.head(), Provenance::Head);
        for s in b.tail().sons() {
            cov.add(s, Provenance::TailSon);
        }
    }
    cov
}

/// `Δ_N` followed by the fix-up.
pub fn build_covering(bp: &BasicPathSet, bs: &BadSet) -> Covering {
    let mut cov = literal_covering(bp, bs.dim);
    cov.ensure_covering(bs);
    cov
}

/// Which part of the formula a term comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermKind {
    RootFit,
    RootSons,
    Head,
    Tail,
    TailSons,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub region: DyadicSet,
    pub kind: TermKind,
    pub polynomial: Polynomial,
}

/// `Σ_i P_i · 1_{S_i}`; regions may overlap and evaluation sums them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewisePoly {
    pub dim: usize,
    pub level: u32,
    pub terms: Vec<Term>,
}

impl PiecewisePoly {
    pub fn new(dim: usize, level: u32) -> Self {
        Self { dim, level, terms: Vec::new() }
    }

    pub fn push(&mut self, region: DyadicSet, kind: TermKind, polynomial: Polynomial) {
        self.terms.push(Term { region, kind, polynomial });
    }

    /// Values at every level-`J` cell center, in linear order.
    pub fn eval_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1usize << (self.level as usize * self.dim)];
        for t in &self.terms {
            let cells = t.region.cell_indices(self.level).expect("term region above grid level");
            t.polynomial.accumulate(self.level, &cells, 1.0, &mut out);
        }
        out
    }

    pub fn to_grid_function(&self, source: &str) -> Result<GridFunction> {
        GridFunction::from_values(self.dim, self.level, self.eval_grid(), source)
    }
}

/// `‖f − g‖_{L_q}` over the unit cube.
pub fn approx_error(f: &GridFunction, g: &PiecewisePoly, q: NormExponent) -> Result<f64> {
    if g.dim != f.dim() || g.level != f.level() {
        return Err(Error::DimensionMismatch(format!(
            "function is d={} J={}, approximant d={} J={}",
            f.dim(),
            f.level(),
            g.dim,
            g.level
        )));
    }
    let vals = g.eval_grid();
    Ok(weighted_norm(f.values().iter().zip(&vals).map(|(a, b)| a - b), f.cell_volume(), q))
}

/// Memoized best approximations on cubes and rings of one function.
pub struct FitCache<'f> {
    fitter: Fitter<'f>,
    fits: RwLock<HashMap<DyadicSet, Arc<FitResult>>>,
}

impl<'f> FitCache<'f> {
    pub fn new(f: &'f GridFunction, k: usize, q: NormExponent) -> Result<Self> {
        Ok(Self { fitter: Fitter::new(f, k, q)?, fits: RwLock::new(HashMap::new()) })
    }

    pub fn function(&self) -> &GridFunction {
        self.fitter.function()
    }

    fn compute(&self, s: &DyadicSet) -> Result<FitResult> {
        match s {
            DyadicSet::Cube(c) => self.fitter.fit_cube(c),
            other => self.fitter.fit_set(other),
        }
    }

    /// Fits the missing sets in parallel.
    pub fn prefetch(&self, sets: &[DyadicSet]) -> Result<()> {
        let missing: Vec<DyadicSet> = {
            let have = self.fits.read().expect("fit cache lock");
            let mut seen = HashSet::new();
            sets.iter().filter(|s| !have.contains_key(s) && seen.insert((*s).clone())).cloned().collect()
        };
        let done: Result<Vec<(DyadicSet, FitResult)>> =
            missing.into_par_iter().map(|s| self.compute(&s).map(|r| (s, r))).collect();
        let mut have = self.fits.write().expect("fit cache lock");
        for (s, r) in done? {
            have.insert(s, Arc::new(r));
        }
        Ok(())
    }

    pub fn fit(&self, s: &DyadicSet) -> Result<Arc<FitResult>> {
        if let Some(r) = self.fits.read().expect("fit cache lock").get(s) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.compute(s)?);
        self.fits.write().expect("fit cache lock").insert(s.clone(), r.clone());
        Ok(r)
    }

    /// `m_S`.
    pub fn poly(&self, s: &DyadicSet) -> Result<Polynomial> {
        Ok(self.fit(s)?.minimizer.clone())
    }

    pub fn cube(&self, q: &DyadicCube) -> Result<Polynomial> {
        self.poly(&DyadicSet::Cube(*q))
    }
}

/// `m_{B⁰}`, the fit on `H_B \ T_B`; the zero polynomial for singletons.
fn ring_fit(cache: &FitCache, b: &AscendingPath) -> Result<Option<Polynomial>> {
    if b.is_singleton() {
        Ok(None)
    } else {
        cache.poly(&b.ring()).map(Some)
    }
}

fn push_m(g: &mut PiecewisePoly, cache: &FitCache, q: &DyadicCube, kind: TermKind) -> Result<()> {
    let mut sons = Vec::with_capacity(1 << q.dim());
    for s in q.sons() {
        sons.push((s, cache.cube(&s)?));
    }
    for (s, m) in sons {
        g.push(DyadicSet::Cube(s), kind, m);
    }
    g.push(DyadicSet::Cube(*q), kind, cache.cube(q)?.scaled(-1.0));
    Ok(())
}

/// `(m_{B⁰} − m_{B⁺}) 1_{B⁺} + (m_{B⁻} − m_{B⁰}) 1_{B⁻}`, empty for singletons.
fn push_bracket(g: &mut PiecewisePoly, cache: &FitCache, b: &AscendingPath, factor: f64) -> Result<()> {
    let Some(m0) = ring_fit(cache, b)? else {
        return Ok(());
    };
    let (head, tail) = (b.head(), b.tail());
    let mh = cache.cube(&head)?;
    let mt = cache.cube(&tail)?;
    // written in the frame of the smaller of the two fits
    let head_term = mh.add_scaled(&m0, -1.0).scaled(-factor);
    let tail_term = mt.add_scaled(&m0, -1.0).scaled(factor);
    g.push(DyadicSet::Cube(head), TermKind::Head, head_term);
    g.push(DyadicSet::Cube(tail), TermKind::Tail, tail_term);
    Ok(())
}

/// Every set whose best approximation `g_N` uses.
pub fn required_fits(bp: &BasicPathSet, dim: usize) -> Vec<DyadicSet> {
    let root = DyadicCube::root(dim);
    let mut sets = vec![DyadicSet::Cube(root)];
    sets.extend(root.sons().into_iter().map(DyadicSet::Cube));
    for b in &bp.paths {
        sets.push(DyadicSet::Cube(b.tail()));
        sets.push(DyadicSet::Cube(b.head()));
        sets.extend(b.tail().sons().into_iter().map(DyadicSet::Cube));
        if !b.is_singleton() {
            sets.push(b.ring());
        }
    }
    sets
}

/// The term list of `g_N` for one tree run.
pub fn build_piecewise_cached(cache: &FitCache, bp: &BasicPathSet) -> Result<PiecewisePoly> {
    let f = cache.function();
    let (d, level) = (f.dim(), f.level());
    cache.prefetch(&required_fits(bp, d))?;
    let root = DyadicCube::root(d);
    let mut g = PiecewisePoly::new(d, level);
    g.push(DyadicSet::Cube(root), TermKind::RootFit, cache.cube(&root)?);
    push_m(&mut g, cache, &root, TermKind::RootSons)?;
    for b in &bp.paths {
        push_bracket(&mut g, cache, b, 1.0)?;
        push_m(&mut g, cache, &b.tail(), TermKind::TailSons)?;
    }
    Ok(g)
}

pub fn build_piecewise(f: &GridFunction, bp: &BasicPathSet, k: usize, q: NormExponent) -> Result<PiecewisePoly> {
    build_piecewise_cached(&FitCache::new(f, k, q)?, bp)
}

/// `g_N = m_{Q^d}` on the trivial covering.
pub fn trivial_piecewise(cache: &FitCache) -> Result<PiecewisePoly> {
    let f = cache.function();
    let root = DyadicCube::root(f.dim());
    let mut g = PiecewisePoly::new(f.dim(), f.level());
    g.push(DyadicSet::Cube(root), TermKind::RootFit, cache.cube(&root)?);
    Ok(g)
}

/// `S_B = Σ_{Q ∈ B \ {B⁻}} M_Q − [(m_{B⁰} − m_{B⁺}) 1_{B⁺} + (m_{B⁻} − m_{B⁰}) 1_{B⁻}]`.
pub fn s_b_term_form(cache: &FitCache, b: &AscendingPath) -> Result<PiecewisePoly> {
    let f = cache.function();
    let mut g = PiecewisePoly::new(f.dim(), f.level());
    for q in &b.cubes()[1..] {
        push_m(&mut g, cache, q, TermKind::Other)?;
    }
    push_bracket(&mut g, cache, b, -1.0)?;
    Ok(g)
}

/// `S_B = Σ_{Q ∈ B \ {B⁻}} Σ_{Q' ∈ D_1(Q) \ B} (m_{Q'} − m_{B⁰}) 1_{Q'}`.
pub fn s_b_double_sum(cache: &FitCache, b: &AscendingPath) -> Result<PiecewisePoly> {
    let f = cache.function();
    let mut g = PiecewisePoly::new(f.dim(), f.level());
    let Some(m0) = ring_fit(cache, b)? else {
        return Ok(g);
    };
    for q in &b.cubes()[1..] {
        for s in q.sons() {
            if b.contains(&s) {
                continue;
            }
            let term = cache.cube(&s)?.add_scaled(&m0, -1.0);
            g.push(DyadicSet::Cube(s), TermKind::Other, term);
        }
    }
    Ok(g)
}

/// `‖f − P_j‖_q` for `P_j = Σ_{Q level j} m_Q 1_Q`, `j = 0..=J`.
pub fn telescoping_errors(f: &GridFunction, k: usize, q: NormExponent) -> Result<Vec<f64>> {
    let fitter = Fitter::new(f, k, q)?;
    let d = f.dim();
    (0..=f.level())
        .map(|j| {
            let fits: Result<Vec<(DyadicCube, FitResult)>> = (0..1usize << (j as usize * d))
                .into_par_iter()
                .map(|lin| {
                    let c = DyadicCube::from_linear(d, j, lin);
                    fitter.fit_cube(&c).map(|r| (c, r))
                })
                .collect();
            let mut pj = vec![0.0; f.len()];
            for (c, r) in fits? {
                r.minimizer.accumulate(f.level(), &c.cell_indices(f.level())?, 1.0, &mut pj);
            }
            Ok(weighted_norm(f.values().iter().zip(&pj).map(|(a, b)| a - b), f.cell_volume(), q))
        })
        .collect()
}

/// Disjoint rings covering `Q^d`, one polynomial each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingPartition {
    pub dim: usize,
    pub level: u32,
    pub rings: Vec<(DyadicSet, Polynomial)>,
}

impl RingPartition {
    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn eval_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1usize << (self.level as usize * self.dim)];
        for (r, m) in &self.rings {
            let cells = r.cell_indices(self.level).expect("ring above grid level");
            m.accumulate(self.level, &cells, 1.0, &mut out);
        }
        out
    }

    /// Whether the rings are pairwise disjoint with union `Q^d`, checked cell by cell.
    pub fn is_partition(&self) -> bool {
        let mut hits = vec![0u32; 1usize << (self.level as usize * self.dim)];
        for (r, _) in &self.rings {
            for c in r.cell_indices(self.level).expect("ring above grid level") {
                hits[c] += 1;
            }
        }
        hits.into_iter().all(|h| h == 1)
    }

    pub fn as_piecewise(&self) -> PiecewisePoly {
        PiecewisePoly {
            dim: self.dim,
            level: self.level,
            terms: self
                .rings
                .iter()
                .map(|(r, m)| Term { region: r.clone(), kind: TermKind::Other, polynomial: m.clone() })
                .collect(),
        }
    }
}

fn cube_frame(q: &DyadicCube) -> (Vec<f64>, f64) {
    (q.center(), q.side() * (q.dim() as f64).sqrt())
}

/// Splits `outer` minus the disjoint subcubes `holes` into cubes and rings.
fn carve(outer: DyadicCube, holes: &[DyadicCube], out: &mut Vec<DyadicSet>) {
    match holes {
        [] => out.push(DyadicSet::Cube(outer)),
        [h] if *h == outer => {}
        [h] => out.push(DyadicSet::ring(outer, Some(*h))),
        _ => {
            for son in outer.sons() {
                let inside: Vec<DyadicCube> = holes.iter().filter(|h| h.is_subset_of(&son)).copied().collect();
                carve(son, &inside, out);
            }
        }
    }
}

/// Collapses `g` to one polynomial per member of `Δ_N`, then replaces every
/// member by the rings left after removing its largest proper sub-members.
/// A chain of nested members becomes the consecutive differences of the chain.
pub fn to_ring_partition(cov: &Covering, g: &PiecewisePoly) -> Result<RingPartition> {
    if !cov.covers(g.level) {
        return Err(Error::NotACovering);
    }
    let d = g.dim;
    let mut own: BTreeMap<DyadicCube, Polynomial> = BTreeMap::new();
    for t in &g.terms {
        let DyadicSet::Cube(q) = t.region else {
            return Err(Error::BadFormat(format!("term on {} is not a cube", t.region.id())));
        };
        if !cov.contains(&q) {
            return Err(Error::NotACovering);
        }
        let (c, s) = cube_frame(&q);
        let entry = own.entry(q).or_insert_with(|| Polynomial::zero(d, t.polynomial.k, c, s));
        *entry = entry.add_scaled(&t.polynomial, 1.0);
    }
    let members: BTreeSet<DyadicCube> = cov.members.keys().copied().collect();
    let parent = |q: &DyadicCube| -> Option<DyadicCube> {
        (0..q.level()).rev().map(|l| q.ancestor(l).expect("coarser level")).find(|a| members.contains(a))
    };
    let k = g.terms.first().map_or(1, |t| t.polynomial.k);
    // accumulated polynomial per member, coarse to fine
    let mut total: HashMap<DyadicCube, Polynomial> = HashMap::new();
    let mut children: BTreeMap<DyadicCube, Vec<DyadicCube>> = BTreeMap::new();
    for q in &members {
        let (c, s) = cube_frame(q);
        let mut acc = own.get(q).cloned().unwrap_or_else(|| Polynomial::zero(d, k, c.clone(), s));
        if acc.center != c || acc.scale != s {
            acc = acc.rebase(&c, s);
        }
        if let Some(p) = parent(q) {
            acc = acc.add_scaled(&total[&p], 1.0);
            children.entry(p).or_default().push(*q);
        }
        total.insert(*q, acc);
    }
    let mut rings = Vec::new();
    for q in &members {
        let holes = children.get(q).cloned().unwrap_or_default();
        let mut pieces = Vec::new();
        carve(*q, &holes, &mut pieces);
        for r in pieces {
            let outer = r.outer_cube().expect("cube or ring");
            let (c, s) = cube_frame(&outer);
            rings.push((r, total[q].rebase(&c, s)));
        }
    }
    rings.sort_by(|a, b| {
        let (oa, ob) = (a.0.outer_cube().expect("ring"), b.0.outer_cube().expect("ring"));
        oa.cmp(&ob).then_with(|| a.0.finest_level().cmp(&b.0.finest_level())).then_with(|| a.0.id().cmp(&b.0.id()))
    });
    Ok(RingPartition { dim: d, level: g.level, rings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::path_between;
    use crate::grid::{make_function, FunctionSpec};

    fn cube(s: &str) -> DyadicCube {
        s.parse().unwrap()
    }

    fn one_path() -> (BadSet, BasicPathSet) {
        let t = cube("2:1,1");
        let h = cube("1:0,0");
        let bs = BadSet {
            n: 4,
            dim: 2,
            cubes: [DyadicCube::root(2), t, h].into_iter().collect(),
            minimal: vec![t],
            boundary: vec![],
        };
        let bp = BasicPathSet { paths: vec![path_between(&t, &h).unwrap()], contacts: vec![DyadicCube::root(2)] };
        (bs, bp)
    }

    #[test]
    fn one_path_covering() {
        let (bs, bp) = one_path();
        let lit = literal_covering(&bp, 2);
        assert_eq!(lit.len(), 3 + 4);
        let cov = build_covering(&bp, &bs);
        assert_eq!(cov.literal_len(), 7);
        assert_eq!(cov.len(), 10);
        assert!(cov.covers(4));
        assert!(!lit.covers(4));
    }

    #[test]
    fn polynomial_input_is_reproduced() {
        let f = make_function(&"poly:0.5 + x_1 - 2x_2".parse::<FunctionSpec>().unwrap(), 2, 5).unwrap();
        let (bs, bp) = one_path();
        let g = build_piecewise(&f, &bp, 2, NormExponent::Finite(2.0)).unwrap();
        assert!(approx_error(&f, &g, NormExponent::Finite(2.0)).unwrap() < 1e-10);
        let rings = to_ring_partition(&build_covering(&bp, &bs), &g).unwrap();
        assert!(rings.is_partition());
        let (a, b) = (g.eval_grid(), rings.eval_grid());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }

    #[test]
    fn s_b_forms_agree_and_vanish_off_the_ring() {
        let f = make_function(&"sine:1".parse::<FunctionSpec>().unwrap(), 2, 5).unwrap();
        let cache = FitCache::new(&f, 2, NormExponent::Finite(2.0)).unwrap();
        let b = path_between(&cube("3:2,5"), &cube("1:0,1")).unwrap();
        let a = s_b_term_form(&cache, &b).unwrap().eval_grid();
        let c = s_b_double_sum(&cache, &b).unwrap().eval_grid();
        let ring = b.ring();
        for (i, (x, y)) in a.iter().zip(&c).enumerate() {
            assert!((x - y).abs() < 1e-10);
            if !ring.contains_cell(&DyadicCube::from_linear(2, 5, i)) {
                assert!(x.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tower_of_two() {
        // Q1 ⊂ Q2 ⊂ Q^d with constant polynomials 1 and 2 and root 0
        let q1 = cube("2:0,0");
        let q2 = cube("1:0,0");
        let mut cov = Covering::trivial(2);
        cov.add(q1, Provenance::Tail);
        cov.add(q2, Provenance::Head);
        for s in DyadicCube::root(2).sons() {
            cov.add(s, Provenance::Fixup);
        }
        let mut g = PiecewisePoly::new(2, 3);
        let (c1, s1) = cube_frame(&q1);
        let (c2, s2) = cube_frame(&q2);
        g.push(DyadicSet::Cube(q1), TermKind::Other, Polynomial::constant(2, 1, 1.0, c1, s1));
        g.push(DyadicSet::Cube(q2), TermKind::Other, Polynomial::constant(2, 1, 2.0, c2, s2));
        let rp = to_ring_partition(&cov, &g).unwrap();
        assert_eq!(rp.len(), 5);
        let find = |r: &DyadicSet| rp.rings.iter().find(|(x, _)| x == r).unwrap().1.coeffs[0];
        assert_eq!(find(&DyadicSet::Cube(q1)), 3.0);
        assert_eq!(find(&DyadicSet::ring(q2, Some(q1))), 2.0);
        assert!(rp.is_partition());
    }

    #[test]
    fn missing_cover_is_rejected() {
        let mut cov = Covering::trivial(2);
        cov.add(cube("1:0,0"), Provenance::Head);
        let g = PiecewisePoly::new(2, 3);
        assert!(matches!(to_ring_partition(&cov, &g), Err(Error::NotACovering)));
    }
}
