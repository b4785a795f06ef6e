//! Dyadic (k,p)-variation and the normalized weight `W`.
//!
//! The variation of a set is the supremum of `Σ E_k(f;Q;L_q)^p` over disjoint
//! families of dyadic cubes inside it, down to the grid level. One bottom-up
//! pass gives it for every cube:
//!
//! `dp(Q) = max(E_k(f;Q)^p, Σ_{sons} dp(Q'))`.
//!
//! Rings and unions reuse the cube table: a cube that only partially meets
//! the set contributes the sum over its sons.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dyadic::{DyadicCube, DyadicSet};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::grid::{GridFunction, NormExponent};
use crate::polyfit::{basis_size, Fitter};

/// Relative size below which a fit error is treated as round-off.
const NOISE_FLOOR: f64 = 1e-11;

/// A subadditive set function normalized so the unit cube has weight one.
pub trait Weight: Sync {
    fn dim(&self) -> usize;
    /// Finest level the weight resolves.
    fn max_level(&self) -> u32;
    /// Unnormalized value on a dyadic cube.
    fn raw_cube(&self, q: &DyadicCube) -> f64;

    /// Normalizer `Z`, the raw value of the unit cube.
    fn total(&self) -> f64 {
        self.raw_cube(&DyadicCube::root(self.dim()))
    }

    /// Unnormalized value on a cube, ring or disjoint union.
    fn raw_set(&self, s: &DyadicSet) -> f64 {
        fn walk<W: Weight + ?Sized>(w: &W, q: DyadicCube, s: &DyadicSet) -> f64 {
            match classify(&q, s) {
                Overlap::Inside => w.raw_cube(&q),
                Overlap::Outside => 0.0,
                Overlap::Partial if q.level() >= w.max_level() => 0.0,
                Overlap::Partial => q.sons().into_iter().map(|son| walk(w, son, s)).sum(),
            }
        }
        walk(self, DyadicCube::root(self.dim()), s)
    }

    fn cube(&self, q: &DyadicCube) -> f64 {
        self.raw_cube(q) / self.total()
    }

    fn set(&self, s: &DyadicSet) -> f64 {
        self.raw_set(s) / self.total()
    }

    /// `W(outer \ inner)`, the plain cube weight when `inner` is `None`.
    fn ring(&self, outer: &DyadicCube, inner: Option<&DyadicCube>) -> f64 {
        match inner {
            None => self.cube(outer),
            Some(inner) => {
                // only cubes on the path down to `inner` are partial
                let mut raw = 0.0;
                let mut cur = *outer;
                while cur != *inner {
                    let mut next = None;
                    for son in cur.sons() {
                        if inner.is_subset_of(&son) {
                            next = Some(son);
                        } else {
                            raw += self.raw_cube(&son);
                        }
                    }
                    cur = next.expect("inner lies inside outer");
                }
                raw / self.total()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Overlap {
    Inside,
    Outside,
    Partial,
}

fn classify(q: &DyadicCube, s: &DyadicSet) -> Overlap {
    match s {
        DyadicSet::Cube(c) => cube_overlap(q, c),
        DyadicSet::Ring { outer, inner } => match cube_overlap(q, outer) {
            Overlap::Outside => Overlap::Outside,
            Overlap::Partial => Overlap::Partial,
            Overlap::Inside => match cube_overlap(q, inner) {
                Overlap::Inside => Overlap::Outside,
                Overlap::Partial => Overlap::Partial,
                Overlap::Outside => Overlap::Inside,
            },
        },
        DyadicSet::Union(members) => {
            // exact covered volume of q, in units of the finest member
            let fine = members.iter().map(|m| m.level()).max().unwrap_or(0).max(q.level());
            let d = q.dim();
            let vol = |c: &DyadicCube| 1u128 << ((fine - c.level()) as usize * d);
            let mut covered = 0u128;
            for m in members {
                if q.is_subset_of(m) {
                    return Overlap::Inside;
                }
                if m.is_subset_of(q) {
                    covered += vol(m);
                }
            }
            if covered == 0 {
                Overlap::Outside
            } else if covered == vol(q) {
                Overlap::Inside
            } else {
                Overlap::Partial
            }
        }
    }
}

fn cube_overlap(q: &DyadicCube, c: &DyadicCube) -> Overlap {
    if q.is_subset_of(c) {
        Overlap::Inside
    } else if c.is_subset_of(q) {
        Overlap::Partial
    } else {
        Overlap::Outside
    }
}

/// `E_k^p` and the variation DP value for every dyadic cube of levels `0..=J`.
#[derive(Clone, Debug)]
pub struct VariationTable {
    dim: usize,
    level: u32,
    k: usize,
    p: f64,
    q: NormExponent,
    /// `errors[j][α]`: `E_k(f;Q;L_q)` for the level-`j` cube with linear index `α`.
    errors: Vec<Vec<f64>>,
    powers: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
}

impl VariationTable {
    /// Fits every dyadic cube of `f` (levels in parallel per cube) and runs the DP.
    pub fn build(f: &GridFunction, k: usize, p: f64, q: NormExponent) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("variation exponent p = {p} must be finite and >= 1")));
        }
        let fitter = Fitter::new(f, k, q)?;
        let d = f.dim();
        let big_j = f.level();
        let m = basis_size(d, k);
        let fscale = f.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut errors = Vec::with_capacity(big_j as usize + 1);
        for j in 0..=big_j {
            let count = 1usize << (j as usize * d);
            let cells_per_cube = 1u128 << ((big_j - j) as usize * d);
            if cells_per_cube <= m as u128 {
                // interpolated exactly
                errors.push(vec![0.0; count]);
                continue;
            }
            let floor = NOISE_FLOOR * fscale * measure_root(d, j, q);
            let level: Result<Vec<f64>> = (0..count)
                .into_par_iter()
                .map(|lin| {
                    let e = fitter.fit_cube(&DyadicCube::from_linear(d, j, lin))?.error;
                    Ok(if e <= floor { 0.0 } else { e })
                })
                .collect();
            errors.push(level?);
        }
        Ok(Self::from_errors(d, k, p, q, errors))
    }

    /// Table from given per-cube values `E`, one vector per level in linear
    /// cube order. Used for synthetic weights.
    pub fn from_errors(dim: usize, k: usize, p: f64, q: NormExponent, errors: Vec<Vec<f64>>) -> Self {
        let powers: Vec<Vec<f64>> = errors.iter().map(|l| l.iter().map(|e| e.powf(p)).collect()).collect();
        let mut t = Self::from_powers(dim, powers);
        t.k = k;
        t.p = p;
        t.q = q;
        t.errors = errors;
        t
    }

    /// Table from per-cube values `E^p` directly, with `p = 1`.
    pub fn from_powers(dim: usize, powers: Vec<Vec<f64>>) -> Self {
        assert!(!powers.is_empty(), "at least one level");
        let level = powers.len() as u32 - 1;
        for (j, l) in powers.iter().enumerate() {
            assert_eq!(l.len(), 1usize << (j * dim), "level {j} has the wrong cube count");
        }
        let mut dp: Vec<Vec<f64>> = powers.clone();
        for j in (0..level as usize).rev() {
            let (upper, lower) = dp.split_at_mut(j + 1);
            let finer = &lower[0];
            for (lin, slot) in upper[j].iter_mut().enumerate() {
                let cube = DyadicCube::from_linear(dim, j as u32, lin);
                let sons: f64 = cube.sons().iter().map(|s| finer[s.linear()]).sum();
                *slot = slot.max(sons);
            }
        }
        Self {
            dim,
            level,
            k: 1,
            p: 1.0,
            q: NormExponent::Finite(2.0),
            errors: powers.clone(),
            powers,
            dp,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> NormExponent {
        self.q
    }

    /// `E_k(f;Q;L_q)`.
    pub fn error(&self, c: &DyadicCube) -> f64 {
        self.errors[c.level() as usize][c.linear()]
    }

    /// `E_k(f;Q;L_q)^p`.
    pub fn error_power(&self, c: &DyadicCube) -> f64 {
        self.powers[c.level() as usize][c.linear()]
    }

    /// DP value, the `p`-th power of the dyadic variation of the cube.
    pub fn dp(&self, c: &DyadicCube) -> f64 {
        self.dp[c.level() as usize][c.linear()]
    }

    /// Dyadic variation `(sup Σ E^p)^{1/p}` of a cube, ring or union.
    pub fn variation(&self, s: &DyadicSet) -> f64 {
        self.raw_set(s).powf(1.0 / self.p)
    }

    /// The normalized weight; fails when the function has no variation.
    pub fn weight(&self) -> Result<&Self> {
        if self.total() > 0.0 {
            Ok(self)
        } else {
            Err(Error::DegenerateFunction)
        }
    }

    /// Diagnostic dump: `cube,E,E_p,dp` per cube, coarse to fine.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cube,E,E_p,dp\n");
        for j in 0..=self.level {
            for lin in 0..self.dp[j as usize].len() {
                let c = DyadicCube::from_linear(self.dim, j, lin);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    c,
                    sig12(self.error(&c)),
                    sig12(self.error_power(&c)),
                    sig12(self.dp(&c))
                );
            }
        }
        out
    }
}

impl Weight for VariationTable {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_level(&self) -> u32 {
        self.level
    }

    fn raw_cube(&self, q: &DyadicCube) -> f64 {
        if q.level() > self.level {
            0.0
        } else {
            self.dp(q)
        }
    }
}

/// `|Q|^{1/q}` for a level-`j` cube.
fn measure_root(d: usize, j: u32, q: NormExponent) -> f64 {
    match q {
        NormExponent::Infinity => 1.0,
        NormExponent::Finite(q) => (-((j as usize * d) as f64) / q).exp2(),
    }
}

/// `var_p^k(f;S;L_q)` restricted to dyadic families down to the grid level.
pub fn dyadic_variation(f: &GridFunction, s: &DyadicSet, k: usize, p: f64, q: NormExponent) -> Result<f64> {
    Ok(VariationTable::build(f, k, p, q)?.variation(s))
}
