//! Local best polynomial approximation `E_k(f; S; L_q)` on dyadic sets.
//!
//! Approximants have total degree `≤ k − 1` and are written in the monomial
//! basis of `u = (x − center) / scale`, where `center` is the centroid of the
//! set and `scale` the diameter of its bounding box. Keeping `u` in
//! `[-1/2, 1/2]`-ish ranges makes every fit equally well conditioned no matter
//! how deep the cube sits in the tree.
//!
//! Solvers: `q = 2` through the normal equations with a pseudo-inverse,
//! `q = ∞` through the epigraph linear program, every other `q` by damped
//! iteratively reweighted least squares.

use std::sync::OnceLock;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dyadic::{DyadicCube, DyadicSet};
use crate::error::{Error, Result};
use crate::grid::{weighted_norm, GridFunction, NormExponent};

/// Weight floor for the reweighting, relative to the largest residual.
pub const IRLS_WEIGHT_FLOOR: f64 = 1e-12;
pub const IRLS_MAX_ITER: usize = 200;
pub const IRLS_REL_STOP: f64 = 1e-10;

/// Exponents of the monomials of total degree `< k` in `d` variables,
/// graded by degree and lexicographically descending within a degree.
pub fn monomial_exponents(dim: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..k as u32 {
        rec(dim, deg, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// `C(k − 1 + d, d)`.
pub fn basis_size(dim: usize, k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..dim as u128 {
        num *= (k as u128 - 1) + dim as u128 - i;
        den *= i + 1;
    }
    (num / den) as usize
}

fn fill_monomials(exps: &[Vec<u32>], u: &[f64], out: &mut [f64]) {
    for (slot, e) in out.iter_mut().zip(exps) {
        let mut v = 1.0;
        for (ui, &p) in u.iter().zip(e) {
            for _ in 0..p {
                v *= ui;
            }
        }
        *slot = v;
    }
}

/// A polynomial of total degree `≤ k − 1` in the centered, scaled basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial {
    pub d: usize,
    pub k: usize,
    #[serde(serialize_with = "crate::format::ser_f64_vec")]
    pub center: Vec<f64>,
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub scale: f64,
    #[serde(serialize_with = "crate::format::ser_f64_vec")]
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero(d: usize, k: usize, center: Vec<f64>, scale: f64) -> Self {
        Self {
            d,
            k,
            center,
            scale,
            coeffs: vec![0.0; basis_size(d, k)],
        }
    }

    pub fn constant(d: usize, k: usize, value: f64, center: Vec<f64>, scale: f64) -> Self {
        let mut p = Self::zero(d, k, center, scale);
        if let Some(c) = p.coeffs.first_mut() {
            *c = value;
        }
        p
    }

    pub fn exponents(&self) -> Vec<Vec<u32>> {
        monomial_exponents(self.d, self.k)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let u: Vec<f64> = x.iter().zip(&self.center).map(|(xi, ci)| (xi - ci) / self.scale).collect();
        let exps = self.exponents();
        let mut phi = vec![0.0; exps.len()];
        fill_monomials(&exps, &u, &mut phi);
        phi.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Same polynomial written in the frame `(center, scale)`.
    pub fn rebase(&self, center: &[f64], scale: f64) -> Polynomial {
        let exps = self.exponents();
        let ratio = scale / self.scale;
        let shift: Vec<f64> = center.iter().zip(&self.center).map(|(c, c0)| (c - c0) / self.scale).collect();
        let mut out = Polynomial::zero(self.d, self.k, center.to_vec(), scale);
        let position = |e: &[u32]| exps.iter().position(|x| x.as_slice() == e).expect("monomial");
        // ((x - c0)/s0)_i = ratio * u'_i + shift_i, expanded binomially per axis
        for (coef, e) in self.coeffs.iter().zip(&exps) {
            if *coef == 0.0 {
                continue;
            }
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(self.d), *coef)];
            for (axis, &p) in e.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (p as usize + 1));
                for (pe, pc) in &partial {
                    let mut binom = 1.0;
                    for b in 0..=p {
                        let term = binom * ratio.powi(b as i32) * shift[axis].powi((p - b) as i32);
                        let mut ne = pe.clone();
                        ne.push(b);
                        next.push((ne, pc * term));
                        binom = binom * (p - b) as f64 / (b + 1) as f64;
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.coeffs[position(&pe)] += pc;
            }
        }
        out
    }

    /// `self + factor · other`, written in `self`'s frame.
    pub fn add_scaled(&self, other: &Polynomial, factor: f64) -> Polynomial {
        let o = if other.center == self.center && other.scale == self.scale {
            other.clone()
        } else {
            other.rebase(&self.center, self.scale)
        };
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *a += factor * b;
        }
        out
    }

    /// Adds `factor · self` at the centers of the given level-`level` cells
    /// (linear indices) into `out`, which is indexed by linear cell index.
    pub fn accumulate(&self, level: u32, cells: &[usize], factor: f64, out: &mut [f64]) {
        let exps = self.exponents();
        let d = self.d;
        let h = (-(level as f64)).exp2();
        let mask = (1usize << level) - 1;
        let mut u = vec![0.0; d];
        let mut phi = vec![0.0; exps.len()];
        for &c in cells {
            for (i, ui) in u.iter_mut().enumerate() {
                let a = (c >> (level as usize * i)) & mask;
                *ui = ((a as f64 + 0.5) * h - self.center[i]) / self.scale;
            }
            fill_monomials(&exps, &u, &mut phi);
            let v: f64 = phi.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum();
            out[c] += factor * v;
        }
    }

    pub fn scaled(&self, factor: f64) -> Polynomial {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

/// Values of `m` at the centers of `cells`.
pub fn eval_poly(m: &Polynomial, cells: &[DyadicCube]) -> Vec<f64> {
    cells.iter().map(|c| m.eval(&c.center())).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Fewer independent cells than basis functions; the fit interpolates.
    pub underdetermined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub minimizer: Polynomial,
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub error: f64,
    pub diagnostics: FitDiagnostics,
}

/// Moore–Penrose inverse of a small symmetric matrix plus its numerical rank.
fn sym_pinv(g: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max * 1e-12 * n as f64;
    let mut out = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > tol && lam > 0.0 {
            rank += 1;
            let v = eig.eigenvectors.column(i);
            out += (v * v.transpose()) / lam;
        }
    }
    (out, rank)
}

/// Cells, their basis values and the frame of one fitting problem.
struct Problem1<'a> {
    values: Vec<f64>,
    design: &'a [f64],
    m: usize,
    cell_volume: f64,
}

impl Problem1<'_> {
    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.design.chunks_exact(self.m)
    }

    fn residuals(&self, a: &[f64]) -> Vec<f64> {
        self.rows()
            .zip(&self.values)
            .map(|(row, y)| y - row.iter().zip(a).map(|(p, c)| p * c).sum::<f64>())
            .collect()
    }

    fn weighted_solve(&self, weights: Option<&[f64]>) -> (Vec<f64>, usize) {
        let m = self.m;
        let mut g = DMatrix::<f64>::zeros(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for (idx, (row, y)) in self.rows().zip(&self.values).enumerate() {
            let w = weights.map_or(1.0, |w| w[idx]);
            for i in 0..m {
                let wi = w * row[i];
                b[i] += wi * y;
                for j in 0..=i {
                    g[(i, j)] += wi * row[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                g[(j, i)] = g[(i, j)];
            }
        }
        let (pinv, rank) = sym_pinv(&g);
        let a = (&pinv * b).iter().copied().collect();
        (self.refine(&pinv, weights, a), rank)
    }

    /// Iterative refinement of a normal-equation solution; recovers the digits
    /// lost to squaring the condition number.
    fn refine(&self, pinv: &DMatrix<f64>, weights: Option<&[f64]>, mut a: Vec<f64>) -> Vec<f64> {
        for _ in 0..2 {
            let r = self.residuals(&a);
            let mut b = DVector::<f64>::zeros(self.m);
            for (idx, (row, ri)) in self.rows().zip(&r).enumerate() {
                let w = weights.map_or(1.0, |w| w[idx]);
                for (bi, p) in b.iter_mut().zip(row) {
                    *bi += w * p * ri;
                }
            }
            let delta = pinv * b;
            a.iter_mut().zip(delta.iter()).for_each(|(x, dx)| *x += dx);
        }
        a
    }

    fn objective(&self, a: &[f64], q: f64) -> f64 {
        self.residuals(a).iter().map(|r| r.abs().powf(q)).sum()
    }

    fn solve_l2(&self) -> (Vec<f64>, FitDiagnostics) {
        let (a, rank) = self.weighted_solve(None);
        (
            a,
            FitDiagnostics {
                iterations: 1,
                converged: true,
                underdetermined: rank < self.m,
            },
        )
    }

    fn solve_irls(&self, q: f64) -> (Vec<f64>, FitDiagnostics) {
        let (mut a, mut diag) = self.solve_l2();
        diag.converged = false;
        let mut obj = self.objective(&a, q);
        let mut iterations = 0;
        while iterations < IRLS_MAX_ITER {
            iterations += 1;
            if obj == 0.0 {
                diag.converged = true;
                break;
            }
            let r = self.residuals(&a);
            let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let floor = (IRLS_WEIGHT_FLOOR * rmax).max(f64::MIN_POSITIVE);
            let w: Vec<f64> = r.iter().map(|v| v.abs().max(floor).powf(q - 2.0)).collect();
            let (cand, _) = self.weighted_solve(Some(&w));
            // damping: backtrack along the IRLS step until the objective drops
            let mut theta = 1.0;
            let mut accepted = None;
            while theta > 1e-4 {
                let trial: Vec<f64> = a.iter().zip(&cand).map(|(x, y)| x + theta * (y - x)).collect();
                let t_obj = self.objective(&trial, q);
                if t_obj <= obj {
                    accepted = Some((trial, t_obj));
                    break;
                }
                theta *= 0.5;
            }
            let Some((next, next_obj)) = accepted else {
                diag.converged = true;
                break;
            };
            let rel = (obj - next_obj) / obj;
            a = next;
            obj = next_obj;
            if rel <= IRLS_REL_STOP {
                diag.converged = true;
                break;
            }
        }
        diag.iterations = iterations;
        (a, diag)
    }

    fn solve_minimax(&self) -> (Vec<f64>, FitDiagnostics) {
        let (a0, mut diag) = self.solve_l2();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let coef_vars: Vec<_> = (0..self.m)
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        let t = lp.add_var(1.0, (0.0, f64::INFINITY));
        for (row, &y) in self.rows().zip(&self.values) {
            // y - φ·a <= t  and  φ·a - y <= t
            let mut upper: Vec<_> = coef_vars.iter().zip(row).map(|(&v, &p)| (v, p)).collect();
            upper.push((t, 1.0));
            lp.add_constraint(upper.as_slice(), ComparisonOp::Ge, y);
            let mut lower: Vec<_> = coef_vars.iter().zip(row).map(|(&v, &p)| (v, -p)).collect();
            lower.push((t, 1.0));
            lp.add_constraint(lower.as_slice(), ComparisonOp::Ge, -y);
        }
        match lp.solve() {
            Ok(SolveOutcome::Solution(sol)) => {
                let a: Vec<f64> = coef_vars.iter().map(|v| sol[*v]).collect();
                let worst = |c: &[f64]| self.residuals(c).iter().fold(0.0f64, |m, r| m.max(r.abs()));
                diag.converged = true;
                if worst(&a) <= worst(&a0) {
                    (a, diag)
                } else {
                    (a0, diag)
                }
            }
            _ => {
                diag.converged = false;
                (a0, diag)
            }
        }
    }

    fn solve(&self, q: NormExponent) -> (Vec<f64>, FitDiagnostics) {
        if self.values.is_empty() {
            return (vec![0.0; self.m], FitDiagnostics { iterations: 0, converged: true, underdetermined: true });
        }
        match q {
            NormExponent::Finite(2.0) => self.solve_l2(),
            NormExponent::Finite(q) => self.solve_irls(q),
            NormExponent::Infinity => self.solve_minimax(),
        }
    }

    fn error(&self, a: &[f64], q: NormExponent) -> f64 {
        weighted_norm(self.residuals(a), self.cell_volume, q)
    }
}

/// Per-level data for fits on full cubes: the (shared) design matrix in the
/// cube's own frame and, for `q = 2`, the pseudo-inverse of its Gram matrix.
struct LevelDesign {
    design: Vec<f64>,
    gram_pinv: DMatrix<f64>,
    rank: usize,
}

/// Fits polynomials of order `k` to one grid function, caching what can be
/// shared across cubes of a level. Safe to use from several threads.
pub struct Fitter<'f> {
    f: &'f GridFunction,
    k: usize,
    q: NormExponent,
    exps: Vec<Vec<u32>>,
    levels: Vec<OnceLock<LevelDesign>>,
}

/// Cubes with more cells than this are fitted without caching their design.
const DESIGN_CACHE_LIMIT: usize = 1 << 16;

impl<'f> Fitter<'f> {
    pub fn new(f: &'f GridFunction, k: usize, q: NormExponent) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("polynomial order k must be >= 1".into()));
        }
        Ok(Self {
            f,
            k,
            q,
            exps: monomial_exponents(f.dim(), k),
            levels: (0..=f.level()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn function(&self) -> &GridFunction {
        self.f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> NormExponent {
        self.q
    }

    fn m(&self) -> usize {
        self.exps.len()
    }

    fn design_for(&self, cells: &[usize], center: &[f64], scale: f64) -> Vec<f64> {
        let m = self.m();
        let d = self.f.dim();
        let mut design = vec![0.0; cells.len() * m];
        let mut u = vec![0.0; d];
        for (row, &c) in design.chunks_exact_mut(m).zip(cells) {
            let x = self.f.cell_center(c);
            for i in 0..d {
                u[i] = (x[i] - center[i]) / scale;
            }
            fill_monomials(&self.exps, &u, row);
        }
        design
    }

    fn cube_frame(cube: &DyadicCube) -> (Vec<f64>, f64) {
        (cube.center(), cube.side() * (cube.dim() as f64).sqrt())
    }

    fn level_design(&self, cube: &DyadicCube) -> &LevelDesign {
        self.levels[cube.level() as usize].get_or_init(|| {
            let canonical = DyadicCube::from_linear(cube.dim(), cube.level(), 0);
            let cells = canonical.cell_indices(self.f.level()).expect("level <= J");
            let (center, scale) = Self::cube_frame(&canonical);
            let design = self.design_for(&cells, &center, scale);
            let m = self.m();
            let mut g = DMatrix::<f64>::zeros(m, m);
            for row in design.chunks_exact(m) {
                for i in 0..m {
                    for j in 0..m {
                        g[(i, j)] += row[i] * row[j];
                    }
                }
            }
            let (gram_pinv, rank) = sym_pinv(&g);
            LevelDesign { design, gram_pinv, rank }
        })
    }

    /// Best approximation on a single dyadic cube.
    pub fn fit_cube(&self, cube: &DyadicCube) -> Result<FitResult> {
        if cube.level() > self.f.level() {
            return Err(Error::ResolutionTooCoarse { needed: cube.level(), got: self.f.level() });
        }
        let cells = cube.cell_indices(self.f.level())?;
        if cells.len() > DESIGN_CACHE_LIMIT {
            return self.fit_set(&DyadicSet::Cube(*cube));
        }
        let level = self.level_design(cube);
        let (center, scale) = Self::cube_frame(cube);
        let problem = Problem1 {
            values: cells.iter().map(|&c| self.f.values()[c]).collect(),
            design: &level.design,
            m: self.m(),
            cell_volume: self.f.cell_volume(),
        };
        let (coeffs, diagnostics) = match self.q {
            NormExponent::Finite(2.0) => {
                let mut b = DVector::<f64>::zeros(self.m());
                for (row, y) in problem.rows().zip(&problem.values) {
                    for (bi, p) in b.iter_mut().zip(row) {
                        *bi += p * y;
                    }
                }
                let a = (&level.gram_pinv * b).iter().copied().collect();
                (
                    problem.refine(&level.gram_pinv, None, a),
                    FitDiagnostics { iterations: 1, converged: true, underdetermined: level.rank < self.m() },
                )
            }
            q => problem.solve(q),
        };
        let error = problem.error(&coeffs, self.q);
        Ok(FitResult {
            minimizer: Polynomial { d: self.f.dim(), k: self.k, center, scale, coeffs },
            error,
            diagnostics,
        })
    }

    /// Best approximation on a cube, ring or disjoint union.
    pub fn fit_set(&self, set: &DyadicSet) -> Result<FitResult> {
        let cells = set.cell_indices(self.f.level())?;
        self.fit_cells(&cells)
    }

    /// Best approximation on an arbitrary list of level-`J` cells (linear indices).
    pub fn fit_cells(&self, cells: &[usize]) -> Result<FitResult> {
        let d = self.f.dim();
        let (center, scale) = frame_of(self.f, cells);
        let design = self.design_for(cells, &center, scale);
        let problem = Problem1 {
            values: cells.iter().map(|&c| self.f.values()[c]).collect(),
            design: &design,
            m: self.m(),
            cell_volume: self.f.cell_volume(),
        };
        let (coeffs, diagnostics) = problem.solve(self.q);
        let error = problem.error(&coeffs, self.q);
        Ok(FitResult {
            minimizer: Polynomial { d, k: self.k, center, scale, coeffs },
            error,
            diagnostics,
        })
    }
}

/// Centroid of the cells and diameter of their bounding box.
fn frame_of(f: &GridFunction, cells: &[usize]) -> (Vec<f64>, f64) {
    let d = f.dim();
    if cells.is_empty() {
        return (vec![0.5; d], (d as f64).sqrt());
    }
    let h = (-(f.level() as f64)).exp2();
    let mut sum = vec![0.0; d];
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &c in cells {
        let x = f.cell_center(c);
        for i in 0..d {
            sum[i] += x[i];
            lo[i] = lo[i].min(x[i] - h / 2.0);
            hi[i] = hi[i].max(x[i] + h / 2.0);
        }
    }
    let center = sum.iter().map(|s| s / cells.len() as f64).collect();
    let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    (center, diam)
}

/// `m_S` and `E_k(f; S; L_q)`.
pub fn best_approx(f: &GridFunction, set: &DyadicSet, k: usize, q: NormExponent) -> Result<FitResult> {
    if set.is_empty() {
        return Err(Error::BadFormat("best approximation on an empty set".into()));
    }
    let fitter = Fitter::new(f, k, q)?;
    match set {
        DyadicSet::Cube(c) => fitter.fit_cube(c),
        other => fitter.fit_set(other),
    }
}
