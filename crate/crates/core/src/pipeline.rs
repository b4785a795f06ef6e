//! End-to-end runs: variation table, tree, covering, `g_N`, rings, errors.

use std::time::Instant;

use serde::Serialize;

use crate::approximant::{
    approx_error, build_covering, build_piecewise_cached, to_ring_partition, trivial_piecewise, Covering, FitCache,
    PiecewisePoly, Provenance, RingPartition,
};
use crate::dyadic::{DyadicCube, DyadicSet};
use crate::polyfit::Polynomial;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, NormExponent};
use crate::tree::{run_tree, BadSet, BasicPathSet};
use crate::variation::{VariationTable, Weight};

/// Everything one value of `N` produces.
#[derive(Clone, Debug, Serialize)]
pub struct Approximation {
    pub n: usize,
    /// Set when the function has no variation and `g_N = m_{Q^d}`.
    pub degenerate: bool,
    pub bad_set: Option<BadSet>,
    pub basic_paths: Option<BasicPathSet>,
    pub covering: Covering,
    pub piecewise: PiecewisePoly,
    pub rings: RingPartition,
    pub error: f64,
    pub ring_error: f64,
}

#[derive(Serialize)]
struct MemberDump<'a> {
    cube: &'a DyadicCube,
    provenance: Vec<Provenance>,
}

#[derive(Serialize)]
struct TermDump<'a> {
    region: &'a DyadicSet,
    polynomial: &'a Polynomial,
}

#[derive(Serialize)]
struct ApproximantDump<'a> {
    covering: Vec<MemberDump<'a>>,
    terms: Vec<TermDump<'a>>,
    rings: Vec<TermDump<'a>>,
}

impl Approximation {
    /// `{covering, terms, rings}` as pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let dump = ApproximantDump {
            covering: self
                .covering
                .members
                .iter()
                .map(|(cube, tags)| MemberDump { cube, provenance: tags.iter().copied().collect() })
                .collect(),
            terms: self.piecewise.terms.iter().map(|t| TermDump { region: &t.region, polynomial: &t.polynomial }).collect(),
            rings: self.rings.rings.iter().map(|(region, polynomial)| TermDump { region, polynomial }).collect(),
        };
        Ok(serde_json::to_string_pretty(&dump)? + "\n")
    }
}

/// Reusable state for several values of `N` on one function.
pub struct Approximator<'f> {
    pub table: VariationTable,
    pub cache: FitCache<'f>,
    q: NormExponent,
}

impl<'f> Approximator<'f> {
    pub fn new(f: &'f GridFunction, k: usize, p: f64, q: NormExponent) -> Result<Self> {
        Ok(Self { table: VariationTable::build(f, k, p, q)?, cache: FitCache::new(f, k, q)?, q })
    }

    pub fn function(&self) -> &GridFunction {
        self.cache.function()
    }

    pub fn run(&self, n: usize) -> Result<Approximation> {
        if n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        let f = self.function();
        let (bad_set, basic_paths, covering, piecewise, degenerate) = match self.table.weight() {
            Err(Error::DegenerateFunction) => {
                (None, None, Covering::trivial(f.dim()), trivial_piecewise(&self.cache)?, true)
            }
            Err(e) => return Err(e),
            Ok(w) => {
                let (bs, bp) = run_tree(w, n);
                let cov = build_covering(&bp, &bs);
                let g = build_piecewise_cached(&self.cache, &bp)?;
                (Some(bs), Some(bp), cov, g, false)
            }
        };
        let rings = to_ring_partition(&covering, &piecewise)?;
        let error = approx_error(f, &piecewise, self.q)?;
        let ring_error = approx_error(f, &rings.as_piecewise(), self.q)?;
        Ok(Approximation { n, degenerate, bad_set, basic_paths, covering, piecewise, rings, error, ring_error })
    }
}

/// One row of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub card_covering: usize,
    pub card_basic_paths: usize,
    pub error_q: f64,
    pub error_q_rings: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Failures for individual `N`, which do not abort the sweep.
    pub failures: Vec<(usize, String)>,
    /// Least-squares slope of `log error` against `log N`; `None` when the
    /// errors vanish or fewer than two are positive.
    pub slope: Option<f64>,
    pub predicted_slope: f64,
}

pub const SWEEP_HEADER: &str = "N,card_covering,card_basic_paths,error_q,error_q_rings,seconds";

impl SweepReport {
    /// CSV; `with_time = false` writes 0 in the timing column for reproducible output.
    pub fn to_csv(&self, with_time: bool) -> String {
        use crate::format::sig12;
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.card_covering,
                r.card_basic_paths,
                sig12(r.error_q),
                sig12(r.error_q_rings),
                if with_time { sig12(r.seconds) } else { "0".into() }
            ));
        }
        out
    }
}

/// Slope of the least-squares line through `(log x, log y)`, skipping `y ≤ 1e-9`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 1e-9).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Smoothness `s = d(1/p − 1/q)`.
pub fn smoothness(d: usize, p: f64, q: NormExponent) -> f64 {
    let inv_q = match q {
        NormExponent::Infinity => 0.0,
        NormExponent::Finite(q) => 1.0 / q,
    };
    d as f64 * (1.0 / p - inv_q)
}

/// Runs the pipeline for every `N`, reusing the variation table and fits.
pub fn rate_sweep(f: &GridFunction, k: usize, p: f64, q: NormExponent, ns: &[usize]) -> Result<SweepReport> {
    let ap = Approximator::new(f, k, p, q)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in ns {
        let t0 = Instant::now();
        match ap.run(n) {
            Ok(a) => rows.push(SweepRow {
                n,
                card_covering: a.covering.len(),
                card_basic_paths: a.basic_paths.as_ref().map_or(0, |b| b.len()),
                error_q: a.error,
                error_q_rings: a.ring_error,
                seconds: t0.elapsed().as_secs_f64(),
            }),
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    let slope = log_log_slope(&rows.iter().map(|r| (r.n as f64, r.error_q)).collect::<Vec<_>>());
    let predicted_slope = -smoothness(f.dim(), p, q) / f.dim() as f64;
    Ok(SweepReport { rows, failures, slope, predicted_slope })
}

/// Total raw variation, exposed for reports.
pub fn normalizer(t: &VariationTable) -> f64 {
    t.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_function, FunctionSpec};

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.5))).collect();
        assert!((log_log_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(1.0, 0.0), (2.0, 0.0)]), None);
    }

    #[test]
    fn disk_error_decreases() {
        let f = make_function(&"disk:0.3@0.5,0.5".parse::<FunctionSpec>().unwrap(), 2, 6).unwrap();
        let r = rate_sweep(&f, 1, 1.0, NormExponent::Finite(2.0), &[8, 64]).unwrap();
        assert!(r.failures.is_empty());
        assert!(r.rows[1].error_q <= r.rows[0].error_q);
        for row in &r.rows {
            assert!((row.error_q - row.error_q_rings).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_short_circuits() {
        let f = make_function(&"poly:1 + x_1*x_2".parse::<FunctionSpec>().unwrap(), 2, 5).unwrap();
        let ap = Approximator::new(&f, 3, 1.0, NormExponent::Finite(2.0)).unwrap();
        let a = ap.run(16).unwrap();
        assert!(a.degenerate);
        assert_eq!(a.covering.len(), 1);
        assert!(a.error <= 1e-9);
    }
}
