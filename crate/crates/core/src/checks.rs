//! Invariant suite over one pipeline run.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::pipeline::Approximation;
use crate::tree::{is_heavy, path_weight};
use crate::variation::Weight;

/// Tolerance for the ring form against the covering form, relative to `max(1, max|f|)`.
pub const RING_FORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// `3N + 1`.
pub fn basic_path_bound(n: usize) -> usize {
    3 * n + 1
}

/// `2^d N`.
pub fn boundary_bound(d: usize, n: usize) -> usize {
    (1 << d) * n
}

/// `1 + 2(3N+1) + 2^d(3N+1)`.
pub fn covering_bound(d: usize, n: usize) -> usize {
    1 + 2 * basic_path_bound(n) + (1 << d) * basic_path_bound(n)
}

/// Runs every check that applies; degenerate runs skip the tree checks.
pub fn check_approximation<W: Weight + ?Sized>(w: &W, a: &Approximation, f_values: &[f64]) -> Vec<Check> {
    let d = a.covering.dim;
    let n = a.n;
    let mut out = Vec::new();
    if let (Some(bs), Some(bp)) = (&a.bad_set, &a.basic_paths) {
        let root = bs.root();
        let mut seen = BTreeSet::new();
        let mut dup = 0;
        for p in &bp.paths {
            for q in p.cubes() {
                if !seen.insert(*q) {
                    dup += 1;
                }
            }
        }
        let expected: BTreeSet<_> = bs.cubes.iter().filter(|q| **q != root).copied().collect();
        out.push(check(
            "basic_paths_partition",
            dup == 0 && seen == expected,
            format!("{} cubes in paths, {} repeated, {} in G_N minus root", seen.len(), dup, expected.len()),
        ));
        let heavy = bp.paths.iter().filter(|p| is_heavy(path_weight(w, p), n)).count();
        out.push(check("basic_path_weights", heavy == 0, format!("{heavy} paths with W(H\\T) >= 1/N")));
        out.push(check(
            "basic_path_count",
            bp.len() <= basic_path_bound(n),
            format!("{} <= {}", bp.len(), basic_path_bound(n)),
        ));
        out.push(check(
            "boundary_count",
            bs.boundary.len() <= boundary_bound(d, n),
            format!("{} <= {}", bs.boundary.len(), boundary_bound(d, n)),
        ));
    }
    out.push(check(
        "covering_count",
        a.covering.len() <= covering_bound(d, n),
        format!("{} <= {}", a.covering.len(), covering_bound(d, n)),
    ));
    out.push(check("covering_covers", a.covering.covers(a.piecewise.level), String::new()));
    out.push(check("rings_partition", a.rings.is_partition(), format!("{} rings", a.rings.len())));
    let scale = f_values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let gap = a
        .piecewise
        .eval_grid()
        .iter()
        .zip(a.rings.eval_grid())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    out.push(check(
        "ring_form_matches",
        gap <= RING_FORM_TOL * scale,
        format!("max cell gap {}", crate::format::sig12(gap)),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_function, FunctionSpec, NormExponent};
    use crate::pipeline::Approximator;

    #[test]
    fn disk_run_passes() {
        let f = make_function(&"disk:0.3".parse::<FunctionSpec>().unwrap(), 2, 5).unwrap();
        let ap = Approximator::new(&f, 1, 1.0, NormExponent::Finite(2.0)).unwrap();
        let a = ap.run(16).unwrap();
        let checks = check_approximation(ap.table.weight().unwrap(), &a, f.values());
        assert_eq!(checks.len(), 8);
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(covering_bound(2, 1), 1 + 8 + 16);
        assert_eq!(boundary_bound(3, 5), 40);
    }
}
