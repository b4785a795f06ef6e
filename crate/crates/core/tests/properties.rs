//! Randomized invariants across modules.

use std::collections::BTreeSet;

use proptest::prelude::*;

use nterm::approximant::build_covering;
use nterm::dyadic::{DyadicCube, DyadicSet};
use nterm::grid::{lq_norm, GridFunction, NormExponent};
use nterm::pipeline::Approximator;
use nterm::ring_cover::{cover_ring, verify_cover};
use nterm::tree::{is_heavy, path_weight, run_tree};
use nterm::variation::{VariationTable, Weight};

/// Sparse nonnegative leaf masses for a d=2, J=4 synthetic weight; the
/// coarser levels stay zero so the DP is driven by the leaves.
fn leaf_powers() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![3 => Just(0.0), 1 => 0.0f64..1.0], 256)
        .prop_filter("some mass", |v| v.iter().any(|&x| x > 0.0))
}

fn table(leaves: Vec<f64>) -> VariationTable {
    let mut powers: Vec<Vec<f64>> = (0..4).map(|j| vec![0.0; 1 << (2 * j)]).collect();
    powers.push(leaves);
    VariationTable::from_powers(2, powers)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_invariants(leaves in leaf_powers(), n in 1usize..48) {
        let w = table(leaves);
        let (bs, bp) = run_tree(&w, n);
        let root = DyadicCube::root(2);
        let mut seen = BTreeSet::new();
        for p in &bp.paths {
            for q in p.cubes() {
                prop_assert!(seen.insert(*q), "{q} in two paths");
            }
            prop_assert!(!is_heavy(path_weight(&w, p), n));
        }
        let expected: BTreeSet<_> = bs.cubes.iter().filter(|q| **q != root).copied().collect();
        prop_assert_eq!(seen, expected);
        prop_assert!(bp.len() <= 3 * n + 1);
        prop_assert!(bs.minimal.len() <= n);
        // fathers of boundary cubes on one level are disjoint bad cubes
        for level in 1..=4 {
            let count = bs.boundary.iter().filter(|q| q.level() == level).count();
            prop_assert!(count <= 4 * n);
        }
        for q in &bs.cubes {
            if let Some(f) = q.father() {
                prop_assert!(bs.contains(&f));
            }
        }
        prop_assert!(build_covering(&bp, &bs).covers(4));
    }

    #[test]
    fn weight_is_superadditive_and_monotone(leaves in leaf_powers(), a in 0usize..16, b in 0usize..16) {
        prop_assume!(a != b);
        let w = table(leaves);
        let (qa, qb) = (DyadicCube::from_linear(2, 2, a), DyadicCube::from_linear(2, 2, b));
        let union = DyadicSet::union(vec![qa, qb]).unwrap();
        let tol = 1e-12;
        prop_assert!(w.cube(&qa) + w.cube(&qb) <= w.set(&union) + tol);
        prop_assert!(w.cube(&qa) <= w.cube(&qa.father().unwrap()) + tol);
        prop_assert!(w.set(&union) <= 1.0 + tol);
    }

    #[test]
    fn ring_form_reproduces_g(values in prop::collection::vec(-1.0f64..1.0, 256), n in 1usize..32, k in 1usize..3) {
        let f = GridFunction::from_values(2, 4, values, "random").unwrap();
        let ap = Approximator::new(&f, k, 1.0, NormExponent::Finite(2.0)).unwrap();
        let a = ap.run(n).unwrap();
        prop_assert!(a.rings.is_partition());
        let gap = a.piecewise.eval_grid().iter().zip(a.rings.eval_grid()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(gap <= 1e-10, "gap {}", gap);
        prop_assert!((a.error - a.ring_error).abs() <= 1e-10);
    }

    #[test]
    fn norms_grow_with_set_and_exponent(values in prop::collection::vec(-2.0f64..2.0, 64), cell in 0usize..16) {
        let f = GridFunction::from_values(2, 3, values, "random").unwrap();
        let small = DyadicSet::Cube(DyadicCube::from_linear(2, 2, cell));
        let big = DyadicSet::Cube(DyadicCube::from_linear(2, 2, cell).father().unwrap());
        let root = DyadicSet::Cube(DyadicCube::root(2));
        for q in [1.0, 2.0, 3.5] {
            let q = NormExponent::Finite(q);
            prop_assert!(lq_norm(&f, &small, q).unwrap() <= lq_norm(&f, &big, q).unwrap() + 1e-12);
        }
        let mut last = 0.0;
        for q in [NormExponent::Finite(1.0), NormExponent::Finite(2.0), NormExponent::Finite(4.0), NormExponent::Infinity] {
            let v = lq_norm(&f, &root, q).unwrap();
            prop_assert!(v + 1e-12 >= last);
            last = v;
        }
    }

    #[test]
    fn ring_covers_verify(d in 2usize..=4, l0 in 0u32..=2, depth in 1u32..=3, seed in any::<u64>()) {
        let mut s = seed;
        let mut next = |m: u32| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % m as u64) as u32
        };
        let outer: Vec<u32> = (0..d).map(|_| next(1 << l0)).collect();
        let inner: Vec<u32> = outer.iter().map(|&a| (a << depth) + next(1 << depth)).collect();
        let qstar = DyadicCube::new(l0, &outer).unwrap();
        let q = DyadicCube::new(l0 + depth, &inner).unwrap();
        let cc = cover_ring(&q, &qstar).unwrap();
        let full = 4 * ((1 << d) - 1);
        if cc.interior {
            prop_assert_eq!(cc.len(), full);
        } else {
            prop_assert!((full / 2..full).contains(&cc.len()), "{} cubes", cc.len());
        }
        let rep = verify_cover(&cc, &q, &qstar);
        prop_assert!(rep.is_ok(), "{:?}", rep);
    }
}
