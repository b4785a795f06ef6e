//! The bad-cube tree `G_N`, its boundary, and the partition of `G_N \ {Q^d}`
//! into basic paths.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::dyadic::{AscendingPath, DyadicCube};
use crate::variation::Weight;

/// Threshold test shared by every step: `W ≥ 1/N`.
pub fn is_heavy(w: f64, n: usize) -> bool {
    w >= 1.0 / n as f64
}

/// `G_N = {Q : W(Q) ≥ 1/N}` with its minimal cubes and boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadSet {
    pub n: usize,
    pub dim: usize,
    /// All bad cubes, coarse to fine.
    pub cubes: BTreeSet<DyadicCube>,
    /// Minimal bad cubes in their fixed numeration: finest first, then by index.
    pub minimal: Vec<DyadicCube>,
    /// Non-bad sons of bad cubes.
    pub boundary: Vec<DyadicCube>,
}

impl BadSet {
    pub fn root(&self) -> DyadicCube {
        DyadicCube::root(self.dim)
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.cubes.contains(q)
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

fn numeration_key(q: &DyadicCube) -> (std::cmp::Reverse<u32>, Vec<u32>) {
    (std::cmp::Reverse(q.level()), q.index().to_vec())
}

/// Pruned depth-first search from the root: sons of a non-bad cube are
/// never visited, since the weight is monotone.
pub fn build_bad_set<W: Weight + ?Sized>(w: &W, n: usize) -> BadSet {
    assert!(n >= 1, "N must be positive");
    let root = DyadicCube::root(w.dim());
    let mut cubes = BTreeSet::new();
    let mut minimal = Vec::new();
    let mut boundary = Vec::new();
    let mut stack = vec![root];
    cubes.insert(root);
    while let Some(q) = stack.pop() {
        let mut has_bad_son = false;
        for son in q.sons() {
            if son.level() <= w.max_level() && is_heavy(w.cube(&son), n) {
                has_bad_son = true;
                cubes.insert(son);
                stack.push(son);
            } else {
                boundary.push(son);
            }
        }
        if !has_bad_son {
            minimal.push(q);
        }
    }
    minimal.sort_by_key(numeration_key);
    boundary.sort();
    BadSet { n, dim: w.dim(), cubes, minimal, boundary }
}

/// The refined path set `P_N` and the contact cubes `C_N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathPartition {
    #[serde(serialize_with = "ser_paths")]
    pub paths: Vec<AscendingPath>,
    pub contacts: Vec<DyadicCube>,
}

/// Splits `G_N \ {Q^d}` into the paths `P_i = L_i \ (L_0 ∪ … ∪ L_{i-1})`, then
/// cuts each of them at the contact cubes it contains.
pub fn partition_paths(bs: &BadSet) -> PathPartition {
    let root = bs.root();
    let mut claimed: HashSet<DyadicCube> = HashSet::from([root]);
    let mut raw = Vec::with_capacity(bs.minimal.len());
    let mut contacts = BTreeSet::from([root]);
    for &q in &bs.minimal {
        let mut cubes = Vec::new();
        let mut cur = q;
        while !claimed.contains(&cur) {
            cubes.push(cur);
            claimed.insert(cur);
            cur = cur.father().expect("root is claimed");
        }
        contacts.insert(cur);
        raw.push(cubes);
    }
    let mut paths = Vec::new();
    for cubes in raw {
        let mut start = 0;
        for i in 1..cubes.len() {
            if contacts.contains(&cubes[i]) {
                paths.push(AscendingPath::new(cubes[start..i].to_vec()).expect("father chain"));
                start = i;
            }
        }
        if start < cubes.len() {
            paths.push(AscendingPath::new(cubes[start..].to_vec()).expect("father chain"));
        }
    }
    let mut contacts: Vec<_> = contacts.into_iter().collect();
    contacts.sort_by_key(numeration_key);
    PathPartition { paths, contacts }
}

/// The basic paths `B_N`, each with `W(H_B \ T_B) < 1/N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasicPathSet {
    #[serde(serialize_with = "ser_paths")]
    pub paths: Vec<AscendingPath>,
    pub contacts: Vec<DyadicCube>,
}

impl BasicPathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Greedy split of every path of `P_N`: from the current tail `c_i`, the next
/// break is the first cube `c_m` with `W(c_m \ c_i) ≥ 1/N`.
pub fn basic_paths<W: Weight + ?Sized>(pp: &PathPartition, w: &W, n: usize) -> BasicPathSet {
    let mut out = Vec::new();
    for p in &pp.paths {
        let c = p.cubes();
        let mut i = 0;
        while i < c.len() {
            let next = (i + 1..c.len()).find(|&m| is_heavy(w.ring(&c[m], Some(&c[i])), n));
            let end = next.unwrap_or(c.len());
            out.push(AscendingPath::new(c[i..end].to_vec()).expect("father chain"));
            i = end;
        }
    }
    BasicPathSet { paths: out, contacts: pp.contacts.clone() }
}

/// `W(H_B \ T_B)` for a path.
pub fn path_weight<W: Weight + ?Sized>(w: &W, p: &AscendingPath) -> f64 {
    if p.is_singleton() {
        0.0
    } else {
        w.ring(&p.head(), Some(&p.tail()))
    }
}

/// Full tree step: `G_N`, `P_N` and `B_N`.
pub fn run_tree<W: Weight + ?Sized>(w: &W, n: usize) -> (BadSet, BasicPathSet) {
    let bs = build_bad_set(w, n);
    let pp = partition_paths(&bs);
    let bp = basic_paths(&pp, w, n);
    (bs, bp)
}

/// JSON dump of one tree run.
#[derive(Serialize)]
pub struct TreeDump<'a> {
    pub n: usize,
    pub bad: &'a BTreeSet<DyadicCube>,
    pub minimal: &'a [DyadicCube],
    pub boundary: &'a [DyadicCube],
    pub contacts: &'a [DyadicCube],
    #[serde(serialize_with = "ser_paths")]
    pub basic_paths: &'a [AscendingPath],
}

impl<'a> TreeDump<'a> {
    pub fn new(bs: &'a BadSet, bp: &'a BasicPathSet) -> Self {
        Self {
            n: bs.n,
            bad: &bs.cubes,
            minimal: &bs.minimal,
            boundary: &bs.boundary,
            contacts: &bp.contacts,
            basic_paths: &bp.paths,
        }
    }
}

fn ser_paths<S: serde::Serializer>(paths: &[AscendingPath], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(paths.len()))?;
    for p in paths {
        seq.serialize_element(p.cubes())?;
    }
    seq.end()
}
