//! Dyadic cubes of the unit cube and the rooted tree they form.
//!
//! A cube at level `j` with index `α` is the half-open box
//! `∏ [α_i 2^-j, (α_i + 1) 2^-j)`. Everything here is integer arithmetic on
//! `(level, index)` pairs, so nesting and disjointness are decided exactly.
//!
//! Cells at a fixed level are linearised with axis 0 varying fastest:
//! `linear = Σ α_i · 2^(j·i)`. That is the "canonical cell order" used by
//! every table, CSV file and evaluation routine in the crate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported dimension for dyadic cubes.
pub const MAX_DIM: usize = 8;

/// A dyadic subcube `2^-j (Q^d + α)` of `[0,1)^d`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    level: u8,
    dim: u8,
    index: [u32; MAX_DIM],
}

impl DyadicCube {
    /// Builds a cube, checking `α_i < 2^j`.
    pub fn new(level: u32, index: &[u32]) -> Result<Self> {
        let d = index.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::BadDimension(d));
        }
        if level > 31 {
            return Err(Error::BadFormat(format!("level {level} exceeds 31")));
        }
        let side = 1u64 << level;
        if let Some(a) = index.iter().find(|&&a| a as u64 >= side) {
            return Err(Error::BadFormat(format!(
                "index component {a} out of range at level {level}"
            )));
        }
        let mut idx = [0u32; MAX_DIM];
        idx[..d].copy_from_slice(index);
        Ok(Self {
            level: level as u8,
            dim: d as u8,
            index: idx,
        })
    }

    /// The unit cube `Q^d` (root of the tree).
    pub fn root(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Self {
            level: 0,
            dim: dim as u8,
            index: [0; MAX_DIM],
        }
    }

    /// Cube at `level` with the given linear (axis-0-fastest) index.
    pub fn from_linear(dim: usize, level: u32, linear: usize) -> Self {
        let mut idx = [0u32; MAX_DIM];
        let mask = (1usize << level) - 1;
        for (i, slot) in idx.iter_mut().enumerate().take(dim) {
            *slot = ((linear >> (level as usize * i)) & mask) as u32;
        }
        Self {
            level: level as u8,
            dim: dim as u8,
            index: idx,
        }
    }

    pub fn level(&self) -> u32 {
        self.level as u32
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn index(&self) -> &[u32] {
        &self.index[..self.dim as usize]
    }

    /// Linear position among the cubes of the same level.
    pub fn linear(&self) -> usize {
        let j = self.level as usize;
        self.index()
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &a)| acc | ((a as usize) << (j * i)))
    }

    /// Side length `2^-j`.
    pub fn side(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Volume `2^-jd`.
    pub fn volume(&self) -> f64 {
        (-((self.level as usize * self.dim()) as f64)).exp2()
    }

    /// Geometric center of the cube.
    pub fn center(&self) -> Vec<f64> {
        let h = self.side();
        self.index().iter().map(|&a| (a as f64 + 0.5) * h).collect()
    }

    /// The `2^d` sons, ordered by the bitmask `Σ bit_i 2^i` of their offsets.
    pub fn sons(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        (0..1usize << d)
            .map(|bits| {
                let mut idx = self.index;
                for (i, slot) in idx.iter_mut().enumerate().take(d) {
                    *slot = 2 * *slot + ((bits >> i) & 1) as u32;
                }
                DyadicCube {
                    level: self.level + 1,
                    dim: self.dim,
                    index: idx,
                }
            })
            .collect()
    }

    /// The father cube, `None` for the root.
    pub fn father(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        let mut idx = self.index;
        for slot in idx.iter_mut().take(self.dim()) {
            *slot >>= 1;
        }
        Some(DyadicCube {
            level: self.level - 1,
            dim: self.dim,
            index: idx,
        })
    }

    /// Ancestor at a coarser `level` (itself when `level == self.level()`).
    pub fn ancestor(&self, level: u32) -> Option<DyadicCube> {
        if level > self.level() {
            return None;
        }
        let shift = self.level() - level;
        let mut idx = self.index;
        for slot in idx.iter_mut().take(self.dim()) {
            *slot >>= shift;
        }
        Some(DyadicCube {
            level: level as u8,
            dim: self.dim,
            index: idx,
        })
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &DyadicCube) -> bool {
        self.dim == other.dim
            && self.level >= other.level
            && self.ancestor(other.level()).as_ref() == Some(other)
    }

    /// True when the cubes share no cell.
    pub fn is_disjoint(&self, other: &DyadicCube) -> bool {
        !self.is_subset_of(other) && !other.is_subset_of(self)
    }

    /// Linear indices of the level-`j_ref` cells inside the cube, in canonical order.
    pub fn cell_indices(&self, j_ref: u32) -> Result<Vec<usize>> {
        if j_ref < self.level() {
            return Err(Error::ResolutionTooCoarse {
                needed: self.level(),
                got: j_ref,
            });
        }
        let d = self.dim();
        let shift = j_ref - self.level();
        let per_axis = 1usize << shift;
        let total = 1usize << (shift as usize * d);
        let base: Vec<usize> = self.index().iter().map(|&a| (a as usize) << shift).collect();
        let mut out = Vec::with_capacity(total);
        let mut offs = vec![0usize; d];
        for _ in 0..total {
            let lin = (0..d).fold(0usize, |acc, i| {
                acc | ((base[i] + offs[i]) << (j_ref as usize * i))
            });
            out.push(lin);
            for o in offs.iter_mut() {
                *o += 1;
                if *o < per_axis {
                    break;
                }
                *o = 0;
            }
        }
        Ok(out)
    }

    /// Canonical text form `j:α_1,…,α_d`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, a) in self.index().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cube({self})")
    }
}

impl FromStr for DyadicCube {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lvl, idx) = s
            .split_once(':')
            .ok_or_else(|| Error::BadFormat(format!("cube id '{s}' lacks ':'")))?;
        let level: u32 = lvl
            .trim()
            .parse()
            .map_err(|_| Error::BadFormat(format!("bad level in '{s}'")))?;
        let index = idx
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::BadFormat(format!("bad index in '{s}'")))?;
        DyadicCube::new(level, &index)
    }
}

impl serde::Serialize for DyadicCube {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for DyadicCube {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A chain `Q_1 → Q_2 → … → Q_n` of son/father links, tail first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AscendingPath {
    cubes: Vec<DyadicCube>,
}

impl AscendingPath {
    /// Validates the father links.
    pub fn new(cubes: Vec<DyadicCube>) -> Result<Self> {
        if cubes.is_empty() {
            return Err(Error::BadFormat("empty path".into()));
        }
        for w in cubes.windows(2) {
            if w[0].father() != Some(w[1]) {
                return Err(Error::BadFormat(format!(
                    "{} is not a son of {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { cubes })
    }

    pub fn singleton(q: DyadicCube) -> Self {
        Self { cubes: vec![q] }
    }

    /// `T_P`.
    pub fn tail(&self) -> DyadicCube {
        self.cubes[0]
    }

    /// `H_P`.
    pub fn head(&self) -> DyadicCube {
        *self.cubes.last().expect("nonempty path")
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.cubes.len() == 1
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.cubes.contains(q)
    }

    /// The region `H_P \ T_P` (empty for a singleton).
    pub fn ring(&self) -> DyadicSet {
        DyadicSet::ring(self.head(), Some(self.tail()))
    }
}

/// The unique father-chain from `small` up to `big`.
pub fn path_between(small: &DyadicCube, big: &DyadicCube) -> Result<AscendingPath> {
    if !small.is_subset_of(big) {
        return Err(Error::NotNested {
            small: small.to_string(),
            big: big.to_string(),
        });
    }
    let cubes = (big.level()..=small.level())
        .rev()
        .map(|l| small.ancestor(l).expect("level within range"))
        .collect();
    Ok(AscendingPath { cubes })
}

/// The finitely generated dyadic sets the algorithm evaluates norms and
/// weights on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DyadicSet {
    Cube(DyadicCube),
    /// `outer \ inner`; `inner` must be a subcube of `outer` (possibly equal,
    /// giving the empty set).
    Ring {
        outer: DyadicCube,
        inner: DyadicCube,
    },
    /// Pairwise disjoint cubes.
    Union(Vec<DyadicCube>),
}

impl DyadicSet {
    /// A ring `outer \ inner`, or the plain cube when `inner` is `None`.
    pub fn ring(outer: DyadicCube, inner: Option<DyadicCube>) -> Self {
        match inner {
            None => DyadicSet::Cube(outer),
            Some(inner) => {
                debug_assert!(inner.is_subset_of(&outer));
                DyadicSet::Ring { outer, inner }
            }
        }
    }

    /// Disjoint union, rejecting overlapping members.
    pub fn union(cubes: Vec<DyadicCube>) -> Result<Self> {
        for (i, a) in cubes.iter().enumerate() {
            for b in &cubes[i + 1..] {
                if !a.is_disjoint(b) {
                    return Err(Error::BadFormat(format!("{a} and {b} overlap")));
                }
            }
        }
        Ok(DyadicSet::Union(cubes))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            DyadicSet::Cube(c) => Some(c.dim()),
            DyadicSet::Ring { outer, .. } => Some(outer.dim()),
            DyadicSet::Union(v) => v.first().map(|c| c.dim()),
        }
    }

    /// Finest level among the constituent cubes.
    pub fn finest_level(&self) -> u32 {
        match self {
            DyadicSet::Cube(c) => c.level(),
            DyadicSet::Ring { inner, .. } => inner.level(),
            DyadicSet::Union(v) => v.iter().map(|c| c.level()).max().unwrap_or(0),
        }
    }

    /// The smallest cube containing the set, when it is a cube or ring.
    pub fn outer_cube(&self) -> Option<DyadicCube> {
        match self {
            DyadicSet::Cube(c) => Some(*c),
            DyadicSet::Ring { outer, .. } => Some(*outer),
            DyadicSet::Union(v) if v.len() == 1 => Some(v[0]),
            DyadicSet::Union(_) => None,
        }
    }

    /// Sorted linear indices of the level-`j_ref` cells in the set.
    pub fn cell_indices(&self, j_ref: u32) -> Result<Vec<usize>> {
        if j_ref < self.finest_level() {
            return Err(Error::ResolutionTooCoarse {
                needed: self.finest_level(),
                got: j_ref,
            });
        }
        let mut cells = match self {
            DyadicSet::Cube(c) => c.cell_indices(j_ref)?,
            DyadicSet::Ring { outer, inner } => {
                let mut hole = inner.cell_indices(j_ref)?;
                hole.sort_unstable();
                outer
                    .cell_indices(j_ref)?
                    .into_iter()
                    .filter(|c| hole.binary_search(c).is_err())
                    .collect()
            }
            DyadicSet::Union(v) => {
                let mut all = Vec::new();
                for c in v {
                    all.extend(c.cell_indices(j_ref)?);
                }
                all
            }
        };
        cells.sort_unstable();
        Ok(cells)
    }

    /// Exact membership test for a level-`j_ref` cell.
    pub fn contains_cell(&self, cell: &DyadicCube) -> bool {
        match self {
            DyadicSet::Cube(c) => cell.is_subset_of(c),
            DyadicSet::Ring { outer, inner } => {
                cell.is_subset_of(outer) && !cell.is_subset_of(inner)
            }
            DyadicSet::Union(v) => v.iter().any(|c| cell.is_subset_of(c)),
        }
    }

    /// Volume, exact as a count of level-`j_ref` cells.
    pub fn cell_count(&self, j_ref: u32) -> Result<u64> {
        if j_ref < self.finest_level() {
            return Err(Error::ResolutionTooCoarse {
                needed: self.finest_level(),
                got: j_ref,
            });
        }
        let count = |c: &DyadicCube| 1u64 << ((j_ref - c.level()) as usize * c.dim());
        Ok(match self {
            DyadicSet::Cube(c) => count(c),
            DyadicSet::Ring { outer, inner } => count(outer) - count(inner),
            DyadicSet::Union(v) => v.iter().map(count).sum(),
        })
    }

    pub fn is_empty(&self) -> bool {
        match self {
            DyadicSet::Cube(_) => false,
            DyadicSet::Ring { outer, inner } => outer == inner,
            DyadicSet::Union(v) => v.is_empty(),
        }
    }

    /// Text form: `j:α` for a cube, `outer\inner` for a ring, `a|b|…` for a union.
    pub fn id(&self) -> String {
        match self {
            DyadicSet::Cube(c) => c.to_string(),
            DyadicSet::Ring { outer, inner } => format!("{outer}\\{inner}"),
            DyadicSet::Union(v) => v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|"),
        }
    }
}

impl serde::Serialize for DyadicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

/// Level-`j_ref` cells of `set`, as cubes in canonical order.
pub fn cells_of(set: &DyadicSet, j_ref: u32) -> Result<Vec<DyadicCube>> {
    let d = set.dim().unwrap_or(1);
    Ok(set
        .cell_indices(j_ref)?
        .into_iter()
        .map(|lin| DyadicCube::from_linear(d, j_ref, lin))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(level: u32, idx: &[u32]) -> DyadicCube {
        DyadicCube::new(level, idx).unwrap()
    }

    #[test]
    fn sons_of_unit_interval() {
        let s = DyadicCube::root(1).sons();
        assert_eq!(s, vec![cube(1, &[0]), cube(1, &[1])]);
    }

    #[test]
    fn sons_partition_father_in_2d() {
        let q = cube(2, &[1, 3]);
        let sons = q.sons();
        assert_eq!(sons.len(), 4);
        let vol: f64 = sons.iter().map(|s| s.volume()).sum();
        assert_eq!(vol, q.volume());
        let mut cells: Vec<usize> = sons
            .iter()
            .flat_map(|s| s.cell_indices(5).unwrap())
            .collect();
        cells.sort_unstable();
        assert_eq!(cells, q.cell_indices(5).unwrap());
    }

    #[test]
    fn sons_in_3d_double_and_add_bits() {
        let q = cube(1, &[0, 1, 0]);
        let sons = q.sons();
        assert_eq!(sons.len(), 8);
        for (bits, s) in sons.iter().enumerate() {
            assert_eq!(s.level(), 2);
            for i in 0..3 {
                assert_eq!(s.index()[i], 2 * q.index()[i] + ((bits >> i) & 1) as u32);
            }
        }
    }

    #[test]
    fn path_between_examples() {
        let q = cube(1, &[1, 0]);
        assert_eq!(path_between(&q, &q).unwrap().len(), 1);
        let p = path_between(&cube(3, &[5, 2]), &DyadicCube::root(2)).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.cubes()[1], cube(2, &[2, 1]));
        assert_eq!(p.cubes()[2], cube(1, &[1, 0]));
        assert!(matches!(
            path_between(&cube(2, &[3, 3]), &cube(1, &[0, 0])),
            Err(Error::NotNested { .. })
        ));
    }

    #[test]
    fn cells_of_examples() {
        let root = DyadicCube::root(2);
        assert_eq!(cells_of(&DyadicSet::Cube(root), 1).unwrap().len(), 4);
        let ring = DyadicSet::ring(root, Some(root.sons()[0]));
        assert_eq!(cells_of(&ring, 1).unwrap().len(), 3);
        let ring = DyadicSet::ring(root, Some(cube(2, &[0, 0])));
        assert_eq!(cells_of(&ring, 3).unwrap().len(), 60);
        assert_eq!(ring.cell_count(3).unwrap(), 60);
        assert!(matches!(
            ring.cell_indices(1),
            Err(Error::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn id_round_trip() {
        let q = cube(3, &[5, 2, 7]);
        assert_eq!(q.to_string(), "3:5,2,7");
        assert_eq!("3:5,2,7".parse::<DyadicCube>().unwrap(), q);
        assert_eq!(DyadicCube::from_linear(3, 3, q.linear()), q);
    }

    #[test]
    fn nested_or_disjoint() {
        let a = cube(2, &[1, 1]);
        let b = cube(1, &[0, 0]);
        let c = cube(1, &[1, 0]);
        assert!(a.is_subset_of(&b));
        assert!(!a.is_disjoint(&b));
        assert!(a.is_disjoint(&c));
    }

    #[test]
    fn union_rejects_overlap() {
        let root = DyadicCube::root(1);
        assert!(DyadicSet::union(vec![root, root.sons()[0]]).is_err());
        assert!(DyadicSet::union(root.sons()).is_ok());
    }
}
