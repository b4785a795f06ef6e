//! Run configuration: a TOML file overlaid by command-line values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dyadic::MAX_DIM;
use crate::error::{Error, Result};
use crate::grid::{FunctionSpec, NormExponent};
use crate::pipeline::smoothness;

/// Largest `d·J` accepted, i.e. at most `2^24` grid cells.
pub const MAX_CELL_BITS: u32 = 24;

/// `q` as written in a file: a number or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Number(f64),
    Text(String),
}

impl QValue {
    fn resolve(&self) -> Result<NormExponent> {
        match self {
            QValue::Number(q) => NormExponent::new(*q),
            QValue::Text(s) => s.parse(),
        }
    }
}

/// Every field optional; a file and the command line each give one of these.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub function: Option<String>,
    pub d: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<u32>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<QValue>,
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub dump_tree: Option<bool>,
    pub rings: Option<bool>,
    pub verify: Option<bool>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            function: over.function.or(self.function),
            d: over.d.or(self.d),
            j: over.j.or(self.j),
            k: over.k.or(self.k),
            p: over.p.or(self.p),
            q: over.q.or(self.q),
            n: over.n.or(self.n),
            out: over.out.or(self.out),
            dump_tree: over.dump_tree.or(self.dump_tree),
            rings: over.rings.or(self.rings),
            verify: over.verify.or(self.verify),
        }
    }
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub function: String,
    #[serde(skip)]
    pub spec: FunctionSpec,
    pub d: usize,
    #[serde(rename = "J")]
    pub j: u32,
    pub k: usize,
    pub p: f64,
    pub q: NormExponent,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub out: PathBuf,
    pub dump_tree: bool,
    pub rings: bool,
    pub verify: bool,
}

impl RunConfig {
    /// Fills defaults (`d=2, J=6, k=1, p=1, q=2, N=[16]`, output `out`) and validates.
    pub fn from_partial(c: PartialConfig) -> Result<Self> {
        let function = c.function.ok_or_else(|| Error::Config("no function given".into()))?;
        let spec: FunctionSpec = function.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        let q = match &c.q {
            Some(q) => q.resolve().map_err(|e| Error::Config(e.to_string()))?,
            None => NormExponent::Finite(2.0),
        };
        let cfg = RunConfig {
            function,
            spec,
            d: c.d.unwrap_or(2),
            j: c.j.unwrap_or(6),
            k: c.k.unwrap_or(1),
            p: c.p.unwrap_or(1.0),
            q,
            n: c.n.unwrap_or_else(|| vec![16]),
            out: c.out.unwrap_or_else(|| PathBuf::from("out")),
            dump_tree: c.dump_tree.unwrap_or(false),
            rings: c.rings.unwrap_or(false),
            verify: c.verify.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn smoothness(&self) -> f64 {
        smoothness(self.d, self.p, self.q)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 || self.d > MAX_DIM {
            return bad(format!("d = {} outside 1..={MAX_DIM}", self.d));
        }
        if self.d as u32 * self.j > MAX_CELL_BITS {
            return bad(format!("d·J = {} exceeds {MAX_CELL_BITS}", self.d as u32 * self.j));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be finite and at least 1", self.p));
        }
        if self.p >= self.q.value() {
            return bad(format!("need p < q, got p = {}, q = {}", self.p, self.q));
        }
        let s = self.smoothness();
        if !(s > 0.0 && s <= self.k as f64) {
            return bad(format!(
                "smoothness s = d(1/p - 1/q) = {} is outside (0, k] with k = {}",
                crate::format::sig12(s),
                self.k
            ));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("N values must be positive".into());
        }
        Ok(())
    }

    /// The `N` list sorted and deduplicated, as a sweep expects.
    pub fn sweep_ns(&self) -> Result<Vec<usize>> {
        let mut ns = self.n.clone();
        ns.sort_unstable();
        ns.dedup();
        if ns.len() < 4 {
            return Err(Error::Config(format!("a sweep needs at least 4 distinct N, got {}", ns.len())));
        }
        Ok(ns)
    }
}

/// `8,16,32` or `8..1024` (powers of two between the bounds).
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("bad N list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a == 0 || a > b {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut n = a;
        while n <= b {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}
