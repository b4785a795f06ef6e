//! Functions sampled as cell values on a uniform dyadic grid.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::dyadic::{DyadicCube, DyadicSet, MAX_DIM};
use crate::error::{Error, Result};

/// The exponent `q ∈ [1, ∞]` of an `L_q` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_infinite() && q > 0.0 {
            Ok(NormExponent::Infinity)
        } else if q.is_finite() && q >= 1.0 {
            Ok(NormExponent::Finite(q))
        } else {
            Err(Error::Config(format!("norm exponent {q} must be >= 1")))
        }
    }

    /// `q` as a float, `f64::INFINITY` for the sup norm.
    pub fn value(&self) -> f64 {
        match self {
            NormExponent::Finite(q) => *q,
            NormExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, NormExponent::Infinity)
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExponent::Finite(q) => write!(f, "{q}"),
            NormExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for NormExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(NormExponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad norm exponent '{s}'")))
                .and_then(NormExponent::new),
        }
    }
}

impl Serialize for NormExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormExponent::Finite(q) => s.serialize_f64(*q),
            NormExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

/// `(Σ |v|^q · vol)^{1/q}`, or `max |v|` for `q = ∞`. Empty input gives 0.
pub fn weighted_norm<I: IntoIterator<Item = f64>>(values: I, cell_volume: f64, q: NormExponent) -> f64 {
    match q {
        NormExponent::Infinity => values.into_iter().fold(0.0, |m, v| m.max(v.abs())),
        NormExponent::Finite(2.0) => {
            (values.into_iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
        }
        NormExponent::Finite(1.0) => {
            values.into_iter().map(f64::abs).sum::<f64>() * cell_volume
        }
        NormExponent::Finite(q) => {
            (values.into_iter().map(|v| v.abs().powf(q)).sum::<f64>() * cell_volume).powf(1.0 / q)
        }
    }
}

/// Built-in generators and file sources for [`GridFunction`]s.
///
/// Text syntax (see [`FunctionSpec::from_str`]):
///
/// * `const:0.7` or `c=0.7`
/// * `poly:1 + 2x_1 - 0.5x_1^2*x_2`
/// * `disk:R[@c_1,…,c_d]`: indicator of `|x − c| ≤ R`, center defaults to `0.5·e`
/// * `sine:ω`: `∏ sin(2π ω x_i)`
/// * `cusp:β[@c_1,…,c_d]`: `|x − c|^β`
/// * `step:w_1,…,w_d;b`: indicator of `w·x ≥ b`
/// * `csv:PATH`, `pgm:PATH`
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Constant(f64),
    /// Terms `(coefficient, exponents)`; missing exponents are zero.
    Polynomial(Vec<(f64, Vec<u32>)>),
    Disk { radius: f64, center: Option<Vec<f64>> },
    Sine { freq: f64 },
    Cusp { beta: f64, center: Option<Vec<f64>> },
    Step { normal: Vec<f64>, offset: f64 },
    Csv(PathBuf),
    Pgm(PathBuf),
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadFormat(format!("bad number '{t}'")))
        })
        .collect()
}

fn parse_with_center(s: &str) -> Result<(f64, Option<Vec<f64>>)> {
    let (head, center) = match s.split_once('@') {
        Some((h, c)) => (h, Some(parse_floats(c)?)),
        None => (s, None),
    };
    let v = head
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::BadFormat(format!("bad number '{head}'")))?;
    Ok((v, center))
}

/// Parses `1 + 2x_1 - 0.5x_1^2*x_2` into monomial terms.
fn parse_polynomial(s: &str) -> Result<Vec<(f64, Vec<u32>)>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::BadFormat("empty polynomial".into()));
    }
    let mut terms = Vec::new();
    let mut chunks = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for i in 1..bytes.len() {
        let prev = bytes[i - 1];
        if (bytes[i] == b'+' || bytes[i] == b'-') && prev != b'e' && prev != b'E' && prev != b'^' {
            chunks.push(&compact[start..i]);
            start = i;
        }
    }
    chunks.push(&compact[start..]);
    for chunk in chunks {
        let (sign, body) = match chunk.as_bytes()[0] {
            b'+' => (1.0, &chunk[1..]),
            b'-' => (-1.0, &chunk[1..]),
            _ => (1.0, chunk),
        };
        let bad = || Error::BadFormat(format!("bad polynomial term '{chunk}'"));
        let split = body.find('x').unwrap_or(body.len());
        let coeff_str = body[..split].trim_end_matches('*');
        let coeff = if coeff_str.is_empty() {
            1.0
        } else {
            coeff_str.parse::<f64>().map_err(|_| bad())?
        };
        let mut exps: Vec<u32> = Vec::new();
        let rest = &body[split..];
        if !rest.is_empty() {
            for factor in rest.split('*') {
                let f = factor.strip_prefix("x_").or_else(|| factor.strip_prefix('x')).ok_or_else(bad)?;
                let (var, pow) = match f.split_once('^') {
                    Some((v, p)) => (v, p.parse::<u32>().map_err(|_| bad())?),
                    None => (f, 1),
                };
                let var: usize = var.parse().map_err(|_| bad())?;
                if var == 0 || var > MAX_DIM {
                    return Err(bad());
                }
                if exps.len() < var {
                    exps.resize(var, 0);
                }
                exps[var - 1] += pow;
            }
        }
        terms.push((sign * coeff, exps));
    }
    Ok(terms)
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("c=") {
            return v
                .trim()
                .parse()
                .map(FunctionSpec::Constant)
                .map_err(|_| Error::BadFormat(format!("bad constant '{v}'")));
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::BadFormat(format!("function spec '{s}' lacks 'kind:'")))?;
        let arg = arg.trim();
        match kind.trim() {
            "const" => arg
                .parse()
                .map(FunctionSpec::Constant)
                .map_err(|_| Error::BadFormat(format!("bad constant '{arg}'"))),
            "poly" => parse_polynomial(arg).map(FunctionSpec::Polynomial),
            "disk" => {
                let (radius, center) = parse_with_center(arg)?;
                Ok(FunctionSpec::Disk { radius, center })
            }
            "sine" => arg
                .parse()
                .map(|freq| FunctionSpec::Sine { freq })
                .map_err(|_| Error::BadFormat(format!("bad frequency '{arg}'"))),
            "cusp" => {
                let (beta, center) = parse_with_center(arg)?;
                Ok(FunctionSpec::Cusp { beta, center })
            }
            "step" => {
                let (w, b) = arg
                    .split_once(';')
                    .ok_or_else(|| Error::BadFormat(format!("step spec '{arg}' lacks ';'")))?;
                Ok(FunctionSpec::Step {
                    normal: parse_floats(w)?,
                    offset: b
                        .trim()
                        .parse()
                        .map_err(|_| Error::BadFormat(format!("bad offset '{b}'")))?,
                })
            }
            "csv" => Ok(FunctionSpec::Csv(PathBuf::from(arg))),
            "pgm" => Ok(FunctionSpec::Pgm(PathBuf::from(arg))),
            other => Err(Error::BadFormat(format!("unknown function kind '{other}'"))),
        }
    }
}

impl FunctionSpec {
    /// Pointwise value of a generator; `None` for file sources.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let center_dist = |center: &Option<Vec<f64>>| -> f64 {
            x.iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let c = center.as_ref().map_or(0.5, |c| c.get(i).copied().unwrap_or(c[0]));
                    (xi - c) * (xi - c)
                })
                .sum::<f64>()
                .sqrt()
        };
        Some(match self {
            FunctionSpec::Constant(c) => *c,
            FunctionSpec::Polynomial(terms) => terms
                .iter()
                .map(|(c, e)| {
                    c * e
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| x.get(i).copied().unwrap_or(0.0).powi(p as i32))
                        .product::<f64>()
                })
                .sum(),
            FunctionSpec::Disk { radius, center } => {
                if center_dist(center) <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Sine { freq } => x
                .iter()
                .map(|&xi| (2.0 * std::f64::consts::PI * freq * xi).sin())
                .product(),
            FunctionSpec::Cusp { beta, center } => center_dist(center).powf(*beta),
            FunctionSpec::Step { normal, offset } => {
                let dot: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| xi * normal.get(i).copied().unwrap_or(0.0))
                    .sum();
                if dot >= *offset {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Csv(_) | FunctionSpec::Pgm(_) => return None,
        })
    }

    /// Maximum total degree for polynomial specs.
    pub fn polynomial_degree(&self) -> Option<u32> {
        match self {
            FunctionSpec::Constant(_) => Some(0),
            FunctionSpec::Polynomial(t) => Some(t.iter().map(|(_, e)| e.iter().sum::<u32>()).max().unwrap_or(0)),
            _ => None,
        }
    }
}

/// A function on `[0,1)^d` given by its values on the `2^{Jd}` level-`J`
/// cells, in canonical cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dim: usize,
    level: u32,
    values: Vec<f64>,
    source: String,
}

impl GridFunction {
    pub fn from_values(dim: usize, level: u32, values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::BadDimension(dim));
        }
        let expected = 1usize
            .checked_shl(level * dim as u32)
            .filter(|_| (level as usize) * dim < usize::BITS as usize)
            .ok_or_else(|| Error::Config(format!("grid 2^({level}*{dim}) too large")))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadFormat(format!("non-finite value {v}")));
        }
        Ok(Self {
            dim,
            level,
            values,
            source: source.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reference resolution level `J`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cells per axis, `2^J`.
    pub fn side_cells(&self) -> usize {
        1 << self.level
    }

    /// Volume of one cell, `2^{-Jd}`.
    pub fn cell_volume(&self) -> f64 {
        (-((self.level as usize * self.dim) as f64)).exp2()
    }

    /// Center of the cell with the given linear index.
    pub fn cell_center(&self, linear: usize) -> Vec<f64> {
        DyadicCube::from_linear(self.dim, self.level, linear).center()
    }

    /// Pointwise map, keeping the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// `self − other` on the same grid.
    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            source: format!("({}) - ({})", self.source, other.source),
            ..self.clone()
        })
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.level != other.level {
            return Err(Error::DimensionMismatch(format!(
                "grids (d={}, J={}) and (d={}, J={})",
                self.dim, self.level, other.dim, other.level
            )));
        }
        Ok(())
    }

    /// CSV encoding: a `d,J` header, the values of `d` and `J`, then one line
    /// per axis-0 row of `2^J` values.
    pub fn to_csv(&self) -> String {
        let mut out = format!("d,J\n{},{}\n", self.dim, self.level);
        for row in self.values.chunks(self.side_cells()) {
            let line: Vec<String> = row.iter().map(|&v| crate::format::sig12(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::BadFormat("empty CSV".into()))?;
        if header.replace(' ', "") != "d,J" {
            return Err(Error::BadFormat(format!("CSV header must be 'd,J', got '{header}'")));
        }
        let dims = lines.next().ok_or_else(|| Error::BadFormat("CSV lacks d,J values".into()))?;
        let (d, j) = dims
            .split_once(',')
            .ok_or_else(|| Error::BadFormat(format!("bad d,J line '{dims}'")))?;
        let d: usize = d.trim().parse().map_err(|_| Error::BadFormat(format!("bad d '{d}'")))?;
        let j: u32 = j.trim().parse().map_err(|_| Error::BadFormat(format!("bad J '{j}'")))?;
        let mut values = Vec::new();
        for line in lines {
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::BadFormat(format!("bad CSV value '{tok}'")))?,
                );
            }
        }
        Self::from_values(d, j, values, source)
    }

    /// Reads a square P2/P5 image of side `2^J`; gray level `v` maps to `v / maxval`.
    /// Pixel (row `r`, column `c`) becomes the cell with index `(c, r)`.
    pub fn from_pgm(bytes: &[u8], dim: usize, source: impl Into<String>) -> Result<Self> {
        if dim != 2 {
            return Err(Error::DimensionMismatch(format!("PGM input needs d=2, got d={dim}")));
        }
        let mut pos = 0usize;
        let mut next_token = |bytes: &[u8]| -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::BadFormat("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let magic = next_token(bytes)?;
        let num = |t: String| -> Result<usize> {
            t.parse().map_err(|_| Error::BadFormat(format!("bad PGM header field '{t}'")))
        };
        let width = num(next_token(bytes)?)?;
        let height = num(next_token(bytes)?)?;
        let maxval = num(next_token(bytes)?)?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::BadFormat(format!("bad PGM maxval {maxval}")));
        }
        if width != height || !width.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "PGM must be square with power-of-two side, got {width}x{height}"
            )));
        }
        let n = width * height;
        let raw: Vec<usize> = match magic.as_str() {
            "P2" => (0..n).map(|_| next_token(bytes).and_then(num)).collect::<Result<_>>()?,
            "P5" => {
                let data = &bytes[pos + 1..];
                if maxval < 256 {
                    if data.len() < n {
                        return Err(Error::BadFormat("truncated P5 data".into()));
                    }
                    data[..n].iter().map(|&b| b as usize).collect()
                } else {
                    if data.len() < 2 * n {
                        return Err(Error::BadFormat("truncated P5 data".into()));
                    }
                    data.chunks(2).take(n).map(|c| ((c[0] as usize) << 8) | c[1] as usize).collect()
                }
            }
            other => return Err(Error::BadFormat(format!("unsupported PGM magic '{other}'"))),
        };
        if let Some(v) = raw.iter().find(|&&v| v > maxval) {
            return Err(Error::BadFormat(format!("pixel {v} exceeds maxval {maxval}")));
        }
        let level = width.trailing_zeros();
        let values = raw.iter().map(|&v| v as f64 / maxval as f64).collect();
        Self::from_values(2, level, values, source)
    }
}

/// Builds a grid function from a spec; generators are sampled at cell centers.
pub fn make_function(spec: &FunctionSpec, dim: usize, level: u32) -> Result<GridFunction> {
    let function = match spec {
        FunctionSpec::Csv(path) => {
            let text = std::fs::read_to_string(path)?;
            GridFunction::from_csv(&text, format!("csv:{}", path.display()))?
        }
        FunctionSpec::Pgm(path) => {
            let bytes = std::fs::read(path)?;
            GridFunction::from_pgm(&bytes, dim, format!("pgm:{}", path.display()))?
        }
        generator => {
            if dim == 0 || dim > MAX_DIM {
                return Err(Error::BadDimension(dim));
            }
            let n = 1usize << (level as usize * dim);
            let values = (0..n)
                .map(|lin| {
                    generator
                        .eval(&DyadicCube::from_linear(dim, level, lin).center())
                        .expect("generator")
                })
                .collect();
            return GridFunction::from_values(dim, level, values, format!("{generator:?}"));
        }
    };
    if function.dim() != dim || function.level() != level {
        return Err(Error::DimensionMismatch(format!(
            "file has d={}, J={}, requested d={dim}, J={level}",
            function.dim(),
            function.level()
        )));
    }
    Ok(function)
}

/// Loads a function spec from a file path, inferring the grid from the file.
pub fn load_file(path: &Path, dim: usize) -> Result<GridFunction> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => GridFunction::from_pgm(&std::fs::read(path)?, dim, path.display().to_string()),
        _ => GridFunction::from_csv(&std::fs::read_to_string(path)?, path.display().to_string()),
    }
}

/// `‖f‖_{L_q(S)}` over the cells of `set`.
pub fn lq_norm(f: &GridFunction, set: &DyadicSet, q: NormExponent) -> Result<f64> {
    let cells = set.cell_indices(f.level())?;
    Ok(weighted_norm(cells.iter().map(|&c| f.values[c]), f.cell_volume(), q))
}

/// Convolution with the tensor bump `∏ (1 − |y_i|)` at scale `eps`, reflecting
/// the grid across each face. `eps` must be a positive multiple of `2^-J`.
pub fn mollify(f: &GridFunction, eps: f64) -> Result<GridFunction> {
    let spacing = (-(f.level as f64)).exp2();
    if !(eps >= spacing) {
        return Err(Error::ScaleTooFine { scale: eps, spacing });
    }
    let ratio = eps / spacing;
    let r = ratio.round() as i64;
    if (ratio - r as f64).abs() > 1e-9 {
        return Err(Error::Config(format!("mollifier scale {eps} is not a multiple of {spacing}")));
    }
    let raw: Vec<f64> = (-r..=r).map(|o| 1.0 - (o.abs() as f64) / r as f64).collect();
    let total: f64 = raw.iter().sum();
    let kernel: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let n = f.side_cells() as i64;
    let reflect = |mut i: i64| -> usize {
        // half-sample symmetric extension, period 2n
        i = i.rem_euclid(2 * n);
        if i >= n {
            i = 2 * n - 1 - i;
        }
        i as usize
    };
    let mut cur = f.values.clone();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..f.dim {
        let stride = 1usize << (f.level as usize * axis);
        for (lin, out) in next.iter_mut().enumerate() {
            let pos = ((lin / stride) % n as usize) as i64;
            let base = lin - pos as usize * stride;
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let src = reflect(pos - (k as i64 - r));
                acc += w * cur[base + src * stride];
            }
            *out = acc;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(GridFunction {
        values: cur,
        source: format!("mollify({}, {eps})", f.source),
        ..f.clone()
    })
}
