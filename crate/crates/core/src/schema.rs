//! On-disk JSON formats and their conversion to and from the in-memory types.
//!
//! Deserialization only checks the shape of a document. The `into_*`
//! conversions then check meaning (ids resolve, kinds match, bits are bits)
//! and report the offending location as a JSON pointer.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::bott::BottLevel;
use crate::cobordism::{CrossOp, CrossOperators};
use crate::complex::{Generator, GradedComplex, Involution};
use crate::error::Error;
use crate::flow::{BoundaryFlowData, CriticalPoint, FlowOp, PointKind, SparseOp};
use crate::gf2::{BitMatrix, BitVec};
use crate::grading::{format_rational, GradingKind};
use crate::modules::{QuadraticForm, RModule, UModule};
use crate::spectral::HermitianPath;

/// A semantic error located by a JSON pointer into the input document.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    fn at(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { pointer: pointer.into(), message: message.to_string() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for SchemaError {}

pub type SchemaResult<T> = std::result::Result<T, SchemaError>;

fn root(e: Error) -> SchemaError {
    SchemaError::at("", e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum GradingSpec {
    #[default]
    #[serde(rename = "Z")]
    Integer,
    #[serde(rename = "Q")]
    Rational { denominator: i64 },
    #[serde(rename = "modd")]
    Modular { d: i64 },
}

impl GradingSpec {
    pub fn kind(self) -> SchemaResult<GradingKind> {
        let kind = match self {
            GradingSpec::Integer => GradingKind::Integer,
            GradingSpec::Rational { denominator } => GradingKind::Rational { denominator },
            GradingSpec::Modular { d } => GradingKind::Modular { modulus: d },
        };
        kind.validate().map_err(|e| SchemaError::at("/grading", e))?;
        Ok(kind)
    }

    pub fn from_kind(kind: GradingKind) -> Self {
        match kind {
            GradingKind::Integer => GradingSpec::Integer,
            GradingKind::Rational { denominator } => GradingSpec::Rational { denominator },
            GradingKind::Modular { modulus } => GradingSpec::Modular { d: modulus },
        }
    }
}

/// An integer, or a rational written `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GradingValue {
    Int(i64),
    Text(String),
}

impl GradingValue {
    pub fn rational(&self) -> std::result::Result<Rational64, String> {
        match self {
            GradingValue::Int(v) => Ok(Rational64::from_integer(*v)),
            GradingValue::Text(s) => parse_rational(s),
        }
    }

    fn numerator(&self, kind: GradingKind, pointer: &str) -> SchemaResult<i64> {
        let r = self.rational().map_err(|m| SchemaError::at(pointer, m))?;
        kind.from_rational(r).map_err(|e| SchemaError::at(pointer, e))
    }

    fn of(kind: GradingKind, value: i64) -> Self {
        let r = kind.to_rational(value);
        if r.is_integer() {
            GradingValue::Int(r.to_integer())
        } else {
            GradingValue::Text(format_rational(r))
        }
    }
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> std::result::Result<Rational64, String> {
    let bad = || format!("`{s}` is not an integer or a fraction p/q");
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(format!("`{s}` has zero denominator"));
            }
            Ok(Rational64::new(p, q))
        }
        None => s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub id: String,
    pub kind: String,
    pub grading: GradingValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossFile {
    pub degree: GradingValue,
    #[serde(default)]
    pub ops: BTreeMap<String, Vec<(String, String)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDataFile {
    pub name: String,
    #[serde(default)]
    pub b1: u32,
    #[serde(default)]
    pub grading: GradingSpec,
    pub points: Vec<PointFile>,
    #[serde(default)]
    pub ops: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_cap: Option<CrossFile>,
}

fn pairs_set(pairs: &[(String, String)]) -> SparseOp {
    let mut set = SparseOp::new();
    for (s, t) in pairs {
        crate::flow::toggle_pair(&mut set, s, t);
    }
    set
}

impl FlowDataFile {
    pub fn into_flow(self) -> SchemaResult<BoundaryFlowData> {
        let kind = self.grading.kind()?;
        let mut points = Vec::with_capacity(self.points.len());
        for (k, p) in self.points.iter().enumerate() {
            let base = format!("/points/{k}");
            let pk = PointKind::from_code(&p.kind)
                .ok_or_else(|| SchemaError::at(format!("{base}/kind"), format!("`{}` is not one of o, s, u", p.kind)))?;
            let g = p.grading.numerator(kind, &format!("{base}/grading"))?;
            points.push(CriticalPoint::new(p.id.clone(), pk, g));
        }
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        for (k, p) in self.points.iter().enumerate() {
            if ids.insert(p.id.as_str(), k).is_some() {
                return Err(SchemaError::at(format!("/points/{k}/id"), format!("duplicate id `{}`", p.id)));
            }
        }
        let check_pairs = |base: &str, pairs: &[(String, String)], src: PointKind, dst: PointKind| -> SchemaResult<()> {
            for (k, (s, t)) in pairs.iter().enumerate() {
                for (slot, id, want) in [(0, s, src), (1, t, dst)] {
                    let at = format!("{base}/{k}/{slot}");
                    let idx = ids.get(id.as_str()).ok_or_else(|| SchemaError::at(&at, format!("unknown id `{id}`")))?;
                    if points[*idx].kind != want {
                        return Err(SchemaError::at(
                            &at,
                            format!("`{id}` is {}, expected {}", points[*idx].kind.code(), want.code()),
                        ));
                    }
                }
            }
            Ok(())
        };
        let mut ops = BTreeMap::new();
        for (name, pairs) in &self.ops {
            let base = format!("/ops/{name}");
            let op = FlowOp::from_name(name).ok_or_else(|| SchemaError::at(&base, "unknown operator"))?;
            check_pairs(&base, pairs, op.source(), op.target())?;
            ops.insert(op, pairs_set(pairs));
        }
        let mut cap = None;
        if let Some(file) = &self.u_cap {
            let degree = file.degree.numerator(kind, "/u_cap/degree")?;
            let mut x = CrossOperators::new(degree);
            for (name, pairs) in &file.ops {
                let base = format!("/u_cap/ops/{name}");
                let op = CrossOp::from_name(name).ok_or_else(|| SchemaError::at(&base, "unknown cross operator"))?;
                check_pairs(&base, pairs, op.source(), op.target())?;
                x.maps.insert(op, pairs_set(pairs));
            }
            cap = Some(x);
        }
        let mut data = BoundaryFlowData::new(self.name, self.b1, kind, points, ops).map_err(root)?;
        if let Some(x) = cap {
            data = data.with_u_cap(x).map_err(|e| SchemaError::at("/u_cap", e))?;
        }
        Ok(data)
    }

    pub fn from_flow(d: &BoundaryFlowData) -> Self {
        let kind = d.kind();
        let pairs = |set: &SparseOp| set.iter().cloned().collect::<Vec<_>>();
        Self {
            name: d.name.clone(),
            b1: d.b1,
            grading: GradingSpec::from_kind(kind),
            points: d
                .points()
                .iter()
                .map(|p| PointFile {
                    id: p.id.clone(),
                    kind: p.kind.code().to_string(),
                    grading: GradingValue::of(kind, p.grading),
                })
                .collect(),
            ops: d
                .ops()
                .iter()
                .filter(|(_, set)| !set.is_empty())
                .map(|(op, set)| (op.name().to_string(), pairs(set)))
                .collect(),
            u_cap: d.u_cap().map(|x| CrossFile {
                degree: GradingValue::of(kind, x.degree),
                ops: x
                    .maps
                    .iter()
                    .filter(|(_, set)| !set.is_empty())
                    .map(|(op, set)| (op.name().to_string(), pairs(set)))
                    .collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub id: String,
    pub grading: GradingValue,
}

/// A complex as generators and `(source, target)` pairs of the differential.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    #[serde(default)]
    pub grading: GradingSpec,
    pub generators: Vec<GeneratorFile>,
    #[serde(default)]
    pub differential: Vec<(String, String)>,
    /// Defaults to −1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<GradingValue>,
}

impl ComplexFile {
    pub fn into_complex(self) -> SchemaResult<GradedComplex> {
        self.into_complex_at("")
    }

    fn into_complex_at(self, base: &str) -> SchemaResult<GradedComplex> {
        let kind = self.grading.kind().map_err(|e| SchemaError::at(format!("{base}{}", e.pointer), e.message))?;
        let mut gens = Vec::with_capacity(self.generators.len());
        for (k, g) in self.generators.iter().enumerate() {
            gens.push(Generator::new(g.id.clone(), g.grading.numerator(kind, &format!("{base}/generators/{k}/grading"))?));
        }
        let index: BTreeMap<&str, usize> = gens.iter().enumerate().map(|(k, g)| (g.id.as_str(), k)).collect();
        let mut d = BitMatrix::zeros(gens.len(), gens.len());
        for (k, (s, t)) in self.differential.iter().enumerate() {
            let look = |slot: usize, id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| SchemaError::at(format!("{base}/differential/{k}/{slot}"), format!("unknown id `{id}`")))
            };
            let (si, ti) = (look(0, s)?, look(1, t)?);
            d.toggle(ti, si);
        }
        let degree = match &self.degree {
            Some(v) => v.numerator(kind, &format!("{base}/degree"))?,
            None => kind.steps(-1),
        };
        GradedComplex::with_degree(kind, gens, d, degree).map_err(|e| SchemaError::at(base, e))
    }

    pub fn from_complex(c: &GradedComplex) -> Self {
        let kind = c.kind();
        let gens = c.generators();
        Self {
            grading: GradingSpec::from_kind(kind),
            generators: gens
                .iter()
                .map(|g| GeneratorFile { id: g.id.clone(), grading: GradingValue::of(kind, g.grading) })
                .collect(),
            differential: c
                .differential()
                .nonzeros()
                .into_iter()
                .map(|(t, s)| (gens[s].id.clone(), gens[t].id.clone()))
                .collect(),
            degree: (c.degree() != kind.normalize(kind.steps(-1))).then(|| GradingValue::of(kind, c.degree())),
        }
    }
}

/// A complex with an involution given as a permutation of its generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GysinFile {
    pub complex: ComplexFile,
    pub involution: Vec<usize>,
}

impl GysinFile {
    pub fn into_parts(self) -> SchemaResult<(GradedComplex, Involution)> {
        let c = self.complex.into_complex_at("/complex")?;
        if self.involution.len() != c.len() {
            return Err(SchemaError::at(
                "/involution",
                format!("permutation has {} entries for {} generators", self.involution.len(), c.len()),
            ));
        }
        let inv = Involution::from_permutation(&self.involution).map_err(|e| SchemaError::at("/involution", e))?;
        Ok((c, inv))
    }
}

/// One block of an action: the matrix sending the piece at `from` to the
/// piece the action lands in. Rows index the target basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub from: GradingValue,
    pub matrix: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageFile {
    pub grading: GradingValue,
    pub basis: Vec<Vec<u8>>,
}

fn bits_row(row: &[u8], len: usize, at: &str) -> SchemaResult<BitVec> {
    if row.len() != len {
        return Err(SchemaError::at(at, format!("has {} entries, expected {len}", row.len())));
    }
    if let Some(k) = row.iter().position(|&b| b > 1) {
        return Err(SchemaError::at(format!("{at}/{k}"), format!("{} is not a bit", row[k])));
    }
    Ok(BitVec::from_bits(row))
}

fn to_bits(v: &BitVec) -> Vec<u8> {
    v.to_bits()
}

fn read_dims(kind: GradingKind, gradings: &[GradingValue], dims: &[usize]) -> SchemaResult<BTreeMap<i64, usize>> {
    if gradings.len() != dims.len() {
        return Err(SchemaError::at(
            "/dims",
            format!("{} dims for {} gradings", dims.len(), gradings.len()),
        ));
    }
    let mut out = BTreeMap::new();
    for (k, (g, &d)) in gradings.iter().zip(dims).enumerate() {
        let at = format!("/gradings/{k}");
        let g = g.numerator(kind, &at)?;
        if out.insert(g, d).is_some() {
            return Err(SchemaError::at(at, "repeated grading"));
        }
    }
    Ok(out)
}

fn read_blocks(
    name: &str,
    kind: GradingKind,
    dims: &BTreeMap<i64, usize>,
    blocks: &[BlockFile],
    degree: i64,
) -> SchemaResult<BTreeMap<i64, BitMatrix>> {
    let mut out = BTreeMap::new();
    for (k, b) in blocks.iter().enumerate() {
        let base = format!("/{name}/{k}");
        let g = b.from.numerator(kind, &format!("{base}/from"))?;
        let d = dims.get(&g).copied().unwrap_or(0);
        let td = dims.get(&kind.shift(g, degree)).copied().unwrap_or(0);
        if b.matrix.len() != td {
            return Err(SchemaError::at(
                format!("{base}/matrix"),
                format!("has {} rows, expected {td}", b.matrix.len()),
            ));
        }
        let rows = b
            .matrix
            .iter()
            .enumerate()
            .map(|(r, row)| bits_row(row, d, &format!("{base}/matrix/{r}")))
            .collect::<SchemaResult<Vec<_>>>()?;
        let mut m = BitMatrix::zeros(td, d);
        for (r, row) in rows.iter().enumerate() {
            for c in row.iter_ones() {
                m.set(r, c, true);
            }
        }
        if out.insert(g, m).is_some() {
            return Err(SchemaError::at(format!("{base}/from"), "repeated block"));
        }
    }
    Ok(out)
}

fn read_image(
    kind: GradingKind,
    dims: &BTreeMap<i64, usize>,
    image: &[ImageFile],
) -> SchemaResult<BTreeMap<i64, Vec<BitVec>>> {
    let mut out = BTreeMap::new();
    for (k, e) in image.iter().enumerate() {
        let base = format!("/i_image/{k}");
        let g = e.grading.numerator(kind, &format!("{base}/grading"))?;
        let d = dims.get(&g).copied().unwrap_or(0);
        let basis = e
            .basis
            .iter()
            .enumerate()
            .map(|(r, row)| bits_row(row, d, &format!("{base}/basis/{r}")))
            .collect::<SchemaResult<Vec<_>>>()?;
        if out.insert(g, basis).is_some() {
            return Err(SchemaError::at(format!("{base}/grading"), "repeated grading"));
        }
    }
    Ok(out)
}

fn write_blocks(kind: GradingKind, blocks: &BTreeMap<i64, BitMatrix>) -> Vec<BlockFile> {
    blocks
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(&g, m)| BlockFile {
            from: GradingValue::of(kind, g),
            matrix: (0..m.rows()).map(|r| to_bits(&m.row(r))).collect(),
        })
        .collect()
}

fn write_image(kind: GradingKind, image: &BTreeMap<i64, Vec<BitVec>>) -> Vec<ImageFile> {
    image
        .iter()
        .filter(|(_, b)| !b.is_empty())
        .map(|(&g, b)| ImageFile { grading: GradingValue::of(kind, g), basis: b.iter().map(to_bits).collect() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UModuleFile {
    #[serde(default)]
    pub grading: GradingSpec,
    pub gradings: Vec<GradingValue>,
    pub dims: Vec<usize>,
    #[serde(default, rename = "U")]
    pub u: Vec<BlockFile>,
    #[serde(default)]
    pub i_image: Vec<ImageFile>,
}

impl UModuleFile {
    pub fn into_module(self) -> SchemaResult<UModule> {
        let kind = self.grading.kind()?;
        let dims = read_dims(kind, &self.gradings, &self.dims)?;
        let u = read_blocks("U", kind, &dims, &self.u, kind.steps(-2))?;
        let image = read_image(kind, &dims, &self.i_image)?;
        UModule::new(kind, dims, u, image).map_err(root)
    }

    pub fn from_module(m: &UModule) -> Self {
        Self {
            grading: GradingSpec::from_kind(m.kind),
            gradings: m.dims.keys().map(|&g| GradingValue::of(m.kind, g)).collect(),
            dims: m.dims.values().copied().collect(),
            u: write_blocks(m.kind, &m.u),
            i_image: write_image(m.kind, &m.i_image),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RModuleFile {
    #[serde(default)]
    pub grading: GradingSpec,
    pub gradings: Vec<GradingValue>,
    pub dims: Vec<usize>,
    #[serde(default, rename = "V")]
    pub v: Vec<BlockFile>,
    #[serde(default, rename = "Q")]
    pub q: Vec<BlockFile>,
    #[serde(default)]
    pub i_image: Vec<ImageFile>,
}

impl RModuleFile {
    pub fn into_module(self) -> SchemaResult<RModule> {
        let kind = self.grading.kind()?;
        let dims = read_dims(kind, &self.gradings, &self.dims)?;
        let v = read_blocks("V", kind, &dims, &self.v, kind.steps(-4))?;
        let q = read_blocks("Q", kind, &dims, &self.q, kind.steps(-1))?;
        let image = read_image(kind, &dims, &self.i_image)?;
        RModule::new(kind, dims, v, q, image).map_err(root)
    }

    pub fn from_module(m: &RModule) -> Self {
        Self {
            grading: GradingSpec::from_kind(m.kind),
            gradings: m.dims.keys().map(|&g| GradingValue::of(m.kind, g)).collect(),
            dims: m.dims.values().copied().collect(),
            v: write_blocks(m.kind, &m.v),
            q: write_blocks(m.kind, &m.q),
            i_image: write_image(m.kind, &m.i_image),
        }
    }
}

/// A symmetric integer matrix, bare or as `{"matrix": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormFile {
    Bare(Vec<Vec<i64>>),
    Wrapped { matrix: Vec<Vec<i64>> },
}

impl FormFile {
    pub fn into_form(self) -> SchemaResult<QuadraticForm> {
        let (entries, at) = match self {
            FormFile::Bare(m) => (m, ""),
            FormFile::Wrapped { matrix } => (matrix, "/matrix"),
        };
        QuadraticForm::new(entries).map_err(|e| SchemaError::at(at, e))
    }
}

/// A matrix entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryFile {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleFile {
    pub t: f64,
    pub matrix: Vec<Vec<EntryFile>>,
}

pub type PathFile = Vec<SampleFile>;

pub fn path_from_file(samples: PathFile) -> SchemaResult<HermitianPath> {
    let mut out = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let n = s.matrix.len();
        if let Some(r) = s.matrix.iter().position(|row| row.len() != n) {
            return Err(SchemaError::at(format!("/{k}/matrix/{r}"), format!("row length differs from {n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| match s.matrix[i][j] {
            EntryFile::Real(x) => Complex64::new(x, 0.0),
            EntryFile::Complex([re, im]) => Complex64::new(re, im),
        });
        out.push((s.t, m));
    }
    HermitianPath::new(out).map_err(|e| match e {
        Error::NotHermitian { sample, .. } => SchemaError::at(format!("/{sample}/matrix"), e),
        e => root(e),
    })
}

pub fn path_to_file(path: &HermitianPath) -> PathFile {
    path.parameters()
        .iter()
        .zip(path.samples())
        .map(|(&t, m)| SampleFile {
            t,
            matrix: (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if z.im == 0.0 {
                                EntryFile::Real(z.re)
                            } else {
                                EntryFile::Complex([z.re, z.im])
                            }
                        })
                        .collect()
                })
                .collect(),
        })
        .collect()
}

/// Morse–Bott levels, bare or with the degree of the differentials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelsFile {
    Bare(Vec<BottLevel>),
    Wrapped {
        levels: Vec<BottLevel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        differential_degree: Option<i64>,
    },
}

impl LevelsFile {
    /// Levels and the degree of the differentials (default −1).
    pub fn into_parts(self) -> (Vec<BottLevel>, i64) {
        match self {
            LevelsFile::Bare(levels) => (levels, -1),
            LevelsFile::Wrapped { levels, differential_degree } => (levels, differential_degree.unwrap_or(-1)),
        }
    }
}
