//! Boundary flow data: critical points of kinds o/s/u, the eight
//! trajectory-count operators, the three assembled complexes, the triangle
//! maps between them and chain-level duality.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::cobordism::{assemble_cobordism_maps, CrossOperators};
use crate::complex::{
    check_exact_pair, ChainMap, ExactnessReport, Generator, GradedComplex, HomologyResult, InducedMap,
};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::grading::GradingKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    /// Interior (irreducible).
    Interior,
    /// Boundary-stable.
    Stable,
    /// Boundary-unstable.
    Unstable,
}

impl PointKind {
    pub fn code(self) -> &'static str {
        match self {
            PointKind::Interior => "o",
            PointKind::Stable => "s",
            PointKind::Unstable => "u",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "o" => Some(PointKind::Interior),
            "s" => Some(PointKind::Stable),
            "u" => Some(PointKind::Unstable),
            _ => None,
        }
    }

    fn swapped(self) -> Self {
        match self {
            PointKind::Interior => PointKind::Interior,
            PointKind::Stable => PointKind::Unstable,
            PointKind::Unstable => PointKind::Stable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPoint {
    pub id: String,
    pub kind: PointKind,
    /// Numerator in the data's grading kind. For unstable points this counts
    /// the normal direction too.
    pub grading: i64,
}

impl CriticalPoint {
    pub fn new(id: impl Into<String>, kind: PointKind, grading: i64) -> Self {
        Self { id: id.into(), kind, grading }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowOp {
    Doo,
    Dos,
    Duo,
    Dus,
    BdSs,
    BdUu,
    BdUs,
    BdSu,
}

impl FlowOp {
    pub const ALL: [FlowOp; 8] =
        [FlowOp::Doo, FlowOp::Dos, FlowOp::Duo, FlowOp::Dus, FlowOp::BdSs, FlowOp::BdUu, FlowOp::BdUs, FlowOp::BdSu];

    pub fn name(self) -> &'static str {
        match self {
            FlowOp::Doo => "d_oo",
            FlowOp::Dos => "d_os",
            FlowOp::Duo => "d_uo",
            FlowOp::Dus => "d_us",
            FlowOp::BdSs => "bd_ss",
            FlowOp::BdUu => "bd_uu",
            FlowOp::BdUs => "bd_us",
            FlowOp::BdSu => "bd_su",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn source(self) -> PointKind {
        use PointKind::*;
        match self {
            FlowOp::Doo | FlowOp::Dos => Interior,
            FlowOp::BdSs | FlowOp::BdSu => Stable,
            FlowOp::Duo | FlowOp::Dus | FlowOp::BdUu | FlowOp::BdUs => Unstable,
        }
    }

    pub fn target(self) -> PointKind {
        use PointKind::*;
        match self {
            FlowOp::Doo | FlowOp::Duo => Interior,
            FlowOp::Dos | FlowOp::Dus | FlowOp::BdSs | FlowOp::BdUs => Stable,
            FlowOp::BdUu | FlowOp::BdSu => Unstable,
        }
    }

    /// Grading change in integer steps.
    pub fn shift(self) -> i64 {
        match self {
            FlowOp::BdUs => -2,
            FlowOp::BdSu => 0,
            _ => -1,
        }
    }

    /// The operator that `self` becomes after swapping s and u and transposing.
    fn dual(self) -> Self {
        match self {
            FlowOp::Doo => FlowOp::Doo,
            FlowOp::Dos => FlowOp::Duo,
            FlowOp::Duo => FlowOp::Dos,
            FlowOp::Dus => FlowOp::Dus,
            FlowOp::BdSs => FlowOp::BdUu,
            FlowOp::BdUu => FlowOp::BdSs,
            FlowOp::BdUs => FlowOp::BdUs,
            FlowOp::BdSu => FlowOp::BdSu,
        }
    }
}

/// Sparse operator: a set of `(source id, target id)` pairs with coefficient 1.
pub type SparseOp = BTreeSet<(String, String)>;

/// Adds `(src, dst)` mod 2.
pub fn toggle_pair(op: &mut SparseOp, src: &str, dst: &str) {
    let key = (src.to_string(), dst.to_string());
    if !op.remove(&key) {
        op.insert(key);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    To,
    From,
    Bar,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::To, Flavor::From, Flavor::Bar];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::To => "to",
            Flavor::From => "from",
            Flavor::Bar => "bar",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryFlowData {
    pub name: String,
    pub b1: u32,
    kind: GradingKind,
    points: Vec<CriticalPoint>,
    ops: BTreeMap<FlowOp, SparseOp>,
    u_cap: Option<CrossOperators>,
    /// id → (kind, index among points of that kind)
    index: HashMap<String, (PointKind, usize)>,
}

impl BoundaryFlowData {
    /// Checks ids and operator endpoint kinds. Degree typing and the
    /// composition identities are left to [`BoundaryFlowData::validate`].
    pub fn new(
        name: impl Into<String>,
        b1: u32,
        kind: GradingKind,
        mut points: Vec<CriticalPoint>,
        ops: BTreeMap<FlowOp, SparseOp>,
    ) -> Result<Self> {
        kind.validate()?;
        let mut index = HashMap::new();
        let mut counts: HashMap<PointKind, usize> = HashMap::new();
        for p in &mut points {
            p.grading = kind.normalize(p.grading);
            let slot = counts.entry(p.kind).or_default();
            if index.insert(p.id.clone(), (p.kind, *slot)).is_some() {
                return Err(Error::DuplicateId(p.id.clone()));
            }
            *slot += 1;
        }
        let mut data = Self { name: name.into(), b1, kind, points, ops: BTreeMap::new(), u_cap: None, index };
        for (op, pairs) in ops {
            for (s, t) in &pairs {
                data.check_endpoint(op.name(), s, op.source())?;
                data.check_endpoint(op.name(), t, op.target())?;
            }
            if !pairs.is_empty() {
                data.ops.insert(op, pairs);
            }
        }
        Ok(data)
    }

    pub(crate) fn check_endpoint(&self, op: &str, id: &str, expected: PointKind) -> Result<()> {
        match self.index.get(id) {
            None => Err(Error::UnknownId(id.to_string())),
            Some(&(k, _)) if k != expected => Err(Error::Model(format!(
                "{op} needs a point of kind {} but `{id}` has kind {}",
                expected.code(),
                k.code()
            ))),
            Some(_) => Ok(()),
        }
    }

    pub fn with_u_cap(mut self, cap: CrossOperators) -> Result<Self> {
        cap.check_endpoints(&self, &self)?;
        self.u_cap = Some(cap);
        Ok(self)
    }

    pub fn kind(&self) -> GradingKind {
        self.kind
    }

    pub fn points(&self) -> &[CriticalPoint] {
        &self.points
    }

    pub fn point(&self, id: &str) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn points_of(&self, kind: PointKind) -> Vec<&CriticalPoint> {
        self.points.iter().filter(|p| p.kind == kind).collect()
    }

    pub fn count(&self, kind: PointKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub(crate) fn local_index(&self, id: &str) -> Option<(PointKind, usize)> {
        self.index.get(id).copied()
    }

    pub fn op(&self, op: FlowOp) -> &SparseOp {
        static EMPTY: SparseOp = BTreeSet::new();
        self.ops.get(&op).unwrap_or(&EMPTY)
    }

    pub fn ops(&self) -> &BTreeMap<FlowOp, SparseOp> {
        &self.ops
    }

    pub fn u_cap(&self) -> Option<&CrossOperators> {
        self.u_cap.as_ref()
    }

    /// Same data with one operator entry added mod 2.
    pub fn toggled(&self, op: FlowOp, src: &str, dst: &str) -> Result<Self> {
        let mut ops = self.ops.clone();
        toggle_pair(ops.entry(op).or_default(), src, dst);
        let mut out = Self::new(self.name.clone(), self.b1, self.kind, self.points.clone(), ops)?;
        out.u_cap = self.u_cap.clone();
        Ok(out)
    }

    /// All gradings shifted by `steps` integer steps.
    pub fn regraded(&self, steps: i64) -> Self {
        let mut out = self.clone();
        let delta = self.kind.steps(steps);
        for p in &mut out.points {
            p.grading = self.kind.shift(p.grading, delta);
        }
        out
    }

    /// Matrix of `op`: rows are target-kind points, columns source-kind points.
    pub fn op_matrix(&self, op: FlowOp) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.count(op.target()), self.count(op.source()));
        for (s, t) in self.op(op) {
            let (_, j) = self.index[s];
            let (_, i) = self.index[t];
            m.toggle(i, j);
        }
        m
    }

    fn identity_of(&self, kind: PointKind) -> BitMatrix {
        BitMatrix::identity(self.count(kind))
    }

    fn zero(&self, rows: PointKind, cols: PointKind) -> BitMatrix {
        BitMatrix::zeros(self.count(rows), self.count(cols))
    }

    fn generators(&self, kinds: &[(PointKind, i64)]) -> Vec<Generator> {
        let mut out = Vec::new();
        for &(kind, shift) in kinds {
            for p in self.points_of(kind) {
                out.push(Generator::new(p.id.clone(), self.kind.shift(p.grading, self.kind.steps(shift))));
            }
        }
        out
    }

    /// Generators and differential of one flavor, without validation.
    pub fn assemble_unchecked(&self, flavor: Flavor) -> Result<GradedComplex> {
        use FlowOp::*;
        use PointKind::*;
        let m = |op| self.op_matrix(op);
        let (gens, d) = match flavor {
            Flavor::To => (
                self.generators(&[(Interior, 0), (Stable, 0)]),
                BitMatrix::from_blocks(&[
                    vec![m(Doo), &m(Duo) * &m(BdSu)],
                    vec![m(Dos), &m(BdSs) + &(&m(Dus) * &m(BdSu))],
                ]),
            ),
            Flavor::From => (
                self.generators(&[(Interior, 0), (Unstable, 0)]),
                BitMatrix::from_blocks(&[
                    vec![m(Doo), m(Duo)],
                    vec![&m(BdSu) * &m(Dos), &m(BdUu) + &(&m(BdSu) * &m(Dus))],
                ]),
            ),
            Flavor::Bar => (
                self.generators(&[(Stable, 0), (Unstable, -1)]),
                BitMatrix::from_blocks(&[vec![m(BdSs), m(BdUs)], vec![m(BdSu), m(BdUu)]]),
            ),
        };
        GradedComplex::new(self.kind, gens, d)
    }

    /// The assembled complex of one flavor; errors if the data fails validation.
    pub fn assemble(&self, flavor: Flavor) -> Result<GradedComplex> {
        self.validate().into_result()?;
        self.assemble_unchecked(flavor)
    }

    pub fn assemble_to(&self) -> Result<GradedComplex> {
        self.assemble(Flavor::To)
    }

    pub fn assemble_from(&self) -> Result<GradedComplex> {
        self.assemble(Flavor::From)
    }

    pub fn assemble_bar(&self) -> Result<GradedComplex> {
        self.assemble(Flavor::Bar)
    }

    pub fn homology(&self, flavor: Flavor) -> Result<HomologyResult> {
        self.assemble(flavor)?.homology()
    }

    /// The composition identities among the eight operators, each as
    /// `(name, source kind, target kind, value)`. All values vanish for
    /// valid data.
    pub fn identities(&self) -> Vec<(&'static str, PointKind, PointKind, BitMatrix)> {
        use FlowOp::*;
        use PointKind::*;
        let m = |op| self.op_matrix(op);
        let (doo, dos, duo, dus) = (m(Doo), m(Dos), m(Duo), m(Dus));
        let (bss, buu, bus, bsu) = (m(BdSs), m(BdUu), m(BdUs), m(BdSu));
        let sum = |terms: Vec<BitMatrix>, r: PointKind, c: PointKind| {
            terms.iter().fold(self.zero(r, c), |acc, t| &acc + t)
        };
        vec![
            ("oo", Interior, Interior, sum(vec![&doo * &doo, &(&duo * &bsu) * &dos], Interior, Interior)),
            (
                "os",
                Interior,
                Stable,
                sum(vec![&dos * &doo, &bss * &dos, &(&dus * &bsu) * &dos], Stable, Interior),
            ),
            (
                "uo",
                Unstable,
                Interior,
                sum(vec![&doo * &duo, &duo * &buu, &(&duo * &bsu) * &dus], Interior, Unstable),
            ),
            (
                "us",
                Unstable,
                Stable,
                sum(
                    vec![bus.clone(), &dos * &duo, &bss * &dus, &dus * &buu, &(&dus * &bsu) * &dus],
                    Stable,
                    Unstable,
                ),
            ),
            ("bar_ss", Stable, Stable, sum(vec![&bss * &bss, &bus * &bsu], Stable, Stable)),
            ("bar_su", Stable, Unstable, sum(vec![&bsu * &bss, &buu * &bsu], Unstable, Stable)),
            ("bar_us", Unstable, Stable, sum(vec![&bss * &bus, &bus * &buu], Stable, Unstable)),
            ("bar_uu", Unstable, Unstable, sum(vec![&bsu * &bus, &buu * &buu], Unstable, Unstable)),
        ]
    }

    pub fn validate(&self) -> FlowReport {
        let mut report = FlowReport::default();
        for (&op, pairs) in &self.ops {
            for (s, t) in pairs {
                let gs = self.point(s).unwrap().grading;
                let gt = self.point(t).unwrap().grading;
                let expected = self.kind.shift(gs, self.kind.steps(op.shift()));
                if gt != expected {
                    report.degree_violations.push(DegreeIssue {
                        op: op.name().to_string(),
                        source: s.clone(),
                        target: t.clone(),
                        expected: self.kind.format(expected),
                        found: self.kind.format(gt),
                    });
                }
            }
        }
        if !report.degree_violations.is_empty() {
            return report;
        }
        for (name, src, dst, value) in self.identities() {
            if value.is_zero() {
                continue;
            }
            let sources = self.points_of(src);
            let targets = self.points_of(dst);
            let pairs = value
                .nonzeros()
                .into_iter()
                .map(|(i, j)| (sources[j].id.clone(), targets[i].id.clone()))
                .collect();
            report.identity_violations.push(IdentityIssue { name: name.to_string(), pairs });
        }
        for flavor in Flavor::ALL {
            if let Ok(c) = self.assemble_unchecked(flavor) {
                let r = c.validate();
                if !r.passed() {
                    report.complex_violations.push((flavor, r.summary()));
                }
            }
        }
        if report.passed() {
            if let Some(cap) = &self.u_cap {
                if let Err(e) = assemble_cobordism_maps(self, self, cap) {
                    report.cap_violations.push(e.to_string());
                }
            }
        }
        report
    }

    /// Swaps s and u, transposes every operator and regrades by
    /// `j ↦ −1 − b1 − j`. The U-cap, if any, is dualized alongside.
    pub fn dualize(&self) -> Result<Self> {
        let kind = self.kind;
        let flip = |g: i64| kind.normalize(-kind.steps(1 + i64::from(self.b1)) - g);
        let points = self
            .points
            .iter()
            .map(|p| CriticalPoint::new(p.id.clone(), p.kind.swapped(), flip(p.grading)))
            .collect();
        let mut ops: BTreeMap<FlowOp, SparseOp> = BTreeMap::new();
        for (&op, pairs) in &self.ops {
            let entry = ops.entry(op.dual()).or_default();
            for (s, t) in pairs {
                toggle_pair(entry, t, s);
            }
        }
        let mut out = Self::new(format!("dual({})", self.name), self.b1, kind, points, ops)?;
        let report = out.validate();
        if !report.degree_violations.is_empty() {
            return Err(Error::DegreeViolation(report.summary()));
        }
        if let Some(cap) = &self.u_cap {
            out = out.with_u_cap(cap.dualize())?;
        }
        Ok(out)
    }

    /// The chain maps `i: C̄ → Č`, `j: Č → Ĉ`, `p: Ĉ → C̄`, verified to be
    /// chain maps and to induce an exact triangle.
    pub fn triangle(&self) -> Result<Triangle> {
        use FlowOp::*;
        use PointKind::*;
        let to = self.assemble(Flavor::To)?;
        let from = self.assemble(Flavor::From)?;
        let bar = self.assemble(Flavor::Bar)?;
        let m = |op| self.op_matrix(op);
        let i_mat = BitMatrix::from_blocks(&[
            vec![self.zero(Interior, Stable), m(Duo)],
            vec![self.identity_of(Stable), m(Dus)],
        ]);
        let j_mat = BitMatrix::from_blocks(&[
            vec![self.identity_of(Interior), self.zero(Interior, Stable)],
            vec![self.zero(Unstable, Interior), m(BdSu)],
        ]);
        let p_mat = BitMatrix::from_blocks(&[
            vec![m(Dos), m(Dus)],
            vec![self.zero(Unstable, Interior), self.identity_of(Unstable)],
        ]);
        let i = ChainMap::new(bar.clone(), to.clone(), i_mat, 0)?;
        let j = ChainMap::new(to.clone(), from.clone(), j_mat, 0)?;
        let p = ChainMap::new(from.clone(), bar.clone(), p_mat, self.kind.steps(-1))?;
        for (name, map) in [("i", &i), ("j", &j), ("p", &p)] {
            let r = map.validate();
            if !r.passed() {
                return Err(Error::Triangle(format!("{name} is not a chain map: {}", r.summary())));
            }
        }
        let h_to = to.homology()?;
        let h_from = from.homology()?;
        let h_bar = bar.homology()?;
        let i_star = i.induced_between(&h_bar, &h_to)?;
        let j_star = j.induced_between(&h_to, &h_from)?;
        let p_star = p.induced_between(&h_from, &h_bar)?;
        let exact_to = check_exact_pair(&i_star, &j_star)?;
        let exact_from = check_exact_pair(&j_star, &p_star)?;
        let exact_bar = check_exact_pair(&p_star, &i_star)?;
        for (name, r) in [("to", &exact_to), ("from", &exact_from), ("bar", &exact_bar)] {
            if !r.exact() {
                let at: Vec<String> = r.failures().iter().map(|&g| self.kind.format(g)).collect();
                return Err(Error::Triangle(format!("not exact at {name} in grading {}", at.join(", "))));
            }
        }
        Ok(Triangle {
            i,
            j,
            p,
            h_to,
            h_from,
            h_bar,
            i_star,
            j_star,
            p_star,
            exactness: [exact_to, exact_from, exact_bar],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeIssue {
    pub op: String,
    pub source: String,
    pub target: String,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityIssue {
    pub name: String,
    /// `(source id, target id)` entries where the identity fails.
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowReport {
    pub degree_violations: Vec<DegreeIssue>,
    pub identity_violations: Vec<IdentityIssue>,
    pub complex_violations: Vec<(Flavor, String)>,
    pub cap_violations: Vec<String>,
}

impl FlowReport {
    pub fn passed(&self) -> bool {
        self.degree_violations.is_empty()
            && self.identity_violations.is_empty()
            && self.complex_violations.is_empty()
            && self.cap_violations.is_empty()
    }

    pub fn failed_identities(&self) -> Vec<&str> {
        self.identity_violations.iter().map(|i| i.name.as_str()).collect()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in &self.degree_violations {
            out.push(format!(
                "degree {} {}->{}: target grading {}, expected {}",
                d.op, d.source, d.target, d.found, d.expected
            ));
        }
        for i in &self.identity_violations {
            let pairs: Vec<String> = i.pairs.iter().map(|(s, t)| format!("{s}->{t}")).collect();
            out.push(format!("identity {} fails at {}", i.name, pairs.join(" ")));
        }
        for (f, s) in &self.complex_violations {
            out.push(format!("{f} complex: {s}"));
        }
        for c in &self.cap_violations {
            out.push(format!("u_cap: {c}"));
        }
        out
    }

    pub fn summary(&self) -> String {
        self.lines().join("; ")
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        if !self.degree_violations.is_empty() {
            Err(Error::DegreeViolation(self.summary()))
        } else if !self.identity_violations.is_empty() || !self.complex_violations.is_empty() {
            Err(Error::IdentityViolation(self.summary()))
        } else {
            Err(Error::NotAChainMap(self.summary()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Triangle {
    pub i: ChainMap,
    pub j: ChainMap,
    pub p: ChainMap,
    pub h_to: HomologyResult,
    pub h_from: HomologyResult,
    pub h_bar: HomologyResult,
    pub i_star: InducedMap,
    pub j_star: InducedMap,
    pub p_star: InducedMap,
    /// Exactness at the to, from and bar terms.
    pub exactness: [ExactnessReport; 3],
}
