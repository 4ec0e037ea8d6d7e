//! Cobordism-induced chain maps assembled from cross-operator counts, their
//! composition, and the rational grading arithmetic of cobordisms.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::complex::{ChainMap, ChainMapReport, InducedMap};
use crate::error::{Error, Result};
use crate::flow::{toggle_pair, BoundaryFlowData, Flavor, FlowOp, PointKind, SparseOp};
use crate::gf2::BitMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrossOp {
    Moo,
    Mos,
    Muo,
    Mus,
    BmSs,
    BmSu,
    BmUs,
    BmUu,
}

impl CrossOp {
    pub const ALL: [CrossOp; 8] =
        [CrossOp::Moo, CrossOp::Mos, CrossOp::Muo, CrossOp::Mus, CrossOp::BmSs, CrossOp::BmSu, CrossOp::BmUs, CrossOp::BmUu];

    pub fn name(self) -> &'static str {
        match self {
            CrossOp::Moo => "m_oo",
            CrossOp::Mos => "m_os",
            CrossOp::Muo => "m_uo",
            CrossOp::Mus => "m_us",
            CrossOp::BmSs => "bm_ss",
            CrossOp::BmSu => "bm_su",
            CrossOp::BmUs => "bm_us",
            CrossOp::BmUu => "bm_uu",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    /// The flow operator with the same endpoint kinds.
    fn shape(self) -> FlowOp {
        match self {
            CrossOp::Moo => FlowOp::Doo,
            CrossOp::Mos => FlowOp::Dos,
            CrossOp::Muo => FlowOp::Duo,
            CrossOp::Mus => FlowOp::Dus,
            CrossOp::BmSs => FlowOp::BdSs,
            CrossOp::BmSu => FlowOp::BdSu,
            CrossOp::BmUs => FlowOp::BdUs,
            CrossOp::BmUu => FlowOp::BdUu,
        }
    }

    pub fn source(self) -> PointKind {
        self.shape().source()
    }

    pub fn target(self) -> PointKind {
        self.shape().target()
    }

    /// Offset from the declared degree, in integer steps.
    pub fn offset(self) -> i64 {
        match self {
            CrossOp::BmSu => 1,
            CrossOp::BmUs => -1,
            _ => 0,
        }
    }

    fn dual(self) -> Self {
        match self {
            CrossOp::Mos => CrossOp::Muo,
            CrossOp::Muo => CrossOp::Mos,
            CrossOp::BmSs => CrossOp::BmUu,
            CrossOp::BmUu => CrossOp::BmSs,
            other => other,
        }
    }
}

/// Counts of solutions on a cobordism between two sets of flow data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossOperators {
    /// Declared degree in numerator units of the grading kind.
    pub degree: i64,
    pub maps: BTreeMap<CrossOp, SparseOp>,
}

impl CrossOperators {
    pub fn new(degree: i64) -> Self {
        Self { degree, maps: BTreeMap::new() }
    }

    /// The cylinder: identity on every point, degree 0.
    pub fn identity(d: &BoundaryFlowData) -> Self {
        let mut x = Self::new(0);
        for p in d.points() {
            let op = match p.kind {
                PointKind::Interior => CrossOp::Moo,
                PointKind::Stable => CrossOp::BmSs,
                PointKind::Unstable => CrossOp::BmUu,
            };
            x.toggle(op, &p.id, &p.id);
        }
        x
    }

    pub fn toggle(&mut self, op: CrossOp, src: &str, dst: &str) {
        let entry = self.maps.entry(op).or_default();
        toggle_pair(entry, src, dst);
        if entry.is_empty() {
            self.maps.remove(&op);
        }
    }

    pub fn with(mut self, op: CrossOp, src: &str, dst: &str) -> Self {
        self.toggle(op, src, dst);
        self
    }

    pub fn op(&self, op: CrossOp) -> Option<&SparseOp> {
        self.maps.get(&op)
    }

    pub fn check_endpoints(&self, src: &BoundaryFlowData, dst: &BoundaryFlowData) -> Result<()> {
        for (op, pairs) in &self.maps {
            for (s, t) in pairs {
                src.check_endpoint(op.name(), s, op.source())?;
                dst.check_endpoint(op.name(), t, op.target())?;
            }
        }
        Ok(())
    }

    /// Entries whose target grading differs from source grading plus the
    /// declared degree and the operator's offset.
    pub fn degree_violations(&self, src: &BoundaryFlowData, dst: &BoundaryFlowData) -> Vec<String> {
        let kind = src.kind();
        let mut out = Vec::new();
        for (op, pairs) in &self.maps {
            for (s, t) in pairs {
                let (Some(ps), Some(pt)) = (src.point(s), dst.point(t)) else {
                    out.push(format!("{} {s}->{t}: unknown point", op.name()));
                    continue;
                };
                let expected = kind.shift(ps.grading, self.degree + kind.steps(op.offset()));
                if pt.grading != expected {
                    out.push(format!(
                        "{} {s}->{t}: target grading {}, expected {}",
                        op.name(),
                        kind.format(pt.grading),
                        kind.format(expected)
                    ));
                }
            }
        }
        out
    }

    fn matrix(&self, op: CrossOp, src: &BoundaryFlowData, dst: &BoundaryFlowData) -> BitMatrix {
        let mut m = BitMatrix::zeros(dst.count(op.target()), src.count(op.source()));
        if let Some(pairs) = self.maps.get(&op) {
            for (s, t) in pairs {
                let (_, j) = src.local_index(s).expect("checked source id");
                let (_, i) = dst.local_index(t).expect("checked target id");
                m.toggle(i, j);
            }
        }
        m
    }

    /// Dual of a self-map: s and u swap roles and every operator is transposed.
    pub fn dualize(&self) -> Self {
        let mut out = Self::new(self.degree);
        for (&op, pairs) in &self.maps {
            for (s, t) in pairs {
                out.toggle(op.dual(), t, s);
            }
        }
        out
    }
}

/// The three chain maps induced by a cobordism, one per flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CobordismMaps {
    pub to: ChainMap,
    pub from: ChainMap,
    pub bar: ChainMap,
}

impl CobordismMaps {
    pub fn get(&self, flavor: Flavor) -> &ChainMap {
        match flavor {
            Flavor::To => &self.to,
            Flavor::From => &self.from,
            Flavor::Bar => &self.bar,
        }
    }

    pub fn induced(&self, flavor: Flavor) -> Result<InducedMap> {
        self.get(flavor).induced()
    }
}

fn component_failures(src: &BoundaryFlowData, dst: &BoundaryFlowData, r: &ChainMapReport) -> String {
    let kind_of = |data: &BoundaryFlowData, id: &str| data.point(id).map_or("?", |p| p.kind.code());
    let mut by_component: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (s, t) in &r.commutation_violations {
        let key = format!("{}->{}", kind_of(src, s), kind_of(dst, t));
        by_component.entry(key).or_default().push(format!("{s}->{t}"));
    }
    by_component
        .into_iter()
        .map(|(k, v)| format!("component {k} at {}", v.join(" ")))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Assembles `m̌`, `m̂`, `m̄` and verifies each is a chain map.
pub fn assemble_cobordism_maps(
    src: &BoundaryFlowData,
    dst: &BoundaryFlowData,
    x: &CrossOperators,
) -> Result<CobordismMaps> {
    use CrossOp::*;
    use FlowOp::*;
    if src.kind() != dst.kind() {
        return Err(Error::GradingMisalignment("source and target grading kinds differ".into()));
    }
    x.check_endpoints(src, dst)?;
    let bad = x.degree_violations(src, dst);
    if !bad.is_empty() {
        return Err(Error::DegreeViolation(bad.join("; ")));
    }
    let m = |op| x.matrix(op, src, dst);
    let ds = |op| src.op_matrix(op);
    let dd = |op| dst.op_matrix(op);
    let to_mat = BitMatrix::from_blocks(&[
        vec![m(Moo), &(&m(Muo) * &ds(BdSu)) + &(&dd(Duo) * &m(BmSu))],
        vec![m(Mos), &(&m(BmSs) + &(&m(Mus) * &ds(BdSu))) + &(&dd(Dus) * &m(BmSu))],
    ]);
    let from_mat = BitMatrix::from_blocks(&[
        vec![m(Moo), m(Muo)],
        vec![
            &(&m(BmSu) * &ds(Dos)) + &(&dd(BdSu) * &m(Mos)),
            &(&m(BmUu) + &(&m(BmSu) * &ds(Dus))) + &(&dd(BdSu) * &m(Mus)),
        ],
    ]);
    let bar_mat = BitMatrix::from_blocks(&[vec![m(BmSs), m(BmUs)], vec![m(BmSu), m(BmUu)]]);
    let mut maps = Vec::new();
    for (flavor, mat) in [(Flavor::To, to_mat), (Flavor::From, from_mat), (Flavor::Bar, bar_mat)] {
        let a = src.assemble_unchecked(flavor)?;
        let b = dst.assemble_unchecked(flavor)?;
        for (c, which) in [(&a, "source"), (&b, "target")] {
            let r = c.validate();
            if !r.passed() {
                return Err(Error::InvalidComplex(format!("{which} {flavor} complex: {}", r.summary())));
            }
        }
        let map = ChainMap::new(a, b, mat, x.degree)?;
        let r = map.validate();
        if !r.passed() {
            return Err(Error::NotAChainMap(format!(
                "{flavor} map: {}",
                component_failures(src, dst, &r)
            )));
        }
        maps.push(map);
    }
    let bar = maps.pop().unwrap();
    let from = maps.pop().unwrap();
    let to = maps.pop().unwrap();
    Ok(CobordismMaps { to, from, bar })
}

/// `g ∘ f` per flavor, with functoriality on homology checked.
pub fn compose_maps(f: &CobordismMaps, g: &CobordismMaps) -> Result<CobordismMaps> {
    let to = f.to.then(&g.to)?;
    let from = f.from.then(&g.from)?;
    let bar = f.bar.then(&g.bar)?;
    let out = CobordismMaps { to, from, bar };
    for flavor in Flavor::ALL {
        let lhs = out.induced(flavor)?;
        let rhs = f.induced(flavor)?.then(&g.induced(flavor)?)?;
        if lhs != rhs {
            return Err(Error::Mismatch(format!("{flavor}: induced map of the composite differs")));
        }
    }
    Ok(out)
}

/// Characteristic numbers of a cobordism `W: Y_in → Y_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyNumbers {
    pub c1_sq: Rational64,
    pub chi: i64,
    pub sigma: i64,
    pub b1_in: i64,
    pub b1_out: i64,
}

impl TopologyNumbers {
    pub fn new(c1_sq: Rational64, chi: i64, sigma: i64, b1_in: i64, b1_out: i64) -> Self {
        Self { c1_sq, chi, sigma, b1_in, b1_out }
    }

    pub fn cylinder(b1: i64) -> Self {
        Self::new(Rational64::from_integer(0), 0, 0, b1, b1)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TopologyNumbers) -> Result<TopologyNumbers> {
        if self.b1_out != next.b1_in {
            return Err(Error::Mismatch(format!(
                "outgoing b1 {} does not match incoming b1 {}",
                self.b1_out, next.b1_in
            )));
        }
        Ok(Self::new(
            self.c1_sq + next.c1_sq,
            self.chi + next.chi,
            self.sigma + next.sigma,
            self.b1_in,
            next.b1_out,
        ))
    }
}

/// `ι(W) = (χ + σ + b1_in − b1_out) / 2`.
pub fn iota(t: &TopologyNumbers) -> Result<i64> {
    let sum = t.chi + t.sigma + t.b1_in - t.b1_out;
    if sum % 2 != 0 {
        return Err(Error::Parity(format!("chi + sigma + b1_in - b1_out = {sum} is odd")));
    }
    Ok(sum / 2)
}

/// `c1²/4 − ι − σ/4`.
pub fn cobordism_map_degree(t: &TopologyNumbers) -> Result<Rational64> {
    Ok(t.c1_sq / 4 - Rational64::from_integer(iota(t)?) - Rational64::new(t.sigma, 4))
}

/// `−gr_z + c1²/4 − ι − σ/4`.
pub fn absolute_grading(gr_z: i64, t: &TopologyNumbers) -> Result<Rational64> {
    Ok(Rational64::from_integer(-gr_z) + cobordism_map_degree(t)?)
}

/// `(c1² − 2χ − 3σ) / 4`.
pub fn closed_dimension(c1_sq: Rational64, chi: i64, sigma: i64) -> Rational64 {
    (c1_sq - Rational64::from_integer(2 * chi + 3 * sigma)) / 4
}
