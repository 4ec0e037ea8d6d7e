//! Module structures on homology: F[U]-towers and the Frøyshov invariant,
//! the ring F[V][Q]/(Q³) and its three towers, correction terms, and the
//! characteristic-vector minimum ρ(Q) of a negative definite form.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::Rational64;

use crate::cobordism::assemble_cobordism_maps;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::flow::{BoundaryFlowData, Flavor};
use crate::gf2::{independent_subset, BitMatrix, BitVec};
use crate::grading::GradingKind;

type Blocks = BTreeMap<i64, BitMatrix>;

fn dim_of(dims: &BTreeMap<i64, usize>, g: i64) -> usize {
    dims.get(&g).copied().unwrap_or(0)
}

/// Fills in zero blocks and checks shapes of a homogeneous action.
fn normalize_action(
    name: &str,
    kind: GradingKind,
    dims: &BTreeMap<i64, usize>,
    blocks: Blocks,
    degree: i64,
) -> Result<Blocks> {
    for g in blocks.keys() {
        if !dims.contains_key(g) && !blocks[g].is_zero() {
            return Err(Error::Shape(format!("{name} block at grading {} has no source", kind.format(*g))));
        }
    }
    let mut out = BTreeMap::new();
    for (&g, &d) in dims {
        let t = kind.shift(g, degree);
        let td = dim_of(dims, t);
        let b = blocks.get(&g).cloned().unwrap_or_else(|| BitMatrix::zeros(td, d));
        if b.rows() != td || b.cols() != d {
            return Err(Error::Shape(format!(
                "{name} block at grading {} is {}x{}, expected {td}x{d}",
                kind.format(g),
                b.rows(),
                b.cols()
            )));
        }
        out.insert(g, b);
    }
    Ok(out)
}

/// Independent basis vectors per grading, checked against the dimensions.
fn normalize_image(
    kind: GradingKind,
    dims: &BTreeMap<i64, usize>,
    image: BTreeMap<i64, Vec<BitVec>>,
) -> Result<BTreeMap<i64, Vec<BitVec>>> {
    let mut out = BTreeMap::new();
    for (g, vecs) in image {
        let d = dim_of(dims, g);
        if let Some(v) = vecs.iter().find(|v| v.len() != d) {
            return Err(Error::Shape(format!(
                "i-image vector of length {} at grading {} of dimension {d}",
                v.len(),
                kind.format(g)
            )));
        }
        let keep: Vec<BitVec> = independent_subset(&vecs).into_iter().map(|k| vecs[k].clone()).collect();
        if !keep.is_empty() {
            out.insert(g, keep);
        }
    }
    Ok(out)
}

fn apply(blocks: &Blocks, g: i64, vecs: &[BitVec]) -> Vec<BitVec> {
    match blocks.get(&g) {
        Some(b) => vecs.iter().map(|v| b.mul_vec(v)).collect(),
        None => Vec::new(),
    }
}

fn span_rank(vecs: &[BitVec]) -> usize {
    independent_subset(vecs).len()
}

fn contains(basis: &[BitVec], len: usize, v: &BitVec) -> bool {
    if v.is_zero() {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    BitMatrix::from_columns(len, basis).solve(v).ok().flatten().is_some()
}

/// Checks that an action of the given degree maps the marked subspace into itself.
fn check_preserves(
    name: &str,
    kind: GradingKind,
    dims: &BTreeMap<i64, usize>,
    blocks: &Blocks,
    degree: i64,
    image: &BTreeMap<i64, Vec<BitVec>>,
) -> Result<()> {
    for (&g, vecs) in image {
        let t = kind.shift(g, degree);
        let target = image.get(&t).map_or(&[][..], Vec::as_slice);
        for v in apply(blocks, g, vecs) {
            if !contains(target, dim_of(dims, t), &v) {
                return Err(Error::Model(format!(
                    "{name} does not map the i-image in grading {} into the i-image",
                    kind.format(g)
                )));
            }
        }
    }
    Ok(())
}

/// Homology with a degree −2 action of U and the marked image of `i_*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UModule {
    pub kind: GradingKind,
    pub dims: BTreeMap<i64, usize>,
    /// Source grading → block of U.
    pub u: Blocks,
    /// Basis of the i-image, in coordinates of each graded piece.
    pub i_image: BTreeMap<i64, Vec<BitVec>>,
}

impl UModule {
    pub fn new(
        kind: GradingKind,
        dims: BTreeMap<i64, usize>,
        u: Blocks,
        i_image: BTreeMap<i64, Vec<BitVec>>,
    ) -> Result<Self> {
        kind.validate()?;
        let dims: BTreeMap<i64, usize> = dims.into_iter().filter(|&(_, d)| d > 0).map(|(g, d)| (kind.normalize(g), d)).collect();
        let u = normalize_action("U", kind, &dims, u, kind.steps(-2))?;
        let i_image = normalize_image(kind, &dims, i_image)?;
        check_preserves("U", kind, &dims, &u, kind.steps(-2), &i_image)?;
        Ok(Self { kind, dims, u, i_image })
    }

    /// U-action from the data's U-cap on the to-flavor, and the image of
    /// `i_*` from the bar flavor.
    pub fn from_flow(d: &BoundaryFlowData) -> Result<Self> {
        let cap = d
            .u_cap()
            .ok_or_else(|| Error::Model(format!("`{}` has no u_cap", d.name)))?;
        if cap.degree != d.kind().steps(-2) {
            return Err(Error::DegreeViolation(format!(
                "u_cap degree is {}, expected -2",
                d.kind().format(cap.degree)
            )));
        }
        let tri = d.triangle()?;
        let maps = assemble_cobordism_maps(d, d, cap)?;
        let u_star = maps.get(Flavor::To).induced_between(&tri.h_to, &tri.h_to)?;
        let mut i_image = BTreeMap::new();
        for (&g, block) in &tri.i_star.blocks {
            let cols = block.columns();
            let basis: Vec<BitVec> = independent_subset(&cols).into_iter().map(|k| cols[k].clone()).collect();
            if !basis.is_empty() {
                i_image.insert(g, basis);
            }
        }
        Self::new(d.kind(), tri.h_to.dims(), u_star.blocks, i_image)
    }

    pub fn regraded(&self, steps: i64) -> Self {
        let delta = self.kind.steps(steps);
        let sh = |g: i64| self.kind.shift(g, delta);
        Self {
            kind: self.kind,
            dims: self.dims.iter().map(|(&g, &d)| (sh(g), d)).collect(),
            u: self.u.iter().map(|(&g, b)| (sh(g), b.clone())).collect(),
            i_image: self.i_image.iter().map(|(&g, v)| (sh(g), v.clone())).collect(),
        }
    }

    pub fn u_rank(&self, grading: i64) -> usize {
        self.u.get(&grading).map_or(0, BitMatrix::rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TowerAnomaly {
    Empty,
    /// Modular gradings carry no bottom.
    Modular,
    MultipleGenerators { grading: i64, dim: usize },
    MissingRung { grading: i64 },
    Parity { grading: i64 },
    UNotSurjective { grading: i64 },
}

impl fmt::Display for TowerAnomaly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerAnomaly::Empty => write!(f, "i-image is empty"),
            TowerAnomaly::Modular => write!(f, "towers need integer or rational gradings"),
            TowerAnomaly::MultipleGenerators { grading, dim } => {
                write!(f, "i-image has dimension {dim} in grading {grading}")
            }
            TowerAnomaly::MissingRung { grading } => write!(f, "missing rung at grading {grading}"),
            TowerAnomaly::Parity { grading } => write!(f, "grading {grading} has the wrong parity"),
            TowerAnomaly::UNotSurjective { grading } => {
                write!(f, "U does not map grading {grading} onto the rung below")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerReport {
    pub anomalies: Vec<TowerAnomaly>,
    /// Gradings of the i-image, ascending.
    pub rungs: Vec<i64>,
}

impl TowerReport {
    pub fn passed(&self) -> bool {
        self.anomalies.is_empty()
    }

    pub fn bottom(&self) -> Option<i64> {
        self.rungs.first().copied()
    }
}

/// Checks that the i-image is one U-tower: one dimension per rung, rungs two
/// steps apart, U mapping each rung onto the one below. The top of the
/// window may stop anywhere.
pub fn verify_u_tower(m: &UModule) -> TowerReport {
    let rungs: Vec<i64> = m.i_image.keys().copied().collect();
    let mut anomalies = Vec::new();
    if m.kind.is_modular() {
        anomalies.push(TowerAnomaly::Modular);
        return TowerReport { anomalies, rungs };
    }
    if rungs.is_empty() {
        anomalies.push(TowerAnomaly::Empty);
        return TowerReport { anomalies, rungs };
    }
    let step = m.kind.steps(2);
    for (&g, basis) in &m.i_image {
        if basis.len() > 1 {
            anomalies.push(TowerAnomaly::MultipleGenerators { grading: g, dim: basis.len() });
        }
    }
    for pair in rungs.windows(2) {
        let gap = pair[1] - pair[0];
        if gap % step != 0 {
            anomalies.push(TowerAnomaly::Parity { grading: pair[1] });
        } else if gap > step {
            anomalies.push(TowerAnomaly::MissingRung { grading: pair[0] + step });
        }
    }
    for &g in rungs.iter().skip(1) {
        if !m.i_image.contains_key(&(g - step)) {
            continue;
        }
        let images = apply(&m.u, g, &m.i_image[&g]);
        if span_rank(&images) < m.i_image[&(g - step)].len() {
            anomalies.push(TowerAnomaly::UNotSurjective { grading: g });
        }
    }
    TowerReport { anomalies, rungs }
}

/// `h = −(bottom grading of the i-image)/2`.
pub fn froyshov(m: &UModule) -> Result<Rational64> {
    let report = verify_u_tower(m);
    if !report.passed() {
        let msg: Vec<String> = report.anomalies.iter().map(ToString::to_string).collect();
        return Err(Error::NotATower(msg.join("; ")));
    }
    let bottom = report.bottom().expect("nonempty tower");
    Ok(Rational64::new(-bottom, 2 * m.kind.unit()))
}

/// `h(Y0) ≥ h(Y1) + ρ(Q)`.
pub fn check_froyshov_inequality(h0: Rational64, h1: Rational64, rho: Rational64) -> bool {
    h0 >= h1 + rho
}

/// Homology as a module over F[V][Q]/(Q³) with deg V = −4, deg Q = −1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RModule {
    pub kind: GradingKind,
    pub dims: BTreeMap<i64, usize>,
    pub v: Blocks,
    pub q: Blocks,
    pub i_image: BTreeMap<i64, Vec<BitVec>>,
}

fn compose_blocks(kind: GradingKind, first: &Blocks, d1: i64, second: &Blocks) -> Blocks {
    first
        .iter()
        .filter_map(|(&g, b)| second.get(&kind.shift(g, d1)).map(|s| (g, s * b)))
        .collect()
}

impl RModule {
    pub fn new(
        kind: GradingKind,
        dims: BTreeMap<i64, usize>,
        v: Blocks,
        q: Blocks,
        i_image: BTreeMap<i64, Vec<BitVec>>,
    ) -> Result<Self> {
        kind.validate()?;
        let dims: BTreeMap<i64, usize> = dims.into_iter().filter(|&(_, d)| d > 0).map(|(g, d)| (kind.normalize(g), d)).collect();
        let dv = kind.steps(-4);
        let dq = kind.steps(-1);
        let v = normalize_action("V", kind, &dims, v, dv)?;
        let q = normalize_action("Q", kind, &dims, q, dq)?;
        let q2 = compose_blocks(kind, &q, dq, &q);
        let q3 = compose_blocks(kind, &q2, 2 * dq, &q);
        if let Some((g, _)) = q3.iter().find(|(_, b)| !b.is_zero()) {
            return Err(Error::Model(format!("Q^3 is nonzero on grading {}", kind.format(*g))));
        }
        let vq = compose_blocks(kind, &q, dq, &v);
        let qv = compose_blocks(kind, &v, dv, &q);
        for (g, a) in &vq {
            if qv.get(g).is_some_and(|b| a != b) {
                return Err(Error::Model(format!("V and Q do not commute on grading {}", kind.format(*g))));
            }
        }
        let i_image = normalize_image(kind, &dims, i_image)?;
        check_preserves("V", kind, &dims, &v, dv, &i_image)?;
        check_preserves("Q", kind, &dims, &q, dq, &i_image)?;
        Ok(Self { kind, dims, v, q, i_image })
    }

    pub fn regraded(&self, steps: i64) -> Self {
        let delta = self.kind.steps(steps);
        let sh = |g: i64| self.kind.shift(g, delta);
        Self {
            kind: self.kind,
            dims: self.dims.iter().map(|(&g, &d)| (sh(g), d)).collect(),
            v: self.v.iter().map(|(&g, b)| (sh(g), b.clone())).collect(),
            q: self.q.iter().map(|(&g, b)| (sh(g), b.clone())).collect(),
            i_image: self.i_image.iter().map(|(&g, v)| (sh(g), v.clone())).collect(),
        }
    }

    /// Span of `Q(x)` for `x` in `layer`, by grading.
    fn q_image(&self, layer: &BTreeMap<i64, Vec<BitVec>>) -> BTreeMap<i64, Vec<BitVec>> {
        let dq = self.kind.steps(-1);
        let mut out = BTreeMap::new();
        for (&g, vecs) in layer {
            let imgs: Vec<BitVec> = apply(&self.q, g, vecs);
            let keep: Vec<BitVec> = independent_subset(&imgs).into_iter().map(|k| imgs[k].clone()).collect();
            if !keep.is_empty() {
                out.insert(self.kind.shift(g, dq), keep);
            }
        }
        out
    }
}

/// Bottom gradings `(a, b, c)` of the three towers of the i-image: `a` of
/// `Q²I`, `b` of `QI/Q²I`, `c` of `I/QI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TowerTriple {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn layer_bottom(name: &str, dims: &BTreeMap<i64, usize>) -> Result<i64> {
    let rungs: Vec<(i64, usize)> = dims.iter().filter(|(_, &d)| d > 0).map(|(&g, &d)| (g, d)).collect();
    let Some(&(bottom, _)) = rungs.first() else {
        return Err(Error::Decomposition(format!("the {name} tower is empty")));
    };
    if let Some(&(g, d)) = rungs.iter().find(|(_, d)| *d > 1) {
        return Err(Error::Decomposition(format!("the {name} tower has dimension {d} in grading {g}")));
    }
    for pair in rungs.windows(2) {
        if pair[1].0 - pair[0].0 != 4 {
            return Err(Error::Decomposition(format!(
                "the {name} tower jumps from grading {} to {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    Ok(bottom)
}

pub fn r_tower_decompose(m: &RModule) -> Result<TowerTriple> {
    if m.kind != GradingKind::Integer {
        return Err(Error::InvalidGrading("tower decomposition needs integer gradings".into()));
    }
    let qi = m.q_image(&m.i_image);
    if qi.is_empty() {
        return Err(Error::Decomposition("Q vanishes on the i-image".into()));
    }
    let q2i = m.q_image(&qi);
    let gradings: Vec<i64> = m.i_image.keys().copied().collect();
    let len = |map: &BTreeMap<i64, Vec<BitVec>>, g: i64| map.get(&g).map_or(0, Vec::len);
    let top: BTreeMap<i64, usize> = gradings.iter().map(|&g| (g, len(&m.i_image, g) - len(&qi, g))).collect();
    let middle: BTreeMap<i64, usize> = gradings.iter().map(|&g| (g, len(&qi, g) - len(&q2i, g))).collect();
    let bottom: BTreeMap<i64, usize> = gradings.iter().map(|&g| (g, len(&q2i, g))).collect();
    let a = layer_bottom("Q^2 I", &bottom)?;
    let b = layer_bottom("QI/Q^2 I", &middle)?;
    let c = layer_bottom("I/QI", &top)?;
    if (b - 1 - a).rem_euclid(4) != 0 || (c - 1 - b).rem_euclid(4) != 0 {
        return Err(Error::Decomposition(format!("towers at {a}, {b}, {c} are not linked by Q")));
    }
    Ok(TowerTriple { a, b, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionTerms {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl CorrectionTerms {
    pub fn new(alpha: i64, beta: i64, gamma: i64) -> Self {
        Self { alpha, beta, gamma }
    }
}

impl fmt::Display for CorrectionTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.alpha, self.beta, self.gamma)
    }
}

/// `a = 2α`, `b = 2β + 1`, `c = 2γ + 2`.
pub fn correction_terms(a: i64, b: i64, c: i64) -> Result<CorrectionTerms> {
    if a.rem_euclid(2) != 0 || b.rem_euclid(2) != 1 || c.rem_euclid(2) != 0 {
        return Err(Error::Parity(format!("({a}, {b}, {c}) must be (even, odd, even)")));
    }
    let t = CorrectionTerms::new(a / 2, (b - 1) / 2, (c - 2) / 2);
    if !(t.alpha >= t.beta && t.beta >= t.gamma) {
        return Err(Error::Ordering(format!("alpha >= beta >= gamma fails for {t}")));
    }
    Ok(t)
}

/// Terms of the orientation reversal: `(−γ, −β, −α)`.
pub fn duality_terms(t: CorrectionTerms) -> CorrectionTerms {
    CorrectionTerms::new(-t.gamma, -t.beta, -t.alpha)
}

pub fn rokhlin_lift_check(t: CorrectionTerms, rokhlin_bit: u8) -> Result<bool> {
    if rokhlin_bit > 1 {
        return Err(Error::InvalidQuery(format!("Rokhlin bit must be 0 or 1, got {rokhlin_bit}")));
    }
    let bit = i64::from(rokhlin_bit);
    Ok([t.alpha, t.beta, t.gamma].iter().all(|x| x.rem_euclid(2) == bit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderTwoVerdict {
    /// β vanishes, so the Rokhlin invariant is 0.
    RokhlinZero,
    /// An order-two class would need β = −β, which fails for this β.
    Contradiction { beta: i64 },
}

impl OrderTwoVerdict {
    pub fn rokhlin(self) -> Option<u8> {
        match self {
            OrderTwoVerdict::RokhlinZero => Some(0),
            OrderTwoVerdict::Contradiction { .. } => None,
        }
    }
}

/// For a class of order two, `β(Y) = β(−Y) = −β(Y)` forces `β = 0`, and β
/// reduces to the Rokhlin invariant.
pub fn order_two_argument(beta_y: i64, beta_neg_y: i64) -> Result<OrderTwoVerdict> {
    if beta_neg_y != -beta_y {
        return Err(Error::Antisymmetry { beta_y, beta_neg_y });
    }
    if beta_y == -beta_y {
        Ok(OrderTwoVerdict::RokhlinZero)
    } else {
        Ok(OrderTwoVerdict::Contradiction { beta: beta_y })
    }
}

/// `x1 ≥ x0 + b2/8` for each of α, β, γ, compared as `8·x1 ≥ 8·x0 + b2`.
pub fn check_pin2_inequalities(t0: CorrectionTerms, t1: CorrectionTerms, b2: u64) -> bool {
    let b2 = b2 as i128;
    [(t0.alpha, t1.alpha), (t0.beta, t1.beta), (t0.gamma, t1.gamma)]
        .iter()
        .all(|&(x0, x1)| 8 * x1 as i128 >= 8 * x0 as i128 + b2)
}

/// A symmetric integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    entries: Vec<Vec<i64>>,
}

impl QuadraticForm {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Shape("quadratic form has rank 0".into()));
        }
        if let Some(r) = entries.iter().position(|row| row.len() != n) {
            return Err(Error::Shape(format!("row {r} has length {}, expected {n}", entries[r].len())));
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, &x) in row.iter().enumerate().take(i) {
                if x != entries[j][i] {
                    return Err(Error::Shape(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn diagonal(values: &[i64]) -> Self {
        let n = values.len();
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { values[i] } else { 0 }).collect()).collect();
        Self { entries }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn negated(&self) -> Self {
        Self { entries: self.entries.iter().map(|r| r.iter().map(|x| -x).collect()).collect() }
    }

    pub fn value(&self, x: &[i64]) -> i64 {
        let mut total = 0;
        for (i, row) in self.entries.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            let dot: i64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            total += x[i] * dot;
        }
        total
    }

    /// Leading principal minors, exactly, by fraction-free elimination.
    /// Stops after the first zero minor.
    pub fn leading_minors(&self) -> Vec<i128> {
        let n = self.rank();
        let mut m: Vec<Vec<i128>> = self.entries.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
        let mut prev: i128 = 1;
        let mut minors = Vec::with_capacity(n);
        for k in 0..n {
            let pivot = m[k][k];
            minors.push(pivot);
            if pivot == 0 {
                break;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) / prev;
                }
            }
            prev = pivot;
        }
        minors
    }

    /// Negative definite iff the k-th leading minor has sign (−1)^k.
    pub fn check_negative_definite(&self) -> Result<()> {
        for (k, d) in self.leading_minors().into_iter().enumerate() {
            let wanted = if k % 2 == 0 { -1 } else { 1 };
            if d.signum() != wanted {
                return Err(Error::NotNegativeDefinite(format!("leading minor of order {} is {d}", k + 1)));
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of `−Q`.
    pub fn min_eigenvalue_of_negation(&self) -> f64 {
        let n = self.rank();
        let m = DMatrix::from_fn(n, n, |i, j| -(self.entries[i][j] as f64));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// 0/1 representatives of the characteristic classes: solutions of
    /// `Q r ≡ diag(Q) (mod 2)`.
    pub fn characteristic_classes(&self) -> Result<Vec<Vec<i64>>> {
        let n = self.rank();
        let a = BitMatrix::from_entries(
            n,
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.entries[i][j].rem_euclid(2) == 1),
        );
        let rhs = BitVec::from_ones(n, (0..n).filter(|&i| self.entries[i][i].rem_euclid(2) == 1));
        let particular = a
            .solve(&rhs)?
            .ok_or_else(|| Error::InvalidQuery("no characteristic vector mod 2".into()))?;
        let kernel = a.kernel_basis();
        if kernel.len() > 16 {
            return Err(Error::InvalidQuery(format!("{} characteristic classes mod 2 is too many", 1u64 << kernel.len())));
        }
        let mut out = Vec::new();
        for mask in 0u32..(1 << kernel.len()) {
            let mut r = particular.clone();
            for (k, v) in kernel.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    r.xor_assign(v);
                }
            }
            out.push((0..n).map(|i| i64::from(r.get(i))).collect());
        }
        out.sort();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoResult {
    pub rho: Rational64,
    /// Minimum of `|Q(ξ)|` over characteristic ξ.
    pub min_norm: i64,
    pub witness: Vec<i64>,
    /// Sup-norm radius searched.
    pub radius: i64,
}

/// Smallest `m ≥ 0` with `λ (m + 1)² > value`, so any ξ with `|ξ|∞ > m` has
/// `|Q(ξ)| > value`.
fn certified_radius(value: i64, lambda: f64) -> i64 {
    // smallest m with λ(m+1)² ≥ value: outside the box no vector is shorter
    let target = value as f64 * (1.0 - 1e-9) - 1e-9;
    let mut m = 0;
    while lambda * ((m + 1) as f64).powi(2) < target {
        m += 1;
    }
    m
}

fn search_class(q: &QuadraticForm, class: &[i64], first: i64, radius: i64) -> Option<(i64, Vec<i64>)> {
    let n = q.rank();
    let values: Vec<Vec<i64>> = class
        .iter()
        .map(|&r| (-radius..=radius).filter(|x| (x - r).rem_euclid(2) == 0).collect())
        .collect();
    if values.iter().any(Vec::is_empty) {
        return None;
    }
    let mut idx = vec![0usize; n];
    let mut x: Vec<i64> = values.iter().map(|v| v[0]).collect();
    x[0] = first;
    let mut best: Option<(i64, Vec<i64>)> = None;
    loop {
        let norm = -q.value(&x);
        if best.as_ref().is_none_or(|(b, w)| norm < *b || (norm == *b && x < *w)) {
            best = Some((norm, x.clone()));
        }
        let mut k = n - 1;
        loop {
            if k == 0 {
                return best;
            }
            idx[k] += 1;
            if idx[k] < values[k].len() {
                x[k] = values[k][idx[k]];
                break;
            }
            idx[k] = 0;
            x[k] = values[k][0];
            k -= 1;
        }
    }
}

/// `ρ(Q) = (rank − min |Q(ξ)|)/8` over characteristic ξ. Without `box_radius`
/// the search radius is derived from the smallest eigenvalue of −Q; with it,
/// the given box is searched and must be certified sufficient.
pub fn rho(q: &QuadraticForm, box_radius: Option<i64>, exec: Exec) -> Result<RhoResult> {
    q.check_negative_definite()?;
    let lambda = q.min_eigenvalue_of_negation();
    let classes = q.characteristic_classes()?;
    let start = classes.iter().map(|c| -q.value(c)).min().expect("at least one class");
    let radius = match box_radius {
        Some(r) if r < 1 => return Err(Error::InvalidQuery(format!("box radius must be at least 1, got {r}"))),
        Some(r) => r,
        None => certified_radius(start, lambda) + 1,
    };
    let tasks: Vec<(usize, i64)> = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (-radius..=radius).filter(move |x| (x - c[0]).rem_euclid(2) == 0).map(move |x| (ci, x)))
        .collect();
    let found = exec.map(&tasks, |&(ci, first)| search_class(q, &classes[ci], first, radius));
    let (min_norm, witness) = found
        .into_iter()
        .flatten()
        .min()
        .expect("the box contains the class representatives");
    let needed = certified_radius(min_norm, lambda);
    if needed > radius {
        return Err(Error::InsufficientBox { radius, needed });
    }
    let n = q.rank() as i64;
    Ok(RhoResult { rho: Rational64::new(n - min_norm, 8), min_norm, witness, radius })
}

/// The negative E8 form.
pub fn minus_e8() -> QuadraticForm {
    // Dynkin diagram: chain 0-1-2-3-4-5-6 with 7 attached to 4
    let mut e = vec![vec![0i64; 8]; 8];
    for (i, row) in e.iter_mut().enumerate() {
        row[i] = -2;
    }
    for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)] {
        e[a][b] = 1;
        e[b][a] = 1;
    }
    QuadraticForm { entries: e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gen_s3_tower, pin2_s3_module};

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn tower(bottom: i64, rungs: usize) -> UModule {
        let dims: BTreeMap<i64, usize> = (0..rungs).map(|k| (bottom + 2 * k as i64, 1)).collect();
        let u: Blocks = dims.keys().skip(1).map(|&g| (g, BitMatrix::identity(1))).collect();
        let image = dims.keys().map(|&g| (g, vec![BitVec::unit(1, 0)])).collect();
        UModule::new(GradingKind::Integer, dims, u, image).unwrap()
    }

    #[test]
    fn s3_tower_has_h_zero() {
        for n in 1..=4 {
            let m = UModule::from_flow(&gen_s3_tower(n, n)).unwrap();
            assert!(verify_u_tower(&m).passed());
            assert_eq!(froyshov(&m), Ok(r(0)));
        }
    }

    #[test]
    fn shifted_towers() {
        assert_eq!(froyshov(&tower(2, 3)), Ok(r(-1)));
        let m = tower(0, 4);
        for k in -3..=3 {
            assert_eq!(froyshov(&m.regraded(2 * k)), Ok(r(-k)));
        }
        let dual = gen_s3_tower(3, 3).regraded(2).dualize().unwrap();
        assert_eq!(froyshov(&UModule::from_flow(&dual).unwrap()), Ok(r(1)));
    }

    #[test]
    fn tower_anomalies() {
        let dims = BTreeMap::from([(0, 1), (2, 1)]);
        let image = dims.keys().map(|&g| (g, vec![BitVec::unit(1, 0)])).collect();
        let zero_u = UModule::new(GradingKind::Integer, dims, BTreeMap::new(), image).unwrap();
        assert_eq!(verify_u_tower(&zero_u).anomalies, vec![TowerAnomaly::UNotSurjective { grading: 2 }]);
        assert!(matches!(froyshov(&zero_u), Err(Error::NotATower(_))));

        let dims = BTreeMap::from([(0, 1), (4, 1)]);
        let image = dims.keys().map(|&g| (g, vec![BitVec::unit(1, 0)])).collect();
        let gap = UModule::new(GradingKind::Integer, dims, BTreeMap::new(), image).unwrap();
        assert_eq!(verify_u_tower(&gap).anomalies, vec![TowerAnomaly::MissingRung { grading: 2 }]);

        let dims = BTreeMap::from([(0, 2)]);
        let image = BTreeMap::from([(0, vec![BitVec::unit(2, 0), BitVec::unit(2, 1)])]);
        let wide = UModule::new(GradingKind::Integer, dims, BTreeMap::new(), image).unwrap();
        assert_eq!(verify_u_tower(&wide).anomalies, vec![TowerAnomaly::MultipleGenerators { grading: 0, dim: 2 }]);
    }

    #[test]
    fn u_must_preserve_the_i_image() {
        let dims = BTreeMap::from([(0, 1), (2, 1)]);
        let u = BTreeMap::from([(2, BitMatrix::identity(1))]);
        let image = BTreeMap::from([(2, vec![BitVec::unit(1, 0)])]);
        assert!(matches!(UModule::new(GradingKind::Integer, dims, u, image), Err(Error::Model(_))));
    }

    #[test]
    fn froyshov_inequality_examples() {
        assert!(check_froyshov_inequality(r(0), r(-1), r(1)));
        assert!(!check_froyshov_inequality(r(0), r(0), r(1)));
        assert!(check_froyshov_inequality(r(3), r(3), r(0)));
    }

    #[test]
    fn pin2_decomposition() {
        let m = pin2_s3_module(3).unwrap();
        let t = r_tower_decompose(&m).unwrap();
        assert_eq!((t.a, t.b, t.c), (0, 1, 2));
        let t = r_tower_decompose(&m.regraded(8)).unwrap();
        assert_eq!((t.a, t.b, t.c), (8, 9, 10));
        assert_eq!(correction_terms(0, 1, 2), Ok(CorrectionTerms::new(0, 0, 0)));
    }

    #[test]
    fn vanishing_q_is_not_decomposable() {
        let m = pin2_s3_module(2).unwrap();
        let flat = RModule::new(m.kind, m.dims.clone(), m.v.clone(), BTreeMap::new(), m.i_image.clone()).unwrap();
        assert!(matches!(r_tower_decompose(&flat), Err(Error::Decomposition(_))));
    }

    #[test]
    fn q_cubed_must_vanish() {
        let dims: BTreeMap<i64, usize> = (0..4).map(|g| (g, 1)).collect();
        let q: Blocks = (1..4).map(|g| (g, BitMatrix::identity(1))).collect();
        let err = RModule::new(GradingKind::Integer, dims, BTreeMap::new(), q, BTreeMap::new());
        assert!(matches!(err, Err(Error::Model(_))));
    }

    #[test]
    fn correction_term_examples() {
        assert_eq!(correction_terms(2, 3, 4), Ok(CorrectionTerms::new(1, 1, 1)));
        assert!(matches!(correction_terms(0, 2, 2), Err(Error::Parity(_))));
        assert!(matches!(correction_terms(0, 3, 2), Err(Error::Ordering(_))));
        let t = CorrectionTerms::new(2, 1, 0);
        assert_eq!(duality_terms(t), CorrectionTerms::new(0, -1, -2));
        assert_eq!(duality_terms(duality_terms(t)), t);
        assert_eq!(rokhlin_lift_check(CorrectionTerms::new(0, 0, 0), 0), Ok(true));
        assert_eq!(rokhlin_lift_check(CorrectionTerms::new(1, 1, 1), 1), Ok(true));
        assert_eq!(rokhlin_lift_check(CorrectionTerms::new(1, 0, 0), 0), Ok(false));
        assert_eq!(rokhlin_lift_check(CorrectionTerms::new(1, 0, 0), 1), Ok(false));
    }

    #[test]
    fn order_two_examples() {
        assert_eq!(order_two_argument(0, 0).unwrap().rokhlin(), Some(0));
        assert_eq!(order_two_argument(3, -3), Ok(OrderTwoVerdict::Contradiction { beta: 3 }));
        assert_eq!(order_two_argument(0, 1), Err(Error::Antisymmetry { beta_y: 0, beta_neg_y: 1 }));
    }

    #[test]
    fn pin2_inequality_examples() {
        let z = CorrectionTerms::new(0, 0, 0);
        assert!(check_pin2_inequalities(z, z, 0));
        assert!(check_pin2_inequalities(z, CorrectionTerms::new(1, 1, 1), 8));
        assert!(!check_pin2_inequalities(z, z, 8));
    }

    #[test]
    fn definiteness_via_minors() {
        assert!(minus_e8().check_negative_definite().is_ok());
        assert!(QuadraticForm::diagonal(&[-1, -1, -1]).check_negative_definite().is_ok());
        assert!(matches!(
            QuadraticForm::diagonal(&[-1, 1]).check_negative_definite(),
            Err(Error::NotNegativeDefinite(_))
        ));
        assert!(QuadraticForm::new(vec![vec![-1, 2], vec![2, -1]]).unwrap().check_negative_definite().is_err());
        assert!(QuadraticForm::new(vec![vec![-1, 2], vec![1, -1]]).is_err());
        assert_eq!(minus_e8().leading_minors().last(), Some(&1));
    }

    #[test]
    fn rho_examples() {
        let one = rho(&QuadraticForm::diagonal(&[-1]), None, Exec::Sequential).unwrap();
        assert_eq!((one.rho, one.min_norm), (r(0), 1));
        for n in 1..=8 {
            let q = QuadraticForm::diagonal(&vec![-1; n]);
            assert_eq!(rho(&q, None, Exec::default()).unwrap().rho, r(0), "n = {n}");
        }
        let e8 = rho(&minus_e8(), None, Exec::default()).unwrap();
        assert_eq!((e8.rho, e8.min_norm), (r(1), 0));
        // h(S3) = 0 ≥ h(P) + 1 forces h(P) ≤ -1
        assert!(check_froyshov_inequality(r(0), r(-1), e8.rho));
        assert!(!check_froyshov_inequality(r(0), r(0), e8.rho));
    }

    #[test]
    fn rho_of_non_unimodular_forms() {
        // -2 I_2: every even vector is characteristic, minimum 0
        let q = QuadraticForm::diagonal(&[-2, -2]);
        assert_eq!(rho(&q, None, Exec::Sequential).unwrap().rho, Rational64::new(2, 8));
        // [[-2,1],[1,-1]] is unimodular and odd, so equivalent to -I_2
        let q = QuadraticForm::new(vec![vec![-2, 1], vec![1, -1]]).unwrap();
        let res = rho(&q, None, Exec::Sequential).unwrap();
        assert_eq!((res.min_norm, res.rho), (2, r(0)));
    }

    #[test]
    fn rho_box_certification() {
        let q = QuadraticForm::diagonal(&[-1; 4]);
        assert_eq!(rho(&q, Some(1), Exec::Sequential).unwrap().min_norm, 4);
        let e8 = rho(&minus_e8(), Some(1), Exec::Sequential).unwrap();
        assert_eq!(e8.min_norm, 0);
        // a skewed form where radius 1 misses the minimum
        let q = QuadraticForm::new(vec![vec![-5, 4], vec![4, -5]]).unwrap();
        let full = rho(&q, None, Exec::Sequential).unwrap();
        assert!(full.radius >= 1);
        match rho(&q, Some(1), Exec::Sequential) {
            Ok(res) => assert_eq!(res.min_norm, full.min_norm),
            Err(Error::InsufficientBox { radius, needed }) => assert!(needed > radius),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn rho_rejects_indefinite_forms() {
        let q = QuadraticForm::diagonal(&[-1, 1]);
        assert!(matches!(rho(&q, None, Exec::Sequential), Err(Error::NotNegativeDefinite(_))));
    }
}
