//! Graded chain complexes over F2: validation, homology with explicit
//! representatives, chain maps and their induced maps, duals, invariant
//! subcomplexes of involutions and exactness checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf2::{independent_subset, BitMatrix, BitVec};
use crate::grading::GradingKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub id: String,
    /// Numerator in the complex's grading kind.
    pub grading: i64,
}

impl Generator {
    pub fn new(id: impl Into<String>, grading: i64) -> Self {
        Self { id: id.into(), grading }
    }
}

/// A finitely generated graded complex. Column `j` of the differential is
/// the boundary of generator `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedComplex {
    kind: GradingKind,
    generators: Vec<Generator>,
    differential: BitMatrix,
    degree: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComplexReport {
    /// `(source id, target id)` entries of the differential with the wrong degree.
    pub degree_violations: Vec<(String, String)>,
    /// `(source id, target id)` entries of `∂∘∂` that are nonzero.
    pub square_violations: Vec<(String, String)>,
}

impl ComplexReport {
    pub fn passed(&self) -> bool {
        self.degree_violations.is_empty() && self.square_violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for (s, t) in &self.degree_violations {
            parts.push(format!("degree {s}->{t}"));
        }
        for (s, t) in &self.square_violations {
            parts.push(format!("d^2 {s}->{t}"));
        }
        parts.join(", ")
    }
}

impl GradedComplex {
    /// Differential of degree −1 (one integer step down).
    pub fn new(kind: GradingKind, generators: Vec<Generator>, differential: BitMatrix) -> Result<Self> {
        let degree = kind.steps(-1);
        Self::with_degree(kind, generators, differential, degree)
    }

    pub fn with_degree(
        kind: GradingKind,
        mut generators: Vec<Generator>,
        differential: BitMatrix,
        degree: i64,
    ) -> Result<Self> {
        kind.validate()?;
        let n = generators.len();
        if differential.rows() != n || differential.cols() != n {
            return Err(Error::Shape(format!(
                "differential is {}x{} for {n} generators",
                differential.rows(),
                differential.cols()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for g in &mut generators {
            if !seen.insert(g.id.clone()) {
                return Err(Error::DuplicateId(g.id.clone()));
            }
            g.grading = kind.normalize(g.grading);
        }
        Ok(Self { kind, generators, differential, degree: kind.normalize(degree) })
    }

    /// Builds a complex from `(source id, target id)` pairs of the differential.
    pub fn from_pairs(kind: GradingKind, generators: Vec<Generator>, pairs: &[(&str, &str)]) -> Result<Self> {
        let index: BTreeMap<&str, usize> =
            generators.iter().enumerate().map(|(i, g)| (g.id.as_str(), i)).collect();
        let mut d = BitMatrix::zeros(generators.len(), generators.len());
        for (s, t) in pairs {
            let si = *index.get(s).ok_or_else(|| Error::UnknownId(s.to_string()))?;
            let ti = *index.get(t).ok_or_else(|| Error::UnknownId(t.to_string()))?;
            d.toggle(ti, si);
        }
        let gens = generators.clone();
        Self::new(kind, gens, d)
    }

    pub fn kind(&self) -> GradingKind {
        self.kind
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn differential(&self) -> &BitMatrix {
        &self.differential
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    /// Generator indices grouped by grading.
    pub fn grading_groups(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, g) in self.generators.iter().enumerate() {
            groups.entry(g.grading).or_default().push(i);
        }
        groups
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.grading_groups().into_iter().map(|(g, v)| (g, v.len())).collect()
    }

    pub fn validate(&self) -> ComplexReport {
        let mut report = ComplexReport::default();
        for (t, s) in self.differential.nonzeros() {
            if self.generators[t].grading != self.kind.shift(self.generators[s].grading, self.degree) {
                report
                    .degree_violations
                    .push((self.generators[s].id.clone(), self.generators[t].id.clone()));
            }
        }
        let square = &self.differential * &self.differential;
        for (t, s) in square.nonzeros() {
            report
                .square_violations
                .push((self.generators[s].id.clone(), self.generators[t].id.clone()));
        }
        report
    }

    fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidComplex(report.summary()))
        }
    }

    pub fn homology(&self) -> Result<HomologyResult> {
        self.homology_with(Exec::default())
    }

    pub fn homology_with(&self, exec: Exec) -> Result<HomologyResult> {
        self.require_valid()?;
        let groups: Vec<(i64, Vec<usize>)> = self.grading_groups().into_iter().collect();
        let by_grading: BTreeMap<i64, Vec<usize>> = groups.iter().cloned().collect();
        let n = self.len();
        let pieces = exec.map(&groups, |(g, members)| {
            let target = self.kind.shift(*g, self.degree);
            let target_members = by_grading.get(&target).cloned().unwrap_or_default();
            let block = self.differential.submatrix(&target_members, members);
            let cycles: Vec<BitVec> = block
                .kernel_basis()
                .iter()
                .map(|k| BitVec::from_ones(n, k.iter_ones().map(|a| members[a])))
                .collect();
            // boundaries into g come from grading g - degree
            let source = self.kind.shift(*g, -self.degree);
            let incoming: Vec<BitVec> = by_grading
                .get(&source)
                .map(|src| src.iter().map(|&j| self.differential.column(j)).collect())
                .unwrap_or_default();
            let boundaries: Vec<BitVec> =
                independent_subset(&incoming).into_iter().map(|k| incoming[k].clone()).collect();
            let mut spanning = boundaries.clone();
            spanning.extend(cycles.iter().cloned());
            let representatives: Vec<BitVec> = independent_subset(&spanning)
                .into_iter()
                .filter(|&k| k >= boundaries.len())
                .map(|k| spanning[k].clone())
                .collect();
            (
                *g,
                HomologyPiece { generators: members.clone(), cycles_dim: cycles.len(), boundaries, representatives },
            )
        });
        Ok(HomologyResult { kind: self.kind, len: n, pieces: pieces.into_iter().collect() })
    }

    /// Transposed differential with negated gradings. Compose with
    /// [`GradedComplex::regraded`] for affine grading conventions.
    pub fn dualize(&self) -> Self {
        let generators = self
            .generators
            .iter()
            .map(|g| Generator::new(g.id.clone(), self.kind.normalize(-g.grading)))
            .collect();
        Self {
            kind: self.kind,
            generators,
            differential: self.differential.transpose(),
            degree: self.degree,
        }
    }

    /// All gradings shifted by `delta` numerator units.
    pub fn regraded(&self, delta: i64) -> Self {
        let mut out = self.clone();
        for g in &mut out.generators {
            g.grading = self.kind.shift(g.grading, delta);
        }
        out
    }

    /// Subcomplex of vectors fixed by `inv`.
    pub fn invariant_subcomplex(&self, inv: &Involution) -> Result<InvariantSubcomplex> {
        inv.check_on(self)?;
        let n = self.len();
        let fix = &inv.matrix + &BitMatrix::identity(n);
        let mut basis: Vec<BitVec> = Vec::new();
        let mut generators = Vec::new();
        for (g, members) in self.grading_groups() {
            let block = fix.submatrix(&members, &members);
            for k in block.kernel_basis() {
                let v = BitVec::from_ones(n, k.iter_ones().map(|a| members[a]));
                let id = v.iter_ones().map(|i| self.generators[i].id.as_str()).collect::<Vec<_>>().join("+");
                generators.push(Generator::new(id, g));
                basis.push(v);
            }
        }
        let inclusion = BitMatrix::from_columns(n, &basis);
        let mut differential = BitMatrix::zeros(basis.len(), basis.len());
        for (j, v) in basis.iter().enumerate() {
            let image = self.differential.mul_vec(v);
            let coords = inclusion.solve(&image)?.ok_or_else(|| {
                Error::NotAChainMap(format!("boundary of invariant `{}` is not invariant", generators[j].id))
            })?;
            for i in coords.iter_ones() {
                differential.set(i, j, true);
            }
        }
        let complex = Self::with_degree(self.kind, generators, differential, self.degree)?;
        Ok(InvariantSubcomplex { complex, inclusion })
    }
}

/// Homology in one grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyPiece {
    pub generators: Vec<usize>,
    pub cycles_dim: usize,
    /// Basis of the boundaries, as vectors over all generators.
    pub boundaries: Vec<BitVec>,
    /// Cycles whose classes form a basis of homology.
    pub representatives: Vec<BitVec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyResult {
    kind: GradingKind,
    len: usize,
    pieces: BTreeMap<i64, HomologyPiece>,
}

impl HomologyResult {
    pub fn kind(&self) -> GradingKind {
        self.kind
    }

    pub fn dim(&self, grading: i64) -> usize {
        self.pieces.get(&self.kind.normalize(grading)).map_or(0, |p| p.representatives.len())
    }

    /// Nonzero dimensions by grading.
    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.pieces
            .iter()
            .filter(|(_, p)| !p.representatives.is_empty())
            .map(|(&g, p)| (g, p.representatives.len()))
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().values().sum()
    }

    pub fn piece(&self, grading: i64) -> Option<&HomologyPiece> {
        self.pieces.get(&self.kind.normalize(grading))
    }

    pub fn representatives(&self, grading: i64) -> &[BitVec] {
        self.piece(grading).map_or(&[], |p| &p.representatives)
    }

    /// Coordinates of the class of `cycle` (a vector over all generators,
    /// homogeneous of degree `grading`) in the representative basis, or
    /// `None` if it is not a cycle in the span of that grading.
    pub fn coordinates(&self, grading: i64, cycle: &BitVec) -> Option<BitVec> {
        let Some(piece) = self.piece(grading) else {
            return cycle.is_zero().then(|| BitVec::zeros(0));
        };
        let mut cols = piece.representatives.clone();
        cols.extend(piece.boundaries.iter().cloned());
        let m = BitMatrix::from_columns(self.len, &cols);
        let x = m.solve(cycle).ok()??;
        Some(x.slice(0, piece.representatives.len()))
    }

    /// Same classes, different cycles: each representative gets the sum of
    /// all boundaries in its grading added to it.
    pub fn perturbed(&self) -> Self {
        let mut out = self.clone();
        for piece in out.pieces.values_mut() {
            let mut shift = BitVec::zeros(self.len);
            for b in &piece.boundaries {
                shift.xor_assign(b);
            }
            for r in &mut piece.representatives {
                r.xor_assign(&shift);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: GradedComplex,
    pub target: GradedComplex,
    /// `target.len() × source.len()`.
    pub matrix: BitMatrix,
    pub degree: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainMapReport {
    pub degree_violations: Vec<(String, String)>,
    /// Entries of `∂_target∘f + f∘∂_source` that are nonzero.
    pub commutation_violations: Vec<(String, String)>,
}

impl ChainMapReport {
    pub fn passed(&self) -> bool {
        self.degree_violations.is_empty() && self.commutation_violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for (s, t) in &self.degree_violations {
            parts.push(format!("degree {s}->{t}"));
        }
        for (s, t) in &self.commutation_violations {
            parts.push(format!("commutation {s}->{t}"));
        }
        parts.join(", ")
    }
}

impl ChainMap {
    pub fn new(source: GradedComplex, target: GradedComplex, matrix: BitMatrix, degree: i64) -> Result<Self> {
        if source.kind != target.kind {
            return Err(Error::GradingMisalignment("source and target grading kinds differ".into()));
        }
        if matrix.rows() != target.len() || matrix.cols() != source.len() {
            return Err(Error::Shape(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                target.len(),
                source.len()
            )));
        }
        let degree = source.kind.normalize(degree);
        Ok(Self { source, target, matrix, degree })
    }

    pub fn identity(c: &GradedComplex) -> Self {
        Self { source: c.clone(), target: c.clone(), matrix: BitMatrix::identity(c.len()), degree: 0 }
    }

    pub fn zero(source: &GradedComplex, target: &GradedComplex, degree: i64) -> Result<Self> {
        Self::new(source.clone(), target.clone(), BitMatrix::zeros(target.len(), source.len()), degree)
    }

    pub fn validate(&self) -> ChainMapReport {
        let mut report = ChainMapReport::default();
        let kind = self.source.kind;
        for (t, s) in self.matrix.nonzeros() {
            if self.target.generators[t].grading != kind.shift(self.source.generators[s].grading, self.degree) {
                report.degree_violations.push((
                    self.source.generators[s].id.clone(),
                    self.target.generators[t].id.clone(),
                ));
            }
        }
        let lhs = &self.target.differential * &self.matrix;
        let rhs = &self.matrix * &self.source.differential;
        for (t, s) in (&lhs + &rhs).nonzeros() {
            report
                .commutation_violations
                .push((self.source.generators[s].id.clone(), self.target.generators[t].id.clone()));
        }
        report
    }

    pub fn require_chain(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::NotAChainMap(report.summary()))
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ChainMap) -> Result<ChainMap> {
        if self.target != next.source {
            return Err(Error::Mismatch("target of the first map is not the source of the second".into()));
        }
        ChainMap::new(
            self.source.clone(),
            next.target.clone(),
            &next.matrix * &self.matrix,
            self.degree + next.degree,
        )
    }

    pub fn induced(&self) -> Result<InducedMap> {
        self.require_chain()?;
        let src = self.source.homology()?;
        let tgt = self.target.homology()?;
        self.induced_between(&src, &tgt)
    }

    /// Induced map computed against caller-supplied homology bases.
    pub fn induced_between(&self, src: &HomologyResult, tgt: &HomologyResult) -> Result<InducedMap> {
        let kind = self.source.kind;
        let mut blocks = BTreeMap::new();
        for (g, sdim) in src.dims() {
            let tg = kind.shift(g, self.degree);
            let tdim = tgt.dim(tg);
            let mut block = BitMatrix::zeros(tdim, sdim);
            for (j, rep) in src.representatives(g).iter().enumerate() {
                let image = self.matrix.mul_vec(rep);
                let coords = tgt.coordinates(tg, &image).ok_or_else(|| {
                    Error::NotAChainMap(format!("image of a cycle in grading {g} is not a cycle"))
                })?;
                for i in coords.iter_ones() {
                    block.set(i, j, true);
                }
            }
            blocks.insert(g, block);
        }
        InducedMap::new(kind, self.degree, src.dims(), tgt.dims(), blocks)
    }
}

/// A graded linear map between homologies, one block per nonzero source grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedMap {
    pub kind: GradingKind,
    pub degree: i64,
    pub source_dims: BTreeMap<i64, usize>,
    pub target_dims: BTreeMap<i64, usize>,
    /// Source grading → `target_dim × source_dim` block.
    pub blocks: BTreeMap<i64, BitMatrix>,
}

impl InducedMap {
    pub fn new(
        kind: GradingKind,
        degree: i64,
        source_dims: BTreeMap<i64, usize>,
        target_dims: BTreeMap<i64, usize>,
        blocks: BTreeMap<i64, BitMatrix>,
    ) -> Result<Self> {
        let source_dims: BTreeMap<i64, usize> = source_dims.into_iter().filter(|&(_, d)| d > 0).collect();
        let target_dims: BTreeMap<i64, usize> = target_dims.into_iter().filter(|&(_, d)| d > 0).collect();
        let mut full = BTreeMap::new();
        for (&g, &sdim) in &source_dims {
            let tdim = target_dims.get(&kind.shift(g, degree)).copied().unwrap_or(0);
            let block = blocks.get(&g).cloned().unwrap_or_else(|| BitMatrix::zeros(tdim, sdim));
            if block.rows() != tdim || block.cols() != sdim {
                return Err(Error::Shape(format!(
                    "block at grading {g} is {}x{}, expected {tdim}x{sdim}",
                    block.rows(),
                    block.cols()
                )));
            }
            full.insert(g, block);
        }
        Ok(Self { kind, degree, source_dims, target_dims, blocks: full })
    }

    pub fn block(&self, grading: i64) -> Option<&BitMatrix> {
        self.blocks.get(&grading)
    }

    pub fn rank_at(&self, grading: i64) -> usize {
        self.blocks.get(&grading).map_or(0, BitMatrix::rank)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(BitMatrix::is_zero)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &InducedMap) -> Result<InducedMap> {
        if self.target_dims != next.source_dims {
            return Err(Error::GradingMisalignment("middle homologies differ".into()));
        }
        let mut blocks = BTreeMap::new();
        for (&g, b) in &self.blocks {
            let mid = self.kind.shift(g, self.degree);
            let composed = match next.blocks.get(&mid) {
                Some(nb) => nb * b,
                None => {
                    let tdim = next.target_dims.get(&self.kind.shift(mid, next.degree)).copied().unwrap_or(0);
                    BitMatrix::zeros(tdim, b.cols())
                }
            };
            blocks.insert(g, composed);
        }
        InducedMap::new(
            self.kind,
            self.degree + next.degree,
            self.source_dims.clone(),
            next.target_dims.clone(),
            blocks,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessEntry {
    pub grading: i64,
    pub dim: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub composite_zero: bool,
}

impl ExactnessEntry {
    pub fn exact(&self) -> bool {
        self.composite_zero && self.kernel_dim == self.image_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub entries: Vec<ExactnessEntry>,
}

impl ExactnessReport {
    pub fn exact(&self) -> bool {
        self.entries.iter().all(ExactnessEntry::exact)
    }

    pub fn failures(&self) -> Vec<i64> {
        self.entries.iter().filter(|e| !e.exact()).map(|e| e.grading).collect()
    }
}

/// Exactness of `seq[at-1]` followed by `seq[at]` at their common term.
pub fn check_exact(seq: &[InducedMap], at: usize) -> Result<ExactnessReport> {
    if at == 0 || at >= seq.len() {
        return Err(Error::InvalidQuery(format!("position {at} has no incoming and outgoing map")));
    }
    check_exact_pair(&seq[at - 1], &seq[at])
}

pub fn check_exact_pair(incoming: &InducedMap, outgoing: &InducedMap) -> Result<ExactnessReport> {
    if incoming.kind != outgoing.kind {
        return Err(Error::GradingMisalignment("grading kinds differ".into()));
    }
    if incoming.target_dims != outgoing.source_dims {
        return Err(Error::GradingMisalignment(format!(
            "incoming map lands in {:?} but outgoing map starts from {:?}",
            incoming.target_dims, outgoing.source_dims
        )));
    }
    let kind = incoming.kind;
    let mut entries = Vec::new();
    for (&g, &dim) in &outgoing.source_dims {
        let out_block = &outgoing.blocks[&g];
        let kernel_dim = dim - out_block.rank();
        let in_source = kind.shift(g, -incoming.degree);
        let (image_dim, composite_zero) = match incoming.blocks.get(&in_source) {
            Some(b) => (b.rank(), (out_block * b).is_zero()),
            None => (0, true),
        };
        entries.push(ExactnessEntry { grading: g, dim, kernel_dim, image_dim, composite_zero });
    }
    Ok(ExactnessReport { entries })
}

/// A degree-zero chain involution, stored as its matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    pub matrix: BitMatrix,
}

impl Involution {
    pub fn new(matrix: BitMatrix) -> Self {
        Self { matrix }
    }

    /// `perm[i]` is the image of generator `i`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut m = BitMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            if p >= n {
                return Err(Error::NotAnInvolution(format!("image {p} of generator {i} is out of range")));
            }
            m.set(p, i, true);
        }
        Ok(Self { matrix: m })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: BitMatrix::identity(n) }
    }

    /// The permutation, when the matrix is one.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        let n = self.matrix.cols();
        (0..n)
            .map(|j| {
                let col = self.matrix.column(j);
                (col.count_ones() == 1).then(|| col.first_one().unwrap())
            })
            .collect()
    }

    /// A permutation involution with no fixed generator.
    pub fn is_free(&self) -> bool {
        self.as_permutation()
            .is_some_and(|p| p.iter().enumerate().all(|(i, &j)| i != j))
    }

    pub fn check_on(&self, c: &GradedComplex) -> Result<()> {
        let n = c.len();
        if self.matrix.rows() != n || self.matrix.cols() != n {
            return Err(Error::Shape(format!("involution is {}x{} on {n} generators", self.matrix.rows(), self.matrix.cols())));
        }
        if &self.matrix * &self.matrix != BitMatrix::identity(n) {
            return Err(Error::NotAnInvolution("square is not the identity".into()));
        }
        let map = ChainMap::new(c.clone(), c.clone(), self.matrix.clone(), 0)?;
        let report = map.validate();
        if !report.passed() {
            return Err(Error::NotAnInvolution(format!("not a degree-0 chain map: {}", report.summary())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSubcomplex {
    pub complex: GradedComplex,
    /// Columns are the invariant basis vectors in the ambient complex.
    pub inclusion: BitMatrix,
}
