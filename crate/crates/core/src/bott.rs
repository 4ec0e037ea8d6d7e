//! Morse–Bott fragment: E1 pages assembled from the homology of critical
//! submanifolds, collapse for grading reasons, and the Gysin sequence of a
//! free involution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::{
    check_exact_pair, ChainMap, ExactnessReport, GradedComplex, HomologyResult, InducedMap, Involution,
};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// A critical submanifold at filtration `level`, contributing `dims[k]` in
/// degree `offset + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BottLevel {
    pub level: i64,
    pub offset: i64,
    pub dims: Vec<usize>,
}

impl BottLevel {
    pub fn new(level: i64, offset: i64, dims: Vec<usize>) -> Self {
        Self { level, offset, dims }
    }

    pub fn dim_at(&self, grading: i64) -> usize {
        usize::try_from(grading - self.offset)
            .ok()
            .and_then(|k| self.dims.get(k).copied())
            .unwrap_or(0)
    }

    fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.dims.iter().enumerate().filter(|(_, &d)| d > 0).map(move |(k, _)| self.offset + k as i64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct E1Page {
    /// Nonzero dimensions by degree.
    pub dims: BTreeMap<i64, usize>,
}

impl E1Page {
    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().map(|(&g, &d)| if g.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) }).sum()
    }
}

pub fn e1_page(levels: &[BottLevel]) -> E1Page {
    let mut dims = BTreeMap::new();
    for l in levels {
        for g in l.support() {
            *dims.entry(g).or_insert(0) += l.dim_at(g);
        }
    }
    E1Page { dims }
}

/// A differential that gradings alone do not rule out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub from_level: i64,
    pub to_level: i64,
    pub from_degree: i64,
    pub to_degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Collapse {
    /// The spectral sequence degenerates at E1; these are the homology dims.
    Collapsed(BTreeMap<i64, usize>),
    Refused(Obstruction),
}

impl Collapse {
    pub fn dims(&self) -> Option<&BTreeMap<i64, usize>> {
        match self {
            Collapse::Collapsed(d) => Some(d),
            Collapse::Refused(_) => None,
        }
    }
}

/// Differentials run from a level to any strictly lower one and change
/// degree by `differential_degree`. Collapse is declared when no such pair
/// has both ends nonzero.
pub fn lacunary_collapse(levels: &[BottLevel], differential_degree: i64) -> Collapse {
    let mut ordered: Vec<&BottLevel> = levels.iter().collect();
    ordered.sort_by_key(|l| (std::cmp::Reverse(l.level), l.offset));
    for high in &ordered {
        for g in high.support() {
            let target = g + differential_degree;
            for low in ordered.iter().filter(|l| l.level < high.level) {
                if low.dim_at(target) > 0 {
                    return Collapse::Refused(Obstruction {
                        from_level: high.level,
                        to_level: low.level,
                        from_degree: g,
                        to_degree: target,
                    });
                }
            }
        }
    }
    Collapse::Collapsed(e1_page(levels).dims)
}

fn require_free(c: &GradedComplex, inv: &Involution) -> Result<()> {
    inv.check_on(c)?;
    match inv.as_permutation() {
        Some(p) => match p.iter().enumerate().find(|&(i, &j)| i == j) {
            Some((i, _)) => Err(Error::NonFreeAction(format!("generator `{}` is fixed", c.generators()[i].id))),
            None => Ok(()),
        },
        None => Err(Error::NonFreeAction("involution does not permute generators".into())),
    }
}

/// Homology of the invariant subcomplex, which for a free action is the
/// homology of the quotient.
pub fn quotient_homology_via_invariants(c: &GradedComplex, inv: &Involution) -> Result<HomologyResult> {
    require_free(c, inv)?;
    c.invariant_subcomplex(inv)?.complex.homology()
}

/// The long exact sequence of `0 → C' → C → C' → 0`, where `C'` is the
/// invariant subcomplex and the second map is `x ↦ x + ιx`.
#[derive(Debug, Clone)]
pub struct GysinReport {
    pub invariant: GradedComplex,
    pub h_invariant: HomologyResult,
    pub h_total: HomologyResult,
    pub inclusion: InducedMap,
    pub transfer: InducedMap,
    /// Connecting map `H_k(C') → H_{k-1}(C')`.
    pub connecting: InducedMap,
    /// Exactness at `H(C)`, at the middle `H(C')` and at the last `H(C')`.
    pub exactness: [ExactnessReport; 3],
    /// Whether the transfer vanishes on invariant chains.
    pub transfer_kills_invariants: bool,
}

impl GysinReport {
    pub fn passed(&self) -> bool {
        self.transfer_kills_invariants && self.exactness.iter().all(ExactnessReport::exact)
    }
}

pub fn gysin_check(c: &GradedComplex, inv: &Involution) -> Result<GysinReport> {
    require_free(c, inv)?;
    let sub = c.invariant_subcomplex(inv)?;
    let n = c.len();
    let incl_mat = sub.inclusion.clone();
    let orbit_sum = &inv.matrix + &BitMatrix::identity(n);
    let mut transfer_cols = Vec::with_capacity(n);
    for j in 0..n {
        let v = orbit_sum.column(j);
        let coords = incl_mat
            .solve(&v)?
            .ok_or_else(|| Error::NotAnInvolution("orbit sum is not invariant".into()))?;
        transfer_cols.push(coords);
    }
    let transfer_mat = BitMatrix::from_columns(sub.complex.len(), &transfer_cols);
    let transfer_kills_invariants = (&transfer_mat * &incl_mat).is_zero();

    let incl = ChainMap::new(sub.complex.clone(), c.clone(), incl_mat.clone(), 0)?;
    let transfer = ChainMap::new(c.clone(), sub.complex.clone(), transfer_mat, 0)?;
    incl.require_chain()?;
    transfer.require_chain()?;
    let h_inv = sub.complex.homology()?;
    let h_tot = c.homology()?;
    let incl_star = incl.induced_between(&h_inv, &h_tot)?;
    let transfer_star = transfer.induced_between(&h_tot, &h_inv)?;

    // connecting map: lift an invariant cycle through x ↦ x + ιx, take its
    // boundary, read it back in the invariant basis
    let kind = c.kind();
    let mut blocks = BTreeMap::new();
    for (g, dim) in h_inv.dims() {
        let target = kind.shift(g, c.degree());
        let mut block = BitMatrix::zeros(h_inv.dim(target), dim);
        for (j, rep) in h_inv.representatives(g).iter().enumerate() {
            let ambient = incl_mat.mul_vec(rep);
            let lift = orbit_sum
                .solve(&ambient)?
                .ok_or_else(|| Error::NonFreeAction("invariant cycle has no lift".into()))?;
            let boundary = c.differential().mul_vec(&lift);
            let coords = incl_mat
                .solve(&boundary)?
                .ok_or_else(|| Error::NotAChainMap("boundary of a lift is not invariant".into()))?;
            let class = h_inv
                .coordinates(target, &coords)
                .ok_or_else(|| Error::NotAChainMap("connecting image is not a cycle".into()))?;
            for i in class.iter_ones() {
                block.set(i, j, true);
            }
        }
        blocks.insert(g, block);
    }
    let connecting = InducedMap::new(kind, c.degree(), h_inv.dims(), h_inv.dims(), blocks)?;

    let exactness = [
        check_exact_pair(&incl_star, &transfer_star)?,
        check_exact_pair(&transfer_star, &connecting)?,
        check_exact_pair(&connecting, &incl_star)?,
    ];
    Ok(GysinReport {
        invariant: sub.complex,
        h_invariant: h_inv,
        h_total: h_tot,
        inclusion: incl_star,
        transfer: transfer_star,
        connecting,
        exactness,
        transfer_kills_invariants,
    })
}

/// Cellular S^k with two cells `e{j}+`, `e{j}-` per dimension, both
/// bounding onto the two cells below, and the antipodal swap.
pub fn antipodal_sphere(k: usize) -> (GradedComplex, Involution) {
    use crate::complex::Generator;
    use crate::grading::GradingKind;
    let mut gens = Vec::new();
    for j in 0..=k {
        for sign in ['+', '-'] {
            gens.push(Generator::new(format!("e{j}{sign}"), j as i64));
        }
    }
    let n = gens.len();
    let mut d = BitMatrix::zeros(n, n);
    for j in 1..=k {
        for a in 0..2 {
            for b in 0..2 {
                d.set(2 * (j - 1) + b, 2 * j + a, true);
            }
        }
    }
    let perm: Vec<usize> = (0..n).map(|i| i ^ 1).collect();
    let c = GradedComplex::new(GradingKind::Integer, gens, d).expect("cellular sphere");
    (c, Involution::from_permutation(&perm).expect("swap"))
}
