//! Flow data and Morse–Bott levels from explicit finite models: the
//! interval and disk examples, the blow-up of a Hermitian operator on Cⁿ,
//! truncated S³ towers and the Pin(2) picture of S³.

use std::collections::BTreeMap;

use crate::bott::{antipodal_sphere, gysin_check, BottLevel};
use crate::cobordism::{CrossOp, CrossOperators};
use crate::error::{Error, Result};
use crate::flow::{BoundaryFlowData, CriticalPoint, FlowOp, PointKind, SparseOp};
use crate::gf2::{BitMatrix, BitVec};
use crate::grading::GradingKind;
use crate::modules::RModule;

fn build(name: &str, points: Vec<CriticalPoint>, ops: &[(FlowOp, &str, &str)]) -> BoundaryFlowData {
    let mut map: BTreeMap<FlowOp, SparseOp> = BTreeMap::new();
    for &(op, s, t) in ops {
        map.entry(op).or_default().insert((s.to_string(), t.to_string()));
    }
    BoundaryFlowData::new(name, 0, GradingKind::Integer, points, map).expect("built-in dataset")
}

/// Gradient flow on an interval pointing inward at one end and outward at
/// the other.
pub fn gen_interval() -> BoundaryFlowData {
    build(
        "interval",
        vec![CriticalPoint::new("s", PointKind::Stable, 0), CriticalPoint::new("u", PointKind::Unstable, 1)],
        &[(FlowOp::Dus, "u", "s")],
    )
}

/// Height function on a hemisphere: a boundary minimum and a boundary
/// maximum that repels into the disk.
pub fn gen_hemisphere() -> BoundaryFlowData {
    build(
        "hemisphere",
        vec![CriticalPoint::new("s", PointKind::Stable, 0), CriticalPoint::new("u", PointKind::Unstable, 2)],
        &[],
    )
}

/// Disk with two interior and two boundary critical points.
pub fn gen_disk4() -> BoundaryFlowData {
    build(
        "disk4",
        vec![
            CriticalPoint::new("a", PointKind::Interior, 2),
            CriticalPoint::new("c", PointKind::Interior, 1),
            CriticalPoint::new("u", PointKind::Unstable, 2),
            CriticalPoint::new("s", PointKind::Stable, 0),
        ],
        &[(FlowOp::Doo, "a", "c"), (FlowOp::Duo, "u", "c")],
    )
}

/// Boundary points `s0..` at gradings `0, 2, ..` and `u0..` at `−1, −3, ..`,
/// no differentials, and the U-cap that walks down both towers.
fn tower(name: &str, n_stable: usize, n_unstable: usize) -> BoundaryFlowData {
    let mut points = Vec::new();
    for k in 0..n_stable {
        points.push(CriticalPoint::new(format!("s{k}"), PointKind::Stable, 2 * k as i64));
    }
    for m in 0..n_unstable {
        points.push(CriticalPoint::new(format!("u{m}"), PointKind::Unstable, -1 - 2 * m as i64));
    }
    let data = build(name, points, &[]);
    let mut cap = CrossOperators::new(-2);
    for k in 1..n_stable {
        cap.toggle(CrossOp::BmSs, &format!("s{k}"), &format!("s{}", k - 1));
    }
    if n_stable > 0 && n_unstable > 0 {
        cap.toggle(CrossOp::BmSu, "s0", "u0");
    }
    for m in 1..n_unstable {
        cap.toggle(CrossOp::BmUu, &format!("u{}", m - 1), &format!("u{m}"));
    }
    data.with_u_cap(cap).expect("tower cap endpoints")
}

/// Truncated S³: `n_stable` rungs of the to-tower, `n_unstable` of the from-tower.
pub fn gen_s3_tower(n_stable: usize, n_unstable: usize) -> BoundaryFlowData {
    tower("s3", n_stable, n_unstable)
}

/// Spectrum of a Hermitian operator `L` with no zero eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianModelSpec {
    /// Distinct eigenvalues, ascending.
    eigenvalues: Vec<f64>,
    multiplicities: Vec<u32>,
}

impl HermitianModelSpec {
    fn with_multiplicity(eigs: &[f64], mult: u32) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::Model("no eigenvalues".into()));
        }
        let mut sorted = eigs.to_vec();
        if let Some(bad) = sorted.iter().find(|x| !x.is_finite()) {
            return Err(Error::Model(format!("eigenvalue {bad} is not finite")));
        }
        if sorted.contains(&0.0) {
            return Err(Error::Model("zero eigenvalue".into()));
        }
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Model(format!("repeated eigenvalue {}", w[0])));
        }
        let n = sorted.len();
        Ok(Self { eigenvalues: sorted, multiplicities: vec![mult; n] })
    }

    /// Simple spectrum: one-dimensional eigenspaces.
    pub fn simple(eigs: &[f64]) -> Result<Self> {
        Self::with_multiplicity(eigs, 1)
    }

    /// Quaternionic mode: every eigenvalue has multiplicity two.
    pub fn quaternionic(eigs: &[f64]) -> Result<Self> {
        Self::with_multiplicity(eigs, 2)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().map(|&m| m as usize).sum()
    }

    /// Diagonal of `L` with multiplicities expanded.
    fn diagonal(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&e, &m)| std::iter::repeat_n(e, m as usize))
            .collect()
    }
}

/// Flow data of the blown-up model: one boundary point per eigenvalue,
/// stable for positive eigenvalues and unstable for negative ones.
pub fn gen_blowup_model(spec: &HermitianModelSpec) -> Result<BoundaryFlowData> {
    if !spec.is_simple() {
        return Err(Error::Model("the blow-up model needs a simple spectrum".into()));
    }
    let positive = spec.eigenvalues.iter().filter(|&&e| e > 0.0).count();
    let negative = spec.eigenvalues.len() - positive;
    Ok(tower("hermitian", positive, negative))
}

/// Dimension `2i − 1` of the trajectory space from eigenvalue index `from` to
/// `to` (ascending order), `i` counting eigenvalues ν with `λ_to < ν ≤ λ_from`.
pub fn traj_space_dim(spec: &HermitianModelSpec, from: usize, to: usize) -> Result<usize> {
    let n = spec.eigenvalues.len();
    if from >= n || to >= n {
        return Err(Error::InvalidQuery(format!("eigenvalue index out of range 0..{n}")));
    }
    if from <= to {
        return Err(Error::InvalidQuery(format!(
            "trajectories run from a higher to a lower eigenvalue, got {from} -> {to}"
        )));
    }
    let i: usize = spec.multiplicities[to + 1..=from].iter().map(|&m| m as usize).sum();
    Ok(2 * i - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub endpoint: Vec<f64>,
    /// Index of the eigenvalue whose eigenspace the endpoint lies in.
    pub eigen_index: Option<usize>,
    pub eigenvalue: Option<f64>,
    pub max_drift: f64,
}

const DRIFT_LIMIT: f64 = 1e-6;

/// Integrates `dφ/dt = −(Lφ − Λ(φ)φ)` on the unit sphere with fourth-order
/// Runge–Kutta, renormalizing after each step.
pub fn integrate_model_flow(spec: &HermitianModelSpec, start: &[f64], duration: f64, step: f64) -> Result<FlowOutcome> {
    let diag = spec.diagonal();
    let n = diag.len();
    if n > 4 {
        return Err(Error::Model(format!("integrator supports dimension at most 4, got {n}")));
    }
    if start.len() != n {
        return Err(Error::Shape(format!("start has {} coordinates, expected {n}", start.len())));
    }
    if !(step > 0.0 && duration >= 0.0) {
        return Err(Error::InvalidQuery("step must be positive and duration nonnegative".into()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n0 = norm(start);
    if n0 == 0.0 {
        return Err(Error::Model("start point is zero".into()));
    }
    let mut phi: Vec<f64> = start.iter().map(|x| x / n0).collect();
    let field = |p: &[f64]| -> Vec<f64> {
        let lambda: f64 = p.iter().zip(&diag).map(|(x, l)| l * x * x).sum();
        p.iter().zip(&diag).map(|(x, l)| -(l * x - lambda * x)).collect()
    };
    let axpy = |a: &[f64], h: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + h * y).collect() };
    let steps = (duration / step).ceil() as usize;
    let mut max_drift: f64 = 0.0;
    for _ in 0..steps {
        let k1 = field(&phi);
        let k2 = field(&axpy(&phi, step / 2.0, &k1));
        let k3 = field(&axpy(&phi, step / 2.0, &k2));
        let k4 = field(&axpy(&phi, step, &k3));
        let next: Vec<f64> = (0..n).map(|i| phi[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let len = norm(&next);
        let drift = (len - 1.0).abs();
        max_drift = max_drift.max(drift);
        if !drift.is_finite() || drift > DRIFT_LIMIT {
            return Err(Error::StepInstability { drift });
        }
        phi = next.iter().map(|x| x / len).collect();
    }
    let mut eigen_index = None;
    let mut offset = 0;
    for (k, &m) in spec.multiplicities.iter().enumerate() {
        let weight: f64 = phi[offset..offset + m as usize].iter().map(|x| x * x).sum();
        if weight > 1.0 - 1e-6 {
            eigen_index = Some(k);
        }
        offset += m as usize;
    }
    Ok(FlowOutcome {
        endpoint: phi,
        eigen_index,
        eigenvalue: eigen_index.map(|k| spec.eigenvalues[k]),
        max_drift,
    })
}

/// Critical submanifolds of the Pin(2) picture of S³: level `k` is a copy
/// of RP² with degrees `4k, 4k+1, 4k+2`.
pub fn gen_pin2_s3(levels: usize) -> Vec<BottLevel> {
    (0..levels).map(|k| BottLevel::new(k as i64, 4 * k as i64, vec![1, 1, 1])).collect()
}

/// The Pin(2) S³ module truncated to `levels` levels. Q on each level is
/// the connecting map of the Gysin sequence of S² → RP²; V shifts one
/// level down; the i-image is everything.
pub fn pin2_s3_module(levels: usize) -> Result<RModule> {
    if levels == 0 {
        return Err(Error::Model("at least one level is needed".into()));
    }
    let (s2, antipodal) = antipodal_sphere(2);
    let gysin = gysin_check(&s2, &antipodal)?;
    let local = gysin.h_invariant.dims();
    let mut dims = BTreeMap::new();
    let mut q = BTreeMap::new();
    let mut v = BTreeMap::new();
    let mut i_image = BTreeMap::new();
    for k in 0..levels as i64 {
        for (&j, &d) in &local {
            let g = 4 * k + j;
            dims.insert(g, d);
            if let Some(block) = gysin.connecting.block(j) {
                q.insert(g, block.clone());
            }
            if k > 0 {
                v.insert(g, BitMatrix::identity(d));
            }
            i_image.insert(g, (0..d).map(|i| BitVec::unit(d, i)).collect());
        }
    }
    RModule::new(GradingKind::Integer, dims, v, q, i_image)
}
