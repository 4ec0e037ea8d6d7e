//! Spectral flow of piecewise-linear paths of Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grading::{Grading, GradingKind};

/// Samples must be Hermitian to this tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_DEPTH: u32 = 40;
const MAX_NUDGES: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPath {
    ts: Vec<f64>,
    samples: Vec<DMatrix<Complex64>>,
}

impl HermitianPath {
    /// Samples at strictly increasing parameters; the path is their linear
    /// interpolation.
    pub fn new(samples: Vec<(f64, DMatrix<Complex64>)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Shape("a path needs at least two samples".into()));
        }
        let n = samples[0].1.nrows();
        for (k, (t, m)) in samples.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidQuery(format!("sample {k} has parameter {t}")));
            }
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!("sample {k} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
            }
            let deviation = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { sample: k, deviation });
            }
        }
        if let Some(k) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidQuery(format!("parameters are not increasing at sample {}", k + 1)));
        }
        let (ts, samples) = samples.into_iter().unzip();
        Ok(Self { ts, samples })
    }

    pub fn from_real(samples: Vec<(f64, DMatrix<f64>)>) -> Result<Self> {
        Self::new(samples.into_iter().map(|(t, m)| (t, m.map(|x| Complex64::new(x, 0.0)))).collect())
    }

    /// `f` sampled at `count + 1` evenly spaced parameters of `[a, b]`.
    pub fn sampled(a: f64, b: f64, count: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self> {
        let samples = (0..=count)
            .map(|k| {
                let t = if k == count { b } else { a + (b - a) * k as f64 / count as f64 };
                (t, f(t))
            })
            .collect();
        Self::from_real(samples)
    }

    pub fn dimension(&self) -> usize {
        self.samples[0].nrows()
    }

    pub fn parameters(&self) -> &[f64] {
        &self.ts
    }

    pub fn samples(&self) -> &[DMatrix<Complex64>] {
        &self.samples
    }

    pub fn start(&self) -> f64 {
        self.ts[0]
    }

    pub fn end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        let first = &self.samples[0];
        let last = self.samples.last().unwrap();
        (first - last).iter().all(|z| z.norm() <= HERMITIAN_TOL)
    }

    /// Linear interpolation on the interval containing `t`.
    pub fn at(&self, t: f64) -> DMatrix<Complex64> {
        let k = match self.ts.iter().position(|&s| s >= t) {
            Some(0) => return self.samples[0].clone(),
            Some(k) => k,
            None => return self.samples.last().unwrap().clone(),
        };
        self.between(k - 1, t)
    }

    fn between(&self, k: usize, t: f64) -> DMatrix<Complex64> {
        let (a, b) = (self.ts[k], self.ts[k + 1]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        self.samples[k].map(|z| z * (1.0 - w)) + self.samples[k + 1].map(|z| z * w)
    }

    /// The same matrices traversed backwards, on the mirrored parameters.
    pub fn reversed(&self) -> Self {
        Self {
            ts: self.ts.iter().rev().map(|t| -t).collect(),
            samples: self.samples.iter().rev().cloned().collect(),
        }
    }

    /// `self` followed by `next`, whose parameters are shifted to follow on.
    pub fn concat(&self, next: &HermitianPath) -> Result<Self> {
        if next.dimension() != self.dimension() {
            return Err(Error::Shape("paths have different dimensions".into()));
        }
        let gap = (self.samples.last().unwrap() - &next.samples[0]).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gap > HERMITIAN_TOL {
            return Err(Error::Mismatch(format!("paths do not meet (gap {gap:e})")));
        }
        let shift = self.end() - next.start();
        let mut ts = self.ts.clone();
        let mut samples = self.samples.clone();
        ts.extend(next.ts.iter().skip(1).map(|t| t + shift));
        samples.extend(next.samples.iter().skip(1).cloned());
        Ok(Self { ts, samples })
    }
}

/// Eigenvalues in ascending order.
pub fn sorted_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn negative_count(m: &DMatrix<Complex64>) -> usize {
    sorted_eigenvalues(m).iter().filter(|&&x| x < 0.0).count()
}

fn min_abs_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    sorted_eigenvalues(m).iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// `+1` for an eigenvalue going from negative to positive.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowResult {
    pub flow: i64,
    pub crossings: Vec<Crossing>,
}

struct Segment<'a> {
    path: &'a HermitianPath,
    k: usize,
}

impl Segment<'_> {
    fn count(&self, t: f64) -> usize {
        negative_count(&self.path.between(self.k, t))
    }

    fn crossings(&self, a: f64, na: usize, b: f64, nb: usize, depth: u32, out: &mut Vec<Crossing>) {
        if na == nb {
            return;
        }
        let direction: i8 = if na > nb { 1 } else { -1 };
        let jumps = na.abs_diff(nb);
        let mid = 0.5 * (a + b);
        if jumps > 1 && depth < MAX_DEPTH && mid > a && mid < b {
            let nm = self.count(mid);
            self.crossings(a, na, mid, nm, depth + 1, out);
            self.crossings(mid, nm, b, nb, depth + 1, out);
            return;
        }
        if jumps == 1 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                if self.count(m) == na {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            out.push(Crossing { t: snap(0.5 * (lo + hi), a, b), direction });
            return;
        }
        // eigenvalues crossing together
        for _ in 0..jumps {
            out.push(Crossing { t: snap(mid, a, b), direction });
        }
    }
}

/// Parameters below the resolution of the bisection are reported as 0.
fn snap(t: f64, a: f64, b: f64) -> f64 {
    if t.abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
        0.0
    } else {
        t
    }
}

/// Sample points with an eigenvalue within `tol` of zero are moved forward
/// by half a sub-step (a quarter of the following interval), repeatedly if
/// needed. Returns the adjusted parameters of each interior sample.
fn nudged_parameters(path: &HermitianPath, tol: f64) -> Result<Vec<f64>> {
    let mut ts = path.ts.clone();
    for i in 1..ts.len() - 1 {
        let mut t = ts[i];
        let mut room = path.ts[i + 1] - path.ts[i];
        let mut tries = 0;
        while min_abs_eigenvalue(&path.between(i, t)) < tol {
            tries += 1;
            if tries > MAX_NUDGES {
                return Err(Error::CrossingAmbiguity { t: path.ts[i] });
            }
            room /= 2.0;
            t += room / 2.0;
        }
        ts[i] = t;
    }
    Ok(ts)
}

pub fn spectral_flow(path: &HermitianPath, tol: f64) -> Result<SpectralFlowResult> {
    spectral_flow_with(path, tol, Exec::default())
}

pub fn spectral_flow_with(path: &HermitianPath, tol: f64, exec: Exec) -> Result<SpectralFlowResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidQuery(format!("tolerance must be positive, got {tol}")));
    }
    for (&t, m) in [(&path.ts[0], &path.samples[0]), (path.ts.last().unwrap(), path.samples.last().unwrap())] {
        let e = sorted_eigenvalues(m);
        if let Some(&x) = e.iter().min_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if x.abs() < tol {
                return Err(Error::NearKernelEndpoint { t, eigenvalue: x });
            }
        }
    }
    let ts = nudged_parameters(path, tol)?;
    // ts[i] lies in [path.ts[i], path.ts[i+1]); interval i runs ts[i]..ts[i+1]
    // and may straddle the original sample i+1
    let intervals: Vec<usize> = (0..ts.len() - 1).collect();
    let pieces = exec.map(&intervals, |&i| {
        let mut out = Vec::new();
        let (a, b) = (ts[i], ts[i + 1]);
        let knot = path.ts[i + 1];
        let mut bounds = vec![(i, a, knot.min(b))];
        if b > knot {
            bounds.push((i + 1, knot, b));
        }
        for (k, lo, hi) in bounds {
            if hi <= lo {
                continue;
            }
            let seg = Segment { path, k };
            let (na, nb) = (seg.count(lo), seg.count(hi));
            seg.crossings(lo, na, hi, nb, 0, &mut out);
        }
        out
    });
    let crossings: Vec<Crossing> = pieces.into_iter().flatten().collect();
    let flow = crossings.iter().map(|c| i64::from(c.direction)).sum();
    Ok(SpectralFlowResult { flow, crossings })
}

/// The flow as a relative grading in `Z/d`, or in `Z` when `d = 0`.
pub fn relative_grading_mod_d(flow: i64, d: i64) -> Result<Grading> {
    if d < 0 {
        return Err(Error::InvalidGrading(format!("modulus must be nonnegative, got {d}")));
    }
    let kind = GradingKind::from_modulus(d)?;
    Ok(Grading::new(kind, flow))
}

/// A closed path in finite dimensions has zero spectral flow.
pub fn loop_flow_check(path: &HermitianPath, tol: f64) -> Result<SpectralFlowResult> {
    if !path.is_closed() {
        return Err(Error::NotClosed);
    }
    let result = spectral_flow(path, tol)?;
    if result.flow != 0 {
        return Err(Error::NontrivialLoopFlow(result.flow));
    }
    Ok(result)
}

/// Six significant digits, in exponent form below `1e-4`.
pub fn format_parameter(t: f64) -> String {
    if t == 0.0 {
        return "0".into();
    }
    if t.abs() < 1e-4 {
        let s = format!("{t:.5e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let digits = 6 - 1 - t.abs().log10().floor() as i32;
    let s = if digits > 0 { format!("{:.*}", digits as usize, t) } else { format!("{:.0}", t) };
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
