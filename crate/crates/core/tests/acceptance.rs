//! Acceptance suite. Runs every criterion, prints one pass/fail line per
//! criterion, then reruns the whole suite and compares the detailed reports
//! byte for byte.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use floer_core::bott::{
    antipodal_sphere, e1_page, gysin_check, lacunary_collapse, quotient_homology_via_invariants, BottLevel,
};
use floer_core::cobordism::{
    assemble_cobordism_maps, closed_dimension, cobordism_map_degree, compose_maps, iota, CrossOp, CrossOperators,
    TopologyNumbers,
};
use floer_core::complex::{Generator, GradedComplex, Involution};
use floer_core::gf2::BitVec;
use floer_core::flow::{BoundaryFlowData, Flavor, FlowOp};
use floer_core::grading::GradingKind;
use floer_core::models::{
    gen_blowup_model, gen_disk4, gen_hemisphere, gen_interval, gen_pin2_s3, gen_s3_tower, pin2_s3_module,
    HermitianModelSpec,
};
use floer_core::modules::{
    check_froyshov_inequality, correction_terms, duality_terms, froyshov, minus_e8, order_two_argument,
    r_tower_decompose, rho, rokhlin_lift_check, CorrectionTerms, OrderTwoVerdict, QuadraticForm, UModule,
};
use floer_core::spectral::{loop_flow_check, spectral_flow, HermitianPath, DEFAULT_TOL};
use floer_core::Exec;

type Outcome = Result<Vec<String>, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn dims_str(d: &BTreeMap<i64, usize>) -> String {
    let parts: Vec<String> = d.iter().map(|(g, n)| format!("{n}@{g}")).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(",")
    }
}

fn hermitian_models() -> Vec<BoundaryFlowData> {
    let spectra: [&[f64]; 4] = [&[1.0], &[-1.0], &[-2.0, -1.0, 1.0, 3.0], &[-5.0, 0.5, 1.5, 2.5, 7.0]];
    spectra
        .iter()
        .map(|s| gen_blowup_model(&HermitianModelSpec::simple(s).unwrap()).unwrap())
        .collect()
}

fn shipped() -> Vec<BoundaryFlowData> {
    let mut all = vec![gen_interval(), gen_hemisphere(), gen_disk4()];
    all.extend(hermitian_models());
    all.extend((1..=6).map(|n| gen_s3_tower(n, n)));
    all
}

fn flavor_dims(d: &BoundaryFlowData) -> Result<[BTreeMap<i64, usize>; 3], String> {
    let h = |f| d.homology(f).map(|h| h.dims()).map_err(|e| e.to_string());
    Ok([h(Flavor::To)?, h(Flavor::From)?, h(Flavor::Bar)?])
}

fn cellular(gens: &[(&str, i64)], pairs: &[(&str, &str)]) -> BTreeMap<i64, usize> {
    let gens = gens.iter().map(|&(id, g)| Generator::new(id, g)).collect();
    GradedComplex::from_pairs(GradingKind::Integer, gens, pairs).unwrap().homology().unwrap().dims()
}

/// Cellular homology of `(B, B rel ∂B, ∂B)` for the interval and the disk.
fn singular_oracles() -> Vec<(&'static str, [BTreeMap<i64, usize>; 3])> {
    let interval = [
        cellular(&[("v0", 0), ("v1", 0), ("e", 1)], &[("e", "v0"), ("e", "v1")]),
        cellular(&[("e", 1)], &[]),
        cellular(&[("v0", 0), ("v1", 0)], &[]),
    ];
    let disk = [
        cellular(&[("v", 0), ("e", 1), ("f", 2)], &[("f", "e")]),
        cellular(&[("f", 2)], &[]),
        cellular(&[("v", 0), ("e", 1)], &[]),
    ];
    vec![("interval", interval), ("hemisphere", disk.clone()), ("disk4", disk)]
}

/// The connecting map `H(B, ∂B) → H(∂B)` sends the top relative cell to
/// its boundary: the sum of both endpoints for the interval, the boundary
/// circle for the disk. Returns, per source grading, the image classes of
/// `p_*` and of that oracle boundary in bar-homology coordinates.
fn connecting_image(d: &BoundaryFlowData, boundary_of_top: &[&str]) -> Result<(Vec<BitVec>, Vec<BitVec>), String> {
    let t = d.triangle().map_err(|e| e.to_string())?;
    let top = *t.h_from.dims().keys().max().ok_or("empty from homology")?;
    let target = top - 1;
    let bar = &t.p.target;
    let mut got = Vec::new();
    for rep in t.h_from.representatives(top) {
        let image = t.p.matrix.mul_vec(rep);
        got.push(t.h_bar.coordinates(target, &image).ok_or("p_* image is not a cycle")?);
    }
    let ones = boundary_of_top.iter().map(|id| bar.index_of(id).ok_or(format!("no `{id}` in bar")));
    let chain = BitVec::from_ones(bar.len(), ones.collect::<Result<Vec<_>, _>>()?);
    let want = vec![t.h_bar.coordinates(target, &chain).ok_or("oracle chain is not a cycle")?];
    Ok((got, want))
}

fn ac1_validator() -> Outcome {
    let mut out = Vec::new();
    for d in shipped() {
        let r = d.validate();
        ensure!(r.passed(), "{} fails validation: {}", d.name, r.summary());
        out.push(format!("{}: valid", d.name));
    }
    let oracles: BTreeMap<&str, [BTreeMap<i64, usize>; 3]> = singular_oracles().into_iter().collect();
    let boundaries: BTreeMap<&str, &[&str]> =
        [("interval", &["s", "u"][..]), ("hemisphere", &["u"][..]), ("disk4", &["u"][..])].into_iter().collect();
    let caught = |m: &BoundaryFlowData| -> Result<Option<&'static str>, String> {
        if !m.validate().passed() {
            return Ok(Some("validator"));
        }
        if flavor_dims(m)? != oracles[m.name.as_str()] {
            return Ok(Some("homology oracle"));
        }
        let moved = connecting_image(m, boundaries[m.name.as_str()]).map(|(got, want)| got != want).unwrap_or(true);
        Ok(moved.then_some("connecting-map oracle"))
    };
    for d in [gen_interval(), gen_hemisphere(), gen_disk4()] {
        let (got, want) = connecting_image(&d, boundaries[d.name.as_str()])?;
        ensure!(got == want, "{}: connecting map differs from the oracle", d.name);
    }
    let fixtures: [(BoundaryFlowData, FlowOp, &str, &str); 7] = [
        (gen_disk4(), FlowOp::Doo, "a", "c"),
        (gen_disk4(), FlowOp::Dos, "c", "s"),
        (gen_interval(), FlowOp::BdSu, "s", "u"),
        (gen_hemisphere(), FlowOp::BdSu, "s", "u"),
        (gen_interval(), FlowOp::Dus, "u", "s"),
        (gen_hemisphere(), FlowOp::BdUs, "u", "s"),
        (gen_disk4(), FlowOp::Doo, "c", "a"),
    ];
    for (d, op, src, dst) in fixtures {
        let m = d.toggled(op, src, dst).map_err(|e| e.to_string())?;
        let by = caught(&m)?.ok_or(format!("{}: fixture {} {src}->{dst} is not caught", d.name, op.name()))?;
        out.push(format!("fixture {} {} {src}->{dst}: caught by {by}", d.name, op.name()));
    }
    // exhaustive sweep; mutations no homology-level oracle can see are listed
    for d in [gen_interval(), gen_hemisphere(), gen_disk4()] {
        let (mut seen, mut invisible) = (0, Vec::new());
        for op in FlowOp::ALL {
            for s in d.points_of(op.source()) {
                for t in d.points_of(op.target()) {
                    let m = d.toggled(op, &s.id, &t.id).map_err(|e| e.to_string())?;
                    match caught(&m)? {
                        Some(_) => seen += 1,
                        None => invisible.push(format!("{} {}->{}", op.name(), s.id, t.id)),
                    }
                }
            }
        }
        out.push(format!("{} sweep: {seen} caught, invisible [{}]", d.name, invisible.join(", ")));
    }
    let named = [
        (gen_disk4().toggled(FlowOp::Dos, "c", "s"), vec!["os", "us"]),
        (gen_hemisphere().toggled(FlowOp::BdUs, "u", "s"), vec!["us"]),
        (gen_disk4().toggled(FlowOp::Doo, "c", "a"), vec![]),
    ];
    for (m, expect) in named {
        let m = m.map_err(|e| e.to_string())?;
        let r = m.validate();
        if expect.is_empty() {
            ensure!(!r.degree_violations.is_empty(), "expected a degree violation");
            out.push("disk4 d_oo c->a: degree violation".into());
        } else {
            ensure!(r.failed_identities() == expect, "identities {:?}, expected {expect:?}", r.failed_identities());
            out.push(format!("named identities {:?}", expect));
        }
    }
    Ok(out)
}

fn ac2_oracles() -> Outcome {
    let mut out = Vec::new();
    let by_name: BTreeMap<String, BoundaryFlowData> = shipped().into_iter().map(|d| (d.name.clone(), d)).collect();
    for (name, oracle) in singular_oracles() {
        let got = flavor_dims(&by_name[name])?;
        ensure!(got == oracle, "{name}: flow homology {got:?} differs from cellular {oracle:?}");
        out.push(format!(
            "{name}: to {} from {} bar {}",
            dims_str(&got[0]),
            dims_str(&got[1]),
            dims_str(&got[2])
        ));
    }
    Ok(out)
}

fn ac3_triangle() -> Outcome {
    let mut out = Vec::new();
    for d in shipped() {
        let t = d.triangle().map_err(|e| format!("{}: {e}", d.name))?;
        for (at, e) in ["to", "from", "bar"].iter().zip(&t.exactness) {
            ensure!(e.exact(), "{}: not exact at {at}, gradings {:?}", d.name, e.failures());
        }
        out.push(format!("{}: exact at to, from, bar", d.name));
    }
    Ok(out)
}

fn ac4_s3() -> Outcome {
    let mut out = Vec::new();
    for n in 1..=6usize {
        let d = gen_s3_tower(n, n);
        let [to, from, bar] = flavor_dims(&d)?;
        let want_to: BTreeMap<i64, usize> = (0..n as i64).map(|k| (2 * k, 1)).collect();
        let want_from: BTreeMap<i64, usize> = (0..n as i64).map(|k| (-1 - 2 * k, 1)).collect();
        ensure!(to == want_to, "N={n}: to tower {to:?}");
        ensure!(from == want_from, "N={n}: from tower {from:?}");
        ensure!(from.keys().max() == Some(&-1), "N={n}: from top");
        let mut want_bar = want_to.clone();
        want_bar.extend(want_from.keys().map(|g| (g - 1, 1)));
        ensure!(bar == want_bar, "N={n}: bar {bar:?}");
        let cap = d.u_cap().unwrap().clone();
        ensure!(cap.op(CrossOp::BmSu).is_some_and(|s| s.contains(&("s0".into(), "u0".into()))), "no bridge");
        let maps = assemble_cobordism_maps(&d, &d, &cap).map_err(|e| e.to_string())?;
        let u_to = maps.induced(Flavor::To).map_err(|e| e.to_string())?;
        for k in 0..n as i64 {
            let want = usize::from(k > 0);
            ensure!(u_to.rank_at(2 * k) == want, "N={n}: U rank at {} is {}", 2 * k, u_to.rank_at(2 * k));
        }
        let u_bar = maps.induced(Flavor::Bar).map_err(|e| e.to_string())?;
        ensure!(u_bar.rank_at(0) == 1, "N={n}: s0 does not reach the bridge");
        let h = froyshov(&UModule::from_flow(&d).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(h == Rational64::from_integer(0), "N={n}: h = {h}");
        out.push(format!("N={n}: to {} from {} h = {h}", dims_str(&to), dims_str(&from)));
    }
    Ok(out)
}

fn same_data(a: &BoundaryFlowData, b: &BoundaryFlowData) -> bool {
    let nonempty = |d: &BoundaryFlowData| {
        d.ops().iter().filter(|(_, s)| !s.is_empty()).map(|(k, s)| (*k, s.clone())).collect::<BTreeMap<_, _>>()
    };
    a.b1 == b.b1 && a.kind() == b.kind() && a.points() == b.points() && nonempty(a) == nonempty(b) && a.u_cap() == b.u_cap()
}

fn ac5_duality() -> Outcome {
    let mut out = Vec::new();
    let mut all = shipped();
    all.push(BoundaryFlowData::new("interval-b1", 2, GradingKind::Integer, gen_interval().points().to_vec(), gen_interval().ops().clone()).unwrap());
    for d in all {
        let dual = d.dualize().map_err(|e| e.to_string())?;
        let [to, from, _] = flavor_dims(&d)?;
        let [dto, dfrom, _] = flavor_dims(&dual)?;
        let flip = |m: &BTreeMap<i64, usize>| -> BTreeMap<i64, usize> {
            m.iter().map(|(&j, &n)| (-1 - i64::from(d.b1) - j, n)).collect()
        };
        ensure!(dto == flip(&from), "{}: dual to {dto:?} vs from {from:?}", d.name);
        ensure!(dfrom == flip(&to), "{}: dual from {dfrom:?} vs to {to:?}", d.name);
        let back = dual.dualize().map_err(|e| e.to_string())?;
        ensure!(same_data(&back, &d), "{}: double dual differs", d.name);
        out.push(format!("{}: dual to {} dual from {}", d.name, dims_str(&dto), dims_str(&dfrom)));
    }
    Ok(out)
}

fn real_path(samples: Vec<(f64, DMatrix<f64>)>) -> HermitianPath {
    HermitianPath::from_real(samples).unwrap()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
    (&a + a.transpose()) * 0.5
}

fn invertible(m: &DMatrix<f64>) -> bool {
    m.clone().symmetric_eigenvalues().iter().all(|x| x.abs() > 1e-3)
}

fn ac6_spectral_flow() -> Outcome {
    let mut out = Vec::new();
    let sampled = |f: &dyn Fn(f64) -> DMatrix<f64>, n: usize| HermitianPath::sampled(-1.0, 1.0, n, f).unwrap();
    let diag = spectral_flow(&sampled(&|t| DMatrix::from_element(1, 1, t), 8), DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure!(diag.flow == 1, "diag(t): {}", diag.flow);
    let constant =
        spectral_flow(&sampled(&|_| DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]), 4), DEFAULT_TOL).unwrap();
    ensure!(constant.flow == 0, "constant: {}", constant.flow);
    let avoided =
        spectral_flow(&sampled(&|t| DMatrix::from_row_slice(2, 2, &[t, 0.1, 0.1, -t]), 40), DEFAULT_TOL).unwrap();
    ensure!(avoided.flow == 0, "avoided crossing: {}", avoided.flow);
    out.push(format!("diag(t) {} constant {} avoided {}", diag.flow, constant.flow, avoided.flow));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut loops = 0;
    let mut crossings = 0;
    while loops < 100 {
        let n = rng.gen_range(1..=4);
        let (a, b, c) = (random_sym(&mut rng, n), random_sym(&mut rng, n), random_sym(&mut rng, n));
        let f = |t: f64| &a * t.cos() + &b * t.sin() + &c;
        if !invertible(&f(0.0)) {
            continue;
        }
        let count = 96;
        let mut samples: Vec<(f64, DMatrix<f64>)> =
            (0..=count).map(|k| 2.0 * std::f64::consts::PI * k as f64 / count as f64).map(|t| (t, f(t))).collect();
        samples[count].1 = samples[0].1.clone();
        let r = loop_flow_check(&real_path(samples), DEFAULT_TOL).map_err(|e| format!("loop {loops}: {e}"))?;
        crossings += r.crossings.len();
        loops += 1;
    }
    out.push(format!("100 random loops: flow 0, {crossings} crossings in total"));

    let mut pairs = 0;
    while pairs < 50 {
        let n = rng.gen_range(1..=4);
        let ms = [random_sym(&mut rng, n), random_sym(&mut rng, n), random_sym(&mut rng, n)];
        if !ms.iter().all(invertible) {
            continue;
        }
        let line = |x: &DMatrix<f64>, y: &DMatrix<f64>| HermitianPath::sampled(0.0, 1.0, 24, |t| x * (1.0 - t) + y * t).unwrap();
        let (p, q) = (line(&ms[0], &ms[1]), line(&ms[1], &ms[2]));
        let f = |p: &HermitianPath| spectral_flow(p, DEFAULT_TOL).map(|r| r.flow).map_err(|e| e.to_string());
        let (fp, fq, fpq) = (f(&p)?, f(&q)?, f(&p.concat(&q).unwrap())?);
        ensure!(fpq == fp + fq, "pair {pairs}: {fpq} != {fp} + {fq}");
        pairs += 1;
    }
    out.push("50 concatenated pairs: additive".into());
    Ok(out)
}

fn ac7_gradings() -> Outcome {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut b1 = 0i64;
    let mut checked = 0;
    while checked < 100 {
        let mut piece = |b1_in: i64| {
            let b1_out = rng.gen_range(0..4);
            let chi = rng.gen_range(-10..10);
            let mut sigma = rng.gen_range(-10..10);
            if (chi + sigma + b1_in - b1_out) % 2 != 0 {
                sigma += 1;
            }
            let c1 = Rational64::new(rng.gen_range(-40..40), rng.gen_range(1..5));
            TopologyNumbers::new(c1, chi, sigma, b1_in, b1_out)
        };
        let a = piece(b1);
        let b = piece(a.b1_out);
        b1 = b.b1_out;
        let ab = a.then(&b).map_err(|e| e.to_string())?;
        let (ia, ib, iab) = (iota(&a).unwrap(), iota(&b).unwrap(), iota(&ab).unwrap());
        ensure!(iab == ia + ib, "iota not additive: {iab} != {ia} + {ib}");
        let (da, db, dab) =
            (cobordism_map_degree(&a).unwrap(), cobordism_map_degree(&b).unwrap(), cobordism_map_degree(&ab).unwrap());
        ensure!(dab == da + db, "degree not additive");
        checked += 1;
    }
    out.push("iota and degree additive on 100 composable pairs".into());
    let q = Rational64::from_integer;
    for (name, c1, chi, sigma, want) in [("S4", 0, 2, 0, -1), ("K3", 0, 24, -16, 0), ("CP2", 9, 3, 1, 0)] {
        let got = closed_dimension(q(c1), chi, sigma);
        ensure!(got == q(want), "{name}: closed dimension {got}");
        out.push(format!("{name}: closed dimension {got}"));
    }
    // punctured negative definite spin manifold with b2 = 8, from S3 to S3
    let e8 = TopologyNumbers::new(q(0), 8, -8, 0, 0);
    let deg = cobordism_map_degree(&e8).map_err(|e| e.to_string())?;
    let b2 = 8;
    ensure!(deg == q(2), "definite fixture degree {deg}");
    ensure!(deg == (q(b2) - e8.c1_sq) / 4, "degree differs from (b2 - c1^2)/4");
    out.push(format!("definite fixture: degree {deg} = (b2 - c1^2)/4"));
    Ok(out)
}

fn ac8_rho() -> Outcome {
    let mut out = Vec::new();
    let r = |q: &QuadraticForm| rho(q, None, Exec::Parallel).map_err(|e| e.to_string());
    let one = r(&QuadraticForm::diagonal(&[-1]))?;
    ensure!(one.rho == Rational64::from_integer(0), "<-1>: {}", one.rho);
    for n in 1..=8 {
        let res = r(&QuadraticForm::diagonal(&vec![-1; n]))?;
        ensure!(res.rho == Rational64::from_integer(0), "-I{n}: {}", res.rho);
        ensure!(res.min_norm == n as i64, "-I{n}: min norm {}", res.min_norm);
    }
    out.push("<-1> and -I_n (n <= 8): rho = 0".into());
    let e8 = r(&minus_e8())?;
    ensure!(e8.rho == Rational64::from_integer(1), "-E8: {}", e8.rho);
    out.push(format!("-E8: rho = {} (witness {:?})", e8.rho, e8.witness));
    let h_s3 = froyshov(&UModule::from_flow(&gen_s3_tower(4, 4)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(h_s3 == Rational64::from_integer(0), "h(S3) = {h_s3}");
    for h in -3..=1 {
        let holds = check_froyshov_inequality(h_s3, Rational64::from_integer(h), e8.rho);
        ensure!(holds == (h <= -1), "inequality at h = {h}");
    }
    out.push("h(S3) = 0 >= h + 1 forces h <= -1".into());
    Ok(out)
}

fn ac9_pin2() -> Outcome {
    let mut out = Vec::new();
    for levels in 1..=4 {
        let c = lacunary_collapse(&gen_pin2_s3(levels), -1);
        ensure!(c.dims().is_some(), "{levels} levels: E1 does not collapse");
        let m = pin2_s3_module(levels).map_err(|e| e.to_string())?;
        let t = r_tower_decompose(&m).map_err(|e| e.to_string())?;
        ensure!((t.a, t.b, t.c) == (0, 1, 2), "{levels} levels: towers {:?}", (t.a, t.b, t.c));
        let terms = correction_terms(t.a, t.b, t.c).map_err(|e| e.to_string())?;
        ensure!(terms == CorrectionTerms::new(0, 0, 0), "terms {terms}");
        ensure!(rokhlin_lift_check(terms, 0) == Ok(true), "Rokhlin lift");
        ensure!(duality_terms(terms) == terms, "S3 is not self-dual");
    }
    out.push("pin2 S3 (1..4 levels): collapse, towers (0, 1, 2), terms (0, 0, 0)".into());
    for t in [CorrectionTerms::new(3, 1, -2), CorrectionTerms::new(0, 0, 0), CorrectionTerms::new(-1, -1, -5)] {
        ensure!(duality_terms(duality_terms(t)) == t, "duality is not an involution on {t}");
    }
    out.push("duality_terms is an involution".into());
    let v = order_two_argument(0, 0).map_err(|e| e.to_string())?;
    ensure!(v == OrderTwoVerdict::RokhlinZero && v.rokhlin() == Some(0), "order two verdict {v:?}");
    ensure!(order_two_argument(1, 1).is_err(), "antisymmetry not enforced");
    out.push("order two with beta = 0: Rokhlin 0".into());
    Ok(out)
}

fn circle4() -> (GradedComplex, Involution) {
    let mut gens: Vec<Generator> = (0..4).map(|i| Generator::new(format!("v{i}"), 0)).collect();
    gens.extend((0..4).map(|i| Generator::new(format!("e{i}"), 1)));
    let ids: Vec<(String, String)> =
        (0..4).flat_map(|i| [(format!("e{i}"), format!("v{i}")), (format!("e{i}"), format!("v{}", (i + 1) % 4))]).collect();
    let pairs: Vec<(&str, &str)> = ids.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let c = GradedComplex::from_pairs(GradingKind::Integer, gens, &pairs).unwrap();
    let perm = [2, 3, 0, 1, 6, 7, 4, 5];
    (c, Involution::from_permutation(&perm).unwrap())
}

fn doubled_acyclic() -> (GradedComplex, Involution) {
    let gens = vec![Generator::new("x", 1), Generator::new("y", 0), Generator::new("x'", 1), Generator::new("y'", 0)];
    let c = GradedComplex::from_pairs(GradingKind::Integer, gens, &[("x", "y"), ("x'", "y'")]).unwrap();
    (c, Involution::from_permutation(&[2, 3, 0, 1]).unwrap())
}

fn ac10_morse_bott() -> Outcome {
    let mut out = Vec::new();
    let cp2 = vec![BottLevel::new(0, 0, vec![1]), BottLevel::new(1, 2, vec![1]), BottLevel::new(2, 4, vec![1])];
    let dims = lacunary_collapse(&cp2, -1).dims().cloned().ok_or("CP2 model does not collapse")?;
    ensure!(dims == [(0, 1), (2, 1), (4, 1)].into_iter().collect(), "CP2: {dims:?}");
    ensure!(e1_page(&cp2).dims == dims, "E1 differs from the collapsed page");
    out.push(format!("CP2 model: {}", dims_str(&dims)));
    let (s2, inv) = antipodal_sphere(2);
    let rp2 = quotient_homology_via_invariants(&s2, &inv).map_err(|e| e.to_string())?.dims();
    ensure!(rp2 == [(0, 1), (1, 1), (2, 1)].into_iter().collect(), "S2/antipodal: {rp2:?}");
    out.push(format!("S2/antipodal: {}", dims_str(&rp2)));
    let mut fixtures: Vec<(String, (GradedComplex, Involution))> =
        (0..=4).map(|k| (format!("S{k} antipodal"), antipodal_sphere(k))).collect();
    fixtures.push(("circle rotation".into(), circle4()));
    fixtures.push(("doubled acyclic".into(), doubled_acyclic()));
    for (name, (c, inv)) in fixtures {
        let g = gysin_check(&c, &inv).map_err(|e| format!("{name}: {e}"))?;
        ensure!(g.passed(), "{name}: Gysin sequence not exact");
        out.push(format!("{name}: Gysin exact, quotient {}", dims_str(&g.h_invariant.dims())));
    }
    Ok(out)
}

fn ac11_cobordism() -> Outcome {
    let mut out = Vec::new();
    for d in shipped() {
        let maps = assemble_cobordism_maps(&d, &d, &CrossOperators::identity(&d)).map_err(|e| e.to_string())?;
        for f in Flavor::ALL {
            let m = maps.induced(f).map_err(|e| e.to_string())?;
            let h = d.homology(f).unwrap();
            for (&g, &n) in &h.dims() {
                let block = m.block(g).ok_or(format!("{}: missing block", d.name))?;
                ensure!(*block == floer_core::gf2::BitMatrix::identity(n), "{} {f}: not the identity at {g}", d.name);
            }
        }
    }
    out.push("identity cross-operators induce the identity on every dataset".into());
    let d = gen_s3_tower(4, 4);
    let u = assemble_cobordism_maps(&d, &d, d.u_cap().unwrap()).map_err(|e| e.to_string())?;
    let u2 = compose_maps(&u, &u).map_err(|e| e.to_string())?;
    let m = u2.induced(Flavor::To).map_err(|e| e.to_string())?;
    let ranks: Vec<usize> = [0, 2, 4, 6].iter().map(|&g| m.rank_at(g)).collect();
    ensure!(ranks == [0, 0, 1, 1], "U^2 ranks {ranks:?}");
    ensure!(m.degree == -4, "U^2 degree {}", m.degree);
    out.push(format!("U-cap twice on s3(4,4): degree -4, ranks {ranks:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut built, mut aborted) = (0, 0);
    for d in [gen_disk4(), gen_s3_tower(3, 3), gen_interval(), gen_hemisphere()] {
        for _ in 0..60 {
            let degree = rng.gen_range(-3..=1);
            let mut x = CrossOperators::new(degree);
            for _ in 0..rng.gen_range(1..5) {
                let op = CrossOp::ALL[rng.gen_range(0..CrossOp::ALL.len())];
                let src = d.points_of(op.source());
                let dst = d.points_of(op.target());
                if src.is_empty() || dst.is_empty() {
                    continue;
                }
                let s = &src[rng.gen_range(0..src.len())].id;
                let t = &dst[rng.gen_range(0..dst.len())].id;
                x.toggle(op, s, t);
            }
            match assemble_cobordism_maps(&d, &d, &x) {
                Ok(maps) => {
                    for f in Flavor::ALL {
                        ensure!(maps.get(f).validate().passed(), "{}: assembled {f} map is not a chain map", d.name);
                    }
                    built += 1;
                }
                Err(_) => aborted += 1,
            }
        }
    }
    ensure!(built > 0 && aborted > 0, "random operators: built {built}, aborted {aborted}");
    out.push(format!("random cross-operators: {built} verified chain maps, {aborted} aborted"));
    Ok(out)
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    ("AC1 validator suite", ac1_validator),
    ("AC2 singular homology oracles", ac2_oracles),
    ("AC3 exact triangle", ac3_triangle),
    ("AC4 S3 towers", ac4_s3),
    ("AC5 duality", ac5_duality),
    ("AC6 spectral flow", ac6_spectral_flow),
    ("AC7 grading formulas", ac7_gradings),
    ("AC8 rho and the Froyshov inequality", ac8_rho),
    ("AC9 Pin(2) layer", ac9_pin2),
    ("AC10 Morse-Bott oracles", ac10_morse_bott),
    ("AC11 cobordism algebra", ac11_cobordism),
];

fn run_suite() -> Vec<(&'static str, Outcome)> {
    CRITERIA
        .iter()
        .map(|&(name, f)| {
            let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
            (name, outcome)
        })
        .collect()
}

fn render(results: &[(&str, Outcome)]) -> String {
    let mut s = String::new();
    for (name, outcome) in results {
        match outcome {
            Ok(lines) => {
                s.push_str(&format!("[{name}] pass\n"));
                for l in lines {
                    s.push_str(&format!("  {l}\n"));
                }
            }
            Err(e) => s.push_str(&format!("[{name}] FAIL {e}\n")),
        }
    }
    s
}

fn main() {
    let verbose = std::env::args().any(|a| a == "--verbose");
    let first = run_suite();
    let second = run_suite();
    let (a, b) = (render(&first), render(&second));
    let mut failed = 0;
    for (name, outcome) in &first {
        match outcome {
            Ok(_) => println!("{name}: pass"),
            Err(e) => {
                failed += 1;
                println!("{name}: FAIL ({e})");
            }
        }
    }
    if a == b {
        println!("AC12 determinism: pass ({} report bytes identical across two runs)", a.len());
    } else {
        failed += 1;
        println!("AC12 determinism: FAIL (reports differ between runs)");
    }
    if verbose {
        print!("{a}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
