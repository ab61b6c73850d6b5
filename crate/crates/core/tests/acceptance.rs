//! One line per acceptance criterion, tolerances pinned below. Exits
//! nonzero if any criterion fails.

mod common;

use std::sync::Arc;

use genriem::einstein::{contorsion, einstein_connection, general_emc_connection, torsion_from_df};
use genriem::fields::{builtin, sample_points, FieldProvider, ManifoldSpec};
use genriem::geometry::{curvature, exterior_derivative_f, levi_civita, nijenhuis};
use genriem::structures::{involutivity_residual, special_tensors, spectral_split};
use genriem::tensor::relative_residual;
use genriem::verify::{identity_residual, run_suite, RunOptions, Suite, Verdict, VerificationReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 64;
const SEED: u64 = 42;

const FD_STEP: f64 = 1e-5;
const FD_FIRST: f64 = 1e-6;
const FD_SECOND: f64 = 1e-4;
const FLAT: f64 = 1e-12;
const SUITE_TOL: f64 = 1e-8;
const STRICTNESS: f64 = 0.1;
const SPREAD: f64 = 1e-7;
const INVOLUTIVE: f64 = 1e-8;
const ACM_AXIOMS: f64 = 1e-9;
const TWO_PATH: f64 = 1e-10;
const CONTROL: f64 = 1e-2;

type Outcome = Result<String, String>;
type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts(tol: f64) -> RunOptions {
    RunOptions {
        points: POINTS,
        seed: SEED,
        tol,
    }
}

fn provider(descriptor: &str) -> Fallible<Arc<FieldProvider>> {
    Ok(Arc::new(FieldProvider::new(builtin(descriptor)?)))
}

fn failures(report: &VerificationReport) -> Vec<String> {
    report
        .results
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .map(|r| format!("{} ({:?})", r.id, r.max_residual))
        .collect()
}

fn worst(report: &VerificationReport) -> f64 {
    report.results.iter().filter_map(|r| r.max_residual).fold(0.0, f64::max)
}

fn jets_vs_finite_differences() -> Fallible<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        use rand::Rng;
        let n = 1 + i % 3;
        let e = common::random_expr(&mut rng, n, 4, true);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = common::jet_vs_fd(&e, &p, FD_STEP);
        e1 = e1.max(a);
        e2 = e2.max(b);
    }
    Ok(check(
        e1 < FD_FIRST && e2 < FD_SECOND,
        format!("1000 expressions, first order {e1:.1e} < {FD_FIRST:e}, second order {e2:.1e} < {FD_SECOND:e}"),
    ))
}

fn flat_kahler() -> Fallible<Outcome> {
    let pr = provider("flat_kahler(4)")?;
    let ein = einstein_connection(pr.clone());
    let lc = levi_civita(pr.clone());
    let mut worst = [0.0f64; 5];
    for p in sample_points(&pr.spec().domain, POINTS, SEED) {
        let fj = pr.jets(&p, 1)?;
        let g = fj.g.value();
        let vals = [
            relative_residual(&ein.coefficients(&p)?, &lc.coefficients(&p)?),
            identity_residual("emc", &pr, &p)?,
            ein.torsion(&p)?.sup_norm(),
            curvature(&ein.connection().jet(&p)?).sup_norm(),
            nijenhuis(&fj.a.value(), &fj.a.gradient(), &g).sup_norm(),
        ];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
    }
    let [conn, emc, t, r, na] = worst;
    Ok(check(
        worst.iter().all(|&w| w < FLAT),
        format!("Γ − Γᵍ {conn:.1e}, emc {emc:.1e}, T {t:.1e}, R {r:.1e}, N_A {na:.1e} (all < {FLAT:e})"),
    ))
}

fn s6_hermitian() -> Fallible<Outcome> {
    let spec = builtin("s6")?;
    let report = run_suite(&spec, Suite::Hermitian, &opts(SUITE_TOL))?;
    let pr = FieldProvider::new(spec);
    let mut df = 0.0f64;
    for p in sample_points(&pr.spec().domain, POINTS, SEED) {
        df = df.max(exterior_derivative_f(&pr, &p)?.sup_norm());
    }
    let fails = failures(&report);
    let passed = report.count(Verdict::Pass);
    Ok(check(
        fails.is_empty() && passed == report.results.len() && df > STRICTNESS,
        format!(
            "{passed}/{} identities pass at tol {SUITE_TOL:e} (worst {:.1e}), sup |dF| = {df:.3} > {STRICTNESS}{}",
            report.results.len(),
            worst(&report),
            if fails.is_empty() {
                String::new()
            } else {
                format!("; failing {fails:?}")
            }
        ),
    ))
}

fn weighted_tori_split() -> Fallible<Outcome> {
    let pr = provider("weighted_product([t2, t2], [1, 4])")?;
    let points = sample_points(&pr.spec().domain, POINTS, SEED);
    let split = spectral_split(&pr, &points)?;
    let (mut bracket, mut geodesic) = (0.0f64, 0.0f64);
    for p in &points {
        for r in involutivity_residual(&split, &pr, p)? {
            bracket = bracket.max(r.bracket);
            geodesic = geodesic.max(r.geodesic);
        }
    }
    let lambdas_ok = split.eigenvalues.len() == 2
        && (split.eigenvalues[0] - 1.0).abs() < SPREAD
        && (split.eigenvalues[1] - 4.0).abs() < SPREAD;
    Ok(check(
        split.k() == 2
            && lambdas_ok
            && split.multiplicities == [2, 2]
            && split.spread <= SPREAD
            && bracket < INVOLUTIVE
            && geodesic < INVOLUTIVE,
        format!(
            "k = {}, λ = {:?}, multiplicities {:?}, spread {:.1e} ≤ {SPREAD:e}, bracket {bracket:.1e}, geodesic {geodesic:.1e} (< {INVOLUTIVE:e})",
            split.k(),
            split.eigenvalues,
            split.multiplicities,
            split.spread
        ),
    ))
}

fn line_product_s6() -> Fallible<Outcome> {
    let spec = builtin("line_product(s6)")?;
    let axioms = run_suite(&spec, Suite::Acm, &opts(ACM_AXIOMS))?;
    let all = run_suite(&spec, Suite::All, &opts(SUITE_TOL))?;
    let pr = FieldProvider::new(spec);
    let mut deta = 0.0f64;
    for p in sample_points(&pr.spec().domain, POINTS, SEED) {
        deta = deta.max(special_tensors(&pr, &p)?.deta.sup_norm());
    }
    let reeb_ids = ["acm", "reeb_kill", "reeb_geo", "deta_xi", "anc"];
    let contact_ids = [
        "nwac_skew",
        "skewacB1",
        "n51",
        "nablaQ_g",
        "nablaQ",
        "tordf",
        "t38",
        "ein_g",
        "ein_f",
        "mainw",
    ];
    let passes = |r: &VerificationReport, id: &str| r.get(id).is_some_and(|x| x.verdict == Verdict::Pass);
    let missing: Vec<&str> = reeb_ids
        .iter()
        .filter(|id| !passes(&axioms, id))
        .chain(contact_ids.iter().filter(|id| !passes(&all, id)))
        .copied()
        .collect();
    let fails = [failures(&axioms), failures(&all)].concat();
    Ok(check(
        missing.is_empty() && fails.is_empty() && deta < FLAT,
        format!(
            "axioms and Reeb identities {} ids < {ACM_AXIOMS:e} (worst {:.1e}), {} contact ids < {SUITE_TOL:e} (worst {:.1e}), sup |dη| {deta:.1e}{}",
            reeb_ids.len(),
            worst(&axioms),
            contact_ids.len(),
            worst(&all),
            if missing.is_empty() && fails.is_empty() { String::new() } else { format!("; failing {missing:?} {fails:?}") }
        ),
    ))
}

fn two_path() -> Fallible<Outcome> {
    let descriptors = [
        "flat_kahler(4)",
        "t2",
        "round_s2(1.5)",
        "s6",
        "weighted_product([t2, t2], [1, 4])",
        "weighted_product([s6, flat_kahler(2)], [1, 3])",
        "line_product(s6)",
        "line_product(flat_kahler(4))",
        "control_noncriterion",
        "control_drift",
    ];
    let mut worst = [0.0f64; 4];
    let mut bad = Vec::new();
    for d in descriptors {
        let pr = provider(d)?;
        let ein = einstein_connection(pr.clone());
        let general = general_emc_connection(pr.clone(), torsion_from_df);
        let mut local = [0.0f64; 4];
        for p in sample_points(&pr.spec().domain, 16, SEED) {
            let vals = [
                identity_residual("nuj1_xcheck", &pr, &p)?,
                relative_residual(&ein.coefficients(&p)?, &general.coefficients(&p)?),
                identity_residual("contorsion_xcheck", &pr, &p)?,
                relative_residual(&contorsion(ein.connection(), &p)?, &contorsion(&general, &p)?),
            ];
            for (w, v) in local.iter_mut().zip(vals) {
                *w = w.max(v);
            }
        }
        if local.iter().any(|&v| !(v < TWO_PATH)) {
            bad.push(format!("{d}: {local:?}"));
        }
        for (w, v) in worst.iter_mut().zip(local) {
            *w = w.max(v);
        }
    }
    let [nij, conn, kform, kconn] = worst;
    Ok(check(
        bad.is_empty(),
        format!(
            "{} builtins, Nijenhuis {nij:.1e}, connection {conn:.1e}, contorsion formula {kform:.1e}, contorsion {kconn:.1e} (all < {TWO_PATH:e}){}",
            descriptors.len(),
            if bad.is_empty() { String::new() } else { format!("; {bad:?}") }
        ),
    ))
}

fn negative_controls() -> Fallible<Outcome> {
    let report = run_suite(&builtin("control_noncriterion")?, Suite::Emc, &opts(SUITE_TOL))?;
    let residual = |id: &str| report.get(id).and_then(|r| r.max_residual).unwrap_or(f64::NAN);
    let fails = |id: &str| report.get(id).is_some_and(|r| r.verdict == Verdict::Fail);
    let (skew1, emc) = (residual("skew1"), residual("emc"));
    let drift = run_suite(&builtin("control_drift")?, Suite::Splitting, &opts(SUITE_TOL))?;
    let spectral = drift.get("spectral").map(|r| r.verdict);
    Ok(check(
        fails("skew1") && fails("emc") && skew1 > CONTROL && emc > CONTROL && spectral == Some(Verdict::Fail),
        format!("control_noncriterion skew1 {skew1:.3}, emc {emc:.3} (> {CONTROL:e}, fail); control_drift spectral {spectral:?}"),
    ))
}

fn determinism() -> Fallible<Outcome> {
    let mut same = true;
    for (d, suite) in [
        ("s6", Suite::All),
        ("line_product(s6)", Suite::Acm),
        ("control_drift", Suite::Splitting),
    ] {
        let spec = builtin(d)?;
        let a = run_suite(&spec, suite, &opts(SUITE_TOL))?;
        let b = run_suite(&ManifoldSpec::from_json(&spec.to_json())?, suite, &opts(SUITE_TOL))?;
        same &= a.to_json() == b.to_json() && a.to_text() == b.to_text();
    }
    Ok(check(
        same,
        format!("three suites rerun with seed {SEED}: JSON and text reports byte-identical"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Fallible<Outcome>); 8] = [
        ("jet derivatives vs central differences", jets_vs_finite_differences),
        ("flat Kähler ℝ⁴ reduces to Levi-Civita", flat_kahler),
        ("S⁶ hermitian suite, strictly nearly Kähler", s6_hermitian),
        ("weighted tori split into two eigen-distributions", weighted_tori_split),
        ("ℝ × S⁶ contact identities", line_product_s6),
        ("two-path equivalences on every builtin", two_path),
        ("negative controls fail", negative_controls),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {} {tag}  {name}: {detail}", i + 1);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
