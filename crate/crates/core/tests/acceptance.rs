//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the summary is printed even
//! when every criterion passes.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nondiv_hom::constructions::quadrature::constant_trace_c212_integral;
use nondiv_hom::constructions::{gallery, perturb_type_eps, GALLERY_NAMES};
use nondiv_hom::dirichlet::{preset, run_rate_experiment, Expression, RateConfig, RateExperiment};
use nondiv_hom::field::{PeriodicField, WaveTerm};
use nondiv_hom::homogenize::{classify, third_order_tensor, CellSolution};
use nondiv_hom::solver::dense::dense_invariant_measure;
use nondiv_hom::solver::operator_for;
use nondiv_hom::suites::{lemma22, lemma32, thm11, thm12, thm13, SuiteConfig, SuiteReport};
use nondiv_hom::{ClassifyConfig, Discretization, Result, SolverConfig, Verdict};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn st_ref() -> f64 {
    -1.0 / (128.0 * PI)
}

fn suite_line(r: &SuiteReport, worst: &[(&str, f64)]) -> String {
    let mut parts: Vec<String> = worst.iter().map(|(p, lim)| format!("{p} {:.2e} (<= {lim:.0e})", r.worst(p))).collect();
    parts.push(format!("{} checks, {} failed, seed {}", r.checks.len(), r.failures().count(), r.seed));
    if let Some(f) = r.failures().next() {
        parts.push(format!("first failure: {}", f.label));
    }
    parts.join("; ")
}

fn criterion_1() -> Result<Outcome> {
    let t0 = Instant::now();
    let a = gallery::<f64>("st_2d")?.field;
    let t = third_order_tensor(&a, &SolverConfig::default().with_resolution(128))?;
    let elapsed = t0.elapsed();
    let e1 = (t.get(0, 0, 0) - st_ref()).abs().max((t.get(0, 1, 1) - st_ref()).abs());
    let e2 = t.get(1, 0, 0).abs().max(t.get(1, 1, 1).abs());
    let off = (0..2).map(|j| t.get(j, 0, 1).abs()).fold(0.0, f64::max);
    let ok = e1 <= 1e-8 && e2 <= 1e-9 && off <= 1e-9 && elapsed < Duration::from_secs(5);
    outcome(
        ok,
        format!(
            "st_2d at N = 128: c_1^11 = {:.9e}, |c_1^kk + 1/(128 pi)| = {e1:.1e}, |c_2^kk| = {e2:.1e}, max |c_j^12| = {off:.1e}, {:.2} s",
            t.get(0, 0, 0),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let r = lemma32(&SuiteConfig::default());
    let st: Vec<_> = r.checks.iter().filter(|c| c.label.ends_with("(st)")).collect();
    let q = st.iter().filter(|c| c.label.starts_with("Q")).map(|c| c.value).fold(0.0, f64::max);
    let p = st.iter().filter(|c| c.label.starts_with("predicted")).map(|c| c.value).fold(0.0, f64::max);
    let ok = st.len() == 5 && st.iter().all(|c| c.passed);
    outcome(ok, format!("|Q - (-1/(128 pi))| = {q:.1e} (<= 1e-10), predicted vs pipeline {p:.1e} (<= 1e-8)"))
}

fn criterion_3() -> Result<Outcome> {
    let t0 = Instant::now();
    let r = thm11(&SuiteConfig { trials: 50, ..Default::default() });
    let elapsed = t0.elapsed();
    let mut line = suite_line(&r, &[("max|c|", 1e-8), ("r closed form", 1e-8), ("v closed form", 1e-8)]);
    line.push_str(&format!("; {:.1} s", elapsed.as_secs_f64()));
    outcome(r.passed && elapsed < Duration::from_secs(120), line)
}

fn criterion_4() -> Result<Outcome> {
    let r = lemma22(&SuiteConfig { trials: 20, ..Default::default() });
    let line = suite_line(
        &r,
        &[("r identity", 1e-8), ("Abar identity", 1e-8), ("corrector identity", 1e-8), ("tensor identity", 1e-8)],
    );
    outcome(r.passed, line)
}

fn criterion_5() -> Result<Outcome> {
    let r = thm13(&SuiteConfig { trials: 20, ..Default::default() });
    outcome(r.passed, suite_line(&r, &[("max|c(gamma A)|", 1e-8)]))
}

fn criterion_6() -> Result<Outcome> {
    let a = gallery::<f64>("const_trace_typeeps_2d")?.field;
    let rep = classify(&a, &ClassifyConfig::default().with_resolution(64))?;
    let (c64, c128) = (rep.coarse.get(1, 0, 1), rep.tensor.get(1, 0, 1));
    let oracle = constant_trace_c212_integral(1e-12);
    let stable = (c64 - c128).abs() <= 0.05 * c128.abs();
    let ok = c128 > 0.0 && (0.0025..=0.0045).contains(&c128) && stable && (oracle - c128).abs() <= 1e-6;
    outcome(
        ok,
        format!("c_2^12 = {c128:.9e} (N = 128), {c64:.9e} (N = 64), 1D integral {oracle:.9e}, |diff| = {:.1e}", (oracle - c128).abs()),
    )
}

fn criterion_7() -> Result<Outcome> {
    let a = gallery::<f64>("rate_example_3d")?.field;
    let t = third_order_tensor(&a, &SolverConfig::default().with_resolution(32))?;
    let e111 = (t.get(0, 0, 0) - st_ref()).abs();
    let e133 = (t.get(0, 2, 2) - 1.0 / (64.0 * PI)).abs();
    let g = Expression::parse("8*x1^3 - 3*x1*x3^2", 3)?;
    let mut d3 = [[[0.0f64; 3]; 3]; 3];
    for (j, dj) in d3.iter_mut().enumerate() {
        for (k, dk) in dj.iter_mut().enumerate() {
            for (l, v) in dk.iter_mut().enumerate() {
                *v = g.derivative(&[j, k, l])?.eval(&[0.3, 0.6, 0.9]);
            }
        }
    }
    let source = t.contract(|j, k, l| d3[j][k][l]);
    let es = (source + 15.0 / (32.0 * PI)).abs();
    outcome(
        e111 <= 1e-7 && e133 <= 1e-7 && es <= 1e-7,
        format!("|c_1^11 + 1/(128 pi)| = {e111:.1e}, |c_1^33 - 1/(64 pi)| = {e133:.1e}, source {source:.9e}, |source + 15/(32 pi)| = {es:.1e}"),
    )
}

fn criterion_8() -> Result<Outcome> {
    let cfg = ClassifyConfig::default().with_resolution(64);
    let base = nondiv_hom::constructions::gallery::a_plus_identity_base::<f64>(256)?;
    let rb = classify(&base, &cfg)?;
    let plus = gallery::<f64>("a_plus_identity_2d")?.field;
    let rp = classify(&plus, &cfg)?;
    let (c64, c128) = (rp.coarse.get(0, 0, 0), rp.tensor.get(0, 0, 0));
    let stable = (c64 - c128).abs() <= 0.05 * c128.abs();
    let ok = rb.verdict == Verdict::TypeEps2
        && rb.max_c <= 1e-7
        && rp.verdict == Verdict::TypeEps
        && (3e-4..=8e-4).contains(&c128)
        && stable;
    outcome(
        ok,
        format!(
            "base: {} (max |C| {:.1e}); A + I: {} with c_1^11 = {c128:.6e} (N = 128), {c64:.6e} (N = 64)",
            rb.verdict, rb.max_c, rp.verdict
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let a = gallery::<f64>("r_one_diagonal_2d")?.field;
    let rep = classify(&a, &ClassifyConfig::default().with_resolution(64))?;
    let sol = CellSolution::new(&a, &SolverConfig::default().with_resolution(128))?;
    let r_dev = sol.r.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let mut a_dev: f64 = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            a_dev = a_dev.max((sol.effective[k][l] - if k == l { 1.0 } else { 0.0 }).abs());
        }
    }
    let c = rep.tensor.get(0, 0, 0);
    let gap = (rep.coarse.get(0, 0, 0) - c).abs();
    let ok = r_dev <= 1e-10
        && a_dev <= 1e-9
        && c < 0.0
        && (3e-6..=3e-5).contains(&c.abs())
        && gap < 0.2 * c.abs()
        && rep.verdict == Verdict::TypeEps;
    outcome(
        ok,
        format!("|r - 1| = {r_dev:.1e}, |Abar - I| = {a_dev:.1e}, c_1^11 = {c:.6e}, gap {gap:.1e}, {}", rep.verdict),
    )
}

fn criterion_10() -> Result<Outcome> {
    let n = 64;
    let a = PeriodicField::<f64>::from_terms(2, vec![WaveTerm::sin(&[1, 1], 0.5)], n)?;
    let solver = SolverConfig::default().with_resolution(n);
    let p = perturb_type_eps(&a, 0.05, &solver)?;
    let c = CellSolution::new(&p.field, &solver)?.tensor().get(0, 0, 0);
    let diff = (c - p.predicted_c111).abs();
    outcome(
        diff <= 1e-8 && c < 0.0,
        format!("c_1^11 = {c:.9e}, closed form {:.9e}, |diff| = {diff:.1e}", p.predicted_c111),
    )
}

fn criterion_11() -> Result<Outcome> {
    let r = thm12(&SuiteConfig { trials: 20, ..Default::default() });
    let agree = r.checks.iter().filter(|c| c.label.starts_with("verdicts agree")).collect::<Vec<_>>();
    let ok = agree.len() == 20 && agree.iter().all(|c| c.passed);
    outcome(ok, format!("{} of {} verdict pairs agree; {}", agree.iter().filter(|c| c.passed).count(), agree.len(), suite_line(&r, &[])))
}

fn rate_line(exp: &RateExperiment) -> String {
    let rows: Vec<String> = exp.rows.iter().map(|r| format!("1/{:.0}: {:.3e}/{:.3e}", 1.0 / r.epsilon, r.error_u, r.error_z)).collect();
    let fit = |f: Option<nondiv_hom::dirichlet::RateFit>| f.map(|f| format!("{:.3} (res {:.3})", f.slope, f.residual)).unwrap_or("n/a".into());
    format!("rate_u {}, rate_z {}, errors u/z {}", fit(exp.fit_u), fit(exp.fit_z), rows.join(", "))
}

fn criterion_12a() -> Result<Outcome> {
    let t0 = Instant::now();
    let exp = run_rate_experiment(&preset::<f64>("optimal_rate_3d")?, &RateConfig::default())?;
    let (Some(fu), Some(fz)) = (exp.fit_u, exp.fit_z) else {
        return outcome(false, "no fit".into());
    };
    let ok = fu.residual < 0.05 && (0.85..=1.15).contains(&fu.slope) && fz.residual < 0.05 && fz.slope >= 1.6;
    outcome(ok, format!("{}; {:.0} s", rate_line(&exp), t0.elapsed().as_secs_f64()))
}

fn criterion_12b() -> Result<Outcome> {
    let t0 = Instant::now();
    let exp = run_rate_experiment(&preset::<f64>("diagonal_2d")?, &RateConfig::default())?;
    let ok = exp.fit_u.is_some_and(|f| f.residual < 0.05 && (1.8..=2.2).contains(&f.slope));
    outcome(ok, format!("{}; {:.0} s", rate_line(&exp), t0.elapsed().as_secs_f64()))
}

fn criterion_13() -> Result<Outcome> {
    let n = 16;
    let cfg = SolverConfig::default().with_resolution(n);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in GALLERY_NAMES {
        if name.ends_with("_3d") {
            continue;
        }
        let a = gallery::<f64>(name)?.field;
        let (krylov, _) = operator_for(&a, &cfg)?.invariant_measure(&cfg)?;
        let dense = dense_invariant_measure(2, n, &a.sample_values(n)?, Discretization::Spectral)?;
        let d = krylov.iter().zip(&dense).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
        count += 1;
    }
    outcome(worst <= 1e-10, format!("{count} planar gallery fields, max |r_krylov - r_dense| = {worst:.1e}"))
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Result<Outcome>); 14] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
        ("11", criterion_11),
        ("12a", criterion_12a),
        ("12b", criterion_12b),
        ("13", criterion_13),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if filter.as_deref().is_some_and(|f| f != id) {
            continue;
        }
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {id:>3}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
