// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wlab_core::analyzer::{
    bell_success_rates_exact, derive_detection_table, detection_table, propagate_w,
};
use wlab_core::fock::{Amplitude, Mode, Monomial, Spatial};
use wlab_core::keyrate::{
    case_breakdown, e1_identical, error_gain_general, evaluate, q1_general, q1_identical,
    secure_distance, AnalyzerConstants, ChannelParams, NoiseParams, RateParams, SecureDistance,
    Transmittances,
};
use wlab_core::protocol::{
    estimate, exact_enumerate, run_trials, Accounting, Basis, ProtocolModel, TrialConfig,
};
use wlab_core::qubit::{BellKind, WLabel};
use wlab_core::scalar::Scalar;
use wlab_core::verify;

const GOLDEN_TABLE: &str = include_str!("../../cli/golden/table1.csv");

struct Criterion {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Criterion {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Criterion {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn label(c: char) -> WLabel {
    c.to_string().parse().unwrap()
}

fn table_reproduction() -> Result<String, String> {
    let start = Instant::now();
    let table = derive_detection_table();
    let elapsed = start.elapsed();
    ensure(table.to_csv() == GOLDEN_TABLE, || {
        format!("table differs from the golden table:\n{}", table.to_csv())
    })?;
    for (c, n, p64) in [('0', 12, 3), ('1', 4, 1), ('c', 12, 3), ('d', 4, 1)] {
        let l = label(c);
        let count = table.patterns(l).map_or(0, |p| p.len());
        ensure(count == n, || format!("{l}: {count} patterns"))?;
        let p = table.success_probability(l);
        ensure(p == Scalar::dyadic(p64, 6), || format!("{l}: {p}"))?;
    }
    ensure(table.pattern_count() == 32, || {
        format!("{} patterns", table.pattern_count())
    })?;
    let dp = table.overall_success();
    ensure(dp == Scalar::dyadic(1, 7), || format!("D_p = {dp}"))?;
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "32 patterns, D_p = 1/128, derived in {elapsed:.2?}"
    ))
}

fn w0_regression() -> Result<String, String> {
    use Spatial::*;
    let out = propagate_w(label('0'));
    ensure(out.len() == 200, || format!("{} monomials", out.len()))?;
    let mono =
        |m: &[(Spatial, u32)]| Monomial::new(m.iter().map(|&(s, t)| Mode::new(s, t)).collect());
    let checks = [
        (mono(&[(S, 0), (S, 1), (S, 1), (S, 1)]), 64),
        (mono(&[(S, 0), (U, 1), (V, 0), (W, 2)]), 128),
    ];
    for (m, num) in checks {
        let want = Amplitude::phased(Scalar::dyadic(num, 11), 2);
        let got = out.amplitude(&m);
        ensure(got == want, || format!("{m}: {got} != {want}"))?;
    }
    Ok("200 monomials; 64φ²/2048 and 128φ²/2048 exact".into())
}

fn identity_suite() -> Result<String, String> {
    let suites = [
        verify::orthonormality(),
        verify::bell_decomposition(),
        verify::x_basis_expansions(),
        verify::computational_basis_in_w_basis(),
        verify::entanglement_swapping(),
        verify::pauli_catalog(),
        verify::isometries(),
        verify::propagation_anchors(),
    ];
    let checks: usize = suites.iter().map(|s| s.checks).sum();
    let failures: Vec<String> = suites
        .iter()
        .flat_map(|s| s.failures.iter().map(move |f| format!("{}: {f}", s.name)))
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    let ortho = &suites[0];
    ensure(ortho.checks == 256, || {
        format!("{} inner products", ortho.checks)
    })?;
    Ok(format!("{} suites, {checks} exact checks", suites.len()))
}

fn bell_rates() -> Result<String, String> {
    let rates = bell_success_rates_exact(false);
    let want = [
        (BellKind::PsiPlus, Scalar::one()),
        (BellKind::PsiMinus, Scalar::half()),
        (BellKind::PhiPlus, Scalar::half()),
        (BellKind::PhiMinus, Scalar::zero()),
    ];
    for (k, w) in want {
        ensure(rates[&k] == w, || format!("{k}: {}", rates[&k]))?;
    }
    Ok("psi+ 1, psi- 1/2, phi+ 1/2, phi- 0 at delta = 0".into())
}

fn key_rate_checkpoints() -> Result<String, String> {
    let k0 = AnalyzerConstants::from_table(detection_table());
    let noise = NoiseParams { y0: 6.02e-6 };
    let rate = RateParams { q: 1.0 };
    let channel = |eta_d| ChannelParams {
        alpha: 0.2,
        arm_length_km: 0.0,
        eta_d,
    };
    let mut detail = Vec::new();
    for (eta_d, lo, hi) in [(0.145, 175.0, 195.0), (0.93, 250.0, 275.0)] {
        let start = Instant::now();
        let d = match secure_distance(&channel(eta_d), &noise, &k0, &rate, 1000.0) {
            Ok(SecureDistance::Crossing(d)) => d,
            other => return Err(format!("eta_d {eta_d}: {other:?}")),
        };
        let t = start.elapsed();
        ensure((lo..=hi).contains(&d), || format!("eta_d {eta_d}: {d} km"))?;
        ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
        detail.push(format!("{d:.2} km"));
    }
    for (eta_d, dist) in [(0.145, 100.0), (0.93, 180.0)] {
        let start = Instant::now();
        let r0 = evaluate(&channel(eta_d), &noise, &k0, &rate, dist).r0;
        let t = start.elapsed();
        ensure((2e-11..=5e-10).contains(&r0), || {
            format!("R0({dist} km, eta_d {eta_d}) = {r0:e}")
        })?;
        ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
        detail.push(format!("R0 {r0:.3e}"));
    }
    Ok(detail.join(", "))
}

fn to_big(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn formula_reduction() -> Result<String, String> {
    let k0 = AnalyzerConstants::from_table(detection_table());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut points = Vec::new();
    for _ in 0..1000 {
        let eta = 10f64.powf(rng.random_range(-4.0..0.0));
        let y0 = 10f64.powf(rng.random_range(-8.0..-2.0));
        let t = Transmittances::uniform(eta);
        let q = q1_general(&t, &y0, &k0);
        let e = error_gain_general(&t, &y0, &k0) / q;
        let qi = q1_identical(&eta, &y0, &k0);
        let ei = e1_identical(&eta, &y0, &k0).map_err(|e| e.to_string())?;
        worst = worst.max(rel(q, qi)).max(rel(e, ei));
        points.push((eta, y0));
    }
    ensure(worst <= 1e-12, || format!("worst relative error {worst:e}"))?;

    let k0 = AnalyzerConstants::exact_from_table(detection_table());
    let big = |r: num_rational::Rational64| {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    };
    let k0 = AnalyzerConstants {
        dp0: big(k0.dp0),
        dp1: big(k0.dp1),
    };
    for &(eta, y0) in points.iter().take(25) {
        let (eta, y0) = (to_big(eta), to_big(y0));
        let t = Transmittances::uniform(eta.clone());
        let q = q1_general(&t, &y0, &k0);
        ensure(q == q1_identical(&eta, &y0, &k0), || {
            "exact Q1 differs".into()
        })?;
        let e = error_gain_general(&t, &y0, &k0) / q;
        let ei = e1_identical(&eta, &y0, &k0).map_err(|e| e.to_string())?;
        ensure(e == ei, || "exact e1 differs".into())?;
    }
    Ok(format!(
        "1000 points, worst {worst:.1e}; 25 exact rational points equal"
    ))
}

fn oracle_equivalence() -> Result<String, String> {
    let table = detection_table();
    let k0 = AnalyzerConstants::from_table(table);
    let model = ProtocolModel::new(table, Basis::Z, 0.0);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let f = i as f64 / 19.0;
        let eta = 10f64.powf(-3.0 * (1.0 - f));
        // Y0 sweeps in the opposite direction so both corners are covered
        let y0 = 10f64.powf(-7.0 + 3.0 * ((i * 7) % 20) as f64 / 19.0);
        let cfg = TrialConfig::uniform(eta, y0);
        let e = exact_enumerate(&model, &cfg).map_err(|e| e.to_string())?;
        let cf = case_breakdown(&Transmittances::uniform(eta), &y0, &k0);
        let q1 = q1_identical(&eta, &y0, &k0);
        let e1 = e1_identical(&eta, &y0, &k0).map_err(|e| e.to_string())?;
        let mut deltas = vec![
            ("Q1".to_string(), rel(e.q1, q1)),
            ("e1".to_string(), rel(e.e1.unwrap_or(f64::NAN), e1)),
        ];
        for k in 0..5 {
            deltas.push((
                format!("gain case {}", k + 1),
                rel(e.breakdown.gain[k], cf.gain[k]),
            ));
            deltas.push((
                format!("error case {}", k + 1),
                rel(e.breakdown.error[k], cf.error[k]),
            ));
        }
        for (what, d) in deltas {
            ensure(d <= 1e-9, || {
                format!("eta {eta:e}, Y0 {y0:e}: {what} relative delta {d:e}")
            })?;
            worst = worst.max(d);
        }
    }
    Ok(format!("20 points, worst relative delta {worst:.1e}"))
}

fn monte_carlo() -> Result<String, String> {
    let model = ProtocolModel::new(detection_table(), Basis::Z, 0.0);
    let cfg = TrialConfig {
        trials: 10_000_000,
        seed: 42,
        ..TrialConfig::uniform(0.5, 1e-5)
    };
    let exact = exact_enumerate(&model, &cfg).map_err(|e| e.to_string())?;
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(|| run_trials(&model, &cfg))
            .map_err(|e| e.to_string())
    };
    let start = Instant::now();
    let tally = in_pool(0)?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    let est = estimate(&tally).map_err(|e| e.to_string())?;

    let n = tally.trials as f64;
    let sigma_q = (exact.q1 * (1.0 - exact.q1) / n).sqrt();
    let zq = (est.q1_hat - exact.q1) / sigma_q;
    ensure(zq.abs() <= 3.0, || {
        format!("Q1_hat {:e} vs {:e}: {zq:.2} sigma", est.q1_hat, exact.q1)
    })?;
    let e1 = exact.e1.ok_or("no exact e1")?;
    let e1_hat = est.e1_hat.clone().map_err(|e| e.to_string())?;
    let m = (tally.accepted - tally.undefined) as f64;
    let sigma_e = (e1 * (1.0 - e1) / m).sqrt();
    let ze = (e1_hat - e1) / sigma_e;
    ensure(ze.abs() <= 3.0, || {
        format!("e1_hat {e1_hat:e} vs {e1:e}: {ze:.2} sigma")
    })?;

    for threads in [1, 3] {
        let other = in_pool(threads)?;
        ensure(other == tally, || format!("{threads}-thread run differs"))?;
    }
    Ok(format!(
        "Q1 {:+.2} sigma, e1 {:+.2} sigma, {t:.2?}; identical at 1 and 3 threads",
        zq, ze
    ))
}

fn accounting_gap() -> Result<String, String> {
    let table = detection_table();
    let model = ProtocolModel::new(table, Basis::Z, 0.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (eta_d, dmax) in [(0.145, 180.0), (0.93, 260.0)] {
        let channel = ChannelParams {
            alpha: 0.2,
            arm_length_km: 0.0,
            eta_d,
        };
        let mut d = 0.0;
        while d <= dmax {
            let eta = wlab_core::keyrate::transmittance(&channel.at_end_to_end(d));
            let paper = TrialConfig::uniform(eta, 6.02e-6);
            let physical = TrialConfig {
                accounting: Accounting::Physical,
                ..paper.clone()
            };
            let p = exact_enumerate(&model, &paper).map_err(|e| e.to_string())?;
            let q = exact_enumerate(&model, &physical).map_err(|e| e.to_string())?;
            let gap = rel(q.q1, p.q1);
            ensure(gap <= 0.02, || {
                format!("eta_d {eta_d}, {d} km: relative gap {gap:e}")
            })?;
            worst = worst.max(gap);
            count += 1;
            d += 20.0;
        }
    }
    Ok(format!("{count} points, worst relative gap {worst:.2e}"))
}

fn main() {
    let criteria = [
        run(1, "detection-table reproduction", table_reproduction),
        run(2, "W0 expansion regression", w0_regression),
        run(3, "identity suite", identity_suite),
        run(4, "Bell-analyzer rates", bell_rates),
        run(5, "key-rate checkpoints", key_rate_checkpoints),
        run(6, "formula reduction", formula_reduction),
        run(7, "oracle equivalence", oracle_equivalence),
        run(8, "Monte-Carlo consistency", monte_carlo),
        run(9, "physical vs paper accounting", accounting_gap),
    ];
    for c in &criteria {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{}] {} ({:.2?}): {}",
            c.id, c.name, c.elapsed, c.detail
        );
    }
    let failed = criteria.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
