//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use bosonkit::deadtime::pkk_deadtime_exp_analytic;
use bosonkit::detector::{pkm_deadtime_exp, pkm_deadtime_mono, DetectorModel};
use bosonkit::ideal::{fock_oracle_distribution, ideal_distribution, ideal_probability};
use bosonkit::interferometer::{balanced_beam_splitter, haar_random_unitary};
use bosonkit::montecarlo::pkm_mc_oracle;
use bosonkit::pattern::Pattern;
use bosonkit::permanent::{permanent, permanent_naive};
use bosonkit::realistic::{
    correction_coefficient, correction_sweep, correction_table, identifier_coefficient,
    postselection_efficiency, realistic_distribution,
};
use bosonkit::rng::rng_from_seed;
use bosonkit::sampling::{postselect, sample, sample_through_detectors};
use bosonkit::{Complex64, ComplexMatrix, QuadratureSpec, ReducedIdentifier};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_pattern<R: Rng>(rng: &mut R, modes: usize, photons: usize) -> Pattern {
    let mut counts = vec![0; modes];
    for _ in 0..photons {
        counts[rng.random_range(0..modes)] += 1;
    }
    Pattern::new(counts)
}

fn hong_ou_mandel() -> Outcome {
    let bs = balanced_beam_splitter();
    let input = Pattern::from([1, 1]);
    let p11 = ideal_probability(&bs, &input, &Pattern::from([1, 1])).map_err(err)?;
    let p20 = ideal_probability(&bs, &input, &Pattern::from([2, 0])).map_err(err)?;
    let p02 = ideal_probability(&bs, &input, &Pattern::from([0, 2])).map_err(err)?;
    ensure(p11.abs() <= 1e-12, || format!("P(1,1) = {p11:e}"))?;
    ensure((p20 - 0.5).abs() <= 1e-12 && (p02 - 0.5).abs() <= 1e-12, || {
        format!("P(2,0) = {p20}, P(0,2) = {p02}")
    })?;
    Ok(format!("P(1,1) = {p11:.1e}, P(2,0) = {p20}, P(0,2) = {p02}"))
}

fn permanent_oracle() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = 1 + i % 7;
        let m = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let a = permanent(&m).map_err(err)?;
        let b = permanent_naive(&m).map_err(err)?;
        let rel = (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-10, || format!("worst relative error {worst:e}"))?;
    Ok(format!("200 matrices, worst relative error {worst:.2e}"))
}

fn ideal_normalization() -> Outcome {
    let mut rng = rng_from_seed(77);
    let (mut worst_sum, mut worst_diff) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let modes = 2 + i % 5;
        let photons = 1 + i % 4;
        let u = haar_random_unitary(modes, 1000 + i as u64).map_err(err)?;
        let input = random_pattern(&mut rng, modes, photons);
        let d = ideal_distribution(&u, &input).map_err(err)?;
        let o = fock_oracle_distribution(&u, &input).map_err(err)?;
        worst_sum = worst_sum.max((d.sum() - 1.0).abs());
        ensure(d.len() == o.len(), || format!("support sizes differ for {input}"))?;
        for (k, p) in d.iter() {
            worst_diff = worst_diff.max((p - o.get(k)).abs());
        }
    }
    ensure(worst_sum <= 1e-9, || format!("normalization residual {worst_sum:e}"))?;
    ensure(worst_diff <= 1e-10, || format!("oracle deviation {worst_diff:e}"))?;
    Ok(format!(
        "20 instances, max |ΣP − 1| = {worst_sum:.1e}, max oracle deviation {worst_diff:.1e}"
    ))
}

fn povm_completeness() -> Outcome {
    let mut analytic = Vec::new();
    for k in [2, 4, 8] {
        for eta in [1.0, 0.7] {
            analytic.push(DetectorModel::OnOffArray { k, eta });
        }
    }
    for ratio in [0.1, 0.25, 0.5] {
        for eta in [1.0, 0.7] {
            analytic.push(DetectorModel::DeadTimeMono { ratio, eta });
        }
    }
    let mut quad = Vec::new();
    for gamma in [1.0, 10.0] {
        for ratio in [0.1, 0.2] {
            quad.push(DetectorModel::DeadTimeExp { ratio, gamma, eta: 1.0 });
        }
    }
    let worst = |models: &[DetectorModel]| -> Result<f64, String> {
        let mut w = 0.0f64;
        for model in models {
            for m in 0..=12 {
                let total: f64 = (0..=model.max_counts(m).min(m))
                    .map(|k| model.cond_prob(k, m))
                    .sum::<bosonkit::Result<f64>>()
                    .map_err(|e| format!("{model} m={m}: {e}"))?;
                w = w.max((total - 1.0).abs());
            }
        }
        Ok(w)
    };
    let wa = worst(&analytic)?;
    let wq = worst(&quad)?;
    ensure(wa <= 1e-9, || format!("analytic models off by {wa:e}"))?;
    ensure(wq <= 1e-5, || format!("quadrature model off by {wq:e}"))?;
    Ok(format!("m ≤ 12: analytic max dev {wa:.1e}, quadrature max dev {wq:.1e}"))
}

fn plug_in_values() -> Outcome {
    let cases = [
        (DetectorModel::OnOffArray { k: 4, eta: 1.0 }, 0.75),
        (DetectorModel::DeadTimeMono { ratio: 0.25, eta: 1.0 }, 0.5625),
        (
            DetectorModel::DeadTimeExp { ratio: 0.2, gamma: 10.0, eta: 1.0 },
            (4f64.sinh() / 5f64.sinh()).powi(2),
        ),
    ];
    let mut parts = Vec::new();
    for (i, (model, formula)) in cases.into_iter().enumerate() {
        let value = model.cond_prob(2, 2).map_err(err)?;
        ensure((value - formula).abs() <= 1e-9, || format!("{model}: {value} vs {formula}"))?;
        let mc = pkm_mc_oracle(&model, 2, 2, 1_000_000, 500 + i as u64).map_err(err)?;
        let z = (mc.estimate - value) / mc.stderr;
        ensure(z.abs() <= 4.0, || format!("{model}: MC {} ± {} vs {value}", mc.estimate, mc.stderr))?;
        parts.push(format!("{value:.6} (MC z = {z:+.2})"));
    }
    Ok(format!("P(2|2): {}", parts.join(", ")))
}

fn factorization_identity() -> Outcome {
    let mut rng = rng_from_seed(606);
    let models = [
        DetectorModel::LossyPnr { eta: 0.85 },
        DetectorModel::OnOffArray { k: 2, eta: 1.0 },
        DetectorModel::OnOffArray { k: 5, eta: 0.9 },
        DetectorModel::DeadTimeMono { ratio: 0.25, eta: 1.0 },
        DetectorModel::DeadTimeMono { ratio: 0.4, eta: 0.75 },
        DetectorModel::DeadTimeExp { ratio: 0.2, gamma: 10.0, eta: 1.0 },
        DetectorModel::DeadTimeExp { ratio: 0.1, gamma: 1.0, eta: 0.9 },
        DetectorModel::IdealPnr,
        DetectorModel::OnOffArray { k: 3, eta: 0.6 },
        DetectorModel::DeadTimeMono { ratio: 0.15, eta: 0.95 },
    ];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (i, model) in models.iter().enumerate() {
        let modes = 2 + i % 4;
        let photons = 2 + i % 3;
        let u = haar_random_unitary(modes, 7000 + i as u64).map_err(err)?;
        let input = random_pattern(&mut rng, modes, photons);
        let d = realistic_distribution(&u, &input, model).map_err(err)?;
        for (k, rho) in d.iter().filter(|(k, _)| k.total() == photons) {
            let c = correction_coefficient(model, k).map_err(err)?;
            let p = ideal_probability(&u, &input, k).map_err(err)?;
            worst = worst.max((rho - c * p).abs());
            checked += 1;
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("10 triples, {checked} postselected outcomes, max deviation {worst:.1e}"))
}

fn loss_postselection() -> Outcome {
    let model = DetectorModel::LossyPnr { eta: 0.8 };
    let u = haar_random_unitary(4, 13).map_err(err)?;
    let input = Pattern::from([1, 1, 1, 0]);
    let eff = postselection_efficiency(&u, &input, &model).map_err(err)?;
    ensure((eff - 0.512).abs() <= 1e-12, || format!("efficiency {eff}"))?;
    let ideal = ideal_distribution(&u, &input).map_err(err)?;
    let exact = realistic_distribution(&u, &input, &model).map_err(err)?;
    let report = sample_through_detectors(&ideal, &model, &exact, 100_000, 3).map_err(err)?;
    let ps = postselect(&report, 3).postselection.expect("postselection record");
    let z = (ps.acceptance - 0.512) / (0.512f64 * 0.488 / ps.offered as f64).sqrt();
    ensure(z.abs() <= 4.0, || format!("sampled acceptance {} (z = {z:.2})", ps.acceptance))?;
    Ok(format!("efficiency {eff}, sampled acceptance {} (z = {z:+.2})", ps.acceptance))
}

fn array_sweep() -> Outcome {
    let models: Vec<DetectorModel> = (2..=64).map(|k| DetectorModel::OnOffArray { k, eta: 1.0 }).collect();
    let tables = correction_sweep(&models, 6).map_err(err)?;
    let empty = ReducedIdentifier::default();
    for t in &tables {
        ensure(t.get(&empty) == Some(1.0), || format!("C({{}}) = {:?} at {}", t.get(&empty), t.model))?;
    }
    let mut series = 0;
    for id in ReducedIdentifier::all_up_to(6).into_iter().filter(|i| !i.is_collision_free()) {
        let values: Vec<f64> = tables.iter().filter_map(|t| t.get(&id)).collect();
        ensure(values.windows(2).all(|w| w[1] > w[0]), || format!("{id} not strictly increasing in K"))?;
        series += 1;
    }
    let far = correction_table(&DetectorModel::OnOffArray { k: 1000, eta: 1.0 }, 6).map_err(err)?;
    let c2 = far.get(&ReducedIdentifier::new(vec![2]).map_err(err)?).unwrap_or(0.0);
    ensure(c2 >= 0.99, || format!("C({{2}}) = {c2} at K = 1000"))?;
    Ok(format!(
        "C({{}}) ≡ 1, {series} identifiers strictly increasing over K = 2…64 (each from the first K that can register it), C({{2}}) = {c2:.6} at K = 1000"
    ))
}

fn dead_time_sweep() -> Outcome {
    let two = ReducedIdentifier::new(vec![2]).map_err(err)?;
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        let c = identifier_coefficient(&DetectorModel::DeadTimeMono { ratio: r, eta: 1.0 }, &two, 6).map_err(err)?;
        worst = worst.max((c - (1.0 - r) * (1.0 - r)).abs());
    }
    ensure(worst <= 1e-12, || format!("mono C({{2}}) off (1−r)² by {worst:e}"))?;
    let mut min_gap = f64::INFINITY;
    for i in 1..=99 {
        let r = i as f64 / 100.0;
        let mono = identifier_coefficient(&DetectorModel::DeadTimeMono { ratio: r, eta: 1.0 }, &two, 6).map_err(err)?;
        let exp = identifier_coefficient(
            &DetectorModel::DeadTimeExp { ratio: r, gamma: 10.0, eta: 1.0 },
            &two,
            6,
        )
        .map_err(err)?;
        ensure(exp < mono, || format!("r = {r}: exp {exp} ≥ mono {mono}"))?;
        min_gap = min_gap.min(mono - exp);
    }
    let r_end = 0.99;
    let mut largest = 0.0f64;
    for model in [
        DetectorModel::DeadTimeMono { ratio: r_end, eta: 1.0 },
        DetectorModel::DeadTimeExp { ratio: r_end, gamma: 10.0, eta: 1.0 },
    ] {
        let t = correction_table(&model, 6).map_err(err)?;
        for e in t.entries.iter().filter(|e| !e.identifier.is_collision_free()) {
            largest = largest.max(e.coefficient);
        }
    }
    ensure(largest <= 1e-3, || format!("largest bunched coefficient at r = {r_end}: {largest:e}"))?;
    Ok(format!(
        "mono vs (1−r)² max dev {worst:.1e}; exp below mono at 99 points (min gap {min_gap:.1e}); bunched C ≤ {largest:.1e} at r = {r_end}"
    ))
}

fn quadrature_validation() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut worst_diag = 0.0f64;
    for &(ratio, gamma, eta) in &[(0.2, 10.0, 1.0), (0.1, 1.0, 0.8), (0.3, 5.0, 0.9), (0.45, 2.0, 1.0)] {
        for k in 1..=3 {
            let q = pkm_deadtime_exp(ratio, gamma, eta, k, k, &quad).map_err(err)?;
            let a = pkk_deadtime_exp_analytic(ratio, gamma, eta, k).map_err(err)?;
            worst_diag = worst_diag.max((q - a).abs());
        }
    }
    ensure(worst_diag <= 1e-6, || format!("diagonal deviation {worst_diag:e}"))?;
    let mut worst_mono = 0.0f64;
    for &(ratio, eta) in &[(0.1, 1.0), (0.25, 0.9), (0.3, 1.0), (0.5, 0.7)] {
        for m in 0..=8 {
            for k in 0..=m.min(DetectorModel::DeadTimeMono { ratio, eta }.max_counts(m)) {
                let q = pkm_deadtime_exp(ratio, 1e-6, eta, k, m, &quad).map_err(err)?;
                let mono = pkm_deadtime_mono(ratio, eta, k, m).map_err(err)?;
                worst_mono = worst_mono.max((q - mono).abs());
            }
        }
    }
    ensure(worst_mono <= 1e-5, || format!("γ → 0 deviation {worst_mono:e}"))?;
    Ok(format!(
        "k = m ≤ 3 vs closed form: {worst_diag:.1e}; γ = 1e-6 vs monochromatic: {worst_mono:.1e}"
    ))
}

fn sampler_fidelity() -> Outcome {
    let u = haar_random_unitary(6, 42).map_err(err)?;
    let d = ideal_distribution(&u, &Pattern::from([1, 1, 1, 0, 0, 0])).map_err(err)?;
    let report = sample(&d, 100_000, 42).map_err(err)?;
    let tv = report.tv_distance;
    let p = report.chi_square.p_value;
    ensure(tv <= 0.02, || format!("TV = {tv}"))?;
    ensure(p > 1e-3, || format!("chi-square p = {p:e}"))?;
    Ok(format!(
        "{} outcomes, TV = {tv:.4}, chi-square = {:.1} on {} dof, p = {p:.3}",
        d.len(),
        report.chi_square.statistic,
        report.chi_square.dof
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Hong-Ou-Mandel dip", hong_ou_mandel),
        ("permanent oracle equivalence", permanent_oracle),
        ("ideal normalization and Fock oracle", ideal_normalization),
        ("POVM completeness", povm_completeness),
        ("detector plug-in values", plug_in_values),
        ("factorization identity", factorization_identity),
        ("loss postselection efficiency", loss_postselection),
        ("array correction sweep", array_sweep),
        ("dead-time correction sweep", dead_time_sweep),
        ("quadrature validation", quadrature_validation),
        ("sampler fidelity", sampler_fidelity),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
