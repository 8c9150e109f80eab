//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hdss_core::capacity::{
    average_upper_bound, bounds_report, exact_capacity, general_bounds, helper_only_bounds,
    homogeneous_capacity,
};
use hdss_core::flowgraph::{build_flow_graph, max_flow_min_cut, oracle_capacity, OracleMode, RepairSchedule};
use hdss_core::lift::{lift_bound_check, permutation_lift, LiftMode};
use hdss_core::model::rational::{int, ratio};
use hdss_core::rlncsim::{adversarial_witness_trial, run_random_trials, FieldSpec};
use hdss_core::secrecy::{homogeneous_secrecy_bound, secrecy_upper_bound};
use hdss_core::{DssConfig, Rational, RepairBandwidthModel, RepairKey, SystemParams};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn eq(label: &str, got: &Rational, want: &Rational) -> Result<(), String> {
    ensure(got == want, || format!("{label}: got {got}, want {want}"))
}

fn timed<T>(limit: Duration, label: &str, f: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    ensure(took < limit, || format!("{label} took {took:?}, limit {limit:?}"))?;
    Ok(out)
}

fn criterion_1_golden_values() -> Outcome {
    let second = Duration::from_secs(1);
    let ex1 = example1();
    let exact = timed(second, "exact capacity", || exact_capacity(&ex1, None))?.map_err(|e| e.to_string())?;
    eq("example 1 capacity", &exact.value, &int(3))?;
    let avg = timed(second, "average bound", || average_upper_bound(&ex1))?;
    eq("example 1 average bound", &avg, &ratio(10, 3))?;
    let (lo, hi) = timed(second, "helper-only bounds", || helper_only_bounds(&ex1))?.map_err(|e| e.to_string())?;
    eq("example 1 C'_min", &lo, &int(2))?;
    eq("example 1 C'_max", &hi, &int(3))?;
    let lift = timed(second, "lift", || permutation_lift(&ex1, LiftMode::Explicit))?.map_err(|e| e.to_string())?;
    eq("alpha_b", &lift.alpha_b, &int(10))?;
    eq("beta_b", &lift.beta_b, &int(10))?;
    eq("C_b", &lift.capacity_b, &int(20))?;
    let check = timed(second, "lift check", || lift_bound_check(&ex1, None))?.map_err(|e| e.to_string())?;
    eq("6 * C", &check.scaled_exact, &int(18))?;
    ensure(check.scaled_exact <= check.capacity_b, || "6 * 3 > 20".into())?;

    let ex2 = example2();
    let avg = timed(second, "average bound", || average_upper_bound(&ex2))?;
    eq("example 2 average bound", &avg, &int(10))?;
    let exact = timed(second, "exact capacity", || exact_capacity(&ex2, None))?.map_err(|e| e.to_string())?;
    eq("example 2 capacity", &exact.value, &int(9))?;
    eq("example 2 brute force", &brute_force_capacity(&ex2), &int(9))?;
    let (lo, hi) = timed(second, "helper-only bounds", || helper_only_bounds(&ex2))?.map_err(|e| e.to_string())?;
    eq("example 2 C'_min", &lo, &int(8))?;
    eq("example 2 C'_max", &hi, &int(10))?;
    ensure(lo <= exact.value && exact.value <= hi, || "C' bounds do not sandwich 9".into())?;
    Ok("example 1: C=3, avg 10/3, C'=(2,3), lift (10,10,20), 18<=20; example 2: avg 10, C=9, C'=(8,10)".into())
}

/// Exhaustive grid plus 1000 random helper-only configs with n <= 5.
fn population() -> Vec<DssConfig> {
    let mut configs = Vec::new();
    for n in 3..=4usize {
        for k in 1..=2usize {
            for d in k..n {
                let grid: Vec<Vec<i64>> = (0..n).map(|_| 0..=3i64).multi_cartesian_product().collect();
                for alpha in &grid {
                    for beta in &grid {
                        configs.push(DssConfig::helper_only(n, k, d, ints(alpha), ints(beta)).unwrap());
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    for _ in 0..1000 {
        configs.push(random_helper_only(&mut rng, 5, 6));
    }
    configs
}

fn criterion_2_oracle_equivalence(configs: &[DssConfig]) -> Outcome {
    let start = Instant::now();
    let mismatches: Vec<String> = configs
        .par_iter()
        .filter_map(|cfg| {
            let exact = exact_capacity(cfg, None).map(|w| w.value);
            let oracle = oracle_capacity(cfg, OracleMode::Chains);
            match (exact, oracle) {
                (Ok(a), Ok(b)) if a == b => None,
                (a, b) => Some(format!("{cfg:?}: exact {a:?} oracle {b:?}")),
            }
        })
        .collect();
    let took = start.elapsed();
    ensure(mismatches.is_empty(), || {
        format!("{} mismatches, first: {}", mismatches.len(), mismatches[0])
    })?;
    ensure(took <= Duration::from_secs(300), || format!("took {took:?} > 5 min"))?;
    Ok(format!("{} configs, chain oracle == exact capacity, {took:.1?}", configs.len()))
}

fn criterion_3_sandwich(configs: &[DssConfig]) -> Outcome {
    let violations: Vec<String> = configs
        .par_iter()
        .filter_map(|cfg| {
            let c = exact_capacity(cfg, None).ok()?.value;
            let avg = average_upper_bound(cfg);
            let (c_min, c_max) = general_bounds(cfg);
            let (p_min, p_max) = helper_only_bounds(cfg).ok()?;
            let ok = c_min <= c && c <= c_max && p_min <= c && c <= p_max && c <= avg;
            (!ok).then(|| format!("{cfg:?}: C={c} [{c_min},{c_max}] [{p_min},{p_max}] avg {avg}"))
        })
        .collect();
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    // The report assembly re-checks the same inequalities.
    ensure(bounds_report(&example2(), true, None).is_ok(), || "bounds_report failed".into())?;
    Ok(format!("{} configs, zero violations", configs.len()))
}

fn criterion_4_homogeneous_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (n, k, d) = random_params(&mut rng, 7);
        let alpha = ratio(rng.random_range(0..30), rng.random_range(1..4));
        let gamma = ratio(rng.random_range(0..30), rng.random_range(1..4));
        let cfg = DssConfig::homogeneous(n, k, d, alpha.clone(), gamma.clone()).unwrap();
        let closed = homogeneous_capacity(&alpha, &gamma, k, d).map_err(|e| e.to_string())?;
        let exact = exact_capacity(&cfg, None).map_err(|e| e.to_string())?.value;
        eq("exact", &exact, &closed)?;
        eq("average bound", &average_upper_bound(&cfg), &closed)?;
        let (lo, hi) = general_bounds(&cfg);
        eq("C_min", &lo, &closed)?;
        eq("C_max", &hi, &closed)?;
        let (plo, phi) = helper_only_bounds(&cfg).map_err(|e| e.to_string())?;
        eq("C'_min", &plo, &closed)?;
        eq("C'_max", &phi, &closed)?;
    }
    Ok("100 random homogeneous configs collapse to the closed form".into())
}

fn random_full(rng: &mut ChaCha8Rng, max_n: usize) -> DssConfig {
    let (n, k, d) = random_params(rng, max_n);
    let params = SystemParams::new(n, k, d).unwrap();
    let alpha = (0..n).map(|_| ratio(rng.random_range(0..8), rng.random_range(1..3))).collect();
    let table = params
        .repair_keys()
        .map(|key: RepairKey| {
            let values = (0..d).map(|_| ratio(rng.random_range(0..8), rng.random_range(1..3))).collect();
            (key, values)
        })
        .collect();
    DssConfig::new(params, alpha, RepairBandwidthModel::Full { table }).unwrap()
}

fn criterion_5_secrecy(configs: &[DssConfig]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fulls: Vec<DssConfig> = (0..200).map(|_| random_full(&mut rng, 5)).collect();
    let bad = configs
        .par_iter()
        .chain(fulls.par_iter())
        .filter_map(|cfg| {
            let bounds: Vec<Rational> = (0..=cfg.k()).map(|ell| secrecy_upper_bound(cfg, ell).unwrap()).collect();
            let ok = bounds[0] == average_upper_bound(cfg)
                && bounds[cfg.k()] == int(0)
                && bounds.windows(2).all(|w| w[1] <= w[0]);
            (!ok).then(|| format!("{cfg:?}: {bounds:?}"))
        })
        .collect::<Vec<_>>();
    ensure(bad.is_empty(), || format!("{} failures, first: {}", bad.len(), bad[0]))?;
    let v = homogeneous_secrecy_bound(&int(10), &int(20), 2, 2, 1).map_err(|e| e.to_string())?;
    eq("symmetric secrecy bound (10, 20, k=2, d=2, ell=1)", &v, &int(10))?;
    Ok(format!("{} configs, ell = 0..k; symmetric bound = 10", configs.len() + fulls.len()))
}

fn criterion_6_lift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let cfg = if i % 2 == 0 {
            random_full(&mut rng, 5)
        } else {
            random_helper_only(&mut rng, 5, 6)
        };
        let explicit = permutation_lift(&cfg, LiftMode::Explicit).map_err(|e| e.to_string())?;
        let formula = permutation_lift(&cfg, LiftMode::Formula).map_err(|e| e.to_string())?;
        ensure(explicit == formula, || format!("{cfg:?}: {explicit:?} vs {formula:?}"))?;
        eq("implied bound", &explicit.implied_bound, &average_upper_bound(&cfg))?;
    }
    Ok("100 random configs: explicit lift == formula lift, implied bound == average bound".into())
}

fn criterion_7_cut_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut configs = vec![example1(), example2()];
    configs.extend((0..18).map(|_| random_helper_only(&mut rng, 5, 4)));
    let mut checked = 0usize;
    for (c, cfg) in configs.iter().enumerate() {
        let exact = exact_capacity(cfg, None).map_err(|e| e.to_string())?.value;
        let violations: Vec<String> = (0..1000u64)
            .into_par_iter()
            .filter_map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64((c as u64) << 32 | i);
                let rounds = rng.random_range(0..=2 * cfg.k() + 2);
                let s = RepairSchedule::random(cfg.n(), cfg.k(), cfg.d(), rounds, &mut rng);
                let cut = max_flow_min_cut(&build_flow_graph(cfg, &s).unwrap());
                (cut < exact).then(|| format!("{cfg:?} {s:?}: cut {cut} < {exact}"))
            })
            .collect();
        ensure(violations.is_empty(), || violations[0].clone())?;
        checked += 1000;
    }
    Ok(format!("{} configs x 1000 schedules ({checked} cuts), min-cut >= capacity", configs.len()))
}

fn criterion_8_simulation() -> Outcome {
    let ex1 = example1();
    let report = run_random_trials(&ex1, 3, 20, 100, 8, FieldSpec::default()).map_err(|e| e.to_string())?;
    ensure(report.success_fraction >= ratio(99, 100), || {
        format!("success fraction {} < 0.99", report.success_fraction)
    })?;
    let mut holds = 0;
    for seed in 0..100 {
        let r = adversarial_witness_trial(&ex1, Some(4), seed, FieldSpec::default(), None).map_err(|e| e.to_string())?;
        if r.rank <= 3 {
            holds += 1;
        }
    }
    ensure(holds == 100, || format!("rank <= 3 in only {holds}/100 adversarial runs"))?;
    Ok(format!(
        "random trials {}/{} decoded (p=65537, M=3, 20 rounds); adversarial M=4 rank<=3 in 100/100",
        report.successes, report.trials
    ))
}

fn main() {
    let configs = population();
    let criteria: Vec<Criterion> = vec![
        ("1 golden values", Box::new(criterion_1_golden_values)),
        ("2 oracle equivalence", Box::new(|| criterion_2_oracle_equivalence(&configs))),
        ("3 bound sandwich", Box::new(|| criterion_3_sandwich(&configs))),
        ("4 homogeneous reduction", Box::new(criterion_4_homogeneous_reduction)),
        ("5 secrecy bounds", Box::new(|| criterion_5_secrecy(&configs))),
        ("6 lift consistency", Box::new(criterion_6_lift)),
        ("7 cut dominance", Box::new(criterion_7_cut_dominance)),
        ("8 simulation", Box::new(criterion_8_simulation)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
