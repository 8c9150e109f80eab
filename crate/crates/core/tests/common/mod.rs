#![allow(dead_code)]

use hdss_core::model::rational::int;
use hdss_core::model::{expand_to_full, RepairBandwidthModel};
use hdss_core::{DssConfig, Rational};
use itertools::Itertools;
use num_traits::Zero;
use rand::Rng;

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn example1() -> DssConfig {
    DssConfig::helper_only(3, 2, 2, ints(&[1, 2, 2]), ints(&[1, 2, 2])).unwrap()
}

pub fn example2() -> DssConfig {
    DssConfig::helper_only(3, 2, 2, ints(&[5, 6, 7]), ints(&[3, 4, 5])).unwrap()
}

/// Random (n, k, d) with 3 <= n <= max_n.
pub fn random_params<R: Rng>(rng: &mut R, max_n: usize) -> (usize, usize, usize) {
    let n = rng.random_range(3..=max_n);
    let d = rng.random_range(1..n);
    let k = rng.random_range(1..=d);
    (n, k, d)
}

pub fn random_helper_only<R: Rng>(rng: &mut R, max_n: usize, max_value: i64) -> DssConfig {
    let (n, k, d) = random_params(rng, max_n);
    let alpha = (0..n).map(|_| int(rng.random_range(0..=max_value))).collect();
    let beta = (0..n).map(|_| int(rng.random_range(0..=max_value))).collect();
    DssConfig::helper_only(n, k, d, alpha, beta).unwrap()
}

/// Capacity expression evaluated literally: every ordered tuple, every helper
/// subset S_i of size d+1-i avoiding f_1..f_i.
pub fn brute_force_capacity(config: &DssConfig) -> Rational {
    let (n, k, d) = (config.n(), config.k(), config.d());
    let beta = config.helper_betas().unwrap();
    let alpha = config.alpha();
    let mut best: Option<Rational> = None;
    for tuple in (0..n).permutations(k) {
        let mut total = Rational::zero();
        for i in 1..=k {
            let prefix = &tuple[..i];
            let allowed: Vec<usize> = (0..n).filter(|x| !prefix.contains(x)).collect();
            let min_s = allowed
                .iter()
                .combinations(d + 1 - i)
                .map(|s| s.iter().fold(Rational::zero(), |acc, &&h| acc + &beta[h]))
                .min()
                .unwrap();
            let a = &alpha[tuple[i - 1]];
            total += if *a < min_s { a.clone() } else { min_s };
        }
        if best.as_ref().is_none_or(|b| total < *b) {
            best = Some(total);
        }
    }
    best.unwrap()
}

/// gamma_j by a naive double loop over the expanded table.
pub fn naive_gamma(config: &DssConfig, j: usize) -> Rational {
    let full = expand_to_full(config);
    let RepairBandwidthModel::Full { table } = full.bandwidth() else {
        unreachable!()
    };
    let mut total = Rational::zero();
    let mut sets = 0i64;
    for (key, values) in table {
        if key.failed != j {
            continue;
        }
        sets += 1;
        for v in values {
            total += v;
        }
    }
    total / int(sets)
}
