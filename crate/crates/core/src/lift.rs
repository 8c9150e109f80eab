//! Permutation lift: summing the `n!` relabeled copies of a system gives a
//! homogeneous symmetric-repair system whose capacity, divided by `n!`, bounds
//! the capacity of the original.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::capacity::{average_upper_bound, exact_capacity, homogeneous_capacity};
use crate::error::{Error, Result};
use crate::model::rational::Rational;
use crate::model::{expand_to_full, system_averages, DssConfig, RepairBandwidthModel, RepairKey};

/// Largest `n` for which the explicit lift materializes all `n!` copies.
pub const EXPLICIT_MAX_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    Formula,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftReport {
    /// Per-node storage of the lifted system, `n! * alpha_bar`.
    pub alpha_b: Rational,
    /// Per-helper download of the lifted system, `n! * gamma_bar / d`.
    pub beta_b: Rational,
    /// Symmetric-repair capacity of the lifted system.
    pub capacity_b: Rational,
    /// `capacity_b / n!`.
    pub implied_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftCheck {
    pub exact: Rational,
    pub n_factorial: BigInt,
    /// `n! * exact`.
    pub scaled_exact: Rational,
    pub capacity_b: Rational,
    /// `capacity_b - n! * exact`, never negative.
    pub lift_margin: Rational,
    /// `implied_bound - exact`, never negative.
    pub bound_margin: Rational,
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    let ok = sigma.len() == n
        && sigma.iter().all(|&s| {
            if s >= n || seen[s] {
                false
            } else {
                seen[s] = true;
                true
            }
        });
    if ok {
        Ok(())
    } else {
        Err(Error::NotAPermutation {
            sigma: sigma.to_vec(),
            n,
        })
    }
}

/// Node `i` of the result takes the role of node `sigma[i]` of `config`.
pub fn permute_config(config: &DssConfig, sigma: &[usize]) -> Result<DssConfig> {
    let n = config.n();
    check_permutation(sigma, n)?;
    let alpha = sigma.iter().map(|&s| config.alpha()[s].clone()).collect();
    let bandwidth = match config.bandwidth() {
        RepairBandwidthModel::Homogeneous { gamma } => RepairBandwidthModel::Homogeneous {
            gamma: gamma.clone(),
        },
        RepairBandwidthModel::HelperOnly { beta } => RepairBandwidthModel::HelperOnly {
            beta: sigma.iter().map(|&s| beta[s].clone()).collect(),
        },
        RepairBandwidthModel::Full { .. } => {
            let table = config
                .params()
                .repair_keys()
                .map(|key| {
                    let mapped: Vec<usize> = key.helpers.iter().map(|&i| sigma[i]).collect();
                    let values = key
                        .helpers
                        .iter()
                        .map(|&i| config.beta(sigma[i], sigma[key.failed], &sorted(&mapped)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((key, values))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            RepairBandwidthModel::Full { table }
        }
    };
    DssConfig::new(*config.params(), alpha, bandwidth)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Component-wise sum of systems sharing `(n, k, d)`; the result has a full table.
pub fn combine_configs(configs: &[DssConfig]) -> Result<DssConfig> {
    let first = configs
        .first()
        .ok_or_else(|| Error::ParamMismatch("no systems to combine".into()))?;
    let params = *first.params();
    if let Some(other) = configs.iter().find(|c| *c.params() != params) {
        return Err(Error::ParamMismatch(format!(
            "{:?} vs {:?}",
            params,
            other.params()
        )));
    }
    let mut alpha = vec![Rational::zero(); params.n()];
    let mut table: BTreeMap<RepairKey, Vec<Rational>> = params
        .repair_keys()
        .map(|key| (key, vec![Rational::zero(); params.d()]))
        .collect();
    for config in configs {
        for (acc, a) in alpha.iter_mut().zip(config.alpha()) {
            *acc += a;
        }
        let full = expand_to_full(config);
        let RepairBandwidthModel::Full { table: other } = full.bandwidth() else {
            unreachable!("expanded config has a full table");
        };
        for (key, values) in other {
            let acc = table.get_mut(key).expect("same parameters give the same keys");
            for (a, b) in acc.iter_mut().zip(values) {
                *a += b;
            }
        }
    }
    DssConfig::new(params, alpha, RepairBandwidthModel::Full { table })
}

fn report(config: &DssConfig, alpha_b: Rational, beta_b: Rational) -> Result<LiftReport> {
    let d = Rational::from_integer(config.d().into());
    let capacity_b = homogeneous_capacity(&alpha_b, &(&beta_b * d), config.k(), config.d())?;
    let implied_bound = &capacity_b / Rational::from_integer(factorial(config.n()));
    Ok(LiftReport {
        alpha_b,
        beta_b,
        capacity_b,
        implied_bound,
    })
}

pub fn permutation_lift(config: &DssConfig, mode: LiftMode) -> Result<LiftReport> {
    let n = config.n();
    match mode {
        LiftMode::Formula => {
            let nf = Rational::from_integer(factorial(n));
            let (alpha_bar, gamma_bar) = system_averages(config);
            let alpha_b = &nf * alpha_bar;
            let beta_b = nf * gamma_bar / Rational::from_integer(config.d().into());
            report(config, alpha_b, beta_b)
        }
        LiftMode::Explicit => {
            if n > EXPLICIT_MAX_N {
                return Err(Error::TooManyPermutations {
                    n,
                    limit: EXPLICIT_MAX_N,
                });
            }
            let copies = (0..n)
                .permutations(n)
                .map(|sigma| permute_config(config, &sigma))
                .collect::<Result<Vec<_>>>()?;
            let big = combine_configs(&copies)?;
            let alpha_b = big.alpha()[0].clone();
            if let Some(j) = big.alpha().iter().position(|a| *a != alpha_b) {
                return Err(Error::LiftNotHomogeneous(format!(
                    "node {} stores {} but node 1 stores {alpha_b}",
                    j + 1,
                    big.alpha()[j]
                )));
            }
            let RepairBandwidthModel::Full { table } = big.bandwidth() else {
                unreachable!("combined config has a full table");
            };
            let beta_b = table.values().next().expect("non-empty table")[0].clone();
            if let Some((key, _)) = table
                .iter()
                .find(|(_, values)| values.iter().any(|b| *b != beta_b))
            {
                return Err(Error::LiftNotHomogeneous(format!(
                    "repair entry for failed node {} is not uniform",
                    key.failed + 1
                )));
            }
            report(config, alpha_b, beta_b)
        }
    }
}

/// Checks `n! * C <= capacity_b` and `C <= implied_bound` for the exact capacity `C`.
pub fn lift_bound_check(config: &DssConfig, limit: Option<usize>) -> Result<LiftCheck> {
    let exact = exact_capacity(config, limit)?.value;
    let lift = permutation_lift(config, LiftMode::Formula)?;
    let n_factorial = factorial(config.n());
    let scaled_exact = &exact * Rational::from_integer(n_factorial.clone());
    let lift_margin = &lift.capacity_b - &scaled_exact;
    let bound_margin = &lift.implied_bound - &exact;
    if lift_margin < Rational::zero() || bound_margin < Rational::zero() {
        return Err(Error::SandwichViolation(format!(
            "lift bound broken: {n_factorial} * {exact} > {}",
            lift.capacity_b
        )));
    }
    debug_assert_eq!(lift.implied_bound, average_upper_bound(config));
    Ok(LiftCheck {
        exact,
        n_factorial,
        scaled_exact,
        capacity_b: lift.capacity_b,
        lift_margin,
        bound_margin,
    })
}
