//! Capacity formulas: the symmetric-repair closed form, the average-resource upper
//! bound, the sorted-multiset bounds, the helper-only bounds, and the exact
//! capacity of helper-only systems by exhaustive search over failure orders.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::rational::{self, Rational};
use crate::model::{beta_multiset_runs, extreme_sum, system_averages, DssConfig};

/// Default cap on `n` for the exact-capacity search.
pub const DEFAULT_MAX_N: usize = 10;

/// A minimizing failure order for the exact capacity, with its per-step terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityWitness {
    /// Failed nodes `f_1..f_k` in failure order.
    pub tuple: Vec<usize>,
    /// `S_i`: the `d + 1 - i` fresh helpers of step `i`, sorted ascending.
    pub helper_sets: Vec<Vec<usize>>,
    /// `min(alpha_{f_i}, beta_{S_i})`.
    pub terms: Vec<Rational>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub avg_upper: Rational,
    pub c_min: Rational,
    pub c_max: Rational,
    /// `(C'_min, C'_max)`, only for helper-only and homogeneous models.
    pub cprime: Option<(Rational, Rational)>,
    pub exact: Option<CapacityWitness>,
}

fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

fn check_k_d(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::ParamViolation(format!(
            "need 1 <= k <= d, got k = {k}, d = {d}"
        )));
    }
    Ok(())
}

/// `sum_{i=from+1}^{k} min(alpha, (d - i + 1) gamma / d)`, shared with the secrecy bounds.
pub(crate) fn symmetric_sum(
    alpha: &Rational,
    gamma: &Rational,
    k: usize,
    d: usize,
    from: usize,
) -> Rational {
    let per_helper = gamma / int(d);
    (from + 1..=k)
        .map(|i| rational::min(alpha, &(&per_helper * int(d - i + 1))))
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// Capacity of a homogeneous system with symmetric repair.
pub fn homogeneous_capacity(alpha: &Rational, gamma: &Rational, k: usize, d: usize) -> Result<Rational> {
    check_k_d(k, d)?;
    if alpha < &Rational::zero() || gamma < &Rational::zero() {
        return Err(Error::NegativeValue("alpha/gamma".into()));
    }
    Ok(symmetric_sum(alpha, gamma, k, d, 0))
}

/// Upper bound from the average storage and average repair bandwidth.
pub fn average_upper_bound(config: &DssConfig) -> Rational {
    let (alpha_bar, gamma_bar) = system_averages(config);
    symmetric_sum(&alpha_bar, &gamma_bar, config.k(), config.d(), 0)
}

fn sorted_alpha(config: &DssConfig) -> Vec<Rational> {
    let mut alpha = config.alpha().to_vec();
    alpha.sort();
    alpha
}

/// `(C_min, C_max)` from the sorted storage sequence and the sorted multiset of
/// all per-helper downloads.
pub fn general_bounds(config: &DssConfig) -> (Rational, Rational) {
    let (k, d) = (config.k(), config.d());
    let alpha = sorted_alpha(config);
    let runs = beta_multiset_runs(config);
    let mut alpha_prefix = Rational::zero();
    let mut c_min: Option<Rational> = None;
    let mut c_max: Option<Rational> = None;
    for l in 0..=k {
        if l > 0 {
            alpha_prefix += &alpha[l - 1];
        }
        let h = ((2 * d - k - l + 1) * (k - l) / 2) as u128;
        let low = &alpha_prefix + extreme_sum(&runs, h, false);
        let high = &alpha_prefix + extreme_sum(&runs, h, true);
        if c_min.as_ref().is_none_or(|m| low < *m) {
            c_min = Some(low);
        }
        if c_max.as_ref().is_none_or(|m| high < *m) {
            c_max = Some(high);
        }
    }
    (c_min.unwrap(), c_max.unwrap())
}

fn sorted_helper_betas(config: &DssConfig, op: &'static str) -> Result<Vec<Rational>> {
    let mut beta = config.helper_betas().ok_or(Error::ModelUnsupported {
        op,
        model: config.bandwidth().kind(),
    })?;
    beta.sort();
    Ok(beta)
}

/// `(C'_min, C'_max)` for helper-only bandwidth, in the per-step sum form.
pub fn helper_only_bounds(config: &DssConfig) -> Result<(Rational, Rational)> {
    let (k, d) = (config.k(), config.d());
    let alpha = sorted_alpha(config);
    let beta = sorted_helper_betas(config, "helper_only_bounds")?;
    let mut lower = Rational::zero();
    let mut upper = Rational::zero();
    for i in 1..=k {
        // beta'_1 + ... + beta'_{d-i+1}
        let smallest = rational::sum(&beta[..d - i + 1]);
        // beta'_{i+1} + ... + beta'_{d+1}
        let shifted = rational::sum(&beta[i..=d]);
        lower += rational::min(&alpha[i - 1], &smallest);
        upper += rational::min(&alpha[i - 1], &shifted);
    }
    Ok((lower, upper))
}

/// The same helper-only bounds written as a minimum over the number `l` of
/// storage-limited steps. Agrees with [`helper_only_bounds`] whenever the
/// storage sequence is sorted, which both functions ensure.
pub fn helper_only_bounds_min_over_l(config: &DssConfig) -> Result<(Rational, Rational)> {
    let (k, d) = (config.k(), config.d());
    let alpha = sorted_alpha(config);
    let beta = sorted_helper_betas(config, "helper_only_bounds")?;
    let mut best_min: Option<Rational> = None;
    let mut best_max: Option<Rational> = None;
    for l in 0..=k {
        let stored = rational::sum(&alpha[..l]);
        let mut low = stored.clone();
        for j in 0..k - l {
            low += rational::sum(&beta[..d - l - j]);
        }
        let mut high = stored;
        for j in 1..=k - l {
            // 1-based beta'_{l+1+j} .. beta'_{d+1}
            high += rational::sum(&beta[l + j..=d]);
        }
        if best_min.as_ref().is_none_or(|m| low < *m) {
            best_min = Some(low);
        }
        if best_max.as_ref().is_none_or(|m| high < *m) {
            best_max = Some(high);
        }
    }
    Ok((best_min.unwrap(), best_max.unwrap()))
}

/// Search limit from `DSS_CAPACITY_MAX_N`, falling back to [`DEFAULT_MAX_N`].
pub fn max_n_from_env() -> usize {
    std::env::var("DSS_CAPACITY_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_N)
}

struct Search<'a> {
    alpha: &'a [Rational],
    beta: &'a [Rational],
    /// Node indices ordered by `(beta, index)`.
    by_beta: Vec<usize>,
    k: usize,
    d: usize,
}

impl Search<'_> {
    /// Cheapest `size` helpers outside `used`, ties to lower index.
    fn cheapest_helpers(&self, used: &[bool], size: usize) -> (Vec<usize>, Rational) {
        let mut set: Vec<usize> = self
            .by_beta
            .iter()
            .copied()
            .filter(|&i| !used[i])
            .take(size)
            .collect();
        let total = rational::sum(set.iter().map(|&i| &self.beta[i]));
        set.sort_unstable();
        (set, total)
    }

    fn step(&self, used: &[bool], f: usize, i: usize) -> (Vec<usize>, Rational) {
        let (set, beta_s) = self.cheapest_helpers(used, self.d + 1 - i);
        let term = rational::min(&self.alpha[f], &beta_s);
        (set, term)
    }

    /// Lexicographically first minimizing completion of `prefix`.
    fn best_from(&self, prefix: &mut Vec<usize>, used: &mut [bool], partial: Rational, best: &mut Option<(Rational, Vec<usize>)>) {
        if prefix.len() == self.k {
            if best.as_ref().is_none_or(|(v, _)| partial < *v) {
                *best = Some((partial, prefix.clone()));
            }
            return;
        }
        if let Some((v, _)) = best {
            // Terms are non-negative and earlier tuples win ties.
            if partial >= *v {
                return;
            }
        }
        let i = prefix.len() + 1;
        for f in 0..self.alpha.len() {
            if used[f] {
                continue;
            }
            used[f] = true;
            let (_, term) = self.step(used, f, i);
            prefix.push(f);
            self.best_from(prefix, used, &partial + term, best);
            prefix.pop();
            used[f] = false;
        }
    }

    fn witness(&self, tuple: Vec<usize>) -> CapacityWitness {
        let mut used = vec![false; self.alpha.len()];
        let mut helper_sets = Vec::with_capacity(self.k);
        let mut terms = Vec::with_capacity(self.k);
        for (step, &f) in tuple.iter().enumerate() {
            used[f] = true;
            let (set, term) = self.step(&used, f, step + 1);
            helper_sets.push(set);
            terms.push(term);
        }
        let value = rational::sum(&terms);
        CapacityWitness {
            tuple,
            helper_sets,
            terms,
            value,
        }
    }
}

/// Evaluates the capacity expression for one fixed failure order.
pub fn tuple_value(config: &DssConfig, tuple: &[usize]) -> Result<CapacityWitness> {
    let beta = config.helper_betas().ok_or(Error::ModelUnsupported {
        op: "tuple_value",
        model: config.bandwidth().kind(),
    })?;
    check_tuple(config, tuple)?;
    let search = Search::new(config.alpha(), &beta, config.k(), config.d());
    Ok(search.witness(tuple.to_vec()))
}

pub(crate) fn check_tuple(config: &DssConfig, tuple: &[usize]) -> Result<()> {
    if tuple.len() != config.k() {
        return Err(Error::DimensionMismatch {
            what: "failure tuple",
            expected: config.k(),
            got: tuple.len(),
        });
    }
    if let Some(&bad) = tuple.iter().find(|&&f| f >= config.n()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            n: config.n(),
        });
    }
    let mut seen = tuple.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != tuple.len() {
        return Err(Error::DuplicateIndices(tuple.to_vec()));
    }
    Ok(())
}

impl<'a> Search<'a> {
    fn new(alpha: &'a [Rational], beta: &'a [Rational], k: usize, d: usize) -> Self {
        let mut by_beta: Vec<usize> = (0..alpha.len()).collect();
        by_beta.sort_by(|&a, &b| beta[a].cmp(&beta[b]).then(a.cmp(&b)));
        Self {
            alpha,
            beta,
            by_beta,
            k,
            d,
        }
    }
}

/// Exact capacity of a helper-only (or homogeneous) system: the minimum over all
/// ordered failure tuples of `sum_i min(alpha_{f_i}, cheapest d+1-i helpers outside f_1..f_i)`.
///
/// The returned witness is the lexicographically smallest minimizing tuple.
/// `limit` caps `n` (default [`DEFAULT_MAX_N`]) since the search visits
/// `n!/(n-k)!` tuples.
pub fn exact_capacity(config: &DssConfig, limit: Option<usize>) -> Result<CapacityWitness> {
    let beta = config.helper_betas().ok_or(Error::ModelUnsupported {
        op: "exact_capacity",
        model: config.bandwidth().kind(),
    })?;
    let limit = limit.unwrap_or(DEFAULT_MAX_N);
    let n = config.n();
    if n > limit {
        return Err(Error::SearchTooLarge(format!(
            "exact capacity enumerates n!/(n-k)! tuples; n = {n} exceeds the limit {limit}"
        )));
    }
    let search = Search::new(config.alpha(), &beta, config.k(), config.d());
    // One independent search per first failed node, then a deterministic reduction.
    let best = (0..n)
        .into_par_iter()
        .filter_map(|first| {
            let mut used = vec![false; n];
            used[first] = true;
            let (_, term) = search.step(&used, first, 1);
            let mut prefix = vec![first];
            let mut best = None;
            search.best_from(&mut prefix, &mut used, term, &mut best);
            best
        })
        .min_by(|(va, ta), (vb, tb)| va.cmp(vb).then_with(|| ta.cmp(tb)))
        .expect("n >= 2 gives at least one tuple");
    Ok(search.witness(best.1))
}

/// All bounds, plus the exact capacity when requested and supported, with the
/// sandwich invariants checked.
pub fn bounds_report(config: &DssConfig, compute_exact: bool, limit: Option<usize>) -> Result<BoundsReport> {
    let avg_upper = average_upper_bound(config);
    let (c_min, c_max) = general_bounds(config);
    let helper_model = config.helper_betas().is_some();
    let cprime = if helper_model {
        let first = helper_only_bounds(config)?;
        let second = helper_only_bounds_min_over_l(config)?;
        if first != second {
            return Err(Error::OracleMismatch(format!(
                "helper-only bounds disagree between forms: {first:?} vs {second:?}"
            )));
        }
        Some(first)
    } else {
        None
    };
    let exact = if compute_exact && helper_model {
        Some(exact_capacity(config, limit)?)
    } else {
        None
    };
    let report = BoundsReport {
        avg_upper,
        c_min,
        c_max,
        cprime,
        exact,
    };
    check_sandwich(&report)?;
    Ok(report)
}

fn check_sandwich(r: &BoundsReport) -> Result<()> {
    let fail = |msg: String| Err(Error::SandwichViolation(msg));
    if r.c_min > r.c_max {
        return fail(format!("C_min {} > C_max {}", r.c_min, r.c_max));
    }
    if let Some((lo, hi)) = &r.cprime {
        if lo > hi {
            return fail(format!("C'_min {lo} > C'_max {hi}"));
        }
    }
    if let Some(w) = &r.exact {
        let c = &w.value;
        if *c < r.c_min || *c > r.c_max {
            return fail(format!("C = {c} outside [{}, {}]", r.c_min, r.c_max));
        }
        if *c > r.avg_upper {
            return fail(format!("C = {c} above average bound {}", r.avg_upper));
        }
        if let Some((lo, hi)) = &r.cprime {
            if c < lo || c > hi {
                return fail(format!("C = {c} outside [{lo}, {hi}]"));
            }
        }
    }
    Ok(())
}
