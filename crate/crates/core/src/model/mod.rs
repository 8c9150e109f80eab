//! System data model: parameters, bandwidth models, validation and the averaging
//! primitives the bound formulas are built from.
//!
//! Node indices are 0-based in this API. Nodes are not assumed to be sorted by
//! capacity; formulas that need sorted sequences sort their own copies.

pub mod file;
pub mod rational;

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
pub use rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemParams {
    n: usize,
    k: usize,
    d: usize,
}

impl SystemParams {
    /// Requires `1 <= k <= d <= n - 1`.
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ParamViolation("k must be at least 1".into()));
        }
        if k > d {
            return Err(Error::ParamViolation(format!("k = {k} exceeds d = {d}")));
        }
        if d + 1 > n {
            return Err(Error::ParamViolation(format!(
                "d = {d} exceeds n - 1 = {}",
                n.saturating_sub(1)
            )));
        }
        Ok(Self { n, k, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of possible helper sets for one failed node, `binom(n-1, d)`.
    pub fn helper_sets_per_node(&self) -> u128 {
        num_integer::binomial((self.n - 1) as u128, self.d as u128)
    }

    /// Size of the full per-helper bandwidth multiset, `n * d * binom(n-1, d)`.
    pub fn multiset_len(&self) -> u128 {
        self.n as u128 * self.d as u128 * self.helper_sets_per_node()
    }

    /// All keys `(j, S)` of a full table, in canonical order.
    pub fn repair_keys(&self) -> impl Iterator<Item = RepairKey> + '_ {
        (0..self.n).flat_map(move |failed| {
            (0..self.n)
                .filter(move |&i| i != failed)
                .combinations(self.d)
                .map(move |helpers| RepairKey { failed, helpers })
        })
    }
}

/// Key of a full bandwidth table: the failed node and its sorted helper set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RepairKey {
    pub failed: usize,
    pub helpers: Vec<usize>,
}

/// Per-helper repair downloads, at one of three granularities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairBandwidthModel {
    /// Symmetric repair: every helper sends `gamma / d`.
    Homogeneous { gamma: Rational },
    /// Helper `i` always sends `beta[i]`.
    HelperOnly { beta: Vec<Rational> },
    /// Explicit `beta_{ijS}`; values are aligned with the sorted helper set of the key.
    Full {
        table: BTreeMap<RepairKey, Vec<Rational>>,
    },
}

impl RepairBandwidthModel {
    pub fn kind(&self) -> &'static str {
        match self {
            RepairBandwidthModel::Homogeneous { .. } => "homogeneous",
            RepairBandwidthModel::HelperOnly { .. } => "helper_only",
            RepairBandwidthModel::Full { .. } => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DssConfig {
    params: SystemParams,
    alpha: Vec<Rational>,
    bandwidth: RepairBandwidthModel,
}

impl DssConfig {
    /// Validates and builds a configuration.
    pub fn new(
        params: SystemParams,
        alpha: Vec<Rational>,
        bandwidth: RepairBandwidthModel,
    ) -> Result<Self> {
        let n = params.n;
        if alpha.len() != n {
            return Err(Error::DimensionMismatch {
                what: "alpha",
                expected: n,
                got: alpha.len(),
            });
        }
        if let Some(j) = alpha.iter().position(|a| a.is_negative()) {
            return Err(Error::NegativeValue(format!("alpha[{j}]")));
        }
        match &bandwidth {
            RepairBandwidthModel::Homogeneous { gamma } => {
                if gamma.is_negative() {
                    return Err(Error::NegativeValue("gamma".into()));
                }
            }
            RepairBandwidthModel::HelperOnly { beta } => {
                if beta.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "beta",
                        expected: n,
                        got: beta.len(),
                    });
                }
                if let Some(i) = beta.iter().position(|b| b.is_negative()) {
                    return Err(Error::NegativeValue(format!("beta[{i}]")));
                }
            }
            RepairBandwidthModel::Full { table } => validate_table(&params, table)?,
        }
        Ok(Self {
            params,
            alpha,
            bandwidth,
        })
    }

    pub fn homogeneous(
        n: usize,
        k: usize,
        d: usize,
        alpha: Rational,
        gamma: Rational,
    ) -> Result<Self> {
        Self::new(
            SystemParams::new(n, k, d)?,
            vec![alpha; n],
            RepairBandwidthModel::Homogeneous { gamma },
        )
    }

    pub fn helper_only(
        n: usize,
        k: usize,
        d: usize,
        alpha: Vec<Rational>,
        beta: Vec<Rational>,
    ) -> Result<Self> {
        Self::new(
            SystemParams::new(n, k, d)?,
            alpha,
            RepairBandwidthModel::HelperOnly { beta },
        )
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    pub fn bandwidth(&self) -> &RepairBandwidthModel {
        &self.bandwidth
    }

    /// Per-helper bandwidth `beta_i` when the model depends only on the helper.
    pub fn helper_betas(&self) -> Option<Vec<Rational>> {
        match &self.bandwidth {
            RepairBandwidthModel::Homogeneous { gamma } => {
                Some(vec![gamma / Rational::from_integer(self.d().into()); self.n()])
            }
            RepairBandwidthModel::HelperOnly { beta } => Some(beta.clone()),
            RepairBandwidthModel::Full { .. } => None,
        }
    }

    /// `beta_{ijS}`: download from `helper` when replacing `failed` with helper set `helpers`.
    ///
    /// `helpers` must be sorted, contain `helper`, and exclude `failed`.
    pub fn beta(&self, helper: usize, failed: usize, helpers: &[usize]) -> Result<Rational> {
        let n = self.n();
        for &idx in helpers.iter().chain([&helper, &failed]) {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        if helpers.len() != self.d() || helpers.contains(&failed) || !helpers.contains(&helper) {
            return Err(Error::BadHelpers(format!(
                "helper {helper} with set {helpers:?} for failed node {failed}"
            )));
        }
        match &self.bandwidth {
            RepairBandwidthModel::Homogeneous { gamma } => {
                Ok(gamma / Rational::from_integer(self.d().into()))
            }
            RepairBandwidthModel::HelperOnly { beta } => Ok(beta[helper].clone()),
            RepairBandwidthModel::Full { table } => {
                let mut sorted = helpers.to_vec();
                sorted.sort_unstable();
                let key = RepairKey {
                    failed,
                    helpers: sorted,
                };
                let values = table.get(&key).ok_or_else(|| Error::IncompleteTable {
                    failed,
                    helpers: key.helpers.clone(),
                })?;
                let pos = key.helpers.iter().position(|&i| i == helper).unwrap();
                Ok(values[pos].clone())
            }
        }
    }

    /// Non-fatal notices: helpers asked to send more than they store.
    pub fn warnings(&self) -> Vec<String> {
        let mut over: BTreeSet<usize> = BTreeSet::new();
        match &self.bandwidth {
            RepairBandwidthModel::Homogeneous { .. } | RepairBandwidthModel::HelperOnly { .. } => {
                let betas = self.helper_betas().unwrap();
                over.extend((0..self.n()).filter(|&i| betas[i] > self.alpha[i]));
            }
            RepairBandwidthModel::Full { table } => {
                for (key, values) in table {
                    for (&i, b) in key.helpers.iter().zip(values) {
                        if *b > self.alpha[i] {
                            over.insert(i);
                        }
                    }
                }
            }
        }
        over.into_iter()
            .map(|i| {
                format!(
                    "repair bandwidth of helper node {} exceeds its storage capacity {}",
                    i + 1,
                    self.alpha[i]
                )
            })
            .collect()
    }
}

fn validate_table(params: &SystemParams, table: &BTreeMap<RepairKey, Vec<Rational>>) -> Result<()> {
    let n = params.n;
    for (key, values) in table {
        if key.failed >= n {
            return Err(Error::IndexOutOfRange {
                index: key.failed,
                n,
            });
        }
        if let Some(&bad) = key.helpers.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        if key.helpers.len() != params.d {
            return Err(Error::MalformedTable(format!(
                "helper set {:?} of failed node {} has size {}, expected d = {}",
                key.helpers,
                key.failed,
                key.helpers.len(),
                params.d
            )));
        }
        if !key.helpers.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedTable(format!(
                "helper set {:?} must be strictly ascending",
                key.helpers
            )));
        }
        if key.helpers.contains(&key.failed) {
            return Err(Error::MalformedTable(format!(
                "failed node {} appears in its own helper set",
                key.failed
            )));
        }
        if values.len() != params.d {
            return Err(Error::DimensionMismatch {
                what: "table entry",
                expected: params.d,
                got: values.len(),
            });
        }
        if values.iter().any(|b| b.is_negative()) {
            return Err(Error::NegativeValue(format!(
                "table entry for failed node {} helpers {:?}",
                key.failed, key.helpers
            )));
        }
    }
    for key in params.repair_keys() {
        if !table.contains_key(&key) {
            return Err(Error::IncompleteTable {
                failed: key.failed,
                helpers: key.helpers,
            });
        }
    }
    Ok(())
}

fn integer(v: impl Into<num_bigint::BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// Average total repair download of node `j` over all of its helper sets.
pub fn node_avg_repair_bw(config: &DssConfig, j: usize) -> Result<Rational> {
    let n = config.n();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok(match config.bandwidth() {
        RepairBandwidthModel::Homogeneous { gamma } => gamma.clone(),
        // Each beta_i (i != j) lies in binom(n-2, d-1) of the binom(n-1, d) helper sets.
        RepairBandwidthModel::HelperOnly { beta } => {
            let others = rational::sum(beta.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, b)| b));
            others * integer(config.d()) / integer(n - 1)
        }
        RepairBandwidthModel::Full { table } => {
            let total = rational::sum(
                table
                    .iter()
                    .filter(|(key, _)| key.failed == j)
                    .flat_map(|(_, values)| values),
            );
            total / integer(config.params().helper_sets_per_node())
        }
    })
}

/// `(alpha_bar, gamma_bar)`: mean storage and mean average repair bandwidth.
pub fn system_averages(config: &DssConfig) -> (Rational, Rational) {
    let n = integer(config.n());
    let alpha_bar = rational::sum(config.alpha()) / &n;
    let gamma_total = (0..config.n())
        .map(|j| node_avg_repair_bw(config, j).expect("index in range"))
        .fold(Rational::zero(), |acc, g| acc + g);
    (alpha_bar, gamma_total / n)
}

/// The bandwidth multiset as ascending `(value, multiplicity)` runs.
pub(crate) fn beta_multiset_runs(config: &DssConfig) -> Vec<(Rational, u128)> {
    let params = config.params();
    let mut runs: BTreeMap<Rational, u128> = BTreeMap::new();
    match config.bandwidth() {
        RepairBandwidthModel::Homogeneous { gamma } => {
            runs.insert(gamma / integer(config.d()), params.multiset_len());
        }
        RepairBandwidthModel::HelperOnly { beta } => {
            // Triples (i, j, S) with helper i: n-1 choices of j, binom(n-2, d-1) sets S.
            let per_helper = (params.n() as u128 - 1)
                * num_integer::binomial(params.n() as u128 - 2, params.d() as u128 - 1);
            for b in beta {
                *runs.entry(b.clone()).or_default() += per_helper;
            }
        }
        RepairBandwidthModel::Full { table } => {
            for b in table.values().flatten() {
                *runs.entry(b.clone()).or_default() += 1;
            }
        }
    }
    runs.into_iter().filter(|(_, c)| *c > 0).collect()
}

/// Sum of the `h` smallest (or largest) entries of a run-length multiset.
pub(crate) fn extreme_sum(runs: &[(Rational, u128)], h: u128, largest: bool) -> Rational {
    let mut remaining = h;
    let mut total = Rational::zero();
    let iter: Box<dyn Iterator<Item = &(Rational, u128)>> = if largest {
        Box::new(runs.iter().rev())
    } else {
        Box::new(runs.iter())
    };
    for (value, count) in iter {
        if remaining == 0 {
            break;
        }
        let take = remaining.min(*count);
        total += value * integer(take);
        remaining -= take;
    }
    total
}

/// Every `beta_{ijS}` of the expanded table, ascending, duplicates kept.
pub fn sorted_beta_multiset(config: &DssConfig) -> Vec<Rational> {
    beta_multiset_runs(config)
        .into_iter()
        .flat_map(|(value, count)| std::iter::repeat_n(value, count as usize))
        .collect()
}

/// Same system with an explicit `beta_{ijS}` table. Idempotent.
pub fn expand_to_full(config: &DssConfig) -> DssConfig {
    if let RepairBandwidthModel::Full { .. } = config.bandwidth() {
        return config.clone();
    }
    let betas = config.helper_betas().expect("non-full model");
    let table = config
        .params()
        .repair_keys()
        .map(|key| {
            let values = key.helpers.iter().map(|&i| betas[i].clone()).collect();
            (key, values)
        })
        .collect();
    DssConfig {
        params: config.params,
        alpha: config.alpha.clone(),
        bandwidth: RepairBandwidthModel::Full { table },
    }
}

/// Multiplies every storage and bandwidth value by `c > 0`.
pub fn scale_config(config: &DssConfig, c: &Rational) -> Result<DssConfig> {
    if !c.is_positive() {
        return Err(Error::NonPositiveScalar(c.to_string()));
    }
    let bandwidth = match config.bandwidth() {
        RepairBandwidthModel::Homogeneous { gamma } => RepairBandwidthModel::Homogeneous {
            gamma: gamma * c,
        },
        RepairBandwidthModel::HelperOnly { beta } => RepairBandwidthModel::HelperOnly {
            beta: beta.iter().map(|b| b * c).collect(),
        },
        RepairBandwidthModel::Full { table } => RepairBandwidthModel::Full {
            table: table
                .iter()
                .map(|(key, values)| (key.clone(), values.iter().map(|b| b * c).collect()))
                .collect(),
        },
    };
    Ok(DssConfig {
        params: config.params,
        alpha: config.alpha.iter().map(|a| a * c).collect(),
        bandwidth,
    })
}

/// Smallest positive integer that makes every value of the config (including
/// the per-helper homogeneous share `gamma / d`) integral.
pub fn integer_scale(config: &DssConfig) -> num_bigint::BigInt {
    let per_helper: Vec<Rational> = match config.bandwidth() {
        RepairBandwidthModel::Full { table } => table.values().flatten().cloned().collect(),
        _ => config.helper_betas().unwrap(),
    };
    rational::denominator_lcm(config.alpha().iter().chain(per_helper.iter()))
}
