//! Functional-repair simulator using random linear coding over GF(p).
//!
//! Every node instance stores `alpha_j` coded rows of length `M` (the file size
//! in symbols). A repair draws fresh random combinations at each helper and
//! stores fresh random combinations of everything received. A user can decode
//! iff the rows of the contacted instances have rank `M`.

use itertools::Itertools;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::exact_capacity;
use crate::error::{Error, Result};
use crate::flowgraph::{chain_schedule, HelperChoice, Instance, RepairSchedule};
use crate::model::rational::{self, Rational};
use crate::model::DssConfig;

pub const DEFAULT_PRIME: u64 = 65537;

/// Prime modulus of the coding field. Limited to 32 bits so products fit in `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    p: u64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut f = 2u64;
    while f * f <= p {
        if p.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

impl FieldSpec {
    pub fn new(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 {
            return Err(Error::InvalidField(format!("{p} exceeds 32 bits")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat: a^(p-2)
        let (mut base, mut exp, mut acc) = (a % self.p, self.p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        acc
    }
}

type Matrix = Vec<Vec<u64>>;

/// Rank over GF(p) by Gaussian elimination on a copy of `rows`.
pub fn rank(field: FieldSpec, rows: &[Vec<u64>]) -> usize {
    let p = field.p;
    let mut m: Matrix = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = field.inv(m[rank][col]);
        for c in col..cols {
            m[rank][c] = m[rank][c] * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let factor = m[r][col];
                for c in col..cols {
                    let sub = factor * m[rank][c] % p;
                    m[r][c] = (m[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Integer storage and download units of an integral config.
#[derive(Debug, Clone)]
struct Units {
    alpha: Vec<usize>,
    config: DssConfig,
}

impl Units {
    fn new(config: &DssConfig) -> Result<Self> {
        let alpha = config
            .alpha()
            .iter()
            .map(rational::to_usize)
            .collect::<Result<Vec<_>>>()?;
        // Reject fractional downloads up front rather than at the first repair.
        if let Some(betas) = config.helper_betas() {
            betas.iter().map(rational::to_usize).collect::<Result<Vec<_>>>()?;
        } else {
            for key in config.params().repair_keys() {
                for &i in &key.helpers {
                    rational::to_usize(&config.beta(i, key.failed, &key.helpers)?)?;
                }
            }
        }
        Ok(Self {
            alpha,
            config: config.clone(),
        })
    }

    fn beta(&self, helper: usize, failed: usize, helpers: &[usize]) -> Result<usize> {
        rational::to_usize(&self.config.beta(helper, failed, helpers)?)
    }
}

#[derive(Debug, Clone)]
pub struct RlncState {
    field: FieldSpec,
    file_dim: usize,
    units: Units,
    /// Coded rows of the live instance of each node.
    nodes: Vec<Matrix>,
    generations: Vec<usize>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RlncState {
    /// Stores `alpha_j` uniformly random rows of `GF(p)^M` on every node.
    pub fn init_storage(config: &DssConfig, file_dim: usize, field: FieldSpec, seed: u64) -> Result<Self> {
        let units = Units::new(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = units
            .alpha
            .iter()
            .map(|&rows| random_matrix(&mut rng, field, rows, file_dim))
            .collect();
        Ok(Self {
            field,
            file_dim,
            generations: vec![0; config.n()],
            units,
            nodes,
            seed,
            rng,
        })
    }

    /// Uses the given rows as the initial code; `seed` drives later repairs.
    pub fn init_with_rows(
        config: &DssConfig,
        file_dim: usize,
        field: FieldSpec,
        rows: Vec<Matrix>,
        seed: u64,
    ) -> Result<Self> {
        let units = Units::new(config)?;
        if rows.len() != config.n() {
            return Err(Error::DimensionMismatch {
                what: "generator rows",
                expected: config.n(),
                got: rows.len(),
            });
        }
        for (j, matrix) in rows.iter().enumerate() {
            if matrix.len() != units.alpha[j] {
                return Err(Error::DimensionMismatch {
                    what: "rows of node",
                    expected: units.alpha[j],
                    got: matrix.len(),
                });
            }
            if let Some(row) = matrix.iter().find(|r| r.len() != file_dim) {
                return Err(Error::DimensionMismatch {
                    what: "row length",
                    expected: file_dim,
                    got: row.len(),
                });
            }
            if matrix.iter().flatten().any(|&x| x >= field.p) {
                return Err(Error::InvalidField(format!(
                    "generator entry of node {} not reduced mod {}",
                    j + 1,
                    field.p
                )));
            }
        }
        Ok(Self {
            field,
            file_dim,
            generations: vec![0; config.n()],
            units,
            nodes: rows,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn file_dim(&self) -> usize {
        self.file_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn live(&self, node: usize) -> Instance {
        Instance {
            node,
            generation: self.generations[node],
        }
    }

    pub fn rows(&self, node: usize) -> &[Vec<u64>] {
        &self.nodes[node]
    }

    fn check_live(&self, inst: &Instance) -> bool {
        inst.node < self.nodes.len() && self.generations[inst.node] == inst.generation
    }

    /// Replaces `failed` by a node storing random combinations of what the helpers send.
    pub fn repair_event(&mut self, failed: usize, helpers: &[Instance]) -> Result<()> {
        let n = self.nodes.len();
        let d = self.units.config.d();
        if failed >= n {
            return Err(Error::IndexOutOfRange { index: failed, n });
        }
        if helpers.len() != d {
            return Err(Error::BadHelpers(format!("{} helpers, expected d = {d}", helpers.len())));
        }
        let mut helper_nodes: Vec<usize> = helpers.iter().map(|h| h.node).collect();
        helper_nodes.sort_unstable();
        if helper_nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadHelpers("repeated helper".into()));
        }
        if helper_nodes.contains(&failed) {
            return Err(Error::BadHelpers(format!("node {} helps its own repair", failed + 1)));
        }
        if let Some(h) = helpers.iter().find(|h| !self.check_live(h)) {
            return Err(Error::BadHelpers(format!("helper {h:?} is not live")));
        }
        let mut received: Matrix = Vec::new();
        for h in helpers {
            let count = self.units.beta(h.node, failed, &helper_nodes)?;
            for _ in 0..count {
                let row = combine(&mut self.rng, self.field, &self.nodes[h.node], self.file_dim);
                received.push(row);
            }
        }
        let stored = (0..self.units.alpha[failed])
            .map(|_| combine(&mut self.rng, self.field, &received, self.file_dim))
            .collect();
        self.nodes[failed] = stored;
        self.generations[failed] += 1;
        Ok(())
    }

    /// Replays every event of `schedule`, whose instance generations must match this state.
    pub fn apply_schedule(&mut self, schedule: &RepairSchedule) -> Result<()> {
        for event in &schedule.events {
            self.repair_event(event.failed, &event.helpers)?;
        }
        Ok(())
    }

    /// Rank of the rows stored on the contacted instances.
    pub fn reconstruct_rank(&self, user_set: &[Instance]) -> Result<usize> {
        let k = self.units.config.k();
        if user_set.len() != k {
            return Err(Error::BadUserSet(format!("{} instances, expected k = {k}", user_set.len())));
        }
        if user_set.iter().map(|u| u.node).unique().count() != k {
            return Err(Error::BadUserSet("repeated node".into()));
        }
        if let Some(u) = user_set.iter().find(|u| !self.check_live(u)) {
            return Err(Error::BadUserSet(format!("instance {u:?} is not live")));
        }
        let rows: Matrix = user_set
            .iter()
            .flat_map(|u| self.nodes[u.node].iter().cloned())
            .collect();
        Ok(rank(self.field, &rows))
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, field: FieldSpec, rows: usize, cols: usize) -> Matrix {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..field.p)).collect())
        .collect()
}

/// A uniformly random linear combination of `rows`; the zero row when `rows` is empty.
fn combine(rng: &mut ChaCha8Rng, field: FieldSpec, rows: &[Vec<u64>], cols: usize) -> Vec<u64> {
    let mut out = vec![0u64; cols];
    for row in rows {
        let c = rng.random_range(0..field.p);
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(row) {
            *o = (*o + c * x) % field.p;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureWitness {
    pub trial: usize,
    pub user_set: Vec<Instance>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub seed: u64,
    pub p: u64,
    pub file_size: usize,
    pub rounds: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_fraction: Rational,
    pub first_failure: Option<FailureWitness>,
}

/// Seed of trial `t`: a fixed mix of the report seed and the trial index.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs independent trials of `rounds` random repairs each, then checks that
/// every `k`-subset of live nodes still has rank `M`.
pub fn run_random_trials(
    config: &DssConfig,
    file_size: usize,
    rounds: usize,
    trials: usize,
    seed: u64,
    field: FieldSpec,
) -> Result<TrialReport> {
    let (n, k, d) = (config.n(), config.k(), config.d());
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = trial_seed(seed, trial);
            let mut state = RlncState::init_storage(config, file_size, field, s)?;
            let mut schedule_rng = ChaCha8Rng::seed_from_u64(s ^ 0x5EED);
            let schedule = RepairSchedule::random(n, k, d, rounds, &mut schedule_rng);
            state.apply_schedule(&schedule)?;
            for users in (0..n).combinations(k) {
                let user_set: Vec<Instance> = users.iter().map(|&u| state.live(u)).collect();
                let r = state.reconstruct_rank(&user_set)?;
                if r < file_size {
                    return Ok(Some(FailureWitness {
                        trial,
                        user_set,
                        rank: r,
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|o| o.is_none()).count();
    let success_fraction = if trials == 0 {
        Rational::from_integer(1.into())
    } else {
        Rational::new(successes.into(), trials.into())
    };
    Ok(TrialReport {
        seed,
        p: field.p,
        file_size,
        rounds,
        trials,
        successes,
        success_fraction,
        first_failure: outcomes.into_iter().flatten().next(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarialReport {
    pub seed: u64,
    pub p: u64,
    pub file_size: usize,
    pub tuple: Vec<usize>,
    pub user_set: Vec<Instance>,
    /// Value of the cut isolating the witness user set.
    pub cut_value: Rational,
    pub rank: usize,
    /// `rank <= cut_value`.
    pub bound_holds: bool,
}

/// Replays the chain schedule of the exact-capacity witness and measures what
/// the witness user set can decode. `file_size` defaults to capacity + 1, which
/// must always fail.
pub fn adversarial_witness_trial(
    config: &DssConfig,
    file_size: Option<usize>,
    seed: u64,
    field: FieldSpec,
    limit: Option<usize>,
) -> Result<AdversarialReport> {
    let witness = exact_capacity(config, limit)?;
    let capacity = rational::to_usize(&witness.value)?;
    let file_size = file_size.unwrap_or(capacity + 1);
    let schedule = chain_schedule(
        config,
        &witness.tuple,
        &HelperChoice::Explicit(witness.helper_sets.clone()),
    )?;
    let mut state = RlncState::init_storage(config, file_size, field, seed)?;
    state.apply_schedule(&schedule)?;
    let rank = state.reconstruct_rank(&schedule.user_set)?;
    Ok(AdversarialReport {
        seed,
        p: field.p,
        file_size,
        tuple: witness.tuple,
        user_set: schedule.user_set,
        bound_holds: Rational::from_integer(rank.into()) <= witness.value,
        cut_value: witness.value,
        rank,
    })
}

/// Approximate success rate, for display only.
pub fn fraction_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn example1() -> DssConfig {
        DssConfig::helper_only(3, 2, 2, ints(&[1, 2, 2]), ints(&[1, 2, 2])).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(FieldSpec::new(65537).is_ok());
        assert!(FieldSpec::new(2).is_ok());
        assert!(matches!(FieldSpec::new(1), Err(Error::InvalidField(_))));
        assert!(matches!(FieldSpec::new(65536), Err(Error::InvalidField(_))));
        assert!(FieldSpec::new(4_294_967_311).is_err());
        let f = FieldSpec::new(7).unwrap();
        assert_eq!(f.inv(3) * 3 % 7, 1);
    }

    #[test]
    fn rank_basics() {
        let f = FieldSpec::new(5).unwrap();
        assert_eq!(rank(f, &[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank(f, &[vec![1, 2], vec![2, 0]]), 2);
        assert_eq!(rank(f, &[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(rank(f, &[]), 0);
        // dependent only mod 5: (1,3) * 2 = (2,6) = (2,1)
        assert_eq!(rank(f, &[vec![1, 3], vec![2, 1]]), 1);
    }

    /// The three-unit code (x, y, z): node 1 stores x, node 2 stores y and z,
    /// node 3 stores x + y and x + z. Any two nodes decode.
    fn trivial_code() -> Vec<Matrix> {
        vec![
            vec![vec![1, 0, 0]],
            vec![vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![1, 1, 0], vec![1, 0, 1]],
        ]
    }

    #[test]
    fn deterministic_code_any_pair_decodes() {
        let state = RlncState::init_with_rows(&example1(), 3, FieldSpec::default(), trivial_code(), 0).unwrap();
        for pair in (0..3).combinations(2) {
            let users: Vec<_> = pair.iter().map(|&u| state.live(u)).collect();
            assert_eq!(state.reconstruct_rank(&users).unwrap(), 3);
        }
        let mut rows = trivial_code();
        rows[0].push(vec![0, 0, 1]);
        assert!(RlncState::init_with_rows(&example1(), 3, FieldSpec::default(), rows, 0).is_err());
    }

    #[test]
    fn scalar_file_and_row_bound() {
        let s = RlncState::init_storage(&example1(), 1, FieldSpec::default(), 3).unwrap();
        assert!(s.rows(1).iter().all(|r| r.len() == 1));
        let s = RlncState::init_storage(&example1(), 4, FieldSpec::default(), 3).unwrap();
        let r = s.reconstruct_rank(&[s.live(0), s.live(1)]).unwrap();
        assert!(r <= 3);
        let zero = DssConfig::helper_only(3, 2, 2, ints(&[1, 1, 1]), ints(&[0; 3])).unwrap();
        let mut s = RlncState::init_storage(&zero, 2, FieldSpec::default(), 3).unwrap();
        s.repair_event(0, &[s.live(1), s.live(2)]).unwrap();
        assert_eq!(s.rows(0), &[vec![0, 0]]);
    }

    #[test]
    fn repair_dimensions_and_determinism() {
        let cfg = example1();
        let run = |seed| {
            let mut s = RlncState::init_storage(&cfg, 3, FieldSpec::default(), seed).unwrap();
            s.repair_event(0, &[s.live(1), s.live(2)]).unwrap();
            s
        };
        let a = run(9);
        assert_eq!(a.rows(0).len(), 1);
        assert_eq!(a.live(0).generation, 1);
        assert_eq!(a.rows(0), run(9).rows(0));
        assert_ne!(a.rows(0), run(10).rows(0));
    }

    #[test]
    fn bad_inputs() {
        let cfg = example1();
        let mut s = RlncState::init_storage(&cfg, 3, FieldSpec::default(), 1).unwrap();
        let (l0, l1, l2) = (s.live(0), s.live(1), s.live(2));
        assert!(matches!(s.repair_event(0, &[l0, l1]), Err(Error::BadHelpers(_))));
        assert!(matches!(s.repair_event(0, &[l1]), Err(Error::BadHelpers(_))));
        s.repair_event(0, &[l1, l2]).unwrap();
        assert!(matches!(s.repair_event(1, &[l0, l2]), Err(Error::BadHelpers(_))));
        assert!(matches!(s.reconstruct_rank(&[l0, l1]), Err(Error::BadUserSet(_))));
        assert!(matches!(s.reconstruct_rank(&[l1]), Err(Error::BadUserSet(_))));
        let frac = DssConfig::helper_only(3, 2, 2, vec![Rational::new(1.into(), 2.into()), int(1), int(1)], ints(&[1; 3])).unwrap();
        assert!(matches!(
            RlncState::init_storage(&frac, 1, FieldSpec::default(), 0),
            Err(Error::NonIntegerUnits(_))
        ));
    }

    #[test]
    fn zero_file_always_succeeds() {
        let r = run_random_trials(&example1(), 0, 5, 10, 1, FieldSpec::default()).unwrap();
        assert_eq!(r.successes, 10);
        assert!(r.first_failure.is_none());
    }

    #[test]
    fn trials_are_reproducible() {
        let a = run_random_trials(&example1(), 3, 10, 20, 42, FieldSpec::default()).unwrap();
        let b = run_random_trials(&example1(), 3, 10, 20, 42, FieldSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adversarial_examples() {
        let r = adversarial_witness_trial(&example1(), None, 5, FieldSpec::default(), None).unwrap();
        assert_eq!(r.file_size, 4);
        assert!(r.rank <= 3 && r.bound_holds);
        let ex2 = DssConfig::helper_only(3, 2, 2, ints(&[5, 6, 7]), ints(&[3, 4, 5])).unwrap();
        let r = adversarial_witness_trial(&ex2, Some(10), 5, FieldSpec::default(), None).unwrap();
        assert_eq!(r.tuple, vec![0, 2]);
        assert!(r.rank <= 9);
        let homo = DssConfig::homogeneous(3, 2, 2, int(10), int(20)).unwrap();
        let r = adversarial_witness_trial(&homo, Some(21), 5, FieldSpec::default(), None).unwrap();
        assert!(r.rank <= 20);
    }
}
