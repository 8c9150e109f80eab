//! Information flow graphs of failure/repair histories and their min-cuts.
//!
//! Each node instance is a pair of vertices joined by an edge carrying its
//! storage. A repaired instance receives one edge from every helper, weighted by
//! that helper's download. The smallest source-to-user cut over all histories is
//! the capacity, which gives an oracle for the closed-form search in
//! [`crate::capacity`] that shares no code with it.

mod maxflow;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::BigInt;
use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::capacity::check_tuple;
use crate::error::{Error, Result};
use crate::model::rational::{self, Rational};
use crate::model::{integer_scale, DssConfig};
pub use maxflow::Dinic;

/// Largest `n` accepted by the chain oracle.
pub const CHAIN_MAX_N: usize = 8;
/// Largest `n` accepted by the exhaustive oracle.
pub const EXHAUSTIVE_MAX_N: usize = 5;
/// Cap on the number of min-cut evaluations in exhaustive mode.
pub const EXHAUSTIVE_MAX_EVALUATIONS: u128 = 5_000_000;

/// A node instance: generation 0 is the original node, each repair adds one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub node: usize,
    pub generation: usize,
}

impl Instance {
    pub fn original(node: usize) -> Self {
        Self {
            node,
            generation: 0,
        }
    }
}

/// Replace the live instance of `failed` using the live `helpers`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairEvent {
    pub failed: usize,
    pub helpers: Vec<Instance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepairSchedule {
    pub events: Vec<RepairEvent>,
    /// The `k` live instances contacted after the last event.
    pub user_set: Vec<Instance>,
}

impl RepairSchedule {
    /// Checks causality and returns the live generation of every node at the end.
    pub fn validate(&self, config: &DssConfig) -> Result<Vec<usize>> {
        let (n, k, d) = (config.n(), config.k(), config.d());
        let mut live = vec![0usize; n];
        for (step, event) in self.events.iter().enumerate() {
            if event.failed >= n {
                return Err(Error::IndexOutOfRange {
                    index: event.failed,
                    n,
                });
            }
            if event.helpers.len() != d {
                return Err(Error::CausalityViolation(format!(
                    "event {step}: {} helpers, expected d = {d}",
                    event.helpers.len()
                )));
            }
            let nodes: BTreeSet<usize> = event.helpers.iter().map(|h| h.node).collect();
            if nodes.len() != d {
                return Err(Error::CausalityViolation(format!(
                    "event {step}: repeated helper node"
                )));
            }
            for h in &event.helpers {
                if h.node >= n {
                    return Err(Error::IndexOutOfRange { index: h.node, n });
                }
                if h.node == event.failed {
                    return Err(Error::CausalityViolation(format!(
                        "event {step}: node {} helps its own repair",
                        h.node + 1
                    )));
                }
                if live[h.node] != h.generation {
                    return Err(Error::CausalityViolation(format!(
                        "event {step}: helper {h:?} is not live"
                    )));
                }
            }
            live[event.failed] += 1;
        }
        if self.user_set.len() != k {
            return Err(Error::CausalityViolation(format!(
                "user contacts {} instances, expected k = {k}",
                self.user_set.len()
            )));
        }
        let users: BTreeSet<usize> = self.user_set.iter().map(|u| u.node).collect();
        if users.len() != k {
            return Err(Error::CausalityViolation("repeated user node".into()));
        }
        for u in &self.user_set {
            if u.node >= n {
                return Err(Error::IndexOutOfRange { index: u.node, n });
            }
            if live[u.node] != u.generation {
                return Err(Error::CausalityViolation(format!(
                    "user instance {u:?} is not live"
                )));
            }
        }
        Ok(live)
    }

    /// `rounds` uniformly random single-failure repairs followed by a random
    /// user set of `k` live instances.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, d: usize, rounds: usize, rng: &mut R) -> Self {
        let mut live = vec![0usize; n];
        let mut events = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let failed = rng.random_range(0..n);
            let others: Vec<usize> = (0..n).filter(|&i| i != failed).collect();
            let mut chosen: Vec<usize> = others.choose_multiple(rng, d).copied().collect();
            chosen.sort_unstable();
            let helpers = chosen
                .into_iter()
                .map(|node| Instance {
                    node,
                    generation: live[node],
                })
                .collect();
            events.push(RepairEvent { failed, helpers });
            live[failed] += 1;
        }
        let all: Vec<usize> = (0..n).collect();
        let mut users: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
        users.sort_unstable();
        let user_set = users
            .into_iter()
            .map(|node| Instance {
                node,
                generation: live[node],
            })
            .collect();
        Self { events, user_set }
    }
}

/// How [`chain_schedule`] picks the fresh helpers of each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HelperChoice {
    /// Step `i` uses these `d + 1 - i` original nodes outside `f_1..f_i`.
    Explicit(Vec<Vec<usize>>),
    /// The cheapest `d + 1 - i` original nodes outside `f_1..f_i`, ties to lower index.
    Minimizing,
}

/// The chain of `k` successive failures in which failed node `f_i` is helped by
/// every earlier replacement `f_1'..f_{i-1}'` plus `d + 1 - i` original nodes.
/// The user contacts the `k` replacements.
pub fn chain_schedule(config: &DssConfig, tuple: &[usize], helper_choice: &HelperChoice) -> Result<RepairSchedule> {
    check_tuple(config, tuple)?;
    let (k, d) = (config.k(), config.d());
    let fresh_sets: Vec<Vec<usize>> = match helper_choice {
        HelperChoice::Explicit(sets) => {
            if sets.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "helper sets",
                    expected: k,
                    got: sets.len(),
                });
            }
            for (step, set) in sets.iter().enumerate() {
                if set.len() != d - step {
                    return Err(Error::BadHelpers(format!(
                        "step {} needs {} fresh helpers, got {}",
                        step + 1,
                        d - step,
                        set.len()
                    )));
                }
                if let Some(bad) = set.iter().find(|h| tuple[..=step].contains(h)) {
                    return Err(Error::BadHelpers(format!(
                        "step {} uses already failed node {}",
                        step + 1,
                        bad + 1
                    )));
                }
            }
            sets.clone()
        }
        HelperChoice::Minimizing => {
            let beta = config.helper_betas().ok_or(Error::ModelUnsupported {
                op: "chain_schedule",
                model: config.bandwidth().kind(),
            })?;
            let mut by_beta: Vec<usize> = (0..config.n()).collect();
            by_beta.sort_by(|&a, &b| beta[a].cmp(&beta[b]).then(a.cmp(&b)));
            (0..k)
                .map(|step| {
                    let mut set: Vec<usize> = by_beta
                        .iter()
                        .copied()
                        .filter(|i| !tuple[..=step].contains(i))
                        .take(d - step)
                        .collect();
                    set.sort_unstable();
                    set
                })
                .collect()
        }
    };
    let events = tuple
        .iter()
        .zip(&fresh_sets)
        .enumerate()
        .map(|(step, (&failed, fresh))| {
            let mut helpers: Vec<Instance> = tuple[..step]
                .iter()
                .map(|&f| Instance {
                    node: f,
                    generation: 1,
                })
                .chain(fresh.iter().map(|&h| Instance::original(h)))
                .collect();
            helpers.sort();
            RepairEvent { failed, helpers }
        })
        .collect();
    let user_set = tuple
        .iter()
        .map(|&f| Instance {
            node: f,
            generation: 1,
        })
        .collect();
    let schedule = RepairSchedule { events, user_set };
    schedule.validate(config)?;
    Ok(schedule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    Source,
    Sink,
    In(Instance),
    Out(Instance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Scaled integer capacity; for infinite edges this is the stand-in value.
    pub capacity: u128,
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Every rational capacity was multiplied by this to make it integral.
    pub scale: BigInt,
}

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

/// Integer-scaled storage and download values for one config.
#[derive(Debug, Clone)]
pub struct ScaledCapacities<'a> {
    config: &'a DssConfig,
    scale: BigInt,
    scale_r: Rational,
    alpha: Vec<u128>,
    helper_beta: Option<Vec<u128>>,
}

impl<'a> ScaledCapacities<'a> {
    pub fn new(config: &'a DssConfig) -> Result<Self> {
        let scale = integer_scale(config);
        let scale_r = Rational::from_integer(scale.clone());
        let alpha = config
            .alpha()
            .iter()
            .map(|a| rational::to_u128(&(a * &scale_r)))
            .collect::<Result<Vec<_>>>()?;
        let helper_beta = config
            .helper_betas()
            .map(|betas| {
                betas
                    .iter()
                    .map(|b| rational::to_u128(&(b * &scale_r)))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Self {
            config,
            scale,
            scale_r,
            alpha,
            helper_beta,
        })
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn alpha(&self, node: usize) -> u128 {
        self.alpha[node]
    }

    /// Download from `helper` when repairing `failed` with the helper nodes `helpers`.
    pub fn beta(&self, helper: usize, failed: usize, helpers: &[usize]) -> Result<u128> {
        match &self.helper_beta {
            Some(b) => Ok(b[helper]),
            None => {
                let mut sorted = helpers.to_vec();
                sorted.sort_unstable();
                let b = self.config.beta(helper, failed, &sorted)?;
                rational::to_u128(&(b * &self.scale_r))
            }
        }
    }
}

/// Builds the information flow graph of `schedule`.
pub fn build_flow_graph(config: &DssConfig, schedule: &RepairSchedule) -> Result<FlowGraph> {
    let caps = ScaledCapacities::new(config)?;
    build_with(&caps, schedule)
}

pub fn build_with(caps: &ScaledCapacities<'_>, schedule: &RepairSchedule) -> Result<FlowGraph> {
    let config = caps.config;
    schedule.validate(config)?;
    let n = config.n();
    let mut vertices = vec![Vertex::Source, Vertex::Sink];
    let mut edges: Vec<Edge> = Vec::new();
    let mut out_of: HashMap<Instance, usize> = HashMap::new();
    let overflow = || Error::CapacityOverflow("sum of scaled capacities".into());

    let add_instance = |vertices: &mut Vec<Vertex>,
                        edges: &mut Vec<Edge>,
                        out_of: &mut HashMap<Instance, usize>,
                        inst: Instance| {
        let vin = vertices.len();
        vertices.push(Vertex::In(inst));
        vertices.push(Vertex::Out(inst));
        edges.push(Edge {
            from: vin,
            to: vin + 1,
            capacity: caps.alpha(inst.node),
            infinite: false,
        });
        out_of.insert(inst, vin + 1);
        vin
    };

    for node in 0..n {
        let vin = add_instance(&mut vertices, &mut edges, &mut out_of, Instance::original(node));
        edges.push(Edge {
            from: SOURCE,
            to: vin,
            capacity: 0,
            infinite: true,
        });
    }
    let mut live = vec![0usize; n];
    for event in &schedule.events {
        live[event.failed] += 1;
        let inst = Instance {
            node: event.failed,
            generation: live[event.failed],
        };
        let helper_nodes: Vec<usize> = event.helpers.iter().map(|h| h.node).collect();
        let helper_edges = event
            .helpers
            .iter()
            .map(|h| Ok((out_of[h], caps.beta(h.node, event.failed, &helper_nodes)?)))
            .collect::<Result<Vec<_>>>()?;
        let vin = add_instance(&mut vertices, &mut edges, &mut out_of, inst);
        for (from, capacity) in helper_edges {
            edges.push(Edge {
                from,
                to: vin,
                capacity,
                infinite: false,
            });
        }
    }
    for u in &schedule.user_set {
        edges.push(Edge {
            from: out_of[u],
            to: SINK,
            capacity: 0,
            infinite: true,
        });
    }
    // Larger than any finite cut, so never part of a minimum cut.
    let infinite = edges
        .iter()
        .filter(|e| !e.infinite)
        .try_fold(1u128, |acc, e| acc.checked_add(e.capacity))
        .ok_or_else(overflow)?;
    for e in edges.iter_mut().filter(|e| e.infinite) {
        e.capacity = infinite;
    }
    Ok(FlowGraph {
        vertices,
        edges,
        scale: caps.scale.clone(),
    })
}

impl FlowGraph {
    /// Max-flow value in scaled integer units.
    pub fn max_flow_scaled(&self) -> u128 {
        let mut dinic = Dinic::new(self.vertices.len());
        for e in &self.edges {
            dinic.add_edge(e.from, e.to, e.capacity);
        }
        dinic.max_flow(SOURCE, SINK)
    }

    /// Kahn's algorithm over the edge list.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree = vec![0usize; self.vertices.len()];
        let mut succ = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            indegree[e.to] += 1;
            succ[e.from].push(e.to);
        }
        let mut stack: Vec<usize> = (0..self.vertices.len()).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in &succ[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    stack.push(w);
                }
            }
        }
        seen == self.vertices.len()
    }

    pub fn vertex_label(&self, v: usize) -> String {
        match self.vertices[v] {
            Vertex::Source => "source".into(),
            Vertex::Sink => "sink".into(),
            Vertex::In(i) => format!("v{}.{}_in", i.node + 1, i.generation),
            Vertex::Out(i) => format!("v{}.{}_out", i.node + 1, i.generation),
        }
    }

    /// One `src dst capacity` line per edge, capacities in scaled integer units.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# scale {}\n", self.scale);
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.vertex_label(e.from),
                self.vertex_label(e.to),
                e.capacity
            );
        }
        out
    }
}

/// Min-cut value of the graph, divided back by the scale.
pub fn max_flow_min_cut(graph: &FlowGraph) -> Rational {
    Rational::new(BigInt::from(graph.max_flow_scaled()), graph.scale.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Minimizing chain schedule for every ordered `k`-tuple.
    Chains,
    /// Every causally valid schedule of up to `k` repairs, every helper choice,
    /// every user set.
    Exhaustive,
}

/// Capacity computed purely from min-cuts of flow graphs.
pub fn oracle_capacity(config: &DssConfig, mode: OracleMode) -> Result<Rational> {
    config.helper_betas().ok_or(Error::ModelUnsupported {
        op: "oracle_capacity",
        model: config.bandwidth().kind(),
    })?;
    let caps = ScaledCapacities::new(config)?;
    let scaled = match mode {
        OracleMode::Chains => chain_oracle_scaled(config, &caps)?,
        OracleMode::Exhaustive => exhaustive_oracle_scaled(config, &caps, config.k())?,
    };
    Ok(Rational::new(BigInt::from(scaled), caps.scale.clone()))
}

fn chain_oracle_scaled(config: &DssConfig, caps: &ScaledCapacities<'_>) -> Result<u128> {
    let n = config.n();
    if n > CHAIN_MAX_N {
        return Err(Error::SearchTooLarge(format!(
            "chain oracle is limited to n <= {CHAIN_MAX_N}, got {n}"
        )));
    }
    let tuples: Vec<Vec<usize>> = (0..n).permutations(config.k()).collect();
    tuples
        .par_iter()
        .map(|tuple| {
            let schedule = chain_schedule(config, tuple, &HelperChoice::Minimizing)?;
            Ok(build_with(caps, &schedule)?.max_flow_scaled())
        })
        .try_reduce(|| u128::MAX, |a, b| Ok(a.min(b)))
}

fn exhaustive_oracle_scaled(config: &DssConfig, caps: &ScaledCapacities<'_>, depth: usize) -> Result<u128> {
    let (n, k, d) = (config.n(), config.k(), config.d());
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::SearchTooLarge(format!(
            "exhaustive oracle is limited to n <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    let branching = n as u128 * num_integer::binomial(n as u128 - 1, d as u128);
    let user_sets = num_integer::binomial(n as u128, k as u128);
    let schedules: u128 = (0..=depth as u32).map(|t| branching.pow(t)).sum();
    if schedules * user_sets > EXHAUSTIVE_MAX_EVALUATIONS {
        return Err(Error::SearchTooLarge(format!(
            "exhaustive oracle would evaluate {} cuts (limit {EXHAUSTIVE_MAX_EVALUATIONS})",
            schedules * user_sets
        )));
    }
    // Split on the first event so the search parallelizes; depth 0 is evaluated separately.
    let mut first_events: Vec<Option<RepairEvent>> = vec![None];
    if depth > 0 {
        first_events.extend(events_from(&vec![0; n], d).into_iter().map(Some));
    }
    first_events
        .par_iter()
        .map(|first| {
            let mut live = vec![0usize; n];
            let mut events = Vec::new();
            match first {
                None => min_over_users(caps, &events, &live, k),
                Some(event) => {
                    live[event.failed] += 1;
                    events.push(event.clone());
                    exhaustive_rec(caps, &mut events, &mut live, depth, k, d)
                }
            }
        })
        .try_reduce(|| u128::MAX, |a, b| Ok(a.min(b)))
}

fn events_from(live: &[usize], d: usize) -> Vec<RepairEvent> {
    let n = live.len();
    (0..n)
        .flat_map(|failed| {
            (0..n)
                .filter(move |&i| i != failed)
                .combinations(d)
                .map(move |nodes| RepairEvent {
                    failed,
                    helpers: nodes
                        .into_iter()
                        .map(|node| Instance {
                            node,
                            generation: live[node],
                        })
                        .collect(),
                })
        })
        .collect()
}

fn min_over_users(caps: &ScaledCapacities<'_>, events: &[RepairEvent], live: &[usize], k: usize) -> Result<u128> {
    let mut best = u128::MAX;
    for users in (0..live.len()).combinations(k) {
        let schedule = RepairSchedule {
            events: events.to_vec(),
            user_set: users
                .into_iter()
                .map(|node| Instance {
                    node,
                    generation: live[node],
                })
                .collect(),
        };
        best = best.min(build_with(caps, &schedule)?.max_flow_scaled());
    }
    Ok(best)
}

fn exhaustive_rec(
    caps: &ScaledCapacities<'_>,
    events: &mut Vec<RepairEvent>,
    live: &mut Vec<usize>,
    depth: usize,
    k: usize,
    d: usize,
) -> Result<u128> {
    let mut best = min_over_users(caps, events, live, k)?;
    if events.len() < depth {
        for event in events_from(live, d) {
            live[event.failed] += 1;
            let failed = event.failed;
            events.push(event);
            best = best.min(exhaustive_rec(caps, events, live, depth, k, d)?);
            events.pop();
            live[failed] -= 1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::exact_capacity;
    use crate::model::rational::{int, ratio};
    use crate::model::{expand_to_full, scale_config};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn example1() -> DssConfig {
        DssConfig::helper_only(3, 2, 2, ints(&[1, 2, 2]), ints(&[1, 2, 2])).unwrap()
    }

    fn example2() -> DssConfig {
        DssConfig::helper_only(3, 2, 2, ints(&[5, 6, 7]), ints(&[3, 4, 5])).unwrap()
    }

    fn gen(node: usize, generation: usize) -> Instance {
        Instance { node, generation }
    }

    #[test]
    fn chain_for_example1() {
        let s = chain_schedule(&example1(), &[0, 1], &HelperChoice::Minimizing).unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.events[0].failed, 0);
        assert_eq!(s.events[0].helpers, vec![gen(1, 0), gen(2, 0)]);
        assert_eq!(s.events[1].failed, 1);
        assert_eq!(s.events[1].helpers, vec![gen(0, 1), gen(2, 0)]);
        assert_eq!(s.user_set, vec![gen(0, 1), gen(1, 1)]);
    }

    #[test]
    fn chain_errors_and_base_case() {
        assert!(matches!(
            chain_schedule(&example1(), &[1, 1], &HelperChoice::Minimizing),
            Err(Error::DuplicateIndices(_))
        ));
        let cfg = DssConfig::helper_only(4, 1, 2, ints(&[1; 4]), ints(&[3, 1, 2, 1])).unwrap();
        let s = chain_schedule(&cfg, &[2], &HelperChoice::Minimizing).unwrap();
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.events[0].helpers, vec![gen(1, 0), gen(3, 0)]);
        let bad = HelperChoice::Explicit(vec![vec![1, 2], vec![0]]);
        assert!(matches!(
            chain_schedule(&example1(), &[0, 1], &bad),
            Err(Error::BadHelpers(_))
        ));
        let full = expand_to_full(&example1());
        assert!(matches!(
            chain_schedule(&full, &[0, 1], &HelperChoice::Minimizing),
            Err(Error::ModelUnsupported { .. })
        ));
        let explicit = HelperChoice::Explicit(vec![vec![1, 2], vec![2]]);
        assert_eq!(
            chain_schedule(&full, &[0, 1], &explicit).unwrap(),
            chain_schedule(&example1(), &[0, 1], &HelperChoice::Minimizing).unwrap()
        );
    }

    #[test]
    fn no_failure_cut_is_storage_sum() {
        let schedule = RepairSchedule {
            events: vec![],
            user_set: vec![gen(0, 0), gen(1, 0)],
        };
        let g = build_flow_graph(&example1(), &schedule).unwrap();
        assert_eq!(max_flow_min_cut(&g), int(3));
        assert!(g.is_acyclic());
        let homo = DssConfig::homogeneous(4, 3, 3, ratio(7, 2), int(3)).unwrap();
        let schedule = RepairSchedule {
            events: vec![],
            user_set: vec![gen(0, 0), gen(2, 0), gen(3, 0)],
        };
        let g = build_flow_graph(&homo, &schedule).unwrap();
        assert_eq!(g.scale, BigInt::from(2));
        assert_eq!(max_flow_min_cut(&g), ratio(21, 2));
    }

    #[test]
    fn chain_cut_example1() {
        let s = chain_schedule(&example1(), &[0, 1], &HelperChoice::Minimizing).unwrap();
        let g = build_flow_graph(&example1(), &s).unwrap();
        assert!(g.is_acyclic());
        assert_eq!(max_flow_min_cut(&g), int(3));
    }

    #[test]
    fn single_instance_and_parallel_users() {
        let cfg = DssConfig::helper_only(2, 1, 1, ints(&[7, 9]), ints(&[1, 1])).unwrap();
        let schedule = RepairSchedule {
            events: vec![],
            user_set: vec![gen(0, 0)],
        };
        assert_eq!(max_flow_min_cut(&build_flow_graph(&cfg, &schedule).unwrap()), int(7));
        let cfg = DssConfig::helper_only(3, 2, 2, ints(&[1, 2, 5]), ints(&[0; 3])).unwrap();
        let schedule = RepairSchedule {
            events: vec![],
            user_set: vec![gen(0, 0), gen(1, 0)],
        };
        assert_eq!(max_flow_min_cut(&build_flow_graph(&cfg, &schedule).unwrap()), int(3));
    }

    #[test]
    fn causality_checks() {
        let cfg = example1();
        let stale = RepairSchedule {
            events: vec![
                RepairEvent {
                    failed: 0,
                    helpers: vec![gen(1, 0), gen(2, 0)],
                },
                RepairEvent {
                    failed: 1,
                    helpers: vec![gen(0, 0), gen(2, 0)],
                },
            ],
            user_set: vec![gen(0, 1), gen(1, 1)],
        };
        assert!(matches!(
            build_flow_graph(&cfg, &stale),
            Err(Error::CausalityViolation(_))
        ));
        let self_help = RepairSchedule {
            events: vec![RepairEvent {
                failed: 0,
                helpers: vec![gen(0, 0), gen(2, 0)],
            }],
            user_set: vec![gen(0, 1), gen(1, 0)],
        };
        assert!(build_flow_graph(&cfg, &self_help).is_err());
        let dead_user = RepairSchedule {
            events: vec![],
            user_set: vec![gen(0, 1), gen(1, 0)],
        };
        assert!(build_flow_graph(&cfg, &dead_user).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_capacity(&example1(), OracleMode::Chains).unwrap(), int(3));
        assert_eq!(oracle_capacity(&example2(), OracleMode::Chains).unwrap(), int(9));
        let homo = DssConfig::homogeneous(3, 2, 2, int(10), int(20)).unwrap();
        assert_eq!(oracle_capacity(&homo, OracleMode::Chains).unwrap(), int(20));
        assert_eq!(oracle_capacity(&example1(), OracleMode::Exhaustive).unwrap(), int(3));
        assert_eq!(oracle_capacity(&example2(), OracleMode::Exhaustive).unwrap(), int(9));
    }

    #[test]
    fn oracle_guards() {
        let big = DssConfig::homogeneous(9, 2, 3, int(1), int(3)).unwrap();
        assert!(matches!(
            oracle_capacity(&big, OracleMode::Chains),
            Err(Error::SearchTooLarge(_))
        ));
        let full = expand_to_full(&example1());
        assert!(matches!(
            oracle_capacity(&full, OracleMode::Chains),
            Err(Error::ModelUnsupported { .. })
        ));
    }

    #[test]
    fn witness_chain_cut_equals_witness_value() {
        for cfg in [example1(), example2()] {
            let w = exact_capacity(&cfg, None).unwrap();
            let s = chain_schedule(&cfg, &w.tuple, &HelperChoice::Explicit(w.helper_sets.clone())).unwrap();
            assert_eq!(max_flow_min_cut(&build_flow_graph(&cfg, &s).unwrap()), w.value);
        }
    }

    #[test]
    fn random_schedules_are_valid_and_acyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = DssConfig::helper_only(5, 2, 3, ints(&[1, 2, 3, 4, 5]), ints(&[2, 1, 0, 3, 1])).unwrap();
        for _ in 0..200 {
            let s = RepairSchedule::random(5, 2, 3, 6, &mut rng);
            let g = build_flow_graph(&cfg, &s).unwrap();
            assert!(g.is_acyclic());
        }
    }

    #[test]
    fn scaling_is_transparent() {
        let cfg = DssConfig::helper_only(4, 2, 3, vec![ratio(1, 3), int(2), ratio(5, 2), int(1)], vec![int(1), ratio(2, 3), int(0), ratio(1, 6)]).unwrap();
        let c = int(6);
        let scaled = scale_config(&cfg, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = RepairSchedule::random(4, 2, 3, 3, &mut rng);
            let a = max_flow_min_cut(&build_flow_graph(&cfg, &s).unwrap());
            let b = max_flow_min_cut(&build_flow_graph(&scaled, &s).unwrap());
            assert_eq!(a * &c, b);
        }
    }

    #[test]
    fn edge_list_dump() {
        let s = chain_schedule(&example1(), &[0, 1], &HelperChoice::Minimizing).unwrap();
        let text = build_flow_graph(&example1(), &s).unwrap().to_edge_list();
        assert!(text.contains("v1.0_in v1.0_out 1\n"));
        assert!(text.contains("v2.0_out v1.1_in 2\n"));
        assert!(text.contains("v1.1_out v2.1_in 1\n"));
        // 6 source/sink-free internal edges sum to 1+2+2+1+2 plus helper edges 2+2+1+2 = 15
        assert!(text.contains("source v1.0_in 16\n"));
    }

    #[test]
    fn full_model_graph_uses_table_entries() {
        let cfg = expand_to_full(&example2());
        let s = chain_schedule(&cfg, &[0, 2], &HelperChoice::Explicit(vec![vec![1, 2], vec![1]])).unwrap();
        assert_eq!(max_flow_min_cut(&build_flow_graph(&cfg, &s).unwrap()), int(9));
    }
}
