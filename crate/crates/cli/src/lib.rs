//! `hdss` command-line frontend: loads a config file, runs one computation and
//! prints a table or a JSON report.

mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hdss_core::capacity::{bounds_report, exact_capacity, max_n_from_env};
use hdss_core::flowgraph::{
    build_flow_graph, chain_schedule, max_flow_min_cut, oracle_capacity, HelperChoice, OracleMode,
};
use hdss_core::lift::{lift_bound_check, permutation_lift, LiftMode};
use hdss_core::model::file::load_config;
use hdss_core::model::rational::format;
use hdss_core::rlncsim::{adversarial_witness_trial, fraction_f64, run_random_trials, FieldSpec, DEFAULT_PRIME};
use hdss_core::secrecy::secrecy_upper_bound;
use hdss_core::{DssConfig, Error};
use serde_json::{json, Value};

pub use report::{config_digest, Format, Report};
use report::*;

#[derive(Debug, Parser)]
#[command(name = "hdss", version, about = "Capacity bounds and repair simulation for heterogeneous distributed storage")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a config file.
    Validate { config: PathBuf },
    /// Average, general and helper-only capacity bounds.
    Bounds {
        config: PathBuf,
        /// Also compute the exact capacity.
        #[arg(long)]
        exact: bool,
    },
    /// Exact capacity with a minimizing failure sequence.
    Capacity { config: PathBuf },
    /// Secrecy capacity upper bound against an eavesdropper on `ell` nodes.
    Secrecy {
        config: PathBuf,
        #[arg(long)]
        ell: usize,
    },
    /// Symmetric system obtained by stacking all node permutations.
    Lift {
        config: PathBuf,
        /// Build the lifted system permutation by permutation.
        #[arg(long)]
        explicit: bool,
    },
    /// Cross-check the exact capacity against min-cuts of information flow graphs.
    Flowcheck {
        config: PathBuf,
        /// Enumerate every repair schedule instead of the minimizing chains.
        #[arg(long)]
        exhaustive: bool,
        /// Write the witness flow graph as an edge list.
        #[arg(long, value_name = "PATH")]
        dump_graph: Option<PathBuf>,
    },
    /// Random linear network coding repair simulation.
    Simulate {
        config: PathBuf,
        /// File size in symbols. Defaults to capacity + 1 with `--adversarial`.
        #[arg(long)]
        file_size: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Field prime.
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        prime: u64,
        /// Run the capacity-achieving failure sequence once instead of random trials.
        #[arg(long)]
        adversarial: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_internal() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

/// Parses `args`, runs the command and writes its output; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let _ = out.write_all(report.render(cli.format).as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Validate { config } => validate(&load_config(config)?),
        Command::Bounds { config, exact } => bounds(&load_config(config)?, *exact),
        Command::Capacity { config } => capacity(&load_config(config)?),
        Command::Secrecy { config, ell } => secrecy(&load_config(config)?, *ell),
        Command::Lift { config, explicit } => lift(&load_config(config)?, *explicit),
        Command::Flowcheck {
            config,
            exhaustive,
            dump_graph,
        } => flowcheck(&load_config(config)?, *exhaustive, dump_graph.as_ref()),
        Command::Simulate {
            config,
            file_size,
            trials,
            rounds,
            seed,
            prime,
            adversarial,
        } => {
            let cfg = load_config(config)?;
            let field = FieldSpec::new(*prime)?;
            if *adversarial {
                simulate_adversarial(&cfg, *file_size, *seed, field)
            } else {
                let m = file_size.ok_or_else(|| {
                    CliError::Usage("--file-size is required unless --adversarial is given".into())
                })?;
                simulate_random(&cfg, m, *rounds, *trials, *seed, field)
            }
        }
    }
}

fn validate(cfg: &DssConfig) -> Result<Report, CliError> {
    let mut r = Report::new("validate", cfg);
    r.set("n", json!(cfg.n()));
    r.set("k", json!(cfg.k()));
    r.set("d", json!(cfg.d()));
    r.set("model", json!(cfg.bandwidth().kind()));
    r.set("alpha", Value::from(cfg.alpha().iter().map(rat).collect::<Vec<_>>()));
    r.set("valid", json!(true));
    r.row("(n, k, d)", format!("({}, {}, {})", cfg.n(), cfg.k(), cfg.d()));
    r.row("model", cfg.bandwidth().kind());
    r.row("alpha", cfg.alpha().iter().map(format).collect::<Vec<_>>().join(" "));
    r.row("valid", "yes");
    Ok(r)
}

fn bounds(cfg: &DssConfig, exact: bool) -> Result<Report, CliError> {
    let b = bounds_report(cfg, exact, Some(max_n_from_env()))?;
    let mut r = Report::new("bounds", cfg);
    r.set("average_upper_bound", rat(&b.avg_upper));
    r.set("general_bounds", json!({ "min": rat(&b.c_min), "max": rat(&b.c_max) }));
    r.row("average upper bound", approx(&b.avg_upper));
    r.row("general bounds", pair_approx(&b.c_min, &b.c_max));
    match &b.cprime {
        Some((lo, hi)) => {
            r.set("helper_only_bounds", json!({ "min": rat(lo), "max": rat(hi) }));
            r.row("helper-only bounds", pair_approx(lo, hi));
        }
        None => {
            r.set("helper_only_bounds", Value::Null);
            r.warn("helper-only bounds need a homogeneous or helper-only model");
        }
    }
    match &b.exact {
        Some(w) => {
            r.set("exact", witness(w));
            witness_rows(&mut r, w);
        }
        None => {
            r.set("exact", Value::Null);
            if exact {
                r.warn("exact capacity needs a homogeneous or helper-only model");
            }
        }
    }
    Ok(r)
}

fn capacity(cfg: &DssConfig) -> Result<Report, CliError> {
    let w = exact_capacity(cfg, Some(max_n_from_env()))?;
    let mut r = Report::new("capacity", cfg);
    r.results = witness(&w);
    witness_rows(&mut r, &w);
    Ok(r)
}

fn secrecy(cfg: &DssConfig, ell: usize) -> Result<Report, CliError> {
    let bound = secrecy_upper_bound(cfg, ell)?;
    let mut r = Report::new("secrecy", cfg);
    r.set("ell", json!(ell));
    r.set("secrecy_upper_bound", rat(&bound));
    r.row("eavesdropped nodes", ell.to_string());
    r.row("secrecy upper bound", approx(&bound));
    Ok(r)
}

fn lift(cfg: &DssConfig, explicit: bool) -> Result<Report, CliError> {
    let mode = if explicit { LiftMode::Explicit } else { LiftMode::Formula };
    let l = permutation_lift(cfg, mode)?;
    let mut r = Report::new("lift", cfg);
    r.set("mode", json!(if explicit { "explicit" } else { "formula" }));
    r.set("alpha_b", rat(&l.alpha_b));
    r.set("beta_b", rat(&l.beta_b));
    r.set("capacity_b", rat(&l.capacity_b));
    r.set("implied_bound", rat(&l.implied_bound));
    r.row("lifted storage", approx(&l.alpha_b));
    r.row("lifted repair bandwidth", approx(&l.beta_b));
    r.row("lifted capacity", approx(&l.capacity_b));
    r.row("implied bound", approx(&l.implied_bound));
    let limit = max_n_from_env();
    if cfg.helper_betas().is_some() && cfg.n() <= limit {
        let c = lift_bound_check(cfg, Some(limit))?;
        r.set(
            "check",
            json!({
                "exact": rat(&c.exact),
                "n_factorial": c.n_factorial.to_string(),
                "scaled_exact": rat(&c.scaled_exact),
                "lift_margin": rat(&c.lift_margin),
                "bound_margin": rat(&c.bound_margin),
            }),
        );
        r.row(
            "n! * capacity",
            format!("{} * {} = {}", c.n_factorial, format(&c.exact), approx(&c.scaled_exact)),
        );
        r.row("lift margin", approx(&c.lift_margin));
    } else {
        r.set("check", Value::Null);
        r.warn("lift check skipped: exact capacity unavailable for this config");
    }
    Ok(r)
}

fn flowcheck(cfg: &DssConfig, exhaustive: bool, dump: Option<&PathBuf>) -> Result<Report, CliError> {
    let w = exact_capacity(cfg, Some(max_n_from_env()))?;
    let mode = if exhaustive { OracleMode::Exhaustive } else { OracleMode::Chains };
    let oracle = oracle_capacity(cfg, mode)?;
    let schedule = chain_schedule(cfg, &w.tuple, &HelperChoice::Explicit(w.helper_sets.clone()))?;
    let graph = build_flow_graph(cfg, &schedule)?;
    let cut = max_flow_min_cut(&graph);
    if oracle != w.value || cut != w.value {
        return Err(Error::OracleMismatch(format!(
            "exact capacity {} but oracle {} and witness cut {}",
            w.value, oracle, cut
        ))
        .into());
    }
    if let Some(path) = dump {
        std::fs::write(path, graph.to_edge_list())
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    let mut r = Report::new("flowcheck", cfg);
    r.set("mode", json!(if exhaustive { "exhaustive" } else { "chains" }));
    r.set("exact", rat(&w.value));
    r.set("oracle", rat(&oracle));
    r.set("witness_tuple", nodes(&w.tuple));
    r.set("witness_cut", rat(&cut));
    r.set("witness_user_set", instances(&schedule.user_set));
    r.set(
        "graph",
        json!({ "vertices": graph.vertices.len(), "edges": graph.edges.len(), "scale": graph.scale.to_string() }),
    );
    r.set("agree", json!(true));
    r.row("exact capacity", approx(&w.value));
    r.row("min-cut oracle", approx(&oracle));
    r.row("witness tuple", nodes_text(&w.tuple));
    r.row("witness user set", instances_text(&schedule.user_set));
    r.row("witness cut", approx(&cut));
    r.row("graph size", format!("{} vertices, {} edges", graph.vertices.len(), graph.edges.len()));
    Ok(r)
}

fn simulate_random(
    cfg: &DssConfig,
    file_size: usize,
    rounds: usize,
    trials: usize,
    seed: u64,
    field: FieldSpec,
) -> Result<Report, CliError> {
    let t = run_random_trials(cfg, file_size, rounds, trials, seed, field)?;
    let mut r = Report::new("simulate", cfg);
    r.set("mode", json!("random"));
    r.set("seed", json!(t.seed));
    r.set("p", json!(t.p));
    r.set("file_size", json!(t.file_size));
    r.set("rounds", json!(t.rounds));
    r.set("trials", json!(t.trials));
    r.set("successes", json!(t.successes));
    r.set("success_fraction", rat(&t.success_fraction));
    r.set(
        "first_failure",
        match &t.first_failure {
            Some(f) => json!({ "trial": f.trial, "user_set": instances(&f.user_set), "rank": f.rank }),
            None => Value::Null,
        },
    );
    r.row("field prime", t.p.to_string());
    r.row("seed", t.seed.to_string());
    r.row("file size", t.file_size.to_string());
    r.row("trials x rounds", format!("{} x {}", t.trials, t.rounds));
    r.row(
        "decoded",
        format!("{}/{} ({:.3})", t.successes, t.trials, fraction_f64(&t.success_fraction)),
    );
    if let Some(f) = &t.first_failure {
        r.row(
            "first failure",
            format!("trial {}, users {}, rank {}", f.trial, instances_text(&f.user_set), f.rank),
        );
    }
    Ok(r)
}

fn simulate_adversarial(
    cfg: &DssConfig,
    file_size: Option<usize>,
    seed: u64,
    field: FieldSpec,
) -> Result<Report, CliError> {
    let a = adversarial_witness_trial(cfg, file_size, seed, field, Some(max_n_from_env()))?;
    if !a.bound_holds {
        return Err(Error::OracleMismatch(format!(
            "decoded rank {} exceeds the cut value {}",
            a.rank, a.cut_value
        ))
        .into());
    }
    let mut r = Report::new("simulate", cfg);
    r.set("mode", json!("adversarial"));
    r.set("seed", json!(a.seed));
    r.set("p", json!(a.p));
    r.set("file_size", json!(a.file_size));
    r.set("tuple", nodes(&a.tuple));
    r.set("user_set", instances(&a.user_set));
    r.set("cut_value", rat(&a.cut_value));
    r.set("rank", json!(a.rank));
    r.set("bound_holds", json!(a.bound_holds));
    r.row("field prime", a.p.to_string());
    r.row("seed", a.seed.to_string());
    r.row("file size", a.file_size.to_string());
    r.row("failure sequence", nodes_text(&a.tuple));
    r.row("user set", instances_text(&a.user_set));
    r.row("cut value", approx(&a.cut_value));
    r.row("decoded rank", a.rank.to_string());
    Ok(r)
}
