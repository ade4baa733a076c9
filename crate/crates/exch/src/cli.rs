//! Command-line definitions and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use exch_core::array::{self, LatentSampler, SvdCheckReport};
use exch_core::exch::{self, ExtensionProblem};
use exch_core::rational;
use exch_core::stats::{self, SampleSet};
use exch_core::urn::{self, UrnSystem};
use exch_core::{Error, ErrorKind, FiniteDistribution, GroupAction, StateSpace, DEFAULT_MAX_STATES};
use serde_json::{json, Value};

use crate::format::{self, BlockJson, GroupJson, SpaceJson};

#[derive(Debug, Parser)]
#[command(name = "exch", version, about = "Exact finite-exchangeability bounds, extendibility LPs and invariance tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; required by randomized subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Enumeration cap in states.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: u64,
    /// Acknowledge a --max-states above the default.
    #[arg(long, global = true)]
    pub allow_large: bool,
    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// β(k, n) for one or more urns.
    Bounds(UrnArgs),
    /// With/without-replacement laws and their exact distance.
    Urntv(UrnArgs),
    /// Orbit table of a group action.
    Orbits(GroupArgs),
    /// Marginal projection, or orbit averaging when a group is given.
    Project(ProjectArgs),
    /// Compare a marginal with its empirical-mixture projection.
    DefinettiCheck(CheckArgs),
    /// Smallest distance to grid mixtures of i.i.d. laws.
    DefinettiGap(GapArgs),
    /// Exchangeable extendibility of a distribution.
    ExtendCheck(ExtendArgs),
    /// Monte Carlo check of row exchangeability of randomized SVD factors.
    SvdSim(SvdArgs),
    /// Bootstrap test of invariance under a group.
    TestExch(TestExchArgs),
    /// Bootstrap test of exchangeable extendibility.
    TestExtend(TestExtendArgs),
    /// The 2×2 array law with exchangeable off-diagonal pair that is not extendible.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct UrnArgs {
    /// Draws per urn.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    /// Urn sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum GroupKind {
    Sequence,
    JointRowCol,
    SeparateRowCol,
    BlockedSequences,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    #[arg(long, value_enum)]
    pub group: Option<GroupKind>,
    /// JSON group descriptor, instead of --group.
    #[arg(long, conflicts_with = "group")]
    pub group_file: Option<PathBuf>,
    /// Sequence length, or array rows.
    #[arg(long)]
    pub m: Option<usize>,
    /// Array columns for separate_row_col (defaults to --m).
    #[arg(long)]
    pub n: Option<usize>,
    /// Block lengths for blocked_sequences.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alphabet: Vec<i64>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Coordinates kept per block.
    #[arg(long, alias = "ks", value_delimiter = ',')]
    pub k: Vec<usize>,
    #[command(flatten)]
    pub group: GroupArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, alias = "ks", value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Grid points per coordinate, spacing 1/(grid − 1).
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Target block lengths.
    #[arg(long, alias = "ns", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Exch,
    Rowscaled,
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    /// Rows.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Columns (defaults to --m).
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, value_enum, default_value_t = SamplerKind::Exch)]
    pub sampler: SamplerKind,
    /// First-row multiplier of the rowscaled sampler.
    #[arg(long, default_value_t = 3.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n_draws: usize,
    /// Jointly (rather than separately) exchangeable sampler and check.
    #[arg(long)]
    pub joint: bool,
}

#[derive(Debug, Args)]
pub struct TestExchArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[command(flatten)]
    pub group: GroupArgs,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 999)]
    pub replicates: usize,
}

#[derive(Debug, Args)]
pub struct TestExtendArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Sample length per block.
    #[arg(long, alias = "ks", value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alphabet: Vec<i64>,
    #[arg(long, default_value_t = 6)]
    pub rmax: usize,
    #[arg(long = "B", default_value_t = 499)]
    pub replicates: usize,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::CapExceeded => 3,
                ErrorKind::Numeric => 4,
            },
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// A finished report plus a one-line human summary.
pub struct Output {
    pub report: Value,
    pub summary: String,
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_distribution(path: &Path) -> CliResult<FiniteDistribution> {
    Ok(format::parse_distribution(&read_json(path)?)?)
}

fn need_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("{command} is randomized and requires --seed")))
}

impl GroupArgs {
    fn given(&self) -> bool {
        self.group.is_some() || self.group_file.is_some()
    }

    /// Descriptor from flags; `fallback` supplies the alphabet when none is given.
    fn descriptor(&self, fallback: &[i64]) -> CliResult<GroupJson> {
        if let Some(path) = &self.group_file {
            return serde_json::from_value(read_json(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
        }
        let alphabet = if self.alphabet.is_empty() { fallback.to_vec() } else { self.alphabet.clone() };
        let m = || self.m.ok_or_else(|| CliError::Usage("--m is required for this group".into()));
        Ok(match self.group {
            Some(GroupKind::Sequence) => GroupJson::Sequence { m: m()?, alphabet },
            Some(GroupKind::JointRowCol) => GroupJson::JointRowCol { m: m()?, alphabet },
            Some(GroupKind::SeparateRowCol) => {
                let m = m()?;
                GroupJson::SeparateRowCol { m, n: self.n.unwrap_or(m), alphabet }
            }
            Some(GroupKind::BlockedSequences) => {
                if self.blocks.is_empty() {
                    return Err(CliError::Usage("--blocks is required for blocked_sequences".into()));
                }
                GroupJson::BlockedSequences {
                    blocks: self.blocks.iter().map(|&length| BlockJson { length, alphabet: alphabet.clone() }).collect(),
                }
            }
            None => return Err(CliError::Usage("--group or --group-file is required".into())),
        })
    }
}

pub fn cap(cli: &Cli) -> CliResult<u64> {
    if cli.max_states > DEFAULT_MAX_STATES && !cli.allow_large {
        return Err(CliError::Usage(format!(
            "--max-states {} exceeds the default {DEFAULT_MAX_STATES}; pass --allow-large to confirm",
            cli.max_states
        )));
    }
    Ok(cli.max_states)
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    let cap = cap(cli)?;
    match &cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Urntv(a) => urntv(a, cap),
        Command::Orbits(a) => orbits(a, cap),
        Command::Project(a) => project(a, cap),
        Command::DefinettiCheck(a) => definetti_check(a, cap),
        Command::DefinettiGap(a) => definetti_gap(a, cap),
        Command::ExtendCheck(a) => extend_check(a, cap),
        Command::SvdSim(a) => svd_sim(a, need_seed(cli.seed, "svd-sim")?),
        Command::TestExch(a) => test_exch(a, need_seed(cli.seed, "test-exch")?),
        Command::TestExtend(a) => test_extend(a, need_seed(cli.seed, "test-extend")?, cap),
        Command::Counterexample => counterexample(cap),
    }
}

fn bounds(a: &UrnArgs) -> CliResult<Output> {
    let beta = urn::beta_bound(&a.ks, &a.ns)?;
    let rate = urn::rate_bound(&a.ks, &a.ns)?;
    let summary = format!("beta = {}", rational::format(&beta));
    let report = json!({
        "ks": a.ks,
        "ns": a.ns,
        "beta": rational::format(&beta),
        "decimal": rational::to_f64(&beta),
        "rate_bound": rational::format(&rate),
    });
    Ok(Output { report, summary })
}

fn law_summary(p: &FiniteDistribution) -> Value {
    let masses: std::collections::BTreeSet<_> = p.mass().values().collect();
    let uniform = if masses.len() == 1 { masses.iter().next().map(|m| format::ratio_json(m)) } else { None };
    json!({ "support": p.support_len(), "uniform_mass": uniform })
}

fn urntv(a: &UrnArgs, cap: u64) -> CliResult<Output> {
    let urns = UrnSystem::new(a.ns.clone(), a.ks.clone())?;
    let m = urn::without_replacement_dist(&urns, cap)?;
    let q = urn::with_replacement_dist(&urns, cap)?;
    let tv = exch_core::tv_sup(&m, &q)?;
    let beta = urn::beta_bound(&a.ks, &a.ns)?;
    let summary = format!("tv = {} (beta = {})", rational::format(&tv), rational::format(&beta));
    let report = json!({
        "ks": a.ks,
        "ns": a.ns,
        "space": SpaceJson::from_space(&urns.space()),
        "without_replacement": law_summary(&m),
        "with_replacement": law_summary(&q),
        "tv": rational::format(&tv),
        "decimal": rational::to_f64(&tv),
        "beta": rational::format(&beta),
        "equals_beta": tv == beta,
    });
    Ok(Output { report, summary })
}

fn orbits(a: &GroupArgs, cap: u64) -> CliResult<Output> {
    let g = a.descriptor(&[0, 1])?;
    let action = g.to_action()?;
    let table = action.orbits(cap)?;
    let order = action.order();
    let burnside = match order {
        Some(o) if o <= cap as u128 => Some(action.burnside_orbit_count(cap as u128)?),
        _ => None,
    };
    let summary = format!("{} orbits", table.len());
    let report = json!({
        "group": g,
        "space": SpaceJson::from_space(action.space()),
        "order": order.map(|o| o.to_string()),
        "orbit_count": table.len(),
        "burnside_count": burnside.map(|b| b.to_string()),
        "orbits": format::orbits_json(&table)?,
    });
    Ok(Output { report, summary })
}

fn project(a: &ProjectArgs, _cap: u64) -> CliResult<Output> {
    let p = load_distribution(&a.dist)?;
    if a.group.given() {
        if !a.k.is_empty() {
            return Err(CliError::Usage("give either --k or a group, not both".into()));
        }
        let g = a.group.descriptor(p.space().alphabet_of(0).symbols())?;
        let action = g.to_action()?;
        let q = action.reynolds(&p)?;
        let report = json!({
            "group": g,
            "source_invariant": action.is_invariant(&p)?,
            "distribution": format::distribution_json(&q),
        });
        return Ok(Output { report, summary: format!("orbit average on {} states", q.support_len()) });
    }
    if a.k.is_empty() {
        return Err(CliError::Usage("project needs --k or a group".into()));
    }
    let marginal = exch::blocked_marginal(&p, &a.k)?;
    let mut report = json!({
        "ks": a.k,
        "source_exchangeable": marginal.source_exchangeable,
        "distribution": format::distribution_json(&marginal.distribution),
    });
    if !marginal.source_exchangeable {
        report["warning"] = json!("source is not exchangeable; the projection depends on which coordinates are kept");
    }
    Ok(Output { report, summary: format!("marginal on {} states", marginal.distribution.support_len()) })
}

fn definetti_check(a: &CheckArgs, cap: u64) -> CliResult<Output> {
    let p = load_distribution(&a.dist)?;
    let r = exch::check_definetti_bound(&p, &a.k, cap)?;
    let summary = format!(
        "tv = {} {} bound {}",
        rational::format(&r.tv),
        if r.holds { "<=" } else { ">" },
        rational::format(&r.bound)
    );
    let report = json!({
        "ks": a.k,
        "tv": rational::format(&r.tv),
        "tv_decimal": rational::to_f64(&r.tv),
        "bound": rational::format(&r.bound),
        "bound_decimal": rational::to_f64(&r.bound),
        "holds": r.holds,
        "mixing": format::mixing_json(&r.mixing),
    });
    Ok(Output { report, summary })
}

fn definetti_gap(a: &GapArgs, cap: u64) -> CliResult<Output> {
    let p = load_distribution(&a.dist)?;
    let r = exch::definetti_gap(&p, a.grid, cap)?;
    let summary = format!("gap = {} on a {}-point grid", rational::format(&r.gap), r.grid_points);
    let report = json!({
        "grid_points": r.grid_points,
        "gap": rational::format(&r.gap),
        "decimal": rational::to_f64(&r.gap),
        "mixing": format::mixing_json(&r.mixing),
    });
    Ok(Output { report, summary })
}

fn extend_check(a: &ExtendArgs, cap: u64) -> CliResult<Output> {
    let p = load_distribution(&a.dist)?;
    let problem = ExtensionProblem::new(p.space(), &a.n, cap)?;
    let witness = problem.solve(&p)?;
    let summary = if witness.is_some() { "extendible".into() } else { "not extendible".into() };
    let report = json!({
        "ns": a.n,
        "extension_space": SpaceJson::from_space(problem.extension_space()),
        "feasible": witness.is_some(),
        "witness": witness.as_ref().map(format::distribution_json),
    });
    Ok(Output { report, summary })
}

fn svd_report(r: &SvdCheckReport, sampler: SamplerKind, seed: u64) -> Value {
    json!({
        "sampler": match sampler { SamplerKind::Exch => "exch", SamplerKind::Rowscaled => "rowscaled" },
        "joint": r.joint,
        "rows": r.rows,
        "cols": r.cols,
        "seed": seed,
        "draws": r.draws,
        "accepted": r.accepted,
        "degenerate": r.degenerate,
        "row_groups": r.row_groups,
        "max_abs_z": r.max_abs_z,
        "moments": r.moments.iter().map(|m| json!({
            "row": m.row, "column": m.column, "mean": m.mean, "mean_abs": m.mean_abs, "mean_square": m.mean_square,
        })).collect::<Vec<_>>(),
        "comparisons": r.comparisons.iter().map(|c| json!({
            "statistic": c.statistic.name(),
            "column": c.column,
            "rows": [c.row_a, c.row_b],
            "mean_difference": c.mean_difference,
            "std_error": c.std_error,
            "z": c.z,
        })).collect::<Vec<_>>(),
    })
}

fn svd_sim(a: &SvdArgs, seed: u64) -> CliResult<Output> {
    let cols = a.cols.unwrap_or(a.m);
    let sampler = match a.sampler {
        SamplerKind::Exch => LatentSampler::exchangeable(a.m, cols, a.joint)?,
        SamplerKind::Rowscaled => LatentSampler::row_scaled(a.m, cols, a.joint, a.scale)?,
    };
    let r = array::svd_equivalence_check(&sampler, a.joint, a.n_draws, seed)?;
    Ok(Output { report: svd_report(&r, a.sampler, seed), summary: r.summary() })
}

fn sample_space(file: &format::SampleFile, declared: Option<StateSpace>) -> CliResult<StateSpace> {
    match (&file.space, declared) {
        (Some(s), Some(d)) if *s != d => {
            Err(CliError::Usage(format!("sample file space {s} does not match the requested space {d}")))
        }
        (Some(s), _) => Ok(s.clone()),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::Usage("cannot determine the sample space".into())),
    }
}

fn test_exch(a: &TestExchArgs, seed: u64) -> CliResult<Output> {
    let file = format::parse_sample_file(&read_json(&a.samples)?)?;
    let (space, action) = if a.group.given() {
        let symbols = format::observed_symbols(&file.states)?;
        let g = a.group.descriptor(&symbols)?;
        let action = g.to_action()?;
        (sample_space(&file, Some(action.space().clone()))?, Some((g, action)))
    } else {
        (sample_space(&file, None)?, None)
    };
    let (g, action) = match action {
        Some(pair) => pair,
        None => {
            let action = GroupAction::coordinate_permutations(&space)?;
            (GroupJson::from_action(&action), action)
        }
    };
    let samples = format::samples_on(&space, &file.states)?;
    let r = stats::exch_test(&samples, &action, a.replicates, seed)?;
    let summary = format!("T = {}, p = {}", rational::format(&r.statistic), rational::format(&r.p_value));
    let mut report = format::test_report_json(&r);
    report["test"] = json!("invariance");
    report["group"] = serde_json::to_value(g).expect("group serializes");
    report["samples"] = json!(samples.len());
    Ok(Output { report, summary })
}

fn test_extend(a: &TestExtendArgs, seed: u64, cap: u64) -> CliResult<Output> {
    let file = format::parse_sample_file(&read_json(&a.samples)?)?;
    let declared = if a.k.is_empty() {
        None
    } else {
        let alphabet = if a.alphabet.is_empty() { format::observed_symbols(&file.states)? } else { a.alphabet.clone() };
        let space = if a.k.len() == 1 {
            SpaceJson::Sequence { length: a.k[0], alphabet }
        } else {
            SpaceJson::Blocked { blocks: a.k.iter().map(|&length| BlockJson { length, alphabet: alphabet.clone() }).collect() }
        };
        Some(space.to_space()?)
    };
    let space = sample_space(&file, declared)?;
    let samples: SampleSet = format::samples_on(&space, &file.states)?;
    let r = stats::extendibility_test(&samples, a.rmax, a.replicates, seed, cap)?;
    let summary = format!("T = {}, p = {}", rational::format(&r.statistic), rational::format(&r.p_value));
    let mut report = format::test_report_json(&r);
    report["test"] = json!("extendibility");
    report["space"] = serde_json::to_value(SpaceJson::from_space(&space)).expect("space serializes");
    report["rmax"] = json!(a.rmax);
    report["samples"] = json!(samples.len());
    Ok(Output { report, summary })
}

fn counterexample(cap: u64) -> CliResult<Output> {
    let p = array::intro_counterexample();
    let joint = GroupAction::joint_row_col(2, exch_core::Alphabet::binary());
    let separate = GroupAction::separate_row_col(2, 2, exch_core::Alphabet::binary());
    let pair = array::off_diagonal_pair(&p)?;
    let cell = |c: usize| -> CliResult<String> {
        let m = array::cell_projection(&p, &[c])?;
        Ok(rational::format(&m.prob(1)))
    };
    let extension = exch::extendibility_lp(&pair, &[3], cap)?;
    let report = json!({
        "distribution": format::distribution_json(&p),
        "jointly_exchangeable": joint.is_invariant(&p)?,
        "separately_exchangeable": separate.is_invariant(&p)?,
        "p_x12_eq_1": cell(1)?,
        "p_x21_eq_1": cell(2)?,
        "off_diagonal_pair": format::distribution_json(&pair),
        "pair_exchangeable": exch::is_exchangeable(&pair)?,
        "pair_extendible_to_3": extension.feasible,
    });
    let summary = format!(
        "jointly exchangeable: {}; pair extends to length 3: {}",
        report["jointly_exchangeable"], extension.feasible
    );
    Ok(Output { report, summary })
}
