//! Command-line surface. Every subcommand reads/writes the formats in
//! [`crate::io`]; exit codes are 0 (success), 1 (validation failure),
//! 2 (usage error, from clap), 3 (I/O error).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ensemble::{
    chain_seed, pairwise_similarity_kinds, run_ensemble, summarize, EnsembleConfig, ScoreSummary,
    DEFAULT_BINS,
};
use crate::error::{Error, Result};
use crate::graph::{DualGraph, WeightKind};
use crate::io::{
    bind_plan, parse_graph_json, parse_manifest_json, parse_plan_csv, parse_scores_csv,
    sha256_hex, write_graph_json, write_manifest_json, write_plan_csv, write_scores_csv,
    write_summary_json, BoundPlan, PlanDigest, RunManifest,
};
use crate::plan::{validate_plan, Plan};
use crate::recom::{run_chain, seed_plan, ChainConfig};
use crate::similarity::{intersection_matrix, relabel_plan, similarity_scores, solve_assignment};
use crate::synth::{circle_state, grid_state, radial_plan, GridSpec, PopulationPattern};

#[derive(Parser)]
#[command(
    name = "plansim",
    version,
    about = "Districting-plan ensembles and relabeling-invariant similarity scores"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph, and optionally a plan, for structural problems.
    Validate(ValidateArgs),
    /// Write the deterministic recursive-merge seed plan.
    Seed(SeedArgs),
    /// Advance a plan through a recombination chain.
    Chain(ChainArgs),
    /// Run many chains in parallel; writes plan CSVs plus a replayable manifest.
    Ensemble(EnsembleArgs),
    /// Score two plans; prints JSON to stdout.
    Similarity(SimilarityArgs),
    /// Renumber a target plan to best match a reference plan.
    Relabel(RelabelArgs),
    /// Score every pair of plans in a directory.
    Pairwise(PairwiseArgs),
    /// Reduce a scores file to distribution statistics.
    Summarize(SummarizeArgs),
    /// Generate synthetic graphs and plans.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(short = 'm', long = "districts")]
    districts: u32,
    /// Accepted for interface symmetry; the seeding procedure is
    /// deterministic and ignores it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    seed: u64,
    /// Spanning trees drawn per step (the best cut wins).
    #[arg(long, default_value_t = 1)]
    trees: u32,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(short = 'm', long = "districts", required_unless_present = "from_manifest")]
    districts: Option<u32>,
    #[arg(short = 'n', long = "chains", required_unless_present = "from_manifest")]
    chains: Option<u32>,
    /// Recombination steps per chain; defaults to 50 per district.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, required_unless_present = "from_manifest")]
    seed: Option<u64>,
    /// Worker threads; never affects the output bytes.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Spanning trees drawn per step; more trees give tighter balance.
    #[arg(long, default_value_t = EnsembleConfig::DEFAULT_TREES_PER_STEP)]
    trees: u32,
    /// Replay a previous run from its manifest instead of fresh parameters.
    #[arg(
        long = "from-manifest",
        conflicts_with_all = ["districts", "chains", "steps", "seed", "trees"]
    )]
    from_manifest: Option<PathBuf>,
    /// Output directory for plan CSVs and manifest.json.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SimilarityArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "plan-a")]
    plan_a: PathBuf,
    #[arg(long = "plan-b")]
    plan_b: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Area)]
    kind: KindArg,
}

#[derive(Args)]
struct RelabelArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Weight kind for the matching.
    #[arg(long, value_enum, default_value_t = PlainKindArg::Area)]
    kind: PlainKindArg,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct PairwiseArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Directory whose *.csv files are the plans, taken in name order.
    #[arg(long)]
    plans: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Area)]
    kind: KindArg,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Rook-adjacency grid with uniform or corner-hotspot population.
    Grid(SynthGridArgs),
    /// Circle of equal wedges (cycle graph).
    Circle(SynthCircleArgs),
    /// Radial plan over a wedge circle.
    Radial(SynthRadialArgs),
}

#[derive(Args)]
struct SynthGridArgs {
    #[arg(long)]
    rows: u32,
    #[arg(long)]
    cols: u32,
    /// Uniform population per cell.
    #[arg(long, default_value_t = 1, conflicts_with = "hotspot_total")]
    pop_per_cell: u64,
    /// Switch to the corner-hotspot pattern with this total population.
    #[arg(long, requires = "hotspot_fraction", requires = "hotspot_block")]
    hotspot_total: Option<u64>,
    /// Fraction of the total living in the corner block.
    #[arg(long, requires = "hotspot_total")]
    hotspot_fraction: Option<f64>,
    /// Side length of the corner block.
    #[arg(long, requires = "hotspot_total")]
    hotspot_block: Option<u32>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SynthCircleArgs {
    #[arg(long)]
    wedges: u32,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct SynthRadialArgs {
    #[arg(long)]
    wedges: u32,
    #[arg(short = 'm', long = "districts")]
    districts: u32,
    #[arg(long, default_value_t = 0)]
    offset: u32,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Area,
    Population,
    Both,
}

impl KindArg {
    fn kinds(self) -> &'static [WeightKind] {
        match self {
            KindArg::Area => &[WeightKind::Area],
            KindArg::Population => &[WeightKind::Population],
            KindArg::Both => &[WeightKind::Area, WeightKind::Population],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlainKindArg {
    Area,
    Population,
}

impl From<PlainKindArg> for WeightKind {
    fn from(k: PlainKindArg) -> WeightKind {
        match k {
            PlainKindArg::Area => WeightKind::Area,
            PlainKindArg::Population => WeightKind::Population,
        }
    }
}

/// Parses argv and runs one subcommand, returning the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => 3,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Validate(args) => cmd_validate(args),
        Command::Seed(args) => cmd_seed(args),
        Command::Chain(args) => cmd_chain(args),
        Command::Ensemble(args) => cmd_ensemble(args),
        Command::Similarity(args) => cmd_similarity(args),
        Command::Relabel(args) => cmd_relabel(args),
        Command::Pairwise(args) => cmd_pairwise(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn annotate(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| annotate(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| annotate(path, e))
}

fn load_graph(path: &Path) -> Result<DualGraph> {
    parse_graph_json(&read_bytes(path)?)
}

fn load_bound_plan(graph: &DualGraph, path: &Path) -> Result<BoundPlan> {
    bind_plan(graph, &parse_plan_csv(&read_bytes(path)?)?)
}

fn require_valid(graph: &DualGraph, plan: &Plan) -> Result<()> {
    let violations = validate_plan(graph, plan);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidPlan { violations })
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    if let Some(plan_path) = &args.plan {
        let bound = load_bound_plan(&graph, plan_path)?;
        let violations = validate_plan(&graph, &bound.plan);
        for v in &violations {
            println!("{v}");
        }
        if !violations.is_empty() {
            return Ok(1);
        }
    }
    Ok(0)
}

fn cmd_seed(args: SeedArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    let plan = seed_plan(&graph, args.districts)?;
    write_text(&args.output, &write_plan_csv(&graph, &plan, None))?;
    Ok(0)
}

fn cmd_chain(args: ChainArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    let bound = load_bound_plan(&graph, &args.plan)?;
    let cfg = ChainConfig {
        steps: args.steps,
        rng_seed: args.seed,
        trees_per_step: args.trees,
    };
    let out = run_chain(&graph, bound.plan, &cfg)?;
    write_text(&args.output, &write_plan_csv(&graph, &out, Some(&bound.labels)))?;
    Ok(0)
}

fn plan_file_name(index: u32, num_chains: u32) -> String {
    let width = num_chains
        .saturating_sub(1)
        .to_string()
        .len()
        .max(3);
    format!("plan_{index:0width$}.csv")
}

fn cmd_ensemble(args: EnsembleArgs) -> Result<i32> {
    let graph_bytes = read_bytes(&args.graph)?;
    let graph = parse_graph_json(&graph_bytes)?;
    let graph_digest = sha256_hex(&graph_bytes);

    let replay = match &args.from_manifest {
        Some(path) => {
            let manifest = parse_manifest_json(&read_bytes(path)?)?;
            if manifest.graph_sha256 != graph_digest {
                return Err(Error::DigestMismatch {
                    expected: manifest.graph_sha256,
                    actual: graph_digest,
                });
            }
            Some(manifest)
        }
        None => None,
    };
    let cfg = match &replay {
        Some(m) => EnsembleConfig {
            num_chains: m.num_chains,
            districts: m.districts,
            steps_per_chain: m.steps_per_chain,
            base_seed: m.base_seed,
            parallelism: args.jobs,
            trees_per_step: m.trees_per_step,
        },
        None => {
            let districts = args.districts.expect("enforced by clap");
            EnsembleConfig {
                num_chains: args.chains.expect("enforced by clap"),
                districts,
                steps_per_chain: args
                    .steps
                    .unwrap_or_else(|| EnsembleConfig::default_steps(districts)),
                base_seed: args.seed.expect("enforced by clap"),
                parallelism: args.jobs,
                trees_per_step: args.trees,
            }
        }
    };

    let started = Instant::now();
    let plans = run_ensemble(&graph, &cfg)?;
    let wall_ms = started.elapsed().as_millis() as u64;

    std::fs::create_dir_all(&args.output).map_err(|e| annotate(&args.output, e))?;
    let mut digests = Vec::with_capacity(plans.len());
    for (i, plan) in plans.iter().enumerate() {
        let name = plan_file_name(i as u32, cfg.num_chains);
        let text = write_plan_csv(&graph, plan, None);
        write_text(&args.output.join(&name), &text)?;
        digests.push(PlanDigest {
            file: name,
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    if let Some(original) = &replay {
        if original.plans != digests {
            return Err(Error::DigestMismatch {
                expected: format!("{} plan digests from the manifest", original.plans.len()),
                actual: "replayed plans differ; the graph or tool changed".into(),
            });
        }
    }
    let manifest = RunManifest {
        tool: "plansim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        graph_sha256: graph_digest,
        districts: cfg.districts,
        num_chains: cfg.num_chains,
        steps_per_chain: cfg.steps_per_chain,
        base_seed: cfg.base_seed,
        trees_per_step: cfg.trees_per_step,
        parallelism: cfg.parallelism,
        chain_seeds: (0..cfg.num_chains)
            .map(|i| chain_seed(cfg.base_seed, i))
            .collect(),
        plans: digests,
        wall_ms,
    };
    write_text(&args.output.join("manifest.json"), &write_manifest_json(&manifest))?;
    Ok(0)
}

/// Rounds to 3 decimals for stdout; files always carry full precision.
fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn cmd_similarity(args: SimilarityArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    let a = load_bound_plan(&graph, &args.plan_a)?;
    let b = load_bound_plan(&graph, &args.plan_b)?;
    require_valid(&graph, &a.plan)?;
    require_valid(&graph, &b.plan)?;
    let kinds = args.kind.kinds();
    let scores = similarity_scores(&graph, &a.plan, &b.plan, kinds)?;
    let mut out = serde_json::Map::new();
    for score in scores {
        out.insert(
            score.kind.to_string(),
            serde_json::Value::from(round3(score.value)),
        );
    }
    println!("{}", serde_json::Value::Object(out));
    Ok(0)
}

/// Smallest nonnegative integers, as strings, not colliding with `taken`.
fn fresh_labels(taken: &[String], count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut next = 0u64;
    while out.len() < count {
        let candidate = next.to_string();
        if !taken.contains(&candidate) {
            out.push(candidate);
        }
        next += 1;
    }
    out
}

fn cmd_relabel(args: RelabelArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    let reference = load_bound_plan(&graph, &args.reference)?;
    let target = load_bound_plan(&graph, &args.target)?;
    require_valid(&graph, &reference.plan)?;
    require_valid(&graph, &target.plan)?;
    let kind = WeightKind::from(args.kind);

    let (relabeled, labels) = if reference.plan.num_districts <= target.plan.num_districts {
        // Reference districts are the rows; matched target districts take
        // the row label, the rest get fresh ones.
        let matrix = intersection_matrix(&graph, &reference.plan, &target.plan, kind)?;
        let assignment = solve_assignment(&matrix)?;
        let relabeled = relabel_plan(&target.plan, &assignment)?;
        let extra = (target.plan.num_districts - reference.plan.num_districts) as usize;
        let mut labels = reference.labels.clone();
        labels.extend(fresh_labels(&reference.labels, extra));
        (relabeled, labels)
    } else {
        // More reference districts than target ones: match with the target
        // on the row side, then read the mapping in the other direction.
        let matrix = intersection_matrix(&graph, &target.plan, &reference.plan, kind)?;
        let assignment = solve_assignment(&matrix)?;
        let relabeled = Plan {
            assignment: target
                .plan
                .assignment
                .iter()
                .map(|&d| assignment.mapping[d as usize])
                .collect(),
            num_districts: reference.plan.num_districts,
        };
        (relabeled, reference.labels.clone())
    };
    write_text(
        &args.output,
        &write_plan_csv(&graph, &relabeled, Some(&labels)),
    )?;
    Ok(0)
}

fn cmd_pairwise(args: PairwiseArgs) -> Result<i32> {
    let graph = load_graph(&args.graph)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.plans)
        .map_err(|e| annotate(&args.plans, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    let mut plans = Vec::with_capacity(files.len());
    for file in &files {
        let bound = load_bound_plan(&graph, file)?;
        require_valid(&graph, &bound.plan)?;
        plans.push(bound.plan);
    }
    let kinds = args.kind.kinds();
    // Keep this subcommand single-threaded; only `ensemble` takes --jobs.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidConfig {
            reason: format!("thread pool: {e}"),
        })?;
    let scores = pool.install(|| pairwise_similarity_kinds(&graph, &plans, kinds))?;
    write_text(&args.output, &write_scores_csv(&scores))?;
    Ok(0)
}

fn cmd_summarize(args: SummarizeArgs) -> Result<i32> {
    let groups = parse_scores_csv(&read_bytes(&args.scores)?)?;
    if groups.is_empty() {
        return Err(Error::EmptyScores);
    }
    let summaries: Vec<ScoreSummary> = groups
        .iter()
        .map(|g| summarize(g, args.bins))
        .collect::<Result<_>>()?;
    write_text(&args.output, &write_summary_json(&summaries))?;
    Ok(0)
}

fn cmd_synth(command: SynthCommand) -> Result<i32> {
    match command {
        SynthCommand::Grid(args) => {
            let population = match args.hotspot_total {
                Some(total) => PopulationPattern::CornerHotspot {
                    total,
                    fraction: args.hotspot_fraction.expect("enforced by clap"),
                    block: args.hotspot_block.expect("enforced by clap"),
                },
                None => PopulationPattern::Uniform {
                    per_cell: args.pop_per_cell,
                },
            };
            let graph = grid_state(&GridSpec {
                rows: args.rows,
                cols: args.cols,
                population,
            })?;
            write_text(&args.output, &write_graph_json(&graph))?;
        }
        SynthCommand::Circle(args) => {
            let graph = circle_state(args.wedges)?;
            write_text(&args.output, &write_graph_json(&graph))?;
        }
        SynthCommand::Radial(args) => {
            let graph = circle_state(args.wedges)?;
            let plan = radial_plan(args.wedges, args.districts, args.offset)?;
            write_text(&args.output, &write_plan_csv(&graph, &plan, None))?;
        }
    }
    Ok(0)
}
