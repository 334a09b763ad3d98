use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_bandit::admg::{parse_graph, write_graph, Admg, PomisFamily, VertexSet};
use causal_bandit::bandit::{run_two_phase_scaled, run_two_phase_with, TwoPhaseRun};
use causal_bandit::discovery::{compute_budgets, BudgetMode, Discovery, SimulatedEnvironment};
use causal_bandit::examples::{four_vertex_graph, xor_scm};
use causal_bandit::experiment::{
    derive_seed, generate_instance, run_armcount_experiment, run_regret_experiment,
    run_samples_experiment, ExperimentConfig,
};
use causal_bandit::pomis::{learn_pomis_structure_with, PairPolicy};
use causal_bandit::scm::{parse_scm, random_scm, write_scm, GapParams, Scm};
use causal_bandit::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cbw", version, about = "Causal bandit workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value experiment configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Published gap and confidence settings (slow)
    #[arg(long)]
    paper_scale: bool,
}

/// Where the SCM comes from. Without any of these a random instance is
/// generated from the configuration's first cell.
#[derive(Args)]
struct Model {
    /// SCM text file
    #[arg(long, conflicts_with_all = ["graph", "example"])]
    scm: Option<PathBuf>,
    /// Graph text file; a random SCM meeting the gaps is drawn over it
    #[arg(long, conflicts_with = "example")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    example: Option<Example>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Xor,
    FourVertex,
}

#[derive(Subcommand)]
enum Command {
    /// Random chordal ADMG with an SCM meeting the gaps
    GenGraph {
        #[command(flatten)]
        common: Common,
    },
    /// Learn the POMIS structure from samples
    Discover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        /// Test every confounder pair instead of the necessary ones
        #[arg(long)]
        all_pairs: bool,
        /// Also export every drawn sample
        #[arg(long)]
        audit: bool,
    },
    /// Discovery followed by UCB over the learned arms
    Bandit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        stride: Option<u64>,
        #[arg(long)]
        all_pairs: bool,
    },
    /// Sample counts of observable, full-latent and POMIS discovery
    ExpSamples {
        #[command(flatten)]
        common: Common,
    },
    /// POMIS arm counts against all interventions
    ExpArms {
        #[command(flatten)]
        common: Common,
    },
    /// Regret curves of POMIS-guided against full-latent discovery
    ExpRegret {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        stride: Option<u64>,
    },
}

enum Failure {
    Core(Error),
    Input(PathBuf, std::io::Error),
    Output(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Config(_) | Error::Parse { .. }) | Failure::Input(..) => 2,
            Failure::Core(Error::Capacity { .. }) => 3,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Input(p, e) => format!("cannot read {}: {e}", p.display()),
            Failure::Output(p, e) => format!("cannot write {}: {e}", p.display()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(path.to_path_buf(), e))
}

fn load_config(common: &Common, stride: Option<u64>) -> Outcome<ExperimentConfig> {
    let mut text = String::new();
    if common.paper_scale {
        text.push_str("paper_scale = true\n");
    }
    if let Some(path) = &common.config {
        text.push_str(&read(path)?);
    }
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &common.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(stride) = stride {
        cfg.stride = stride;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Outcome<Self> {
        fs::create_dir_all(dir).map_err(|e| Failure::Output(dir.to_path_buf(), e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Outcome<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::Output(path.clone(), e))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn gap_params(cfg: &ExperimentConfig) -> GapParams {
    GapParams {
        epsilon: cfg.discovery.epsilon,
        gamma: cfg.discovery.gamma,
        eta: cfg.discovery.eta,
        ..GapParams::default()
    }
}

fn load_model(model: &Model, cfg: &ExperimentConfig) -> Outcome<Scm> {
    if let Some(path) = &model.scm {
        return Ok(parse_scm(&read(path)?)?);
    }
    if let Some(path) = &model.graph {
        let g = parse_graph(&read(path)?)?;
        return Ok(random_scm(&g, &gap_params(cfg), cfg.seed)?);
    }
    match model.example {
        Some(Example::Xor) => Ok(xor_scm()),
        Some(Example::FourVertex) => Ok(random_scm(
            &four_vertex_graph(),
            &gap_params(cfg),
            cfg.seed,
        )?),
        None => {
            let mut log = Vec::new();
            let inst = generate_instance(cfg, cfg.cells()[0], cfg.seed, &mut log);
            report_log(&log);
            Ok(inst?.scm)
        }
    }
}

fn report_log(log: &[String]) {
    for line in log {
        eprintln!("resampled: {line}");
    }
}

fn set_label(g: &Admg, s: VertexSet) -> String {
    let names: Vec<&str> = s.iter().map(|v| g.name(v)).collect();
    format!("{{{}}}", names.join(" "))
}

fn graph_csv(g: &Admg) -> String {
    let mut out = String::from("kind,from,to\n");
    for v in 0..g.n() {
        let _ = writeln!(out, "node,{},{}", g.name(v), g.domain(v));
    }
    let _ = writeln!(out, "reward,{},", g.name(g.reward()));
    for (a, b) in g.directed_edges() {
        let _ = writeln!(out, "directed,{},{}", g.name(a), g.name(b));
    }
    for (a, b) in g.bidirected_edges() {
        let _ = writeln!(out, "bidirected,{},{}", g.name(a), g.name(b));
    }
    out
}

fn family_csv(g: &Admg, family: &PomisFamily) -> String {
    let mut out = String::from("pomis,size\n");
    for s in family {
        let _ = writeln!(out, "\"{}\",{}", set_label(g, *s), s.len());
    }
    out
}

fn pair_policy(all: bool) -> PairPolicy {
    if all {
        PairPolicy::All
    } else {
        PairPolicy::Necessary
    }
}

fn gen_graph(common: &Common) -> Outcome<()> {
    let cfg = load_config(common, None)?;
    let mut log = Vec::new();
    let inst = generate_instance(&cfg, cfg.cells()[0], cfg.seed, &mut log);
    report_log(&log);
    let inst = inst?;
    let out = Output::new(&cfg.out_dir)?;
    out.write("graph.csv", &graph_csv(inst.graph()))?;
    out.write("graph.txt", &write_graph(inst.graph()))?;
    out.write("scm.txt", &write_scm(&inst.scm))
}

fn discover(common: &Common, model: &Model, all_pairs: bool, audit: bool) -> Outcome<()> {
    let cfg = load_config(common, None)?;
    let scm = load_model(model, &cfg)?;
    let dc = cfg.discovery_for(scm.graph().max_directed_degree());
    let mut env = SimulatedEnvironment::new(scm.clone(), cfg.seed);
    let mut d = Discovery::new(&mut env, dc, derive_seed(cfg.seed, u64::MAX))?;
    if audit {
        d = d.retaining_raw();
    }
    let s = learn_pomis_structure_with(&mut d, pair_policy(all_pairs))?;
    let g = scm.graph();
    let out = Output::new(&cfg.out_dir)?;
    out.write("learned_graph.csv", &graph_csv(&s.graph))?;
    out.write("pomis.csv", &family_csv(&s.graph, &s.family))?;
    out.write("ledger.csv", &s.ledger.to_csv(g))?;
    out.write(
        "phase_samples.csv",
        &format!(
            "stage,samples\nancestry,{}\nobservable,{}\nlatent,{}\ntotal,{}\n",
            s.samples.ancestry,
            s.samples.observable,
            s.samples.latent,
            s.samples.total()
        ),
    )?;
    let closure = compute_budgets(&dc, BudgetMode::ClosureOnly, g.n());
    let pomis = compute_budgets(&dc, BudgetMode::Pomis, s.ancestors.len());
    out.write(
        "budget.txt",
        &format!("# closure\n{}# pomis\n{}", closure.report(), pomis.report()),
    )?;
    if audit {
        out.write("store.csv", &d.store().to_csv(g))?;
    }
    Ok(())
}

fn bandit(
    common: &Common,
    model: &Model,
    horizon: Option<u64>,
    stride: Option<u64>,
    all_pairs: bool,
) -> Outcome<()> {
    let cfg = load_config(common, stride)?;
    let scm = load_model(model, &cfg)?;
    let dc = cfg.discovery_for(scm.graph().max_directed_degree());
    let pairs = pair_policy(all_pairs);
    let run: TwoPhaseRun = match horizon.or(cfg.horizon) {
        Some(h) => run_two_phase_with(&scm, dc, h, cfg.seed, pairs)?,
        None => run_two_phase_scaled(&scm, dc, cfg.horizon_multiple, cfg.seed, pairs)?,
    };
    let g = scm.graph();
    let out = Output::new(&cfg.out_dir)?;
    out.write("regret.csv", &run.trace.to_csv(g, cfg.stride))?;
    let mut arms = String::from("arm_key,pulls,empirical_mean\n");
    for (arm, st) in run.arms.iter().zip(&run.stats) {
        let _ = writeln!(arms, "\"{}\",{},{}", arm.key(g), st.pulls, st.mean());
    }
    out.write("arms.csv", &arms)?;
    out.write(
        "pomis.csv",
        &family_csv(&run.structure.graph, &run.structure.family),
    )?;
    out.write("ledger.csv", &run.structure.ledger.to_csv(g))?;
    eprintln!(
        "phase one {} pulls, horizon {}, total regret {}, optimum {} at {}",
        run.phase_one_pulls(),
        run.trace.len(),
        run.trace.total_regret(),
        run.optimum.0,
        run.optimum.1.key(g)
    );
    Ok(())
}

fn exp_samples(common: &Common) -> Outcome<()> {
    let cfg = load_config(common, None)?;
    let report = run_samples_experiment(&cfg)?;
    report_log(&report.log);
    let out = Output::new(&cfg.out_dir)?;
    out.write("samples.csv", &report.to_csv())?;
    out.write("samples_summary.csv", &report.summary_csv())
}

fn exp_arms(common: &Common) -> Outcome<()> {
    let cfg = load_config(common, None)?;
    let report = run_armcount_experiment(&cfg)?;
    report_log(&report.log);
    Output::new(&cfg.out_dir)?.write("arms.csv", &report.to_csv())
}

fn exp_regret(common: &Common, horizon: Option<u64>, stride: Option<u64>) -> Outcome<()> {
    let cfg = load_config(common, stride)?;
    let report = run_regret_experiment(&cfg, horizon, cfg.stride)?;
    report_log(&report.log);
    let out = Output::new(&cfg.out_dir)?;
    out.write("regret.csv", &report.to_csv())?;
    out.write("regret_trials.csv", &report.trials_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenGraph { common } => gen_graph(common),
        Command::Discover {
            common,
            model,
            all_pairs,
            audit,
        } => discover(common, model, *all_pairs, *audit),
        Command::Bandit {
            common,
            model,
            horizon,
            stride,
            all_pairs,
        } => bandit(common, model, *horizon, *stride, *all_pairs),
        Command::ExpSamples { common } => exp_samples(common),
        Command::ExpArms { common } => exp_arms(common),
        Command::ExpRegret {
            common,
            horizon,
            stride,
        } => exp_regret(common, *horizon, *stride),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cbw: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
