//! Command-line front end used by the `fms` binary.
//!
//! Exit codes: 0 success, 1 schedule violations, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::bench::{
    dynamic_scenario, export_gantt, lookahead_ablation, masking_ablation, parse_gantt, reward_shaping_ablation, run,
    train_on, validate, RunOutcome, SolverSpec,
};
use crate::env::{EnvConfig, RewardMode};
use crate::instance::{
    benchmark_group, generate_instance, parse_group, parse_instance, partition_instance, write_instance, Instance,
    SeedSet, BENCHMARK_AGVS, BENCHMARK_TOOL_TRANSPORTERS,
};
use crate::solvers::ppo::{Checkpoint, PpoConfig};
use crate::solvers::{AgvRule, BruteForceLimits, HeuristicPolicy, JobRule, SosConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming the default data directory.
pub const DATA_DIR_VAR: &str = "FMS_DATA_DIR";

#[derive(Parser, Debug)]
#[command(name = "fms", version, about = "Petri net FMS scheduling: generate, solve, validate")]
struct Cli {
    /// TOML file with optional [env], [sos] and [ppo] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for instances and outputs.
    #[arg(long, global = true, env = DATA_DIR_VAR, default_value = "data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate benchmark groups or a custom instance.
    Gen(GenArgs),
    /// Solve an instance and print a report.
    Run(RunArgs),
    /// Train a PPO policy and save a checkpoint.
    Train(TrainArgs),
    /// Check a Gantt trace against an instance.
    Validate(ValidateArgs),
    /// Solve an instance and print the Gantt trace.
    Gantt(RunArgs),
    /// Feed an instance in sequential partitions to several solvers.
    Dynamic(DynamicArgs),
    /// Run one ablation.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Benchmark group, e.g. `sl4`; repeatable.
    #[arg(long)]
    group: Vec<String>,
    /// All eight benchmark groups.
    #[arg(long)]
    all: bool,
    /// Custom size `JOBSxMACHINESxTOOLS`.
    #[arg(long)]
    size: Option<String>,
    /// Output directory; defaults to the data directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct EnvArgs {
    /// Instance file, or a benchmark name such as `sl42`.
    #[arg(long)]
    instance: String,
    /// Model tool transport.
    #[arg(long)]
    tools: bool,
    #[arg(long)]
    lookahead: bool,
    #[arg(long)]
    agvs: Option<usize>,
    #[arg(long)]
    tool_transporters: Option<usize>,
    /// Pad into a `JOBSxMACHINES` layout.
    #[arg(long)]
    shell: Option<String>,
    #[arg(long, value_enum)]
    reward: Option<RewardArg>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RewardArg {
    Idle,
    Sparse,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// `heuristic`, `random`, `sos`, `ppo` or `brute`.
    #[arg(long, default_value = "heuristic")]
    solver: String,
    /// Job rule for the heuristic solver.
    #[arg(long, default_value = "FIFO")]
    job_rule: String,
    /// AGV rule for the heuristic solver.
    #[arg(long, default_value = "first")]
    agv_rule: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// SOS wall-clock budget in seconds.
    #[arg(long)]
    sos_time: Option<f64>,
    /// SOS evaluation budget; reproducible across machines.
    #[arg(long)]
    sos_evals: Option<u64>,
    /// Checkpoint for the PPO solver.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Sample from the policy instead of taking the argmax.
    #[arg(long)]
    stochastic: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also write the Gantt trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// More training instances; episodes draw uniformly from all of them.
    #[arg(long)]
    extra: Vec<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    instance: String,
    /// Gantt CSV to check.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    tools: bool,
}

#[derive(Args, Debug)]
struct DynamicArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 10)]
    partitions: usize,
    /// SOS budget per partition, seconds.
    #[arg(long, default_value_t = 60.0)]
    sos_time: f64,
    /// Trained general policy; its checkpoint's shell is reused.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "FIFO")]
    job_rule: String,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[arg(value_enum)]
    component: Component,
    /// Instances to evaluate on (benchmark names or files).
    #[arg(long, required = true)]
    instance: Vec<String>,
    /// Training instances for reward shaping; defaults to the evaluation set.
    #[arg(long)]
    train: Vec<String>,
    #[arg(long)]
    tools: bool,
    #[arg(long)]
    agvs: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value = "FIFO")]
    job_rule: String,
    #[arg(long, default_value = "first")]
    agv_rule: String,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Component {
    Lookahead,
    Reward,
    Masking,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    env: Option<EnvConfig>,
    sos: Option<SosConfig>,
    ppo: Option<PpoConfig>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

macro_rules! usage {
    ($($t:tt)*) => { Failure::usage(format!($($t)*)) };
}

fn err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::usage(e.to_string())
}

/// Parse `args` (including the program name) and execute. Output goes to
/// `out`; diagnostics to standard error.
pub fn run_cli<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("fms: {}", f.message);
            f.code
        }
    }
}

struct Ctx {
    data_dir: PathBuf,
    file: FileConfig,
}

fn dispatch(cli: Cli, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let file = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage!("{}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| usage!("{}: {e}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        data_dir: cli.data_dir,
        file,
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a, out),
        Command::Run(a) => cmd_run(&ctx, a, out, false),
        Command::Gantt(a) => cmd_run(&ctx, a, out, true),
        Command::Train(a) => cmd_train(&ctx, a, out),
        Command::Validate(a) => cmd_validate(&ctx, a, out),
        Command::Dynamic(a) => cmd_dynamic(&ctx, a, out),
        Command::Ablate(a) => cmd_ablate(&ctx, a, out),
    }
}

fn write_out(out: &mut dyn std::io::Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(err)
}

fn parse_size(s: &str, parts: usize) -> Result<Vec<usize>, Failure> {
    let v: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage!("malformed size {s:?}"))?;
    if v.len() != parts {
        return Err(usage!("size {s:?} needs {parts} fields"));
    }
    Ok(v)
}

/// Benchmark name (`sl42`), a path, or a file name inside the data directory.
fn load_instance(ctx: &Ctx, spec: &str) -> Result<Instance, Failure> {
    let direct = Path::new(spec);
    let in_dir = ctx.data_dir.join(spec);
    let in_dir_txt = ctx.data_dir.join(format!("{spec}.txt"));
    for p in [direct, in_dir.as_path(), in_dir_txt.as_path()] {
        if p.is_file() {
            let text = fs::read_to_string(p).map_err(|e| usage!("{}: {e}", p.display()))?;
            return parse_instance(&text).map_err(|e| usage!("{}: {e}", p.display()));
        }
    }
    if let Some(rest) = spec.strip_prefix("sl") {
        if rest.len() == 2 && rest.chars().all(|c| c.is_ascii_digit()) {
            let (g, k) = (rest[..1].parse::<usize>().unwrap(), rest[1..].parse::<usize>().unwrap());
            let group = benchmark_group(g).map_err(err)?;
            return Ok(group[k].clone());
        }
    }
    Err(usage!("no instance {spec:?} (looked in {})", ctx.data_dir.display()))
}

fn env_config(ctx: &Ctx, a: &EnvArgs) -> Result<EnvConfig, Failure> {
    let mut cfg = ctx.file.env.clone().unwrap_or_default();
    cfg.tools |= a.tools;
    cfg.lookahead |= a.lookahead;
    if a.agvs.is_some() {
        cfg.n_agvs = a.agvs;
    }
    if a.tool_transporters.is_some() {
        cfg.n_tool_transporters = a.tool_transporters;
    }
    if let Some(s) = &a.shell {
        let v = parse_size(s, 2)?;
        cfg.shell = Some((v[0], v[1]));
    }
    match a.reward {
        Some(RewardArg::Idle) => cfg.reward_mode = RewardMode::IdlePenalty,
        Some(RewardArg::Sparse) => cfg.reward_mode = RewardMode::SparseMakespan,
        None => {}
    }
    Ok(cfg)
}

fn sos_config(ctx: &Ctx, time: Option<f64>, evals: Option<u64>, seed: u64) -> SosConfig {
    let mut c = ctx.file.sos.clone().unwrap_or_default();
    c.rng_seed = seed;
    if evals.is_some() {
        c.max_evaluations = evals;
        c.time_budget_s = time;
    } else if time.is_some() {
        c.time_budget_s = time;
    }
    c
}

fn heuristic(job: &str, agv: &str) -> Result<HeuristicPolicy, Failure> {
    Ok(HeuristicPolicy::new(
        job.parse::<JobRule>().map_err(Failure::usage)?,
        agv.parse::<AgvRule>().map_err(Failure::usage)?,
    ))
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint, Failure> {
    Checkpoint::load(path).map_err(|e| usage!("{}: {e}", path.display()))
}

fn solver_spec(ctx: &Ctx, a: &SolverArgs, cfg: &mut EnvConfig) -> Result<SolverSpec, Failure> {
    Ok(match a.solver.as_str() {
        "heuristic" => SolverSpec::Heuristic(heuristic(&a.job_rule, &a.agv_rule)?),
        "random" => SolverSpec::Random { seed: a.seed },
        "sos" => SolverSpec::Sos(sos_config(ctx, a.sos_time, a.sos_evals, a.seed)),
        "brute" | "brute_force" => SolverSpec::BruteForce(BruteForceLimits::default()),
        "ppo" => {
            let path = a.model.as_ref().ok_or_else(|| usage!("--solver ppo needs --model"))?;
            let ck = load_checkpoint(path)?;
            if cfg.shell.is_none() {
                cfg.shell = ck.env.shell;
            }
            SolverSpec::Ppo {
                model: Arc::new(ck.model),
                deterministic: !a.stochastic,
                seed: a.seed,
            }
        }
        other => return Err(usage!("unknown solver {other:?}")),
    })
}

fn report_code(outcome: &RunOutcome) -> i32 {
    for v in &outcome.violations {
        eprintln!("violation: {v}");
    }
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    }
}

fn cmd_gen(ctx: &Ctx, a: GenArgs, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let dir = a.out.clone().unwrap_or_else(|| ctx.data_dir.clone());
    let mut instances = Vec::new();
    if let Some(s) = &a.size {
        let v = parse_size(s, 3)?;
        let mut inst = generate_instance(v[0], v[1], v[2], &SeedSet::BENCHMARK).map_err(err)?;
        inst.n_agvs = BENCHMARK_AGVS;
        inst.n_tool_transporters = BENCHMARK_TOOL_TRANSPORTERS;
        instances.push(inst);
    }
    let groups: Vec<usize> = if a.all {
        (0..crate::instance::BENCHMARK_GROUPS.len()).collect()
    } else {
        a.group.iter().map(|g| parse_group(g)).collect::<Result<_, _>>().map_err(err)?
    };
    for g in groups {
        instances.extend(benchmark_group(g).map_err(err)?);
    }
    if instances.is_empty() {
        return Err(usage!("nothing to generate; pass --group, --all or --size"));
    }
    fs::create_dir_all(&dir).map_err(|e| usage!("{}: {e}", dir.display()))?;
    for inst in &instances {
        let path = dir.join(format!("{}.txt", inst.name));
        fs::write(&path, write_instance(inst)).map_err(|e| usage!("{}: {e}", path.display()))?;
        write_out(out, &format!("{}\n", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_run(ctx: &Ctx, a: RunArgs, out: &mut dyn std::io::Write, gantt: bool) -> Result<i32, Failure> {
    let inst = load_instance(ctx, &a.env.instance)?;
    let mut cfg = env_config(ctx, &a.env)?;
    let spec = solver_spec(ctx, &a.solver, &mut cfg)?;
    let outcome = run(&inst, &spec, &cfg).map_err(err)?;
    if let Some(p) = &a.trace {
        fs::write(p, export_gantt(&outcome.trace)).map_err(|e| usage!("{}: {e}", p.display()))?;
    }
    if gantt {
        write_out(out, &export_gantt(&outcome.trace))?;
    } else {
        let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
        write_out(out, &format!("{text}\n"))?;
    }
    Ok(report_code(&outcome))
}

fn ppo_config(ctx: &Ctx, steps: Option<u64>, seed: Option<u64>) -> PpoConfig {
    let mut c = ctx.file.ppo.clone().unwrap_or_default();
    if let Some(s) = steps {
        c.total_steps = s;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    c
}

fn cmd_train(ctx: &Ctx, a: TrainArgs, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let mut instances = vec![load_instance(ctx, &a.env.instance)?];
    for e in &a.extra {
        instances.push(load_instance(ctx, e)?);
    }
    let cfg = env_config(ctx, &a.env)?;
    let ppo = ppo_config(ctx, a.steps, a.seed);
    let (model, log) = train_on(&instances, &cfg, &ppo).map_err(err)?;
    let ck = Checkpoint::new(model, ppo, cfg);
    ck.save(&a.out).map_err(|e| usage!("{}: {e}", a.out.display()))?;
    let deciles = crate::solvers::ppo::decile_means(&log.episode_rewards);
    let summary = json!({
        "checkpoint": a.out.display().to_string(),
        "steps": log.steps,
        "episodes": log.episode_rewards.len(),
        "reward_first_decile": deciles.map(|d| d.0),
        "reward_last_decile": deciles.map(|d| d.1),
        "metrics": log.updates.last(),
    });
    write_out(out, &format!("{}\n", serde_json::to_string_pretty(&summary).expect("json")))?;
    Ok(EXIT_OK)
}

fn cmd_validate(ctx: &Ctx, a: ValidateArgs, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let inst = load_instance(ctx, &a.instance)?;
    let text = fs::read_to_string(&a.trace).map_err(|e| usage!("{}: {e}", a.trace.display()))?;
    let trace = parse_gantt(&text).map_err(|e| usage!("{}: {e}", a.trace.display()))?;
    match validate(&trace, &inst, a.tools) {
        Ok(makespan) => {
            write_out(out, &format!("ok makespan {makespan}\n"))?;
            Ok(EXIT_OK)
        }
        Err(violations) => {
            for v in &violations {
                write_out(out, &format!("{v}\n"))?;
            }
            Ok(EXIT_VIOLATIONS)
        }
    }
}

fn cmd_dynamic(ctx: &Ctx, a: DynamicArgs, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let inst = load_instance(ctx, &a.env.instance)?;
    let parts = partition_instance(&inst, a.partitions).map_err(err)?;
    let cfg = env_config(ctx, &a.env)?;
    let mut solvers = vec![(
        SolverSpec::Sos(sos_config(ctx, Some(a.sos_time), None, 0)),
        cfg.clone(),
    )];
    match &a.model {
        Some(p) => {
            let ck = load_checkpoint(p)?;
            let rl_cfg = EnvConfig {
                shell: cfg.shell.or(ck.env.shell),
                ..cfg.clone()
            };
            solvers.push((
                SolverSpec::Ppo {
                    model: Arc::new(ck.model),
                    deterministic: true,
                    seed: 0,
                },
                rl_cfg,
            ));
        }
        None => solvers.push((SolverSpec::Heuristic(heuristic(&a.job_rule, "first")?), cfg.clone())),
    }
    let report = dynamic_scenario(&parts, &solvers).map_err(err)?;
    let text = serde_json::to_string_pretty(&json!({
        "report": report,
        "crossover": report.crossover(1, 0),
    }))
    .expect("json");
    write_out(out, &format!("{text}\n"))?;
    Ok(EXIT_OK)
}

fn cmd_ablate(ctx: &Ctx, a: AblateArgs, out: &mut dyn std::io::Write) -> Result<i32, Failure> {
    let eval: Vec<Instance> = a.instance.iter().map(|s| load_instance(ctx, s)).collect::<Result<_, _>>()?;
    let mut cfg = ctx.file.env.clone().unwrap_or_default();
    cfg.tools |= a.tools;
    if a.agvs.is_some() {
        cfg.n_agvs = a.agvs;
    }
    let ppo = ppo_config(ctx, a.steps, None);
    let value = match a.component {
        Component::Lookahead => {
            let spec = SolverSpec::Heuristic(heuristic(&a.job_rule, &a.agv_rule)?);
            let t = lookahead_ablation(&eval, &spec, &cfg).map_err(err)?;
            json!({"table": t, "mean_with": t.mean_with(), "mean_without": t.mean_without()})
        }
        Component::Reward => {
            let train: Vec<Instance> = if a.train.is_empty() {
                eval.clone()
            } else {
                a.train.iter().map(|s| load_instance(ctx, s)).collect::<Result<_, _>>()?
            };
            let r = reward_shaping_ablation(&train, &eval, &cfg, &ppo).map_err(err)?;
            json!({"table": r.table, "mean_with": r.table.mean_with(), "mean_without": r.table.mean_without()})
        }
        Component::Masking => {
            let m = masking_ablation(&eval[0], &cfg, &ppo).map_err(err)?;
            json!({"masked": m.masked_stats(), "unmasked": m.unmasked_stats()})
        }
    };
    write_out(out, &format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))?;
    Ok(EXIT_OK)
}
