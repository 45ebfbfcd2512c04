use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use chase_lab::adversaries::{
    cw_impossibility_pair, external_incomparability_instance, olsc_to_ddmdp, trap_instance, random_dracc, random_mdbg,
    random_ojs, DraccGenParams, MdbgGenParams, OjsGenParams,
};
use chase_lab::apps::{MdbgFile, OjsFile};
use chase_lab::chasing::{run_chase_dracc, ChasingOracle, ExploringChaser, OjsChaser};
use chase_lab::ddmdp::{simulate_policy, DdMdp, PolicyCollection};
use chase_lab::dracc::{make_policy_family, DraccFile, DraccInstance, Inventory, PolicyFamilySpec, PricingPolicies};
use chase_lab::harness::{load_file, run_experiment, verify, ExperimentConfig, InstanceSource, Loaded, Suite};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "chase-lab", version, about = "Regret experiments for learning over dynamic deterministic MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write trials.csv, curve.csv and summary.json.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an instance file.
    GenInstance {
        #[arg(value_enum)]
        kind: GenKind,
        /// Generator parameters as JSON text, or `@path` to read them from a file.
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite (or `all`) and print a JSON report.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Simulate one benchmark policy on an instance file and print per-round rewards.
    SimulatePolicy {
        #[arg(value_enum)]
        kind: FileKind,
        instance: PathBuf,
        /// Policy id, e.g. `uniform:0.5` or `const:forward`.
        #[arg(long)]
        policy: String,
        /// Pricing policy family as JSON, when the file does not carry one.
        #[arg(long)]
        family: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a chasing oracle against one policy and write per-round diagnostics.
    Chase {
        #[arg(value_enum)]
        kind: FileKind,
        instance: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_enum, default_value_t = OracleKind::Kdemand)]
        oracle: OracleKind,
        #[arg(long, default_value_t = 1)]
        t_init: usize,
        /// Defaults to the horizon.
        #[arg(long)]
        t_final: Option<usize>,
        #[arg(long, value_enum, default_value_t = StartKind::Empty)]
        start: StartKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Diagnostics CSV path; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Dracc,
    Ojs,
    Mdbg,
    Trap,
    CwPair,
    External,
    Olsc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileKind {
    Dracc,
    Ojs,
    Mdbg,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Kdemand,
    General,
    Ojs,
    Follower,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartKind {
    /// Every active resource sold out.
    Empty,
    /// Full capacity on every active resource.
    Fresh,
    /// The target policy's own state.
    Target,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrapParams {
    #[serde(rename = "T")]
    horizon: usize,
    #[serde(default)]
    trap: usize,
}

#[derive(Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Which {
    #[default]
    First,
    Second,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CwParams {
    #[serde(rename = "C")]
    c: u32,
    #[serde(rename = "W")]
    w: usize,
    eps: f64,
    #[serde(default)]
    which: Which,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExternalParams {
    m: usize,
    #[serde(rename = "T")]
    horizon: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OlscParams {
    stream: Vec<Vec<f64>>,
}

fn read_params<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).context("parsing generator parameters")
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_instance(kind: GenKind, params: &str, seed: u64) -> Result<String> {
    let json = match kind {
        GenKind::Dracc => {
            let p: DraccGenParams = read_params(params)?;
            serde_json::to_string_pretty(&DraccFile::from_instance(&random_dracc::<f64>(&p, seed)?, None))?
        }
        GenKind::Ojs => {
            let p: OjsGenParams = read_params(params)?;
            serde_json::to_string_pretty(&OjsFile::from_instance(&random_ojs::<f64>(&p, seed)?))?
        }
        GenKind::Mdbg => {
            let p: MdbgGenParams = read_params(params)?;
            serde_json::to_string_pretty(&MdbgFile::from_instance(&random_mdbg::<f64>(&p, seed)?))?
        }
        GenKind::Trap => {
            let p: TrapParams = read_params(params)?;
            serde_json::to_string_pretty(&trap_instance::<f64>(p.horizon, p.trap)?.to_file())?
        }
        GenKind::CwPair => {
            let p: CwParams = read_params(params)?;
            let (a, b) = cw_impossibility_pair::<f64>(p.c, p.w, p.eps)?;
            let inst = match p.which {
                Which::First => a,
                Which::Second => b,
            };
            let family = PolicyFamilySpec::Uniform { levels: vec![0.5, 1.0 - p.eps] };
            serde_json::to_string_pretty(&DraccFile::from_instance(&inst, Some(family)))?
        }
        GenKind::External => {
            let p: ExternalParams = read_params(params)?;
            serde_json::to_string_pretty(&external_incomparability_instance::<f64>(p.m, p.horizon)?.to_file())?
        }
        GenKind::Olsc => {
            let p: OlscParams = read_params(params)?;
            serde_json::to_string_pretty(&olsc_to_ddmdp::<f64>(&p.stream)?.0.to_file())?
        }
    };
    Ok(json + "\n")
}

fn load(kind: FileKind, path: &Path) -> Result<Loaded> {
    let path = path.to_path_buf();
    let source = match kind {
        FileKind::Dracc => InstanceSource::DraccFile { path },
        FileKind::Ojs => InstanceSource::OjsFile { path },
        FileKind::Mdbg => InstanceSource::MdbgFile { path },
        FileKind::Explicit => InstanceSource::ExplicitFile { path },
    };
    load_file(&source)?.ok_or_else(|| anyhow!("not a file source"))
}

fn pricing_policies(inst: &DraccInstance<f64>, family: Option<&str>, embedded: Option<PolicyFamilySpec>) -> Result<PricingPolicies<f64>> {
    let spec = match family {
        Some(text) => serde_json::from_str(text).context("parsing --family")?,
        None => embedded.ok_or_else(|| anyhow!("the instance carries no policy family; pass --family"))?,
    };
    Ok(make_policy_family(&spec, inst.schedule())?)
}

fn pick<S, A>(policies: &PolicyCollection<S, A>, id: &str) -> Result<usize> {
    policies.position(id).ok_or_else(|| anyhow!("no policy `{id}`; available: {}", policies.ids().join(", ")))
}

fn rewards_csv(rewards: &[f64], scale: f64) -> String {
    let mut out = String::from("t,reward,cumulative\n");
    let mut acc = 0.0;
    for (i, r) in rewards.iter().enumerate() {
        acc += r * scale;
        out.push_str(&format!("{},{},{}\n", i + 1, r * scale, acc));
    }
    out
}

fn simulate(kind: FileKind, path: &Path, id: &str, family: Option<&str>) -> Result<String> {
    match load(kind, path)? {
        Loaded::Pricing(inst, embedded) => {
            let policies = pricing_policies(&inst, family, embedded)?;
            let trace = simulate_policy(&inst, policies.get(pick(&policies, id)?), inst.horizon())?;
            Ok(rewards_csv(&trace.rewards, inst.reward_scale()))
        }
        Loaded::Table(inst) => {
            let policies = PolicyCollection::new((0..inst.num_actions()).map(|x| inst.constant_policy(x)).collect())?;
            let trace = simulate_policy(&inst, policies.get(pick(&policies, id)?), inst.horizon())?;
            Ok(rewards_csv(&trace.rewards, 1.0))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn chase(
    kind: FileKind,
    path: &Path,
    id: &str,
    family: Option<&str>,
    oracle: OracleKind,
    t_init: usize,
    t_final: Option<usize>,
    start: StartKind,
    seed: u64,
) -> Result<(String, serde_json::Value)> {
    let Loaded::Pricing(inst, embedded) = load(kind, path)? else { bail!("chase needs a pricing instance") };
    let policies = pricing_policies(&inst, family, embedded)?;
    let policy = policies.get(pick(&policies, id)?);
    let horizon = inst.horizon();
    let t_final = t_final.unwrap_or(horizon);
    if t_init == 0 || t_init > t_final || t_final > horizon {
        bail!("need 1 <= t_init <= t_final <= {horizon}");
    }
    let s_init = match start {
        StartKind::Empty => Inventory(inst.schedule().active(t_init).iter().map(|&(i, _)| (i, 0)).collect()),
        StartKind::Fresh => inst.schedule().fresh_inventory(t_init),
        StartKind::Target => {
            let trace = simulate_policy(&inst, policy, t_init - 1)?;
            trace.terminal
        }
    };
    let mut o: Box<dyn ChasingOracle<DraccInstance<f64>>> = match oracle {
        OracleKind::Kdemand => Box::new(ExploringChaser::kdemand(inst.cw(), horizon)),
        OracleKind::General => Box::new(ExploringChaser::general(inst.cw(), horizon)),
        OracleKind::Ojs => Box::new(OjsChaser::new(inst.schedule().clone())?),
        OracleKind::Follower => Box::new(ExploringChaser::follower()),
    };
    let (report, probe, final_phi) = run_chase_dracc(&inst, o.as_mut(), policy, t_init, &s_init, t_final, seed)?;
    let summary = serde_json::json!({
        "oracle": o.name(),
        "policy": id,
        "t_init": t_init,
        "t_final": t_final,
        "cr": report.cr,
        "cr_native": report.cr_native(),
        "max_prefix_cr_native": report.max_prefix_cr_native(),
        "explored_rounds": report.explored.iter().filter(|e| **e).count(),
        "final_phi": final_phi,
    });
    Ok((probe.to_csv()?, summary))
}

fn run(config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::from_file(config)?;
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("chase-lab-out"));
    let outcome = run_experiment(&cfg)?;
    outcome.write_to(&dir).with_context(|| format!("writing results to {}", dir.display()))?;
    println!("{}", outcome.summary_json()?);
    for f in &outcome.failures {
        log::error!("invariant violation in trial {f}");
    }
    Ok(outcome.ok())
}

fn verify_cmd(suite: &str, seed: u64) -> Result<bool> {
    let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
    let mut passed = true;
    for s in suites {
        let report = verify(s, seed)?;
        passed &= report.passed;
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::GenInstance { kind, params, seed, out } => gen_instance(kind, &params, seed).and_then(|j| emit(out.as_deref(), &j)).map(|_| true),
        Command::Verify { suite, seed } => verify_cmd(&suite, seed),
        Command::SimulatePolicy { kind, instance, policy, family, out } => {
            simulate(kind, &instance, &policy, family.as_deref()).and_then(|csv| emit(out.as_deref(), &csv)).map(|_| true)
        }
        Command::Chase { kind, instance, policy, family, oracle, t_init, t_final, start, seed, out } => {
            chase(kind, &instance, &policy, family.as_deref(), oracle, t_init, t_final, start, seed).and_then(|(csv, summary)| {
                match out {
                    Some(p) => {
                        emit(Some(&p), &csv)?;
                        println!("{summary}");
                    }
                    None => {
                        print!("{csv}");
                        eprintln!("{summary}");
                    }
                }
                Ok(true)
            })
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
