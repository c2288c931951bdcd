use clap::{Args, Parser, Subcommand, ValueEnum};
use mdpsat::cvar::{cvar_max, cvar_max_high_bad, CvarResult};
use mdpsat::gadget::{
    build_lrp_instance, check_regime, positivity_bruteforce, reduce_ce_to_pe_acyclic, reduce_pe_to_ce,
    reduce_pe_to_wlf_acyclic, rescale_lrs, threshold_cvar, threshold_pe, threshold_wlf, Lrs, Regime, Rescaled,
    ThresholdReport,
};
use mdpsat::graph::{sspp_preprocess, Direction};
use mdpsat::longrun::{fltl_qualitative, wlf_max, LongRunSpec};
use mdpsat::mdp::{parse_mdp, serialize_mdp, serialize_nfa};
use mdpsat::oracle::{brute_ce, brute_cvar, brute_pe, brute_wlf, non_trap_acyclic, BruteResult, SchedulerSpace, DEFAULT_BUDGET};
use mdpsat::sspp::{acyclic_conditional_expectation, acyclic_partial_expectation, classical_sspp};
use mdpsat::{Error, Mdp, Rat};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "mdpsat", version, about = "Exact solvers and hardness gadgets for weighted MDPs")]
struct Cli {
    /// Append a plain-text table after the JSON report.
    #[arg(long, global = true)]
    human: bool,
    /// Worker threads. Every solver here is sequential, so this never changes a result.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal values of a model.
    #[command(subcommand)]
    Solve(Solve),
    /// Qualitative checks.
    #[command(subcommand)]
    Check(Check),
    /// Build a hardness gadget from a linear recurrence.
    Gadget(GadgetArgs),
    /// Threshold-problem reductions.
    Reduce(ReduceArgs),
    /// Brute-force optimum over an enumerated scheduler space.
    Oracle(OracleArgs),
    /// First negative term of a linear recurrence.
    Positivity(PositivityArgs),
}

#[derive(Subcommand)]
enum Solve {
    Sspp(SsppArgs),
    Cvar(CvarArgs),
    Wlf(WlfArgs),
}

#[derive(Subcommand)]
enum Check {
    Fltl(FltlArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SsppKind {
    Classical,
    Pe,
    Ce,
}

#[derive(Args)]
struct SsppArgs {
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[arg(long, value_enum, default_value = "classical")]
    kind: SsppKind,
    #[arg(long)]
    min: bool,
    /// Collapse end components outside the goal before solving (classical only).
    #[arg(long)]
    preprocess: bool,
}

#[derive(Args)]
struct CvarArgs {
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[arg(short = 'p', long = "prob")]
    p: Rat,
    /// Large outcomes are bad: optimize the upper tail instead.
    #[arg(long)]
    high_bad: bool,
}

#[derive(Args)]
struct WlfArgs {
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[arg(long, value_delimiter = ',')]
    goal: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    fail: Option<Vec<String>>,
}

#[derive(Args)]
struct FltlArgs {
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    until: Vec<String>,
    #[arg(long)]
    theta: Rat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GadgetKind {
    Pe,
    Cvar,
    Wlf,
    Lrp,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(value_enum)]
    kind: GadgetKind,
    #[arg(long)]
    lrs: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Always rescale, even if the sequence already fits the gadget.
    #[arg(long)]
    rescale: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    PeCe,
    CePe,
    PeWlf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(value_enum)]
    kind: Reduction,
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[arg(long)]
    theta: Rat,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Pe,
    Ce,
    Cvar,
    Wlf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    /// Weight-memory cap; without it, histories on acyclic models and memoryless otherwise.
    #[arg(long)]
    memory: Option<u64>,
    #[arg(short = 'p', long = "prob")]
    p: Option<Rat>,
    #[arg(long)]
    min: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Start in this state instead of the initial one.
    #[arg(long)]
    start: Option<String>,
    /// Weight already accumulated at the start (partial expectations only).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    offset: i64,
}

#[derive(Args)]
struct PositivityArgs {
    #[arg(long)]
    lrs: PathBuf,
    /// Last index inspected; defaults to 4k+16.
    #[arg(long)]
    horizon: Option<usize>,
}

/// Input files are hashed into the report.
struct Inputs(Vec<(String, String)>);

impl Inputs {
    fn read(&mut self, p: &Path) -> Result<Vec<u8>, Error> {
        let bytes = std::fs::read(p).map_err(|e| Error::MalformedDocument(format!("{}: {e}", p.display())))?;
        self.0.push((p.display().to_string(), hex(&bytes)));
        Ok(bytes)
    }
    fn mdp(&mut self, p: &Path) -> Result<Mdp, Error> {
        parse_mdp(&self.read(p)?)
    }
    fn lrs(&mut self, p: &Path) -> Result<Lrs, Error> {
        Lrs::parse(&self.read(p)?)
    }
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(p: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(p, bytes).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display())))
}

fn model_json(m: &Mdp) -> Value {
    serde_json::from_slice(&serialize_mdp(m)).expect("serialized model is JSON")
}

fn dir(min: bool) -> Direction {
    if min {
        Direction::Min
    } else {
        Direction::Max
    }
}

fn cvar_json(m: &Mdp, r: &CvarResult) -> Value {
    let sat = r.saturation.as_ref();
    json!({
        "value": r.value.to_string(),
        "var": r.var.to_string(),
        "p": r.p.to_string(),
        "tail": format!("{:?}", r.tail).to_lowercase(),
        "K": sat.map(|s| s.k.to_string()),
        "ell": sat.map(|s| s.ell.to_string()),
        "witness": r.witness.to_json(m),
    })
}

fn brute_json(m: &Mdp, b: &BruteResult) -> Value {
    json!({
        "value": b.value.to_string(),
        "behaviours": b.count,
        "space": b.space.describe(),
        "witness": b.witness.to_json(m),
    })
}

fn gadget_report(rep: &ThresholdReport, model: &[u8]) -> Value {
    let mut v = rep.to_json();
    let o = v.as_object_mut().expect("report object");
    o.remove("gadget");
    o.insert("matrixDimensions".into(), json!([rep.a.rows(), rep.a.cols()]));
    o.insert("modelSha256".into(), json!(hex(model)));
    let a: Vec<String> = (0..rep.a.rows()).flat_map(|i| rep.a.row(i).iter().map(|x| x.to_string())).collect();
    o.insert("matrixSha256".into(), json!(hex(a.join(" ").as_bytes())));
    v
}

fn fit(l: &Lrs, regime: Regime, force: bool) -> Result<Rescaled, Error> {
    if !force && check_regime(l, regime).is_ok() {
        return Ok(Rescaled { lrs: l.clone(), lambda: Rat::one(), kappa: Rat::one(), mu: l.max_abs_coefficient() });
    }
    rescale_lrs(l, regime)
}

fn run(cmd: Command, inputs: &mut Inputs) -> Result<Value, Error> {
    match cmd {
        Command::Solve(Solve::Sspp(a)) => {
            let m = inputs.mdp(&a.file)?;
            let d = dir(a.min);
            match a.kind {
                SsppKind::Classical => {
                    let m = if a.preprocess { sspp_preprocess(&m)? } else { m };
                    let r = classical_sspp(&m, d)?;
                    Ok(json!({"value": r.value.to_string(), "direction": d, "witness": r.witness.to_json(&m)}))
                }
                SsppKind::Pe | SsppKind::Ce => {
                    let r = if matches!(a.kind, SsppKind::Pe) {
                        acyclic_partial_expectation(&m, d)?
                    } else {
                        acyclic_conditional_expectation(&m, d)?
                    };
                    Ok(json!({
                        "value": r.value.to_string(),
                        "kind": r.kind,
                        "direction": d,
                        "reachProb": r.reach_prob.to_string(),
                        "partial": r.partial.to_string(),
                        "witness": r.witness.to_json(&m),
                    }))
                }
            }
        }
        Command::Solve(Solve::Cvar(a)) => {
            let m = inputs.mdp(&a.file)?;
            let r = if a.high_bad { cvar_max_high_bad(&m, &a.p)? } else { cvar_max(&m, &a.p)? };
            Ok(cvar_json(&m, &r))
        }
        Command::Solve(Solve::Wlf(a)) => {
            let m = inputs.mdp(&a.file)?;
            let spec = match (&a.goal, &a.fail) {
                (None, None) => LongRunSpec::from_mdp(&m),
                (g, f) => LongRunSpec::from_ids(
                    &m,
                    g.as_deref().unwrap_or(&m.ids_of(m.goal())),
                    f.as_deref().unwrap_or(&m.ids_of(m.fail())),
                )?,
            };
            let r = wlf_max(&m, &spec)?;
            let sat = r.saturation();
            let mecs: Vec<Value> = r
                .mecs
                .iter()
                .map(|e| {
                    json!({
                        "states": m.ids_of(&e.states),
                        "gain": e.gain.to_string(),
                        "K": e.saturation.k.to_string(),
                        "attained": e.attained,
                    })
                })
                .collect();
            Ok(json!({
                "value": r.value.to_string(),
                "K": sat.map(|s| s.k.to_string()),
                "delta": sat.map(|s| s.delta.to_string()),
                "e": sat.map(|s| s.e.to_string()),
                "W": sat.map(|s| s.w.to_string()),
                "mecs": mecs,
                "witness": r.witness.to_json(&m),
            }))
        }
        Command::Check(Check::Fltl(a)) => {
            let m = inputs.mdp(&a.file)?;
            let r = fltl_qualitative(&m, &a.until[0], &a.until[1], &a.theta)?;
            let gains: Vec<Value> =
                r.per_mec_gain.iter().map(|(s, g)| json!({"states": m.ids_of(s), "gain": g.to_string()})).collect();
            Ok(json!({"holds": r.holds, "theta": a.theta.to_string(), "perMecGain": gains}))
        }
        Command::Gadget(a) => {
            let l = inputs.lrs(&a.lrs)?;
            let regime = if a.kind == GadgetKind::Cvar { Regime::Cvar } else { Regime::Pe };
            let r = fit(&l, regime, a.rescale)?;
            let (model, report) = match a.kind {
                GadgetKind::Pe | GadgetKind::Cvar | GadgetKind::Wlf => {
                    let rep = match a.kind {
                        GadgetKind::Pe => threshold_pe(&r)?,
                        GadgetKind::Cvar => threshold_cvar(&r)?,
                        _ => threshold_wlf(&r)?,
                    };
                    // the CVaR question is asked on the prefix-extended model
                    let m = rep.prefix.as_ref().unwrap_or(&rep.gadget.mdp);
                    let bytes = serialize_mdp(m);
                    (bytes.clone(), gadget_report(&rep, &bytes))
                }
                GadgetKind::Lrp => {
                    let inst = build_lrp_instance(&r.lrs)?;
                    let bytes = serialize_mdp(&inst.l_model);
                    let report = json!({
                        "kind": "lrp",
                        "lrs": r.lrs.to_json(),
                        "lambda": r.lambda.to_string(),
                        "kappa": r.kappa.to_string(),
                        "weightedModel": model_json(&inst.k_model),
                        "automaton": serde_json::from_slice::<Value>(&serialize_nfa(&inst.nfa)).expect("nfa JSON"),
                        "modelSha256": hex(&bytes),
                    });
                    (bytes, report)
                }
            };
            write(&a.output, &model)?;
            let mut summary = report.clone();
            if let Some(p) = &a.report {
                write(p, &serde_json::to_vec_pretty(&report).expect("report JSON"))?;
                summary = json!({
                    "theta": report.get("theta"),
                    "lambda": report.get("lambda"),
                    "modelSha256": report.get("modelSha256"),
                    "report": p.display().to_string(),
                });
            }
            summary["model"] = json!(a.output.display().to_string());
            Ok(summary)
        }
        Command::Reduce(a) => {
            let m = inputs.mdp(&a.file)?;
            let (out, v) = match a.kind {
                Reduction::PeCe => {
                    let r = reduce_pe_to_ce(&m, &a.theta)?;
                    let v = json!({"threshold": r.threshold.to_string(), "scale": r.scale.to_string(), "strict": true});
                    (r.mdp, v)
                }
                Reduction::CePe => {
                    let r = reduce_ce_to_pe_acyclic(&m, &a.theta)?;
                    let v = json!({"preGadget": r.pre_gadget, "params": r.params.to_json()});
                    (r.mdp, v)
                }
                Reduction::PeWlf => {
                    let r = reduce_pe_to_wlf_acyclic(&m, &a.theta)?;
                    (r.mdp, json!({"ell": r.ell, "threshold": r.threshold.to_string()}))
                }
            };
            let bytes = serialize_mdp(&out);
            write(&a.output, &bytes)?;
            let mut v = v;
            v["model"] = json!(a.output.display().to_string());
            v["modelSha256"] = json!(hex(&bytes));
            Ok(v)
        }
        Command::Oracle(a) => {
            let mut m = inputs.mdp(&a.file)?;
            if let Some(s) = &a.start {
                let i = m.index_of(s).ok_or_else(|| Error::UnknownStateReference(s.clone()))?;
                m = m.with_initial(i)?;
            }
            let space = match a.memory {
                Some(cap) => SchedulerSpace::WeightMemory { cap, reset: a.kind == OracleKind::Wlf },
                None if non_trap_acyclic(&m) => SchedulerSpace::AcyclicHistory,
                None => SchedulerSpace::Memoryless,
            };
            match a.kind {
                OracleKind::Pe => {
                    let b = brute_pe(&m, space, dir(a.min), a.budget)?;
                    let mut v = brute_json(&m, &b);
                    if a.offset != 0 {
                        // value of the witness with the offset added on goal-reaching paths
                        let (pr, pe) = mdpsat::oracle::reach_and_pe(&m, &b.witness)?;
                        v["withOffset"] = json!((pe + pr * Rat::int(a.offset)).to_string());
                    }
                    Ok(v)
                }
                OracleKind::Ce => Ok(brute_json(&m, &brute_ce(&m, space, dir(a.min), a.budget)?)),
                OracleKind::Wlf => {
                    let cap = a.memory.ok_or_else(|| Error::InvalidArgument("oracle wlf needs --memory".into()))?;
                    Ok(brute_json(&m, &brute_wlf(&m, cap, a.budget)?))
                }
                OracleKind::Cvar => {
                    let p = a.p.ok_or_else(|| Error::InvalidArgument("oracle cvar needs -p".into()))?;
                    let b = brute_cvar(&m, &p, a.memory, a.budget)?;
                    let law: Map<String, Value> = b.law.iter().map(|(x, q)| (x.to_string(), json!(q.to_string()))).collect();
                    Ok(json!({
                        "value": b.value.to_string(),
                        "var": b.var.to_string(),
                        "cap": b.cap,
                        "behaviours": b.count,
                        "law": law,
                        "witness": b.witness.to_json(&m),
                    }))
                }
            }
        }
        Command::Positivity(a) => {
            let l = inputs.lrs(&a.lrs)?;
            let h = a.horizon.unwrap_or(4 * l.k + 16);
            Ok(json!({"firstNegative": positivity_bruteforce(&l, h), "horizon": h}))
        }
    }
}

fn error_kind(e: &Error) -> String {
    let d = format!("{e:?}");
    d.split(['(', ' ', '{']).next().unwrap_or("Error").to_string()
}

fn table(v: &Value) -> String {
    let mut out = String::new();
    if let Some(o) = v.as_object() {
        for (k, x) in o {
            let cell = match x {
                Value::String(s) => s.clone(),
                Value::Object(_) | Value::Array(_) => "…".into(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<16} {cell}\n"));
        }
    }
    out
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let human = cli.human;
    let _ = cli.threads;
    let started = Instant::now();
    let mut inputs = Inputs(Vec::new());
    let outcome = run(cli.command, &mut inputs);
    let digests: Vec<Value> = inputs.0.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect();
    let mut report = json!({"command": argv[1..].to_vec(), "inputs": digests});
    let code = match outcome {
        Ok(v) => {
            report["result"] = v;
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            report["error"] = json!({"kind": error_kind(&e), "message": e.to_string()});
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    };
    report["wallTimeMs"] = json!(started.elapsed().as_millis() as u64);
    println!("{}", serde_json::to_string(&report).expect("report JSON"));
    if human {
        print!("{}", table(report.get("result").unwrap_or(&report["error"])));
    }
    code
}
