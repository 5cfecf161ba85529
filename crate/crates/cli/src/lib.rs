//! Command dispatch for the `cid` binary. Everything goes through
//! [`run_cli`], which returns the exit code and both output streams instead
//! of touching the process, so tests can drive it directly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cidkit::{
    analyze, builtin_example, completeness_construction, control_construction, mdp_theta,
    optimal_value, parse_cid, parse_model_with_cap, random_graph, random_model, serialize_dot,
    serialize_model, value_of_control, value_of_information, CidGraph, CidModel, Error,
    IncentiveReport, InterventionVerdict, Verdict, EXAMPLE_NAMES,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const DEFAULT_MAX_DOMAIN: usize = 4;
const VALUE_TOL: f64 = 1e-9;
const VOC_MIN: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(name = "cid", version, about = "Incentive analysis for causal influence diagrams")]
struct Cli {
    /// Largest domain accepted when reading model files.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DOMAIN, value_name = "K")]
    max_domain: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify every node's observation and intervention incentives.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        format: Format,
        /// Report a single node.
        #[arg(long, conflicts_with = "dot")]
        node: Option<String>,
    },
    /// Exact value of information of a node for the decision.
    Voi {
        model: PathBuf,
        #[arg(long)]
        node: String,
    },
    /// Exact value of control of a node.
    Voc {
        model: PathBuf,
        #[arg(long)]
        node: String,
    },
    /// Optimal expected utility and an optimal policy.
    Solve { model: PathBuf },
    /// Emit the parameterization witnessing an incentive on a node.
    Construct {
        file: PathBuf,
        #[arg(long)]
        node: String,
        #[arg(long, value_enum, default_value_t = Mode::Obs)]
        mode: Mode,
    },
    /// Check the criteria against the exact solver on random graphs.
    Fuzz {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=16))]
        max_nodes: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=4))]
        domain_size: u64,
        /// Probability of each forward edge.
        #[arg(long, default_value_t = 0.4)]
        edge_prob: f64,
    },
    /// Write a Graphviz rendering of a graph.
    Render {
        file: PathBuf,
        #[arg(short = 'o', long = "output", value_name = "OUT")]
        output: PathBuf,
        /// Colour nodes by incentive.
        #[arg(long)]
        annotate: bool,
    },
    /// Print a built-in example; lists the names when none is given.
    Example {
        name: Option<String>,
        /// Number of time steps for mdp-theta.
        #[arg(long)]
        horizon: Option<usize>,
        /// Keep only decision D_K of mdp-theta; the rest become chance nodes.
        #[arg(long, value_name = "K")]
        keep_decision: Option<usize>,
    },
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct Format {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    text: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Observation incentive: value of information is 1.
    Obs,
    /// Intervention incentive: positive value of control.
    Int,
}

enum Failure {
    Analysis(Error),
    Io(PathBuf, std::io::Error),
    /// Fuzz summary plus the disagreements it found.
    Violations(String, Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

/// Runs one invocation. `argv[0]` is the program name. Returns
/// `(exit code, stdout, stderr)`: 0 on success, 1 when the analysis fails,
/// 2 on bad usage.
pub fn run_cli<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                (2, String::new(), text)
            } else {
                (0, text, String::new())
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => (0, out, String::new()),
        Err(Failure::Analysis(e)) => (1, String::new(), format!("error[{}]: {e}\n", e.code())),
        Err(Failure::Io(path, e)) => (
            1,
            String::new(),
            format!("error[Io]: {}: {e}\n", path.display()),
        ),
        Err(Failure::Violations(summary, found)) => (
            1,
            summary,
            found.iter().map(|v| format!("violation: {v}\n")).collect(),
        ),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_graph(path: &Path) -> std::result::Result<CidGraph, Failure> {
    Ok(parse_cid(&read(path)?)?)
}

fn load_model(path: &Path, cap: usize) -> std::result::Result<CidModel, Failure> {
    Ok(parse_model_with_cap(&read(path)?, cap)?)
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Analyze { file, format, node } => {
            let g = load_graph(file)?;
            let report = analyze(&g)?;
            if format.dot {
                return Ok(serialize_dot(&g, Some(&report))?);
            }
            let report = match node {
                Some(id) => {
                    g.require(id)?;
                    IncentiveReport {
                        graph: report.graph.clone(),
                        nodes: report.nodes.into_iter().filter(|(n, _)| n == id).collect(),
                    }
                }
                None => report,
            };
            if format.json {
                let mut s = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Invariant(e.to_string()))?;
                s.push('\n');
                Ok(s)
            } else {
                Ok(text_report(&g, &report))
            }
        }
        Command::Voi { model, node } => {
            let m = load_model(model, cli.max_domain)?;
            let v = value_of_information(&m, node)?;
            Ok(format!("VoI({node}) = {v:.9}\n"))
        }
        Command::Voc { model, node } => {
            let m = load_model(model, cli.max_domain)?;
            let v = value_of_control(&m, node)?;
            Ok(format!("VoC({node}) = {v:.9}\n"))
        }
        Command::Solve { model } => {
            let m = load_model(model, cli.max_domain)?;
            let (v, policy) = optimal_value(&m, None, None)?;
            let mut out = format!("optimal value = {v:.9}\n");
            let _ = writeln!(
                out,
                "policy for {} given ({}):",
                policy.decision,
                policy.context.join(", ")
            );
            for line in policy.describe(&m)?.lines() {
                let _ = writeln!(out, "  {line}");
            }
            Ok(out)
        }
        Command::Construct { file, node, mode } => {
            let g = load_graph(file)?;
            let m = match mode {
                Mode::Obs => completeness_construction(&g, node)?,
                Mode::Int => control_construction(&g, node)?,
            };
            Ok(serialize_model(&m))
        }
        Command::Fuzz {
            max_nodes,
            trials,
            seed,
            domain_size,
            edge_prob,
        } => fuzz(
            *max_nodes as usize,
            *trials,
            *seed,
            *domain_size as usize,
            *edge_prob,
        ),
        Command::Render {
            file,
            output,
            annotate,
        } => {
            let g = load_graph(file)?;
            let report = if *annotate { Some(analyze(&g)?) } else { None };
            let dot = serialize_dot(&g, report.as_ref())?;
            fs::write(output, dot).map_err(|e| Failure::Io(output.clone(), e))?;
            Ok(String::new())
        }
        Command::Example {
            name,
            horizon,
            keep_decision,
        } => match name.as_deref() {
            None => Ok(EXAMPLE_NAMES.iter().map(|n| format!("{n}\n")).collect()),
            Some("mdp-theta") => Ok(mdp_theta(
                horizon.unwrap_or(cidkit::corpus::DEFAULT_HORIZON),
                *keep_decision,
            )?),
            Some(other) => {
                if horizon.is_some() || keep_decision.is_some() {
                    return Err(Error::BadParams(format!(
                        "--horizon and --keep-decision only apply to mdp-theta, not `{other}`"
                    ))
                    .into());
                }
                Ok(builtin_example(other, None)?)
            }
        },
    }
}

fn text_report(g: &CidGraph, report: &IncentiveReport) -> String {
    let mut out = format!("graph {}\n", report.graph);
    if let Ok(d) = g.single_decision() {
        let _ = writeln!(out, "decision {}", g.id(d));
    }
    let width = report
        .nodes
        .iter()
        .map(|(n, _)| n.len())
        .chain(["node".len()])
        .max()
        .unwrap_or(4);
    let _ = writeln!(
        out,
        "{:<width$}  {:<11}  {:<9}  intervention",
        "node", "observation", "requisite"
    );
    for (id, r) in &report.nodes {
        let _ = writeln!(
            out,
            "{:<width$}  {:<11}  {:<9}  {}",
            id,
            r.observation.as_str(),
            r.requisite.as_str(),
            r.intervention.as_str()
        );
    }
    out
}

#[derive(Default)]
struct FuzzTally {
    graphs: usize,
    soundness: usize,
    constructions: usize,
    skipped: usize,
    violations: Vec<String>,
}

impl FuzzTally {
    fn check(&mut self, what: String, value: cidkit::Result<f64>, ok: impl Fn(f64) -> bool) {
        match value {
            Ok(v) if ok(v) => {}
            Ok(v) => self.violations.push(format!("{what} = {v:.9}")),
            Err(Error::StateSpaceTooLarge(_)) => self.skipped += 1,
            Err(e) => self.violations.push(format!("{what}: {e}")),
        }
    }
}

fn fuzz(max_nodes: usize, trials: u64, seed: u64, k: usize, p: f64) -> Outcome {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("--edge-prob must lie in [0, 1], got {p}")).into());
    }
    let mut t = FuzzTally::default();
    for trial in 0..trials {
        let gseed = seed.wrapping_add(trial);
        let n = 2 + (gseed % (max_nodes as u64 - 1)) as usize;
        let g = random_graph(n, p, gseed)?;
        let m = random_model(&g, k, gseed.rotate_left(32))?;
        let report = analyze(&g)?;
        t.graphs += 1;
        for (id, inc) in &report.nodes {
            let at = format!("{} {id}", g.name());
            match inc.observation {
                Verdict::No => {
                    t.soundness += 1;
                    t.check(format!("{at}: criterion no, VoI"), value_of_information(&m, id), |v| {
                        v <= VALUE_TOL
                    });
                }
                Verdict::Yes => {
                    t.constructions += 1;
                    let v = completeness_construction(&g, id)
                        .and_then(|c| value_of_information(&c, id));
                    t.check(format!("{at}: construction VoI"), v, |v| {
                        (v - 1.0).abs() <= VALUE_TOL
                    });
                }
                Verdict::NotApplicable => {}
            }
            match inc.intervention {
                InterventionVerdict::None => {
                    t.soundness += 1;
                    t.check(format!("{at}: criterion none, VoC"), value_of_control(&m, id), |v| {
                        v <= VALUE_TOL
                    });
                }
                InterventionVerdict::NotApplicable => {}
                _ => {
                    t.constructions += 1;
                    let v = control_construction(&g, id).and_then(|c| value_of_control(&c, id));
                    t.check(format!("{at}: construction VoC"), v, |v| v > VOC_MIN);
                }
            }
        }
    }
    let mut out = format!(
        "graphs: {} (2..={max_nodes} nodes, edge probability {p}, domain size {k}, seed {seed})\n",
        t.graphs
    );
    let _ = writeln!(out, "soundness checks: {}", t.soundness);
    let _ = writeln!(out, "construction checks: {}", t.constructions);
    let _ = writeln!(out, "skipped (state space too large): {}", t.skipped);
    let _ = writeln!(out, "violations: {}", t.violations.len());
    if t.violations.is_empty() {
        Ok(out)
    } else {
        Err(Failure::Violations(out, t.violations))
    }
}
