use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Read as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::document::{parse_graph, write_graph, FunctionData, GraphDocument};
use super::report::{num, Report};
use crate::analysis::{
    capacity, e_boundedness_check, recurrence_test, resistance, sobolev_check, stochastic_completeness_test,
    AnalysisOptions, Outcome, Verdict, Witness,
};
use crate::edge_functions::{evaluate, EdgeFunction};
use crate::graph_model::{
    completeness_check, Completeness, EdgeId, Point, Scale, SeriesOptions, VertexId, WeightedMetricGraph,
};
use crate::quantum::{cut_quantum, validate_quantum, CutOrigin};
use crate::solver::{fem_oracle_resolve, krein_resolve, SolverWarning};
use crate::transforms::{to_canonical, to_intrinsic, to_unit_lengths};

#[derive(Parser, Debug)]
#[command(name = "metricgraph", version, about = "Dirichlet forms on weighted metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve (L + α) u = f by the Krein formula.
    Solve {
        /// Graph document, `-` for standard input.
        file: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// `constant:c`, `bump:c`, `linear:a,b`, `functions` or a document path.
        #[arg(long)]
        rhs: String,
        /// Sample intervals per edge in the solution table.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Grid cells per edge for preset right-hand sides (even).
        #[arg(long, default_value_t = 256)]
        cells: usize,
    },
    /// Solve (L + α) u = f by finite differences.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rhs: String,
        /// Finite-difference cells per edge (even).
        #[arg(long, default_value_t = 512)]
        cells: usize,
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Run a potential-theoretic check.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        vertex: Option<String>,
        /// `all-neighbors`, `support`, `none` or a comma separated vertex list.
        #[arg(long, default_value = "all-neighbors")]
        relative_to: String,
        /// Second vertex for `resistance`.
        #[arg(long)]
        target: Option<String>,
        /// Length scale for `completeness`.
        #[arg(long, value_enum, default_value_t = ScaleArg::Intrinsic)]
        scale: ScaleArg,
    },
    /// Rewrite the graph in a weight normal form.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Replace the quantum conditions by a graph with jumps and killing.
    CutQuantum {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Derived weights, irreducibility and the support of the discrete part.
    Info { file: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Check {
    Recurrence,
    StochasticCompleteness,
    Sobolev,
    Capacity,
    Resistance,
    EBounded,
    Completeness,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScaleArg {
    Given,
    Canonical,
    Intrinsic,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Given => Scale::Given,
            ScaleArg::Canonical => Scale::Canonical,
            ScaleArg::Intrinsic => Scale::Intrinsic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    Canonical,
    Intrinsic,
    UnitLengths,
}

/// Exit code, standard output and standard error of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILS: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

/// Run the tool with `argv` (including the program name) without touching
/// the process streams, except for reading standard input when the file
/// argument is `-`.
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliOutput {
                    code: EXIT_SUCCESS,
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => CliOutput {
                    code: EXIT_ERROR,
                    stdout: String::new(),
                    stderr: format!("{}\n", e.to_string().lines().next().unwrap_or("usage error")),
                },
            };
        }
    };
    let (name, result) = execute(&cli.command);
    match result {
        Ok((stdout, code)) => CliOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(message) => {
            let mut r = Report::new();
            r.line("error", format!("command {name}"));
            r.line("error", format!("message {message}"));
            r.kv("command", name);
            r.kv("status", "error");
            r.kv("exit_code", EXIT_ERROR.to_string());
            CliOutput {
                code: EXIT_ERROR,
                stdout: r.render(),
                stderr: format!("error: {message}\n"),
            }
        }
    }
}

/// Run the tool on the process arguments and streams; returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let out = run(argv);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

type CommandResult = Result<(String, i32), String>;

fn execute(cmd: &Command) -> (&'static str, CommandResult) {
    match cmd {
        Command::Solve {
            file,
            alpha,
            rhs,
            samples,
            cells,
        } => ("solve", solve(file, *alpha, rhs, *samples, *cells, false)),
        Command::Oracle {
            file,
            alpha,
            rhs,
            cells,
            samples,
        } => ("oracle", solve(file, *alpha, rhs, *samples, *cells, true)),
        Command::Analyze {
            file,
            check,
            vertex,
            relative_to,
            target,
            scale,
        } => (
            "analyze",
            analyze(file, *check, vertex.as_deref(), relative_to, target.as_deref(), (*scale).into()),
        ),
        Command::Transform { file, to } => ("transform", transform(file, *to)),
        Command::CutQuantum { file, seed } => ("cut-quantum", cut(file, *seed)),
        Command::Info { file } => ("info", info(file)),
    }
}

fn read_text(path: &PathBuf) -> Result<String, String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("cannot read standard input: {e}"))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load(path: &PathBuf) -> Result<GraphDocument, String> {
    let text = read_text(path)?;
    parse_graph(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn edge_ids(doc: &GraphDocument) -> Vec<String> {
    doc.edges.iter().map(|e| e.id.clone()).collect()
}

fn vertex(g: &WeightedMetricGraph, label: &str) -> Result<VertexId, String> {
    g.vertex_by_label(label).ok_or_else(|| format!("unknown vertex {label}"))
}

fn preset(spec: &str) -> Result<Option<FunctionData>, String> {
    let Some((kind, args)) = spec.split_once(':') else {
        return Ok(None);
    };
    let values: Vec<f64> = args
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number `{a}` in --rhs {spec}")))
        .collect::<Result<_, _>>()?;
    let arity = |n: usize| {
        if values.len() == n {
            Ok(())
        } else {
            Err(format!("--rhs {kind} takes {n} values"))
        }
    };
    Ok(Some(match kind {
        "constant" => {
            arity(1)?;
            FunctionData::Constant(values[0])
        }
        "bump" => {
            arity(1)?;
            FunctionData::Bump(values[0])
        }
        "linear" => {
            arity(2)?;
            FunctionData::Linear(values[0], values[1])
        }
        _ => return Ok(None),
    }))
}

fn right_hand_side(
    doc: &GraphDocument,
    g: &WeightedMetricGraph,
    spec: &str,
    cells: usize,
) -> Result<EdgeFunction, String> {
    if cells < 2 || cells % 2 != 0 {
        return Err(format!("--cells must be even and at least 2, got {cells}"));
    }
    if let Some(data) = preset(spec)? {
        return Ok(EdgeFunction::from_fn(g, Some(cells), |e, t| data.eval(g.intrinsic_length(e), t)));
    }
    if spec == "functions" {
        return Ok(doc.function(g, Some(cells)));
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(format!(
            "--rhs {spec} is neither a preset (constant:c, bump:c, linear:a,b, functions) nor a file"
        ));
    }
    let other = load(&path)?;
    let mut with_functions = doc.clone();
    with_functions.functions = other.functions;
    if let Some(r) = with_functions.functions.iter().find(|r| doc.edge_id(&r.edge).is_none()) {
        return Err(format!("{spec}: unknown edge {}", r.edge));
    }
    Ok(with_functions.function(g, Some(cells)))
}

fn solve(path: &PathBuf, alpha: f64, rhs: &str, samples: usize, cells: usize, oracle: bool) -> CommandResult {
    let doc = load(path)?;
    let g = doc.graph().map_err(|e| e.to_string())?;
    let f = right_hand_side(&doc, &g, rhs, cells)?;
    let ids = edge_ids(&doc);
    let mut r = Report::new();
    let command = if oracle { "oracle" } else { "solve" };
    r.line("command", format!("{command} alpha {} rhs {rhs}", num(alpha)));
    r.derived_weights(&g, &ids);
    let samples = samples.max(1);
    let u = match oracle {
        false => {
            let sol = krein_resolve(&g, alpha, &f).map_err(|e| e.to_string())?;
            r.line("residuals", format!("discrete_residual {}", num(sol.discrete_residual)));
            r.line("residuals", format!("weak_residual {}", num(sol.weak_residual)));
            r.line("residuals", format!("continuity_defect {}", num(sol.continuity_defect)));
            match sol.condition_estimate {
                Some(c) => r.line("residuals", format!("condition_estimate {}", num(c))),
                None => r.line("residuals", "condition_estimate not computed"),
            }
            r.line("residuals", format!("method {:?}", sol.method));
            for w in &sol.warnings {
                r.line(
                    "warnings",
                    match w {
                        SolverWarning::IllConditioned { estimate } => {
                            format!("ill_conditioned estimate {}", num(*estimate))
                        }
                        SolverWarning::ResidualAboveTolerance { residual, tolerance } => {
                            format!("residual_above_tolerance {} > {}", num(*residual), num(*tolerance))
                        }
                    },
                );
            }
            r.kv("weak_residual", num(sol.weak_residual));
            r.kv("discrete_residual", num(sol.discrete_residual));
            r.kv("warnings", sol.warnings.len().to_string());
            sol.u
        }
        true => {
            r.kv("cells", cells.to_string());
            fem_oracle_resolve(&g, alpha, &f, cells).map_err(|e| e.to_string())?
        }
    };
    r.line("solution", "edge fraction offset u");
    let mut sup = 0.0f64;
    for e in g.edge_ids() {
        let l = g.weights().length[e.0];
        for k in 0..=samples {
            let s = k as f64 / samples as f64;
            let offset = if k == samples { l } else { s * l };
            let value = evaluate(&g, &u, Point::Edge { edge: e, offset }).map_err(|e| e.to_string())?;
            sup = sup.max(value.abs());
            r.line("solution", format!("{} {} {} {}", ids[e.0], num(s), num(offset), num(value)));
        }
    }
    let trace = u.vertex_trace(&g).map_err(|e| e.to_string())?;
    for x in g.vertices() {
        r.line("vertex-values", format!("{} {}", g.label(x), num(trace[x.0])));
    }
    r.kv("command", command);
    r.kv("alpha", num(alpha));
    r.kv("sup_norm", num(sup));
    r.kv("status", "success");
    r.kv("exit_code", EXIT_SUCCESS.to_string());
    Ok((r.render(), EXIT_SUCCESS))
}

fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Holds => EXIT_SUCCESS,
        Outcome::Fails => EXIT_FAILS,
        Outcome::Undecided => EXIT_UNDECIDED,
    }
}

fn completeness_verdict(c: Completeness, finite_length: Option<f64>) -> Verdict {
    const P: &str = "metric completeness";
    match c {
        Completeness::Complete { heuristic, partial_sum } => match (partial_sum, finite_length) {
            (Some(s), _) => Verdict::holds(
                P,
                Witness::Series {
                    partial_sum: s,
                    terms: 0,
                    certified: !heuristic,
                },
                heuristic,
            ),
            (None, total) => Verdict::holds(P, Witness::Constant(total.unwrap_or(f64::INFINITY)), heuristic)
                .note("finite graphs are complete; the witness is the total length"),
        },
        Completeness::Incomplete {
            heuristic,
            ray_length,
            ray_prefix,
        } => Verdict::fails(
            P,
            Witness::Ray {
                length: ray_length,
                prefix: ray_prefix,
            },
            heuristic,
        ),
        Completeness::Undecided {
            partial_sum,
            generations,
        } => Verdict::undecided(
            P,
            Witness::Series {
                partial_sum,
                terms: generations,
                certified: false,
            },
        ),
    }
}

fn analyze(
    path: &PathBuf,
    check: Check,
    vertex_label: Option<&str>,
    relative_to: &str,
    target: Option<&str>,
    scale: Scale,
) -> CommandResult {
    let doc = load(path)?;
    let mut r = Report::new();
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let spherical = || {
        doc.spherical()
            .ok_or_else(|| "this check needs a [spherical] section".to_string())
    };
    let opts = AnalysisOptions::default();
    let verdict = match check {
        Check::Recurrence => {
            r.line("command", "analyze recurrence");
            Some(recurrence_test(spherical()?, &opts).map_err(|e| err(&e))?)
        }
        Check::StochasticCompleteness => {
            r.line("command", "analyze stochastic-completeness");
            Some(stochastic_completeness_test(spherical()?, &opts).map_err(|e| err(&e))?)
        }
        Check::Completeness => {
            r.line("command", format!("analyze completeness scale {scale:?}"));
            if let Some(s) = doc.spherical() {
                let c = completeness_check(s, scale, &SeriesOptions::default()).map_err(|e| err(&e))?;
                Some(completeness_verdict(c, None))
            } else {
                let g = doc.graph().map_err(|e| err(&e))?;
                let total = g.edge_ids().map(|e| g.edge_length(e, scale)).sum();
                let c = completeness_check(&g, scale, &SeriesOptions::default()).map_err(|e| err(&e))?;
                Some(completeness_verdict(c, Some(total)))
            }
        }
        Check::Sobolev | Check::EBounded | Check::Capacity | Check::Resistance => {
            let g = doc.graph().map_err(|e| err(&e))?;
            r.derived_weights(&g, &edge_ids(&doc));
            match check {
                Check::Sobolev => {
                    r.line("command", "analyze sobolev");
                    Some(sobolev_check(&g).map_err(|e| err(&e))?)
                }
                Check::EBounded => {
                    r.line("command", "analyze e-bounded");
                    Some(e_boundedness_check(&g).map_err(|e| err(&e))?)
                }
                Check::Capacity => {
                    let label = vertex_label.ok_or("capacity needs --vertex")?;
                    let x = vertex(&g, label)?;
                    let set: BTreeSet<VertexId> = match relative_to {
                        "all-neighbors" => g.incident(x).iter().map(|i| i.other).collect(),
                        "support" => g.support().clone(),
                        "none" => BTreeSet::new(),
                        list => list
                            .split(',')
                            .map(|l| vertex(&g, l.trim()))
                            .collect::<Result<_, _>>()?,
                    };
                    let c = capacity(&g, x, &set).map_err(|e| err(&e))?;
                    r.line("command", format!("analyze capacity vertex {label} relative-to {relative_to}"));
                    r.line("value", format!("capacity {}", num(c.value)));
                    r.line("value", format!("separated {}", c.separated));
                    r.kv("capacity", num(c.value));
                    r.kv("separated", c.separated.to_string());
                    None
                }
                _ => {
                    let x = vertex(&g, vertex_label.ok_or("resistance needs --vertex")?)?;
                    let y = vertex(&g, target.ok_or("resistance needs --target")?)?;
                    let value = resistance(&g, x, y).map_err(|e| err(&e))?;
                    r.line(
                        "command",
                        format!("analyze resistance vertex {} target {}", g.label(x), g.label(y)),
                    );
                    r.line("value", format!("resistance {}", num(value)));
                    r.kv("resistance", num(value));
                    None
                }
            }
        }
    };
    r.kv("command", "analyze");
    let code = match &verdict {
        Some(v) => {
            r.verdict(v);
            let code = exit_code(v.outcome);
            r.kv("status", v.outcome.to_string());
            code
        }
        None => {
            r.kv("status", "success");
            EXIT_SUCCESS
        }
    };
    r.kv("exit_code", code.to_string());
    Ok((r.render(), code))
}

fn transform(path: &PathBuf, to: Target) -> CommandResult {
    let doc = load(path)?;
    let g = doc.graph().map_err(|e| e.to_string())?;
    let (h, t, name) = match to {
        Target::Canonical => to_canonical(&g).map(|(h, t)| (h, t, "canonical")),
        Target::Intrinsic => to_intrinsic(&g).map(|(h, t)| (h, t, "intrinsic")),
        Target::UnitLengths => to_unit_lengths(&g).map(|(h, t)| (h, t, "unit-lengths")),
    }
    .map_err(|e| e.to_string())?;
    let ids = edge_ids(&doc);
    // Profiles live in intrinsic coordinates, which the transform keeps,
    // so quantum, spherical and function sections carry over unchanged.
    let mut out = GraphDocument::from_graph_with_ids(&h, &ids);
    out.options = doc.options;
    out.quantum = doc.quantum.clone();
    out.spherical = doc.spherical.clone();
    out.functions = doc.functions.clone();
    let mut r = Report::new();
    r.derived_weights(&h, &ids);
    r.kv("command", "transform");
    r.kv("target", name);
    r.kv("identity", t.is_identity().to_string());
    r.kv("status", "success");
    r.kv("exit_code", EXIT_SUCCESS.to_string());
    Ok((format!("{}{}", write_graph(&out), r.render()), EXIT_SUCCESS))
}

fn cut(path: &PathBuf, seed: u64) -> CommandResult {
    let doc = load(path)?;
    let qg = doc.quantum_graph().map_err(|e| e.to_string())?;
    let c = cut_quantum(&qg, seed).map_err(|e| e.to_string())?;
    let ids = edge_ids(&doc);
    let out = GraphDocument::from_graph_with_ids(&c.graph, &ids);
    let mut r = Report::new();
    r.derived_weights(&c.graph, &ids);
    for (i, o) in c.origin.iter().enumerate() {
        let line = match o {
            CutOrigin::Block { vertex, block } => {
                format!("{} block {} {}", c.graph.label(VertexId(i)), qg.graph.label(*vertex), block + 1)
            }
            CutOrigin::Free { vertex, slot } => {
                format!("{} free {} {}", c.graph.label(VertexId(i)), qg.graph.label(*vertex), slot)
            }
        };
        r.line("origin", line);
    }
    let cert = &c.certificate;
    r.line("certificate", format!("samples {}", cert.samples));
    r.line("certificate", format!("form_defect {}", num(cert.form_defect)));
    r.line("certificate", format!("l2_defect {}", num(cert.l2_defect)));
    r.line("certificate", format!("sup_defect {}", num(cert.sup_defect)));
    r.kv("command", "cut-quantum");
    r.kv("vertices", c.graph.vertex_count().to_string());
    r.kv("max_defect", num(cert.max_defect()));
    r.kv("status", "success");
    r.kv("exit_code", EXIT_SUCCESS.to_string());
    Ok((format!("{}{}", write_graph(&out), r.render()), EXIT_SUCCESS))
}

fn info(path: &PathBuf) -> CommandResult {
    let doc = load(path)?;
    let mut r = Report::new();
    r.kv("command", "info");
    if doc.has_graph() {
        let g = doc.graph().map_err(|e| e.to_string())?;
        let ids = edge_ids(&doc);
        r.derived_weights(&g, &ids);
        let labels = |s: &mut dyn Iterator<Item = VertexId>| s.map(|v| g.label(v).to_string()).collect::<Vec<_>>().join(" ");
        r.line("graph", format!("vertices {}", g.vertex_count()));
        r.line("graph", format!("edges {}", g.edge_count()));
        r.line("graph", format!("irreducible {}", g.is_irreducible()));
        r.line("graph", format!("edge_connected {}", g.is_edge_connected()));
        r.line("graph", format!("support {}", labels(&mut g.support().iter().copied())));
        r.line("graph", format!("clamped {}", labels(&mut g.clamped().iter().copied())));
        let violations: Vec<&str> = g.assumption_violations().iter().map(|e: &EdgeId| ids[e.0].as_str()).collect();
        r.line("graph", format!("assumption_violations {}", violations.join(" ")));
        for x in g.vertices() {
            r.line("graph", format!("degree {} {}", g.label(x), g.degree(x)));
        }
        r.kv("irreducible", g.is_irreducible().to_string());
        r.kv("support_size", g.support().len().to_string());
        if !doc.quantum.is_empty() {
            let qg = doc.quantum_graph().map_err(|e| e.to_string())?;
            let q = validate_quantum(&qg).map_err(|e| e.to_string())?;
            r.line("quantum", format!("blocks {}", q.blocks));
            r.line("quantum", format!("free_slots {}", q.free_slots));
            r.line("quantum", format!("sup_norm {}", num(q.sup_norm)));
        }
    }
    if let Some(s) = doc.spherical() {
        r.line("spheres", "n length weight in out sphere_size killing outward_jump");
        for gen in s.generation_table(8).map_err(|e| e.to_string())? {
            r.line(
                "spheres",
                format!(
                    "{} {} {} {} {} {} {} {}",
                    gen.index,
                    num(gen.length),
                    num(gen.weight),
                    gen.in_degree,
                    gen.out_degree,
                    num(gen.sphere_size),
                    num(gen.killing),
                    num(gen.outward_jump)
                ),
            );
        }
    }
    r.kv("status", "success");
    r.kv("exit_code", EXIT_SUCCESS.to_string());
    Ok((r.render(), EXIT_SUCCESS))
}
