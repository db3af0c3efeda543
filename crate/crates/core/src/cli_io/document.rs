//! The graph document: a line-oriented text format with section headers.
//!
//! ```text
//! # comment
//! [options]
//! assumption report          # report | enforce | subdivide
//! allow_reducible false
//! split_multi_edges false
//! [vertices]
//! o x
//! [edges]
//! # id head tail l a b
//! e1 o x 1 1 1
//! [jumps]
//! o x 0.5
//! [killings]
//! x 2
//! [clamped]
//! x
//! [quantum]
//! vertex o
//! blocks 1 2 | 3
//! row 0 0
//! row 0 0
//! [spherical]
//! root_degree 2
//! length geometric 1 0.5
//! certificate parabolicity diverges
//! [functions]
//! e1 bump 1
//! ```
//!
//! Sequences are `const c`, `geometric first ratio`, `harmonic c`,
//! `power coef exponent` or `table v1 v2 …`. Function presets are
//! `constant c`, `bump c` (`c·sin²(πt/l)`), `linear a b` and
//! `samples v0 … vm` on a uniform intrinsic grid. Report sections (see
//! [`REPORT_SECTIONS`]) are skipped when reading, so command output that
//! starts with a document can be read back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::edge_functions::{EdgeFunction, EdgeProfile, SampledProfile};
use crate::graph_model::{
    AssumptionPolicy, BuildOptions, DiscreteGraph, DiscretePart, EdgeId, EdgeWeights, GraphError, Scale, Sequence,
    SeriesCertificate, SeriesKind, SphericalError, SphericalSpec, VertexId, WeightedMetricGraph,
};
use super::report::REPORT_SECTIONS;
use crate::quantum::{
    validate_quantum, QuantumError, QuantumGraph, StoneanSublattice, VertexCondition, VertexConditionOperator,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: {field}: {message}")]
    Schema { line: usize, field: String, message: String },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error("invalid quantum conditions: {0}")]
    Quantum(#[from] QuantumError),
    #[error("invalid spherical data: {0}")]
    Spherical(#[from] SphericalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub id: String,
    pub head: String,
    pub tail: String,
    pub length: f64,
    pub measure: f64,
    pub ellipticity: f64,
}

/// Conditions at one vertex; `operator` is the row list of `L_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRecord {
    pub vertex: String,
    pub blocks: Vec<Vec<usize>>,
    pub operator: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionData {
    Constant(f64),
    Bump(f64),
    Linear(f64, f64),
    Samples(Vec<f64>),
}

impl FunctionData {
    /// Value at intrinsic offset `t` of an edge of intrinsic length `l`.
    /// Sampled data are interpolated linearly.
    pub fn eval(&self, l: f64, t: f64) -> f64 {
        match self {
            FunctionData::Constant(c) => *c,
            FunctionData::Bump(c) => c * (std::f64::consts::PI * t / l).sin().powi(2),
            FunctionData::Linear(a, b) => a + (b - a) * t / l,
            FunctionData::Samples(v) => SampledProfile::new(l, v.clone()).eval(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionRecord {
    pub edge: String,
    pub data: FunctionData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DocumentOptions {
    pub assumption: AssumptionPolicy,
    pub split_multi_edges: bool,
    pub allow_reducible: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphDocument {
    pub options: DocumentOptions,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub jumps: Vec<(String, String, f64)>,
    pub killings: Vec<(String, f64)>,
    pub clamped: Vec<String>,
    pub quantum: Vec<QuantumRecord>,
    pub spherical: Option<SphericalSpec>,
    pub functions: Vec<FunctionRecord>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Options,
    Vertices,
    Edges,
    Jumps,
    Killings,
    Clamped,
    Quantum,
    Spherical,
    Functions,
    Skipped,
}

struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    column: line[..s].chars().count() + 1,
                    text: &line[s..i],
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            column: line[..s].chars().count() + 1,
            text: &line[s..],
        });
    }
    out
}

struct Parser {
    line: usize,
}

impl Parser {
    fn parse_error(&self, column: usize, message: impl Into<String>) -> DocumentError {
        DocumentError::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn schema(&self, field: &str, message: impl Into<String>) -> DocumentError {
        DocumentError::Schema {
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn number(&self, t: &Token) -> Result<f64, DocumentError> {
        t.text
            .parse::<f64>()
            .map_err(|_| self.parse_error(t.column, format!("expected a number, found `{}`", t.text)))
    }

    fn integer(&self, t: &Token) -> Result<usize, DocumentError> {
        t.text
            .parse::<usize>()
            .map_err(|_| self.parse_error(t.column, format!("expected a nonnegative integer, found `{}`", t.text)))
    }

    fn boolean(&self, t: &Token) -> Result<bool, DocumentError> {
        match t.text {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.parse_error(t.column, format!("expected true or false, found `{other}`"))),
        }
    }

    /// Exactly `n` tokens.
    fn arity(&self, toks: &[Token], n: usize, what: &str) -> Result<(), DocumentError> {
        if toks.len() == n {
            return Ok(());
        }
        let column = toks.get(n).or(toks.last()).map_or(1, |t| t.column);
        Err(self.parse_error(column, format!("{what} takes {} values, found {}", n - 1, toks.len() - 1)))
    }

    fn sequence(&self, toks: &[Token]) -> Result<Sequence, DocumentError> {
        let kind = &toks[0];
        let args = &toks[1..];
        let need = |n: usize| -> Result<Vec<f64>, DocumentError> {
            if args.len() != n {
                let column = args.get(n).or(args.last()).map_or(kind.column, |t| t.column);
                return Err(self.parse_error(column, format!("`{}` takes {n} values", kind.text)));
            }
            args.iter().map(|t| self.number(t)).collect()
        };
        Ok(match kind.text {
            "const" => Sequence::Const(need(1)?[0]),
            "geometric" => {
                let v = need(2)?;
                Sequence::Geometric { first: v[0], ratio: v[1] }
            }
            "harmonic" => Sequence::Harmonic(need(1)?[0]),
            "power" => {
                let v = need(2)?;
                Sequence::Power { coef: v[0], exponent: v[1] }
            }
            "table" => {
                if args.is_empty() {
                    return Err(self.parse_error(kind.column, "`table` needs at least one value"));
                }
                Sequence::Table(args.iter().map(|t| self.number(t)).collect::<Result<_, _>>()?)
            }
            other => return Err(self.parse_error(kind.column, format!("unknown sequence kind `{other}`"))),
        })
    }
}

fn section_named(name: &str) -> Option<Section> {
    Some(match name {
        "options" => Section::Options,
        "vertices" => Section::Vertices,
        "edges" => Section::Edges,
        "jumps" => Section::Jumps,
        "killings" => Section::Killings,
        "clamped" => Section::Clamped,
        "quantum" => Section::Quantum,
        "spherical" => Section::Spherical,
        "functions" => Section::Functions,
        n if REPORT_SECTIONS.contains(&n) => Section::Skipped,
        _ => return None,
    })
}

/// Parse and validate a document. Graph, quantum and spherical sections
/// are checked by building the corresponding objects.
pub fn parse_graph(text: &str) -> Result<GraphDocument, DocumentError> {
    let doc = parse_unchecked(text)?;
    doc.validate()?;
    Ok(doc)
}

fn parse_unchecked(text: &str) -> Result<GraphDocument, DocumentError> {
    let mut doc = GraphDocument::default();
    let mut p = Parser { line: 0 };
    let mut section: Option<Section> = None;
    let mut spherical: Option<SphericalSpec> = None;
    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }
        let first = &toks[0];
        if first.text.starts_with('[') {
            let joined = content.trim();
            if !joined.ends_with(']') {
                return Err(p.parse_error(first.column, "unterminated section header"));
            }
            let name = joined[1..joined.len() - 1].trim();
            section = Some(
                section_named(name).ok_or_else(|| p.parse_error(first.column + 1, format!("unknown section `{name}`")))?,
            );
            if section == Some(Section::Spherical) && spherical.is_none() {
                spherical = Some(SphericalSpec::half_line(Sequence::Const(1.0)));
            }
            continue;
        }
        let Some(sec) = section else {
            return Err(p.parse_error(first.column, "content before the first section header"));
        };
        match sec {
            Section::Skipped => {}
            Section::Options => {
                p.arity(&toks, 2, first.text)?;
                match first.text {
                    "assumption" => {
                        doc.options.assumption = match toks[1].text {
                            "report" => AssumptionPolicy::Report,
                            "enforce" => AssumptionPolicy::Enforce,
                            "subdivide" => AssumptionPolicy::Subdivide,
                            other => return Err(p.parse_error(toks[1].column, format!("unknown policy `{other}`"))),
                        }
                    }
                    "allow_reducible" => doc.options.allow_reducible = p.boolean(&toks[1])?,
                    "split_multi_edges" => doc.options.split_multi_edges = p.boolean(&toks[1])?,
                    other => return Err(p.parse_error(first.column, format!("unknown option `{other}`"))),
                }
            }
            Section::Vertices => {
                for t in &toks {
                    if doc.vertices.iter().any(|v| v == t.text) {
                        return Err(p.schema("vertices", format!("duplicate vertex {}", t.text)));
                    }
                    doc.vertices.push(t.text.to_string());
                }
            }
            Section::Edges => {
                p.arity(&toks, 6, "an edge")?;
                if doc.edges.iter().any(|e| e.id == first.text) {
                    return Err(p.schema("edges", format!("duplicate edge id {}", first.text)));
                }
                for t in &toks[1..3] {
                    known_vertex(&p, &doc, "edges", t.text)?;
                }
                doc.edges.push(EdgeRecord {
                    id: first.text.to_string(),
                    head: toks[1].text.to_string(),
                    tail: toks[2].text.to_string(),
                    length: p.number(&toks[3])?,
                    measure: p.number(&toks[4])?,
                    ellipticity: p.number(&toks[5])?,
                });
            }
            Section::Jumps => {
                p.arity(&toks, 3, "a jump")?;
                known_vertex(&p, &doc, "jumps", toks[0].text)?;
                known_vertex(&p, &doc, "jumps", toks[1].text)?;
                let w = p.number(&toks[2])?;
                doc.jumps.push((toks[0].text.to_string(), toks[1].text.to_string(), w));
            }
            Section::Killings => {
                p.arity(&toks, 2, "a killing")?;
                known_vertex(&p, &doc, "killings", first.text)?;
                doc.killings.push((first.text.to_string(), p.number(&toks[1])?));
            }
            Section::Clamped => {
                for t in &toks {
                    known_vertex(&p, &doc, "clamped", t.text)?;
                    doc.clamped.push(t.text.to_string());
                }
            }
            Section::Quantum => match first.text {
                "vertex" => {
                    p.arity(&toks, 2, "vertex")?;
                    known_vertex(&p, &doc, "quantum", toks[1].text)?;
                    if doc.quantum.iter().any(|q| q.vertex == toks[1].text) {
                        return Err(p.schema("quantum", format!("conditions for {} given twice", toks[1].text)));
                    }
                    doc.quantum.push(QuantumRecord {
                        vertex: toks[1].text.to_string(),
                        blocks: Vec::new(),
                        operator: Vec::new(),
                    });
                }
                "blocks" | "row" => {
                    let Some(rec) = doc.quantum.last_mut() else {
                        return Err(p.schema("quantum", format!("`{}` before any `vertex` line", first.text)));
                    };
                    if first.text == "row" {
                        rec.operator.push(toks[1..].iter().map(|t| p.number(t)).collect::<Result<_, _>>()?);
                    } else {
                        let mut blocks = vec![Vec::new()];
                        for t in &toks[1..] {
                            if t.text == "|" {
                                blocks.push(Vec::new());
                            } else {
                                blocks.last_mut().unwrap().push(p.integer(t)?);
                            }
                        }
                        if blocks.len() == 1 && blocks[0].is_empty() {
                            blocks.clear();
                        }
                        if blocks.iter().any(Vec::is_empty) {
                            return Err(p.schema("quantum", "empty block"));
                        }
                        rec.blocks = blocks;
                    }
                }
                other => return Err(p.parse_error(first.column, format!("unknown quantum entry `{other}`"))),
            },
            Section::Spherical => {
                let spec = spherical.as_mut().expect("created with the section");
                let args = &toks[1..];
                if args.is_empty() && first.text != "certificate" {
                    return Err(p.parse_error(first.column, format!("`{}` needs a value", first.text)));
                }
                match first.text {
                    "root_degree" => {
                        p.arity(&toks, 2, "root_degree")?;
                        spec.root_degree = p.integer(&toks[1])?;
                    }
                    "length" => spec.length = p.sequence(args)?,
                    "weight" => spec.weight = p.sequence(args)?,
                    "out_degree" => spec.out_degree = p.sequence(args)?,
                    "in_degree" => spec.in_degree = p.sequence(args)?,
                    "killing" => spec.killing = p.sequence(args)?,
                    "outward_jump" => spec.outward_jump = p.sequence(args)?,
                    "certificate" => {
                        p.arity(&toks, 3, "certificate")?;
                        let kind = match toks[1].text {
                            "parabolicity" => SeriesKind::Parabolicity,
                            "length-given" => SeriesKind::Length(Scale::Given),
                            "length-canonical" => SeriesKind::Length(Scale::Canonical),
                            "length-intrinsic" => SeriesKind::Length(Scale::Intrinsic),
                            other => {
                                return Err(p.parse_error(toks[1].column, format!("unknown series `{other}`")))
                            }
                        };
                        let cert = match toks[2].text {
                            "diverges" => SeriesCertificate::Diverges,
                            "converges" => SeriesCertificate::Converges,
                            other => {
                                return Err(p.parse_error(toks[2].column, format!("unknown certificate `{other}`")))
                            }
                        };
                        *spec = spec.clone().with_certificate(kind, cert);
                    }
                    other => return Err(p.parse_error(first.column, format!("unknown spherical key `{other}`"))),
                }
            }
            Section::Functions => {
                if toks.len() < 2 {
                    return Err(p.parse_error(first.column, "a function line needs an edge id and a preset"));
                }
                if !doc.edges.iter().any(|e| e.id == first.text) {
                    return Err(p.schema("functions", format!("unknown edge {}", first.text)));
                }
                if doc.functions.iter().any(|f| f.edge == first.text) {
                    return Err(p.schema("functions", format!("edge {} given twice", first.text)));
                }
                let kind = &toks[1];
                let data = match kind.text {
                    "constant" => {
                        p.arity(&toks, 3, "constant")?;
                        FunctionData::Constant(p.number(&toks[2])?)
                    }
                    "bump" => {
                        p.arity(&toks, 3, "bump")?;
                        FunctionData::Bump(p.number(&toks[2])?)
                    }
                    "linear" => {
                        p.arity(&toks, 4, "linear")?;
                        FunctionData::Linear(p.number(&toks[2])?, p.number(&toks[3])?)
                    }
                    "samples" => {
                        let v: Vec<f64> = toks[2..].iter().map(|t| p.number(t)).collect::<Result<_, _>>()?;
                        if v.len() < 3 || (v.len() - 1) % 2 != 0 {
                            return Err(p.schema(
                                "functions",
                                format!("edge {} needs an odd number of at least 3 samples, found {}", first.text, v.len()),
                            ));
                        }
                        FunctionData::Samples(v)
                    }
                    other => return Err(p.parse_error(kind.column, format!("unknown function preset `{other}`"))),
                };
                doc.functions.push(FunctionRecord {
                    edge: first.text.to_string(),
                    data,
                });
            }
        }
    }
    doc.spherical = spherical;
    Ok(doc)
}

fn known_vertex(p: &Parser, doc: &GraphDocument, field: &str, v: &str) -> Result<(), DocumentError> {
    if doc.vertices.iter().any(|x| x == v) {
        Ok(())
    } else {
        Err(p.schema(field, format!("unknown vertex {v}")))
    }
}

/// Shortest decimal text that reads back to the same double.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_sequence(out: &mut String, key: &str, s: &Sequence) {
    let f = format_number;
    let _ = match s {
        Sequence::Const(c) => writeln!(out, "{key} const {}", f(*c)),
        Sequence::Geometric { first, ratio } => writeln!(out, "{key} geometric {} {}", f(*first), f(*ratio)),
        Sequence::Harmonic(c) => writeln!(out, "{key} harmonic {}", f(*c)),
        Sequence::Power { coef, exponent } => writeln!(out, "{key} power {} {}", f(*coef), f(*exponent)),
        Sequence::Table(v) => writeln!(
            out,
            "{key} table {}",
            v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" ")
        ),
    };
}

/// Canonical text of a document.
pub fn write_graph(doc: &GraphDocument) -> String {
    let f = format_number;
    let mut out = String::new();
    let o = &doc.options;
    if *o != DocumentOptions::default() {
        out.push_str("[options]\n");
        let policy = match o.assumption {
            AssumptionPolicy::Report => "report",
            AssumptionPolicy::Enforce => "enforce",
            AssumptionPolicy::Subdivide => "subdivide",
        };
        let _ = writeln!(out, "assumption {policy}");
        let _ = writeln!(out, "allow_reducible {}", o.allow_reducible);
        let _ = writeln!(out, "split_multi_edges {}", o.split_multi_edges);
    }
    if !doc.vertices.is_empty() {
        out.push_str("[vertices]\n");
        for v in &doc.vertices {
            let _ = writeln!(out, "{v}");
        }
    }
    if !doc.edges.is_empty() {
        out.push_str("[edges]\n");
        for e in &doc.edges {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                e.id,
                e.head,
                e.tail,
                f(e.length),
                f(e.measure),
                f(e.ellipticity)
            );
        }
    }
    if !doc.jumps.is_empty() {
        out.push_str("[jumps]\n");
        for (x, y, w) in &doc.jumps {
            let _ = writeln!(out, "{x} {y} {}", f(*w));
        }
    }
    if !doc.killings.is_empty() {
        out.push_str("[killings]\n");
        for (x, k) in &doc.killings {
            let _ = writeln!(out, "{x} {}", f(*k));
        }
    }
    if !doc.clamped.is_empty() {
        out.push_str("[clamped]\n");
        for x in &doc.clamped {
            let _ = writeln!(out, "{x}");
        }
    }
    if !doc.quantum.is_empty() {
        out.push_str("[quantum]\n");
        for q in &doc.quantum {
            let _ = writeln!(out, "vertex {}", q.vertex);
            let blocks: Vec<String> = q
                .blocks
                .iter()
                .map(|b| b.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            if blocks.is_empty() {
                out.push_str("blocks\n");
            } else {
                let _ = writeln!(out, "blocks {}", blocks.join(" | "));
            }
            for row in &q.operator {
                let _ = writeln!(out, "row {}", row.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" "));
            }
        }
    }
    if let Some(s) = &doc.spherical {
        out.push_str("[spherical]\n");
        let _ = writeln!(out, "root_degree {}", s.root_degree);
        write_sequence(&mut out, "length", &s.length);
        write_sequence(&mut out, "weight", &s.weight);
        write_sequence(&mut out, "out_degree", &s.out_degree);
        write_sequence(&mut out, "in_degree", &s.in_degree);
        write_sequence(&mut out, "killing", &s.killing);
        write_sequence(&mut out, "outward_jump", &s.outward_jump);
        for (kind, cert) in &s.certificates {
            let kind = match kind {
                SeriesKind::Parabolicity => "parabolicity",
                SeriesKind::Length(Scale::Given) => "length-given",
                SeriesKind::Length(Scale::Canonical) => "length-canonical",
                SeriesKind::Length(Scale::Intrinsic) => "length-intrinsic",
            };
            let cert = match cert {
                SeriesCertificate::Diverges => "diverges",
                SeriesCertificate::Converges => "converges",
            };
            let _ = writeln!(out, "certificate {kind} {cert}");
        }
    }
    if !doc.functions.is_empty() {
        out.push_str("[functions]\n");
        for r in &doc.functions {
            let _ = match &r.data {
                FunctionData::Constant(c) => writeln!(out, "{} constant {}", r.edge, f(*c)),
                FunctionData::Bump(c) => writeln!(out, "{} bump {}", r.edge, f(*c)),
                FunctionData::Linear(a, b) => writeln!(out, "{} linear {} {}", r.edge, f(*a), f(*b)),
                FunctionData::Samples(v) => writeln!(
                    out,
                    "{} samples {}",
                    r.edge,
                    v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" ")
                ),
            };
        }
    }
    out
}

impl GraphDocument {
    /// Document describing `g`; edge ids are `e1, e2, …`.
    pub fn from_graph(g: &WeightedMetricGraph) -> Self {
        let ids: Vec<String> = (1..=g.edge_count()).map(|i| format!("e{i}")).collect();
        Self::from_graph_with_ids(g, &ids)
    }

    pub fn from_graph_with_ids(g: &WeightedMetricGraph, ids: &[String]) -> Self {
        let w = g.weights();
        let q = g.discrete_part();
        let label = |v: VertexId| g.label(v).to_string();
        GraphDocument {
            options: DocumentOptions {
                allow_reducible: !g.is_irreducible(),
                ..DocumentOptions::default()
            },
            vertices: g.vertices().map(label).collect(),
            edges: g
                .edge_ids()
                .map(|e| {
                    let (h, t) = g.endpoints(e);
                    EdgeRecord {
                        id: ids[e.0].clone(),
                        head: label(h),
                        tail: label(t),
                        length: w.length[e.0],
                        measure: w.measure[e.0],
                        ellipticity: w.ellipticity[e.0],
                    }
                })
                .collect(),
            jumps: q.jumps().map(|(x, y, j)| (label(x), label(y), j)).collect(),
            killings: q.killings().map(|(x, k)| (label(x), k)).collect(),
            clamped: g.clamped().iter().map(|&v| label(v)).collect(),
            ..GraphDocument::default()
        }
    }

    pub fn has_graph(&self) -> bool {
        !self.edges.is_empty()
    }

    fn vertex_id(&self, label: &str) -> VertexId {
        VertexId(self.vertices.iter().position(|v| v == label).expect("checked while parsing"))
    }

    pub fn edge_id(&self, id: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.id == id).map(EdgeId)
    }

    /// The weighted metric graph of the `[vertices]`, `[edges]`,
    /// `[jumps]`, `[killings]` and `[clamped]` sections.
    pub fn graph(&self) -> Result<WeightedMetricGraph, DocumentError> {
        if self.edges.is_empty() {
            return Err(DocumentError::Schema {
                line: 0,
                field: "edges".into(),
                message: "the document has no edges".into(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (self.vertex_id(&e.head), self.vertex_id(&e.tail)))
            .collect();
        let triples: Vec<(f64, f64, f64)> = self.edges.iter().map(|e| (e.length, e.measure, e.ellipticity)).collect();
        let mut q = DiscretePart::new();
        for (x, y, w) in &self.jumps {
            q.set_jump(self.vertex_id(x), self.vertex_id(y), *w);
        }
        for (x, k) in &self.killings {
            q.set_killing(self.vertex_id(x), *k);
        }
        let opts = BuildOptions {
            assumption: self.options.assumption,
            split_multi_edges: self.options.split_multi_edges,
            allow_reducible: self.options.allow_reducible,
            clamped: self.clamped.iter().map(|x| self.vertex_id(x)).collect::<BTreeSet<_>>(),
        };
        Ok(WeightedMetricGraph::build(
            DiscreteGraph::new(self.vertices.clone(), edges),
            EdgeWeights::from_triples(&triples),
            q,
            &opts,
        )?)
    }

    /// The graph with the `[quantum]` conditions; unlisted vertices get
    /// Kirchhoff conditions.
    pub fn quantum_graph(&self) -> Result<QuantumGraph, DocumentError> {
        let graph = self.graph()?;
        let mut qg = QuantumGraph::kirchhoff(graph);
        for rec in &self.quantum {
            let x = self.vertex_id(&rec.vertex);
            let m = rec.operator.len();
            if let Some(row) = rec.operator.iter().find(|r| r.len() != m) {
                return Err(DocumentError::Schema {
                    line: 0,
                    field: "quantum".into(),
                    message: format!("vertex {}: operator row of length {} in a {m}-row matrix", rec.vertex, row.len()),
                });
            }
            qg.conditions[x.0] = VertexCondition {
                sublattice: StoneanSublattice {
                    blocks: rec.blocks.clone(),
                },
                operator: VertexConditionOperator {
                    matrix: DMatrix::from_fn(m, m, |i, j| rec.operator[i][j]),
                },
            };
        }
        validate_quantum(&qg)?;
        Ok(qg)
    }

    pub fn spherical(&self) -> Option<&SphericalSpec> {
        self.spherical.as_ref()
    }

    /// The `[functions]` section as a function on `g`, zero on unlisted edges.
    /// Presets are sampled on `cells` cells, or the default grid of each edge.
    pub fn function(&self, g: &WeightedMetricGraph, cells: Option<usize>) -> EdgeFunction {
        let data: BTreeMap<usize, &FunctionData> = self
            .functions
            .iter()
            .filter_map(|r| self.edge_id(&r.edge).map(|e| (e.0, &r.data)))
            .collect();
        let mut u = EdgeFunction::from_fn(g, cells, |e, t| {
            data.get(&e.0).map_or(0.0, |d| d.eval(g.intrinsic_length(e), t))
        });
        for (&e, d) in &data {
            if let FunctionData::Samples(v) = d {
                u.profiles[e] = EdgeProfile::Sampled(SampledProfile::new(g.intrinsic_length(EdgeId(e)), v.clone()));
            }
        }
        u
    }

    fn validate(&self) -> Result<(), DocumentError> {
        if self.has_graph() {
            if self.quantum.is_empty() {
                self.graph()?;
            } else {
                self.quantum_graph()?;
            }
        }
        if let Some(s) = &self.spherical {
            s.generation_table(8)?;
        }
        Ok(())
    }
}
