//! Finite weighted metric graphs.
//!
//! A [`WeightedMetricGraph`] is a simple, locally finite discrete graph whose
//! edges carry a length `l`, a measure weight `a` and an ellipticity weight
//! `b`, together with an optional [`DiscretePart`] (jump and killing weights).
//! On construction the canonical scale `(ν, l_c)` and the intrinsic scale
//! `(ω, l_i)` are derived for every edge:
//!
//! ```text
//! ν = a·b        l_c = l / b
//! ω = √(a·b)     l_i = l·√(a / b)
//! ```
//!
//! Both are invariant under length transformations, which is why every
//! operator in this crate works in intrinsic coordinates.

mod distance;
mod spherical;

pub use distance::{
    distances_from, geodesic, path_distance, vertex_diameter, Geodesic, Point, Scale,
};
pub use spherical::{
    completeness_check, series_test, Completeness, CompletenessInput, Generation, RadialPath,
    Sequence, SeriesCertificate, SeriesKind, SeriesOptions, SeriesOutcome, SphericalError,
    SphericalSpec, Truncation,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Index of a vertex in a [`DiscreteGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Index of an edge in a [`DiscreteGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {edge} is a loop at vertex {vertex}")]
    LoopEdge { edge: usize, vertex: String },
    #[error("edge {edge} duplicates an earlier edge between {head} and {tail}")]
    DuplicateEdge {
        edge: usize,
        head: String,
        tail: String,
    },
    #[error("{field} of edge {edge} must be positive and finite, got {value}")]
    NonpositiveWeight {
        edge: usize,
        field: &'static str,
        value: f64,
    },
    #[error("invalid discrete part at {location}: {reason}")]
    InvalidDiscretePart { location: String, reason: String },
    #[error("graph is disconnected and not j-connected: the form is reducible")]
    Reducible,
    #[error("vertex {0} has no incident edge")]
    IsolatedVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("offset {offset} outside [0, {length}] on edge {edge}")]
    OffsetOutOfRange { edge: usize, offset: f64, length: f64 },
    #[error("points lie in different connected components")]
    UnreachablePoint,
    #[error("edge {edge} violates l_i(e) <= 1 (l_i = {intrinsic_length})")]
    AssumptionViolated { edge: usize, intrinsic_length: f64 },
    #[error("edge weight table has {got} entries, graph has {expected} edges")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error("duplicate vertex label {0}")]
    DuplicateVertex(String),
}

/// Which end of an oriented edge a vertex sits at. The head `∂⁺e` is the
/// `t = 0` end, the tail `∂⁻e` the `t = l(e)` end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    Head,
    Tail,
}

/// Combinatorial graph with a fixed orientation of every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGraph {
    labels: Vec<String>,
    edges: Vec<(VertexId, VertexId)>,
}

impl DiscreteGraph {
    pub fn new(labels: Vec<String>, edges: Vec<(VertexId, VertexId)>) -> Self {
        DiscreteGraph { labels, edges }
    }

    /// Build from string labels; edges reference vertices by label.
    pub fn from_labels(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let labels: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), VertexId(i)).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(s.to_string()))
        };
        let edges = edges
            .iter()
            .map(|(h, t)| Ok((lookup(h)?, lookup(t)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(DiscreteGraph { labels, edges })
    }

    /// Path `0 — 1 — … — n` with `n` edges, labels `"0".."n"`.
    pub fn path(n_edges: usize) -> Self {
        let labels = (0..=n_edges).map(|i| i.to_string()).collect();
        let edges = (0..n_edges).map(|i| (VertexId(i), VertexId(i + 1))).collect();
        DiscreteGraph { labels, edges }
    }

    /// Star with center `"c"` and leaves `"1".."deg"`, edges oriented outward.
    pub fn star(degree: usize) -> Self {
        let mut labels = vec!["c".to_string()];
        labels.extend((1..=degree).map(|i| i.to_string()));
        let edges = (1..=degree).map(|i| (VertexId(0), VertexId(i))).collect();
        DiscreteGraph { labels, edges }
    }

    /// Cycle on `n` vertices.
    pub fn cycle(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges = (0..n).map(|i| (VertexId(i), VertexId((i + 1) % n))).collect();
        DiscreteGraph { labels, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(VertexId)
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.0]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.labels.len()).map(VertexId)
    }
}

/// Per-edge length, measure weight and ellipticity weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    pub length: Vec<f64>,
    pub measure: Vec<f64>,
    pub ellipticity: Vec<f64>,
}

impl EdgeWeights {
    pub fn uniform(n_edges: usize, length: f64, measure: f64, ellipticity: f64) -> Self {
        EdgeWeights {
            length: vec![length; n_edges],
            measure: vec![measure; n_edges],
            ellipticity: vec![ellipticity; n_edges],
        }
    }

    /// Weights from `(l, a, b)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Self {
        EdgeWeights {
            length: triples.iter().map(|t| t.0).collect(),
            measure: triples.iter().map(|t| t.1).collect(),
            ellipticity: triples.iter().map(|t| t.2).collect(),
        }
    }

    /// Intrinsic representation: `a = b = ω`, lengths `l_i`.
    pub fn intrinsic(lengths: &[f64], omegas: &[f64]) -> Self {
        EdgeWeights {
            length: lengths.to_vec(),
            measure: omegas.to_vec(),
            ellipticity: omegas.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.length.is_empty()
    }
}

/// Jump weights `j(x, y)` and killing weights `k(x)` of the non-local form
/// `Q(u) = ½ Σ j(x,y)(u(x) − u(y))² + Σ k(x) u(x)²`.
///
/// `j` is symmetric and stored once per unordered pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscretePart {
    jumps: BTreeMap<(VertexId, VertexId), f64>,
    killing: BTreeMap<VertexId, f64>,
}

fn ordered(x: VertexId, y: VertexId) -> (VertexId, VertexId) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl DiscretePart {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set `j(x,y) = j(y,x) = weight`.
    pub fn with_jump(mut self, x: VertexId, y: VertexId, weight: f64) -> Self {
        self.set_jump(x, y, weight);
        self
    }

    pub fn with_killing(mut self, x: VertexId, weight: f64) -> Self {
        self.set_killing(x, weight);
        self
    }

    pub fn set_jump(&mut self, x: VertexId, y: VertexId, weight: f64) {
        if weight == 0.0 {
            self.jumps.remove(&ordered(x, y));
        } else {
            self.jumps.insert(ordered(x, y), weight);
        }
    }

    pub fn set_killing(&mut self, x: VertexId, weight: f64) {
        if weight == 0.0 {
            self.killing.remove(&x);
        } else {
            self.killing.insert(x, weight);
        }
    }

    pub fn jump(&self, x: VertexId, y: VertexId) -> f64 {
        self.jumps.get(&ordered(x, y)).copied().unwrap_or(0.0)
    }

    pub fn killing(&self, x: VertexId) -> f64 {
        self.killing.get(&x).copied().unwrap_or(0.0)
    }

    /// Unordered jump pairs `(x, y, j)` with `x <= y`, in pair order.
    pub fn jumps(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.jumps.iter().map(|(&(x, y), &w)| (x, y, w))
    }

    pub fn killings(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.killing.iter().map(|(&x, &k)| (x, k))
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty() && self.killing.is_empty()
    }

    /// `Σ_y j(x, y) + k(x)`.
    pub fn total_weight(&self, x: VertexId) -> f64 {
        let jumps: f64 = self
            .jumps
            .iter()
            .filter(|((a, b), _)| *a == x || *b == x)
            .map(|(_, w)| *w)
            .sum();
        jumps + self.killing(x)
    }

    /// `supp Q = {x : k(x) > 0 or j(x, y) > 0 for some y}`.
    pub fn support(&self) -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        for (&(x, y), &w) in &self.jumps {
            if w > 0.0 {
                s.insert(x);
                s.insert(y);
            }
        }
        for (&x, &k) in &self.killing {
            if k > 0.0 {
                s.insert(x);
            }
        }
        s
    }

    fn validate(&self, n: usize, labels: &[String]) -> Result<(), GraphError> {
        let name = |v: VertexId| {
            labels
                .get(v.0)
                .cloned()
                .unwrap_or_else(|| format!("#{}", v.0))
        };
        for (&(x, y), &w) in &self.jumps {
            if x.0 >= n || y.0 >= n {
                return Err(GraphError::UnknownVertex(name(if x.0 >= n { x } else { y })));
            }
            if x == y {
                return Err(GraphError::InvalidDiscretePart {
                    location: name(x),
                    reason: "jump weight on the diagonal".into(),
                });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(GraphError::InvalidDiscretePart {
                    location: format!("{}-{}", name(x), name(y)),
                    reason: format!("jump weight {w} is not a nonnegative finite number"),
                });
            }
        }
        for (&x, &k) in &self.killing {
            if x.0 >= n {
                return Err(GraphError::UnknownVertex(name(x)));
            }
            if !(k.is_finite() && k >= 0.0) {
                return Err(GraphError::InvalidDiscretePart {
                    location: name(x),
                    reason: format!("killing weight {k} is not a nonnegative finite number"),
                });
            }
        }
        Ok(())
    }
}

/// Canonical and intrinsic scales of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScales {
    /// `ν = a·b`
    pub canonical_measure: f64,
    /// `l_c = l / b`
    pub canonical_length: f64,
    /// `ω = √(a·b)`
    pub intrinsic_weight: f64,
    /// `l_i = l·√(a / b)`
    pub intrinsic_length: f64,
}

impl EdgeScales {
    pub fn from_weights(length: f64, measure: f64, ellipticity: f64) -> Self {
        EdgeScales {
            canonical_measure: measure * ellipticity,
            canonical_length: length / ellipticity,
            intrinsic_weight: (measure * ellipticity).sqrt(),
            intrinsic_length: length * (measure / ellipticity).sqrt(),
        }
    }
}

/// How the standing assumption `ν(e)·l_c(e)² ≤ 1` (equivalently `l_i ≤ 1`)
/// is treated during construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssumptionPolicy {
    /// Record offending edges in [`WeightedMetricGraph::assumption_violations`].
    #[default]
    Report,
    /// Reject the graph.
    Enforce,
    /// Bisect offending edges until every piece satisfies the assumption.
    Subdivide,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub assumption: AssumptionPolicy,
    /// Subdivide loops and parallel edges instead of rejecting them.
    pub split_multi_edges: bool,
    /// Accept graphs that are neither connected nor j-connected.
    pub allow_reducible: bool,
    /// Vertices where functions are clamped to zero (Dirichlet ends).
    pub clamped: BTreeSet<VertexId>,
}

/// One incident edge end at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: EdgeId,
    pub end: End,
    pub other: VertexId,
}

/// A validated weighted metric graph with derived scales.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMetricGraph {
    graph: DiscreteGraph,
    weights: EdgeWeights,
    discrete: DiscretePart,
    scales: Vec<EdgeScales>,
    incidence: Vec<Vec<Incidence>>,
    support: BTreeSet<VertexId>,
    irreducible: bool,
    edge_connected: bool,
    clamped: BTreeSet<VertexId>,
    assumption_violations: Vec<EdgeId>,
}

/// Validate the inputs and assemble a [`WeightedMetricGraph`] with default
/// [`BuildOptions`].
pub fn build_metric_graph(
    g: DiscreteGraph,
    w: EdgeWeights,
    q: DiscretePart,
) -> Result<WeightedMetricGraph, GraphError> {
    WeightedMetricGraph::build(g, w, q, &BuildOptions::default())
}

impl WeightedMetricGraph {
    pub fn build(
        mut g: DiscreteGraph,
        mut w: EdgeWeights,
        q: DiscretePart,
        opts: &BuildOptions,
    ) -> Result<Self, GraphError> {
        if w.len() != g.edge_count()
            || w.measure.len() != g.edge_count()
            || w.ellipticity.len() != g.edge_count()
        {
            return Err(GraphError::WeightCountMismatch {
                expected: g.edge_count(),
                got: w.len().min(w.measure.len()).min(w.ellipticity.len()),
            });
        }
        for (i, (&h, &t)) in g.edges.iter().map(|(h, t)| (h, t)).enumerate() {
            for v in [h, t] {
                if v.0 >= g.vertex_count() {
                    return Err(GraphError::UnknownVertex(format!("#{}", v.0)));
                }
            }
            for (field, value) in [
                ("length", w.length[i]),
                ("measure weight", w.measure[i]),
                ("ellipticity weight", w.ellipticity[i]),
            ] {
                if !(value.is_finite() && value > 0.0) {
                    return Err(GraphError::NonpositiveWeight {
                        edge: i,
                        field,
                        value,
                    });
                }
            }
        }
        if opts.split_multi_edges {
            split_multi_edges(&mut g, &mut w);
        } else {
            let mut seen = BTreeSet::new();
            for (i, &(h, t)) in g.edges.iter().enumerate() {
                if h == t {
                    return Err(GraphError::LoopEdge {
                        edge: i,
                        vertex: g.label(h).to_string(),
                    });
                }
                if !seen.insert(ordered(h, t)) {
                    return Err(GraphError::DuplicateEdge {
                        edge: i,
                        head: g.label(h).to_string(),
                        tail: g.label(t).to_string(),
                    });
                }
            }
        }

        let mut violations = Vec::new();
        for i in 0..g.edge_count() {
            let s = EdgeScales::from_weights(w.length[i], w.measure[i], w.ellipticity[i]);
            if s.intrinsic_length > 1.0 {
                violations.push(EdgeId(i));
            }
        }
        match opts.assumption {
            AssumptionPolicy::Report => {}
            AssumptionPolicy::Enforce => {
                if let Some(e) = violations.first() {
                    let s = EdgeScales::from_weights(
                        w.length[e.0],
                        w.measure[e.0],
                        w.ellipticity[e.0],
                    );
                    return Err(GraphError::AssumptionViolated {
                        edge: e.0,
                        intrinsic_length: s.intrinsic_length,
                    });
                }
            }
            AssumptionPolicy::Subdivide => {
                subdivide_long_edges(&mut g, &mut w);
                violations.clear();
            }
        }

        q.validate(g.vertex_count(), &g.labels)?;
        for v in &opts.clamped {
            if v.0 >= g.vertex_count() {
                return Err(GraphError::UnknownVertex(format!("#{}", v.0)));
            }
        }

        let n = g.vertex_count();
        let mut incidence = vec![Vec::new(); n];
        for (i, &(h, t)) in g.edges.iter().enumerate() {
            incidence[h.0].push(Incidence {
                edge: EdgeId(i),
                end: End::Head,
                other: t,
            });
            incidence[t.0].push(Incidence {
                edge: EdgeId(i),
                end: End::Tail,
                other: h,
            });
        }
        if let Some(v) = (0..n).find(|&v| incidence[v].is_empty()) {
            return Err(GraphError::IsolatedVertex(g.labels[v].clone()));
        }
        let scales = (0..g.edge_count())
            .map(|i| EdgeScales::from_weights(w.length[i], w.measure[i], w.ellipticity[i]))
            .collect();

        let edge_connected = component_count(n, g.edges.iter().copied()) <= 1;
        let irreducible = edge_connected
            || component_count(
                n,
                g.edges
                    .iter()
                    .copied()
                    .chain(q.jumps().filter(|j| j.2 > 0.0).map(|j| (j.0, j.1))),
            ) <= 1;
        if !irreducible && !opts.allow_reducible {
            return Err(GraphError::Reducible);
        }
        let support = q.support();
        Ok(WeightedMetricGraph {
            graph: g,
            weights: w,
            discrete: q,
            scales,
            incidence,
            support,
            irreducible,
            edge_connected,
            clamped: opts.clamped.clone(),
            assumption_violations: violations,
        })
    }

    pub fn graph(&self) -> &DiscreteGraph {
        &self.graph
    }

    pub fn weights(&self) -> &EdgeWeights {
        &self.weights
    }

    pub fn discrete_part(&self) -> &DiscretePart {
        &self.discrete
    }

    pub fn scales(&self, e: EdgeId) -> &EdgeScales {
        &self.scales[e.0]
    }

    pub fn all_scales(&self) -> &[EdgeScales] {
        &self.scales
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        self.graph.vertices()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_count()).map(EdgeId)
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.graph.endpoints(e)
    }

    pub fn incident(&self, v: VertexId) -> &[Incidence] {
        &self.incidence[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        self.graph.label(v)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.graph.vertex_by_label(label)
    }

    /// `supp Q`.
    pub fn support(&self) -> &BTreeSet<VertexId> {
        &self.support
    }

    /// Connected through edges and jumps together.
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// Connected through edges alone.
    pub fn is_edge_connected(&self) -> bool {
        self.edge_connected
    }

    pub fn clamped(&self) -> &BTreeSet<VertexId> {
        &self.clamped
    }

    pub fn is_clamped(&self, v: VertexId) -> bool {
        self.clamped.contains(&v)
    }

    pub fn assumption_violations(&self) -> &[EdgeId] {
        &self.assumption_violations
    }

    pub fn intrinsic_length(&self, e: EdgeId) -> f64 {
        self.scales[e.0].intrinsic_length
    }

    pub fn intrinsic_weight(&self, e: EdgeId) -> f64 {
        self.scales[e.0].intrinsic_weight
    }

    /// Edge between `x` and `y`, if any.
    pub fn edge_between(&self, x: VertexId, y: VertexId) -> Option<EdgeId> {
        self.incidence[x.0]
            .iter()
            .find(|inc| inc.other == y)
            .map(|inc| inc.edge)
    }

    /// Same combinatorics and weights with a different discrete part.
    pub fn with_discrete_part(&self, q: DiscretePart) -> Result<Self, GraphError> {
        WeightedMetricGraph::build(
            self.graph.clone(),
            self.weights.clone(),
            q,
            &BuildOptions {
                allow_reducible: true,
                clamped: self.clamped.clone(),
                ..BuildOptions::default()
            },
        )
    }

    /// Same graph with a different clamped set.
    pub fn with_clamped(&self, clamped: BTreeSet<VertexId>) -> Result<Self, GraphError> {
        WeightedMetricGraph::build(
            self.graph.clone(),
            self.weights.clone(),
            self.discrete.clone(),
            &BuildOptions {
                allow_reducible: true,
                clamped,
                ..BuildOptions::default()
            },
        )
    }

    /// Same graph with replaced edge weights (lengths and measures).
    pub(crate) fn with_weights(&self, w: EdgeWeights) -> Result<Self, GraphError> {
        WeightedMetricGraph::build(
            self.graph.clone(),
            w,
            self.discrete.clone(),
            &BuildOptions {
                allow_reducible: true,
                clamped: self.clamped.clone(),
                ..BuildOptions::default()
            },
        )
    }
}

/// `M(x) = Σ_{e∼x} l_i(e)·ω(e)`, the `λ_ω`-measure of the open star of `x`.
pub fn star_measure(g: &WeightedMetricGraph, x: VertexId) -> Result<f64, GraphError> {
    if x.0 >= g.vertex_count() {
        return Err(GraphError::UnknownVertex(format!("#{}", x.0)));
    }
    Ok(g.incident(x)
        .iter()
        .map(|inc| {
            let s = g.scales(inc.edge);
            s.intrinsic_length * s.intrinsic_weight
        })
        .sum())
}

fn component_count(n: usize, edges: impl Iterator<Item = (VertexId, VertexId)>) -> usize {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a.0].push(b.0);
        adj[b.0].push(a.0);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    count
}

fn push_piece(w: &mut EdgeWeights, i: usize, length: f64) {
    w.length.push(length);
    w.measure.push(w.measure[i]);
    w.ellipticity.push(w.ellipticity[i]);
}

/// Loops are cut into thirds, later parallel copies are bisected.
fn split_multi_edges(g: &mut DiscreteGraph, w: &mut EdgeWeights) {
    let mut seen = BTreeSet::new();
    for i in 0..g.edges.len() {
        let (h, t) = g.edges[i];
        if h == t {
            let l = w.length[i] / 3.0;
            let m1 = VertexId(g.labels.len());
            g.labels.push(format!("{}~loop{}a", g.labels[h.0], i));
            let m2 = VertexId(g.labels.len());
            g.labels.push(format!("{}~loop{}b", g.labels[h.0], i));
            g.edges[i] = (h, m1);
            w.length[i] = l;
            g.edges.push((m1, m2));
            push_piece(w, i, l);
            g.edges.push((m2, h));
            push_piece(w, i, l);
            seen.insert(ordered(h, m1));
            seen.insert(ordered(m1, m2));
            seen.insert(ordered(m2, h));
        } else if !seen.insert(ordered(h, t)) {
            let l = w.length[i] / 2.0;
            let m = VertexId(g.labels.len());
            g.labels.push(format!("{}~{}#{}", g.labels[h.0], g.labels[t.0], i));
            g.edges[i] = (h, m);
            w.length[i] = l;
            g.edges.push((m, t));
            push_piece(w, i, l);
            seen.insert(ordered(h, m));
            seen.insert(ordered(m, t));
        }
    }
}

fn subdivide_long_edges(g: &mut DiscreteGraph, w: &mut EdgeWeights) {
    let mut i = 0;
    while i < g.edges.len() {
        let s = EdgeScales::from_weights(w.length[i], w.measure[i], w.ellipticity[i]);
        if s.intrinsic_length > 1.0 {
            let (h, t) = g.edges[i];
            let half = w.length[i] / 2.0;
            let m = VertexId(g.labels.len());
            g.labels.push(format!("{}~{}/{}", g.labels[h.0], g.labels[t.0], i));
            g.edges[i] = (h, m);
            w.length[i] = half;
            g.edges.push((m, t));
            push_piece(w, i, half);
            // re-check the shortened edge before moving on
            continue;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_edge() -> WeightedMetricGraph {
        build_metric_graph(
            DiscreteGraph::path(1),
            EdgeWeights::uniform(1, 1.0, 1.0, 1.0),
            DiscretePart::new(),
        )
        .unwrap()
    }

    #[test]
    fn unit_edge_scales() {
        let g = unit_edge();
        let s = g.scales(EdgeId(0));
        assert_eq!(s.canonical_measure, 1.0);
        assert_eq!(s.canonical_length, 1.0);
        assert_eq!(s.intrinsic_weight, 1.0);
        assert_eq!(s.intrinsic_length, 1.0);
        assert!(g.is_irreducible());
    }

    #[test]
    fn scales_of_heavy_edge() {
        let g = build_metric_graph(
            DiscreteGraph::path(1),
            EdgeWeights::from_triples(&[(2.0, 4.0, 1.0)]),
            DiscretePart::new(),
        )
        .unwrap();
        let s = g.scales(EdgeId(0));
        assert_eq!(s.canonical_measure, 4.0);
        assert_eq!(s.canonical_length, 2.0);
        assert_eq!(s.intrinsic_weight, 2.0);
        assert_eq!(s.intrinsic_length, 4.0);
        assert_eq!(s.intrinsic_length.powi(2), s.canonical_length.powi(2) * s.canonical_measure);
        assert_eq!(g.assumption_violations(), &[EdgeId(0)]);
    }

    #[test]
    fn j_connected_components_are_irreducible() {
        let g = DiscreteGraph::from_labels(&["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]).unwrap();
        let q = DiscretePart::new().with_jump(VertexId(1), VertexId(2), 1.0);
        let mg = build_metric_graph(g.clone(), EdgeWeights::uniform(2, 1.0, 1.0, 1.0), q).unwrap();
        assert!(mg.is_irreducible());
        assert!(!mg.is_edge_connected());
        let err = build_metric_graph(g, EdgeWeights::uniform(2, 1.0, 1.0, 1.0), DiscretePart::new());
        assert_eq!(err.unwrap_err(), GraphError::Reducible);
    }

    #[test]
    fn construction_errors() {
        let lp = DiscreteGraph::new(vec!["a".into(), "b".into()], vec![(VertexId(0), VertexId(0)), (VertexId(0), VertexId(1))]);
        assert!(matches!(
            build_metric_graph(lp, EdgeWeights::uniform(2, 1.0, 1.0, 1.0), DiscretePart::new()),
            Err(GraphError::LoopEdge { edge: 0, .. })
        ));
        let dup = DiscreteGraph::from_labels(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap();
        assert!(matches!(
            build_metric_graph(dup, EdgeWeights::uniform(2, 1.0, 1.0, 1.0), DiscretePart::new()),
            Err(GraphError::DuplicateEdge { edge: 1, .. })
        ));
        let neg = build_metric_graph(
            DiscreteGraph::path(1),
            EdgeWeights::from_triples(&[(1.0, -1.0, 1.0)]),
            DiscretePart::new(),
        );
        assert!(matches!(neg, Err(GraphError::NonpositiveWeight { field: "measure weight", .. })));
        let bad_jump = build_metric_graph(
            DiscreteGraph::path(1),
            EdgeWeights::uniform(1, 1.0, 1.0, 1.0),
            DiscretePart::new().with_jump(VertexId(0), VertexId(5), 1.0),
        );
        assert!(matches!(bad_jump, Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn multi_edges_are_split_on_request() {
        let g = DiscreteGraph::new(
            vec!["a".into(), "b".into()],
            vec![(VertexId(0), VertexId(1)), (VertexId(1), VertexId(0)), (VertexId(0), VertexId(0))],
        );
        let opts = BuildOptions { split_multi_edges: true, ..Default::default() };
        let mg = WeightedMetricGraph::build(g, EdgeWeights::uniform(3, 0.9, 1.0, 1.0), DiscretePart::new(), &opts).unwrap();
        // one midpoint for the parallel edge, two for the loop
        assert_eq!(mg.vertex_count(), 5);
        assert_eq!(mg.edge_count(), 6);
        let total: f64 = mg.weights().length.iter().sum();
        assert!((total - 2.7).abs() < 1e-12);
    }

    #[test]
    fn subdivision_restores_standing_assumption() {
        let opts = BuildOptions { assumption: AssumptionPolicy::Subdivide, ..Default::default() };
        let mg = WeightedMetricGraph::build(
            DiscreteGraph::path(1),
            EdgeWeights::from_triples(&[(2.0, 4.0, 1.0)]),
            DiscretePart::new(),
            &opts,
        )
        .unwrap();
        assert!(mg.assumption_violations().is_empty());
        assert!(mg.all_scales().iter().all(|s| s.intrinsic_length <= 1.0));
        assert_eq!(mg.edge_count(), 4);
        let enforce = BuildOptions { assumption: AssumptionPolicy::Enforce, ..Default::default() };
        assert!(matches!(
            WeightedMetricGraph::build(DiscreteGraph::path(1), EdgeWeights::from_triples(&[(2.0, 4.0, 1.0)]), DiscretePart::new(), &enforce),
            Err(GraphError::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn star_measures() {
        let leaf = unit_edge();
        assert_eq!(star_measure(&leaf, VertexId(0)).unwrap(), 1.0);
        let star = build_metric_graph(
            DiscreteGraph::star(3),
            EdgeWeights::intrinsic(&[1.0, 0.5, 0.25], &[1.0, 1.0, 1.0]),
            DiscretePart::new(),
        )
        .unwrap();
        assert_eq!(star_measure(&star, VertexId(0)).unwrap(), 1.75);
        let total: f64 = star.vertices().map(|v| star_measure(&star, v).unwrap()).sum();
        let edges: f64 = star.all_scales().iter().map(|s| s.intrinsic_length * s.intrinsic_weight).sum();
        assert_eq!(total, 2.0 * edges);
        assert!(matches!(star_measure(&star, VertexId(9)), Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn support_of_discrete_part() {
        let q = DiscretePart::new()
            .with_jump(VertexId(0), VertexId(2), 0.5)
            .with_killing(VertexId(3), 1.0);
        let s: Vec<_> = q.support().into_iter().collect();
        assert_eq!(s, vec![VertexId(0), VertexId(2), VertexId(3)]);
        assert_eq!(q.jump(VertexId(2), VertexId(0)), 0.5);
        assert_eq!(q.total_weight(VertexId(0)), 0.5);
    }
}
