//! Infinite spherically symmetric graphs described by per-generation data.
//!
//! Generation `n ≥ 1` consists of the edges joining the sphere `S_{n−1}` to
//! the sphere `S_n`. All edges of a generation share the intrinsic length
//! `l_n` and the intrinsic weight `w_n`; every vertex of `S_n` has `deg⁻_n`
//! edges towards the root and `deg⁺_n` edges away from it. The root sphere is
//! `S_0 = {o}` with `deg⁺_0` given separately. Sphere sizes follow from
//!
//! ```text
//! #S_n · deg⁻_n = #S_{n−1} · deg⁺_{n−1}
//! ```
//!
//! A radial discrete part assigns every vertex of `S_n` the killing weight
//! `k_n` and the total jump weight `J⁺_n` towards `S_{n+1}`.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{
    build_metric_graph, DiscreteGraph, DiscretePart, EdgeWeights, GraphError, Scale, VertexId,
    WeightedMetricGraph,
};

/// A real sequence given in closed form or by a table.
///
/// Every field of a [`SphericalSpec`] has a first index (`1` for edge data,
/// `0` for sphere data); `k` below counts terms from that first index, so
/// the first term has `k = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    Const(f64),
    /// `first · ratio^(k−1)`
    Geometric { first: f64, ratio: f64 },
    /// `c / k`
    Harmonic(f64),
    /// `coef · k^exponent`
    Power { coef: f64, exponent: f64 },
    /// Explicit values; the last one repeats forever.
    Table(Vec<f64>),
}

impl Sequence {
    /// Term `k ≥ 1`.
    pub fn term(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            Sequence::Const(c) => *c,
            Sequence::Geometric { first, ratio } => first * ratio.powi((k - 1) as i32),
            Sequence::Harmonic(c) => c / k as f64,
            Sequence::Power { coef, exponent } => coef * (k as f64).powf(*exponent),
            Sequence::Table(v) => {
                if v.is_empty() {
                    0.0
                } else {
                    v[(k - 1).min(v.len() - 1)]
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesCertificate {
    Diverges,
    Converges,
}

/// Series a certificate can be attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `Σ l_n` in the given scale (for spherical data the given scale is the
    /// intrinsic one).
    Length(Scale),
    /// `Σ l_k / A(S_k, l_k)`, the weighted-mean volume series.
    Parabolicity,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphericalError {
    #[error("{field} at generation {n} must be positive and finite, got {value}")]
    Nonpositive {
        field: &'static str,
        n: usize,
        value: f64,
    },
    #[error("{field} at generation {n} must be a positive integer, got {value}")]
    NonIntegerDegree {
        field: &'static str,
        n: usize,
        value: f64,
    },
    #[error("sphere {n} would have fractional size {size}")]
    InconsistentCounts { n: usize, size: f64 },
    #[error("generation {n} cannot be realized as a simple graph")]
    NonSimple { n: usize },
    #[error("truncation at depth {depth} would have {vertices} vertices (limit {limit})")]
    TooLarge {
        depth: usize,
        vertices: f64,
        limit: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Data of one generation. Generation `0` describes the root sphere and has
/// no edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generation {
    pub index: usize,
    /// `l_n`, intrinsic length of the edges between `S_{n−1}` and `S_n`.
    pub length: f64,
    /// `w_n`, intrinsic weight of those edges.
    pub weight: f64,
    /// `deg⁻_n`
    pub in_degree: usize,
    /// `deg⁺_n`
    pub out_degree: usize,
    /// `#S_n`
    pub sphere_size: f64,
    /// `#S_{n−1}·deg⁺_{n−1}`, the number of edges of generation `n`.
    pub edge_count: f64,
    /// `k_n`
    pub killing: f64,
    /// `J⁺_n`, total jump weight from a vertex of `S_n` to `S_{n+1}`.
    pub outward_jump: f64,
    /// `J⁻_n`, total jump weight from a vertex of `S_n` to `S_{n−1}`.
    pub inward_jump: f64,
}

impl Generation {
    /// `ω(S_n) = #edges · w_n`, the weight of the generation-`n` edge sphere.
    pub fn sphere_weight(&self) -> f64 {
        self.edge_count * self.weight
    }

    pub fn length_in(&self, scale: Scale) -> f64 {
        match scale {
            Scale::Given | Scale::Intrinsic => self.length,
            Scale::Canonical => self.length / self.weight,
        }
    }
}

/// Generator of a spherically symmetric graph with a radial discrete part.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSpec {
    pub root_degree: usize,
    pub length: Sequence,
    pub weight: Sequence,
    pub out_degree: Sequence,
    pub in_degree: Sequence,
    pub killing: Sequence,
    pub outward_jump: Sequence,
    pub certificates: Vec<(SeriesKind, SeriesCertificate)>,
}

impl SphericalSpec {
    /// Half-line `o — 1 — 2 — …` with lengths `l_n` and unit weights.
    pub fn half_line(length: Sequence) -> Self {
        Self::regular_tree(1, length)
    }

    /// Tree in which every vertex has `branching` children, unit weights.
    pub fn regular_tree(branching: usize, length: Sequence) -> Self {
        SphericalSpec {
            root_degree: branching,
            length,
            weight: Sequence::Const(1.0),
            out_degree: Sequence::Const(branching as f64),
            in_degree: Sequence::Const(1.0),
            killing: Sequence::Const(0.0),
            outward_jump: Sequence::Const(0.0),
            certificates: Vec::new(),
        }
    }

    pub fn with_weight(mut self, weight: Sequence) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_killing(mut self, killing: Sequence) -> Self {
        self.killing = killing;
        self
    }

    pub fn with_outward_jump(mut self, jump: Sequence) -> Self {
        self.outward_jump = jump;
        self
    }

    pub fn with_certificate(mut self, kind: SeriesKind, cert: SeriesCertificate) -> Self {
        self.certificates.retain(|(k, _)| *k != kind);
        self.certificates.push((kind, cert));
        self
    }

    pub fn certificate(&self, kind: SeriesKind) -> Option<SeriesCertificate> {
        let norm = |k: SeriesKind| match k {
            SeriesKind::Length(Scale::Given) => SeriesKind::Length(Scale::Intrinsic),
            k => k,
        };
        self.certificates
            .iter()
            .find(|(k, _)| norm(*k) == norm(kind))
            .map(|(_, c)| *c)
    }

    pub fn has_discrete_part(&self) -> bool {
        !(matches!(self.killing, Sequence::Const(c) if c == 0.0)
            && matches!(self.outward_jump, Sequence::Const(c) if c == 0.0))
    }

    /// Lazily evaluated generations `0, 1, 2, …`.
    pub fn generations(&self) -> Generations<'_> {
        Generations {
            spec: self,
            next: 0,
            prev: None,
            done: false,
        }
    }

    /// Generations `0..=depth`.
    pub fn generation_table(&self, depth: usize) -> Result<Vec<Generation>, SphericalError> {
        self.generations().take(depth + 1).collect()
    }

    /// The ball `B_{r_depth}` as a finite weighted metric graph in intrinsic
    /// form, together with its spheres.
    pub fn materialize(&self, depth: usize) -> Result<Truncation, SphericalError> {
        const LIMIT: usize = 200_000;
        let table = self.generation_table(depth)?;
        let total: f64 = table.iter().map(|g| g.sphere_size).sum();
        if total > LIMIT as f64 {
            return Err(SphericalError::TooLarge {
                depth,
                vertices: total,
                limit: LIMIT,
            });
        }
        let mut labels = vec!["o".to_string()];
        let mut spheres = vec![vec![VertexId(0)]];
        let mut edges = Vec::new();
        let (mut len, mut wt) = (Vec::new(), Vec::new());
        let mut q = DiscretePart::new();
        q.set_killing(VertexId(0), table[0].killing);
        for n in 1..=depth {
            let gen = &table[n];
            let size = gen.sphere_size as usize;
            let start = labels.len();
            for i in 0..size {
                labels.push(format!("{n}.{i}"));
            }
            let sphere: Vec<VertexId> = (start..start + size).map(VertexId).collect();
            let parents = spheres[n - 1].clone();
            let out = table[n - 1].out_degree;
            if out > size {
                return Err(SphericalError::NonSimple { n });
            }
            let jump_each = table[n - 1].outward_jump / out as f64;
            for (p, &parent) in parents.iter().enumerate() {
                let mut seen = BTreeSet::new();
                for s in 0..out {
                    let child = sphere[(p * out + s) % size];
                    if !seen.insert(child) {
                        return Err(SphericalError::NonSimple { n });
                    }
                    edges.push((parent, child));
                    len.push(gen.length);
                    wt.push(gen.weight);
                    if jump_each > 0.0 {
                        q.set_jump(parent, child, jump_each);
                    }
                }
            }
            for &v in &sphere {
                q.set_killing(v, gen.killing);
            }
            spheres.push(sphere);
        }
        let graph = build_metric_graph(
            DiscreteGraph::new(labels, edges),
            EdgeWeights::intrinsic(&len, &wt),
            q,
        )?;
        Ok(Truncation { graph, spheres })
    }

    /// Quotient of the ball `B_{r_depth}` by the spheres: a path whose vertex
    /// `n` stands for `S_n`. Radial functions have the same norms and form
    /// values on the path as on the ball.
    pub fn radial_path(&self, depth: usize) -> Result<RadialPath, SphericalError> {
        let table = self.generation_table(depth)?;
        let labels = (0..=depth).map(|n| format!("S{n}")).collect();
        let edges = (0..depth).map(|n| (VertexId(n), VertexId(n + 1))).collect();
        let len: Vec<f64> = table[1..].iter().map(|g| g.length).collect();
        let wt: Vec<f64> = table[1..].iter().map(|g| g.sphere_weight()).collect();
        let mut q = DiscretePart::new();
        for (n, gen) in table.iter().enumerate() {
            q.set_killing(VertexId(n), gen.sphere_size * gen.killing);
            if n < depth {
                q.set_jump(VertexId(n), VertexId(n + 1), gen.sphere_size * gen.outward_jump);
            }
        }
        let graph = build_metric_graph(
            DiscreteGraph::new(labels, edges),
            EdgeWeights::intrinsic(&len, &wt),
            q,
        )?;
        Ok(RadialPath {
            graph,
            sphere_sizes: table.iter().map(|g| g.sphere_size).collect(),
        })
    }
}

pub struct Generations<'a> {
    spec: &'a SphericalSpec,
    next: usize,
    prev: Option<Generation>,
    done: bool,
}

fn positive(field: &'static str, n: usize, value: f64) -> Result<f64, SphericalError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(SphericalError::Nonpositive { field, n, value })
    }
}

fn nonnegative(field: &'static str, n: usize, value: f64) -> Result<f64, SphericalError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(SphericalError::Nonpositive { field, n, value })
    }
}

fn degree(field: &'static str, n: usize, value: f64) -> Result<usize, SphericalError> {
    if value.is_finite() && value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(SphericalError::NonIntegerDegree { field, n, value })
    }
}

impl Generations<'_> {
    fn compute(&self, n: usize) -> Result<Generation, SphericalError> {
        let s = self.spec;
        let killing = nonnegative("killing", n, s.killing.term(n + 1))?;
        let outward_jump = nonnegative("outward jump", n, s.outward_jump.term(n + 1))?;
        let Some(prev) = self.prev else {
            let out_degree = degree("root degree", 0, s.root_degree as f64)?;
            return Ok(Generation {
                index: 0,
                length: 0.0,
                weight: 0.0,
                in_degree: 0,
                out_degree,
                sphere_size: 1.0,
                edge_count: 0.0,
                killing,
                outward_jump,
                inward_jump: 0.0,
            });
        };
        let length = positive("length", n, s.length.term(n))?;
        let weight = positive("weight", n, s.weight.term(n))?;
        let in_degree = degree("in-degree", n, s.in_degree.term(n))?;
        let out_degree = degree("out-degree", n, s.out_degree.term(n))?;
        let edge_count = prev.sphere_size * prev.out_degree as f64;
        let size = edge_count / in_degree as f64;
        if size.fract() != 0.0 && size < 2f64.powi(52) {
            return Err(SphericalError::InconsistentCounts { n, size });
        }
        Ok(Generation {
            index: n,
            length,
            weight,
            in_degree,
            out_degree,
            sphere_size: size,
            edge_count,
            killing,
            outward_jump,
            inward_jump: prev.sphere_size * prev.outward_jump / size,
        })
    }
}

impl Iterator for Generations<'_> {
    type Item = Result<Generation, SphericalError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let g = self.compute(self.next);
        match g {
            Ok(g) => {
                self.prev = Some(g);
                self.next += 1;
                Some(Ok(g))
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// A materialized ball with its spheres `S_0, …, S_depth`.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub graph: WeightedMetricGraph,
    pub spheres: Vec<Vec<VertexId>>,
}

/// Sphere quotient of a ball; vertex `n` is `S_n`.
#[derive(Debug, Clone)]
pub struct RadialPath {
    pub graph: WeightedMetricGraph,
    pub sphere_sizes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Partial sums above this are taken as divergence.
    pub budget: f64,
    /// A tail estimate below `tolerance · max(1, partial sum)` is taken as convergence.
    pub tolerance: f64,
    pub max_terms: usize,
    /// Number of trailing term ratios used by the tail estimate.
    pub window: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            budget: 1e6,
            tolerance: 1e-12,
            max_terms: 2_000_000,
            window: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesOutcome {
    Diverges {
        certified: bool,
        partial_sum: f64,
        terms: usize,
    },
    Converges {
        certified: bool,
        sum_estimate: f64,
        tail_bound: f64,
        terms: usize,
    },
    Undecided {
        partial_sum: f64,
        terms: usize,
    },
}

/// Decide `Σ_{k≥1} a_k` for nonnegative terms, from a certificate if one is
/// given, otherwise by the partial-sum budget or a geometric tail bound.
pub fn series_test<E>(
    mut term: impl FnMut(usize) -> Result<f64, E>,
    certificate: Option<SeriesCertificate>,
    opts: &SeriesOptions,
) -> Result<SeriesOutcome, E> {
    let mut sum = 0.0;
    let mut recent: Vec<f64> = Vec::new();
    let probe = match certificate {
        Some(_) => opts.window.max(1).min(opts.max_terms),
        None => opts.max_terms,
    };
    for k in 1..=probe {
        let a = term(k)?;
        sum += a;
        if certificate.is_some() {
            continue;
        }
        if sum > opts.budget {
            return Ok(SeriesOutcome::Diverges {
                certified: false,
                partial_sum: sum,
                terms: k,
            });
        }
        if a == 0.0 {
            recent.clear();
            continue;
        }
        recent.push(a);
        if recent.len() > opts.window + 1 {
            recent.remove(0);
        }
        if recent.len() == opts.window + 1 {
            let rho = recent
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(0.0, f64::max);
            if rho < 1.0 {
                let tail = a * rho / (1.0 - rho);
                if tail <= opts.tolerance * sum.max(1.0) {
                    return Ok(SeriesOutcome::Converges {
                        certified: false,
                        sum_estimate: sum + tail,
                        tail_bound: tail,
                        terms: k,
                    });
                }
            }
        }
    }
    Ok(match certificate {
        Some(SeriesCertificate::Diverges) => SeriesOutcome::Diverges {
            certified: true,
            partial_sum: sum,
            terms: probe,
        },
        Some(SeriesCertificate::Converges) => SeriesOutcome::Converges {
            certified: true,
            sum_estimate: sum,
            tail_bound: f64::NAN,
            terms: probe,
        },
        None => SeriesOutcome::Undecided {
            partial_sum: sum,
            terms: probe,
        },
    })
}

/// Object whose metric completeness is examined.
#[derive(Debug, Clone, Copy)]
pub enum CompletenessInput<'a> {
    Finite(&'a WeightedMetricGraph),
    Spherical(&'a SphericalSpec),
}

impl<'a> From<&'a WeightedMetricGraph> for CompletenessInput<'a> {
    fn from(g: &'a WeightedMetricGraph) -> Self {
        CompletenessInput::Finite(g)
    }
}

impl<'a> From<&'a SphericalSpec> for CompletenessInput<'a> {
    fn from(s: &'a SphericalSpec) -> Self {
        CompletenessInput::Spherical(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Completeness {
    Complete {
        /// Decided by the partial-sum budget rather than a certificate or finiteness.
        heuristic: bool,
        partial_sum: Option<f64>,
    },
    Incomplete {
        heuristic: bool,
        /// Length of the radial ray.
        ray_length: f64,
        /// Leading edge lengths of the witness ray.
        ray_prefix: Vec<f64>,
    },
    Undecided {
        partial_sum: f64,
        generations: usize,
    },
}

/// Metric completeness. Finite graphs are always complete; a spherically
/// symmetric graph is complete iff its radial rays have infinite length.
pub fn completeness_check<'a>(
    input: impl Into<CompletenessInput<'a>>,
    scale: Scale,
    opts: &SeriesOptions,
) -> Result<Completeness, SphericalError> {
    let spec = match input.into() {
        CompletenessInput::Finite(_) => {
            return Ok(Completeness::Complete {
                heuristic: false,
                partial_sum: None,
            })
        }
        CompletenessInput::Spherical(s) => s,
    };
    let mut gens = spec.generations().skip(1);
    let mut prefix = Vec::new();
    let outcome = series_test(
        |_| {
            let g = gens.next().expect("generation iterator is infinite")?;
            let l = g.length_in(scale);
            if prefix.len() < 20 {
                prefix.push(l);
            }
            Ok::<f64, SphericalError>(l)
        },
        spec.certificate(SeriesKind::Length(scale)),
        opts,
    )?;
    Ok(match outcome {
        SeriesOutcome::Diverges {
            certified,
            partial_sum,
            ..
        } => Completeness::Complete {
            heuristic: !certified,
            partial_sum: Some(partial_sum),
        },
        SeriesOutcome::Converges {
            certified,
            sum_estimate,
            ..
        } => Completeness::Incomplete {
            heuristic: !certified,
            ray_length: sum_estimate,
            ray_prefix: prefix,
        },
        SeriesOutcome::Undecided { partial_sum, terms } => Completeness::Undecided {
            partial_sum,
            generations: terms,
        },
    })
}
