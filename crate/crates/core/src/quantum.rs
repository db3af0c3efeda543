//! Dirichlet quantum graphs with Stonean vertex conditions and the cut that
//! turns them into a graph Dirichlet form.
//!
//! At a vertex `x` of degree `d` the incident edge ends are the slots
//! `1..=d`, numbered in the order of [`WeightedMetricGraph::incident`]. The
//! admissible trace vectors are `X_x = lin{1_{C_1}, …, 1_{C_m}}` for
//! disjoint nonempty blocks `C_j`; the slots of `C_0`, the rest, carry the
//! trace `0`. The vertex form is `(L_x c, c)` for the block coefficients `c`.
//! Cutting `x` into one vertex per block gives a metric graph on which
//! `−L_x(C_j, C_k)` are jump weights and the row sums of `L_x` are killing
//! weights.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::edge_functions::{energy, lp_norm, EdgeFunction, EdgeProfile, Exponent, Measure, SampledProfile, VertexFunction, default_cells};
use crate::graph_model::{
    BuildOptions, DiscreteGraph, DiscretePart, EdgeId, End, GraphError, VertexId, WeightedMetricGraph,
};
use crate::solver::{fd_solve, SlotEdge, SlotSystem, SlotTarget, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("vertex {vertex}: {reason}")]
    InvalidPartition { vertex: String, reason: String },
    #[error("vertex {vertex}: L is not symmetric, |L_{row}{col} − L_{col}{row}| = {defect:e}")]
    NonSymmetric {
        vertex: String,
        row: usize,
        col: usize,
        defect: f64,
    },
    #[error("vertex {vertex}: {weight} = {value} is negative")]
    NonMarkovian {
        vertex: String,
        weight: String,
        value: f64,
    },
    #[error("vertex {vertex}: L is {got}×{got} but there are {expected} blocks")]
    OperatorSize {
        vertex: String,
        expected: usize,
        got: usize,
    },
    #[error("{got} vertex conditions for {expected} vertices")]
    ConditionCount { expected: usize, got: usize },
    #[error("the metric graph of a quantum graph must have no discrete part and no clamped vertices")]
    DiscretePartPresent,
    #[error("the cut failed its certificate: relative defect {defect:e}")]
    CertificateFailed { defect: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Blocks `C_1, …, C_m` of 1-based slot numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoneanSublattice {
    pub blocks: Vec<Vec<usize>>,
}

impl StoneanSublattice {
    /// Continuity at a vertex: all slots in one block.
    pub fn kirchhoff(degree: usize) -> Self {
        StoneanSublattice {
            blocks: vec![(1..=degree).collect()],
        }
    }

    /// Block of every slot, `None` for slots of `C_0`. Assumes a valid partition.
    pub fn block_of(&self, degree: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; degree];
        for (j, b) in self.blocks.iter().enumerate() {
            for &s in b {
                if (1..=degree).contains(&s) {
                    out[s - 1] = Some(j);
                }
            }
        }
        out
    }

    /// The slots of `C_0`.
    pub fn free_slots(&self, degree: usize) -> Vec<usize> {
        self.block_of(degree)
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_none())
            .map(|(s, _)| s + 1)
            .collect()
    }
}

/// `L_x` in the basis `1_{C_1}, …, 1_{C_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexConditionOperator {
    pub matrix: DMatrix<f64>,
}

impl VertexConditionOperator {
    pub fn zeros(blocks: usize) -> Self {
        VertexConditionOperator {
            matrix: DMatrix::zeros(blocks, blocks),
        }
    }

    /// `j(C_j, C_k) = −L_x(C_j, C_k)`
    pub fn jump(&self, j: usize, k: usize) -> f64 {
        -self.matrix[(j, k)]
    }

    /// `k(C_j) = Σ_k L_x(C_j, C_k)`
    pub fn killing(&self, j: usize) -> f64 {
        self.matrix.row(j).sum()
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCondition {
    pub sublattice: StoneanSublattice,
    pub operator: VertexConditionOperator,
}

impl VertexCondition {
    pub fn kirchhoff(degree: usize) -> Self {
        VertexCondition {
            sublattice: StoneanSublattice::kirchhoff(degree),
            operator: VertexConditionOperator::zeros(1),
        }
    }
}

/// A metric graph with a vertex condition at every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGraph {
    pub graph: WeightedMetricGraph,
    pub conditions: Vec<VertexCondition>,
}

impl QuantumGraph {
    /// Kirchhoff conditions everywhere.
    pub fn kirchhoff(graph: WeightedMetricGraph) -> Self {
        let conditions = graph.vertices().map(|x| VertexCondition::kirchhoff(graph.degree(x))).collect();
        QuantumGraph { graph, conditions }
    }

    /// `(vertex, slot)` of the edge end, slots 1-based.
    fn slot(&self, e: EdgeId, end: End) -> (VertexId, usize) {
        let (h, t) = self.graph.endpoints(e);
        let x = if end == End::Head { h } else { t };
        let s = self
            .graph
            .incident(x)
            .iter()
            .position(|i| i.edge == e && i.end == end)
            .expect("edge end is incident to its vertex");
        (x, s + 1)
    }
}

/// Outcome of [`validate_quantum`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumReport {
    /// `sup_x ‖L_x‖`
    pub sup_norm: f64,
    pub blocks: usize,
    pub free_slots: usize,
}

fn tolerance(m: &DMatrix<f64>) -> f64 {
    1e-12 * m.amax().max(1.0)
}

/// Check the partitions, symmetry of every `L_x` and nonnegativity of the
/// derived jump and killing weights.
pub fn validate_quantum(qg: &QuantumGraph) -> Result<QuantumReport, QuantumError> {
    let g = &qg.graph;
    if !g.discrete_part().is_empty() || !g.clamped().is_empty() {
        return Err(QuantumError::DiscretePartPresent);
    }
    if qg.conditions.len() != g.vertex_count() {
        return Err(QuantumError::ConditionCount {
            expected: g.vertex_count(),
            got: qg.conditions.len(),
        });
    }
    let mut report = QuantumReport {
        sup_norm: 0.0,
        blocks: 0,
        free_slots: 0,
    };
    for x in g.vertices() {
        let label = || g.label(x).to_string();
        let cond = &qg.conditions[x.0];
        let deg = g.degree(x);
        let mut seen = BTreeSet::new();
        for (j, b) in cond.sublattice.blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(QuantumError::InvalidPartition {
                    vertex: label(),
                    reason: format!("block {} is empty", j + 1),
                });
            }
            for &s in b {
                if !(1..=deg).contains(&s) {
                    return Err(QuantumError::InvalidPartition {
                        vertex: label(),
                        reason: format!("slot {s} out of range 1..={deg}"),
                    });
                }
                if !seen.insert(s) {
                    return Err(QuantumError::InvalidPartition {
                        vertex: label(),
                        reason: format!("slot {s} appears twice"),
                    });
                }
            }
        }
        let m = cond.sublattice.blocks.len();
        let l = &cond.operator.matrix;
        if l.nrows() != m || l.ncols() != m {
            return Err(QuantumError::OperatorSize {
                vertex: label(),
                expected: m,
                got: l.nrows().max(l.ncols()),
            });
        }
        let tol = tolerance(l);
        for r in 0..m {
            for c in r + 1..m {
                let defect = (l[(r, c)] - l[(c, r)]).abs();
                if defect > tol {
                    return Err(QuantumError::NonSymmetric {
                        vertex: label(),
                        row: r + 1,
                        col: c + 1,
                        defect,
                    });
                }
            }
        }
        for r in 0..m {
            for c in 0..m {
                if r != c && cond.operator.jump(r, c) < -tol {
                    return Err(QuantumError::NonMarkovian {
                        vertex: label(),
                        weight: format!("j(C{}, C{})", r + 1, c + 1),
                        value: cond.operator.jump(r, c),
                    });
                }
            }
            if cond.operator.killing(r) < -tol {
                return Err(QuantumError::NonMarkovian {
                    vertex: label(),
                    weight: format!("k(C{})", r + 1),
                    value: cond.operator.killing(r),
                });
            }
        }
        report.sup_norm = report.sup_norm.max(cond.operator.norm());
        report.blocks += m;
        report.free_slots += deg - seen.len();
    }
    Ok(report)
}

/// Where the vertices of the cut graph come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutOrigin {
    /// Block `j` (0-based) of vertex `x`.
    Block { vertex: VertexId, block: usize },
    /// A slot of `C_0` at `x`, 1-based; the new vertex is clamped.
    Free { vertex: VertexId, slot: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutCertificate {
    pub samples: usize,
    /// Largest relative difference of the forms `h(u)` and `S(Φu)`.
    pub form_defect: f64,
    pub l2_defect: f64,
    pub sup_defect: f64,
}

impl CutCertificate {
    pub fn max_defect(&self) -> f64 {
        self.form_defect.max(self.l2_defect).max(self.sup_defect)
    }
}

#[derive(Debug, Clone)]
pub struct QuantumCut {
    pub graph: WeightedMetricGraph,
    /// Origin of every vertex of `graph`.
    pub origin: Vec<CutOrigin>,
    pub certificate: CutCertificate,
}

/// Tolerance of the cut certificate.
pub const CUT_TOLERANCE: f64 = 1e-10;
const CERTIFICATE_SAMPLES: usize = 20;

/// Replace every vertex by one vertex per block and one clamped vertex per
/// free slot, with the jump and killing weights of `L_x`. A vertex with a
/// single block and no free slot keeps its label; otherwise block `j` is
/// labelled `x.j` and the free slot `s` is labelled `x.0.s`.
///
/// The certificate compares `h`, `‖·‖₂` and `‖·‖∞` on random functions of
/// the quantum domain across the identification, from the seed `seed`.
pub fn cut_quantum(qg: &QuantumGraph, seed: u64) -> Result<QuantumCut, QuantumError> {
    validate_quantum(qg)?;
    let g = &qg.graph;
    let mut labels = Vec::new();
    let mut origin = Vec::new();
    // new vertex of every (vertex, slot)
    let mut slot_vertex: Vec<Vec<usize>> = Vec::with_capacity(g.vertex_count());
    let mut block_vertex: Vec<Vec<usize>> = Vec::with_capacity(g.vertex_count());
    let mut clamped = BTreeSet::new();
    for x in g.vertices() {
        let cond = &qg.conditions[x.0];
        let deg = g.degree(x);
        let of = cond.sublattice.block_of(deg);
        let m = cond.sublattice.blocks.len();
        let keep = m == 1 && of.iter().all(Option::is_some);
        let first = labels.len();
        for j in 0..m {
            labels.push(if keep {
                g.label(x).to_string()
            } else {
                format!("{}.{}", g.label(x), j + 1)
            });
            origin.push(CutOrigin::Block { vertex: x, block: j });
        }
        block_vertex.push((first..first + m).collect());
        let mut slots = Vec::with_capacity(deg);
        for (s, b) in of.iter().enumerate() {
            match b {
                Some(j) => slots.push(first + j),
                None => {
                    clamped.insert(VertexId(labels.len()));
                    slots.push(labels.len());
                    labels.push(format!("{}.0.{}", g.label(x), s + 1));
                    origin.push(CutOrigin::Free { vertex: x, slot: s + 1 });
                }
            }
        }
        slot_vertex.push(slots);
    }
    let edges: Vec<(VertexId, VertexId)> = g
        .edge_ids()
        .map(|e| {
            let (hx, hs) = qg.slot(e, End::Head);
            let (tx, ts) = qg.slot(e, End::Tail);
            (VertexId(slot_vertex[hx.0][hs - 1]), VertexId(slot_vertex[tx.0][ts - 1]))
        })
        .collect();
    let mut q = DiscretePart::new();
    for x in g.vertices() {
        let op = &qg.conditions[x.0].operator;
        let bv = &block_vertex[x.0];
        for j in 0..bv.len() {
            for k in j + 1..bv.len() {
                let w = op.jump(j, k).max(0.0);
                if w > 0.0 {
                    q.set_jump(VertexId(bv[j]), VertexId(bv[k]), w);
                }
            }
            let k = op.killing(j).max(0.0);
            if k > 0.0 {
                q.set_killing(VertexId(bv[j]), k);
            }
        }
    }
    let graph = WeightedMetricGraph::build(
        DiscreteGraph::new(labels, edges),
        g.weights().clone(),
        q,
        &BuildOptions {
            allow_reducible: true,
            clamped,
            ..BuildOptions::default()
        },
    )?;
    let certificate = certify(qg, &graph, &block_vertex, seed)?;
    if !(certificate.max_defect() <= CUT_TOLERANCE) {
        return Err(QuantumError::CertificateFailed {
            defect: certificate.max_defect(),
        });
    }
    Ok(QuantumCut {
        graph,
        origin,
        certificate,
    })
}

/// Random block coefficients per vertex.
fn random_coefficients(qg: &QuantumGraph, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    qg.conditions
        .iter()
        .map(|c| (0..c.sublattice.blocks.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// Trace of the edge end in the quantum domain.
fn end_value(qg: &QuantumGraph, coef: &[Vec<f64>], e: EdgeId, end: End) -> f64 {
    let (x, s) = qg.slot(e, end);
    let of = qg.conditions[x.0].sublattice.block_of(qg.graph.degree(x));
    of[s - 1].map_or(0.0, |j| coef[x.0][j])
}

/// `h(u) = Σ_e ω ∫ |u′|² + Σ_x (L_x c_x, c_x)`.
fn quantum_form(qg: &QuantumGraph, u: &EdgeFunction, coef: &[Vec<f64>]) -> f64 {
    let g = &qg.graph;
    let diffusion: f64 = g
        .edge_ids()
        .map(|e| g.intrinsic_weight(e) * u.profiles[e.0].energy())
        .sum();
    let vertex: f64 = qg
        .conditions
        .iter()
        .zip(coef)
        .map(|(c, v)| {
            let v = nalgebra::DVector::from_column_slice(v);
            (c.operator.matrix.clone() * &v).dot(&v)
        })
        .sum();
    diffusion + vertex
}

fn certify(
    qg: &QuantumGraph,
    cut: &WeightedMetricGraph,
    block_vertex: &[Vec<usize>],
    seed: u64,
) -> Result<CutCertificate, QuantumError> {
    let g = &qg.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cert = CutCertificate {
        samples: CERTIFICATE_SAMPLES,
        form_defect: 0.0,
        l2_defect: 0.0,
        sup_defect: 0.0,
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..CERTIFICATE_SAMPLES {
        let coef = random_coefficients(qg, &mut rng);
        let profiles: Vec<EdgeProfile> = g
            .edge_ids()
            .map(|e| {
                let l = g.intrinsic_length(e);
                let (a, b) = (end_value(qg, &coef, e, End::Head), end_value(qg, &coef, e, End::Tail));
                let (c1, c2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let pi = std::f64::consts::PI;
                EdgeProfile::Sampled(SampledProfile::from_fn(l, default_cells(l), |t| {
                    a + (b - a) * t / l + c1 * (pi * t / l).sin() + c2 * (2.0 * pi * t / l).sin()
                }))
            })
            .collect();
        let u = EdgeFunction::new(profiles.clone(), None);
        let mut values = VertexFunction::zeros(cut.vertex_count());
        for (x, bv) in block_vertex.iter().enumerate() {
            for (j, &v) in bv.iter().enumerate() {
                values[v] = coef[x][j];
            }
        }
        let phi_u = EdgeFunction::new(profiles, Some(values));
        let h = quantum_form(qg, &u, &coef);
        let s = energy(cut, &phi_u).map_err(SolverError::Function)?.total;
        cert.form_defect = cert.form_defect.max(rel(h, s));
        for (p, slot) in [(Exponent::Two, &mut cert.l2_defect), (Exponent::Infinity, &mut cert.sup_defect)] {
            let a = lp_norm(g, &u, p, Measure::Edge);
            let b = lp_norm(cut, &phi_u, p, Measure::Edge);
            *slot = slot.max(rel(a, b));
        }
    }
    Ok(cert)
}

/// Finite-difference resolvent `(H + α)⁻¹ f` of the quantum graph, assembled
/// from the slots and `L_x` directly rather than through the cut.
pub fn quantum_oracle_resolve(
    qg: &QuantumGraph,
    alpha: f64,
    f: &EdgeFunction,
    n_cells: usize,
) -> Result<EdgeFunction, QuantumError> {
    validate_quantum(qg)?;
    let g = &qg.graph;
    let mut offset = Vec::with_capacity(g.vertex_count());
    let mut nodes = 0;
    for c in &qg.conditions {
        offset.push(nodes);
        nodes += c.sublattice.blocks.len();
    }
    let mut coupling = DMatrix::zeros(nodes, nodes);
    for (x, c) in qg.conditions.iter().enumerate() {
        let m = c.sublattice.blocks.len();
        coupling
            .view_mut((offset[x], offset[x]), (m, m))
            .copy_from(&c.operator.matrix);
    }
    let target = |e: EdgeId, end: End| {
        let (x, s) = qg.slot(e, end);
        match qg.conditions[x.0].sublattice.block_of(g.degree(x))[s - 1] {
            Some(j) => SlotTarget::Node(offset[x.0] + j),
            None => SlotTarget::Clamped,
        }
    };
    let sys = SlotSystem {
        nodes,
        coupling,
        edges: g
            .edge_ids()
            .map(|e| SlotEdge {
                length: g.intrinsic_length(e),
                weight: g.intrinsic_weight(e),
                head: target(e, End::Head),
                tail: target(e, End::Tail),
            })
            .collect(),
    };
    let samples: Vec<Vec<f64>> = f.profiles.iter().map(|p| p.node_values(n_cells)).collect();
    let (nodal, _) = fd_solve(&sys, alpha, &samples, n_cells)?;
    let profiles = g
        .edge_ids()
        .zip(nodal)
        .map(|(e, v)| EdgeProfile::Sampled(SampledProfile::new(g.intrinsic_length(e), v)))
        .collect();
    Ok(EdgeFunction::new(profiles, None))
}
