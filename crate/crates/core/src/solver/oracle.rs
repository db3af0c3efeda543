//! Finite differences on every edge, coupled at the vertices by one-sided
//! second-order derivative stencils:
//!
//! ```text
//! (−u_{k−1} + 2u_k − u_{k+1}) / h² + α u_k = f_k          inside an edge
//! Σ_{slots at x} ω (−3u_0 + 4u_1 − u_2) / (2h) = (Δ U)(x)   at a vertex
//! ```
//!
//! The interior unknowns of each edge are eliminated by the Thomas algorithm,
//! which leaves a dense system with one row per vertex.

use nalgebra::{DMatrix, DVector};

use crate::edge_functions::{EdgeFunction, EdgeProfile, SampledProfile, VertexFunction};
use crate::graph_model::WeightedMetricGraph;
use crate::kirchhoff_ops::discrete_laplacian;

use super::SolverError;

/// Where an edge end attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SlotTarget {
    Node(usize),
    /// The function vanishes at this end.
    Clamped,
}

#[derive(Debug, Clone)]
pub(crate) struct SlotEdge {
    pub length: f64,
    pub weight: f64,
    pub head: SlotTarget,
    pub tail: SlotTarget,
}

/// Edges glued to `nodes` coupling nodes, with a symmetric node operator.
#[derive(Debug, Clone)]
pub(crate) struct SlotSystem {
    pub nodes: usize,
    pub coupling: DMatrix<f64>,
    pub edges: Vec<SlotEdge>,
}

impl SlotSystem {
    /// Vertices become nodes in order, skipping clamped ones. Returns the
    /// node index of every vertex.
    pub(crate) fn from_graph(g: &WeightedMetricGraph) -> (Self, Vec<Option<usize>>) {
        let mut index = vec![None; g.vertex_count()];
        let mut free = Vec::new();
        for v in g.vertices() {
            if !g.is_clamped(v) {
                index[v.0] = Some(free.len());
                free.push(v.0);
            }
        }
        let target = |v: crate::graph_model::VertexId| match index[v.0] {
            Some(i) => SlotTarget::Node(i),
            None => SlotTarget::Clamped,
        };
        let sys = SlotSystem {
            nodes: free.len(),
            coupling: discrete_laplacian(g).restrict(&free).to_dense(),
            edges: g
                .edge_ids()
                .map(|e| {
                    let (h, t) = g.endpoints(e);
                    SlotEdge {
                        length: g.intrinsic_length(e),
                        weight: g.intrinsic_weight(e),
                        head: target(h),
                        tail: target(t),
                    }
                })
                .collect(),
        };
        (sys, index)
    }
}

/// Solve `T x = d` for the constant tridiagonal `T = tridiag(off, diag, off)`.
fn thomas(diag: f64, off: f64, d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut b = diag;
    c[0] = off / b;
    x[0] = d[0] / b;
    for i in 1..n {
        b = diag - off * c[i - 1];
        c[i] = off / b;
        x[i] = (d[i] - off * x[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Node values per edge and the values at the coupling nodes. `f[e]` holds
/// the `n + 1` samples of the right-hand side on edge `e`.
pub(crate) fn fd_solve(
    sys: &SlotSystem,
    alpha: f64,
    f: &[Vec<f64>],
    n: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), SolverError> {
    if n < 2 || n % 2 == 1 {
        return Err(SolverError::InvalidCells(n));
    }
    // u_k = p_k + q_k U_head + r_k U_tail
    let mut parts = Vec::with_capacity(sys.edges.len());
    let mut a = DMatrix::<f64>::zeros(sys.nodes, sys.nodes);
    let mut b = DVector::<f64>::zeros(sys.nodes);
    for (i, e) in sys.edges.iter().enumerate() {
        let h = e.length / n as f64;
        let h2 = h * h;
        let (diag, off) = (2.0 / h2 + alpha, -1.0 / h2);
        let m = n - 1;
        let fi: Vec<f64> = (1..n).map(|k| f[i][k]).collect();
        let mut unit = vec![0.0; m];
        unit[0] = 1.0 / h2;
        let qi = thomas(diag, off, &unit);
        unit[0] = 0.0;
        unit[m - 1] += 1.0 / h2;
        let ri = thomas(diag, off, &unit);
        let pi = thomas(diag, off, &fi);
        let wrap = |v: Vec<f64>, s: f64, t: f64| {
            let mut out = Vec::with_capacity(n + 1);
            out.push(s);
            out.extend(v);
            out.push(t);
            out
        };
        let (p, q, r) = (wrap(pi, 0.0, 0.0), wrap(qi, 1.0, 0.0), wrap(ri, 0.0, 1.0));
        let c = e.weight / (2.0 * h);
        // outgoing derivatives as p + q U_head + r U_tail
        let head = (
            c * (4.0 * p[1] - p[2]),
            c * (-3.0 + 4.0 * q[1] - q[2]),
            c * (4.0 * r[1] - r[2]),
        );
        let tail = (
            c * (4.0 * p[n - 1] - p[n - 2]),
            c * (4.0 * q[n - 1] - q[n - 2]),
            c * (-3.0 + 4.0 * r[n - 1] - r[n - 2]),
        );
        for (end, (cp, cq, cr)) in [(e.head, head), (e.tail, tail)] {
            if let SlotTarget::Node(x) = end {
                b[x] -= cp;
                if let SlotTarget::Node(y) = e.head {
                    a[(x, y)] += cq;
                }
                if let SlotTarget::Node(y) = e.tail {
                    a[(x, y)] += cr;
                }
            }
        }
        parts.push((p, q, r));
    }
    a -= &sys.coupling;
    let lu = a.clone().lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    let (lo, hi) = (pivots.min(), pivots.max());
    if sys.nodes > 0 && !(lo > 1e-13 * hi) {
        return Err(SolverError::SingularSystem(format!(
            "vertex system pivot ratio {:e}",
            lo / hi
        )));
    }
    let values = if sys.nodes > 0 {
        lu.solve(&b)
            .ok_or_else(|| SolverError::SingularSystem("LU solve failed".into()))?
    } else {
        DVector::zeros(0)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::SingularSystem("non-finite solution".into()));
    }
    let at = |t: SlotTarget| match t {
        SlotTarget::Node(x) => values[x],
        SlotTarget::Clamped => 0.0,
    };
    let nodal = sys
        .edges
        .iter()
        .zip(parts)
        .map(|(e, (p, q, r))| {
            let (uh, ut) = (at(e.head), at(e.tail));
            (0..=n).map(|k| p[k] + q[k] * uh + r[k] * ut).collect()
        })
        .collect();
    Ok((nodal, values.iter().copied().collect()))
}

/// Independent finite-difference solution of `−u″ + αu = f` with the
/// Δ-Kirchhoff vertex conditions, on `n_cells` cells per edge.
///
/// With `α = 0` the system is singular whenever constants solve the
/// homogeneous problem (no killing and no clamped vertex).
pub fn fem_oracle_resolve(
    g: &WeightedMetricGraph,
    alpha: f64,
    f: &EdgeFunction,
    n_cells: usize,
) -> Result<EdgeFunction, SolverError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    f.check_graph(g)?;
    let (sys, index) = SlotSystem::from_graph(g);
    let samples: Vec<Vec<f64>> = f.profiles.iter().map(|p| p.node_values(n_cells)).collect();
    let (nodal, node_values) = fd_solve(&sys, alpha, &samples, n_cells)?;
    let values = index.iter().map(|i| i.map_or(0.0, |i| node_values[i])).collect();
    let profiles = g
        .edge_ids()
        .zip(nodal)
        .map(|(e, v)| EdgeProfile::Sampled(SampledProfile::new(g.intrinsic_length(e), v)))
        .collect();
    Ok(EdgeFunction::new(profiles, Some(VertexFunction(values))))
}
