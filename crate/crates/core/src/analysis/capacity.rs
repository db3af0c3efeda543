use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::graph_model::{geodesic, Point, Scale, VertexId, WeightedMetricGraph};
use crate::kirchhoff_ops::{discrete_laplacian, kirchhoff_matrix, resolvent_matrix, trace_form, vertex_measure};
use crate::solver::{solve_vertex_system, SolverError};

use super::{AnalysisError, Verdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub value: f64,
    /// False when no vertex other than `x` is held at zero; the value is then
    /// the unconstrained minimum with `φ(x) = 1`.
    pub separated: bool,
}

fn check_vertex(g: &WeightedMetricGraph, x: VertexId) -> Result<(), AnalysisError> {
    if x.0 < g.vertex_count() {
        Ok(())
    } else {
        Err(AnalysisError::UnknownVertex(x.0))
    }
}

/// Capacity of `{x}` relative to `relative_to`:
/// `inf { ‖φ‖² + E(φ) : φ(x) = 1, φ = 0 on relative_to \ {x} }`.
///
/// The minimizer is the `1`-harmonic extension of its vertex values, so the
/// value is `Uᵀ (Δ₁ + M₁) U` for the solution `U` of the clamped vertex
/// system. The discrete part does not enter. Clamped vertices of `g` are
/// held at zero as well.
pub fn capacity(
    g: &WeightedMetricGraph,
    x: VertexId,
    relative_to: &BTreeSet<VertexId>,
) -> Result<Capacity, AnalysisError> {
    check_vertex(g, x)?;
    for &y in relative_to {
        check_vertex(g, y)?;
    }
    let mut fixed: BTreeMap<usize, f64> = relative_to
        .iter()
        .chain(g.clamped())
        .filter(|&&y| y != x)
        .map(|y| (y.0, 0.0))
        .collect();
    let separated = !fixed.is_empty();
    fixed.insert(x.0, 1.0);
    let (lap, pot) = kirchhoff_matrix(g, 1.0)?;
    let a = lap.plus(&pot);
    let rhs = vec![0.0; g.vertex_count()];
    let u = solve_vertex_system(&a, &rhs, &fixed)?.values;
    Ok(Capacity {
        value: a.quadratic_form(&u),
        separated,
    })
}

/// Effective resistance `sup |u(x) − u(y)|² / E(u)`, from the potential with
/// `u(x) = 0`, `u(y) = 1` that is linear on the edges. Jumps and killing do
/// not enter. `R(x, x) = 0`.
pub fn resistance(g: &WeightedMetricGraph, x: VertexId, y: VertexId) -> Result<f64, AnalysisError> {
    check_vertex(g, x)?;
    check_vertex(g, y)?;
    if x == y {
        return Ok(0.0);
    }
    let q0 = trace_form(g);
    let fixed = BTreeMap::from([(x.0, 0.0), (y.0, 1.0)]);
    let u = solve_vertex_system(&q0, &vec![0.0; g.vertex_count()], &fixed)?.values;
    let e = q0.quadratic_form(&u);
    if e <= 0.0 {
        return Err(SolverError::SingularSystem(format!("vertices {} and {} are not connected", g.label(x), g.label(y))).into());
    }
    Ok(1.0 / e)
}

/// Constants in the Sobolev inequality `‖u‖∞² ≤ C (‖u‖² + S(u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevConstants {
    /// `max_e l_i(e) / ω(e)`, the constant for functions vanishing at the vertices.
    pub edge: f64,
    /// Best `C` in `‖U‖∞² ≤ C (‖U‖²_{ℓ²(M)} + Q₀(U) + Q(U))`.
    pub discrete: f64,
    /// Best `C` in `‖U‖∞² ≤ C · Uᵀ(Δ + Δ₁ + M₁)U`, the vertex part of the
    /// `1`-harmonic functions.
    pub harmonic: f64,
    /// `2 max(edge, harmonic)`, valid for every function.
    pub combined: f64,
}

/// Best constant in `max_x U(x)² ≤ C Uᵀ A U`, which is `max_x (A⁻¹)_xx`.
fn max_inverse_diagonal(a: &DMatrix<f64>) -> Result<f64, AnalysisError> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = a
        .clone()
        .cholesky()
        .ok_or(crate::linalg::LinAlgError::NotPositiveDefinite)?;
    let inv = chol.inverse();
    Ok((0..a.nrows()).map(|i| inv[(i, i)]).fold(0.0, f64::max))
}

/// Splitting `u = u_o + H₁U` with `u_o` vanishing at the vertices, the two
/// parts are orthogonal for `‖·‖² + S`, `‖u_o‖∞² ≤ l_i/ω · E(u_o)` on each
/// edge and `‖H₁U‖∞ = ‖U‖∞`, which gives the combined constant.
pub fn sobolev_constants(g: &WeightedMetricGraph) -> Result<SobolevConstants, AnalysisError> {
    let edge = g
        .edge_ids()
        .map(|e| g.intrinsic_length(e) / g.intrinsic_weight(e))
        .fold(0.0, f64::max);
    let free: Vec<usize> = g.vertices().filter(|v| !g.is_clamped(*v)).map(|v| v.0).collect();
    let m = vertex_measure(g);
    let mut a = trace_form(g).plus(&discrete_laplacian(g));
    for &x in &free {
        a.add(x, x, m[x]);
    }
    let discrete = max_inverse_diagonal(&a.restrict(&free).to_dense())?;
    let harmonic = max_inverse_diagonal(&resolvent_matrix(g, 1.0)?.restrict(&free).to_dense())?;
    Ok(SobolevConstants {
        edge,
        discrete,
        harmonic,
        combined: 2.0 * edge.max(harmonic),
    })
}

/// Sobolev inequality on a finite graph. It always holds; the witness is
/// the combined constant and the diagnostics list its parts.
pub fn sobolev_check(g: &WeightedMetricGraph) -> Result<Verdict, AnalysisError> {
    let c = sobolev_constants(g)?;
    Ok(Verdict::holds("sobolev inequality", Witness::Constant(c.combined), false)
        .note(format!("edge constant {:.14e}", c.edge))
        .note(format!("discrete constant {:.14e}", c.discrete))
        .note(format!("harmonic vertex constant {:.14e}", c.harmonic)))
}

/// Relative `E`-boundedness of the discrete part `Q`.
///
/// The necessary bound is `max_{x ∈ supp Q} (Σ_y j(x,y) + k(x)) / cap({x}, supp Q)`.
/// The sufficient bound transports every jump along a canonical geodesic of
/// its endpoints: `max_e Σ j(x,y) d_c(x,y) [e on the geodesic from x to y]`.
/// Killing weights on their own need no path, so only jumps contribute.
pub fn e_boundedness_check(g: &WeightedMetricGraph) -> Result<Verdict, AnalysisError> {
    let q = g.discrete_part();
    let support = q.support();
    let mut necessary = 0.0f64;
    for &x in &support {
        let cap = capacity(g, x, &support)?.value;
        necessary = necessary.max(q.total_weight(x) / cap);
    }
    let mut load = vec![0.0; g.edge_count()];
    for (x, y, j) in q.jumps() {
        if j == 0.0 {
            continue;
        }
        let path = geodesic(g, Point::Vertex(x), Point::Vertex(y), Scale::Canonical)?;
        for w in path.vertices.windows(2) {
            let e = g.edge_between(w[0], w[1]).expect("geodesic steps along edges");
            load[e.0] += j * path.length;
        }
    }
    let sufficient = load.iter().copied().fold(0.0, f64::max);
    Ok(Verdict::holds("E-boundedness", Witness::Bounds { necessary, sufficient }, false)
        .note(format!("necessary constant {necessary:.14e}"))
        .note(format!("sufficient constant {sufficient:.14e}"))
        .note(format!("gap {:.14e}", sufficient - necessary)))
}
