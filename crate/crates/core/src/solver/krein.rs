use std::collections::BTreeMap;

use crate::edge_functions::{lp_norm, EdgeFunction, Exponent, Measure, VertexFunction};
use crate::graph_model::{End, WeightedMetricGraph};
use crate::kirchhoff_ops::{harmonic_extension, normal_derivative_green, part_green, resolvent_matrix};
use crate::linalg::SolveMethod;

use super::{
    solve_vertex_system, SolverError, SolverWarning, CONDITION_THRESHOLD, WEAK_RESIDUAL_TOLERANCE,
};

/// `u = G_α f + H_α U` together with its parts and diagnostics.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub alpha: f64,
    pub u: EdgeFunction,
    /// The vertex trace `U = u|_V`.
    pub vertex_values: VertexFunction,
    pub green_part: EdgeFunction,
    pub harmonic_part: EdgeFunction,
    /// `‖A U − b‖ / ‖b‖` for the vertex system.
    pub discrete_residual: f64,
    /// Hat-function weak residual divided by `‖f‖₂`.
    pub weak_residual: f64,
    pub continuity_defect: f64,
    pub condition_estimate: Option<f64>,
    pub method: SolveMethod,
    pub warnings: Vec<SolverWarning>,
}

/// `(L + α)⁻¹ f` by the Krein formula. Clamped vertices of `g` carry `U = 0`.
pub fn krein_resolve(g: &WeightedMetricGraph, alpha: f64, f: &EdgeFunction) -> Result<ResolventSolution, SolverError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    let fixed: BTreeMap<usize, f64> = g.clamped().iter().map(|v| (v.0, 0.0)).collect();
    resolve_with(g, alpha, f, &fixed)
}

pub(crate) fn resolve_with(
    g: &WeightedMetricGraph,
    alpha: f64,
    f: &EdgeFunction,
    fixed: &BTreeMap<usize, f64>,
) -> Result<ResolventSolution, SolverError> {
    let green_part = part_green(g, alpha, f)?;
    let rhs = normal_derivative_green(g, alpha, f)?;
    let a = resolvent_matrix(g, alpha)?;
    let solve = solve_vertex_system(&a, &rhs, fixed)?;
    let vertex_values = VertexFunction(solve.values);
    let harmonic_part = harmonic_extension(g, alpha, &vertex_values)?;
    let u = green_part.add(&harmonic_part);
    let mut warnings = Vec::new();
    if let Some(c) = solve.condition {
        if c > CONDITION_THRESHOLD {
            warnings.push(SolverWarning::IllConditioned { estimate: c });
        }
    }
    let fixed_set: Vec<bool> = (0..g.vertex_count()).map(|i| fixed.contains_key(&i)).collect();
    let residual = weak_residual(g, alpha, f, &u, &fixed_set)?;
    if residual > WEAK_RESIDUAL_TOLERANCE {
        warnings.push(SolverWarning::ResidualAboveTolerance {
            residual,
            tolerance: WEAK_RESIDUAL_TOLERANCE,
        });
    }
    Ok(ResolventSolution {
        alpha,
        continuity_defect: u.continuity_defect(g),
        u,
        vertex_values,
        green_part,
        harmonic_part,
        discrete_residual: solve.residual,
        weak_residual: residual,
        condition_estimate: solve.condition,
        method: solve.method,
        warnings,
    })
}

/// Residual of `S(u, φ) + α⟨u, φ⟩ − ⟨f, φ⟩` over the hat functions of the
/// doubled grid of `f` (one hat per even node, plus one per vertex not in
/// `fixed`), measured as `(Σ r(φ)² / ∫φ)^{1/2}` and divided by `‖f‖₂`.
///
/// Since `f` enters the resolvent through Simpson rules, it is read as
/// piecewise quadratic on pairs of cells, and every pairing with a hat is
/// computed by Simpson on those panels.
pub fn weak_residual(
    g: &WeightedMetricGraph,
    alpha: f64,
    f: &EdgeFunction,
    u: &EdgeFunction,
    fixed: &[bool],
) -> Result<f64, SolverError> {
    f.check_graph(g)?;
    let n = g.vertex_count();
    let mut vertex_r = vec![0.0; n];
    let mut vertex_m = vec![0.0; n];
    let mut sum = 0.0;
    for e in g.edge_ids() {
        let w = g.intrinsic_weight(e);
        let l = g.intrinsic_length(e);
        let fp = f.profile(e);
        let m = fp.grid().unwrap_or_else(|| crate::edge_functions::default_cells(l));
        let h = l / m as f64;
        let fv = fp.node_values(m);
        let uv = u.profile(e).node_values(m);
        // α u − f at the nodes
        let z: Vec<f64> = uv.iter().zip(&fv).map(|(a, b)| alpha * a - b).collect();
        for j in 1..m / 2 {
            let c = 2 * j;
            let stiff = (2.0 * uv[c] - uv[c - 2] - uv[c + 2]) / (2.0 * h);
            let mass = h / 3.0 * (2.0 * z[c - 1] + 2.0 * z[c] + 2.0 * z[c + 1]);
            let r = w * (stiff + mass);
            sum += r * r / (w * 2.0 * h);
        }
        let (x, y) = g.endpoints(e);
        for (v, end) in [(x, End::Head), (y, End::Tail)] {
            let (a, b, c) = match end {
                End::Head => (0, 1, 2),
                End::Tail => (m, m - 1, m - 2),
            };
            let stiff = (uv[a] - uv[c]) / (2.0 * h);
            let mass = h / 3.0 * (z[a] + 2.0 * z[b]);
            vertex_r[v.0] += w * (stiff + mass);
            vertex_m[v.0] += w * h;
        }
    }
    let trace = u.vertex_trace(g)?;
    let q = g.discrete_part();
    for (a, b, j) in q.jumps() {
        let d = j * (trace[a.0] - trace[b.0]);
        vertex_r[a.0] += d;
        vertex_r[b.0] -= d;
    }
    for (x, k) in q.killings() {
        vertex_r[x.0] += k * trace[x.0];
    }
    for v in 0..n {
        if !fixed[v] {
            sum += vertex_r[v] * vertex_r[v] / vertex_m[v];
        }
    }
    let nf = lp_norm(g, f, Exponent::Two, Measure::Edge);
    let r = sum.sqrt();
    Ok(if nf > 0.0 { r / nf } else { r })
}
