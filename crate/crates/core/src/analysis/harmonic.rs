use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::edge_functions::{energy, EdgeFunction, VertexFunction};
use crate::graph_model::{VertexId, WeightedMetricGraph};
use crate::kirchhoff_ops::{discrete_laplacian, harmonic_extension, resolvent_matrix, trace_form};
use crate::solver::solve_vertex_system;

use super::AnalysisError;

/// Relative singular value threshold for the numerical kernel.
const RANK_TOLERANCE: f64 = 1e-10;

/// Basis of `{U : (Δ + Δ_α + M_α) U = 0 at every non-clamped vertex}`.
///
/// Clamped vertices act as the boundary here: their equations are dropped
/// and their values are unknowns, so the kernel has one dimension per
/// boundary vertex on a connected graph. Without clamped vertices the
/// system is positive definite and the basis is empty. The basis is
/// orthonormal in `ℓ²` and comes from an SVD of the interior rows.
pub fn harmonic_space(g: &WeightedMetricGraph, alpha: f64) -> Result<Vec<VertexFunction>, AnalysisError> {
    let a = resolvent_matrix(g, alpha)?.to_dense();
    let n = g.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rows = DMatrix::<f64>::zeros(n, n);
    for x in g.vertices().filter(|&x| !g.is_clamped(x)) {
        rows.set_row(x.0, &a.row(x.0));
    }
    let svd = rows.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let scale = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= RANK_TOLERANCE * scale * n as f64 {
            basis.push(VertexFunction(v_t.row(k).iter().copied().collect()));
        }
    }
    Ok(basis)
}

/// `u = u_o + u_h` with `u_h` the `S`-harmonic function agreeing with `u` on
/// the boundary set and `u_o` vanishing there.
#[derive(Debug, Clone)]
pub struct Royden {
    pub orthogonal: EdgeFunction,
    pub harmonic: EdgeFunction,
    pub energy: f64,
    pub energy_orthogonal: f64,
    pub energy_harmonic: f64,
    /// `|S(u) − S(u_o) − S(u_h)| / S(u)`, zero when `S(u) = 0`.
    pub defect: f64,
}

/// Split a continuous `u` into a part vanishing on `boundary` and the
/// harmonic extension of its boundary values. Harmonic here means
/// `(Q₀ + Q) U = 0` at the remaining vertices with linear edge profiles.
pub fn royden_decompose(
    g: &WeightedMetricGraph,
    u: &EdgeFunction,
    boundary: &[VertexId],
) -> Result<Royden, AnalysisError> {
    if boundary.is_empty() {
        return Err(AnalysisError::EmptyBoundary);
    }
    for &b in boundary {
        if b.0 >= g.vertex_count() {
            return Err(AnalysisError::UnknownVertex(b.0));
        }
    }
    let trace = u.vertex_trace(g)?;
    let fixed: BTreeMap<usize, f64> = boundary.iter().map(|b| (b.0, trace[b.0])).collect();
    let a = trace_form(g).plus(&discrete_laplacian(g));
    let rhs = vec![0.0; g.vertex_count()];
    let solve = solve_vertex_system(&a, &rhs, &fixed)?;
    let uh_vertices = VertexFunction(solve.values);
    let harmonic = harmonic_extension(g, 0.0, &uh_vertices)?;
    let uo_vertices = VertexFunction(trace.iter().zip(uh_vertices.iter()).map(|(a, b)| a - b).collect());
    let orthogonal = EdgeFunction::new(u.sub(&harmonic).profiles, Some(uo_vertices));
    let s = energy(g, u)?.total;
    let so = energy(g, &orthogonal)?.total;
    let sh = energy(g, &harmonic)?.total;
    let defect = if s > 0.0 { (s - so - sh).abs() / s } else { (so + sh).abs() };
    Ok(Royden {
        orthogonal,
        harmonic,
        energy: s,
        energy_orthogonal: so,
        energy_harmonic: sh,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::edge_functions::{lp_norm, weighted_divergence, Exponent, Measure};
    use crate::graph_model::{build_metric_graph, DiscreteGraph, DiscretePart, EdgeWeights, Sequence, SphericalSpec};

    fn unit_path(n: usize) -> WeightedMetricGraph {
        build_metric_graph(DiscreteGraph::path(n), EdgeWeights::uniform(n, 1.0, 1.0, 1.0), DiscretePart::new()).unwrap()
    }

    #[test]
    fn irreducible_graph_has_trivial_kernel() {
        let g = build_metric_graph(
            DiscreteGraph::star(3),
            EdgeWeights::intrinsic(&[0.3, 1.0, 2.0], &[1.0, 5.0, 0.2]),
            DiscretePart::new().with_jump(VertexId(1), VertexId(2), 0.7),
        )
        .unwrap();
        assert!(harmonic_space(&g, 1.0).unwrap().is_empty());
    }

    #[test]
    fn path_with_boundary_end() {
        let g = unit_path(1).with_clamped(BTreeSet::from([VertexId(1)])).unwrap();
        let basis = harmonic_space(&g, 1.0).unwrap();
        assert_eq!(basis.len(), 1);
        // row 0: (1/sinh 1 + tanh ½) U0 = U1/sinh 1, i.e. U0 = U1 / cosh 1
        let u = &basis[0];
        let ratio = u[0] / u[1];
        assert!((ratio - 1.0 / 1f64.cosh()).abs() < 1e-13, "{ratio}");
        let h = harmonic_extension(&g, 1.0, u).unwrap();
        let t = 0.4f64;
        let want = u[1] * t.cosh() / 1f64.cosh();
        assert!((h.profiles[0].eval(t) - want).abs() < 1e-13);
    }

    #[test]
    fn truncation_kernel_counts_boundary_sphere() {
        let spec = SphericalSpec::regular_tree(2, Sequence::Const(0.8));
        let t = spec.materialize(3).unwrap();
        let outer: BTreeSet<_> = t.spheres[3].iter().copied().collect();
        let g = t.graph.with_clamped(outer).unwrap();
        let basis = harmonic_space(&g, 1.0).unwrap();
        assert_eq!(basis.len(), t.spheres[3].len());
    }

    #[test]
    fn continuous_harmonic_space_has_the_same_dimension() {
        let spec = SphericalSpec::regular_tree(2, Sequence::Const(0.5));
        let t = spec.materialize(2).unwrap();
        let outer: BTreeSet<_> = t.spheres[2].iter().copied().collect();
        let g = t.graph.with_clamped(outer).unwrap();
        let basis = harmonic_space(&g, 2.0).unwrap();
        let ext: Vec<EdgeFunction> = basis.iter().map(|u| harmonic_extension(&g, 2.0, u).unwrap()).collect();
        let k = ext.len();
        let gram = DMatrix::from_fn(k, k, |i, j| crate::edge_functions::inner_product(&g, &ext[i], &ext[j]));
        let rank = gram.rank(1e-10 * gram.norm());
        assert_eq!(rank, k);
        // Kirchhoff balance at interior vertices: Σ ω u′ = 0
        for u in &ext {
            let div = weighted_divergence(&g, u);
            for x in g.vertices().filter(|&x| !g.is_clamped(x)) {
                assert!(div[x.0].abs() < 1e-12, "{}", div[x.0]);
            }
        }
    }

    fn star3() -> WeightedMetricGraph {
        build_metric_graph(
            DiscreteGraph::star(3),
            EdgeWeights::intrinsic(&[0.7, 1.0, 0.4], &[1.0, 2.0, 0.5]),
            DiscretePart::new(),
        )
        .unwrap()
    }

    /// Linear interpolation of `values` plus `bump[e]·sin(π t / l)` on edge `e`.
    fn linear_plus(g: &WeightedMetricGraph, values: &[f64], bump: &[f64]) -> EdgeFunction {
        EdgeFunction::continuous_from_fn(g, Some(32), |e, t| {
            let (h, tl) = g.endpoints(e);
            let l = g.intrinsic_length(e);
            values[h.0] + (values[tl.0] - values[h.0]) * t / l + bump[e.0] * (std::f64::consts::PI * t / l).sin()
        })
        .unwrap()
    }

    #[test]
    fn harmonic_input_has_no_orthogonal_part() {
        let g = star3();
        let leaves = [VertexId(1), VertexId(2), VertexId(3)];
        let w = 1.0 / 0.7 + 2.0 + 0.5 / 0.4;
        let c = (2.0 / 1.0 * 1.0 + 0.5 / 0.4 * (-1.0)) / w;
        let u = linear_plus(&g, &[c, 0.0, 1.0, -1.0], &[0.0; 3]);
        let r = royden_decompose(&g, &u, &leaves).unwrap();
        assert!(lp_norm(&g, &r.orthogonal, Exponent::Infinity, Measure::Edge) < 1e-12);
    }

    #[test]
    fn zero_boundary_data_has_no_harmonic_part() {
        let g = star3();
        let u = linear_plus(&g, &[1.0, 0.0, 0.0, 0.0], &[0.3, -1.0, 2.0]);
        let r = royden_decompose(&g, &u, &[VertexId(1), VertexId(2), VertexId(3)]).unwrap();
        assert!(lp_norm(&g, &r.harmonic, Exponent::Infinity, Measure::Edge) < 1e-14);
    }

    #[test]
    fn pythagoras_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..50 {
            let lengths: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
            let omegas: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..10.0)).collect();
            let mut q = DiscretePart::new();
            if case % 2 == 1 {
                q.set_jump(VertexId(1), VertexId(2), rng.gen_range(0.0..2.0));
                q.set_killing(VertexId(0), rng.gen_range(0.0..2.0));
            }
            let g = build_metric_graph(DiscreteGraph::star(3), EdgeWeights::intrinsic(&lengths, &omegas), q).unwrap();
            let values: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let u = linear_plus(&g, &values, &a);
            let r = royden_decompose(&g, &u, &[VertexId(1), VertexId(2), VertexId(3)]).unwrap();
            let parts = energy(&g, &r.orthogonal).unwrap().total + energy(&g, &r.harmonic).unwrap().total;
            let whole = energy(&g, &u).unwrap().total;
            assert!((whole - parts).abs() <= 1e-9 * whole, "case {case}: {whole} vs {parts}");
            let uo = r.orthogonal.vertex_trace(&g).unwrap();
            for b in 1..4 {
                assert!(uo[b].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn empty_boundary_is_an_error() {
        let g = star3();
        let u = EdgeFunction::constant(&g, 1.0);
        assert!(matches!(royden_decompose(&g, &u, &[]), Err(AnalysisError::EmptyBoundary)));
    }
}
