use std::collections::{BTreeMap, BTreeSet};

use crate::edge_functions::{EdgeFunction, EdgeProfile};
use crate::graph_model::{EdgeId, VertexId, WeightedMetricGraph};

use super::krein::resolve_with;
use super::SolverError;

/// An open subset of the graph: open edges and interior vertices, where every
/// edge at an interior vertex belongs to the set.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSubgraph {
    edges: BTreeSet<EdgeId>,
    vertices: BTreeSet<VertexId>,
}

impl OpenSubgraph {
    pub fn new(
        g: &WeightedMetricGraph,
        edges: impl IntoIterator<Item = EdgeId>,
        vertices: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, SolverError> {
        let edges: BTreeSet<EdgeId> = edges.into_iter().collect();
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        for &e in &edges {
            if e.0 >= g.edge_count() {
                return Err(crate::graph_model::GraphError::UnknownEdge(e.0).into());
            }
        }
        for &v in &vertices {
            if v.0 >= g.vertex_count() {
                return Err(crate::graph_model::GraphError::UnknownVertex(v.0.to_string()).into());
            }
            if g.incident(v).iter().any(|i| !edges.contains(&i.edge)) {
                return Err(SolverError::NotOpen(g.label(v).to_string()));
            }
        }
        if edges.is_empty() {
            return Err(SolverError::EmptyInterior);
        }
        if edges.len() == g.edge_count() && vertices.len() == g.vertex_count() {
            return Err(SolverError::EmptyComplement);
        }
        Ok(OpenSubgraph { edges, vertices })
    }

    /// The given vertices together with all their edges.
    pub fn around(g: &WeightedMetricGraph, vertices: &[VertexId]) -> Result<Self, SolverError> {
        let edges: Vec<EdgeId> = vertices.iter().flat_map(|&v| g.incident(v).iter().map(|i| i.edge)).collect();
        Self::new(g, edges, vertices.iter().copied())
    }

    /// Everything except the given vertices.
    pub fn complement_of(g: &WeightedMetricGraph, removed: &[VertexId]) -> Result<Self, SolverError> {
        let keep: Vec<VertexId> = g.vertices().filter(|v| !removed.contains(v)).collect();
        Self::new(g, g.edge_ids(), keep)
    }

    pub fn edges(&self) -> &BTreeSet<EdgeId> {
        &self.edges
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }
}

/// The `α`-resolvent problem on `y` with `u = w` outside: inside `y` the weak
/// equation `S(u, φ) + α⟨u, φ⟩ = ⟨f, φ⟩` holds for every test function `φ`
/// supported in `y`. Boundary values are folded into the vertex system.
pub fn dirichlet_problem(
    g: &WeightedMetricGraph,
    y: &OpenSubgraph,
    alpha: f64,
    f: &EdgeFunction,
    w: &EdgeFunction,
) -> Result<EdgeFunction, SolverError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    w.check_graph(g)?;
    let trace = w.vertex_trace(g)?;
    let mut fixed = BTreeMap::new();
    for v in g.vertices() {
        if !y.vertices.contains(&v) {
            fixed.insert(v.0, trace[v.0]);
        } else if g.is_clamped(v) {
            fixed.insert(v.0, 0.0);
        }
    }
    let inner = resolve_with(g, alpha, f, &fixed)?;
    let profiles: Vec<EdgeProfile> = g
        .edge_ids()
        .map(|e| {
            if y.edges.contains(&e) {
                inner.u.profiles[e.0].clone()
            } else {
                w.profiles[e.0].clone()
            }
        })
        .collect();
    Ok(EdgeFunction::new(profiles, Some(inner.vertex_values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge_functions::{lp_norm, Exponent, Measure};
    use crate::graph_model::{build_metric_graph, DiscreteGraph, DiscretePart, EdgeWeights};
    use crate::solver::fem_oracle_resolve;

    fn path2() -> WeightedMetricGraph {
        build_metric_graph(DiscreteGraph::path(2), EdgeWeights::uniform(2, 1.0, 1.0, 1.0), DiscretePart::new()).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = path2();
        let y = OpenSubgraph::around(&g, &[VertexId(1)]).unwrap();
        let z = EdgeFunction::zero(&g);
        let u = dirichlet_problem(&g, &y, 1.0, &z, &z).unwrap();
        assert_eq!(lp_norm(&g, &u, Exponent::Infinity, Measure::Edge), 0.0);
    }

    #[test]
    fn two_edge_interpolation() {
        let g = path2();
        let y = OpenSubgraph::around(&g, &[VertexId(1)]).unwrap();
        let w = EdgeFunction::piecewise_linear(&g, &[1.0, 0.0, 0.0], 2, |_, _| 0.0);
        let u = dirichlet_problem(&g, &y, 1.0, &EdgeFunction::zero(&g), &w).unwrap();
        let uy = u.vertex_values.as_ref().unwrap()[1];
        // coth(1)·2·U = 1/sinh(1)
        let exact = 1.0 / (2.0 * 1f64.cosh());
        assert!((uy - exact).abs() < 1e-14);
        let t = 0.3f64;
        let want = ((1.0 - t).sinh() + exact * t.sinh()) / 1f64.sinh();
        assert!((u.profiles[0].eval(t) - want).abs() < 1e-14);
    }

    #[test]
    fn clamped_vertex_matches_penalty_oracle() {
        let g = build_metric_graph(DiscreteGraph::star(3), EdgeWeights::intrinsic(&[1.0, 0.6, 0.9], &[1.0, 2.0, 0.5]), DiscretePart::new()).unwrap();
        let y = OpenSubgraph::complement_of(&g, &[VertexId(2)]).unwrap();
        let f = EdgeFunction::from_fn(&g, Some(256), |e, t| 1.0 + t * e.0 as f64);
        let w = EdgeFunction::zero(&g);
        let u = dirichlet_problem(&g, &y, 1.0, &f, &w).unwrap();
        let penal = g.with_discrete_part(DiscretePart::new().with_killing(VertexId(2), 1e9)).unwrap();
        let o = fem_oracle_resolve(&penal, 1.0, &f, 256).unwrap();
        let d = lp_norm(&g, &u.sub(&o), Exponent::Two, Measure::Edge) / lp_norm(&g, &o, Exponent::Two, Measure::Edge);
        assert!(d < 1e-5, "{d}");
        assert!(u.vertex_values.as_ref().unwrap()[2].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sets() {
        let g = path2();
        assert!(matches!(OpenSubgraph::new(&g, [EdgeId(0)], [VertexId(1)]), Err(SolverError::NotOpen(_))));
        assert!(matches!(OpenSubgraph::new(&g, [], []), Err(SolverError::EmptyInterior)));
        assert!(matches!(OpenSubgraph::complement_of(&g, &[]), Err(SolverError::EmptyComplement)));
    }
}
