use std::collections::BTreeSet;

use crate::edge_functions::EdgeFunction;
use crate::graph_model::{SphericalSpec, WeightedMetricGraph};

use super::krein::{krein_resolve, ResolventSolution};
use super::SolverError;

/// Resolvents on the balls `B_{r_n}` of a spherically symmetric graph, with
/// the outer sphere clamped.
#[derive(Debug, Clone)]
pub struct Exhaustion {
    pub depths: Vec<usize>,
    pub graphs: Vec<WeightedMetricGraph>,
    pub solutions: Vec<ResolventSolution>,
    pub root_values: Vec<f64>,
    /// `max_x |U_{n+1}(x) − U_n(x)|` over the vertices of the smaller ball.
    pub increments: Vec<f64>,
}

/// Solve on the truncations at `depths` (increasing) for the radial
/// right-hand side `f(n, t)` on edges between `S_{n−1}` and `S_n`.
/// For `f ≥ 0` the values at every vertex must not decrease with the depth.
pub fn exhaustion_resolve(
    spec: &SphericalSpec,
    alpha: f64,
    f: impl Fn(usize, f64) -> f64,
    depths: &[usize],
) -> Result<Exhaustion, SolverError> {
    let mut out = Exhaustion {
        depths: depths.to_vec(),
        graphs: Vec::new(),
        solutions: Vec::new(),
        root_values: Vec::new(),
        increments: Vec::new(),
    };
    let mut nonnegative = true;
    for (i, &depth) in depths.iter().enumerate() {
        if i > 0 && depth <= depths[i - 1] {
            return Err(SolverError::InvalidData("depths must increase".into()));
        }
        let t = spec.materialize(depth)?;
        let mut generation = vec![0; t.graph.vertex_count()];
        for (n, sphere) in t.spheres.iter().enumerate() {
            for v in sphere {
                generation[v.0] = n;
            }
        }
        let outer: BTreeSet<_> = t.spheres[depth].iter().copied().collect();
        let g = t.graph.with_clamped(outer)?;
        let rhs = EdgeFunction::from_fn(&g, None, |e, s| {
            let (a, b) = g.endpoints(e);
            f(generation[a.0].max(generation[b.0]), s)
        });
        nonnegative &= rhs.min_sample() >= 0.0;
        let sol = krein_resolve(&g, alpha, &rhs)?;
        out.root_values.push(sol.vertex_values[0]);
        if let Some(prev) = out.solutions.last() {
            let prev_g: &WeightedMetricGraph = out.graphs.last().expect("graphs and solutions align");
            let scale = sol.vertex_values.sup_norm().max(f64::MIN_POSITIVE);
            let mut inc = 0.0f64;
            for x in prev_g.vertices() {
                let (before, after) = (prev.vertex_values[x.0], sol.vertex_values[x.0]);
                inc = inc.max((after - before).abs());
                if nonnegative && after < before - 1e-12 * scale {
                    return Err(SolverError::NonmonotoneDetected {
                        vertex: prev_g.label(x).to_string(),
                        from: depths[i - 1],
                        to: depth,
                        before,
                        after,
                    });
                }
            }
            out.increments.push(inc);
        }
        out.graphs.push(g);
        out.solutions.push(sol);
    }
    Ok(out)
}
