//! Seeded random instances and small fixtures.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph_model::{build_metric_graph, DiscreteGraph, DiscretePart, EdgeWeights, VertexId, WeightedMetricGraph};
use crate::quantum::{QuantumGraph, StoneanSublattice, VertexCondition, VertexConditionOperator};

/// Ranges for [`random_graph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraphOptions {
    pub max_edges: usize,
    /// Intrinsic lengths are drawn from `(0, max_length]`.
    pub max_length: f64,
    pub weight_range: (f64, f64),
    /// Probability that a vertex pair carries a jump, and the weight bound.
    pub jump_density: f64,
    pub max_jump: f64,
    /// Probability that a vertex carries killing, and the weight bound.
    pub killing_density: f64,
    pub max_killing: f64,
}

impl Default for RandomGraphOptions {
    fn default() -> Self {
        RandomGraphOptions {
            max_edges: 20,
            max_length: 1.0,
            weight_range: (0.1, 10.0),
            jump_density: 0.1,
            max_jump: 2.0,
            killing_density: 0.3,
            max_killing: 2.0,
        }
    }
}

/// Length in `(0, max]`, kept away from zero so grids stay reasonable.
fn length<R: Rng>(rng: &mut R, max: f64) -> f64 {
    max * (1.0 - rng.gen::<f64>()).max(0.05)
}

fn random_edges<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(VertexId, VertexId)> {
    let mut edges: Vec<(VertexId, VertexId)> = (1..n).map(|i| (VertexId(rng.gen_range(0..i)), VertexId(i))).collect();
    let mut tries = 0;
    while edges.len() < n - 1 + extra && tries < 100 * (extra + 1) {
        tries += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let (a, b) = (a.min(b), a.max(b));
        if edges.iter().any(|&(x, y)| (x.0.min(y.0), x.0.max(y.0)) == (a, b)) {
            continue;
        }
        edges.push((VertexId(a), VertexId(b)));
    }
    edges
}

/// A connected graph with at most `max_edges` edges, intrinsic lengths in
/// `(0, max_length]`, intrinsic weights in `weight_range` and a random
/// discrete part.
pub fn random_graph<R: Rng>(rng: &mut R, opts: &RandomGraphOptions) -> WeightedMetricGraph {
    let m = rng.gen_range(1..=opts.max_edges.max(1));
    let n = rng.gen_range(2..=m + 1);
    let edges = random_edges(rng, n, m + 1 - n);
    let k = edges.len();
    let l: Vec<f64> = (0..k).map(|_| length(rng, opts.max_length)).collect();
    let (lo, hi) = opts.weight_range;
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut q = DiscretePart::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen::<f64>() < opts.jump_density {
                q.set_jump(VertexId(x), VertexId(y), rng.gen_range(0.0..opts.max_jump));
            }
        }
        if rng.gen::<f64>() < opts.killing_density {
            q.set_killing(VertexId(x), rng.gen_range(0.0..opts.max_killing));
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    build_metric_graph(DiscreteGraph::new(labels, edges), EdgeWeights::intrinsic(&l, &w), q)
        .expect("random graphs are connected and simple")
}

/// A random tree on `n` vertices with given-scale lengths, measure and
/// ellipticity weights drawn independently, and no discrete part.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> WeightedMetricGraph {
    let edges = random_edges(rng, n.max(2), 0);
    let triples: Vec<(f64, f64, f64)> = edges
        .iter()
        .map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.1..5.0), rng.gen_range(0.2..5.0)))
        .collect();
    let labels = (0..n.max(2)).map(|i| format!("t{i}")).collect();
    build_metric_graph(DiscreteGraph::new(labels, edges), EdgeWeights::from_triples(&triples), DiscretePart::new())
        .expect("random trees are valid")
}

/// Markovian `L` on `m` blocks: a jump Laplacian plus nonnegative killing.
pub fn random_markov_operator<R: Rng>(rng: &mut R, m: usize) -> VertexConditionOperator {
    let mut l = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in j + 1..m {
            if rng.gen_bool(0.6) {
                let w = rng.gen_range(0.0..2.0);
                l[(j, k)] -= w;
                l[(k, j)] -= w;
                l[(j, j)] += w;
                l[(k, k)] += w;
            }
        }
        if rng.gen_bool(0.4) {
            l[(j, j)] += rng.gen_range(0.0..1.5);
        }
    }
    VertexConditionOperator { matrix: l }
}

/// Random Stonean conditions on a random graph: every vertex splits its
/// slots into blocks, each slot free with probability `1/8`.
pub fn random_quantum_graph<R: Rng>(rng: &mut R, max_edges: usize) -> QuantumGraph {
    let opts = RandomGraphOptions {
        max_edges,
        jump_density: 0.0,
        killing_density: 0.0,
        ..RandomGraphOptions::default()
    };
    let graph = random_graph(rng, &opts);
    let conditions = graph
        .vertices()
        .map(|x| {
            let deg = graph.degree(x);
            let mut slots: Vec<usize> = (1..=deg).filter(|_| !rng.gen_bool(0.125)).collect();
            slots.shuffle(rng);
            let m = if slots.is_empty() { 0 } else { rng.gen_range(1..=slots.len()) };
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); m];
            for (i, s) in slots.into_iter().enumerate() {
                let b = if i < m { i } else { rng.gen_range(0..m) };
                blocks[b].push(s);
            }
            for b in &mut blocks {
                b.sort_unstable();
            }
            VertexCondition {
                sublattice: StoneanSublattice { blocks },
                operator: random_markov_operator(rng, m),
            }
        })
        .collect();
    QuantumGraph { graph, conditions }
}

/// Unit star of degree six whose center has the blocks `{1,2,3}`, `{4,5}`, `{6}`.
pub fn degree_six_star() -> QuantumGraph {
    let g = build_metric_graph(DiscreteGraph::star(6), EdgeWeights::uniform(6, 1.0, 1.0, 1.0), DiscretePart::new())
        .expect("valid star");
    let mut qg = QuantumGraph::kirchhoff(g);
    qg.conditions[0] = VertexCondition {
        sublattice: StoneanSublattice {
            blocks: vec![vec![1, 2, 3], vec![4, 5], vec![6]],
        },
        operator: VertexConditionOperator::zeros(3),
    };
    qg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::quantum::validate_quantum;

    #[test]
    fn random_graphs_respect_the_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let g = random_graph(&mut rng, &RandomGraphOptions::default());
            assert!(g.edge_count() <= 20);
            assert!(g.is_edge_connected());
            for e in g.edge_ids() {
                assert!(g.intrinsic_length(e) > 0.0 && g.intrinsic_length(e) <= 1.0 + 1e-15);
                assert!((0.1..=10.0).contains(&g.intrinsic_weight(e)));
            }
        }
    }

    #[test]
    fn random_quantum_graphs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let qg = random_quantum_graph(&mut rng, 8);
            validate_quantum(&qg).unwrap();
        }
    }

    #[test]
    fn trees_have_one_edge_less_than_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tree(&mut rng, 9);
        assert_eq!(t.edge_count(), 8);
    }
}
