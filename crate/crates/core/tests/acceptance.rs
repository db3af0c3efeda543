//! Acceptance run: one PASS/FAIL line per criterion. With `ACCEPTANCE_STRICT`
//! set, exits nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metricgraph::analysis::{capacity, recurrence_test, resistance, AnalysisOptions, Outcome, Witness};
use metricgraph::edge_functions::{
    energy, inner_product, lp_norm, EdgeFunction, EdgeProfile, Exponent, Measure, SampledProfile, VertexFunction,
};
use metricgraph::generators::{degree_six_star, random_graph, random_quantum_graph, random_tree, RandomGraphOptions};
use metricgraph::graph_model::{
    build_metric_graph, DiscreteGraph, DiscretePart, EdgeId, EdgeWeights, End, Sequence, SphericalSpec, VertexId,
    WeightedMetricGraph,
};
use metricgraph::kirchhoff_ops::{
    feller_measure, harmonic_extension, kirchhoff_matrix, normalized_normal_derivative_green, part_green, trace_form,
    vertex_measure,
};
use metricgraph::quantum::{cut_quantum, CutOrigin, QuantumGraph};
use metricgraph::solver::{exhaustion_resolve, fem_oracle_resolve, krein_resolve};

type Outcome_ = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn wave_coefficients(r: &mut ChaCha8Rng, g: &WeightedMetricGraph, max_freq: f64) -> Vec<[f64; 4]> {
    g.edge_ids()
        .map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(0.0..max_freq), r.gen_range(0.0..6.3)])
        .collect()
}

/// `a + b·sin(c·t + d)` per edge.
fn wave_function(g: &WeightedMetricGraph, cells: Option<usize>, coef: &[[f64; 4]]) -> EdgeFunction {
    EdgeFunction::from_fn(g, cells, |e, t| {
        let [a, b, c, d] = coef[e.0];
        a + b * (c * t + d).sin()
    })
}

fn smooth_function(r: &mut ChaCha8Rng, g: &WeightedMetricGraph, cells: Option<usize>) -> EdgeFunction {
    let coef = wave_coefficients(r, g, 6.0);
    wave_function(g, cells, &coef)
}

fn nonnegative_function(r: &mut ChaCha8Rng, g: &WeightedMetricGraph, cells: Option<usize>) -> EdgeFunction {
    let coef: Vec<[f64; 3]> = g
        .edge_ids()
        .map(|_| {
            let zero = r.gen_bool(0.2);
            let a = if zero { 0.0 } else { r.gen_range(0.0..2.0) };
            [a, r.gen_range(0.0..6.0), r.gen_range(0.0..6.3)]
        })
        .collect();
    EdgeFunction::from_fn(g, cells, |e, t| {
        let [a, c, d] = coef[e.0];
        a * (1.0 + (c * t + d).sin()) / 2.0
    })
}

fn random_vertex_function(r: &mut ChaCha8Rng, n: usize, lo: f64) -> VertexFunction {
    VertexFunction((0..n).map(|_| r.gen_range(lo..1.0)).collect())
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn krein_oracle() -> Outcome_ {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = (0.0f64, None);
    for case in 0..50 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let alpha = r.gen_range(0.2..5.0);
        let coef = wave_coefficients(&mut r, &g, 6.0);
        let f = wave_function(&g, Some(512), &coef);
        let k = krein_resolve(&g, alpha, &f).map_err(|e| format!("case {case}: {e}"))?;
        let o = fem_oracle_resolve(&g, alpha, &f, 512).map_err(|e| format!("case {case}: {e}"))?;
        let d = lp_norm(&g, &k.u.sub(&o), Exponent::Two, Measure::Edge) / lp_norm(&g, &k.u, Exponent::Two, Measure::Edge);
        if d > worst.0 {
            worst = (d, Some((g, alpha, coef, k.vertex_values)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut detail = format!("max relative L2 distance {:.3e}, runtime {secs:.1} s", worst.0);
    // on the worst case, compare against the oracle extrapolated from 1024
    // and 2048 cells to separate oracle error from solver error
    if let Some((g, alpha, coef, kv)) = worst.1 {
        let trace = |n: usize| {
            fem_oracle_resolve(&g, alpha, &wave_function(&g, Some(n), &coef), n)
                .map_err(|e| e.to_string())
                .and_then(|u| u.vertex_trace(&g).map_err(|e| e.to_string()))
        };
        let (a, b) = (trace(1024)?, trace(2048)?);
        let sup = kv.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = (0..g.vertex_count())
            .map(|x| ((4.0 * b[x] - a[x]) / 3.0 - kv[x]).abs())
            .fold(0.0, f64::max);
        detail.push_str(&format!("; worst case vs extrapolated oracle {:.3e} relative at vertices", gap / sup));
    }
    if worst.0 <= 1e-5 && secs <= 60.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn isometry() -> Outcome_ {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let alpha = r.gen_range(0.05..10.0);
        let u = random_vertex_function(&mut r, g.vertex_count(), -1.0);
        let h = harmonic_extension(&g, alpha, &u).map_err(|e| e.to_string())?;
        let lhs = alpha * lp_norm(&g, &h, Exponent::Two, Measure::Edge).powi(2)
            + energy(&g, &h).map_err(|e| e.to_string())?.diffusion;
        let (lap, pot) = kirchhoff_matrix(&g, alpha).map_err(|e| e.to_string())?;
        let rhs = pot.quadratic_form(&u) + lap.quadratic_form(&u);
        worst = worst.max(relative(lhs, rhs));
    }
    let detail = format!("max relative error {worst:.3e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn adjointness() -> Outcome_ {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let alpha = r.gen_range(0.0..5.0);
        let big_f = random_vertex_function(&mut r, g.vertex_count(), -1.0);
        let f = smooth_function(&mut r, &g, None);
        let lhs = inner_product(&g, &harmonic_extension(&g, alpha, &big_f).map_err(|e| e.to_string())?, &f);
        let m = vertex_measure(&g);
        let d = normalized_normal_derivative_green(&g, alpha, &f).map_err(|e| e.to_string())?;
        let rhs: f64 = (0..g.vertex_count()).map(|x| big_f[x] * d[x] * m[x]).sum();
        worst = worst.max(relative(lhs, rhs));
    }
    let detail = format!("max relative error {worst:.3e}");
    if worst <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn contraction() -> Outcome_ {
    let mut r = rng(4);
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for case in 0..50 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let alpha = r.gen_range(0.0..5.0);
        let f = smooth_function(&mut r, &g, None);
        let gf = part_green(&g, alpha, &f).map_err(|e| e.to_string())?;
        for p in [Exponent::One, Exponent::Two, Exponent::Infinity] {
            let a = lp_norm(&g, &gf, p, Measure::Edge);
            let b = lp_norm(&g, &f, p, Measure::Edge);
            worst = worst.max(a / b);
            if a > b {
                violations.push(format!("case {case} p={}", p.value()));
            }
        }
    }
    let detail = format!("{} violations, max ratio {worst:.3e}", violations.len());
    if violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}: {}", violations.join(", ")))
    }
}

fn feller() -> Outcome_ {
    let mut r = rng(5);
    let opts = RandomGraphOptions {
        max_edges: 10,
        ..RandomGraphOptions::default()
    };
    let mut brute_worst = 0.0f64;
    let mut form_worst = 0.0f64;
    for _ in 0..20 {
        let g = random_graph(&mut r, &opts);
        let n = g.vertex_count();
        let alpha = r.gen_range(0.1..5.0);
        let u = feller_measure(&g, alpha).map_err(|e| e.to_string())?;
        // diagonal convention: entries are α(H_α δ_x, H₀ δ_y) by quadrature
        let ha: Vec<EdgeFunction> = (0..n)
            .map(|x| harmonic_extension(&g, alpha, &VertexFunction::delta(n, VertexId(x))).map(|h| h.resampled(2000)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let h0: Vec<EdgeFunction> = (0..n)
            .map(|x| harmonic_extension(&g, 0.0, &VertexFunction::delta(n, VertexId(x))).map(|h| h.resampled(2000)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let scale = u.to_dense().amax().max(1.0);
        for x in 0..n {
            for y in 0..n {
                let brute = alpha * inner_product(&g, &ha[x], &h0[y]);
                brute_worst = brute_worst.max((u.get(x, y) - brute).abs() / scale);
            }
        }
        let (lap, pot) = kirchhoff_matrix(&g, alpha).map_err(|e| e.to_string())?;
        let lhs = trace_form(&g).plus(&u);
        let rhs = lap.plus(&pot);
        for _ in 0..5 {
            let v = random_vertex_function(&mut r, n, -1.0);
            form_worst = form_worst.max(relative(lhs.quadratic_form(&v), rhs.quadratic_form(&v)));
        }
    }
    let detail = format!("brute-force entry defect {brute_worst:.3e}, form defect {form_worst:.3e}");
    if brute_worst <= 1e-9 && form_worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn capacity_closed_forms() -> Outcome_ {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let x = VertexId(r.gen_range(0..g.vertex_count()));
        let neighbors: BTreeSet<VertexId> = g.incident(x).iter().map(|i| i.other).collect();
        let c = capacity(&g, x, &neighbors).map_err(|e| e.to_string())?;
        let want: f64 = g
            .incident(x)
            .iter()
            .map(|i| g.intrinsic_weight(i.edge) / g.intrinsic_length(i.edge).tanh())
            .sum();
        worst = worst.max(relative(c.value, want));
    }
    let mut interval = 0.0f64;
    for l in [0.1, 0.5, 1.0] {
        let g = build_metric_graph(DiscreteGraph::path(1), EdgeWeights::intrinsic(&[l], &[1.0]), DiscretePart::new())
            .map_err(|e| e.to_string())?;
        let c = capacity(&g, VertexId(0), &BTreeSet::new()).map_err(|e| e.to_string())?;
        interval = interval.max((c.value - l.tanh()).abs());
    }
    let detail = format!("coth sums {worst:.3e} relative, interval tanh {interval:.3e}");
    if worst <= 1e-10 && interval <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sum of `l/b` along the unique tree path, by breadth-first search.
fn tree_canonical_distance(g: &WeightedMetricGraph, x: VertexId, y: VertexId) -> f64 {
    let w = g.weights();
    let mut dist = vec![f64::NAN; g.vertex_count()];
    dist[x.0] = 0.0;
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for i in g.incident(v) {
            if dist[i.other.0].is_nan() {
                dist[i.other.0] = dist[v.0] + w.length[i.edge.0] / w.ellipticity[i.edge.0];
                queue.push_back(i.other);
            }
        }
    }
    dist[y.0]
}

fn resistance_metric() -> Outcome_ {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = r.gen_range(3..25);
        let g = random_tree(&mut r, n);
        for _ in 0..10 {
            let x = VertexId(r.gen_range(0..n));
            let y = VertexId(r.gen_range(0..n));
            let got = resistance(&g, x, y).map_err(|e| e.to_string())?;
            worst = worst.max(relative(got, tree_canonical_distance(&g, x, y)));
        }
    }
    let cycle = build_metric_graph(DiscreteGraph::cycle(4), EdgeWeights::uniform(4, 1.0, 1.0, 1.0), DiscretePart::new())
        .map_err(|e| e.to_string())?;
    let opposite = resistance(&cycle, VertexId(0), VertexId(2)).map_err(|e| e.to_string())?;
    let d_c = 2.0;
    let detail = format!("trees {worst:.3e} relative, 4-cycle R = {opposite:.12} vs d_c = {d_c}");
    if worst <= 1e-8 && (opposite - 1.0).abs() <= 1e-8 && opposite < d_c {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `h(u) = Σ ω∫u′² + Σ_x (L_x c_x, c_x)` on the quantum graph against
/// `S(Φu)` on the cut graph, for a bump-plus-linear `u` in the domain.
fn quantum_energy_check(qg: &QuantumGraph, cut: &metricgraph::quantum::QuantumCut, r: &mut ChaCha8Rng) -> Result<(f64, f64), String> {
    let g = &qg.graph;
    let coef: Vec<Vec<f64>> = qg
        .conditions
        .iter()
        .map(|c| (0..c.sublattice.blocks.len()).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let end_value = |e: EdgeId, end: End| {
        let (h, t) = g.endpoints(e);
        let x = if end == End::Head { h } else { t };
        let slot = g.incident(x).iter().position(|i| i.edge == e && i.end == end).unwrap();
        let blocks = qg.conditions[x.0].sublattice.block_of(g.degree(x));
        blocks[slot].map_or(0.0, |b| coef[x.0][b])
    };
    let profiles: Vec<EdgeProfile> = g
        .edge_ids()
        .map(|e| {
            let (a, b) = (end_value(e, End::Head), end_value(e, End::Tail));
            let l = g.intrinsic_length(e);
            let bump = r.gen_range(-1.0..1.0);
            EdgeProfile::Sampled(SampledProfile::from_fn(l, 64, |t| {
                a + (b - a) * t / l + bump * (std::f64::consts::PI * t / l).sin()
            }))
        })
        .collect();
    let mut h: f64 = g.edge_ids().map(|e| g.intrinsic_weight(e) * profiles[e.0].energy()).sum();
    for (x, c) in qg.conditions.iter().enumerate() {
        let v = nalgebra::DVector::from_vec(coef[x].clone());
        h += (&c.operator.matrix * &v).dot(&v);
    }
    let values: Vec<f64> = cut
        .origin
        .iter()
        .map(|o| match o {
            CutOrigin::Block { vertex, block } => coef[vertex.0][*block],
            CutOrigin::Free { .. } => 0.0,
        })
        .collect();
    let phi = EdgeFunction::new(profiles, Some(VertexFunction(values)));
    let s = energy(&cut.graph, &phi).map_err(|e| e.to_string())?.total;
    Ok((h, s))
}

fn quantum_cut() -> Outcome_ {
    let mut r = rng(8);
    let mut worst_cert = 0.0f64;
    let mut worst_energy = 0.0f64;
    for case in 0..20 {
        let qg = random_quantum_graph(&mut r, 8);
        let cut = cut_quantum(&qg, case).map_err(|e| format!("config {case}: {e}"))?;
        worst_cert = worst_cert.max(cut.certificate.max_defect());
        let (h, s) = quantum_energy_check(&qg, &cut, &mut r)?;
        worst_energy = worst_energy.max(relative(h, s));
    }
    let star = cut_quantum(&degree_six_star(), 0).map_err(|e| e.to_string())?;
    let center: Vec<usize> = star
        .origin
        .iter()
        .enumerate()
        .filter(|(_, o)| matches!(o, CutOrigin::Block { vertex, .. } if vertex.0 == 0))
        .map(|(i, _)| star.graph.degree(VertexId(i)))
        .collect();
    let detail = format!(
        "certificate {worst_cert:.3e}, independent energy {worst_energy:.3e}, star center -> degrees {center:?}"
    );
    if worst_cert <= 1e-10 && worst_energy <= 1e-10 && center == vec![3, 2, 1] && star.graph.vertex_count() == 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn recurrence_suite() -> Outcome_ {
    let opts = AnalysisOptions::default();
    let half = recurrence_test(&SphericalSpec::half_line(Sequence::Const(1.0)), &opts).map_err(|e| e.to_string())?;
    let tree = recurrence_test(&SphericalSpec::regular_tree(2, Sequence::Const(1.0)), &opts).map_err(|e| e.to_string())?;
    let short = recurrence_test(
        &SphericalSpec::half_line(Sequence::Geometric { first: 0.5, ratio: 0.5 }),
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if half.outcome != Outcome::Holds || half.witness == Witness::None {
        problems.push(format!("half-line: {:?} {:?}", half.outcome, half.witness));
    }
    // unit binary tree: the monopole energy with the depth-N sphere clamped is
    // the effective resistance Σ_{k≤N} 2^{-k}
    match (&tree.outcome, &tree.witness) {
        (Outcome::Fails, Witness::Energies { depths, energies, limit }) => {
            if *depths != (4..=16).collect::<Vec<_>>() {
                problems.push(format!("tree depths {depths:?}"));
            }
            for (d, e) in depths.iter().zip(energies) {
                let want = 1.0 - 0.5f64.powi(*d as i32);
                if (e - want).abs() > 1e-9 {
                    problems.push(format!("tree energy at depth {d}: {e} vs {want}"));
                }
            }
            if !(limit.is_finite() && (limit - 1.0).abs() < 1e-6) {
                problems.push(format!("tree limit {limit}"));
            }
        }
        other => problems.push(format!("tree: {other:?}")),
    }
    match (&short.outcome, &short.witness) {
        (Outcome::Fails, Witness::Ray { length, .. }) if (length - 1.0).abs() < 1e-9 => {}
        other => problems.push(format!("2^-n half-line: {other:?}")),
    }
    if problems.is_empty() {
        Ok("half-line holds (series), binary tree fails (energies -> 1), 2^-n half-line fails (ray 1)".into())
    } else {
        Err(problems.join("; "))
    }
}

fn exhaustion() -> Outcome_ {
    let specs = [
        SphericalSpec::regular_tree(2, Sequence::Const(0.7)),
        SphericalSpec::half_line(Sequence::Const(1.0)).with_killing(Sequence::Const(0.5)),
        SphericalSpec::half_line(Sequence::Const(0.8)).with_outward_jump(Sequence::Harmonic(1.0)),
        SphericalSpec::regular_tree(2, Sequence::Geometric { first: 0.9, ratio: 0.8 }).with_weight(Sequence::Power {
            coef: 1.0,
            exponent: 0.5,
        }),
    ];
    let mut r = rng(10);
    let depths: Vec<usize> = (3..=10).collect();
    let mut probes = 0usize;
    let mut violations = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let amp: Vec<f64> = (0..=10).map(|_| r.gen_range(0.0..2.0)).collect();
        let freq = r.gen_range(0.5..4.0);
        let alpha = r.gen_range(0.2..3.0);
        let ex = exhaustion_resolve(spec, alpha, |n, t| amp[n.min(10)] * (freq * t).sin().powi(2), &depths)
            .map_err(|e| format!("spec {i}: {e}"))?;
        for k in 1..ex.graphs.len() {
            let (small, big) = (&ex.graphs[k - 1], &ex.graphs[k]);
            let labels: BTreeMap<&str, usize> = big.vertices().map(|v| (big.label(v), v.0)).collect();
            for x in small.vertices() {
                let y = labels[small.label(x)];
                let (before, after) = (ex.solutions[k - 1].vertex_values[x.0], ex.solutions[k].vertex_values[y]);
                probes += 1;
                if after < before {
                    violations.push(format!("spec {i} {} depth {}: {before} -> {after}", small.label(x), depths[k]));
                }
            }
        }
    }
    let detail = format!("{probes} probes, {} violations", violations.len());
    if violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}: {}", violations.iter().take(5).cloned().collect::<Vec<_>>().join(", ")))
    }
}

fn positivity() -> Outcome_ {
    let mut r = rng(11);
    let mut negative = 0usize;
    let mut sup_violations = 0usize;
    let mut harmonic_negative = 0usize;
    let mut worst_ratio = 0.0f64;
    for _ in 0..50 {
        let g = random_graph(&mut r, &RandomGraphOptions::default());
        let alpha = r.gen_range(0.1..5.0);
        let f = nonnegative_function(&mut r, &g, None);
        let sol = krein_resolve(&g, alpha, &f).map_err(|e| e.to_string())?;
        let sup_u = lp_norm(&g, &sol.u, Exponent::Infinity, Measure::Edge);
        if sol.u.min_sample() < -1e-14 * sup_u.max(f64::MIN_POSITIVE) {
            negative += 1;
        }
        let signed = smooth_function(&mut r, &g, None);
        let s = krein_resolve(&g, alpha, &signed).map_err(|e| e.to_string())?;
        let ratio = alpha * lp_norm(&g, &s.u, Exponent::Infinity, Measure::Edge)
            / lp_norm(&g, &signed, Exponent::Infinity, Measure::Edge);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 {
            sup_violations += 1;
        }
        let big_u = random_vertex_function(&mut r, g.vertex_count(), 0.0);
        let h = harmonic_extension(&g, alpha, &big_u).map_err(|e| e.to_string())?;
        if h.min_sample() < 0.0 {
            harmonic_negative += 1;
        }
    }
    let detail = format!(
        "negative resolvents {negative}, sup-norm violations {sup_violations} (max α‖R f‖/‖f‖ = {worst_ratio:.4}), \
         negative extensions {harmonic_negative}"
    );
    if negative + sup_violations + harmonic_negative == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_convergence() -> Outcome_ {
    let g = build_metric_graph(DiscreteGraph::path(1), EdgeWeights::uniform(1, 1.0, 1.0, 1.0), DiscretePart::new())
        .and_then(|g| g.with_clamped(BTreeSet::from([VertexId(0), VertexId(1)])))
        .map_err(|e| e.to_string())?;
    let exact = 1.0 - 1.0 / 0.5f64.cosh();
    let errors: Vec<f64> = [16usize, 32, 64, 128, 256]
        .iter()
        .map(|&n| {
            let f = EdgeFunction::from_fn(&g, Some(n), |_, _| 1.0);
            fem_oracle_resolve(&g, 1.0, &f, n).map(|u| (u.profiles[0].eval(0.5) - exact).abs())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let detail = format!(
        "midpoint {exact:.7}, ratios {}",
        ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
    );
    if (exact - 0.1131812).abs() < 1e-7 && ratios.iter().all(|r| (r - 4.0).abs() <= 0.5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome_); 12] = [
        ("krein-oracle equivalence", krein_oracle),
        ("harmonic extension isometry", isometry),
        ("adjointness", adjointness),
        ("part Green contraction", contraction),
        ("Feller identity", feller),
        ("capacity closed forms", capacity_closed_forms),
        ("resistance metric", resistance_metric),
        ("quantum cut certificate", quantum_cut),
        ("recurrence suite", recurrence_suite),
        ("exhaustion monotonicity", exhaustion),
        ("positivity and maximum principles", positivity),
        ("oracle self-convergence", oracle_convergence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    // failures are reported, not turned into a failing test run, unless asked
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
