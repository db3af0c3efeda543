//! Edge kernels and the vertex operators of the resolvent reduction.
//!
//! With `σ = √α` and intrinsic length `l = l_i(e)`:
//!
//! ```text
//! h_e^α(t)    = sinh(σ(l−t)) / sinh(σl)             (α = 0: (l−t)/l)
//! −h_e^α′(l)  = σ / sinh(σl)                          (α = 0: 1/l)
//! M_α(x)      = Σ_{e∼x} ω σ (cosh σl − 1) / sinh σl = Σ ω σ tanh(σl/2)
//! Δ_α U(x)    = Σ_{e∼x} −h′(l) ω (U(x) − U(y))
//! ```
//!
//! The vertex measure `M(x) = Σ_{e∼x} l ω` is a separate object from the
//! potential `M_α`, which vanishes at `α = 0`.

use thiserror::Error;

use crate::edge_functions::{
    default_cells, EdgeFunction, EdgeProfile, FunctionError, HarmonicProfile, SampledProfile,
    VertexFunction,
};
use crate::graph_model::{star_measure, EdgeId, End, WeightedMetricGraph};
use crate::kernels;
use crate::linalg::{DiscreteOperator, OperatorKind};
use crate::quadrature::{damped_running_integral, simpson_weights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpsError {
    #[error("offset {t} outside [0, {length}] on edge {edge}")]
    OutOfRange { edge: usize, t: f64, length: f64 },
    #[error("α must be finite and nonnegative (positive where required), got {0}")]
    InvalidAlpha(f64),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error("vertex function has {got} entries, graph has {expected} vertices")]
    VertexCount { expected: usize, got: usize },
}

fn sigma(alpha: f64) -> Result<f64, OpsError> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(alpha.sqrt())
    } else {
        Err(OpsError::InvalidAlpha(alpha))
    }
}

fn check_t(g: &WeightedMetricGraph, e: EdgeId, t: f64) -> Result<f64, OpsError> {
    if e.0 >= g.edge_count() {
        return Err(OpsError::UnknownEdge(e.0));
    }
    let l = g.intrinsic_length(e);
    if (0.0..=l).contains(&t) {
        Ok(l)
    } else {
        Err(OpsError::OutOfRange {
            edge: e.0,
            t,
            length: l,
        })
    }
}

/// `h_e^α(t)` for an intrinsic offset `t`.
pub fn kernel_h(g: &WeightedMetricGraph, e: EdgeId, alpha: f64, t: f64) -> Result<f64, OpsError> {
    let s = sigma(alpha)?;
    let l = check_t(g, e, t)?;
    Ok(kernels::h(s, l, t))
}

/// The edge Green function `G_e^α(t, s)`.
pub fn green_kernel(
    g: &WeightedMetricGraph,
    e: EdgeId,
    alpha: f64,
    t: f64,
    s: f64,
) -> Result<f64, OpsError> {
    let sg = sigma(alpha)?;
    let l = check_t(g, e, t)?;
    check_t(g, e, s)?;
    Ok(kernels::green(sg, l, t, s))
}

/// `−h_e^α′(l_i)`, the conductance factor of `Δ_α`.
pub fn boundary_flux(g: &WeightedMetricGraph, e: EdgeId, alpha: f64) -> Result<f64, OpsError> {
    Ok(kernels::neg_dh_end(sigma(alpha)?, g.intrinsic_length(e)))
}

/// The vertex measure `M(x) = Σ_{e∼x} l_i ω` for every vertex.
pub fn vertex_measure(g: &WeightedMetricGraph) -> Vec<f64> {
    g.vertices()
        .map(|x| star_measure(g, x).expect("vertex of g"))
        .collect()
}

fn sampled_node_values(p: &EdgeProfile) -> (usize, Vec<f64>) {
    let m = p.grid().unwrap_or_else(|| default_cells(p.length()));
    (m, p.node_values(m))
}

/// `(G_e^α f)(t_k)` on the grid of `f`, by damped running integrals.
fn green_on_edge(s: f64, l: f64, f: &[f64]) -> Vec<f64> {
    let m = f.len() - 1;
    let h = l / m as f64;
    let node = |k: usize| if k == m { l } else { k as f64 * h };
    if s == 0.0 {
        let ga: Vec<f64> = (0..=m).map(|k| node(k) * f[k]).collect();
        let gb: Vec<f64> = (0..=m).map(|j| node(j) * f[m - j]).collect();
        let a = damped_running_integral(&ga, h, 0.0);
        let b = damped_running_integral(&gb, h, 0.0);
        return (0..=m)
            .map(|k| ((l - node(k)) * a[k] + node(k) * b[m - k]) / l)
            .collect();
    }
    let ga: Vec<f64> = (0..=m).map(|k| kernels::e1(s * node(k)) * f[k]).collect();
    let gb: Vec<f64> = (0..=m).map(|j| kernels::e1(s * node(j)) * f[m - j]).collect();
    let a = damped_running_integral(&ga, h, s);
    let b = damped_running_integral(&gb, h, s);
    let denom = 2.0 * s * kernels::e1(s * l);
    (0..=m)
        .map(|k| {
            let t = node(k);
            (kernels::e1(s * (l - t)) * a[k] + kernels::e1(s * t) * b[m - k]) / denom
        })
        .collect()
}

/// The part Green operator: `(G_α f)_e(t) = ∫ G_e^α(t, s) f_e(s) ds`. The
/// result lives on the grid of `f` and vanishes at every vertex.
pub fn part_green(g: &WeightedMetricGraph, alpha: f64, f: &EdgeFunction) -> Result<EdgeFunction, OpsError> {
    let s = sigma(alpha)?;
    f.check_graph(g)?;
    let profiles = g
        .edge_ids()
        .map(|e| {
            let l = g.intrinsic_length(e);
            let (_, v) = sampled_node_values(f.profile(e));
            let mut u = green_on_edge(s, l, &v);
            let m = u.len() - 1;
            u[0] = 0.0;
            u[m] = 0.0;
            EdgeProfile::Sampled(SampledProfile::new(l, u))
        })
        .collect();
    Ok(EdgeFunction::new(profiles, Some(VertexFunction::zeros(g.vertex_count()))))
}

/// `(H_α U)_e(t) = U(∂⁺e) h_e^α(t) + U(∂⁻e) h_e^α(l_i − t)`.
pub fn harmonic_extension(
    g: &WeightedMetricGraph,
    alpha: f64,
    u: &VertexFunction,
) -> Result<EdgeFunction, OpsError> {
    sigma(alpha)?;
    if u.len() != g.vertex_count() {
        return Err(OpsError::VertexCount {
            expected: g.vertex_count(),
            got: u.len(),
        });
    }
    let profiles = g
        .edge_ids()
        .map(|e| {
            let (h, t) = g.endpoints(e);
            EdgeProfile::Harmonic(HarmonicProfile {
                alpha,
                length: g.intrinsic_length(e),
                c_plus: u[h.0],
                c_minus: u[t.0],
            })
        })
        .collect();
    Ok(EdgeFunction::new(profiles, Some(u.clone())))
}

/// `∂_n G_α f(x) = Σ_{e∼x} ω(e) ∫ h_e^α(s from x) f_e(s) ds`, by Simpson on
/// the grid of `f` with `h` exact at the nodes.
pub fn normal_derivative_green(
    g: &WeightedMetricGraph,
    alpha: f64,
    f: &EdgeFunction,
) -> Result<VertexFunction, OpsError> {
    let s = sigma(alpha)?;
    f.check_graph(g)?;
    let mut out = vec![0.0; g.vertex_count()];
    for e in g.edge_ids() {
        let l = g.intrinsic_length(e);
        let w = g.intrinsic_weight(e);
        let (m, v) = sampled_node_values(f.profile(e));
        let hstep = l / m as f64;
        let weights = simpson_weights(m, hstep);
        let (mut head, mut tail) = (0.0, 0.0);
        for k in 0..=m {
            let t = if k == m { l } else { k as f64 * hstep };
            head += weights[k] * kernels::h(s, l, t) * v[k];
            tail += weights[k] * kernels::h(s, l, l - t) * v[k];
        }
        let (a, b) = g.endpoints(e);
        out[a.0] += w * head;
        out[b.0] += w * tail;
    }
    Ok(VertexFunction(out))
}

/// `M⁻¹ ∂_n G_α f`, the normalized form appearing in the adjointness relation.
pub fn normalized_normal_derivative_green(
    g: &WeightedMetricGraph,
    alpha: f64,
    f: &EdgeFunction,
) -> Result<VertexFunction, OpsError> {
    let d = normal_derivative_green(g, alpha, f)?;
    let m = vertex_measure(g);
    Ok(VertexFunction(d.iter().zip(&m).map(|(a, b)| a / b).collect()))
}

/// The Kirchhoff Laplacian `Δ_α` and the diagonal vertex potential `M_α`.
pub fn kirchhoff_matrix(
    g: &WeightedMetricGraph,
    alpha: f64,
) -> Result<(DiscreteOperator, DiscreteOperator), OpsError> {
    let s = sigma(alpha)?;
    let n = g.vertex_count();
    let mut lap = DiscreteOperator::zeros(OperatorKind::Kirchhoff, n);
    let mut pot = vec![0.0; n];
    for e in g.edge_ids() {
        let (x, y) = g.endpoints(e);
        let l = g.intrinsic_length(e);
        let w = g.intrinsic_weight(e);
        let c = w * kernels::neg_dh_end(s, l);
        lap.add(x.0, y.0, -c);
        lap.add(x.0, x.0, c);
        lap.add(y.0, y.0, c);
        let p = w * kernels::potential(s, l);
        pot[x.0] += p;
        pot[y.0] += p;
    }
    Ok((lap, DiscreteOperator::diagonal_from(OperatorKind::VertexPotential, &pot)))
}

/// The trace form `Q₀ = Δ_0`, conductances `ω / l_i = 1 / l_c`.
pub fn trace_form(g: &WeightedMetricGraph) -> DiscreteOperator {
    let q = kirchhoff_matrix(g, 0.0).expect("α = 0 is valid").0;
    let mut out = DiscreteOperator::zeros(OperatorKind::Trace, g.vertex_count());
    for (i, j, v) in q.entries() {
        out.add(i, j, v);
    }
    out
}

/// `Δ` from the discrete part: off-diagonal `−j(x,y)`, diagonal `Σ_y j(x,y) + k(x)`.
pub fn discrete_laplacian(g: &WeightedMetricGraph) -> DiscreteOperator {
    let n = g.vertex_count();
    let q = g.discrete_part();
    let mut d = DiscreteOperator::zeros(OperatorKind::JumpKilling, n);
    for (x, y, j) in q.jumps() {
        d.add(x.0, y.0, -j);
        d.add(x.0, x.0, j);
        d.add(y.0, y.0, j);
    }
    for (x, k) in q.killings() {
        d.add(x.0, x.0, k);
    }
    d
}

/// The Feller measure `U_α(V₁, V₂) = α (H_α V₁, H₀ V₂)`:
///
/// ```text
/// U_α(δ_x, δ_y) = ω/l_i − σω/sinh(σ l_i)            x ∼ y
/// U_α(δ_x, δ_x) = Σ_{e∼x} σω coth(σ l_i) − ω/l_i
/// ```
///
/// With this diagonal, `Q₀ + U_α = Δ_α + M_α` as matrices.
pub fn feller_measure(g: &WeightedMetricGraph, alpha: f64) -> Result<DiscreteOperator, OpsError> {
    if !(alpha > 0.0) {
        return Err(OpsError::InvalidAlpha(alpha));
    }
    let s = sigma(alpha)?;
    let mut u = DiscreteOperator::zeros(OperatorKind::Feller, g.vertex_count());
    for e in g.edge_ids() {
        let (x, y) = g.endpoints(e);
        let l = g.intrinsic_length(e);
        let w = g.intrinsic_weight(e);
        u.add(x.0, y.0, w * (1.0 / l - kernels::neg_dh_end(s, l)));
        let d = w * (kernels::neg_dh_start(s, l) - 1.0 / l);
        u.add(x.0, x.0, d);
        u.add(y.0, y.0, d);
    }
    Ok(u)
}

/// `Δ + Δ_α + M_α`, the matrix of the discrete resolvent system.
pub fn resolvent_matrix(g: &WeightedMetricGraph, alpha: f64) -> Result<DiscreteOperator, OpsError> {
    let (lap, pot) = kirchhoff_matrix(g, alpha)?;
    Ok(discrete_laplacian(g).plus(&lap).plus(&pot))
}

/// Outgoing edge derivative of `h_e^α` at the end `end`, exact.
pub fn kernel_outgoing_derivative(g: &WeightedMetricGraph, e: EdgeId, alpha: f64, end: End) -> Result<f64, OpsError> {
    let s = sigma(alpha)?;
    let l = g.intrinsic_length(e);
    Ok(match end {
        End::Head => -kernels::neg_dh_start(s, l),
        End::Tail => kernels::neg_dh_end(s, l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge_functions::{energy, inner_product, lp_norm, Exponent, Measure};
    use crate::graph_model::{build_metric_graph, DiscreteGraph, DiscretePart, EdgeWeights, VertexId};

    fn unit_edge() -> WeightedMetricGraph {
        build_metric_graph(DiscreteGraph::path(1), EdgeWeights::uniform(1, 1.0, 1.0, 1.0), DiscretePart::new()).unwrap()
    }

    fn star3() -> WeightedMetricGraph {
        build_metric_graph(DiscreteGraph::star(3), EdgeWeights::intrinsic(&[1.0, 0.5, 0.8], &[1.0, 2.0, 0.5]), DiscretePart::new()).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let g = unit_edge();
        assert_eq!(kernel_h(&g, EdgeId(0), 3.0, 0.0).unwrap(), 1.0);
        assert!((kernel_h(&g, EdgeId(0), 4.0, 0.5).unwrap() - 1f64.sinh() / 2f64.sinh()).abs() < 1e-15);
        let long = build_metric_graph(DiscreteGraph::path(1), EdgeWeights::intrinsic(&[2.0], &[1.0]), DiscretePart::new()).unwrap();
        assert_eq!(kernel_h(&long, EdgeId(0), 0.0, 0.5).unwrap(), 0.75);
        assert!(matches!(kernel_h(&g, EdgeId(0), 1.0, 1.5), Err(OpsError::OutOfRange { .. })));
        assert!(matches!(kernel_h(&g, EdgeId(0), -1.0, 0.5), Err(OpsError::InvalidAlpha(_))));
        assert_eq!(green_kernel(&g, EdgeId(0), 1.0, 0.0, 0.4).unwrap(), 0.0);
        assert_eq!(green_kernel(&g, EdgeId(0), 0.0, 0.5, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn part_green_of_constant() {
        let g = unit_edge();
        let one = EdgeFunction::from_fn(&g, Some(64), |_, _| 1.0);
        let u = part_green(&g, 1.0, &one).unwrap();
        let mid = u.profiles[0].eval(0.5);
        let exact = 1.0 - 2.0 * 0.5f64.sinh() / 1f64.sinh();
        assert!((mid - exact).abs() < 1e-9, "{mid} {exact}");
        assert!((mid - 0.113_181_2).abs() < 1e-7);
        // 1 − h(t) − h(1 − t) at every node
        for k in 0..=64 {
            let t = k as f64 / 64.0;
            let want = 1.0 - kernels::h(1.0, 1.0, t) - kernels::h(1.0, 1.0, 1.0 - t);
            assert!((u.profiles[0].eval(t) - want).abs() < 1e-8, "k={k} {}", u.profiles[0].eval(t) - want);
        }
        let zero = part_green(&g, 1.0, &EdgeFunction::from_fn(&g, None, |_, _| 0.0)).unwrap();
        assert_eq!(lp_norm(&g, &zero, Exponent::Infinity, Measure::Edge), 0.0);
    }

    #[test]
    fn part_green_matches_direct_quadrature() {
        let g = star3();
        let f = EdgeFunction::from_fn(&g, Some(40), |e, t| (1.0 + e.0 as f64) * (3.0 * t).cos() + t);
        for &alpha in &[0.0, 0.5, 7.0] {
            let u = part_green(&g, alpha, &f).unwrap();
            for e in g.edge_ids() {
                let l = g.intrinsic_length(e);
                for k in [1usize, 7, 20, 33] {
                    let t = l * k as f64 / 40.0;
                    // split at the kink and integrate each side finely
                    let n = 4000;
                    let side = |a: f64, b: f64| {
                        let hh = (b - a) / n as f64;
                        let v: Vec<f64> = (0..=n)
                            .map(|j| {
                                let s = a + j as f64 * hh;
                                kernels::green(alpha.sqrt(), l, t, s) * ((1.0 + e.0 as f64) * (3.0 * s).cos() + s)
                            })
                            .collect();
                        crate::quadrature::simpson(&v, hh)
                    };
                    let exact = side(0.0, t) + side(t, l);
                    assert!((u.profiles[e.0].eval(t) - exact).abs() < 2e-6, "α={alpha} e={} k={k} {} {exact}", e.0, u.profiles[e.0].eval(t));
                }
            }
        }
    }

    #[test]
    fn normal_derivative_example() {
        let g = unit_edge();
        let one = EdgeFunction::from_fn(&g, Some(64), |_, _| 1.0);
        let d = normal_derivative_green(&g, 1.0, &one).unwrap();
        let want = (1f64.cosh() - 1.0) / 1f64.sinh();
        assert!((d[0] - want).abs() < 1e-9);
        assert!((d[1] - want).abs() < 1e-9);
        assert!((want - 0.462_117_2).abs() < 1e-7);
        let zero = normal_derivative_green(&g, 1.0, &EdgeFunction::from_fn(&g, None, |_, _| 0.0)).unwrap();
        assert_eq!(zero.0, vec![0.0, 0.0]);
    }

    #[test]
    fn adjointness_on_a_star() {
        let g = star3();
        let f = EdgeFunction::from_fn(&g, Some(32), |e, t| (2.0 * t + e.0 as f64).sin());
        let big_f = VertexFunction(vec![0.3, -1.0, 2.0, 0.5]);
        for &alpha in &[0.0, 1.0, 5.0] {
            let lhs = inner_product(&g, &harmonic_extension(&g, alpha, &big_f).unwrap(), &f);
            let m = vertex_measure(&g);
            let d = normalized_normal_derivative_green(&g, alpha, &f).unwrap();
            let rhs: f64 = (0..4).map(|i| big_f[i] * d[i] * m[i]).sum();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn kirchhoff_matrix_examples() {
        let g = unit_edge();
        let (lap, pot) = kirchhoff_matrix(&g, 1.0).unwrap();
        assert!((lap.get(0, 1) + 0.850_918_128_2).abs() < 1e-10);
        assert!((pot.get(0, 0) - 0.462_117_157_3).abs() < 1e-10);
        assert_eq!(lap.apply(&[1.0, 1.0]), vec![0.0, 0.0]);
        let (lap0, pot0) = kirchhoff_matrix(&g, 0.0).unwrap();
        assert_eq!(lap0.get(0, 1), -1.0);
        assert_eq!(pot0.diagonal(), vec![0.0, 0.0]);
        assert_eq!(trace_form(&g).to_dense(), lap0.to_dense());
    }

    #[test]
    fn discrete_laplacian_example() {
        let g = unit_edge().with_discrete_part(DiscretePart::new().with_jump(VertexId(0), VertexId(1), 2.0).with_killing(VertexId(0), 1.0)).unwrap();
        let d = discrete_laplacian(&g).to_dense();
        assert_eq!(d, nalgebra::DMatrix::from_row_slice(2, 2, &[3.0, -2.0, -2.0, 2.0]));
        assert_eq!(discrete_laplacian(&g).apply(&[1.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(discrete_laplacian(&unit_edge()).nnz(), 0);
    }

    /// `α (H_α δ_x, H₀ δ_y)` by quadrature fixes the diagonal convention.
    #[test]
    fn feller_entries_by_brute_force() {
        let g = star3();
        let n = g.vertex_count();
        for &alpha in &[0.3, 1.0, 4.0] {
            let u = feller_measure(&g, alpha).unwrap();
            for x in 0..n {
                for y in 0..n {
                    let hx = harmonic_extension(&g, alpha, &VertexFunction::delta(n, VertexId(x))).unwrap().resampled(4000);
                    let hy = harmonic_extension(&g, 0.0, &VertexFunction::delta(n, VertexId(y))).unwrap().resampled(4000);
                    let brute = alpha * inner_product(&g, &hx, &hy);
                    assert!((u.get(x, y) - brute).abs() < 1e-10, "α={alpha} ({x},{y}): {} vs {brute}", u.get(x, y));
                }
            }
            let (lap, pot) = kirchhoff_matrix(&g, alpha).unwrap();
            let lhs = trace_form(&g).plus(&u).to_dense();
            let rhs = lap.plus(&pot).to_dense();
            assert!((lhs - rhs).amax() < 1e-13);
        }
        assert!((feller_measure(&unit_edge(), 1.0).unwrap().get(0, 1) - 0.149_081_871_8).abs() < 1e-10);
    }

    #[test]
    fn isometry_on_a_star() {
        let g = star3().with_discrete_part(DiscretePart::new().with_jump(VertexId(1), VertexId(2), 0.7).with_killing(VertexId(3), 0.2)).unwrap();
        let u = VertexFunction(vec![1.0, -0.4, 0.25, 2.0]);
        let alpha = 2.5;
        let h = harmonic_extension(&g, alpha, &u).unwrap();
        let lhs = alpha * lp_norm(&g, &h, Exponent::Two, Measure::Edge).powi(2) + energy(&g, &h).unwrap().diffusion;
        let (lap, pot) = kirchhoff_matrix(&g, alpha).unwrap();
        let rhs = pot.quadratic_form(&u) + lap.quadratic_form(&u);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }
}
