use std::collections::BTreeMap;

use crate::graph_model::{
    completeness_check, series_test, Completeness, Generation, Scale, SeriesCertificate, SeriesKind,
    SeriesOptions, SeriesOutcome, SphericalError, SphericalSpec, Sequence,
};
use crate::kernels;
use crate::kirchhoff_ops::{discrete_laplacian, trace_form};
use crate::solver::{solve_vertex_system, SolverError};

use super::{AnalysisError, Verdict, Witness};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub series: SeriesOptions,
    /// Truncation depths for the monopole energies, increasing.
    pub monopole_depths: Vec<usize>,
    /// Increment ratios at or below this count as geometric decay.
    pub decay_ratio: f64,
    /// Number of trailing increments whose ratios must decay.
    pub decay_window: usize,
    /// Generations the radial recursion may march.
    pub generation_budget: usize,
    /// Values above this count as unbounded growth.
    pub divergence_budget: f64,
    /// Consecutive increasing generations required before growth is accepted.
    pub monotone_window: usize,
    /// Generations scanned for killing weights.
    pub killing_scan: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            series: SeriesOptions::default(),
            monopole_depths: (4..=16).collect(),
            decay_ratio: 0.9,
            decay_window: 5,
            generation_budget: 100_000,
            divergence_budget: 1e12,
            monotone_window: 10,
            killing_scan: 1000,
        }
    }
}

const RECURRENCE: &str = "recurrence";
const STOCHASTIC_COMPLETENESS: &str = "stochastic completeness";

/// Whether all terms of the volume series are equal from the second one on:
/// constant lengths and weights and a fixed sphere size.
fn constant_volume_terms(spec: &SphericalSpec) -> bool {
    let is_const = |s: &Sequence| matches!(s, Sequence::Const(_));
    let same_degrees = matches!((&spec.out_degree, &spec.in_degree), (Sequence::Const(a), Sequence::Const(b)) if a == b);
    is_const(&spec.length) && is_const(&spec.weight) && same_degrees
}

/// Total recurrence of the form `E + Q` on a spherically symmetric graph.
///
/// Killing makes the form transient at once, and so does a canonical ray of
/// finite length. Without a discrete part the weighted-mean volume series
/// `Σ l_k / A_k` with `A_k = Σ_{j≤k} l_j ω(S_j) / Σ_{j≤k} l_j` is tested next;
/// its divergence proves recurrence. Otherwise the energies of monopoles on
/// the truncated sphere quotients are computed; geometric convergence of
/// their increments is taken as transience.
pub fn recurrence_test(spec: &SphericalSpec, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    for gen in spec.generations().take(opts.killing_scan) {
        let gen = gen?;
        if gen.killing > 0.0 {
            return Ok(Verdict::fails(
                RECURRENCE,
                Witness::Vertex {
                    label: format!("S{}", gen.index),
                    value: gen.killing,
                },
                false,
            )
            .note(format!("killing weight {} on sphere {}", gen.killing, gen.index)));
        }
    }
    let mut notes = Vec::new();
    match completeness_check(spec, Scale::Canonical, &opts.series)? {
        Completeness::Incomplete {
            heuristic,
            ray_length,
            ray_prefix,
        } => {
            return Ok(Verdict::fails(
                RECURRENCE,
                Witness::Ray {
                    length: ray_length,
                    prefix: ray_prefix,
                },
                heuristic,
            )
            .note(format!("canonical rays have finite length {ray_length:.14e}")));
        }
        Completeness::Complete { .. } => notes.push("canonically complete".to_string()),
        Completeness::Undecided { generations, .. } => {
            notes.push(format!("canonical completeness undecided after {generations} generations"))
        }
    }
    if spec.has_discrete_part() {
        notes.push("volume series skipped: the graph has jumps".to_string());
    } else {
        let certificate = spec.certificate(SeriesKind::Parabolicity).or_else(|| {
            constant_volume_terms(spec).then_some(SeriesCertificate::Diverges)
        });
        let mut gens = spec.generations().skip(1);
        let (mut num, mut den) = (0.0, 0.0);
        let outcome = series_test(
            |_| {
                let g: Generation = gens.next().expect("generation iterator is infinite")?;
                num += g.length * g.sphere_weight();
                den += g.length;
                Ok::<f64, SphericalError>(g.length / (num / den))
            },
            certificate,
            &opts.series,
        )?;
        match outcome {
            SeriesOutcome::Diverges {
                certified,
                partial_sum,
                terms,
            } => {
                let mut v = Verdict::holds(
                    RECURRENCE,
                    Witness::Series {
                        partial_sum,
                        terms,
                        certified,
                    },
                    !certified,
                );
                v.diagnostics = notes;
                return Ok(v.note("volume series diverges"));
            }
            SeriesOutcome::Converges { sum_estimate, .. } => {
                notes.push(format!("volume series converges to about {sum_estimate:.14e}"))
            }
            SeriesOutcome::Undecided { partial_sum, terms } => {
                notes.push(format!("volume series undecided: {terms} terms sum to {partial_sum:.14e}"))
            }
        }
    }
    let mut energies = Vec::with_capacity(opts.monopole_depths.len());
    for &depth in &opts.monopole_depths {
        energies.push(monopole_energy(spec, depth)?);
    }
    let depths = opts.monopole_depths.clone();
    for w in energies.windows(2) {
        if w[1] < w[0] * (1.0 - 1e-12) {
            let mut v = Verdict::undecided(
                RECURRENCE,
                Witness::Energies {
                    depths,
                    energies: energies.clone(),
                    limit: f64::NAN,
                },
            );
            v.diagnostics = notes;
            return Ok(v.note("monopole energies decreased with the depth"));
        }
    }
    let inc: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.len() < 2 {
        return Err(SolverError::InvalidData("recurrence needs at least three monopole depths".into()).into());
    }
    let k = opts.decay_window.min(inc.len() - 1);
    let tail = &inc[inc.len() - k - 1..];
    let ratio = tail.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let last = *energies.last().expect("at least one depth");
    let decaying = k > 0 && tail.iter().all(|&d| d > 0.0) && ratio <= opts.decay_ratio;
    let limit = if decaying {
        last + tail[k] * ratio / (1.0 - ratio)
    } else if inc.iter().all(|&d| d == 0.0) {
        last
    } else {
        f64::INFINITY
    };
    let witness = Witness::Energies {
        depths,
        energies,
        limit,
    };
    let mut v = if limit.is_finite() {
        Verdict::fails(RECURRENCE, witness, true).note(format!("monopole energies bounded, limit about {limit:.14e}"))
    } else {
        Verdict::undecided(RECURRENCE, witness).note("monopole energies did not settle")
    };
    notes.append(&mut v.diagnostics);
    v.diagnostics = notes;
    Ok(v)
}

/// Energy of the unit-flux monopole at the root of the sphere quotient of
/// depth `depth`, vanishing on the outer sphere.
fn monopole_energy(spec: &SphericalSpec, depth: usize) -> Result<f64, AnalysisError> {
    let rp = spec.radial_path(depth)?;
    let a = trace_form(&rp.graph).plus(&discrete_laplacian(&rp.graph));
    let mut rhs = vec![0.0; depth + 1];
    rhs[0] = 1.0;
    let fixed = BTreeMap::from([(depth, 0.0)]);
    Ok(solve_vertex_system(&a, &rhs, &fixed)?.values[0])
}

/// Coupling `C_n` of spheres `n − 1` and `n`, and potential `p_n` of
/// generation `n`, in the radial `α`-system.
fn couplings(prev: &Generation, gen: &Generation, sigma: f64) -> (f64, f64) {
    let w = gen.sphere_weight();
    let c = w * kernels::neg_dh_end(sigma, gen.length) + prev.sphere_size * prev.outward_jump;
    (c, w * kernels::potential(sigma, gen.length))
}

/// Radial `α`-harmonic function of `Δ + Δ_α + M_α` on the sphere quotient,
/// marched from `u(S_0) = u0` over `generations` generations. Each step uses
/// the increment form
///
/// ```text
/// C_{n+1}(u_{n+1} − u_n) = C_n(u_n − u_{n−1}) + (p_n + p_{n+1} + K_n) u_n
/// ```
///
/// with `K_n = #S_n k_n`.
pub fn radial_harmonic_recursion(
    spec: &SphericalSpec,
    alpha: f64,
    u0: f64,
    generations: usize,
) -> Result<Vec<f64>, AnalysisError> {
    let mut values = vec![u0];
    march(spec, alpha, u0, |u, _| {
        values.push(u);
        values.len() <= generations
    })?;
    Ok(values)
}

/// Run the recursion, handing `(u_n, u_n − u_{n−1})` for `n ≥ 1` to `step`
/// until it returns false.
fn march(
    spec: &SphericalSpec,
    alpha: f64,
    u0: f64,
    mut step: impl FnMut(f64, f64) -> bool,
) -> Result<(), AnalysisError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(crate::kirchhoff_ops::OpsError::InvalidAlpha(alpha).into());
    }
    let sigma = alpha.sqrt();
    let mut gens = spec.generations();
    let root = gens.next().expect("generation iterator is infinite")?;
    let mut cur = gens.next().expect("generation iterator is infinite")?;
    let (mut c, mut p) = couplings(&root, &cur, sigma);
    // row 0 has no inner neighbour
    let mut flux = (p + root.sphere_size * root.killing) * u0;
    let mut u = u0;
    loop {
        let d = flux / c;
        u += d;
        if !step(u, d) {
            return Ok(());
        }
        let next = gens.next().expect("generation iterator is infinite")?;
        let (c_next, p_next) = couplings(&cur, &next, sigma);
        flux = c * d + (p + p_next + cur.sphere_size * cur.killing) * u;
        cur = next;
        c = c_next;
        p = p_next;
    }
}

/// Stochastic completeness through the radial `1`-harmonic function started
/// at `u(S_0) = 1`. Unbounded monotone growth means no bounded solution
/// exists and the graph is stochastically complete; geometrically decaying
/// increments give a bounded solution and thus incompleteness. Both
/// conclusions rest on budgets and are flagged heuristic.
pub fn stochastic_completeness_test(spec: &SphericalSpec, opts: &AnalysisOptions) -> Result<Verdict, AnalysisError> {
    const PREFIX: usize = 32;
    let mut values = vec![1.0];
    let mut incs: Vec<f64> = Vec::new();
    let mut rising = 0usize;
    let mut n = 0usize;
    let mut decision: Option<(bool, String)> = None;
    let mut escape = false;
    march(spec, 1.0, 1.0, |u, d| {
        n += 1;
        if values.len() < PREFIX {
            values.push(u);
        }
        if !u.is_finite() {
            decision = Some((true, format!("recursion overflowed at generation {n}")));
            return false;
        }
        if d < 0.0 && u < 1.0 {
            escape = true;
            return false;
        }
        rising = if d > 0.0 { rising + 1 } else { 0 };
        if u > opts.divergence_budget && rising >= opts.monotone_window {
            decision = Some((true, format!("u exceeds {:e} at generation {n}, increasing for {rising} generations", opts.divergence_budget)));
            return false;
        }
        incs.push(d);
        if incs.len() > opts.monotone_window + 1 {
            incs.remove(0);
        }
        if incs.len() == opts.monotone_window + 1 && incs.iter().all(|&x| x > 0.0) {
            let r = incs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            if r <= opts.decay_ratio {
                let tail = d * r / (1.0 - r);
                if tail <= 1e-12 * u {
                    decision = Some((false, format!("bounded solution, limit about {:.14e} after {n} generations", u + tail)));
                    return false;
                }
            }
        }
        if d == 0.0 && u == 0.0 {
            return false;
        }
        n < opts.generation_budget
    })?;
    let witness = Witness::Recursion {
        values,
        generations: n,
    };
    Ok(match decision {
        Some((true, why)) => Verdict::holds(STOCHASTIC_COMPLETENESS, witness, true).note(why),
        Some((false, why)) => Verdict::fails(STOCHASTIC_COMPLETENESS, witness, true).note(why),
        None if escape => Verdict::undecided(STOCHASTIC_COMPLETENESS, witness)
            .note(format!("monotone escape: the solution fell below its start with negative slope at generation {n}")),
        None => Verdict::undecided(STOCHASTIC_COMPLETENESS, witness)
            .note(format!("no decision within {n} generations")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Outcome;

    fn opts() -> AnalysisOptions {
        AnalysisOptions::default()
    }

    #[test]
    fn unit_half_line_is_recurrent() {
        let spec = SphericalSpec::half_line(Sequence::Const(1.0));
        let v = recurrence_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(matches!(v.witness, Witness::Series { certified: true, .. }));
        assert!(!v.heuristic);
    }

    #[test]
    fn binary_tree_is_transient() {
        let spec = SphericalSpec::regular_tree(2, Sequence::Const(1.0));
        let v = recurrence_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        let Witness::Energies { depths, energies, limit } = &v.witness else {
            panic!("{:?}", v.witness)
        };
        assert_eq!(depths.first(), Some(&4));
        assert_eq!(depths.last(), Some(&16));
        // series conductances 2^k: E_N = Σ_{k≤N} 2^{-k}
        for (d, e) in depths.iter().zip(energies) {
            let want: f64 = (1..=*d).map(|k| 0.5f64.powi(k as i32)).sum();
            assert!((e - want).abs() < 1e-12, "{d}: {e} vs {want}");
        }
        assert!((limit - 1.0).abs() < 1e-9, "{limit}");
    }

    #[test]
    fn shrinking_half_line_is_transient_by_incompleteness() {
        let spec = SphericalSpec::half_line(Sequence::Geometric { first: 0.5, ratio: 0.5 });
        let v = recurrence_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        let Witness::Ray { length, prefix } = &v.witness else {
            panic!("{:?}", v.witness)
        };
        assert!((length - 1.0).abs() < 1e-10);
        assert_eq!(prefix[0], 0.5);
    }

    #[test]
    fn killing_is_transient() {
        let spec = SphericalSpec::half_line(Sequence::Const(1.0)).with_killing(Sequence::Table(vec![0.0, 0.0, 0.3, 0.0]));
        let v = recurrence_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(v.witness, Witness::Vertex { label: "S2".into(), value: 0.3 });
    }

    #[test]
    fn monopole_energies_do_not_decrease() {
        let spec = SphericalSpec::regular_tree(3, Sequence::Harmonic(1.0)).with_outward_jump(Sequence::Const(0.2));
        let e: Vec<f64> = (2..10).map(|d| monopole_energy(&spec, d).unwrap()).collect();
        for w in e.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn recursion_matches_dense_solve() {
        // the march reproduces the kernel of the dense system with the outer sphere free
        use crate::analysis::harmonic_space;
        use crate::graph_model::VertexId;
        use std::collections::BTreeSet;
        let spec = SphericalSpec::regular_tree(2, Sequence::Harmonic(1.0))
            .with_killing(Sequence::Const(0.1))
            .with_outward_jump(Sequence::Const(0.4));
        let depth = 5;
        let rp = spec.radial_path(depth).unwrap();
        let g = rp.graph.with_clamped(BTreeSet::from([VertexId(depth)])).unwrap();
        let basis = harmonic_space(&g, 2.0).unwrap();
        assert_eq!(basis.len(), 1);
        let u = radial_harmonic_recursion(&spec, 2.0, 1.0, depth).unwrap();
        let b = &basis[0];
        for n in 0..=depth {
            assert!((u[n] - b[n] / b[0]).abs() < 1e-10 * u[n], "{n}: {} vs {}", u[n], b[n] / b[0]);
        }
    }

    #[test]
    fn unit_half_line_is_stochastically_complete() {
        let spec = SphericalSpec::half_line(Sequence::Const(1.0));
        let u = radial_harmonic_recursion(&spec, 1.0, 1.0, 5).unwrap();
        for (n, v) in u.iter().enumerate() {
            assert!((v - (n as f64).cosh()).abs() < 1e-12 * v, "{n}: {v}");
        }
        let v = stochastic_completeness_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(v.heuristic);
        let Witness::Recursion { generations, .. } = v.witness else { panic!() };
        assert!(generations < 60, "{generations}");
    }

    #[test]
    fn zero_start_stays_zero() {
        let spec = SphericalSpec::half_line(Sequence::Const(1.0));
        let u = radial_harmonic_recursion(&spec, 1.0, 0.0, 20).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fast_shrinking_lengths_are_incomplete() {
        let spec = SphericalSpec::half_line(Sequence::Geometric { first: 0.25, ratio: 0.25 });
        let v = stochastic_completeness_test(&spec, &opts()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails, "{:?}", v.diagnostics);
        // the rays have finite intrinsic length Σ 4^{-n} = 1/3
        let c = completeness_check(&spec, Scale::Intrinsic, &SeriesOptions::default()).unwrap();
        let Completeness::Incomplete { ray_length, .. } = c else { panic!("{c:?}") };
        assert!((ray_length - 1.0 / 3.0).abs() < 1e-10);
    }
}
