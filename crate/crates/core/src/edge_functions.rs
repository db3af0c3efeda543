//! Functions on a metric graph, their norms and form values.
//!
//! Profiles are parametrized by intrinsic arclength `t ∈ [0, l_i(e)]`, with
//! `t = 0` at the head of the edge. In these coordinates the measure and the
//! ellipticity weight are both `ω(e)`, so
//!
//! ```text
//! ‖u‖₂² = Σ_e ω(e) ∫ |u_e|² dt        E(u) = Σ_e ω(e) ∫ |u_e′|² dt
//! ```
//!
//! and neither depends on the length representation of the graph.
//!
//! The energy of a sampled profile is the exact energy of its piecewise
//! linear interpolant, which is also the function [`evaluate`] sees.

use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::graph_model::{EdgeId, End, Point, Scale, VertexId, WeightedMetricGraph};
use crate::kernels;
use crate::quadrature::{simpson, simpson_map};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("point is not on the graph: {0}")]
    PointOffGraph(String),
    #[error("function does not match the graph: {0}")]
    GraphMismatch(String),
    #[error("function is discontinuous at vertex {vertex} (defect {defect:e})")]
    Discontinuous { vertex: String, defect: f64 },
    #[error("unknown vertex #{0}")]
    UnknownVertex(usize),
    #[error("grid must have an even number of cells >= 2, edge {edge} has {cells}")]
    InvalidGrid { edge: usize, cells: usize },
}

/// A real function on the vertex set, indexed by vertex number.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn delta(n: usize, x: VertexId) -> Self {
        let mut v = vec![0.0; n];
        v[x.0] = 1.0;
        VertexFunction(v)
    }

    pub fn at(&self, x: VertexId) -> f64 {
        self.0[x.0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Deref for VertexFunction {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for VertexFunction {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        VertexFunction(v)
    }
}

/// Default number of cells for an edge of intrinsic length `l_i`:
/// `max(16, ⌈32·l_i⌉)`, rounded up to an even number.
pub fn default_cells(intrinsic_length: f64) -> usize {
    let m = 16usize.max((32.0 * intrinsic_length).ceil() as usize);
    m + m % 2
}

/// Values on the uniform grid `t_k = k·L/m`, `k = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub length: f64,
    pub values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(length: f64, values: Vec<f64>) -> Self {
        SampledProfile { length, values }
    }

    pub fn from_fn(length: f64, cells: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = length / cells as f64;
        let values = (0..=cells)
            .map(|k| f(if k == cells { length } else { k as f64 * h }))
            .collect();
        SampledProfile { length, values }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.cells() {
            self.length
        } else {
            k as f64 * self.step()
        }
    }

    /// Linear interpolation between nodes.
    pub fn eval(&self, t: f64) -> f64 {
        let m = self.cells();
        let x = (t / self.step()).clamp(0.0, m as f64);
        let k = (x.floor() as usize).min(m - 1);
        let r = x - k as f64;
        self.values[k] * (1.0 - r) + self.values[k + 1] * r
    }

    /// `∫|u′|²` of the interpolant.
    fn energy(&self) -> f64 {
        let h = self.step();
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h
    }

    /// One-sided second-order derivative at `t = 0` (`Head`) or the
    /// derivative in the direction into the edge at `t = L` (`Tail`).
    fn outgoing_derivative(&self, end: End) -> f64 {
        let h = self.step();
        let v = &self.values;
        let m = self.cells();
        if m < 2 {
            return match end {
                End::Head => (v[1] - v[0]) / h,
                End::Tail => (v[0] - v[1]) / h,
            };
        }
        match end {
            End::Head => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            End::Tail => (-3.0 * v[m] + 4.0 * v[m - 1] - v[m - 2]) / (2.0 * h),
        }
    }
}

/// `c⁺·h^α(t) + c⁻·h^α(L − t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicProfile {
    pub alpha: f64,
    pub length: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl HarmonicProfile {
    fn sigma(&self) -> f64 {
        self.alpha.sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (s, l) = (self.sigma(), self.length);
        let t = t.clamp(0.0, l);
        let mut v = 0.0;
        if self.c_plus != 0.0 {
            v += self.c_plus * kernels::h(s, l, t);
        }
        if self.c_minus != 0.0 {
            v += self.c_minus * kernels::h(s, l, l - t);
        }
        v
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (s, l) = (self.sigma(), self.length);
        self.c_plus * kernels::dh(s, l, t) - self.c_minus * kernels::dh(s, l, l - t)
    }

    /// `(∫u², ∫u′²)` in closed form.
    pub fn integrals(&self) -> (f64, f64) {
        kernels::harmonic_integrals(self.sigma(), self.length, self.c_plus, self.c_minus)
    }

    fn outgoing_derivative(&self, end: End) -> f64 {
        match end {
            End::Head => self.derivative(0.0),
            End::Tail => -self.derivative(self.length),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeProfile {
    Sampled(SampledProfile),
    Harmonic(HarmonicProfile),
    Sum(SampledProfile, HarmonicProfile),
}

impl EdgeProfile {
    pub fn length(&self) -> f64 {
        match self {
            EdgeProfile::Sampled(s) | EdgeProfile::Sum(s, _) => s.length,
            EdgeProfile::Harmonic(h) => h.length,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            EdgeProfile::Sampled(s) => s.eval(t),
            EdgeProfile::Harmonic(h) => h.eval(t),
            EdgeProfile::Sum(s, h) => s.eval(t) + h.eval(t),
        }
    }

    pub fn start(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn end(&self) -> f64 {
        match self {
            EdgeProfile::Sampled(s) => *s.values.last().unwrap(),
            EdgeProfile::Harmonic(h) => h.c_minus,
            EdgeProfile::Sum(s, h) => *s.values.last().unwrap() + h.c_minus,
        }
    }

    pub fn value_at(&self, end: End) -> f64 {
        match end {
            End::Head => self.start(),
            End::Tail => self.end(),
        }
    }

    /// Cells of the sampled part, if any.
    pub fn grid(&self) -> Option<usize> {
        match self {
            EdgeProfile::Sampled(s) | EdgeProfile::Sum(s, _) => Some(s.cells()),
            EdgeProfile::Harmonic(_) => None,
        }
    }

    /// Values on a uniform grid of `cells` cells.
    pub fn node_values(&self, cells: usize) -> Vec<f64> {
        let l = self.length();
        let h = l / cells as f64;
        match self {
            EdgeProfile::Sampled(s) | EdgeProfile::Sum(s, _) if s.cells() == cells => {
                let mut v = s.values.clone();
                if let EdgeProfile::Sum(s, hp) = self {
                    for (k, x) in v.iter_mut().enumerate() {
                        *x += hp.eval(s.node(k));
                    }
                }
                v
            }
            _ => (0..=cells)
                .map(|k| self.eval(if k == cells { l } else { k as f64 * h }))
                .collect(),
        }
    }

    fn quadrature_cells(&self) -> usize {
        self.grid().unwrap_or_else(|| 4 * default_cells(self.length()))
    }

    /// `∫|u|^p dt` for finite `p`.
    pub fn p_integral(&self, p: f64) -> f64 {
        if let (EdgeProfile::Harmonic(h), true) = (self, p == 2.0) {
            return h.integrals().0;
        }
        if let EdgeProfile::Harmonic(h) = self {
            if p == 1.0 && h.c_plus * h.c_minus >= 0.0 {
                return (h.c_plus + h.c_minus).abs() * kernels::h_integral(h.sigma(), h.length);
            }
        }
        let m = self.quadrature_cells();
        let v = self.node_values(m);
        simpson_map(&v, self.length() / m as f64, |x| x.abs().powf(p))
    }

    /// `sup |u|`. Harmonic profiles take their extremes at the endpoints;
    /// sampled parts are checked on a 4× refined grid.
    pub fn sup(&self) -> f64 {
        match self {
            EdgeProfile::Harmonic(h) => h.c_plus.abs().max(h.c_minus.abs()),
            EdgeProfile::Sampled(s) => s.values.iter().fold(0.0, |m, v| m.max(v.abs())),
            EdgeProfile::Sum(s, _) => self
                .node_values(4 * s.cells())
                .iter()
                .fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `∫|u′|² dt`, exact for the represented function.
    pub fn energy(&self) -> f64 {
        match self {
            EdgeProfile::Sampled(s) => s.energy(),
            EdgeProfile::Harmonic(h) => h.integrals().1,
            EdgeProfile::Sum(s, h) => {
                let hs = s.step();
                let cross: f64 = (0..s.cells())
                    .map(|k| {
                        let slope = (s.values[k + 1] - s.values[k]) / hs;
                        slope * (h.eval(s.node(k + 1)) - h.eval(s.node(k)))
                    })
                    .sum();
                (s.energy() + 2.0 * cross + h.integrals().1).max(0.0)
            }
        }
    }

    /// Derivative pointing into the edge at the given end.
    pub fn outgoing_derivative(&self, end: End) -> f64 {
        match self {
            EdgeProfile::Sampled(s) => s.outgoing_derivative(end),
            EdgeProfile::Harmonic(h) => h.outgoing_derivative(end),
            EdgeProfile::Sum(s, h) => s.outgoing_derivative(end) + h.outgoing_derivative(end),
        }
    }

    fn scaled(&self, c: f64) -> EdgeProfile {
        let sc = |s: &SampledProfile| SampledProfile::new(s.length, s.values.iter().map(|v| c * v).collect());
        let hc = |h: &HarmonicProfile| HarmonicProfile {
            c_plus: c * h.c_plus,
            c_minus: c * h.c_minus,
            ..*h
        };
        match self {
            EdgeProfile::Sampled(s) => EdgeProfile::Sampled(sc(s)),
            EdgeProfile::Harmonic(h) => EdgeProfile::Harmonic(hc(h)),
            EdgeProfile::Sum(s, h) => EdgeProfile::Sum(sc(s), hc(h)),
        }
    }

    fn add(&self, other: &EdgeProfile) -> EdgeProfile {
        use EdgeProfile::*;
        let add_s = |a: &SampledProfile, b: &SampledProfile| -> Option<SampledProfile> {
            (a.cells() == b.cells()).then(|| {
                SampledProfile::new(a.length, a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect())
            })
        };
        let add_h = |a: &HarmonicProfile, b: &HarmonicProfile| -> Option<HarmonicProfile> {
            (a.alpha == b.alpha).then(|| HarmonicProfile {
                c_plus: a.c_plus + b.c_plus,
                c_minus: a.c_minus + b.c_minus,
                ..*a
            })
        };
        let merged = match (self, other) {
            (Sampled(a), Sampled(b)) => add_s(a, b).map(Sampled),
            (Harmonic(a), Harmonic(b)) => add_h(a, b).map(Harmonic),
            (Sampled(a), Harmonic(b)) | (Harmonic(b), Sampled(a)) => Some(Sum(a.clone(), *b)),
            (Sum(a, ha), Sampled(b)) | (Sampled(b), Sum(a, ha)) => add_s(a, b).map(|s| Sum(s, *ha)),
            (Sum(a, ha), Harmonic(b)) | (Harmonic(b), Sum(a, ha)) => add_h(ha, b).map(|h| Sum(a.clone(), h)),
            (Sum(a, ha), Sum(b, hb)) => add_s(a, b).zip(add_h(ha, hb)).map(|(s, h)| Sum(s, h)),
        };
        merged.unwrap_or_else(|| {
            let m = self
                .grid()
                .into_iter()
                .chain(other.grid())
                .max()
                .unwrap_or_else(|| default_cells(self.length()));
            let a = self.node_values(m);
            let b = other.node_values(m);
            Sampled(SampledProfile::new(self.length(), a.iter().zip(&b).map(|(x, y)| x + y).collect()))
        })
    }
}

/// A function on the metric graph: one profile per edge plus, for continuous
/// functions, its vertex values.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    pub profiles: Vec<EdgeProfile>,
    /// `None` for data that need not be continuous, such as right-hand sides.
    pub vertex_values: Option<VertexFunction>,
}

impl EdgeFunction {
    pub fn new(profiles: Vec<EdgeProfile>, vertex_values: Option<VertexFunction>) -> Self {
        EdgeFunction {
            profiles,
            vertex_values,
        }
    }

    /// Sample `f(e, t)` at intrinsic offsets on every edge. `cells` overrides
    /// the default grid.
    pub fn from_fn(
        g: &WeightedMetricGraph,
        cells: Option<usize>,
        f: impl Fn(EdgeId, f64) -> f64,
    ) -> Self {
        let profiles = g
            .edge_ids()
            .map(|e| {
                let l = g.intrinsic_length(e);
                let m = cells.unwrap_or_else(|| default_cells(l));
                EdgeProfile::Sampled(SampledProfile::from_fn(l, m, |t| f(e, t)))
            })
            .collect();
        EdgeFunction {
            profiles,
            vertex_values: None,
        }
    }

    /// Sampled function together with vertex values read off the profiles;
    /// fails if the two ends meeting at a vertex disagree by more than `1e-9`.
    pub fn continuous_from_fn(
        g: &WeightedMetricGraph,
        cells: Option<usize>,
        f: impl Fn(EdgeId, f64) -> f64,
    ) -> Result<Self, FunctionError> {
        let mut u = Self::from_fn(g, cells, f);
        u.vertex_values = Some(u.vertex_trace(g)?);
        Ok(u)
    }

    pub fn constant(g: &WeightedMetricGraph, c: f64) -> Self {
        let mut u = Self::from_fn(g, None, |_, _| c);
        u.vertex_values = Some(VertexFunction(vec![c; g.vertex_count()]));
        u
    }

    pub fn zero(g: &WeightedMetricGraph) -> Self {
        Self::constant(g, 0.0)
    }

    /// Piecewise linear function with the given vertex values and interior
    /// node values `interior(e, k)` for `k = 1..cells`.
    pub fn piecewise_linear(
        g: &WeightedMetricGraph,
        vertex_values: &[f64],
        cells: usize,
        interior: impl Fn(EdgeId, usize) -> f64,
    ) -> Self {
        let profiles = g
            .edge_ids()
            .map(|e| {
                let (h, t) = g.endpoints(e);
                let mut v: Vec<f64> = (0..=cells).map(|k| interior(e, k)).collect();
                v[0] = vertex_values[h.0];
                v[cells] = vertex_values[t.0];
                EdgeProfile::Sampled(SampledProfile::new(g.intrinsic_length(e), v))
            })
            .collect();
        EdgeFunction {
            profiles,
            vertex_values: Some(VertexFunction(vertex_values.to_vec())),
        }
    }

    pub fn profile(&self, e: EdgeId) -> &EdgeProfile {
        &self.profiles[e.0]
    }

    pub fn with_vertex_values(mut self, values: VertexFunction) -> Self {
        self.vertex_values = Some(values);
        self
    }

    /// Check that profiles and graph agree in number, lengths and grids.
    pub fn check_graph(&self, g: &WeightedMetricGraph) -> Result<(), FunctionError> {
        if self.profiles.len() != g.edge_count() {
            return Err(FunctionError::GraphMismatch(format!(
                "{} profiles for {} edges",
                self.profiles.len(),
                g.edge_count()
            )));
        }
        for (i, p) in self.profiles.iter().enumerate() {
            let l = g.intrinsic_length(EdgeId(i));
            if (p.length() - l).abs() > 1e-12 * l {
                return Err(FunctionError::GraphMismatch(format!(
                    "profile {i} has length {} but the edge has intrinsic length {l}",
                    p.length()
                )));
            }
            if let Some(m) = p.grid() {
                if m < 2 || m % 2 == 1 {
                    return Err(FunctionError::InvalidGrid { edge: i, cells: m });
                }
            }
        }
        if let Some(v) = &self.vertex_values {
            if v.len() != g.vertex_count() {
                return Err(FunctionError::GraphMismatch(format!(
                    "{} vertex values for {} vertices",
                    v.len(),
                    g.vertex_count()
                )));
            }
        }
        Ok(())
    }

    /// Vertex values. Stored values are returned as they are; otherwise they
    /// are read off the profile ends, which must agree to `1e-9`.
    pub fn vertex_trace(&self, g: &WeightedMetricGraph) -> Result<VertexFunction, FunctionError> {
        if let Some(v) = &self.vertex_values {
            return Ok(v.clone());
        }
        let mut out = vec![f64::NAN; g.vertex_count()];
        for x in g.vertices() {
            let ends: Vec<f64> = g
                .incident(x)
                .iter()
                .map(|inc| self.profiles[inc.edge.0].value_at(inc.end))
                .collect();
            let first = ends[0];
            let defect = ends.iter().fold(0.0f64, |m, v| m.max((v - first).abs()));
            if defect > 1e-9 * first.abs().max(1.0) {
                return Err(FunctionError::Discontinuous {
                    vertex: g.label(x).to_string(),
                    defect,
                });
            }
            out[x.0] = first;
        }
        Ok(VertexFunction(out))
    }

    /// Largest gap between a profile end and the vertex value it meets.
    pub fn continuity_defect(&self, g: &WeightedMetricGraph) -> f64 {
        let Some(v) = &self.vertex_values else {
            return match self.vertex_trace(g) {
                Ok(_) => 0.0,
                Err(FunctionError::Discontinuous { defect, .. }) => defect,
                Err(_) => f64::INFINITY,
            };
        };
        let mut d = 0.0f64;
        for e in g.edge_ids() {
            let (h, t) = g.endpoints(e);
            let p = &self.profiles[e.0];
            d = d.max((p.start() - v[h.0]).abs()).max((p.end() - v[t.0]).abs());
        }
        d
    }

    pub fn scaled(&self, c: f64) -> EdgeFunction {
        EdgeFunction {
            profiles: self.profiles.iter().map(|p| p.scaled(c)).collect(),
            vertex_values: self
                .vertex_values
                .as_ref()
                .map(|v| VertexFunction(v.iter().map(|x| c * x).collect())),
        }
    }

    /// Pointwise sum. Profiles are merged exactly when their representations
    /// allow it, otherwise resampled on the finer grid.
    pub fn add(&self, other: &EdgeFunction) -> EdgeFunction {
        let profiles = self
            .profiles
            .iter()
            .zip(&other.profiles)
            .map(|(a, b)| a.add(b))
            .collect();
        let vertex_values = match (&self.vertex_values, &other.vertex_values) {
            (Some(a), Some(b)) => Some(VertexFunction(a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())),
            _ => None,
        };
        EdgeFunction {
            profiles,
            vertex_values,
        }
    }

    pub fn sub(&self, other: &EdgeFunction) -> EdgeFunction {
        self.add(&other.scaled(-1.0))
    }

    /// Every profile resampled on `cells` cells.
    pub fn resampled(&self, cells: usize) -> EdgeFunction {
        EdgeFunction {
            profiles: self
                .profiles
                .iter()
                .map(|p| EdgeProfile::Sampled(SampledProfile::new(p.length(), p.node_values(cells))))
                .collect(),
            vertex_values: self.vertex_values.clone(),
        }
    }

    /// Every profile as a sampled profile on its own grid (harmonic profiles
    /// on the default grid).
    pub fn sampled(&self) -> EdgeFunction {
        EdgeFunction {
            profiles: self
                .profiles
                .iter()
                .map(|p| {
                    let m = p.grid().unwrap_or_else(|| default_cells(p.length()));
                    EdgeProfile::Sampled(SampledProfile::new(p.length(), p.node_values(m)))
                })
                .collect(),
            vertex_values: self.vertex_values.clone(),
        }
    }

    /// Smallest value over all sample nodes (4× refined for harmonic parts).
    pub fn min_sample(&self) -> f64 {
        self.profiles
            .iter()
            .map(|p| {
                let m = p.grid().map(|m| if matches!(p, EdgeProfile::Sum(..)) { 4 * m } else { m });
                let m = m.unwrap_or_else(|| 4 * default_cells(p.length()));
                p.node_values(m).into_iter().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Value of `u` at a point; offsets are in the given length scale.
pub fn evaluate(g: &WeightedMetricGraph, u: &EdgeFunction, p: Point) -> Result<f64, FunctionError> {
    match p {
        Point::Vertex(v) => {
            if v.0 >= g.vertex_count() {
                return Err(FunctionError::PointOffGraph(format!("vertex #{}", v.0)));
            }
            match &u.vertex_values {
                Some(vals) => Ok(vals[v.0]),
                None => {
                    let inc = g.incident(v)[0];
                    Ok(u.profiles[inc.edge.0].value_at(inc.end))
                }
            }
        }
        Point::Edge { edge, offset } => {
            if edge.0 >= g.edge_count() {
                return Err(FunctionError::PointOffGraph(format!("edge #{}", edge.0)));
            }
            let l = g.weights().length[edge.0];
            if !(0.0..=l).contains(&offset) {
                return Err(FunctionError::PointOffGraph(format!(
                    "offset {offset} on edge {} of length {l}",
                    edge.0
                )));
            }
            let t = g.convert_offset(edge, offset, Scale::Intrinsic);
            Ok(u.profiles[edge.0].eval(t))
        }
    }
}

/// Exponent of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 2.0,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// Measure used by [`lp_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// The edge measure `λ_a`, i.e. `ω dt` in intrinsic coordinates.
    Edge,
    /// `(Σ_e λ_a(X_e)·‖u_e‖∞^p)^{1/p}`, the star norm (`p = 2` is the usual one).
    StarSup,
}

pub fn lp_norm(g: &WeightedMetricGraph, u: &EdgeFunction, p: Exponent, measure: Measure) -> f64 {
    let weight = |e: EdgeId| g.intrinsic_weight(e);
    match (measure, p) {
        (_, Exponent::Infinity) => u.profiles.iter().map(EdgeProfile::sup).fold(0.0, f64::max),
        (Measure::Edge, p) => {
            let q = p.value();
            let s: f64 = g
                .edge_ids()
                .map(|e| weight(e) * u.profiles[e.0].p_integral(q))
                .sum();
            s.powf(1.0 / q)
        }
        (Measure::StarSup, p) => {
            let q = p.value();
            let s: f64 = g
                .edge_ids()
                .map(|e| weight(e) * g.intrinsic_length(e) * u.profiles[e.0].sup().powf(q))
                .sum();
            s.powf(1.0 / q)
        }
    }
}

/// `⟨u, v⟩_{L²(λ_a)}`. Two harmonic profiles with the same `α` are paired in
/// closed form, everything else by Simpson on the finer of the two grids.
pub fn inner_product(g: &WeightedMetricGraph, u: &EdgeFunction, v: &EdgeFunction) -> f64 {
    g.edge_ids()
        .map(|e| {
            let (a, b) = (&u.profiles[e.0], &v.profiles[e.0]);
            let w = g.intrinsic_weight(e);
            if let (EdgeProfile::Harmonic(x), EdgeProfile::Harmonic(y)) = (a, b) {
                if x.alpha == y.alpha {
                    let s = x.alpha.sqrt();
                    let (i1, i2) = kernels::h_l2_products(s, x.length);
                    return w
                        * ((x.c_plus * y.c_plus + x.c_minus * y.c_minus) * i1
                            + (x.c_plus * y.c_minus + x.c_minus * y.c_plus) * i2);
                }
            }
            let m = a
                .grid()
                .into_iter()
                .chain(b.grid())
                .max()
                .unwrap_or_else(|| 4 * default_cells(a.length()));
            let (va, vb) = (a.node_values(m), b.node_values(m));
            let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
            w * simpson(&prod, a.length() / m as f64)
        })
        .sum()
}

/// The parts of `S(u) = E(u) + Q(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FormValue {
    /// `E(u) = Σ_e ω ∫ |u′|² dt`
    pub diffusion: f64,
    /// `½ Σ_{x,y} j(x,y)(u(x) − u(y))²`
    pub jump: f64,
    /// `Σ_x k(x) u(x)²`
    pub killing: f64,
    pub total: f64,
}

impl FormValue {
    fn new(diffusion: f64, jump: f64, killing: f64) -> Self {
        FormValue {
            diffusion,
            jump,
            killing,
            total: diffusion + jump + killing,
        }
    }
}

/// `(jump, killing)` parts of `Q(U)` for vertex data.
pub fn discrete_form(g: &WeightedMetricGraph, values: &[f64]) -> (f64, f64) {
    let q = g.discrete_part();
    let jump = q
        .jumps()
        .map(|(x, y, j)| j * (values[x.0] - values[y.0]).powi(2))
        .sum();
    let killing = q.killings().map(|(x, k)| k * values[x.0].powi(2)).sum();
    (jump, killing)
}

/// `S(u)` split into its parts. Requires a continuous function.
pub fn energy(g: &WeightedMetricGraph, u: &EdgeFunction) -> Result<FormValue, FunctionError> {
    u.check_graph(g)?;
    let values = u.vertex_trace(g)?;
    let diffusion = g
        .edge_ids()
        .map(|e| g.intrinsic_weight(e) * u.profiles[e.0].energy())
        .sum();
    let (jump, killing) = discrete_form(g, &values);
    Ok(FormValue::new(diffusion, jump, killing))
}

/// `‖u‖_o = (|u(o)|² + S(u))^{1/2}`.
pub fn finite_energy_norm(
    g: &WeightedMetricGraph,
    u: &EdgeFunction,
    o: VertexId,
) -> Result<f64, FunctionError> {
    if o.0 >= g.vertex_count() {
        return Err(FunctionError::UnknownVertex(o.0));
    }
    let s = energy(g, u)?;
    let uo = u.vertex_trace(g)?[o.0];
    Ok((uo * uo + s.total).sqrt())
}

/// `Σ_{e∼x} ω(e)·u_e′(x)` with derivatives pointing into the edges.
pub fn weighted_divergence(g: &WeightedMetricGraph, u: &EdgeFunction) -> VertexFunction {
    VertexFunction(
        g.vertices()
            .map(|x| {
                g.incident(x)
                    .iter()
                    .map(|inc| g.intrinsic_weight(inc.edge) * u.profiles[inc.edge.0].outgoing_derivative(inc.end))
                    .sum()
            })
            .collect(),
    )
}
