//! Length transformations between weight normal forms.
//!
//! Rescaling edge `e` from length `l` to `l̃` while setting
//!
//! ```text
//! ã = a·l / l̃        b̃ = b·l̃ / l
//! ```
//!
//! preserves `L²`, energy and sup norms of transported functions. The
//! intrinsic scale `(ω, l_i)` is invariant, and since profiles are stored in
//! intrinsic coordinates, transporting a function does not change its data.

use thiserror::Error;

use crate::edge_functions::{EdgeFunction, FunctionError};
use crate::graph_model::{EdgeWeights, GraphError, WeightedMetricGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("new length of edge {edge} must be positive and finite, got {value}")]
    InvalidLength { edge: usize, value: f64 },
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// A length transformation with its source and target graphs.
#[derive(Debug, Clone)]
pub struct LengthTransform {
    /// `s(e) = l̃(e) / l(e)`
    pub factors: Vec<f64>,
    pub source: WeightedMetricGraph,
    pub target: WeightedMetricGraph,
}

impl LengthTransform {
    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&s| s == 1.0)
    }

    /// The inverse transformation.
    pub fn inverse(&self) -> LengthTransform {
        LengthTransform {
            factors: self.factors.iter().map(|s| 1.0 / s).collect(),
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }
}

/// Transform `g` to the given edge lengths.
pub fn length_transform(g: &WeightedMetricGraph, lengths: &[f64]) -> Result<LengthTransform, TransformError> {
    if lengths.len() != g.edge_count() {
        return Err(GraphError::WeightCountMismatch {
            expected: g.edge_count(),
            got: lengths.len(),
        }
        .into());
    }
    let w = g.weights();
    let mut out = EdgeWeights {
        length: Vec::with_capacity(lengths.len()),
        measure: Vec::with_capacity(lengths.len()),
        ellipticity: Vec::with_capacity(lengths.len()),
    };
    let mut factors = Vec::with_capacity(lengths.len());
    for (i, &new) in lengths.iter().enumerate() {
        if !(new.is_finite() && new > 0.0) {
            return Err(TransformError::InvalidLength { edge: i, value: new });
        }
        let l = w.length[i];
        factors.push(new / l);
        out.length.push(new);
        out.measure.push(w.measure[i] * l / new);
        out.ellipticity.push(w.ellipticity[i] * new / l);
    }
    let target = g.with_weights(out)?;
    Ok(LengthTransform {
        factors,
        source: g.clone(),
        target,
    })
}

fn with_exact<F>(g: &WeightedMetricGraph, f: F) -> Result<LengthTransform, TransformError>
where
    F: Fn(f64, f64, f64) -> (f64, f64, f64),
{
    let w = g.weights();
    let mut out = EdgeWeights {
        length: Vec::new(),
        measure: Vec::new(),
        ellipticity: Vec::new(),
    };
    let mut factors = Vec::new();
    for i in 0..g.edge_count() {
        let (l, a, b) = f(w.length[i], w.measure[i], w.ellipticity[i]);
        factors.push(l / w.length[i]);
        out.length.push(l);
        out.measure.push(a);
        out.ellipticity.push(b);
    }
    let target = g.with_weights(out)?;
    Ok(LengthTransform {
        factors,
        source: g.clone(),
        target,
    })
}

/// Canonical form: `b̃ ≡ 1`, lengths `l_c = l/b`, measure `ν = a·b`.
pub fn to_canonical(g: &WeightedMetricGraph) -> Result<(WeightedMetricGraph, LengthTransform), TransformError> {
    // weights are written directly to keep exact inputs exact
    let t = with_exact(g, |l, a, b| {
        if b == 1.0 {
            (l, a, b)
        } else {
            (l / b, a * b, 1.0)
        }
    })?;
    Ok((t.target.clone(), t))
}

/// Intrinsic form: `ã = b̃ = ω = √(a·b)`, lengths `l_i = l·√(a/b)`.
pub fn to_intrinsic(g: &WeightedMetricGraph) -> Result<(WeightedMetricGraph, LengthTransform), TransformError> {
    let t = with_exact(g, |l, a, b| {
        if a == b {
            (l, a, b)
        } else {
            let w = (a * b).sqrt();
            (l * (a / b).sqrt(), w, w)
        }
    })?;
    Ok((t.target.clone(), t))
}

/// All lengths one: `ã = a·l`, `b̃ = b/l`.
pub fn to_unit_lengths(g: &WeightedMetricGraph) -> Result<(WeightedMetricGraph, LengthTransform), TransformError> {
    let t = with_exact(g, |l, a, b| if l == 1.0 { (l, a, b) } else { (1.0, a * l, b / l) })?;
    Ok((t.target.clone(), t))
}

/// Transport `u` along `t`: `ũ(Φ(x)) = u(x)`.
pub fn pushforward_function(t: &LengthTransform, u: &EdgeFunction) -> Result<EdgeFunction, TransformError> {
    u.check_graph(&t.source)?;
    u.check_graph(&t.target)?;
    Ok(u.clone())
}
