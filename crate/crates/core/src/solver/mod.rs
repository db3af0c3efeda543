//! Resolvents, part Dirichlet problems and the finite-difference oracle.
//!
//! The resolvent of the form `S = E + Q` at `α > 0` is
//!
//! ```text
//! (L + α)⁻¹ f = G_α f + H_α U,    (Δ + Δ_α + M_α) U = ∂_n G_α f
//! ```
//!
//! with the vertex operators from [`crate::kirchhoff_ops`].

mod dirichlet;
mod exhaustion;
mod krein;
mod oracle;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::edge_functions::FunctionError;
use crate::graph_model::{GraphError, SphericalError};
use crate::kirchhoff_ops::OpsError;
use crate::linalg::{DiscreteOperator, LinAlgError, SolveMethod};

pub use dirichlet::{dirichlet_problem, OpenSubgraph};
pub use exhaustion::{exhaustion_resolve, Exhaustion};
pub use krein::{krein_resolve, weak_residual, ResolventSolution};
pub use oracle::fem_oracle_resolve;
pub(crate) use oracle::{fd_solve, SlotEdge, SlotSystem, SlotTarget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("α must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("the system is singular: {0}")]
    SingularSystem(String),
    #[error("oracle needs an even number of cells >= 2, got {0}")]
    InvalidCells(usize),
    #[error("invalid input: {0}")]
    InvalidData(String),
    #[error("the open set has no edges")]
    EmptyInterior,
    #[error("the open set is the whole graph")]
    EmptyComplement,
    #[error("vertex {0} is interior but not all of its edges are in the set")]
    NotOpen(String),
    #[error("resolvent decreased at vertex {vertex} between depths {from} and {to} ({before} -> {after})")]
    NonmonotoneDetected {
        vertex: String,
        from: usize,
        to: usize,
        before: f64,
        after: f64,
    },
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spherical(#[from] SphericalError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Conditions that do not stop a solve but should be reported.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverWarning {
    IllConditioned { estimate: f64 },
    ResidualAboveTolerance { residual: f64, tolerance: f64 },
}

/// Condition estimates above this raise [`SolverWarning::IllConditioned`].
pub const CONDITION_THRESHOLD: f64 = 1e12;
/// Weak residual tolerance relative to `‖f‖₂`.
pub const WEAK_RESIDUAL_TOLERANCE: f64 = 1e-7;
/// Condition numbers are only estimated below this many unknowns.
const CONDITION_ESTIMATE_LIMIT: usize = 20_000;

pub(crate) struct VertexSolve {
    pub values: Vec<f64>,
    pub residual: f64,
    pub condition: Option<f64>,
    pub method: SolveMethod,
}

/// Solve `A U = b` for the vertices not in `fixed`, with `U = fixed` on the rest.
pub(crate) fn solve_vertex_system(
    a: &DiscreteOperator,
    rhs: &[f64],
    fixed: &BTreeMap<usize, f64>,
) -> Result<VertexSolve, SolverError> {
    let n = a.size();
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains_key(i)).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let mut b: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    for (i, j, v) in a.entries() {
        if let (true, Some(w)) = (pos[i] != usize::MAX, fixed.get(&j)) {
            b[pos[i]] -= v * w;
        }
        if i != j {
            if let (true, Some(w)) = (pos[j] != usize::MAX, fixed.get(&i)) {
                b[pos[j]] -= v * w;
            }
        }
    }
    let sub = a.restrict(&free);
    let report = sub.solve_spd(&b)?;
    let condition = if free.len() <= CONDITION_ESTIMATE_LIMIT {
        Some(sub.condition_estimate()?)
    } else {
        None
    };
    let mut values = vec![0.0; n];
    for (&i, &w) in fixed {
        values[i] = w;
    }
    for (k, &i) in free.iter().enumerate() {
        values[i] = report.solution[k];
    }
    Ok(VertexSolve {
        values,
        residual: report.relative_residual,
        condition,
        method: report.method,
    })
}
