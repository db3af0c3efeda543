//! Diagnostics: harmonic spaces, recurrence, stochastic completeness,
//! Sobolev constants, capacities, resistance and the Royden decomposition.

mod capacity;
mod harmonic;
mod recurrence;

use std::fmt;

use thiserror::Error;

use crate::edge_functions::FunctionError;
use crate::graph_model::{GraphError, SphericalError};
use crate::kirchhoff_ops::OpsError;
use crate::linalg::LinAlgError;
use crate::solver::SolverError;

pub use capacity::{
    capacity, e_boundedness_check, resistance, sobolev_check, sobolev_constants, Capacity, SobolevConstants,
};
pub use harmonic::{harmonic_space, royden_decompose, Royden};
pub use recurrence::{
    radial_harmonic_recursion, recurrence_test, stochastic_completeness_test, AnalysisOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("the boundary set is empty")]
    EmptyBoundary,
    #[error("unknown vertex #{0}")]
    UnknownVertex(usize),
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spherical(#[from] SphericalError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails,
    Undecided,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Undecided => "undecided",
        })
    }
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    None,
    Constant(f64),
    Bounds { necessary: f64, sufficient: f64 },
    /// A radial ray of finite length.
    Ray { length: f64, prefix: Vec<f64> },
    Series { partial_sum: f64, terms: usize, certified: bool },
    /// Energies of truncated monopoles by depth.
    Energies { depths: Vec<usize>, energies: Vec<f64>, limit: f64 },
    /// Values of a marched radial solution.
    Recursion { values: Vec<f64>, generations: usize },
    Vertex { label: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub property: &'static str,
    pub outcome: Outcome,
    pub witness: Witness,
    /// Decided by a budget or tail estimate rather than a certificate.
    pub heuristic: bool,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    pub fn holds(property: &'static str, witness: Witness, heuristic: bool) -> Self {
        debug_assert!(witness != Witness::None);
        Verdict {
            property,
            outcome: Outcome::Holds,
            witness,
            heuristic,
            diagnostics: Vec::new(),
        }
    }

    pub fn fails(property: &'static str, witness: Witness, heuristic: bool) -> Self {
        debug_assert!(witness != Witness::None);
        Verdict {
            property,
            outcome: Outcome::Fails,
            witness,
            heuristic,
            diagnostics: Vec::new(),
        }
    }

    pub fn undecided(property: &'static str, witness: Witness) -> Self {
        Verdict {
            property,
            outcome: Outcome::Undecided,
            witness,
            heuristic: true,
            diagnostics: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.diagnostics.push(line.into());
        self
    }
}
