pub mod graph_model;
mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod edge_functions;
pub mod transforms;
pub mod kirchhoff_ops;
pub mod solver;
pub mod analysis;
pub mod quantum;
pub mod generators;
pub mod cli_io;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/graphs.md")]
mod book_graphs {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/transforms.md")]
mod book_transforms {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/resolvent.md")]
mod book_resolvent {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/analysis.md")]
mod book_analysis {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/quantum.md")]
mod book_quantum {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
