//! Elliptic and heat solvers built from local randomized-network bases on a
//! rectangular partition, glued by discontinuous Galerkin formulations.
//!
//! Each element carries a fixed random single-hidden-layer network
//! (`basis`). The coefficients of all elements are found together from a
//! Galerkin block system, optionally stacked with collocation constraints
//! that enforce C0 or C1 continuity across faces (`assembly`). The stacked
//! system is solved by rank-revealing least squares (`linsolve`), and the
//! result is measured against manufactured solutions (`postprocess`,
//! `harness`).
//!
//! Everything numerical is generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`.
//!
//! ```
//! use lrnn_dg::harness::examples::ExampleKind;
//! use lrnn_dg::harness::{run, ExperimentConfig, RunOptions};
//!
//! let cfg = ExperimentConfig::from_json(
//!     r#"{"example":"helmholtz1d","scheme":"c0dg","lambda":10,
//!         "h_list":[0.5],"m_list":[20],"w0":5.5,"seeds":[1]}"#,
//! )
//! .unwrap();
//! assert_eq!(cfg.example, ExampleKind::Helmholtz1d);
//! let rows = run(&cfg, &RunOptions::default()).unwrap();
//! assert!(rows[0].l2_error < 1e-2);
//! ```

pub mod assembly;
pub mod basis;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linsolve;
pub mod postprocess;
pub mod problem;
pub mod quadrature;
pub mod scalar;

pub use assembly::{AssembledSystem, PenaltySpec, QuadSpec, Scheme, TracePolicy};
pub use basis::{Activation, LocalBasis};
pub use error::{Error, Result};
pub use geometry::{build_partition, Domain, Face, Partition};
pub use linsolve::{solve_system, LstsqReport, SolveOptions, SolverPath};
pub use postprocess::{ErrorNorms, ErrorReport, Solution};
pub use problem::{EllipticProblem, HeatProblem};
pub use scalar::{Point, Real};

pub type Point64 = Point<f64>;
pub type Domain64 = Domain<f64>;
pub type Partition64 = Partition<f64>;
pub type Basis64 = LocalBasis<f64>;
pub type System64 = AssembledSystem<f64>;
pub type Report64 = LstsqReport<f64>;
pub type Elliptic64 = EllipticProblem<f64>;
pub type Heat64 = HeatProblem<f64>;
