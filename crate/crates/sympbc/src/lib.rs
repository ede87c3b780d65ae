//! Numerical toolkit for classifying, constructing, and certifying
//! self-adjoint and locally self-adjoint boundary conditions of symmetric
//! second-order operators on `[0, 1]`.
//!
//! Every question the toolkit answers is reduced to verifiable finite
//! dimensional symplectic linear algebra or to a transport computation
//! whose conservation defect is reported as a certificate:
//!
//! * [`symplin`] — subspace classification (isotropic / coisotropic /
//!   Lagrangian), symplectic dual bases, and the graph defect of a
//!   symmetric operator.
//! * [`connection`] — the symplectic connection on a chart with variable
//!   form `Ω(x)`: Christoffel evaluation, parallel transport with a
//!   conservation report, Kato projector transport, and Lagrangian frame
//!   fields along rays.
//! * [`boundary`] — the trace calculus on `[0, 1]`: trace quadruples, the
//!   boundary symplectic form, Green-identity residuals, Calkin systems,
//!   and classification of linear boundary conditions.
//! * [`nonlinear`] — the discretized model operator `F(u) = -u'' + g(u)`:
//!   Gateaux-derivative symmetry, the translation group action and its
//!   leaves, integrability and symplectomorphism certificates, lifted
//!   boundary maps, and a certified locally self-adjoint BVP solver.
//! * [`cli`] — batch front end reading JSON problem specifications and
//!   emitting deterministic JSON reports plus CSV bulk data.
//!
//! ## Runnable examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example classify_boundary_conditions
//! cargo run --example green_identity
//! cargo run --example calkin_system
//! cargo run --example lagrangian_subspaces
//! cargo run --example operator_defect
//! cargo run --example parallel_transport
//! cargo run --example kato_projector_transport
//! cargo run --example lagrangian_frames
//! cargo run --example group_action_leaves
//! cargo run --example nonlinear_bvp
//! ```
//!
//! The `sympbc` binary exposes the same functionality as batch
//! subcommands (`classify`, `transport`, `bvp`, `defect`, `calkin`,
//! `frames`, `presets`); see the README for the JSON schemas.

pub mod boundary;
pub mod cli;
pub mod connection;
mod linalg;
pub mod nonlinear;
pub mod presets;
pub mod quad;
pub mod symplin;

pub use boundary::{BoundaryForm, TestFunction, TraceVector};
pub use quad::GaussLegendre;
pub use symplin::{Subspace, SubspaceClass, SubspaceKind, SymplecticForm};
