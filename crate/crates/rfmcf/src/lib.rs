//! Numerical laboratory for mean curvature flow of hypersurfaces inside
//! evolving Ricci-flow backgrounds, built around gradient solitons.
//!
//! The crate is organized as a stack:
//!
//! * [`tensor`] turns metric jets into curvature data at a point;
//! * [`backgrounds`] supplies closed-form evolving ambient spaces;
//! * [`geom`] discretizes immersed hypersurfaces (closed curves, open
//!   curves, surfaces of revolution) and their extrinsic geometry;
//! * [`flow`] advances immersions by mean curvature in the evolving metric
//!   or in the equivalent weighted static frame;
//! * [`monitors`] evaluates the evolution identities, monotone quantities,
//!   and differential Harnack expression along a run as numerical residuals;
//! * [`ghy`] handles the radially symmetric boundary-action functionals,
//!   their first variations, the coupled modified flow, and the conjugate
//!   heat equation;
//! * [`scenario`] and [`verify`] wrap all of it behind config-driven runs
//!   and named verification suites.
//!
//! Every identity the crate claims is checked somewhere as a residual that
//! shrinks under grid refinement; the `verify` suites and the acceptance
//! tests exercise those checks end to end.

pub mod backgrounds;
pub mod error;
pub mod flow;
pub mod geom;
pub mod ghy;
pub mod linalg;
pub mod monitors;
pub mod scenario;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
