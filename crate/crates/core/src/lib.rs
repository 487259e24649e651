//! Guaranteed zonotopic over-approximation of reachable sets and reachable
//! tubes for linear time-varying control systems with compact zonotopic
//! uncertainty, and avoidance verification against unsafe regions on top of
//! the computed tubes.
//!
//! The pipeline is: describe a system ([`system::LtvSystem`], either
//! programmatically or from its JSON form [`system::SystemSpec`]), run the
//! recurrence ([`reach::reach_sequence`], [`reach::tube_sequence`]) at a
//! chosen time resolution `N`, and either persist the streamed zonotopes or
//! feed them into [`safety`] checks. Every emitted set is a certified
//! superset of the exact reachable object, with Hausdorff error `O(1/N)`.
//!
//! [`oracle`] holds independent high-accuracy reference computations used
//! by the test suites; [`benchmark`] generates the footbridge model family
//! and runs convergence and scaling studies.

pub mod benchmark;
pub mod error;
pub mod oracle;
pub mod reach;
pub mod safety;
pub mod system;
pub mod zonotope;

pub use error::{Error, Result};
pub use reach::{reach_sequence, tube_sequence, ReachOptions, ReachStep, TubeStep};
pub use safety::{Halfspace, Region, Status, Verdict};
pub use system::{BoundSet, HarmonicPencil, LtvSystem, SystemSpec};
pub use zonotope::{ConvexPolygon, IntervalHull, Zonotope};
