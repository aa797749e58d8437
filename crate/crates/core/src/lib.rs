//! Bergman kernels, Bergman functions and the Fubini–Study map for
//! inner products, possibly indefinite, on section spaces of direct sums of
//! line bundles over the projective line.
//!
//! Layout, bottom-up:
//!
//! - [`hermitian`]: eigen-decompositions, inertia, signed bases, pencils;
//! - [`bundle`]: the bundle model, chart points, evaluation rows, grids;
//! - [`inner_product`]: dual inner products and the duality `δ`;
//! - [`kernel`]: `K`, `k`, `κ` and their inverses from samples;
//! - [`spectrum`]: the evaluation form and the values `κ_l`;
//! - [`fubini_study`]: FS, `Φ`, rather-ampleness, curvature, classification;
//! - [`io`]: scenario files, JSON reports and CSV grids.

pub mod bundle;
pub mod error;
pub mod exec;
pub mod fubini_study;
pub mod hermitian;
pub mod inner_product;
pub mod io;
pub mod kernel;
pub mod random;
pub mod spectrum;

pub use bundle::{BundleModel, Chart, ChartPoint, GridSpec, MetricWeight, Section};
pub use error::{Error, Result};
pub use exec::Exec;
pub use hermitian::{CMatrix, Inertia, ToleranceSpec};
pub use inner_product::{delta, delta_inverse, DualInnerProduct, SubspaceWithForm};
