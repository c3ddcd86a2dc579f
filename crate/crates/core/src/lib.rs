//! Laplacians and bilaplacians on total spaces of vector bundles carrying
//! spherically symmetric metrics, with closed-form operators, explicit
//! radial biharmonic families and a coordinate-based numerical oracle.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod bundle;
pub mod closed_form;
pub mod dual;
pub mod error;
pub mod families;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod smooth;
pub mod weights;

pub use bundle::{BaseChart, BundleConfig, Connection, MetricField, TotalPoint};
pub use closed_form::{BaseFunction, RadialFunction};
pub use error::{Error, Result};
pub use families::{Classification, ExponentRoots, FamilyCase, FamilyParams};
pub use field::{CoordinateField, ScalarFieldOnE, VectorFieldOnE};
pub use oracle::{DiffConfig, DiffScheme, MetricSource};
pub use smooth::SmoothFn;
pub use weights::WeightProfile;
