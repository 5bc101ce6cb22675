//! Certified error bounds for isolated singular roots of polynomial systems.
//!
//! A singular root is deflated by adding smoothing parameters and
//! multiplier variables until the augmented system is square and regular,
//! then verified with the Krawczyk test in outward-rounded interval
//! arithmetic. The certificate proves that a slightly perturbed system has
//! an isolated singular root inside the returned box.
//!
//! ```
//! use singcert::{sysio::parse_system, viss::{viss, VissOptions}};
//!
//! let f = parse_system::<f64>("vars x\nx^2\n").unwrap();
//! let r = viss(&f, &[1e-4], &VissOptions { eps: 1e-3, ..Default::default() }).unwrap();
//! assert_eq!(r.corank_sequence, vec![1, 0]);
//! assert!(r.x_bound() < 1e-10);
//! ```

pub mod breadth_one;
pub mod deflation;
pub mod fixtures;
pub mod interval;
pub mod krawczyk;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod soundness;
pub mod sysio;
pub mod viss;

pub use deflation::{DeflationError, DeflationState, VariableLayout};
pub use interval::{CInterval, Enclosure, Interval};
pub use krawczyk::{verify_root, VerificationCertificate, VerificationStatus, VerifyOptions};
pub use linalg::{SelectionRule, SelectionSets};
pub use poly::{DirectionEntry, Monomial, PolySystem, Polynomial};
pub use scalar::Scalar;
pub use viss::{consequence_check, viss, VissError, VissOptions, VissResult};
