//! Positive distributions in Gaussian analysis, at desk scale.
//!
//! The crate models the Gelfand triple `N ⊂ H ⊂ N'` by a weighted coordinate
//! space ([`hilbert_scale`]), represents test functions and distributions by
//! finite chaos expansions ([`chaos`]), and on top of that derives moments,
//! positivity certificates, reconstructed measures and exponential
//! integrability reports.

// negated comparisons are used to reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chaos;
pub mod document;
pub mod error;
pub mod hilbert_scale;
pub mod integrability;
pub mod moments;
pub mod positivity;
pub mod reconstruct;
pub mod special;

pub use chaos::{ChaosElement, RankOneKernel, Role};
pub use document::{Document, Kind};
pub use error::{Error, Result};
pub use hilbert_scale::{Coords, WeightSequence};
pub use integrability::{IntegrabilityReport, ScaleParams, Source};
pub use moments::{GrowthCertificate, MomentSequence};
pub use positivity::{HankelReport, Verdict};
pub use reconstruct::{DiscreteMeasure, JacobiCoefficients};
