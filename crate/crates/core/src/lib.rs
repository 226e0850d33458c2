//! Simulation and verification toolkit for the cover time of continuous-time
//! random walk on the complete rooted binary tree.
//!
//! The crate is organized around three samplers that all live on the same
//! tree:
//!
//! * [`walk`] runs the random walk itself, event by event. It is slow but
//!   exact and serves as the oracle for everything else.
//! * [`rayknight`] samples the local-time field at an inverse local time
//!   directly from its Markovian description along the tree (each child is a
//!   compound Poisson-exponential draw given its parent), streamed depth-first.
//! * [`gff`] samples the Gaussian free field on the tree and its maxima.
//!
//! [`analytic`] collects the closed-form side (PoiGamma law, Bessel `I1`,
//! tail bounds, centerings and barrier curves) and [`harness`] provides
//! reproducible replica execution, KS tests, threshold scans and centering
//! fits.
//!
//! Parallel execution uses rayon when the `parallel` feature is enabled
//! (default). Without it every entry point runs sequentially with identical
//! results.

// `!(x > 0.0)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analytic;
pub mod error;
pub mod gff;
pub mod harness;
pub mod rayknight;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use tree::{TreeParams, VertexRef};
