//! Closed-form layer: the PoiGamma law, Bessel `I1`, comparison densities,
//! tail bounds, centerings and barrier curves.

pub mod bessel;
pub mod centering;
pub mod density;
pub mod poigamma;
pub mod quad;
pub mod verify;

pub use bessel::{bessel_i1, ln_i1};
pub use centering::{barrier, centering, BarrierCurve, CenteringSet};
pub use density::{
    bridge_max_tail, gaussian_half_density, path_likelihood_ratio, sqrt_poigamma_density,
};
pub use poigamma::{sqrt_tail_bound, PoiGammaParams, TailBounds};
pub use verify::{run_suite, CheckRow};
