//! Simulation of generalised hyperbolic (GH) Lévy processes.
//!
//! The GH process is a normal variance-mean mixture driven by a generalised
//! inverse Gaussian (GIG) subordinator. The subordinator's jumps come from a
//! shot-noise series: gamma and tempered-stable proposal processes are thinned
//! down to bivariate envelopes of the GIG Lévy density, then to the density
//! itself. Small jumps are cut off adaptively and replaced by a Gaussian term.
//!
//! Module map:
//! - [`specfun`]: Bessel, incomplete gamma and truncated √Gamma kernels.
//! - [`point_process`]: Poisson epochs and gamma / tempered-stable samplers.
//! - [`envelope`]: Hankel-modulus bounds and the GIG envelopes built on them.
//! - [`gig`]: the GIG subordinator sampler.
//! - [`truncation`]: residual moments, exceedance bounds, adaptive cut-off.
//! - [`gh`]: GH jumps and paths.
//! - [`oracle`]: exact GIG / GH variates, densities and two-sample statistics.

pub mod envelope;
pub mod error;
pub mod gh;
pub mod gig;
pub mod oracle;
pub mod params;
pub mod point_process;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod truncation;

pub use error::{Error, Result};
pub use params::{GhParams, GigParams};
