//! Principal frequencies of the p-Laplacian on convex planar domains.
//!
//! The crate has five layers:
//!
//! * [`geometry`]: convex polygons, inballs, tangent envelopes and their
//!   pyramid decompositions, plus analytic shape families in any dimension.
//! * [`poincare1d`]: sharp one-dimensional Poincare constants, both the
//!   closed form and a certified discrete minimization.
//! * [`eigensolver`]: piecewise-linear Rayleigh quotient minimization on
//!   triangle meshes, including mixed boundary conditions and unequal
//!   exponents.
//! * [`bounds`]: closed-form lower and upper bounds on the first Dirichlet
//!   eigenvalue in terms of inradius, volume and perimeter, with verdicts
//!   against measured values.
//! * [`experiments`]: deterministic sweeps that exercise the sharpness of
//!   those bounds, with CSV/JSON/SVG output.
//!
//! Discretizations are chosen so that every discrete Rayleigh quotient is an
//! upper bound for its continuum counterpart: gradients of hat functions are
//! exact and the lower-order terms use one-point (midpoint or centroid)
//! quadrature, which underestimates convex integrands. Certified lower
//! bounds therefore hold with zero tolerance against solver output.

pub mod bounds;
pub mod eigensolver;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod poincare1d;
