//! Prediction and numerical verification of interior separation (vortex
//! birth) for two-dimensional incompressible flows coupled with heat.
//!
//! The pipeline takes initial velocity, temperature and force fields, builds
//! the first-order-in-time field `v = Psi + t u1`, locates the time and place
//! where `v` acquires an index-zero degenerate singular point, and checks the
//! prediction against an explicit finite-difference integration.

pub mod fields;
pub mod model;
pub mod taylor;
pub mod topology;
pub mod predictor;
pub mod solver;
pub mod report;
