//! Constant-speed friction ramps: planar closed-form curves, spatial ramps
//! generated from hemisphere vector fields, force-balance verification and
//! motion traces.

pub mod cli;
pub mod export;
pub mod ode;
pub mod params;
pub mod planar;
pub mod quadrature;
pub mod ramp3d;
pub mod sim;
pub mod verify;
