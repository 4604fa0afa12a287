//! Closed-form surfaces and barrier constructions.

pub mod barrier;
pub mod gradient;
pub mod oracle;

pub use barrier::{
    build_barrier_params, modulus_barrier, modulus_delta, BarrierParams, ModulusDelta, PhiBounds,
    Psi, Sign,
};
pub use gradient::{global_gradient_bound, GlobalGradientBound, UPhi};
pub use oracle::{rescale_eps, Classification, DerivOrder, OracleSurface};
