//! Runge-Kutta maps, stability functions and Kahan's method.

pub mod kahan;
pub mod stability;
pub mod step;
pub mod system;
pub mod tableau;

pub use kahan::{kahan_step, theta_method_step};
pub use stability::{
    diagonal_pade, diagonal_pade_coefficients, is_diagonal_pade, is_symmetric_stability, matrix_stability,
    stability_function,
};
pub use step::{implicit_stage_solve, rk_step, trajectory, RkMap, SolverOptions, StepResult};
pub use system::{CompiledSystem, OdeSystem};
pub use tableau::{ButcherTableau, Special, REGISTERED, TABLEAU_IDS};
