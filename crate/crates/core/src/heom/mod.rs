//! Hierarchical equations of motion for N-site exciton systems, each site
//! coupled to its own high-temperature Drude–Lorentz bath.
//!
//! The hierarchy is closed by treating every ADO beyond the truncation
//! depth as zero; ADOs at the boundary keep their damping and downward
//! couplings.

mod audit;
mod operators;
mod propagate;
mod rk4;
mod solver;

pub use audit::{check_density_properties, DensityReport};
pub use operators::{liouvillian_apply, phi_apply, theta_apply};
pub use propagate::{
    excited_site, propagate, propagate_with, PropagationConfig, Trajectory, TrajectoryAudit,
    DEFAULT_DT_PS, DEFAULT_TOTAL_PS, RHO_DIVERGENCE_BOUND,
};
pub use rk4::{rk4_step, Rk4};
pub use solver::{HeomSolver, HierarchyState};
