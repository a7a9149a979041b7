//! Metric projections onto subspaces, balls and cylinders in discretized
//! Bochner spaces `L_p(S; X)`, their directional derivatives, duality maps and
//! independent numerical oracles.

pub mod derivative;
pub mod duality;
pub mod error;
pub mod hilbert;
pub mod oracle;
pub mod projection;
pub mod richardson;
pub mod smoothness;
pub mod space;
pub mod verify;

pub use derivative::{d_project_ball, d_project_cylinder, d_project_subspace, DerivativeOptions, DerivativeOutcome};
pub use duality::{j_p, j_p_decompose, j_p_simple, j_p_simple_sum, j_x};
pub use error::{Error, Result};
pub use projection::{
    classify, project_ball, project_cylinder, project_subspace, BallSpec, ClassifyTol, CylinderSpec, RegionClass,
    SetSpec, Side,
};
pub use smoothness::{psi_numeric, psi_p, psi_x, PsiMode};
pub use space::{BochnerSpace, DualElement, Element, InnerNorm, MeasureSpace, SpaceRef, SupportSet};
