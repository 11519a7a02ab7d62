//! Linear degradation operators and the quadratic data-fidelity term.

mod fidelity;
mod kernel;
mod operator;

pub use fidelity::{
    conjugate_gradient, fidelity_grad, fidelity_prox, fidelity_value, CgOptions, Fidelity,
    FidelityModel,
};
pub use kernel::Kernel;
pub use operator::{
    apply_adjoint, apply_forward, degrade, estimate_lipschitz, DegradationKind, DegradationModel,
    LinearOperator,
};
