//! The paper-level operators: heat-type semigroups, the Riesz potential, the
//! generalized fractional integral, the difference kernel, multilinear
//! commutators, the five maximal operators, and the semigroup sharp maximal
//! function.

mod commutator;
mod fractional;
mod kernel;
mod maximal;
mod semigroup;

pub use commutator::{multilinear_commutator, sigma_expansion, CommutatorKernel, CommutatorSpec};
pub use fractional::{
    fractional_kernel, generalized_fractional, profile_constant, riesz_constant, riesz_kernel,
    riesz_potential, FracDiagnostics, TimeQuadrature,
};
pub use kernel::RadialKernel;
pub use maximal::{maximal_function, sharp_maximal, MaximalKind};
pub use semigroup::{
    difference_kernel, difference_kernel_nodes, difference_kernel_raw, semigroup_apply,
    semigroup_operator, under_resolved, KernelProfile, SemigroupSpec,
};
