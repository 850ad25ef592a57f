//! Witt vector approximations and the explicit F-crystal of a CM place.

pub mod crystal;
pub mod kisin;
pub mod ring;
pub mod snf;

pub use crystal::{
    artin_invariant_via_cokernel, beta_exponents, build_beta, fixed_module_basis,
    ArtinComputation, FCrystal, FixedModule, LocalFieldData, DEFAULT_PRECISION,
};
pub use kisin::{bk_symbolic, specialize_mod_u, BkComponent, BkSymbolic, UnitToken};
pub use ring::{WittApprox, WittElem, ZMod};
