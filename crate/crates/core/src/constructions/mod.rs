//! Closed-form families, generators and the gallery of named fields.

pub mod gallery;
pub mod perturb;
pub mod quadrature;
pub mod random;
pub mod special;
pub mod structure;

pub use gallery::{gallery, gallery_at, GalleryEntry, Reference, ReferenceValue, GALLERY_NAMES};
pub use perturb::{density_perturb, density_perturb_trace, perturb_type_eps, DensityPerturbation, TypeEpsPerturbation};
pub use special::{q_criterion_special, QCriterion};
pub use structure::{
    build_c_plus_am, characterize_2d_diagonal, characterize_classify, hessian_contract, lift_to_3d_constant_trace,
    operator_on, orbit_corrector, orbit_scale, scalar_multiple_check, split_diagonal, CharacterizationData2D, CplusAM,
    CplusAmCheck, OrbitScaled, ScalingCheck,
};
