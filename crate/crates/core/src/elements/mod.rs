//! Functionals, element assembly and the built-in families.

mod element;
mod families;
mod functional;
mod points;

pub use element::{build_element, dual_matrix, CiarletElement, DualMatrix, ElementInfo, VectorSet, DUAL_SINGULAR_RATIO};
pub use families::{make_family, make_family_on, supported_specs, ElementSpec, Family, FamilyOptions, MomentBasis};
pub use functional::{Functional, FunctionalKind, MomentComponent};
pub use points::{gll_points, interior_points, nodes_1d, LagrangeVariant};
