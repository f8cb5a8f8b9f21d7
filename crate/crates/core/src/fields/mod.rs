//! Fields on the doubled configuration space and the stationary field
//! equations they must satisfy.
//!
//! Fields come in two interchangeable representations: closed forms that
//! expose exact Taylor jets ([`smooth::Field2D`]) and uniform grids
//! ([`grid::GridField`]) differentiated with second-order central stencils.
//! A closed form becomes a grid by sampling it.

pub mod grid;
pub mod jet;
pub mod mean_derivative;
pub mod residual;
pub mod smooth;
pub mod velocity;

use std::sync::Arc;

use crate::error::Result;
pub use grid::{GridField, GridSpec};
pub use jet::Jet;
pub use mean_derivative::{mean_derivative_check, CellEstimate, MeanDerivativeReport};
pub use residual::{
    continuity_residual, dynamical_residual, fokker_planck_residual, kinematical_residual,
    osmotic_divergence_residual, osmotic_residual, default_domain, FpDirection, Residual, DEFAULT_HALF_WIDTH,
    DEFAULT_SPACING, RESIDUAL_MARGIN,
};
pub use smooth::{Axis, ExpField, Field2D, GradientField, LinearField, Polynomial2D, SharedField};
pub use velocity::{velocities_from_rs, VelocityFields};

/// A scalar field such as `R`, `S`, `P` or `V`.
#[derive(Debug, Clone)]
pub enum ScalarField2D {
    Closed(SharedField),
    Grid(GridField),
}

impl ScalarField2D {
    pub fn closed(field: impl Field2D + 'static) -> Self {
        ScalarField2D::Closed(Arc::new(field))
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, ScalarField2D::Closed(_))
    }

    /// Samples a closed form on `spec`; a grid must already sit on `spec`.
    pub fn to_grid(&self, spec: &GridSpec) -> Result<GridField> {
        match self {
            ScalarField2D::Closed(f) => Ok(GridField::sample(*spec, |x, y| f.value(x, y))),
            ScalarField2D::Grid(g) => {
                g.check_lattice(&GridField::zeros(*spec))?;
                Ok(g.clone())
            }
        }
    }
}

impl From<GridField> for ScalarField2D {
    fn from(g: GridField) -> Self {
        ScalarField2D::Grid(g)
    }
}
