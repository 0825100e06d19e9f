//! Linear elastic finite elements: 8-node hexahedra for the concrete solid,
//! 2-node truss bars for embedded tendons, and a direct skyline solver.
//!
//! The submodules are deliberately small and testable in isolation:
//! [`hex8`] and [`truss`] hold the element kernels, [`skyline`] the
//! reverse-Cuthill-McKee ordered LDL^T factorization, and [`system`] the
//! assembly of a [`crate::mesh::Mesh`] subset into equations (embedded truss
//! nodes are condensed onto their host-element nodes and never appear as
//! unknowns).

pub mod hex8;
pub mod loads;
pub mod skyline;
pub mod stress;
pub mod system;
pub mod truss;

use thiserror::Error;

/// Isotropic linear elastic material.
#[derive(Clone, Copy, Debug)]
pub struct Material {
    /// Young's modulus in Pa.
    pub e: f64,
    /// Poisson ratio.
    pub nu: f64,
    /// Density in kg/m^3.
    pub rho: f64,
    /// Thermal expansion coefficient in 1/K.
    pub alpha: f64,
}

/// Solver and assembly failures.
#[derive(Debug, Error)]
pub enum FemError {
    #[error(
        "stiffness matrix is not positive definite at equation {eq} \
         (node {node}, dof {dof}): check supports of segment '{segment}'"
    )]
    NotPositiveDefinite {
        eq: usize,
        node: usize,
        dof: usize,
        segment: String,
    },
    #[error("active component containing node {node} (segment '{segment}') has no support")]
    FloatingComponent { node: usize, segment: String },
    #[error("solve residual {residual:.3e} exceeds the admissible 1e-8")]
    ResidualBlowup { residual: f64 },
    #[error("conjugate gradient stalled at residual {residual:.3e} after {iterations} iterations")]
    CgStalled { residual: f64, iterations: usize },
    #[error("load references node {node} outside the active part")]
    LoadOutsideActivePart { node: usize },
    #[error("point ({x}, {z}) is not covered by any face of the loaded surface")]
    PointOffSurface { x: f64, z: f64 },
}
