//! Solid finite-element analysis of long-span single-cell box girders.
//!
//! The crate covers the full chain from parametric cross-section geometry to
//! shear-lag coefficients on the completed structure:
//!
//! * [`section`] builds cross-section polygons and exact area properties.
//! * [`mesh`] sweeps a structured hex template along the girder axis and
//!   embeds tendon truss chains into the solid.
//! * [`fem`] assembles and solves the linear elastic system (hex8 solids,
//!   truss tendons, thermal pseudo-loads for prestress by cooling).
//! * [`staging`] runs the segment-by-segment construction sequence with
//!   stress-free activation and temporary-support release.
//! * [`shearlag`] extracts shear-lag coefficient profiles from a stress field
//!   and evaluates the matching thin-wall variational solution.
//! * [`bridge`] ties the above together into a ready-to-run three-span
//!   rigid-frame model.
//!
//! Coordinates: `x` transverse (centreline at 0), `y` vertical (deck surface
//! at 0, down is negative), `z` along the girder axis starting at the left
//! abutment. Cross sections use the same frame, so the soffit sits at
//! `y = -h`. All units are SI (m, N, Pa, kg).

pub mod bridge;
pub mod fem;
pub mod mesh;
pub mod section;
pub mod shearlag;
pub mod staging;
pub mod vtk;
