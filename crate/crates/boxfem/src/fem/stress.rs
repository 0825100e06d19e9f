//! Accumulated stress state over staged analysis.
//!
//! Stresses live at the 2x2x2 Gauss points of each hex (Voigt order xx, yy,
//! zz, xy, yz, zx) and as a single axial value per bar. Each stage adds the
//! increment produced by its displacement field; elements activated later
//! simply stay at zero until their first active stage.

use std::collections::BTreeMap;

use crate::fem::{hex8, truss, Material};
use crate::mesh::Mesh;

/// Gauss-point stress history for the whole mesh.
#[derive(Clone)]
pub struct StressField {
    /// Per hex: 8 Gauss points, Voigt 6-vectors.
    pub hex_gauss: Vec<[[f64; 6]; 8]>,
    /// Per bar: axial stress (tension positive).
    pub truss_axial: Vec<f64>,
}

impl StressField {
    pub fn zeros(mesh: &Mesh) -> Self {
        StressField {
            hex_gauss: vec![[[0.0; 6]; 8]; mesh.hexes.len()],
            truss_axial: vec![0.0; mesh.trusses.len()],
        }
    }

    /// Adds the stress increment of one solved stage.
    ///
    /// `hexes` and `trusses` flag the elements active in that stage;
    /// `cooled` maps tendon group -> temperature drop applied this stage
    /// (bars of other groups see a purely elastic increment).
    pub fn add_increment(
        &mut self,
        mesh: &Mesh,
        materials: &[Material],
        hexes: &[bool],
        trusses: &[bool],
        u_full: &[f64],
        cooled: &BTreeMap<usize, f64>,
    ) {
        for (e, h) in mesh.hexes.iter().enumerate() {
            if !hexes[e] {
                continue;
            }
            let coords = mesh.hex_coords(e);
            let mut ue = [0.0; 24];
            for a in 0..8 {
                for d in 0..3 {
                    ue[3 * a + d] = u_full[3 * h.nodes[a] + d];
                }
            }
            let gp = hex8::gauss_stresses(&coords, &ue, &materials[h.material]);
            for (dst, src) in self.hex_gauss[e].iter_mut().zip(gp.iter()) {
                for c in 0..6 {
                    dst[c] += src[c];
                }
            }
        }
        for (t, tr) in mesh.trusses.iter().enumerate() {
            if !trusses[t] {
                continue;
            }
            let (pa, pb) = mesh.truss_coords(t);
            let mat = &materials[tr.material];
            let mut ua = [0.0; 3];
            let mut ub = [0.0; 3];
            for d in 0..3 {
                ua[d] = u_full[3 * tr.nodes[0] + d];
                ub[d] = u_full[3 * tr.nodes[1] + d];
            }
            let dt = cooled.get(&tr.group).copied().unwrap_or(0.0);
            self.truss_axial[t] += truss::stress(pa, pb, ua, ub, mat.e, mat.alpha, dt);
        }
    }
}

/// Volume-count average of Gauss stresses at the nodes of active hexes.
///
/// Each active hex extrapolates its Gauss values to its corners; corner
/// contributions are averaged over the sharing elements. Nodes not touched
/// by any active hex keep zeros.
pub fn nodal_average(mesh: &Mesh, hexes: &[bool], field: &StressField) -> Vec<[f64; 6]> {
    let mut sum = vec![[0.0f64; 6]; mesh.nodes.len()];
    let mut count = vec![0u32; mesh.nodes.len()];
    for (e, h) in mesh.hexes.iter().enumerate() {
        if !hexes[e] {
            continue;
        }
        let nodal = hex8::extrapolate_to_nodes(&field.hex_gauss[e]);
        for a in 0..8 {
            let v = h.nodes[a];
            for c in 0..6 {
                sum[v][c] += nodal[a][c];
            }
            count[v] += 1;
        }
    }
    for v in 0..mesh.nodes.len() {
        if count[v] > 0 {
            for c in 0..6 {
                sum[v][c] /= count[v] as f64;
            }
        }
    }
    sum
}
