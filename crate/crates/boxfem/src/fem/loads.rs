//! Nodal load vectors over the full dof space.
//!
//! All builders accumulate into a caller-owned vector of length `3 * n_nodes`
//! so that one stage can stack self-weight, surface pressure and tendon
//! cooling before reduction.

use crate::fem::{hex8, truss, FemError, Material};
use crate::mesh::{Face, Mesh};

/// Consistent self-weight of the listed hexes, acting along -y.
pub fn add_gravity(
    mesh: &Mesh,
    materials: &[Material],
    hexes: impl IntoIterator<Item = usize>,
    g: f64,
    f: &mut [f64],
) {
    for e in hexes {
        let h = &mesh.hexes[e];
        let fe = hex8::gravity_load(&mesh.hex_coords(e), materials[h.material].rho, g);
        for a in 0..8 {
            for d in 0..3 {
                f[3 * h.nodes[a] + d] += fe[3 * a + d];
            }
        }
    }
}

/// Pressure (N/m^2, positive pushing against the outward normal) on a set of
/// element faces.
pub fn add_face_pressure(mesh: &Mesh, faces: &[Face], pressure: f64, f: &mut [f64]) {
    for face in faces {
        let h = &mesh.hexes[face.hex];
        let fe = hex8::face_pressure_load(&mesh.hex_coords(face.hex), face.side as usize, pressure);
        for a in 0..8 {
            for d in 0..3 {
                f[3 * h.nodes[a] + d] += fe[3 * a + d];
            }
        }
    }
}

/// Equivalent cooling loads for the listed bars: each bar pulls its ends
/// together with `E A alpha dT`, expressed on the embedded end nodes.
pub fn add_tendon_cooling(
    mesh: &Mesh,
    materials: &[Material],
    trusses: impl IntoIterator<Item = usize>,
    dt: f64,
    f: &mut [f64],
) {
    for t in trusses {
        let tr = &mesh.trusses[t];
        let (pa, pb) = mesh.truss_coords(t);
        let mat = &materials[tr.material];
        let fe = truss::thermal_load(pa, pb, mat.e, tr.area, mat.alpha, dt);
        for (i, &end) in tr.nodes.iter().enumerate() {
            for d in 0..3 {
                f[3 * end + d] += fe[3 * i + d];
            }
        }
    }
}

/// Vertical point load at plan position `(x, z)` on one of the given upward
/// faces, distributed bilinearly to the face corners.
///
/// Returns the face that received the load. Fails when no face footprint
/// contains the point.
pub fn add_surface_point_load(
    mesh: &Mesh,
    faces: &[Face],
    x: f64,
    z: f64,
    fy: f64,
    f: &mut [f64],
) -> Result<Face, FemError> {
    let mut best: Option<(Face, [usize; 4], [f64; 4])> = None;
    for face in faces {
        let h = &mesh.hexes[face.hex];
        let local = hex8::FACE_NODES[face.side as usize];
        let corners = [
            h.nodes[local[0]],
            h.nodes[local[1]],
            h.nodes[local[2]],
            h.nodes[local[3]],
        ];
        let px: Vec<f64> = corners.iter().map(|&v| mesh.nodes[v][0]).collect();
        let pz: Vec<f64> = corners.iter().map(|&v| mesh.nodes[v][2]).collect();
        if let Some(w) = bilinear_weights(&px, &pz, x, z) {
            let replace = match &best {
                None => true,
                Some((prev, _, _)) => {
                    (face.hex, face.side) < (prev.hex, prev.side)
                }
            };
            if replace {
                best = Some((*face, corners, w));
            }
        }
    }
    let (face, corners, w) = best.ok_or(FemError::PointOffSurface { x, z })?;
    for i in 0..4 {
        f[3 * corners[i] + 1] += w[i] * fy;
    }
    Ok(face)
}

/// Corner weights of [`inverse_bilinear`].
fn bilinear_weights(px: &[f64], pz: &[f64], x: f64, z: f64) -> Option<[f64; 4]> {
    inverse_bilinear(px, pz, x, z).map(|(_, _, w)| w)
}

/// Inverse bilinear map on a quadrilateral with CCW corners `(pu, pv)`.
///
/// Returns natural coordinates and corner weights when the point lies inside
/// (small slack on the edges), None otherwise.
pub(crate) fn inverse_bilinear(pu: &[f64], pv: &[f64], u: f64, v: f64) -> Option<(f64, f64, [f64; 4])> {
    let (px, pz, x, z) = (pu, pv, u, v);
    // Quick reject on the bounding box.
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_z, mut hi_z) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..4 {
        lo_x = lo_x.min(px[i]);
        hi_x = hi_x.max(px[i]);
        lo_z = lo_z.min(pz[i]);
        hi_z = hi_z.max(pz[i]);
    }
    let pad = 1e-9 * (hi_x - lo_x + hi_z - lo_z).max(1e-3);
    if x < lo_x - pad || x > hi_x + pad || z < lo_z - pad || z > hi_z + pad {
        return None;
    }
    // Newton on (xi, eta) in [-1, 1]^2.
    let shape = |xi: f64, eta: f64| {
        [
            0.25 * (1.0 - xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 + eta),
            0.25 * (1.0 - xi) * (1.0 + eta),
        ]
    };
    let mut xi = 0.0f64;
    let mut eta = 0.0f64;
    for _ in 0..40 {
        let n = shape(xi, eta);
        let fx: f64 = (0..4).map(|i| n[i] * px[i]).sum::<f64>() - x;
        let fz: f64 = (0..4).map(|i| n[i] * pz[i]).sum::<f64>() - z;
        let dn_dxi = [
            -0.25 * (1.0 - eta),
            0.25 * (1.0 - eta),
            0.25 * (1.0 + eta),
            -0.25 * (1.0 + eta),
        ];
        let dn_deta = [
            -0.25 * (1.0 - xi),
            -0.25 * (1.0 + xi),
            0.25 * (1.0 + xi),
            0.25 * (1.0 - xi),
        ];
        let j00: f64 = (0..4).map(|i| dn_dxi[i] * px[i]).sum();
        let j01: f64 = (0..4).map(|i| dn_deta[i] * px[i]).sum();
        let j10: f64 = (0..4).map(|i| dn_dxi[i] * pz[i]).sum();
        let j11: f64 = (0..4).map(|i| dn_deta[i] * pz[i]).sum();
        let det = j00 * j11 - j01 * j10;
        if det.abs() < 1e-300 {
            return None;
        }
        let dxi = (j11 * fx - j01 * fz) / det;
        let deta = (-j10 * fx + j00 * fz) / det;
        xi -= dxi;
        eta -= deta;
        if dxi.abs() + deta.abs() < 1e-13 {
            break;
        }
        xi = xi.clamp(-2.0, 2.0);
        eta = eta.clamp(-2.0, 2.0);
    }
    let slack = 1e-9;
    if xi.abs() > 1.0 + slack || eta.abs() > 1.0 + slack {
        return None;
    }
    let xi = xi.clamp(-1.0, 1.0);
    let eta = eta.clamp(-1.0, 1.0);
    let n = shape(xi, eta);
    // Verify the map actually landed on the target (guards warped quads).
    let rx: f64 = (0..4).map(|i| n[i] * px[i]).sum::<f64>() - x;
    let rz: f64 = (0..4).map(|i| n[i] * pz[i]).sum::<f64>() - z;
    let scale = (hi_x - lo_x).max(hi_z - lo_z).max(1e-3);
    if rx.hypot(rz) > 1e-8 * scale {
        return None;
    }
    Some((xi, eta, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::sweep_template;

    fn slab() -> Mesh {
        sweep_template(
            6,
            &[[0, 1, 4, 3], [1, 2, 5, 4]],
            &[0.0, 0.5, 1.0],
            |p, _z| {
                let col = (p % 3) as f64;
                let row = (p / 3) as f64;
                [col * 0.4, row * 0.2]
            },
            |_q, _s| Some((0, 0)),
        )
        .unwrap()
        .mesh
    }

    fn mat() -> Material {
        Material {
            e: 3.0e10,
            nu: 0.2,
            rho: 2400.0,
            alpha: 1e-5,
        }
    }

    #[test]
    fn gravity_total_matches_weight() {
        let mesh = slab();
        let m = mat();
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        add_gravity(&mesh, &[m], 0..mesh.hexes.len(), 9.8, &mut f);
        let fy: f64 = (0..mesh.nodes.len()).map(|v| f[3 * v + 1]).sum();
        let expect = -2400.0 * 9.8 * mesh.total_volume();
        assert!((fy - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn top_pressure_resultant_is_area_times_p() {
        let mesh = slab();
        // Face side 3 is eta = +1, the top of each hex.
        let faces: Vec<Face> = (0..mesh.hexes.len())
            .map(|hex| Face { hex, side: 3 })
            .collect();
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        add_face_pressure(&mesh, &faces, 1000.0, &mut f);
        let fy: f64 = (0..mesh.nodes.len()).map(|v| f[3 * v + 1]).sum();
        // Plan area 0.8 x 1.0, pressure pushes down against +y normal.
        assert!((fy + 1000.0 * 0.8).abs() < 1e-9 * 800.0, "fy = {fy}");
        let fx: f64 = (0..mesh.nodes.len()).map(|v| f[3 * v]).sum();
        assert!(fx.abs() < 1e-9);
    }

    #[test]
    fn point_load_lands_on_containing_face_with_unit_weights() {
        let mesh = slab();
        let faces: Vec<Face> = (0..mesh.hexes.len())
            .map(|hex| Face { hex, side: 3 })
            .collect();
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        let face = add_surface_point_load(&mesh, &faces, 0.6, 0.75, -5000.0, &mut f).unwrap();
        // x = 0.6 lies in the second column of quads, z = 0.75 in the second slab.
        assert_eq!(face.hex, 3);
        let total: f64 = (0..mesh.nodes.len()).map(|v| f[3 * v + 1]).sum();
        assert!((total + 5000.0).abs() < 1e-9);
        // A corner hit concentrates everything on one node.
        let mut f2 = vec![0.0; 3 * mesh.nodes.len()];
        add_surface_point_load(&mesh, &faces, 0.4, 0.5, -9.0, &mut f2).unwrap();
        let nonzero: Vec<(usize, f64)> = (0..mesh.nodes.len())
            .map(|v| (v, f2[3 * v + 1]))
            .filter(|(_, w)| w.abs() > 1e-12)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0].1 + 9.0).abs() < 1e-12);
    }

    #[test]
    fn point_off_surface_is_an_error() {
        let mesh = slab();
        let faces: Vec<Face> = (0..mesh.hexes.len())
            .map(|hex| Face { hex, side: 3 })
            .collect();
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        assert!(matches!(
            add_surface_point_load(&mesh, &faces, 2.5, 0.5, -1.0, &mut f),
            Err(FemError::PointOffSurface { .. })
        ));
    }

    #[test]
    fn cooling_load_is_self_equilibrated_and_axial() {
        let mut mesh = slab();
        crate::mesh::embed_tendons(
            &mut mesh,
            &[vec![[0.2, 0.1, 0.1], [0.2, 0.1, 0.9]]],
            0.001,
            0,
            "g",
            10.0,
        )
        .unwrap();
        let m = Material {
            e: 1.95e11,
            nu: 0.3,
            rho: 7850.0,
            alpha: 2e-5,
        };
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        add_tendon_cooling(&mesh, &[m], 0..mesh.trusses.len(), -370.0, &mut f);
        for d in 0..3 {
            let sum: f64 = (0..mesh.nodes.len()).map(|v| f[3 * v + d]).sum();
            assert!(sum.abs() < 1e-6, "dof {d} unbalanced: {sum}");
        }
        // End nodes pulled toward each other along z.
        let a = mesh.trusses[0].nodes[0];
        assert!(f[3 * a + 2] > 0.0);
    }
}
