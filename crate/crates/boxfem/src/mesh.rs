//! Mesh storage, structured sweeping and validation.
//!
//! All production meshes here are swept: a fixed 2D template (points and
//! quads) is extruded over a station list, with the point positions free to
//! morph per station. That keeps node numbering deterministic (lexicographic
//! by station, then template point) and guarantees conforming hexes no
//! matter how the cross-section varies along the axis.
//!
//! Tendons are truss chains on their own nodes, glued to the solid purely
//! through [`Embedding`] weights; embedded nodes never carry equations of
//! their own.

pub mod girder;

use std::collections::BTreeMap;
use thiserror::Error;

use crate::fem::hex8;

/// Eight-node solid element.
#[derive(Clone, Copy, Debug)]
pub struct Hex {
    pub nodes: [usize; 8],
    pub material: usize,
    pub segment: usize,
}

/// Two-node tendon bar.
#[derive(Clone, Copy, Debug)]
pub struct Truss {
    pub nodes: [usize; 2],
    /// Cross-section area in m^2.
    pub area: f64,
    pub material: usize,
    /// Tendon group, the unit of activation during staging.
    pub group: usize,
}

/// One local face of a hex (see [`hex8::FACE_NODES`] for the numbering).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub hex: usize,
    pub side: u8,
}

/// Ties an embedded node to a host hex: `u_node = sum w_i u_host_i`.
#[derive(Clone, Copy, Debug)]
pub struct Embedding {
    pub node: usize,
    pub hex: usize,
    pub weights: [f64; 8],
}

/// Complete mesh with named sets and embedded tendon constraints.
#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 3]>,
    pub hexes: Vec<Hex>,
    pub trusses: Vec<Truss>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub face_sets: BTreeMap<String, Vec<Face>>,
    pub embeddings: Vec<Embedding>,
    /// Segment id -> name, the staging vocabulary.
    pub segment_names: Vec<String>,
    /// Tendon group id -> name.
    pub tendon_group_names: Vec<String>,
}

impl Mesh {
    pub fn hex_coords(&self, e: usize) -> [[f64; 3]; 8] {
        let h = &self.hexes[e];
        let mut c = [[0.0; 3]; 8];
        for (k, &n) in h.nodes.iter().enumerate() {
            c[k] = self.nodes[n];
        }
        c
    }

    pub fn truss_coords(&self, t: usize) -> ([f64; 3], [f64; 3]) {
        let tr = &self.trusses[t];
        (self.nodes[tr.nodes[0]], self.nodes[tr.nodes[1]])
    }

    /// Id of a named segment.
    pub fn segment_id(&self, name: &str) -> Option<usize> {
        self.segment_names.iter().position(|n| n == name)
    }

    /// Id of a named tendon group.
    pub fn tendon_group_id(&self, name: &str) -> Option<usize> {
        self.tendon_group_names.iter().position(|n| n == name)
    }

    /// Total solid volume from element quadrature.
    pub fn total_volume(&self) -> f64 {
        (0..self.hexes.len())
            .map(|e| hex8::volume(&self.hex_coords(e)))
            .sum()
    }
}

/// Mesh construction and validation failures.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("hex {hex} has inverted geometry (min det J = {det:.3e})")]
    InvertedElement { hex: usize, det: f64 },
    #[error("nodes {a} and {b} coincide within {tol} m")]
    DuplicateNodes { a: usize, b: usize, tol: f64 },
    #[error("hex {hex} references node {node} out of range {n_nodes}")]
    NodeOutOfRange { hex: usize, node: usize, n_nodes: usize },
    #[error("embedding of node {node} violates partition of unity (sum = {sum})")]
    BadEmbeddingWeights { node: usize, sum: f64 },
    #[error("embedded node {node} lies {dist:.3e} m away from its host hex {hex}")]
    EmbeddingMisplaced { node: usize, hex: usize, dist: f64 },
    #[error("truss {truss} node {node} has no embedding constraint")]
    UnembeddedTrussNode { truss: usize, node: usize },
    #[error("face set '{set}' references hex {hex} out of range")]
    BadFaceSet { set: String, hex: usize },
    #[error("tendon point ({x}, {y}, {z}) is outside every solid element")]
    PointOutsideSolid { x: f64, y: f64, z: f64 },
    #[error("mesh resolution field {name} = {value} is below the minimum {minimum}")]
    ResolutionTooCoarse {
        name: &'static str,
        value: usize,
        minimum: usize,
    },
    #[error("station list must be strictly increasing at index {index}")]
    StationsNotIncreasing { index: usize },
}

/// Health summary produced by [`validate_mesh`].
#[derive(Clone, Copy, Debug)]
pub struct MeshReport {
    pub n_nodes: usize,
    pub n_hexes: usize,
    pub n_trusses: usize,
    pub min_det_j: f64,
    pub total_volume: f64,
}

/// Full structural check: index ranges, positive Jacobians, duplicate solid
/// nodes, embedding partition of unity and placement, face-set sanity.
pub fn validate_mesh(mesh: &Mesh) -> Result<MeshReport, MeshError> {
    let n_nodes = mesh.nodes.len();
    for (e, h) in mesh.hexes.iter().enumerate() {
        for &n in &h.nodes {
            if n >= n_nodes {
                return Err(MeshError::NodeOutOfRange {
                    hex: e,
                    node: n,
                    n_nodes,
                });
            }
        }
    }
    let mut min_det = f64::INFINITY;
    let mut volume = 0.0;
    for e in 0..mesh.hexes.len() {
        let c = mesh.hex_coords(e);
        let det = hex8::min_det_j(&c);
        if det <= 0.0 {
            return Err(MeshError::InvertedElement { hex: e, det });
        }
        min_det = min_det.min(det);
        volume += hex8::volume(&c);
    }

    // Duplicate detection among solid (hex-referenced) nodes only; embedded
    // tendon nodes legitimately float anywhere, including on solid nodes.
    let tol = 1e-9;
    let mut solid: Vec<usize> = Vec::new();
    let mut is_solid = vec![false; n_nodes];
    for h in &mesh.hexes {
        for &n in &h.nodes {
            if !is_solid[n] {
                is_solid[n] = true;
                solid.push(n);
            }
        }
    }
    let key = |p: [f64; 3]| -> (i64, i64, i64) {
        (
            (p[0] / tol / 16.0).round() as i64,
            (p[1] / tol / 16.0).round() as i64,
            (p[2] / tol / 16.0).round() as i64,
        )
    };
    let mut buckets: std::collections::HashMap<(i64, i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for &n in &solid {
        buckets.entry(key(mesh.nodes[n])).or_default().push(n);
    }
    for (&(kx, ky, kz), nodes) in &buckets {
        for &a in nodes {
            // Also look into the neighbouring buckets to keep the check
            // independent of where the quantization boundaries fall.
            for dx in -1..=1i64 {
                for dy in -1..=1i64 {
                    for dz in -1..=1i64 {
                        let Some(others) = buckets.get(&(kx + dx, ky + dy, kz + dz)) else {
                            continue;
                        };
                        for &b in others {
                            if b <= a {
                                continue;
                            }
                            let pa = mesh.nodes[a];
                            let pb = mesh.nodes[b];
                            let d2 = (pa[0] - pb[0]).powi(2)
                                + (pa[1] - pb[1]).powi(2)
                                + (pa[2] - pb[2]).powi(2);
                            if d2 < tol * tol {
                                return Err(MeshError::DuplicateNodes { a, b, tol });
                            }
                        }
                    }
                }
            }
        }
    }

    let mut embedded = vec![false; n_nodes];
    for em in &mesh.embeddings {
        let sum: f64 = em.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(MeshError::BadEmbeddingWeights {
                node: em.node,
                sum,
            });
        }
        let c = mesh.hex_coords(em.hex);
        let mut p = [0.0; 3];
        for k in 0..8 {
            for r in 0..3 {
                p[r] += em.weights[k] * c[k][r];
            }
        }
        let q = mesh.nodes[em.node];
        let dist =
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        if dist > 1e-8 * (1.0 + q[0].abs() + q[1].abs() + q[2].abs()) {
            return Err(MeshError::EmbeddingMisplaced {
                node: em.node,
                hex: em.hex,
                dist,
            });
        }
        embedded[em.node] = true;
    }
    for (t, tr) in mesh.trusses.iter().enumerate() {
        for &n in &tr.nodes {
            if !embedded[n] {
                return Err(MeshError::UnembeddedTrussNode { truss: t, node: n });
            }
        }
    }
    for (name, faces) in &mesh.face_sets {
        for f in faces {
            if f.hex >= mesh.hexes.len() || f.side > 5 {
                return Err(MeshError::BadFaceSet {
                    set: name.clone(),
                    hex: f.hex,
                });
            }
        }
    }

    Ok(MeshReport {
        n_nodes,
        n_hexes: mesh.hexes.len(),
        n_trusses: mesh.trusses.len(),
        min_det_j: if mesh.hexes.is_empty() { 0.0 } else { min_det },
        total_volume: volume,
    })
}

/// Result of [`sweep_template`]: the mesh plus lookup tables back into the
/// template structure.
pub struct SweptMesh {
    pub mesh: Mesh,
    /// `node_of[station][point]` when that grid position carries a node.
    pub node_of: Vec<Vec<Option<usize>>>,
    /// `hex_of[slab][quad]` when that cell is active.
    pub hex_of: Vec<Vec<Option<usize>>>,
}

/// Extrudes a 2D quad template along `stations`.
///
/// `position(point, z)` gives the template point location at a station
/// (morphing allowed), `cell(quad, slab)` decides whether a cell exists and
/// with which `(material, segment)`. Quad corners are counter-clockwise in
/// the `(x, y)` plane; hex nodes 0..3 sit on the lower station.
pub fn sweep_template(
    n_points: usize,
    quads: &[[usize; 4]],
    stations: &[f64],
    position: impl Fn(usize, f64) -> [f64; 2],
    cell: impl Fn(usize, usize) -> Option<(usize, usize)>,
) -> Result<SweptMesh, MeshError> {
    for w in 1..stations.len() {
        if stations[w] <= stations[w - 1] {
            return Err(MeshError::StationsNotIncreasing { index: w });
        }
    }
    let n_slabs = stations.len().saturating_sub(1);
    let mut used = vec![vec![false; n_points]; stations.len()];
    let mut active: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; quads.len()]; n_slabs];
    for slab in 0..n_slabs {
        for (q, corners) in quads.iter().enumerate() {
            if let Some(ms) = cell(q, slab) {
                active[slab][q] = Some(ms);
                for &c in corners {
                    used[slab][c] = true;
                    used[slab + 1][c] = true;
                }
            }
        }
    }
    let mut node_of = vec![vec![None; n_points]; stations.len()];
    let mut mesh = Mesh::default();
    for (s, &z) in stations.iter().enumerate() {
        for p in 0..n_points {
            if used[s][p] {
                let xy = position(p, z);
                node_of[s][p] = Some(mesh.nodes.len());
                mesh.nodes.push([xy[0], xy[1], z]);
            }
        }
    }
    let mut hex_of = vec![vec![None; quads.len()]; n_slabs];
    for slab in 0..n_slabs {
        for (q, corners) in quads.iter().enumerate() {
            let Some((material, segment)) = active[slab][q] else {
                continue;
            };
            let lo = |c: usize| node_of[slab][corners[c]].unwrap();
            let hi = |c: usize| node_of[slab + 1][corners[c]].unwrap();
            hex_of[slab][q] = Some(mesh.hexes.len());
            mesh.hexes.push(Hex {
                nodes: [lo(0), lo(1), lo(2), lo(3), hi(0), hi(1), hi(2), hi(3)],
                material,
                segment,
            });
        }
    }
    Ok(SweptMesh {
        mesh,
        node_of,
        hex_of,
    })
}

/// Appends `other` onto `base`, welding nodes that coincide within `tol`.
///
/// Segment and tendon-group ids of `other` are renumbered behind the ones of
/// `base`; named sets are merged (same-name sets concatenate).
pub fn merge_meshes(base: &mut Mesh, other: Mesh, tol: f64) {
    let scale = 1.0 / tol;
    let key = |p: [f64; 3]| -> (i64, i64, i64) {
        (
            (p[0] * scale).round() as i64,
            (p[1] * scale).round() as i64,
            (p[2] * scale).round() as i64,
        )
    };
    let mut lookup: std::collections::HashMap<(i64, i64, i64), usize> =
        std::collections::HashMap::new();
    for (n, &p) in base.nodes.iter().enumerate() {
        lookup.insert(key(p), n);
    }
    let mut remap = Vec::with_capacity(other.nodes.len());
    for &p in &other.nodes {
        if let Some(&n) = lookup.get(&key(p)) {
            let q = base.nodes[n];
            let d2 =
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if d2 <= tol * tol {
                remap.push(n);
                continue;
            }
        }
        let id = base.nodes.len();
        base.nodes.push(p);
        lookup.insert(key(p), id);
        remap.push(id);
    }
    let seg_off = base.segment_names.len();
    let grp_off = base.tendon_group_names.len();
    base.segment_names.extend(other.segment_names);
    base.tendon_group_names.extend(other.tendon_group_names);
    let hex_off = base.hexes.len();
    for h in other.hexes {
        base.hexes.push(Hex {
            nodes: h.nodes.map(|n| remap[n]),
            material: h.material,
            segment: h.segment + seg_off,
        });
    }
    for t in other.trusses {
        base.trusses.push(Truss {
            nodes: t.nodes.map(|n| remap[n]),
            area: t.area,
            material: t.material,
            group: t.group + grp_off,
        });
    }
    for em in other.embeddings {
        base.embeddings.push(Embedding {
            node: remap[em.node],
            hex: em.hex + hex_off,
            weights: em.weights,
        });
    }
    for (name, nodes) in other.node_sets {
        let entry = base.node_sets.entry(name).or_default();
        entry.extend(nodes.into_iter().map(|n| remap[n]));
    }
    for (name, faces) in other.face_sets {
        let entry = base.face_sets.entry(name).or_default();
        entry.extend(faces.into_iter().map(|f| Face {
            hex: f.hex + hex_off,
            side: f.side,
        }));
    }
}

/// Builds tendon truss chains along polylines and embeds every tendon node
/// into the solid it passes through.
///
/// Each polyline is subdivided into elements of roughly `target_len`. Host
/// elements are searched deterministically (lowest hex id wins).
pub fn embed_tendons(
    mesh: &mut Mesh,
    polylines: &[Vec<[f64; 3]>],
    area: f64,
    material: usize,
    group_name: &str,
    target_len: f64,
) -> Result<(), MeshError> {
    let group = mesh.tendon_group_names.len();
    mesh.tendon_group_names.push(group_name.to_string());
    // Coarse spatial index over hex bounding boxes, bucketed by z.
    let z_cell = target_len.max(0.5);
    let mut index: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for e in 0..mesh.hexes.len() {
        let c = mesh.hex_coords(e);
        let z_lo = c.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        let z_hi = c.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        let k_lo = (z_lo / z_cell).floor() as i64;
        let k_hi = (z_hi / z_cell).floor() as i64;
        for k in k_lo..=k_hi {
            index.entry(k).or_default().push(e);
        }
    }
    let locate = |p: [f64; 3]| -> Option<(usize, [f64; 8])> {
        let k = (p[2] / z_cell).floor() as i64;
        let mut best: Option<(usize, [f64; 8])> = None;
        for kk in [k, k - 1, k + 1] {
            let Some(cands) = index.get(&kk) else { continue };
            for &e in cands {
                if best.is_some_and(|(b, _)| b <= e) {
                    continue;
                }
                let c = mesh.hex_coords(e);
                if p[0] < c.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min) - 1e-9
                    || p[0] > c.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max) + 1e-9
                    || p[1] < c.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min) - 1e-9
                    || p[1] > c.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max) + 1e-9
                    || p[2] < c.iter().map(|q| q[2]).fold(f64::INFINITY, f64::min) - 1e-9
                    || p[2] > c.iter().map(|q| q[2]).fold(f64::NEG_INFINITY, f64::max) + 1e-9
                {
                    continue;
                }
                if let Some((_, w)) = hex8::invert_trilinear(&c, p, 1e-6) {
                    best = Some((e, w));
                }
            }
        }
        best
    };
    // Locate every subdivision point first (immutable phase), then append
    // nodes, embeddings and bars.
    let mut chains: Vec<Vec<([f64; 3], usize, [f64; 8])>> = Vec::new();
    for line in polylines {
        let mut chain = Vec::new();
        for w in 0..line.len() {
            let seg_points: Vec<[f64; 3]> = if w == 0 {
                vec![line[0]]
            } else {
                let a = line[w - 1];
                let b = line[w];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2))
                    .sqrt();
                let n = (len / target_len).ceil().max(1.0) as usize;
                (1..=n)
                    .map(|k| {
                        let f = k as f64 / n as f64;
                        [
                            a[0] + f * (b[0] - a[0]),
                            a[1] + f * (b[1] - a[1]),
                            a[2] + f * (b[2] - a[2]),
                        ]
                    })
                    .collect()
            };
            for p in seg_points {
                let Some((hex, weights)) = locate(p) else {
                    return Err(MeshError::PointOutsideSolid {
                        x: p[0],
                        y: p[1],
                        z: p[2],
                    });
                };
                chain.push((p, hex, weights));
            }
        }
        chains.push(chain);
    }
    for chain in chains {
        let mut prev_node: Option<usize> = None;
        for (p, hex, weights) in chain {
            let node = mesh.nodes.len();
            mesh.nodes.push(p);
            mesh.embeddings.push(Embedding { node, hex, weights });
            if let Some(prev) = prev_node {
                mesh.trusses.push(Truss {
                    nodes: [prev, node],
                    area,
                    material,
                    group,
                });
            }
            prev_node = Some(node);
        }
    }
    Ok(())
}
