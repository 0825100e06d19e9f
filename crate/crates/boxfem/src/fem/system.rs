//! Assembly of the active mesh subset into a reduced symmetric system.
//!
//! Equations exist only for free dofs of active solid nodes. Fixed dofs are
//! eliminated, embedded tendon nodes are condensed onto their host-element
//! nodes through the trilinear embedding weights, and inactive elements are
//! skipped entirely. Equation numbering follows a reverse Cuthill-McKee pass
//! over the active node graph so the envelope stays tight on swept meshes.
//!
//! Every solve is verified against the element-level internal forces
//! (`sum k_e u_e`), which doubles as an independent check of the assembly.

use std::collections::BTreeMap;

use crate::fem::{hex8, skyline, skyline::Skyline, truss, FemError, Material};
use crate::mesh::Mesh;

/// Which elements participate in the current system.
#[derive(Clone, Debug)]
pub struct ActiveSet {
    pub hexes: Vec<bool>,
    pub trusses: Vec<bool>,
}

impl ActiveSet {
    pub fn none(mesh: &Mesh) -> Self {
        ActiveSet {
            hexes: vec![false; mesh.hexes.len()],
            trusses: vec![false; mesh.trusses.len()],
        }
    }

    pub fn all(mesh: &Mesh) -> Self {
        ActiveSet {
            hexes: vec![true; mesh.hexes.len()],
            trusses: vec![true; mesh.trusses.len()],
        }
    }

    /// Activates all hexes of a girder segment.
    pub fn activate_segment(&mut self, mesh: &Mesh, segment: usize) {
        for (e, h) in mesh.hexes.iter().enumerate() {
            if h.segment == segment {
                self.hexes[e] = true;
            }
        }
    }

    /// Activates all bars of a tendon group.
    pub fn activate_tendon_group(&mut self, mesh: &Mesh, group: usize) {
        for (t, tr) in mesh.trusses.iter().enumerate() {
            if tr.group == group {
                self.trusses[t] = true;
            }
        }
    }
}

/// Elastic point support on one dof.
#[derive(Clone, Copy, Debug)]
pub struct Spring {
    pub node: usize,
    pub dof: usize,
    /// Stiffness in N/m.
    pub stiffness: f64,
}

/// Kinematic boundary conditions: hard zeros and grounded springs.
#[derive(Clone, Debug, Default)]
pub struct Constraints {
    pub fixed: Vec<(usize, usize)>,
    pub springs: Vec<Spring>,
}

impl Constraints {
    pub fn fix_nodes(&mut self, nodes: &[usize], dofs: &[usize]) {
        for &n in nodes {
            for &d in dofs {
                self.fixed.push((n, d));
            }
        }
    }
}

/// Assembled, possibly factorized, reduced system.
pub struct Assembled<'a> {
    mesh: &'a Mesh,
    materials: &'a [Material],
    active: ActiveSet,
    /// Equation index per (node, dof); -1 where none exists.
    eq: Vec<[i32; 3]>,
    fixed_mask: Vec<[bool; 3]>,
    springs: Vec<Spring>,
    n_eq: usize,
    sky: Skyline,
    factored: bool,
    /// Embedding lookup: node -> index into `mesh.embeddings`.
    embed_of: Vec<i32>,
}

/// Builds equation numbering, envelope and numeric values for the active
/// subset under the given constraints.
pub fn assemble<'a>(
    mesh: &'a Mesh,
    materials: &'a [Material],
    active: &ActiveSet,
    constraints: &Constraints,
) -> Result<Assembled<'a>, FemError> {
    let n = mesh.nodes.len();
    let mut node_active = vec![false; n];
    for (e, h) in mesh.hexes.iter().enumerate() {
        if active.hexes[e] {
            for &v in &h.nodes {
                node_active[v] = true;
            }
        }
    }

    let mut fixed_mask = vec![[false; 3]; n];
    for &(node, dof) in &constraints.fixed {
        if node_active[node] {
            fixed_mask[node][dof] = true;
        }
    }
    let springs: Vec<Spring> = constraints
        .springs
        .iter()
        .filter(|s| node_active[s.node] && !fixed_mask[s.node][s.dof])
        .cloned()
        .collect();

    let mut embed_of = vec![-1i32; n];
    for (i, em) in mesh.embeddings.iter().enumerate() {
        embed_of[em.node] = i as i32;
    }

    // Support pre-check: every connected component of active hexes must touch
    // at least one constrained dof, otherwise factorization is doomed.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (e, h) in mesh.hexes.iter().enumerate() {
        if active.hexes[e] {
            let r0 = find(&mut parent, h.nodes[0]);
            for &v in &h.nodes[1..] {
                let rv = find(&mut parent, v);
                parent[rv] = r0;
            }
        }
    }
    let mut supported: BTreeMap<usize, bool> = BTreeMap::new();
    for v in 0..n {
        if node_active[v] {
            let root = find(&mut parent, v);
            let has = fixed_mask[v].iter().any(|&f| f);
            *supported.entry(root).or_insert(false) |= has;
        }
    }
    for s in &springs {
        let root = find(&mut parent, s.node);
        supported.insert(root, true);
    }
    for (&root, &ok) in &supported {
        if !ok {
            let segment = mesh
                .hexes
                .iter()
                .enumerate()
                .find(|(e, h)| active.hexes[*e] && find(&mut parent, h.nodes[0]) == root)
                .map(|(_, h)| mesh.segment_names.get(h.segment).cloned())
                .flatten()
                .unwrap_or_else(|| "<unnamed>".to_string());
            return Err(FemError::FloatingComponent {
                node: root,
                segment,
            });
        }
    }

    // Node adjacency of the active part (hosts of an embedded bar couple).
    let mut adj_pairs: Vec<(u32, u32)> = Vec::new();
    for (e, h) in mesh.hexes.iter().enumerate() {
        if !active.hexes[e] {
            continue;
        }
        for a in 0..8 {
            for b in (a + 1)..8 {
                let (x, y) = (h.nodes[a] as u32, h.nodes[b] as u32);
                adj_pairs.push((x.min(y), x.max(y)));
            }
        }
    }
    for (t, tr) in mesh.trusses.iter().enumerate() {
        if !active.trusses[t] {
            continue;
        }
        let hosts = truss_host_nodes(mesh, tr.nodes, &embed_of);
        for a in 0..hosts.len() {
            for b in (a + 1)..hosts.len() {
                let (x, y) = (hosts[a] as u32, hosts[b] as u32);
                adj_pairs.push((x.min(y), x.max(y)));
            }
        }
    }
    adj_pairs.sort_unstable();
    adj_pairs.dedup();
    // Compress to active node list for RCM.
    let mut compact = vec![u32::MAX; n];
    let mut active_nodes: Vec<usize> = Vec::new();
    for v in 0..n {
        if node_active[v] {
            compact[v] = active_nodes.len() as u32;
            active_nodes.push(v);
        }
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); active_nodes.len()];
    for &(a, b) in &adj_pairs {
        let (ca, cb) = (compact[a as usize], compact[b as usize]);
        if ca != u32::MAX && cb != u32::MAX {
            adj[ca as usize].push(cb);
            adj[cb as usize].push(ca);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let perm = skyline::reverse_cuthill_mckee(&adj);

    let mut eq = vec![[-1i32; 3]; n];
    let mut n_eq = 0usize;
    for &compact_id in &perm {
        let node = active_nodes[compact_id];
        for d in 0..3 {
            if !fixed_mask[node][d] {
                eq[node][d] = n_eq as i32;
                n_eq += 1;
            }
        }
    }

    // Envelope pass.
    let mut first_row: Vec<usize> = (0..n_eq).collect();
    let mut track = |eqs: &[i32]| {
        let mut lo = i32::MAX;
        for &e in eqs {
            if e >= 0 {
                lo = lo.min(e);
            }
        }
        if lo == i32::MAX {
            return;
        }
        for &e in eqs {
            if e >= 0 {
                let j = e as usize;
                first_row[j] = first_row[j].min(lo as usize);
            }
        }
    };
    let mut hex_eqs = [0i32; 24];
    for (e, h) in mesh.hexes.iter().enumerate() {
        if !active.hexes[e] {
            continue;
        }
        for a in 0..8 {
            for d in 0..3 {
                hex_eqs[3 * a + d] = eq[h.nodes[a]][d];
            }
        }
        track(&hex_eqs);
    }
    for (t, tr) in mesh.trusses.iter().enumerate() {
        if !active.trusses[t] {
            continue;
        }
        let hosts = truss_host_nodes(mesh, tr.nodes, &embed_of);
        let eqs: Vec<i32> = hosts
            .iter()
            .flat_map(|&v| (0..3).map(move |d| (v, d)))
            .map(|(v, d)| eq[v][d])
            .collect();
        track(&eqs);
    }

    let mut sky = Skyline::new(first_row);

    // Numeric pass.
    for (e, h) in mesh.hexes.iter().enumerate() {
        if !active.hexes[e] {
            continue;
        }
        let k = hex8::stiffness(&mesh.hex_coords(e), &materials[h.material]);
        for a in 0..8 {
            for p in 0..3 {
                let ea = eq[h.nodes[a]][p];
                if ea < 0 {
                    continue;
                }
                for b in 0..8 {
                    for q in 0..3 {
                        let eb = eq[h.nodes[b]][q];
                        if eb >= ea {
                            sky.add(ea as usize, eb as usize, k[3 * a + p][3 * b + q]);
                        }
                    }
                }
            }
        }
    }
    for (t, tr) in mesh.trusses.iter().enumerate() {
        if !active.trusses[t] {
            continue;
        }
        let (pa, pb) = mesh.truss_coords(t);
        let k6 = truss::stiffness(pa, pb, materials[tr.material].e, tr.area);
        let (cols, dense) = condensed_truss_matrix(mesh, tr.nodes, &embed_of, &eq, &k6);
        for (i, &ei) in cols.iter().enumerate() {
            for (j, &ej) in cols.iter().enumerate() {
                if ej >= ei {
                    sky.add(ei, ej, dense[i][j]);
                }
            }
        }
    }
    for s in &springs {
        let e = eq[s.node][s.dof];
        if e >= 0 {
            sky.add(e as usize, e as usize, s.stiffness);
        }
    }

    Ok(Assembled {
        mesh,
        materials,
        active: active.clone(),
        eq,
        fixed_mask,
        springs,
        n_eq,
        sky,
        factored: false,
        embed_of,
    })
}

/// Unique sorted host nodes of an embedded bar (up to 16).
fn truss_host_nodes(mesh: &Mesh, ends: [usize; 2], embed_of: &[i32]) -> Vec<usize> {
    let mut hosts = Vec::with_capacity(16);
    for &end in &ends {
        let em = &mesh.embeddings[embed_of[end] as usize];
        hosts.extend_from_slice(&mesh.hexes[em.hex].nodes);
    }
    hosts.sort_unstable();
    hosts.dedup();
    hosts
}

/// Condenses the 6x6 bar stiffness onto host equations: `K = T^T k T` where
/// `T` maps host dofs to the two embedded end dofs.
fn condensed_truss_matrix(
    mesh: &Mesh,
    ends: [usize; 2],
    embed_of: &[i32],
    eq: &[[i32; 3]],
    k6: &[[f64; 6]; 6],
) -> (Vec<usize>, Vec<[f64; 48]>) {
    // Column space: host equations in ascending order.
    let hosts = truss_host_nodes(mesh, ends, embed_of);
    let mut cols: Vec<usize> = Vec::new();
    let mut col_of = BTreeMap::new();
    for &v in &hosts {
        for d in 0..3 {
            let e = eq[v][d];
            if e >= 0 {
                col_of.insert((v, d), cols.len());
                cols.push(e as usize);
            }
        }
    }
    // T as 6 sparse rows over the columns.
    let mut t_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 6];
    for (end_idx, &end) in ends.iter().enumerate() {
        let em = &mesh.embeddings[embed_of[end] as usize];
        for (k, &host) in mesh.hexes[em.hex].nodes.iter().enumerate() {
            for d in 0..3 {
                if let Some(&c) = col_of.get(&(host, d)) {
                    t_rows[3 * end_idx + d].push((c, em.weights[k]));
                }
            }
        }
    }
    let nc = cols.len();
    let mut dense = vec![[0.0f64; 48]; nc];
    for p in 0..6 {
        for q in 0..6 {
            let kpq = k6[p][q];
            if kpq == 0.0 {
                continue;
            }
            for &(ci, wi) in &t_rows[p] {
                for &(cj, wj) in &t_rows[q] {
                    dense[ci][cj] += kpq * wi * wj;
                }
            }
        }
    }
    (cols, dense)
}

impl<'a> Assembled<'a> {
    pub fn n_equations(&self) -> usize {
        self.n_eq
    }

    /// Element participation flags this system was assembled with.
    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn envelope_len(&self) -> usize {
        self.sky.envelope_len()
    }

    /// True where a (node, dof) is fixed in the current system.
    pub fn is_fixed(&self, node: usize, dof: usize) -> bool {
        self.fixed_mask[node][dof]
    }

    /// Factorizes once; translates a pivot failure into mesh vocabulary.
    pub fn factorize(&mut self) -> Result<(), FemError> {
        if self.factored {
            return Ok(());
        }
        self.sky.factorize().map_err(|col| {
            let (node, dof) = self
                .eq
                .iter()
                .enumerate()
                .flat_map(|(v, dofs)| (0..3).map(move |d| (v, d, dofs[d])))
                .find(|&(_, _, e)| e == col as i32)
                .map(|(v, d, _)| (v, d))
                .unwrap_or((0, 0));
            let segment = self
                .mesh
                .hexes
                .iter()
                .enumerate()
                .find(|(e, h)| self.active.hexes[*e] && h.nodes.contains(&node))
                .and_then(|(_, h)| self.mesh.segment_names.get(h.segment).cloned())
                .unwrap_or_else(|| "<unnamed>".to_string());
            FemError::NotPositiveDefinite {
                eq: col,
                node,
                dof,
                segment,
            }
        })?;
        self.factored = true;
        Ok(())
    }

    /// Moves loads on embedded nodes onto their hosts. Loads on inactive
    /// plain nodes are an error (they would silently vanish).
    pub fn effective_load(&self, f_full: &[f64]) -> Result<Vec<f64>, FemError> {
        let n = self.mesh.nodes.len();
        assert_eq!(f_full.len(), 3 * n);
        let mut f = f_full.to_vec();
        for em in &self.mesh.embeddings {
            for d in 0..3 {
                let v = f[3 * em.node + d];
                if v != 0.0 {
                    for (k, &host) in self.mesh.hexes[em.hex].nodes.iter().enumerate() {
                        f[3 * host + d] += em.weights[k] * v;
                    }
                    f[3 * em.node + d] = 0.0;
                }
            }
        }
        for v in 0..n {
            let has_eq = (0..3).any(|d| self.eq[v][d] >= 0);
            let is_fixed = self.fixed_mask[v].iter().any(|&b| b);
            let is_embedded = self.embed_of[v] >= 0;
            if !has_eq && !is_fixed && !is_embedded {
                for d in 0..3 {
                    if f[3 * v + d] != 0.0 {
                        return Err(FemError::LoadOutsideActivePart { node: v });
                    }
                }
            }
        }
        Ok(f)
    }

    /// Solves for a full-space displacement vector from a full-space load.
    ///
    /// The load must already be effective (see [`Self::effective_load`]).
    /// Embedded node displacements are reconstructed from their hosts. The
    /// element-level equilibrium residual is checked and must stay below
    /// 1e-8 relative; a couple of refinement backsolves recover the digits
    /// that a single LDL^T pass loses on slender cantilever systems.
    pub fn solve(&mut self, f_eff: &[f64]) -> Result<Vec<f64>, FemError> {
        self.factorize()?;
        let mut x = vec![0.0; self.n_eq];
        for v in 0..self.mesh.nodes.len() {
            for d in 0..3 {
                let e = self.eq[v][d];
                if e >= 0 {
                    x[e as usize] = f_eff[3 * v + d];
                }
            }
        }
        self.sky.solve_in_place(&mut x);
        let mut u = self.expand(&x);
        let mut residual = 0.0;
        for pass in 0..3 {
            let fint = self.elastic_nodal_forces(&u);
            let mut r_eq = vec![0.0; self.n_eq];
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for v in 0..self.mesh.nodes.len() {
                for d in 0..3 {
                    let e = self.eq[v][d];
                    if e >= 0 {
                        let r = f_eff[3 * v + d] - fint[3 * v + d];
                        r_eq[e as usize] = r;
                        num += r * r;
                        den += f_eff[3 * v + d] * f_eff[3 * v + d];
                    }
                }
            }
            residual = num.sqrt() / den.sqrt().max(1e-30);
            if den == 0.0 || residual <= 1e-8 {
                return Ok(u);
            }
            if pass == 2 {
                break;
            }
            self.sky.solve_in_place(&mut r_eq);
            for (xe, de) in x.iter_mut().zip(&r_eq) {
                *xe += de;
            }
            u = self.expand(&x);
        }
        Err(FemError::ResidualBlowup { residual })
    }

    /// Expands an equation-space vector to the full node space, following
    /// embeddings for tendon nodes.
    pub fn expand(&self, x_eq: &[f64]) -> Vec<f64> {
        let n = self.mesh.nodes.len();
        let mut u = vec![0.0; 3 * n];
        for v in 0..n {
            for d in 0..3 {
                let e = self.eq[v][d];
                if e >= 0 {
                    u[3 * v + d] = x_eq[e as usize];
                }
            }
        }
        for em in &self.mesh.embeddings {
            let mut val = [0.0; 3];
            for (k, &host) in self.mesh.hexes[em.hex].nodes.iter().enumerate() {
                for d in 0..3 {
                    val[d] += em.weights[k] * u[3 * host + d];
                }
            }
            for d in 0..3 {
                u[3 * em.node + d] = val[d];
            }
        }
        u
    }

    /// Element-level internal forces `sum k_e u_e` plus spring forces,
    /// scattered over the full node space (embedded bar forces land on the
    /// hosts). Independent of the assembled matrix.
    pub fn elastic_nodal_forces(&self, u_full: &[f64]) -> Vec<f64> {
        let mesh = self.mesh;
        let mut f = vec![0.0; 3 * mesh.nodes.len()];
        for (e, h) in mesh.hexes.iter().enumerate() {
            if !self.active.hexes[e] {
                continue;
            }
            let coords = mesh.hex_coords(e);
            let mat = &self.materials[h.material];
            let mut ue = [0.0; 24];
            for a in 0..8 {
                for d in 0..3 {
                    ue[3 * a + d] = u_full[3 * h.nodes[a] + d];
                }
            }
            let gauss = hex8::gauss_stresses(&coords, &ue, mat);
            let fe = hex8::internal_force(&coords, &gauss);
            for a in 0..8 {
                for d in 0..3 {
                    f[3 * h.nodes[a] + d] += fe[3 * a + d];
                }
            }
        }
        for (t, tr) in mesh.trusses.iter().enumerate() {
            if !self.active.trusses[t] {
                continue;
            }
            let (pa, pb) = mesh.truss_coords(t);
            let k6 = truss::stiffness(pa, pb, self.materials[tr.material].e, tr.area);
            let mut ue = [0.0; 6];
            for (i, &end) in tr.nodes.iter().enumerate() {
                for d in 0..3 {
                    ue[3 * i + d] = u_full[3 * end + d];
                }
            }
            let mut fe = [0.0; 6];
            for p in 0..6 {
                for q in 0..6 {
                    fe[p] += k6[p][q] * ue[q];
                }
            }
            // Distribute the bar end forces onto the hosts.
            for (i, &end) in tr.nodes.iter().enumerate() {
                let em = &mesh.embeddings[self.embed_of[end] as usize];
                for (k, &host) in mesh.hexes[em.hex].nodes.iter().enumerate() {
                    for d in 0..3 {
                        f[3 * host + d] += em.weights[k] * fe[3 * i + d];
                    }
                }
            }
        }
        for s in &self.springs {
            f[3 * s.node + s.dof] += s.stiffness * u_full[3 * s.node + s.dof];
        }
        f
    }

    /// Support reactions `f_int - f_applied` on all fixed dofs.
    pub fn reactions(&self, u_full: &[f64], f_eff: &[f64]) -> Vec<(usize, usize, f64)> {
        let fint = self.elastic_nodal_forces(u_full);
        let mut out = Vec::new();
        for v in 0..self.mesh.nodes.len() {
            for d in 0..3 {
                if self.fixed_mask[v][d] {
                    out.push((v, d, fint[3 * v + d] - f_eff[3 * v + d]));
                }
            }
        }
        out
    }

    /// Iterative fallback on the unfactored matrix (Jacobi PCG).
    pub fn solve_cg(&self, f_eff: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, FemError> {
        assert!(!self.factored, "matrix already factorized; use solve()");
        let mut rhs = vec![0.0; self.n_eq];
        for v in 0..self.mesh.nodes.len() {
            for d in 0..3 {
                let e = self.eq[v][d];
                if e >= 0 {
                    rhs[e as usize] = f_eff[3 * v + d];
                }
            }
        }
        let (x, _res) = skyline::pcg_solve(&self.sky, &rhs, tol, max_iter)?;
        Ok(self.expand(&x))
    }
}
