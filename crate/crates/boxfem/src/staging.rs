//! Staged construction: activation history, temporary supports, load buckets.
//!
//! A schedule is a list of [`Stage`]s. Each stage may activate cast segments
//! and tendon groups, add or release supports, and apply loads; the solver
//! then computes one linear increment on the structure as it exists at that
//! point. Elements activate stress-free at their undeformed position, so an
//! element only accumulates stress from increments solved while it is
//! active.
//!
//! Every stage is solved once per load bucket against a single
//! factorization: [`Bucket::Dead`] carries self weight, surface pressure and
//! explicit nodal forces, [`Bucket::Prestress`] carries tendon cooling. The
//! displacement and stress histories of the buckets stay separate to the
//! end, so results can be reported with or without the prestress share.
//!
//! Releasing a temporary support re-applies the negative of the reaction it
//! has accumulated, bucket by bucket. In a linear model this restores, to
//! solver precision, the state the structure would have reached had the
//! support never existed.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fem::loads;
use crate::fem::stress::StressField;
use crate::fem::system::{assemble, ActiveSet, Assembled, Constraints, Spring};
use crate::fem::{FemError, Material};
use crate::mesh::Mesh;

/// Load bookkeeping bucket, also the index into per-bucket arrays.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bucket {
    /// Self weight, surface pressure, nodal forces.
    Dead = 0,
    /// Tendon cooling.
    Prestress = 1,
}

pub const N_BUCKETS: usize = 2;

/// Surface pressure applied during one stage.
#[derive(Clone, Debug)]
pub struct StagePressure {
    /// Face set name, resolved against `mesh.face_sets`.
    pub face_set: String,
    /// N/m^2, positive pushing against the outward face normal.
    pub pressure: f64,
    /// Restricts the face set to hexes of these segments; `None` keeps
    /// every face that sits on a currently active hex.
    pub segments: Option<Vec<String>>,
}

/// One construction step. Structural changes happen before the solve, in
/// the order: releases, new supports, new elements.
#[derive(Clone, Debug, Default)]
pub struct Stage {
    pub name: String,
    /// Segments cast this stage; their hexes activate stress-free.
    pub activate_segments: Vec<String>,
    /// Tendon groups stressed this stage: (group, temperature change).
    /// Negative values cool, i.e. tension the group.
    pub cool_tendons: Vec<(String, f64)>,
    /// Self weight switched on this stage: (segment, acceleration). A
    /// segment must already be active; fractions of `g` are allowed.
    pub gravity: Vec<(String, f64)>,
    pub pressures: Vec<StagePressure>,
    /// Raw dead loads `(node, dof, value)` on active nodes.
    pub nodal_forces: Vec<(usize, usize, f64)>,
    /// Hard zero supports added this stage.
    pub add_fixed: Vec<(usize, usize)>,
    pub add_springs: Vec<Spring>,
    /// Supports from earlier stages removed this stage.
    pub release_fixed: Vec<(usize, usize)>,
}

impl Stage {
    pub fn new(name: &str) -> Self {
        Stage {
            name: name.to_string(),
            ..Stage::default()
        }
    }

    /// Adds hard supports on every (node, dof) pair of the cross product.
    pub fn fix_nodes(&mut self, nodes: &[usize], dofs: &[usize]) {
        for &n in nodes {
            for &d in dofs {
                self.add_fixed.push((n, d));
            }
        }
    }

    /// Queues the release of every (node, dof) pair of the cross product.
    pub fn release_nodes(&mut self, nodes: &[usize], dofs: &[usize]) {
        for &n in nodes {
            for &d in dofs {
                self.release_fixed.push((n, d));
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum StagingError {
    #[error("stage '{stage}': unknown segment '{name}'")]
    UnknownSegment { stage: String, name: String },
    #[error("stage '{stage}': unknown tendon group '{name}'")]
    UnknownTendonGroup { stage: String, name: String },
    #[error("stage '{stage}': unknown face set '{name}'")]
    UnknownFaceSet { stage: String, name: String },
    #[error("stage '{stage}': segment '{name}' is already active")]
    SegmentReactivated { stage: String, name: String },
    #[error("stage '{stage}': tendon group '{name}' is already active")]
    TendonReactivated { stage: String, name: String },
    #[error("stage '{stage}': gravity on segment '{name}' before it is cast")]
    GravityBeforeActivation { stage: String, name: String },
    #[error("stage '{stage}': support ({node}, {dof}) is fixed twice")]
    DuplicateSupport { stage: String, node: usize, dof: usize },
    #[error("stage '{stage}': release of ({node}, {dof}) which is not a current support")]
    BadRelease { stage: String, node: usize, dof: usize },
    #[error("stage '{stage}': {source}")]
    Fem { stage: String, source: FemError },
}

/// Per-stage record: the two solved increments plus balance sums.
pub struct StageLog {
    pub name: String,
    pub n_equations: usize,
    /// Displacement increment of this stage per bucket, full dof space.
    pub du: [Vec<f64>; N_BUCKETS],
    /// Sum of applied (effective) loads per bucket and direction.
    pub load_sum: [[f64; 3]; N_BUCKETS],
    /// Balancing support terms per bucket and direction: spring forces
    /// minus fixed-dof reactions. Equals `load_sum` up to solver roundoff.
    pub reaction_sum: [[f64; 3]; N_BUCKETS],
}

/// Structure state after the last stage.
pub struct StagedState {
    pub active: ActiveSet,
    pub constraints: Constraints,
    /// Accumulated displacements per bucket.
    pub u: [Vec<f64>; N_BUCKETS],
    /// Accumulated stresses per bucket.
    pub stress: [StressField; N_BUCKETS],
    /// Accumulated reaction per currently fixed (node, dof), per bucket.
    pub reactions: [BTreeMap<(usize, usize), f64>; N_BUCKETS],
}

impl StagedState {
    /// Dead plus prestress stress state.
    pub fn total_stress(&self) -> StressField {
        let mut total = self.stress[Bucket::Dead as usize].clone();
        let pres = &self.stress[Bucket::Prestress as usize];
        for (dst, src) in total.hex_gauss.iter_mut().zip(&pres.hex_gauss) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                for c in 0..6 {
                    d[c] += s[c];
                }
            }
        }
        for (dst, src) in total.truss_axial.iter_mut().zip(&pres.truss_axial) {
            *dst += src;
        }
        total
    }

    /// Dead plus prestress displacements.
    pub fn total_u(&self) -> Vec<f64> {
        self.u[0]
            .iter()
            .zip(&self.u[1])
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Everything a schedule run produces. The returned system is the final
/// stage's factorized assembly, ready for extra increments (live loads).
pub struct StagedOutcome<'a> {
    pub stages: Vec<StageLog>,
    pub state: StagedState,
    pub system: Assembled<'a>,
}

/// Checks a schedule against the mesh without assembling anything:
/// name resolution, one-shot activation, support add/release pairing.
pub fn validate_schedule(mesh: &Mesh, stages: &[Stage]) -> Result<(), StagingError> {
    let mut seg_active: BTreeSet<usize> = BTreeSet::new();
    let mut grp_active: BTreeSet<usize> = BTreeSet::new();
    let mut fixed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for stage in stages {
        let err_stage = || stage.name.clone();
        for (node, dof) in stage.release_fixed.iter().copied() {
            if !fixed.remove(&(node, dof)) {
                return Err(StagingError::BadRelease {
                    stage: err_stage(),
                    node,
                    dof,
                });
            }
        }
        for (node, dof) in stage.add_fixed.iter().copied() {
            if !fixed.insert((node, dof)) {
                return Err(StagingError::DuplicateSupport {
                    stage: err_stage(),
                    node,
                    dof,
                });
            }
        }
        for name in &stage.activate_segments {
            let id = mesh
                .segment_id(name)
                .ok_or_else(|| StagingError::UnknownSegment {
                    stage: err_stage(),
                    name: name.clone(),
                })?;
            if !seg_active.insert(id) {
                return Err(StagingError::SegmentReactivated {
                    stage: err_stage(),
                    name: name.clone(),
                });
            }
        }
        for (name, _) in &stage.cool_tendons {
            let id = mesh
                .tendon_group_id(name)
                .ok_or_else(|| StagingError::UnknownTendonGroup {
                    stage: err_stage(),
                    name: name.clone(),
                })?;
            if !grp_active.insert(id) {
                return Err(StagingError::TendonReactivated {
                    stage: err_stage(),
                    name: name.clone(),
                });
            }
        }
        for (name, _) in &stage.gravity {
            let id = mesh
                .segment_id(name)
                .ok_or_else(|| StagingError::UnknownSegment {
                    stage: err_stage(),
                    name: name.clone(),
                })?;
            if !seg_active.contains(&id) {
                return Err(StagingError::GravityBeforeActivation {
                    stage: err_stage(),
                    name: name.clone(),
                });
            }
        }
        for pr in &stage.pressures {
            if !mesh.face_sets.contains_key(&pr.face_set) {
                return Err(StagingError::UnknownFaceSet {
                    stage: err_stage(),
                    name: pr.face_set.clone(),
                });
            }
            for name in pr.segments.iter().flatten() {
                mesh.segment_id(name)
                    .ok_or_else(|| StagingError::UnknownSegment {
                        stage: err_stage(),
                        name: name.clone(),
                    })?;
            }
        }
    }
    Ok(())
}

/// Runs a schedule start to finish.
///
/// Stages that change neither elements nor supports reuse the previous
/// factorization; all others re-assemble. Within a stage both buckets share
/// one factorization.
pub fn run_staged_analysis<'a>(
    mesh: &'a Mesh,
    materials: &'a [Material],
    stages: &[Stage],
) -> Result<StagedOutcome<'a>, StagingError> {
    validate_schedule(mesh, stages)?;
    let n = mesh.nodes.len();
    let mut active = ActiveSet::none(mesh);
    let mut constraints = Constraints::default();
    let mut u = [vec![0.0; 3 * n], vec![0.0; 3 * n]];
    let mut stress = [StressField::zeros(mesh), StressField::zeros(mesh)];
    let mut reactions: [BTreeMap<(usize, usize), f64>; N_BUCKETS] =
        [BTreeMap::new(), BTreeMap::new()];
    let mut logs: Vec<StageLog> = Vec::new();
    let mut system: Option<Assembled<'a>> = None;

    for stage in stages {
        let wrap = |source: FemError| StagingError::Fem {
            stage: stage.name.clone(),
            source,
        };
        // Release loads must be captured before the supports disappear.
        let mut f = [vec![0.0; 3 * n], vec![0.0; 3 * n]];
        for &(node, dof) in &stage.release_fixed {
            constraints.fixed.retain(|&(v, d)| (v, d) != (node, dof));
            for b in 0..N_BUCKETS {
                if let Some(r) = reactions[b].remove(&(node, dof)) {
                    f[b][3 * node + dof] -= r;
                }
            }
        }
        constraints.fixed.extend(stage.add_fixed.iter().copied());
        constraints.springs.extend(stage.add_springs.iter().copied());
        for name in &stage.activate_segments {
            active.activate_segment(mesh, mesh.segment_id(name).expect("validated"));
        }
        let mut cooled: BTreeMap<usize, f64> = BTreeMap::new();
        for (name, dt) in &stage.cool_tendons {
            let gid = mesh.tendon_group_id(name).expect("validated");
            active.activate_tendon_group(mesh, gid);
            cooled.insert(gid, *dt);
        }

        let structural = !(stage.activate_segments.is_empty()
            && stage.cool_tendons.is_empty()
            && stage.add_fixed.is_empty()
            && stage.add_springs.is_empty()
            && stage.release_fixed.is_empty());
        if structural || system.is_none() {
            system = Some(assemble(mesh, materials, &active, &constraints).map_err(wrap)?);
        }
        let sys = system.as_mut().expect("assembled above");

        // Dead bucket loads.
        {
            let fd = &mut f[Bucket::Dead as usize];
            for (name, g) in &stage.gravity {
                let seg = mesh.segment_id(name).expect("validated");
                let ids = (0..mesh.hexes.len()).filter(|&e| mesh.hexes[e].segment == seg);
                loads::add_gravity(mesh, materials, ids, *g, fd);
            }
            for pr in &stage.pressures {
                let seg_ids: Option<Vec<usize>> = pr.segments.as_ref().map(|names| {
                    names
                        .iter()
                        .map(|s| mesh.segment_id(s).expect("validated"))
                        .collect()
                });
                let faces: Vec<_> = mesh.face_sets[&pr.face_set]
                    .iter()
                    .filter(|face| {
                        active.hexes[face.hex]
                            && seg_ids
                                .as_ref()
                                .is_none_or(|ids| ids.contains(&mesh.hexes[face.hex].segment))
                    })
                    .copied()
                    .collect();
                loads::add_face_pressure(mesh, &faces, pr.pressure, fd);
            }
            for &(node, dof, value) in &stage.nodal_forces {
                fd[3 * node + dof] += value;
            }
        }
        // Prestress bucket loads.
        {
            let fp = &mut f[Bucket::Prestress as usize];
            for (name, dt) in &stage.cool_tendons {
                let gid = mesh.tendon_group_id(name).expect("validated");
                let ids = (0..mesh.trusses.len()).filter(|&t| mesh.trusses[t].group == gid);
                loads::add_tendon_cooling(mesh, materials, ids, *dt, fp);
            }
        }

        let empty_cooled = BTreeMap::new();
        let mut du: [Vec<f64>; N_BUCKETS] = [Vec::new(), Vec::new()];
        let mut load_sum = [[0.0; 3]; N_BUCKETS];
        let mut reaction_sum = [[0.0; 3]; N_BUCKETS];
        for b in 0..N_BUCKETS {
            let f_eff = sys.effective_load(&f[b]).map_err(wrap)?;
            for v in 0..n {
                for d in 0..3 {
                    load_sum[b][d] += f_eff[3 * v + d];
                }
            }
            if f_eff.iter().all(|&v| v == 0.0) {
                du[b] = vec![0.0; 3 * n];
                continue;
            }
            let du_b = sys.solve(&f_eff).map_err(wrap)?;
            for (node, dof, r) in sys.reactions(&du_b, &f_eff) {
                *reactions[b].entry((node, dof)).or_insert(0.0) += r;
                reaction_sum[b][dof] -= r;
            }
            for s in &constraints.springs {
                reaction_sum[b][s.dof] += s.stiffness * du_b[3 * s.node + s.dof];
            }
            let bucket_cooled = if b == Bucket::Prestress as usize {
                &cooled
            } else {
                &empty_cooled
            };
            stress[b].add_increment(
                mesh,
                materials,
                &active.hexes,
                &active.trusses,
                &du_b,
                bucket_cooled,
            );
            for (acc, inc) in u[b].iter_mut().zip(&du_b) {
                *acc += inc;
            }
            du[b] = du_b;
        }

        logs.push(StageLog {
            name: stage.name.clone(),
            n_equations: sys.n_equations(),
            du,
            load_sum,
            reaction_sum,
        });
    }

    let system = match system {
        Some(sys) => sys,
        // Empty schedule: assemble the (empty) initial state anyway.
        None => assemble(mesh, materials, &active, &constraints).map_err(|source| {
            StagingError::Fem {
                stage: "<empty schedule>".into(),
                source,
            }
        })?,
    };
    Ok(StagedOutcome {
        stages: logs,
        state: StagedState {
            active,
            constraints,
            u,
            stress,
            reactions,
        },
        system,
    })
}

/// One extra linear increment on an existing system, e.g. a live load on
/// the completed structure. Returns the displacement increment and its
/// stress increment over the active elements; the caller keeps both out of
/// the staged buckets.
pub fn elastic_increment(
    system: &mut Assembled,
    mesh: &Mesh,
    materials: &[Material],
    f_full: &[f64],
) -> Result<(Vec<f64>, StressField), FemError> {
    let f_eff = system.effective_load(f_full)?;
    let u = system.solve(&f_eff)?;
    let mut stress = StressField::zeros(mesh);
    stress.add_increment(
        mesh,
        materials,
        &system.active().hexes.clone(),
        &system.active().trusses.clone(),
        &u,
        &BTreeMap::new(),
    );
    Ok((u, stress))
}
