//! Default bridge model: materials, tendon layout, construction schedule,
//! reference cut stations and live-load generation.
//!
//! Everything here is plain data assembly on top of the mesh, staging and
//! load primitives; the numbers are the documented model defaults and are
//! overridable through the embedding application's configuration.

use crate::fem::{loads, FemError, Material};
use crate::mesh::girder::{build_girder, GirderConfig, GirderModel};
use crate::mesh::{embed_tendons, Face, Mesh, MeshError};
use crate::staging::{Stage, StagePressure};

/// Gravitational acceleration, m/s^2.
pub const GRAVITY: f64 = 9.8;
/// Tendon temperature change applied at activation, degC. The cooling
/// contraction stands in for the net effective prestress after losses.
pub const TENDON_DT: f64 = -370.0;
/// Nominal jacking stress, Pa. Reported informatively; the model applies
/// prestress through `TENDON_DT`, not through this value.
pub const CONTROL_STRESS: f64 = 1.395e9;
/// Lateral shear stiffness of one bearing node, N/m (x and z).
pub const BEARING_SHEAR_STIFFNESS: f64 = 2e7;
/// Equivalent deck load while building the cantilever arms, Pa.
pub const DECK_LOAD_ARMS: f64 = 2491.0;
/// Equivalent deck load on the mid-span closure, Pa.
pub const DECK_LOAD_CLOSURE: f64 = 601.0;
/// Pavement load on the finished deck, Pa.
pub const DECK_LOAD_PAVEMENT: f64 = 4801.0;

pub const MAT_CONCRETE: usize = 0;
pub const MAT_STRAND: usize = 1;

/// Concrete and prestressing-strand materials, indexed by the `MAT_*`
/// constants. Strand self-weight never enters the model (bars carry no
/// gravity); the equivalent deck loads cover it instead.
pub fn default_materials() -> [Material; 2] {
    [
        Material {
            e: 3.5e10,
            nu: 0.2,
            rho: 2500.0,
            alpha: 1e-5,
        },
        Material {
            e: 1.95e11,
            nu: 0.3,
            rho: 7850.0,
            alpha: 2e-5,
        },
    ]
}

/// Where the tendons run and how many strands they bundle.
///
/// Arm tendons lie in the top plate and run tip-to-tip through the pier
/// block, one pair (+x/-x) per cast stage and pier; their strand counts sum
/// to `strands_per_frame` per T-frame. Closure continuity tendons run
/// through the mid-span closure, the bottom pair following the soffit
/// midline, plus a light top pair.
#[derive(Clone, Debug)]
pub struct TendonLayout {
    /// Transverse offset of the arm tendon pair, m.
    pub arm_x: f64,
    /// Depth of arm and top-closure tendons below the deck surface, m.
    pub top_inset: f64,
    /// Strand total per T-frame, split over the cast stages and sides.
    pub strands_per_frame: usize,
    /// Transverse offset of the bottom closure pair, m.
    pub closure_bottom_x: f64,
    pub closure_bottom_strands: usize,
    /// Transverse offset of the top closure pair, m.
    pub closure_top_x: f64,
    pub closure_top_strands: usize,
    /// How far the closure tendons reach past the closure joint, as a
    /// multiple of the main-arm segment length.
    pub closure_reach_segments: f64,
    /// Area of one strand, m^2.
    pub strand_area: f64,
    /// Longitudinal pull-back of anchorages from segment tips, m.
    pub anchor_inset: f64,
    /// Target bar length when subdividing a tendon polyline, m.
    pub bar_length: f64,
}

impl Default for TendonLayout {
    fn default() -> Self {
        TendonLayout {
            arm_x: 2.4,
            top_inset: 0.15,
            strands_per_frame: 174,
            closure_bottom_x: 2.0,
            closure_bottom_strands: 20,
            closure_top_x: 2.4,
            closure_top_strands: 1,
            closure_reach_segments: 0.4,
            strand_area: 140e-6,
            anchor_inset: 0.10,
            bar_length: 1.0,
        }
    }
}

impl TendonLayout {
    /// Strands of one arm tendon at cast stage `k` (1-based): the per-side
    /// total is spread as evenly as integers allow, front stages first.
    pub fn arm_strands(&self, k: usize, n_stages: usize) -> usize {
        let per_side = self.strands_per_frame / 2;
        let base = per_side / n_stages;
        let extra = per_side % n_stages;
        base + usize::from(k <= extra)
    }
}

/// Complete analysis-ready model: girder + piers mesh with embedded
/// tendons, still paired with the generating config.
pub struct BridgeModel {
    pub girder: GirderModel,
    pub layout: TendonLayout,
}

impl BridgeModel {
    pub fn mesh(&self) -> &Mesh {
        &self.girder.mesh
    }

    /// Hex ids of the girder body (piers excluded), the candidate set for
    /// section cuts.
    pub fn girder_hexes(&self) -> Vec<usize> {
        let n_girder_segments = self.girder.segments.len();
        (0..self.girder.mesh.hexes.len())
            .filter(|&e| self.girder.mesh.hexes[e].segment < n_girder_segments)
            .collect()
    }
}

/// Builds the girder, welds the piers on and embeds the default tendons.
pub fn build_bridge(cfg: &GirderConfig, layout: &TendonLayout) -> Result<BridgeModel, MeshError> {
    let mut model = build_girder(cfg)?;
    add_tendons(&mut model, cfg, layout)?;
    Ok(BridgeModel {
        girder: model,
        layout: layout.clone(),
    })
}

fn segment_extent(model: &GirderModel, name: &str) -> (f64, f64) {
    let seg = model
        .segments
        .iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("unknown segment '{name}'"));
    (seg.z0, seg.z1)
}

fn add_tendons(
    model: &mut GirderModel,
    cfg: &GirderConfig,
    layout: &TendonLayout,
) -> Result<(), MeshError> {
    let n = cfg.n_arm_segments;
    let y_top = -layout.top_inset;
    for k in 1..=n {
        let strands = layout.arm_strands(k, n);
        let mut lines = Vec::with_capacity(4);
        // Pier A: side tip is the low-z end, main tip the high-z end.
        let (za0, _) = segment_extent(model, &format!("arm_a_side_{k}"));
        let (_, za1) = segment_extent(model, &format!("arm_a_main_{k}"));
        // Pier B mirrors that.
        let (zb0, _) = segment_extent(model, &format!("arm_b_main_{k}"));
        let (_, zb1) = segment_extent(model, &format!("arm_b_side_{k}"));
        for (z0, z1) in [(za0, za1), (zb0, zb1)] {
            let (z0, z1) = (z0 + layout.anchor_inset, z1 - layout.anchor_inset);
            for sign in [-1.0, 1.0] {
                lines.push(vec![
                    [sign * layout.arm_x, y_top, z0],
                    [sign * layout.arm_x, y_top, z1],
                ]);
            }
        }
        embed_tendons(
            &mut model.mesh,
            &lines,
            strands as f64 * layout.strand_area,
            MAT_STRAND,
            &format!("arm_{k}"),
            layout.bar_length,
        )?;
    }

    // Mid-span continuity tendons.
    let (zc0, zc1) = segment_extent(model, "mid_closure");
    let reach = layout.closure_reach_segments * cfg.main_arm_len() / n as f64;
    let (z0, z1) = (zc0 - reach, zc1 + reach);
    // The bottom pair tracks the soffit midline through the haunch tail.
    let n_pts = ((z1 - z0) / 2.0).ceil() as usize + 1;
    let soffit_line = |x: f64| -> Vec<[f64; 3]> {
        (0..=n_pts)
            .map(|i| {
                let z = z0 + (z1 - z0) * i as f64 / n_pts as f64;
                let p = cfg.section_at(z);
                [x, -p.h + 0.5 * p.t_bot, z]
            })
            .collect()
    };
    embed_tendons(
        &mut model.mesh,
        &[
            soffit_line(-layout.closure_bottom_x),
            soffit_line(layout.closure_bottom_x),
        ],
        layout.closure_bottom_strands as f64 * layout.strand_area,
        MAT_STRAND,
        "closure_bottom",
        layout.bar_length,
    )?;
    embed_tendons(
        &mut model.mesh,
        &[
            vec![
                [-layout.closure_top_x, y_top, z0],
                [-layout.closure_top_x, y_top, z1],
            ],
            vec![
                [layout.closure_top_x, y_top, z0],
                [layout.closure_top_x, y_top, z1],
            ],
        ],
        layout.closure_top_strands as f64 * layout.strand_area,
        MAT_STRAND,
        "closure_top",
        layout.bar_length,
    )?;
    Ok(())
}

/// Load and support magnitudes consumed by the default schedule.
#[derive(Clone, Copy, Debug)]
pub struct ScheduleLoads {
    pub gravity: f64,
    /// Equivalent deck load on cantilever-cast segments and 0# blocks, Pa.
    pub deck_arms: f64,
    /// Equivalent deck load on the mid-span closure, Pa.
    pub deck_closure: f64,
    /// Pavement load on the finished deck, Pa.
    pub pavement: f64,
    /// Tendon temperature change at activation, degC.
    pub tendon_dt: f64,
    /// Lateral spring per bearing node, N/m.
    pub bearing_stiffness: f64,
}

impl Default for ScheduleLoads {
    fn default() -> Self {
        ScheduleLoads {
            gravity: GRAVITY,
            deck_arms: DECK_LOAD_ARMS,
            deck_closure: DECK_LOAD_CLOSURE,
            pavement: DECK_LOAD_PAVEMENT,
            tendon_dt: TENDON_DT,
            bearing_stiffness: BEARING_SHEAR_STIFFNESS,
        }
    }
}

/// The default construction schedule with default load magnitudes.
pub fn default_schedule(model: &BridgeModel) -> Vec<Stage> {
    schedule_with(model, &ScheduleLoads::default())
}

/// The default construction schedule, `n_arm_segments + 3` stages:
///
/// 1. Piers and 0# blocks on fixed foundations; side-span props are
///    declared here and engage once their nodes are cast.
/// 2. One stage per cast step: the four arm segments activate with self
///    weight, the equivalent deck load, and their tendons cooled. The last
///    step also casts the bearing-supported side-span tails.
/// 3. Closure: side and mid closures cast, props released against their
///    accumulated reactions, continuity tendons cooled.
/// 4. Pavement over the whole deck.
pub fn schedule_with(model: &BridgeModel, loads: &ScheduleLoads) -> Vec<Stage> {
    let mesh = model.mesh();
    let cfg = &model.girder.config;
    let n = cfg.n_arm_segments;
    let mut stages = Vec::with_capacity(n + 3);

    let deck_on = |segments: Vec<String>, pressure: f64| StagePressure {
        face_set: "deck".into(),
        pressure,
        segments: Some(segments),
    };
    let with_gravity = |stage: &mut Stage, names: &[String]| {
        stage.activate_segments.extend(names.iter().cloned());
        stage
            .gravity
            .extend(names.iter().map(|s| (s.clone(), loads.gravity)));
    };

    let mut foundation = Stage::new("foundation");
    let blocks: Vec<String> = vec![
        "pier_a".into(),
        "pier_b".into(),
        "block0_a".into(),
        "block0_b".into(),
    ];
    with_gravity(&mut foundation, &blocks);
    foundation.pressures = vec![deck_on(
        vec!["block0_a".into(), "block0_b".into()],
        loads.deck_arms,
    )];
    foundation.fix_nodes(&mesh.node_sets["pier_a_base"], &[0, 1, 2]);
    foundation.fix_nodes(&mesh.node_sets["pier_b_base"], &[0, 1, 2]);
    // Temporary side-span props, dormant until their nodes are cast.
    foundation.fix_nodes(&mesh.node_sets["props_a"], &[1]);
    foundation.fix_nodes(&mesh.node_sets["props_b"], &[1]);
    stages.push(foundation);

    for k in 1..=n {
        let mut stage = Stage::new(&format!("arm_{k}"));
        let arms: Vec<String> = vec![
            format!("arm_a_side_{k}"),
            format!("arm_a_main_{k}"),
            format!("arm_b_main_{k}"),
            format!("arm_b_side_{k}"),
        ];
        with_gravity(&mut stage, &arms);
        stage.pressures = vec![deck_on(arms, loads.deck_arms)];
        stage.cool_tendons = vec![(format!("arm_{k}"), loads.tendon_dt)];
        if k == n {
            let tails: Vec<String> = vec!["side_cast_a".into(), "side_cast_b".into()];
            with_gravity(&mut stage, &tails);
            for set in ["bearings_a", "bearings_b"] {
                let nodes = &mesh.node_sets[set];
                stage.fix_nodes(nodes, &[1]);
                for &node in nodes {
                    for dof in [0, 2] {
                        stage.add_springs.push(crate::fem::system::Spring {
                            node,
                            dof,
                            stiffness: loads.bearing_stiffness,
                        });
                    }
                }
            }
        }
        stages.push(stage);
    }

    let mut closure = Stage::new("closure");
    let pours: Vec<String> = vec![
        "side_closure_a".into(),
        "side_closure_b".into(),
        "mid_closure".into(),
    ];
    with_gravity(&mut closure, &pours);
    closure.pressures = vec![deck_on(vec!["mid_closure".into()], loads.deck_closure)];
    closure.cool_tendons = vec![
        ("closure_bottom".into(), loads.tendon_dt),
        ("closure_top".into(), loads.tendon_dt),
    ];
    closure.release_nodes(&mesh.node_sets["props_a"], &[1]);
    closure.release_nodes(&mesh.node_sets["props_b"], &[1]);
    stages.push(closure);

    let mut pavement = Stage::new("pavement");
    pavement.pressures = vec![StagePressure {
        face_set: "deck".into(),
        pressure: loads.pavement,
        segments: None,
    }];
    stages.push(pavement);

    stages
}

/// The six reporting stations: 0# block edge, side-span quarter and half,
/// main-span eighth, quarter and middle. All are snapped to slab mids and
/// kept clear of diaphragms.
pub fn reference_cuts(model: &GirderModel) -> Vec<(String, f64)> {
    let cfg = &model.config;
    let [zp_a, _] = cfg.pier_z();
    let main = cfg.main_span;
    let side = cfg.side_span;
    vec![
        (
            "block_a".into(),
            model.cut_outside_diaphragm(zp_a + cfg.pier.plan_half_len, 1.0),
        ),
        ("side_quarter_a".into(), model.snap_to_slab_mid(0.25 * side)),
        ("side_half_a".into(), model.snap_to_slab_mid(0.50 * side)),
        (
            "main_eighth".into(),
            model.snap_to_slab_mid(zp_a + 0.125 * main),
        ),
        (
            "main_quarter".into(),
            model.snap_to_slab_mid(zp_a + 0.25 * main),
        ),
        (
            "main_mid".into(),
            model.snap_to_slab_mid(zp_a + 0.50 * main),
        ),
    ]
}

/// One axle: longitudinal offset from the placement station (positive
/// toward increasing z) and its share of the gross weight.
#[derive(Clone, Copy, Debug)]
pub struct Axle {
    pub dz: f64,
    pub share: f64,
}

/// One truck of the live-load test: gross weight, lane centre, axle layout.
#[derive(Clone, Debug)]
pub struct Truck {
    pub weight_t: f64,
    pub lane_x: f64,
    pub axles: Vec<Axle>,
}

/// Three axles: the front leads the trailing tandem pair, split 1:2:2.
pub fn default_axles() -> Vec<Axle> {
    vec![
        Axle { dz: 3.5, share: 0.2 },
        Axle { dz: 0.0, share: 0.4 },
        Axle { dz: -1.35, share: 0.4 },
    ]
}

/// Four three-axle trucks side by side, one per lane.
pub fn default_trucks() -> Vec<Truck> {
    let weights = [32.2, 33.0, 33.5, 34.1];
    let lanes = [-5.25, -1.75, 1.75, 5.25];
    weights
        .iter()
        .zip(lanes)
        .map(|(&weight_t, lane_x)| Truck {
            weight_t,
            lane_x,
            axles: default_axles(),
        })
        .collect()
}

/// Wheel centres sit this far either side of the lane centre, m.
const WHEEL_TRACK_HALF: f64 = 0.9;
/// Wheel patch (x by z), resolved as its 2x2 Gauss points.
const PATCH: [f64; 2] = [0.6, 0.2];

/// Accumulates the wheel loads of `trucks` placed at `station` into `f`.
/// Every wheel patch becomes four equal point loads on the deck surface.
pub fn add_truck_loads(
    mesh: &Mesh,
    deck_faces: &[Face],
    trucks: &[Truck],
    station: f64,
    f: &mut [f64],
) -> Result<(), FemError> {
    let gauss = 0.5 / 3.0f64.sqrt();
    for truck in trucks {
        let gross = truck.weight_t * 1000.0 * GRAVITY;
        for &Axle { dz, share } in &truck.axles {
            let wheel = 0.5 * gross * share;
            for side in [-1.0, 1.0] {
                let xc = truck.lane_x + side * WHEEL_TRACK_HALF;
                let zc = station + dz;
                for gx in [-1.0, 1.0] {
                    for gz in [-1.0, 1.0] {
                        loads::add_surface_point_load(
                            mesh,
                            deck_faces,
                            xc + gx * gauss * PATCH[0],
                            zc + gz * gauss * PATCH[1],
                            -0.25 * wheel,
                            f,
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Vertical line load across the full deck width at station `z`, tributary
/// weighted over the deck surface nodes of that station. The station must
/// be a mesh station. Total applied force is exactly `-total` in y.
pub fn add_deck_line_load(
    mesh: &Mesh,
    deck_faces: &[Face],
    z: f64,
    total: f64,
    f: &mut [f64],
) -> Result<(), FemError> {
    let mut nodes: Vec<usize> = Vec::new();
    for face in deck_faces {
        let local = crate::fem::hex8::FACE_NODES[face.side as usize];
        for &k in &local {
            let v = mesh.hexes[face.hex].nodes[k];
            if (mesh.nodes[v][2] - z).abs() < 1e-9 {
                nodes.push(v);
            }
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.len() < 2 {
        return Err(FemError::PointOffSurface { x: 0.0, z });
    }
    nodes.sort_by(|&a, &b| {
        mesh.nodes[a][0]
            .partial_cmp(&mesh.nodes[b][0])
            .expect("finite coordinates")
    });
    let xs: Vec<f64> = nodes.iter().map(|&v| mesh.nodes[v][0]).collect();
    let width = xs[xs.len() - 1] - xs[0];
    for (i, &v) in nodes.iter().enumerate() {
        let left = if i == 0 { xs[0] } else { xs[i - 1] };
        let right = if i == xs.len() - 1 { xs[i] } else { xs[i + 1] };
        let tributary = 0.5 * (right - left);
        f[3 * v + 1] -= total * tributary / width;
    }
    Ok(())
}

/// Aspect-ratio study members: the box width over depth ratio `2b/h` runs
/// over `ratios`; the bottom width is set to `ratio * h_mid` exactly and
/// the deck width scales by the same factor.
pub fn aspect_sweep_configs(base: &GirderConfig, ratios: &[f64]) -> Vec<(f64, GirderConfig)> {
    ratios
        .iter()
        .map(|&r| {
            let mut cfg = *base;
            cfg.b_bot = r * base.h_mid;
            cfg.b_top = base.b_top * cfg.b_bot / base.b_bot;
            (r, cfg)
        })
        .collect()
}

/// Span study members: the main span runs over `mains`; side spans scale
/// with the same factor so the segment layout stays similar.
pub fn span_sweep_configs(base: &GirderConfig, mains: &[f64]) -> Vec<(f64, GirderConfig)> {
    mains
        .iter()
        .map(|&main| {
            let mut cfg = *base;
            let factor = main / base.main_span;
            cfg.main_span = main;
            cfg.side_span = base.side_span * factor;
            (main, cfg)
        })
        .collect()
}

/// Default sweep ratios (aspect) and main spans (span study).
pub const ASPECT_RATIOS: [f64; 4] = [3.0, 3.2, 3.4, 3.6];
pub const SPAN_MAINS: [f64; 4] = [165.0, 185.0, 210.0, 230.0];

/// Cheaper preset for sweep members: longer slabs, same cast staging. The
/// stage count is kept because the closure tendon reach scales with the arm
/// segment length; the template resolution is untouched so cut sampling
/// stays identical.
pub fn sweep_preset(base: &GirderConfig) -> GirderConfig {
    let mut cfg = *base;
    cfg.resolution.max_slab_len = 4.5;
    cfg
}
