//! Parametric three-span box-girder model.
//!
//! Builds the full solid mesh of a continuous rigid-frame bridge: a swept
//! single-cell box with haunched depth, pier diaphragms, hollow pier shafts
//! welded to the girder soffit, plus the named node/face sets that staging
//! and post-processing operate on.
//!
//! Longitudinal layout (z from the left girder end):
//!
//! ```text
//! side_cast_a | side_closure_a | arm_a_side_N .. 1 | block0_a | arm_a_main_1 .. N |
//! mid_closure | arm_b_main_N .. 1 | block0_b | arm_b_side_1 .. N | side_closure_b | side_cast_b
//! ```
//!
//! The template cross-section has a fixed topology; only point positions
//! morph with the local depth, plate thicknesses and web thickness. This
//! keeps node numbering and element counts independent of the haunch shape.

use std::collections::HashMap;

use crate::mesh::{merge_meshes, sweep_template, Face, Mesh, MeshError};
use crate::section::{HeightProfile, SectionParams};

/// Cross-section and slab subdivision counts.
#[derive(Clone, Copy, Debug)]
pub struct GirderResolution {
    /// Cells across each cantilever overhang.
    pub n_cant: usize,
    /// Cells across each web thickness.
    pub n_web: usize,
    /// Cells across the void width.
    pub n_inner: usize,
    /// Layers through the top plate.
    pub n_top: usize,
    /// Layers over the void height.
    pub n_webh: usize,
    /// Layers through the bottom plate.
    pub n_bot: usize,
    /// Longest admissible slab, metres.
    pub max_slab_len: f64,
    /// Minimum slabs per cast segment.
    pub min_div: usize,
}

impl Default for GirderResolution {
    fn default() -> Self {
        GirderResolution {
            n_cant: 2,
            n_web: 3,
            n_inner: 6,
            n_top: 2,
            n_webh: 3,
            n_bot: 1,
            max_slab_len: 3.2,
            min_div: 4,
        }
    }
}

impl GirderResolution {
    fn validate(&self) -> Result<(), MeshError> {
        let checks = [
            ("n_cant", self.n_cant, 1),
            ("n_web", self.n_web, 1),
            ("n_inner", self.n_inner, 2),
            ("n_top", self.n_top, 1),
            ("n_webh", self.n_webh, 1),
            ("n_bot", self.n_bot, 1),
            ("min_div", self.min_div, 1),
        ];
        for (name, value, minimum) in checks {
            if value < minimum {
                return Err(MeshError::ResolutionTooCoarse {
                    name,
                    value,
                    minimum,
                });
            }
        }
        assert!(self.max_slab_len > 0.0, "max_slab_len must be positive");
        Ok(())
    }
}

/// Pier shaft dimensions. The shaft is a hollow rectangle in plan with a
/// solid cap slab on top, welded to the girder soffit over the pier zone.
#[derive(Clone, Copy, Debug)]
pub struct PierConfig {
    /// Girder soffit to foundation, metres.
    pub height: f64,
    /// Half extent along the bridge axis.
    pub plan_half_len: f64,
    /// Wall thickness (snapped to the nearest template line).
    pub wall_thickness: f64,
    /// Depth of the solid cap slab.
    pub cap_depth: f64,
    /// Tallest shaft element, metres.
    pub max_cell_height: f64,
}

impl Default for PierConfig {
    fn default() -> Self {
        PierConfig {
            height: 60.0,
            plan_half_len: 3.0,
            wall_thickness: 0.8,
            cap_depth: 2.0,
            max_cell_height: 8.0,
        }
    }
}

/// Full parametric description of the bridge.
#[derive(Clone, Copy, Debug)]
pub struct GirderConfig {
    /// Centre span between pier axes.
    pub main_span: f64,
    /// End span, girder end to pier axis (both sides equal).
    pub side_span: f64,
    pub b_top: f64,
    pub b_bot: f64,
    pub h_root: f64,
    pub h_mid: f64,
    pub t_top_root: f64,
    pub t_top_mid: f64,
    pub t_bot_root: f64,
    pub t_bot_mid: f64,
    pub t_web_root: f64,
    pub t_web_mid: f64,
    pub t_cant_end: f64,
    /// Haunch power (2 = parabolic depth variation).
    pub haunch_exponent: f64,
    /// Cantilever-cast segments per arm.
    pub n_arm_segments: usize,
    /// Length of the pier-table segment (centred on the pier axis).
    pub block0_len: f64,
    /// Closure pour length (all three closures).
    pub closure_len: f64,
    /// Length of the end segment cast on falsework.
    pub side_cast_len: f64,
    /// Web thickness stays at root value within this distance of a pier axis.
    pub web_hold: f64,
    /// ...then tapers linearly to the mid value over this further distance.
    pub web_taper: f64,
    /// Solidify the box void over the pier zones.
    pub diaphragms: bool,
    pub pier: PierConfig,
    pub resolution: GirderResolution,
}

impl Default for GirderConfig {
    fn default() -> Self {
        GirderConfig {
            main_span: 210.0,
            side_span: 122.0,
            b_top: 22.5,
            b_bot: 11.0,
            h_root: 12.5,
            h_mid: 3.5,
            t_top_root: 0.50,
            t_top_mid: 0.30,
            t_bot_root: 1.50,
            t_bot_mid: 0.32,
            t_web_root: 1.20,
            t_web_mid: 0.50,
            t_cant_end: 0.20,
            haunch_exponent: 2.0,
            n_arm_segments: 8,
            block0_len: 12.0,
            closure_len: 2.0,
            side_cast_len: 16.0,
            web_hold: 10.0,
            web_taper: 15.0,
            diaphragms: true,
            pier: PierConfig::default(),
            resolution: GirderResolution::default(),
        }
    }
}

impl GirderConfig {
    pub fn total_length(&self) -> f64 {
        2.0 * self.side_span + self.main_span
    }

    /// Pier axis positions.
    pub fn pier_z(&self) -> [f64; 2] {
        [self.side_span, self.side_span + self.main_span]
    }

    /// Arm length on the main-span side of a pier.
    pub fn main_arm_len(&self) -> f64 {
        0.5 * (self.main_span - self.block0_len - self.closure_len)
    }

    /// Arm length on the side-span side of a pier.
    pub fn side_arm_len(&self) -> f64 {
        self.side_span - self.side_cast_len - self.closure_len - 0.5 * self.block0_len
    }

    /// Haunch length on the main-span side: pier-zone edge to closure edge.
    fn main_haunch_len(&self) -> f64 {
        self.main_arm_len() + 0.5 * self.block0_len - self.pier.plan_half_len
    }

    fn side_haunch_len(&self) -> f64 {
        self.side_arm_len() + 0.5 * self.block0_len - self.pier.plan_half_len
    }

    /// Cross-section dimensions at station `z`.
    pub fn section_at(&self, z: f64) -> SectionParams {
        let [zp_a, zp_b] = self.pier_z();
        let flat = self.pier.plan_half_len;
        // Haunch coordinate: 0 at a pier-zone edge, growing towards the
        // closures, saturating at the local haunch length.
        let mut f_exp = 0.0f64; // power-law weight, 1 at the root
        let mut f_lin = 0.0f64; // linear weight for the deck plate
        for (zp, len_left, len_right) in [
            (zp_a, self.side_haunch_len(), self.main_haunch_len()),
            (zp_b, self.main_haunch_len(), self.side_haunch_len()),
        ] {
            let d = z - zp;
            let len = if d < 0.0 { len_left } else { len_right };
            let away = (d.abs() - flat).max(0.0);
            if away < len {
                let profile = HeightProfile {
                    h_root: 1.0,
                    h_mid: 0.0,
                    haunch_length: len,
                    exponent: self.haunch_exponent,
                    t_bot_root: 1.0,
                    t_bot_mid: 0.0,
                };
                let (w, _) = profile.height_at(away).expect("in-range haunch lookup");
                f_exp = f_exp.max(w);
                f_lin = f_lin.max(1.0 - away / len);
            }
        }
        let h = self.h_mid + (self.h_root - self.h_mid) * f_exp;
        let t_bot = self.t_bot_mid + (self.t_bot_root - self.t_bot_mid) * f_exp;
        let t_top = self.t_top_mid + (self.t_top_root - self.t_top_mid) * f_lin;
        let d_pier = (z - zp_a).abs().min((z - zp_b).abs());
        let t_web = if d_pier <= self.web_hold {
            self.t_web_root
        } else if d_pier <= self.web_hold + self.web_taper {
            let s = (d_pier - self.web_hold) / self.web_taper;
            self.t_web_root + (self.t_web_mid - self.t_web_root) * s
        } else {
            self.t_web_mid
        };
        SectionParams::new(
            self.b_top,
            self.b_bot,
            h,
            t_top,
            t_bot,
            t_web,
            self.t_cant_end,
        )
    }
}

/// One named cast unit with its z extent.
#[derive(Clone, Debug)]
pub struct Segment {
    pub name: String,
    pub z0: f64,
    pub z1: f64,
}

/// Cross-section regions a template cell can belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRegion {
    TopPlate,
    BottomPlate,
    Web,
    Cantilever,
    /// Box interior; solid concrete only inside diaphragm slabs.
    Void,
}

/// Built bridge model: mesh plus the lookup structure around it.
pub struct GirderModel {
    pub mesh: Mesh,
    pub config: GirderConfig,
    /// Girder stations, strictly increasing, ends included.
    pub stations: Vec<f64>,
    /// Segment id (into `mesh.segment_names`) per girder slab.
    pub slab_segment: Vec<usize>,
    /// Diaphragm flag per girder slab.
    pub slab_diaphragm: Vec<bool>,
    /// Cast units in z order (girder only; piers come after in id space).
    pub segments: Vec<Segment>,
    /// Deck hexes (top row) per slab, also collected in face set `deck`.
    pub deck_faces: Vec<Face>,
    /// `(cell region, hex id)` for every girder hex, aligned with hex ids.
    pub hex_region: Vec<CellRegion>,
}

struct Template {
    /// Column line count.
    nxl: usize,
    /// Row line count.
    nyl: usize,
    res: GirderResolution,
    quads: Vec<[usize; 4]>,
    regions: Vec<CellRegion>,
}

impl Template {
    fn new(res: GirderResolution) -> Self {
        let ncx = 2 * res.n_cant + 2 * res.n_web + res.n_inner;
        let ncy = res.n_bot + res.n_webh + res.n_top;
        let nxl = ncx + 1;
        let nyl = ncy + 1;
        let mut quads = Vec::new();
        let mut regions = Vec::new();
        for cy in 0..ncy {
            for cx in 0..ncx {
                let Some(region) = Self::region_of(&res, cx, cy) else {
                    continue;
                };
                let p = |c: usize, r: usize| r * nxl + c;
                quads.push([
                    p(cx, cy),
                    p(cx + 1, cy),
                    p(cx + 1, cy + 1),
                    p(cx, cy + 1),
                ]);
                regions.push(region);
            }
        }
        Template {
            nxl,
            nyl,
            res,
            quads,
            regions,
        }
    }

    /// Region of a cell, None below the cantilever soffit.
    fn region_of(res: &GirderResolution, cx: usize, cy: usize) -> Option<CellRegion> {
        let (c1, c2, c3, c4) = (
            res.n_cant,
            res.n_cant + res.n_web,
            res.n_cant + res.n_web + res.n_inner,
            res.n_cant + 2 * res.n_web + res.n_inner,
        );
        let col = if cx < c1 {
            0 // left cantilever
        } else if cx < c2 {
            1 // left web
        } else if cx < c3 {
            2 // interior
        } else if cx < c4 {
            1
        } else {
            0
        };
        let row = if cy < res.n_bot {
            0 // bottom plate
        } else if cy < res.n_bot + res.n_webh {
            1 // void height
        } else {
            2 // top plate
        };
        match (col, row) {
            (0, 2) => Some(CellRegion::Cantilever),
            (0, _) => None,
            (_, 2) => Some(CellRegion::TopPlate),
            (1, 1) => Some(CellRegion::Web),
            (2, 1) => Some(CellRegion::Void),
            (_, 0) => Some(CellRegion::BottomPlate),
            _ => unreachable!(),
        }
    }

    /// Column line abscissae for a given section.
    fn x_lines(&self, p: &SectionParams) -> Vec<f64> {
        let res = &self.res;
        let wb = 0.5 * p.b_bot;
        let w_in = wb - p.t_web;
        let tip = 0.5 * p.b_top;
        let mut xs = Vec::with_capacity(self.nxl);
        for i in 0..=res.n_cant {
            xs.push(-tip + (tip - wb) * i as f64 / res.n_cant as f64);
        }
        for i in 1..=res.n_web {
            xs.push(-wb + p.t_web * i as f64 / res.n_web as f64);
        }
        for i in 1..=res.n_inner {
            xs.push(-w_in + 2.0 * w_in * i as f64 / res.n_inner as f64);
        }
        for i in 1..=res.n_web {
            xs.push(w_in + p.t_web * i as f64 / res.n_web as f64);
        }
        for i in 1..=res.n_cant {
            xs.push(wb + (tip - wb) * i as f64 / res.n_cant as f64);
        }
        debug_assert_eq!(xs.len(), self.nxl);
        xs
    }

    /// Position of template point `pt` for a given section. Row lines in the
    /// cantilever overhang are remapped between the tapered soffit and the
    /// deck surface.
    fn position(&self, pt: usize, p: &SectionParams, xs: &[f64]) -> [f64; 2] {
        let res = &self.res;
        let (c, r) = (pt % self.nxl, pt / self.nxl);
        let x = xs[c];
        let wb = 0.5 * p.b_bot;
        let r_top0 = res.n_bot + res.n_webh;
        if x.abs() > wb + 1e-12 {
            // Overhang: thickness tapers from t_top at the web to the tip value.
            let xi = ((x.abs() - wb) / p.cant_len).clamp(0.0, 1.0);
            let soffit = -(p.t_top + (p.t_cant_end - p.t_top) * xi);
            let f = if r >= r_top0 {
                (r - r_top0) as f64 / res.n_top as f64
            } else {
                0.0
            };
            return [x, soffit * (1.0 - f)];
        }
        let y = if r <= res.n_bot {
            -p.h + p.t_bot * r as f64 / res.n_bot as f64
        } else if r <= res.n_bot + res.n_webh {
            let f = (r - res.n_bot) as f64 / res.n_webh as f64;
            let y_lo = -p.h + p.t_bot;
            let y_hi = -p.t_top;
            y_lo + (y_hi - y_lo) * f
        } else {
            let f = (r - r_top0) as f64 / res.n_top as f64;
            -p.t_top * (1.0 - f)
        };
        [x, y]
    }
}

/// Girder segment list in z order.
fn layout(cfg: &GirderConfig) -> Vec<Segment> {
    let n = cfg.n_arm_segments;
    let seg_side = cfg.side_arm_len() / n as f64;
    let seg_main = cfg.main_arm_len() / n as f64;
    let [zp_a, zp_b] = cfg.pier_z();
    let total = cfg.total_length();
    let mut out: Vec<Segment> = Vec::new();
    let mut push = |name: String, z0: f64, z1: f64| {
        out.push(Segment { name, z0, z1 });
    };
    push("side_cast_a".into(), 0.0, cfg.side_cast_len);
    push(
        "side_closure_a".into(),
        cfg.side_cast_len,
        cfg.side_cast_len + cfg.closure_len,
    );
    let b0a_lo = zp_a - 0.5 * cfg.block0_len;
    for k in (1..=n).rev() {
        push(
            format!("arm_a_side_{k}"),
            b0a_lo - k as f64 * seg_side,
            b0a_lo - (k - 1) as f64 * seg_side,
        );
    }
    push("block0_a".into(), b0a_lo, zp_a + 0.5 * cfg.block0_len);
    let b0a_hi = zp_a + 0.5 * cfg.block0_len;
    for k in 1..=n {
        push(
            format!("arm_a_main_{k}"),
            b0a_hi + (k - 1) as f64 * seg_main,
            b0a_hi + k as f64 * seg_main,
        );
    }
    let mid_lo = b0a_hi + n as f64 * seg_main;
    push("mid_closure".into(), mid_lo, mid_lo + cfg.closure_len);
    let b0b_lo = zp_b - 0.5 * cfg.block0_len;
    for k in (1..=n).rev() {
        push(
            format!("arm_b_main_{k}"),
            b0b_lo - k as f64 * seg_main,
            b0b_lo - (k - 1) as f64 * seg_main,
        );
    }
    push("block0_b".into(), b0b_lo, zp_b + 0.5 * cfg.block0_len);
    let b0b_hi = zp_b + 0.5 * cfg.block0_len;
    for k in 1..=n {
        push(
            format!("arm_b_side_{k}"),
            b0b_hi + (k - 1) as f64 * seg_side,
            b0b_hi + k as f64 * seg_side,
        );
    }
    push(
        "side_closure_b".into(),
        total - cfg.side_cast_len - cfg.closure_len,
        total - cfg.side_cast_len,
    );
    push("side_cast_b".into(), total - cfg.side_cast_len, total);
    out
}

/// Stations over the girder: every segment boundary and mandatory break is a
/// station, intervals are subdivided to the slab-length cap, and every
/// segment ends up with at least `min_div` slabs.
fn build_stations(cfg: &GirderConfig, segments: &[Segment]) -> Vec<f64> {
    let total = cfg.total_length();
    let mut breaks: Vec<f64> = Vec::new();
    for s in segments {
        breaks.push(s.z0);
        breaks.push(s.z1);
    }
    for zp in cfg.pier_z() {
        for off in [
            cfg.pier.plan_half_len - cfg.pier.wall_thickness,
            cfg.pier.plan_half_len,
            cfg.web_hold,
            cfg.web_hold + cfg.web_taper,
        ] {
            for z in [zp - off, zp + off] {
                if z > 1e-9 && z < total - 1e-9 {
                    breaks.push(z);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    // Parts between consecutive breaks, each inside exactly one segment.
    let seg_of = |z: f64| -> usize {
        segments
            .iter()
            .position(|s| z >= s.z0 - 1e-9 && z <= s.z1 + 1e-9)
            .expect("z inside the girder")
    };
    let mut part_div: Vec<usize> = Vec::new();
    let mut part_seg: Vec<usize> = Vec::new();
    for w in 1..breaks.len() {
        let (za, zb) = (breaks[w - 1], breaks[w]);
        part_div.push(((zb - za) / cfg.resolution.max_slab_len).ceil().max(1.0) as usize);
        part_seg.push(seg_of(0.5 * (za + zb)));
    }
    for s in 0..segments.len() {
        loop {
            let count: usize = part_div
                .iter()
                .zip(&part_seg)
                .filter(|(_, &ps)| ps == s)
                .map(|(&d, _)| d)
                .sum();
            if count >= cfg.resolution.min_div {
                break;
            }
            // Split the currently coarsest part of this segment.
            let widest = (0..part_div.len())
                .filter(|&i| part_seg[i] == s)
                .max_by(|&i, &j| {
                    let li = (breaks[i + 1] - breaks[i]) / part_div[i] as f64;
                    let lj = (breaks[j + 1] - breaks[j]) / part_div[j] as f64;
                    li.partial_cmp(&lj).unwrap()
                })
                .expect("segment has at least one part");
            part_div[widest] += 1;
        }
    }
    let mut stations = vec![breaks[0]];
    for w in 0..part_div.len() {
        let (za, zb) = (breaks[w], breaks[w + 1]);
        for i in 1..=part_div[w] {
            stations.push(za + (zb - za) * i as f64 / part_div[w] as f64);
        }
    }
    stations
}

/// Builds the full model: girder sweep, pier shafts, sets.
pub fn build_girder(cfg: &GirderConfig) -> Result<GirderModel, MeshError> {
    cfg.resolution.validate()?;
    let template = Template::new(cfg.resolution);
    let segments = layout(cfg);
    let stations = build_stations(cfg, &segments);
    let n_slabs = stations.len() - 1;

    let mut slab_segment = Vec::with_capacity(n_slabs);
    let mut slab_diaphragm = Vec::with_capacity(n_slabs);
    for w in 0..n_slabs {
        let zm = 0.5 * (stations[w] + stations[w + 1]);
        let seg = segments
            .iter()
            .position(|s| zm >= s.z0 && zm <= s.z1)
            .expect("slab centre inside a segment");
        slab_segment.push(seg);
        let dia = cfg.diaphragms
            && cfg
                .pier_z()
                .iter()
                .any(|&zp| (zm - zp).abs() < cfg.pier.plan_half_len);
        slab_diaphragm.push(dia);
    }

    // Per-station section snapshot, keyed by exact station bits.
    let mut by_z: HashMap<u64, (SectionParams, Vec<f64>)> = HashMap::new();
    for &z in &stations {
        let p = cfg.section_at(z);
        let xs = template.x_lines(&p);
        by_z.insert(z.to_bits(), (p, xs));
    }

    let swept = sweep_template(
        template.nxl * template.nyl,
        &template.quads,
        &stations,
        |pt, z| {
            let (p, xs) = &by_z[&z.to_bits()];
            template.position(pt, p, xs)
        },
        |q, slab| match template.regions[q] {
            CellRegion::Void if !slab_diaphragm[slab] => None,
            _ => Some((0, slab_segment[slab])),
        },
    )?;
    let mut mesh = swept.mesh;
    mesh.segment_names = segments.iter().map(|s| s.name.clone()).collect();

    // Region per hex, in hex id order.
    let mut hex_region = vec![CellRegion::Void; mesh.hexes.len()];
    for slab in 0..n_slabs {
        for (q, &hex) in swept.hex_of[slab].iter().enumerate() {
            if let Some(hex) = hex {
                hex_region[hex] = template.regions[q];
            }
        }
    }

    let res = &cfg.resolution;
    let deck_faces = deck_faces_of(res, &swept.hex_of);
    mesh.face_sets.insert("deck".into(), deck_faces.clone());

    // Support node sets on the girder.
    let station_index = |z: f64| -> usize {
        stations
            .iter()
            .position(|&s| (s - z).abs() < 1e-9)
            .expect("support position is a station")
    };
    let web_cols: Vec<usize> = (res.n_cant..=res.n_cant + res.n_web)
        .chain(res.n_cant + res.n_web + res.n_inner..=res.n_cant + 2 * res.n_web + res.n_inner)
        .collect();
    let box_cols: Vec<usize> =
        (res.n_cant..=res.n_cant + 2 * res.n_web + res.n_inner).collect();
    let soffit_points = |cols: &[usize]| -> Vec<usize> { cols.to_vec() };
    let collect = |s: usize, points: &[usize]| -> Vec<usize> {
        points
            .iter()
            .filter_map(|&p| swept.node_of[s][p])
            .collect()
    };
    let total = cfg.total_length();
    let bearings_a = collect(0, &soffit_points(&web_cols));
    let bearings_b = collect(stations.len() - 1, &soffit_points(&web_cols));
    let props_a = collect(station_index(cfg.side_cast_len), &soffit_points(&box_cols));
    let props_b = collect(
        station_index(total - cfg.side_cast_len),
        &soffit_points(&box_cols),
    );
    mesh.node_sets.insert("bearings_a".into(), bearings_a);
    mesh.node_sets.insert("bearings_b".into(), bearings_b);
    mesh.node_sets.insert("props_a".into(), props_a);
    mesh.node_sets.insert("props_b".into(), props_b);

    // Pier shafts, welded to the soffit over each pier zone.
    for (pier_idx, zp) in cfg.pier_z().into_iter().enumerate() {
        let name = if pier_idx == 0 { "pier_a" } else { "pier_b" };
        let zone: Vec<f64> = stations
            .iter()
            .copied()
            .filter(|&z| (z - zp).abs() <= cfg.pier.plan_half_len + 1e-9)
            .collect();
        let root = cfg.section_at(zp);
        let x_lines: Vec<f64> = template.x_lines(&root)
            [res.n_cant..=res.n_cant + 2 * res.n_web + res.n_inner]
            .to_vec();
        let pier = pier_mesh(cfg, &zone, &x_lines, name)?;
        merge_meshes(&mut mesh, pier, 1e-6);
    }

    Ok(GirderModel {
        mesh,
        config: *cfg,
        stations,
        slab_segment,
        slab_diaphragm,
        segments,
        deck_faces,
        hex_region,
    })
}

/// Deck faces: the top side of every top-row cell of a swept template.
///
/// The quad list skips sub-soffit cantilever cells, so (cx, cy) maps to quad
/// ids through the region test instead of arithmetic.
fn deck_faces_of(res: &GirderResolution, hex_of: &[Vec<Option<usize>>]) -> Vec<Face> {
    let ncx = 2 * res.n_cant + 2 * res.n_web + res.n_inner;
    let mut quad_of_cell: HashMap<(usize, usize), usize> = HashMap::new();
    let mut q = 0usize;
    for cy in 0..(res.n_bot + res.n_webh + res.n_top) {
        for cx in 0..ncx {
            if Template::region_of(res, cx, cy).is_some() {
                quad_of_cell.insert((cx, cy), q);
                q += 1;
            }
        }
    }
    let mut deck_faces = Vec::new();
    let top_cy = res.n_bot + res.n_webh + res.n_top - 1;
    for slab in hex_of {
        for cx in 0..ncx {
            let q = quad_of_cell[&(cx, top_cy)];
            if let Some(hex) = slab[q] {
                deck_faces.push(Face { hex, side: 3 });
            }
        }
    }
    deck_faces
}

/// A constant-section straight box girder on the same swept template:
/// the bare structural model for simply supported span studies and
/// cross-checks against closed-form solutions.
pub struct PrismModel {
    pub mesh: Mesh,
    pub stations: Vec<f64>,
    pub deck_faces: Vec<Face>,
    pub hex_region: Vec<CellRegion>,
}

/// Sweeps `section` (assumed valid) into `n_slabs` equal slabs over
/// `length`. Node sets `end_a` / `end_b` hold the box soffit lines of the
/// two end stations for support conditions; segment 0 is the whole span.
pub fn build_prism(
    section: &SectionParams,
    length: f64,
    n_slabs: usize,
    res: GirderResolution,
) -> Result<PrismModel, MeshError> {
    res.validate()?;
    let template = Template::new(res);
    let xs = template.x_lines(section);
    let stations: Vec<f64> = (0..=n_slabs)
        .map(|i| length * i as f64 / n_slabs as f64)
        .collect();
    let swept = sweep_template(
        template.nxl * template.nyl,
        &template.quads,
        &stations,
        |pt, _z| template.position(pt, section, &xs),
        |q, _slab| match template.regions[q] {
            CellRegion::Void => None,
            _ => Some((0, 0)),
        },
    )?;
    let mut mesh = swept.mesh;
    mesh.segment_names = vec!["span".into()];
    let mut hex_region = vec![CellRegion::Void; mesh.hexes.len()];
    for slab in 0..n_slabs {
        for (q, &hex) in swept.hex_of[slab].iter().enumerate() {
            if let Some(hex) = hex {
                hex_region[hex] = template.regions[q];
            }
        }
    }
    let deck_faces = deck_faces_of(&res, &swept.hex_of);
    mesh.face_sets.insert("deck".into(), deck_faces.clone());
    let box_cols: Vec<usize> =
        (res.n_cant..=res.n_cant + 2 * res.n_web + res.n_inner).collect();
    let ends = [("end_a", 0), ("end_b", stations.len() - 1)];
    for (name, s) in ends {
        let nodes: Vec<usize> = box_cols
            .iter()
            .filter_map(|&p| swept.node_of[s][p])
            .collect();
        mesh.node_sets.insert(name.into(), nodes);
    }
    Ok(PrismModel {
        mesh,
        stations,
        deck_faces,
        hex_region,
    })
}

/// Hollow pier shaft under one pier zone. Swept bottom-up along y with the
/// plan in (x, z); the sweep works in a rotated frame so element orientation
/// stays positive, then coordinates are mapped back.
fn pier_mesh(
    cfg: &GirderConfig,
    zone_stations: &[f64],
    x_lines: &[f64],
    name: &str,
) -> Result<Mesh, MeshError> {
    let p = &cfg.pier;
    let y_top = -cfg.h_root;
    let y_cap = y_top - p.cap_depth;
    let y_base = y_top - p.height;
    let mut levels = Vec::new();
    let n_shaft = ((y_cap - y_base) / p.max_cell_height).ceil().max(1.0) as usize;
    for i in 0..=n_shaft {
        levels.push(y_base + (y_cap - y_base) * i as f64 / n_shaft as f64);
    }
    levels.push(y_top);

    let nx = x_lines.len() - 1;
    let nz = zone_stations.len() - 1;
    let nxl = x_lines.len();
    // Wall bands: x cells accumulated from each edge up to the wall
    // thickness, z cells beyond plan_half - wall from the pier axis.
    let mut wall_x = vec![false; nx];
    let mut acc = 0.0;
    for i in 0..nx {
        acc += x_lines[i + 1] - x_lines[i];
        wall_x[i] = true;
        if acc >= p.wall_thickness - 1e-9 {
            break;
        }
    }
    let mut acc = 0.0;
    for i in (0..nx).rev() {
        acc += x_lines[i + 1] - x_lines[i];
        wall_x[i] = true;
        if acc >= p.wall_thickness - 1e-9 {
            break;
        }
    }
    let zp = 0.5 * (zone_stations[0] + zone_stations[nz]);
    let wall_z: Vec<bool> = (0..nz)
        .map(|i| {
            let zm = 0.5 * (zone_stations[i] + zone_stations[i + 1]);
            (zm - zp).abs() > p.plan_half_len - p.wall_thickness - 1e-9
        })
        .collect();

    // Plan template in the rotated frame (x, -z); sweep axis becomes y.
    let pt = |ix: usize, iz: usize| iz * nxl + ix;
    let mut quads = Vec::new();
    let mut cell_kind = Vec::new(); // true = wall cell
    for iz in 0..nz {
        for ix in 0..nx {
            quads.push([
                pt(ix, iz + 1),
                pt(ix + 1, iz + 1),
                pt(ix + 1, iz),
                pt(ix, iz),
            ]);
            cell_kind.push(wall_x[ix] || wall_z[iz]);
        }
    }
    let cap_slab = levels.len() - 2;
    let swept = sweep_template(
        nxl * zone_stations.len(),
        &quads,
        &levels,
        |ptid, _y| {
            let (ix, iz) = (ptid % nxl, ptid / nxl);
            [x_lines[ix], -zone_stations[iz]]
        },
        |q, slab| {
            if slab == cap_slab || cell_kind[q] {
                Some((0, 0))
            } else {
                None
            }
        },
    )?;
    let mut mesh = swept.mesh;
    for node in mesh.nodes.iter_mut() {
        *node = [node[0], node[2], -node[1]];
    }
    mesh.segment_names = vec![name.to_string()];
    let base_nodes: Vec<usize> = swept.node_of[0].iter().filter_map(|&n| n).collect();
    mesh.node_sets.insert(format!("{name}_base"), base_nodes);
    Ok(mesh)
}

impl GirderModel {
    /// Mid-z of the slab containing `z`, clamped to the girder; cuts taken
    /// there never straddle a station plane.
    pub fn snap_to_slab_mid(&self, z: f64) -> f64 {
        let n = self.stations.len();
        let zc = z.clamp(self.stations[0], self.stations[n - 1]);
        for w in 0..n - 1 {
            if zc <= self.stations[w + 1] || w == n - 2 {
                return 0.5 * (self.stations[w] + self.stations[w + 1]);
            }
        }
        unreachable!()
    }

    /// True when `z` falls in a diaphragm slab.
    pub fn in_diaphragm(&self, z: f64) -> bool {
        for w in 0..self.stations.len() - 1 {
            if z >= self.stations[w] && z <= self.stations[w + 1] {
                return self.slab_diaphragm[w];
            }
        }
        false
    }

    /// Nearest slab mid outside any diaphragm, walking slab by slab in
    /// `direction`.
    pub fn cut_outside_diaphragm(&self, z: f64, direction: f64) -> f64 {
        let zc = z.clamp(self.stations[0], *self.stations.last().unwrap());
        let mut w = (0..self.slab_diaphragm.len())
            .find(|&w| zc <= self.stations[w + 1])
            .unwrap_or(self.slab_diaphragm.len() - 1);
        let step: isize = if direction >= 0.0 { 1 } else { -1 };
        while self.slab_diaphragm[w] {
            let next = w as isize + step;
            assert!(
                next >= 0 && (next as usize) < self.slab_diaphragm.len(),
                "no slab outside the diaphragm zone"
            );
            w = next as usize;
        }
        0.5 * (self.stations[w] + self.stations[w + 1])
    }

    /// Segment id by name, panicking on unknown names (model invariant).
    pub fn segment_id(&self, name: &str) -> usize {
        self.mesh
            .segment_id(name)
            .unwrap_or_else(|| panic!("unknown segment '{name}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_mesh;

    fn coarse_config() -> GirderConfig {
        GirderConfig {
            n_arm_segments: 2,
            resolution: GirderResolution {
                max_slab_len: 14.0,
                min_div: 1,
                ..GirderResolution::default()
            },
            ..GirderConfig::default()
        }
    }

    #[test]
    fn layout_tiles_the_whole_axis_without_gaps() {
        let cfg = GirderConfig::default();
        let segs = layout(&cfg);
        assert_eq!(segs[0].z0, 0.0);
        for w in 1..segs.len() {
            assert!(
                (segs[w].z0 - segs[w - 1].z1).abs() < 1e-9,
                "gap between {} and {}",
                segs[w - 1].name,
                segs[w].name
            );
        }
        assert!((segs.last().unwrap().z1 - 454.0).abs() < 1e-9);
        // 2 blocks + 4 arms x N + 2 side casts + 3 closures.
        assert_eq!(segs.len(), 2 + 4 * cfg.n_arm_segments + 2 + 3);
        let mid = segs.iter().find(|s| s.name == "mid_closure").unwrap();
        assert!((mid.z0 - 226.0).abs() < 1e-9 && (mid.z1 - 228.0).abs() < 1e-9);
    }

    #[test]
    fn sections_follow_the_haunch_and_web_laws() {
        let cfg = GirderConfig::default();
        // Root values hold across the flat pier zone.
        for z in [119.0, 122.0, 125.0] {
            let p = cfg.section_at(z);
            assert!((p.h - 12.5).abs() < 1e-12, "h at {z} = {}", p.h);
            assert!((p.t_bot - 1.50).abs() < 1e-12);
            assert!((p.t_top - 0.50).abs() < 1e-12);
        }
        // Mid values at the closures and beyond.
        for z in [10.0, 17.0, 227.0, 444.0] {
            let p = cfg.section_at(z);
            assert!((p.h - 3.5).abs() < 1e-12, "h at {z} = {}", p.h);
            assert!((p.t_top - 0.30).abs() < 1e-12);
        }
        // Quadratic law halfway down the main haunch: 3.5 + 9/4.
        let p = cfg.section_at(125.0 + 50.5);
        assert!((p.h - 5.75).abs() < 1e-12, "h = {}", p.h);
        // Web hold then taper.
        assert!((cfg.section_at(131.0).t_web - 1.20).abs() < 1e-12);
        let mid_taper = cfg.section_at(122.0 + 17.5).t_web;
        assert!((mid_taper - 0.85).abs() < 1e-12);
        assert!((cfg.section_at(122.0 + 30.0).t_web - 0.50).abs() < 1e-12);
    }

    #[test]
    fn stations_hit_every_mandatory_break() {
        let cfg = GirderConfig::default();
        let segs = layout(&cfg);
        let stations = build_stations(&cfg, &segs);
        for want in [
            0.0, 16.0, 18.0, 116.0, 119.0, 119.8, 124.2, 125.0, 128.0, 226.0, 228.0, 112.0,
            132.0, 97.0, 147.0, 454.0,
        ] {
            assert!(
                stations.iter().any(|&z| (z - want).abs() < 1e-9),
                "missing station {want}"
            );
        }
        // Slab cap respected and every segment has at least min_div slabs.
        for w in 1..stations.len() {
            assert!(stations[w] - stations[w - 1] <= cfg.resolution.max_slab_len + 1e-9);
        }
        for s in &segs {
            let count = (1..stations.len())
                .filter(|&w| {
                    let mid = 0.5 * (stations[w - 1] + stations[w]);
                    mid > s.z0 && mid < s.z1
                })
                .count();
            assert!(
                count >= cfg.resolution.min_div,
                "{} has {} slabs",
                s.name,
                count
            );
        }
    }

    #[test]
    fn coarse_model_validates_with_positive_jacobians() {
        let model = build_girder(&coarse_config()).unwrap();
        let report = validate_mesh(&model.mesh).unwrap();
        assert!(report.min_det_j > 0.0);
        assert!(report.n_hexes > 500);
        // Two pier segments follow the girder segments.
        let names = &model.mesh.segment_names;
        assert_eq!(names[names.len() - 2], "pier_a");
        assert_eq!(names[names.len() - 1], "pier_b");
        for set in [
            "bearings_a",
            "bearings_b",
            "props_a",
            "props_b",
            "pier_a_base",
            "pier_b_base",
        ] {
            assert!(
                !model.mesh.node_sets[set].is_empty(),
                "empty node set {set}"
            );
        }
    }

    #[test]
    fn pier_welds_to_every_soffit_node_in_the_zone() {
        let model = build_girder(&coarse_config()).unwrap();
        let cfg = &model.config;
        // Nodes at the pier-a cap plane: count girder soffit nodes in the
        // zone; welding must leave exactly one node per position.
        let res = &cfg.resolution;
        let lines_across = 2 * res.n_web + res.n_inner + 1;
        let zone_stations = model
            .stations
            .iter()
            .filter(|&&z| (z - 122.0).abs() <= 3.0 + 1e-9)
            .count();
        let at_cap: Vec<usize> = (0..model.mesh.nodes.len())
            .filter(|&v| {
                let p = model.mesh.nodes[v];
                (p[1] + 12.5).abs() < 1e-9 && (p[2] - 122.0).abs() <= 3.0 + 1e-9
            })
            .collect();
        assert_eq!(at_cap.len(), lines_across * zone_stations);
    }

    #[test]
    fn diaphragms_fill_the_void_only_over_piers() {
        let with = build_girder(&coarse_config()).unwrap();
        let without = build_girder(&GirderConfig {
            diaphragms: false,
            ..coarse_config()
        })
        .unwrap();
        let count_void = |m: &GirderModel| {
            m.hex_region
                .iter()
                .filter(|r| **r == CellRegion::Void)
                .count()
        };
        assert!(count_void(&with) > 0);
        assert_eq!(count_void(&without), 0);
        // All void hexes sit within a pier zone.
        for (e, region) in with.hex_region.iter().enumerate() {
            if *region == CellRegion::Void {
                let z = with.mesh.hex_coords(e).iter().map(|c| c[2]).sum::<f64>() / 8.0;
                let near = (z - 122.0).abs() < 3.0 || (z - 332.0).abs() < 3.0;
                assert!(near, "void hex at z = {z}");
            }
        }
        assert!(with.in_diaphragm(122.0) && !with.in_diaphragm(140.0));
        let cut = with.cut_outside_diaphragm(122.0, 1.0);
        assert!(!with.in_diaphragm(cut) && cut > 125.0 && cut < 132.0);
    }

    #[test]
    fn mesh_volume_matches_section_integral() {
        // Volume cross-check against a station-wise trapezoid integral of
        // the exact polygon areas (plus the pier shafts).
        let model = build_girder(&coarse_config()).unwrap();
        let cfg = &model.config;
        let girder_hex_volume: f64 = (0..model.mesh.hexes.len())
            .filter(|&e| model.mesh.hexes[e].segment < model.segments.len())
            .map(|e| crate::fem::hex8::volume(&model.mesh.hex_coords(e)))
            .sum();
        // Integrate per slab with 5-point sampling (the section varies
        // quadratically, the mesh interpolates it linearly: coarse slabs
        // leave a visible but bounded gap).
        let mut exact = 0.0;
        for w in 0..model.stations.len() - 1 {
            let (za, zb) = (model.stations[w], model.stations[w + 1]);
            let mut area_mid = 0.0;
            for i in 0..=4 {
                let z = za + (zb - za) * i as f64 / 4.0;
                let cs = crate::section::build_cross_section(&cfg.section_at(z)).unwrap();
                let mut a = crate::section::polygon_area(&cs.outer)
                    - crate::section::polygon_area(&cs.void);
                if model.slab_diaphragm[w] {
                    a = crate::section::polygon_area(&cs.outer);
                }
                area_mid += if i == 0 || i == 4 { 0.5 * a } else { a };
            }
            exact += area_mid / 4.0 * (zb - za);
        }
        let rel = (girder_hex_volume - exact).abs() / exact;
        assert!(
            rel < 0.01,
            "girder volume {girder_hex_volume} vs section integral {exact} (rel {rel})"
        );
    }

    #[test]
    fn deck_faces_cover_the_full_plan_area() {
        let model = build_girder(&coarse_config()).unwrap();
        let mut area = 0.0;
        for f in &model.deck_faces {
            let c = model.mesh.hex_coords(f.hex);
            let ids = crate::fem::hex8::FACE_NODES[f.side as usize];
            let p: Vec<[f64; 3]> = ids.iter().map(|&i| c[i]).collect();
            // Plan projection area via the shoelace on (x, z).
            let mut s = 0.0;
            for i in 0..4 {
                let j = (i + 1) % 4;
                s += p[i][0] * p[j][2] - p[j][0] * p[i][2];
            }
            area += 0.5 * s.abs();
        }
        let want = 22.5 * 454.0;
        assert!(
            (area - want).abs() < 1e-6 * want,
            "deck area {area} vs {want}"
        );
    }

    #[test]
    fn prism_sweeps_a_valid_constant_section_span() {
        let sp = crate::section::midspan_params();
        let prism = build_prism(&sp, 30.0, 10, GirderResolution::default()).unwrap();
        let report = validate_mesh(&prism.mesh).unwrap();
        assert!(report.min_det_j > 0.0);
        // Constant section: swept volume is exactly area * length.
        let cs = crate::section::build_cross_section(&sp).unwrap();
        let props = crate::section::section_properties(&cs);
        let want = props.a * 30.0;
        assert!(
            (report.total_volume - want).abs() < 1e-9 * want,
            "prism volume {} vs {want}",
            report.total_volume
        );
        for name in ["end_a", "end_b"] {
            let set = &prism.mesh.node_sets[name];
            assert!(!set.is_empty());
            // All soffit nodes: uniform depth.
            for &n in set {
                assert!((prism.mesh.nodes[n][1] + sp.h).abs() < 1e-12);
            }
        }
        assert_eq!(prism.mesh.segment_names, vec!["span".to_string()]);
    }
}
