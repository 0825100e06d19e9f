//! JSON configuration: defaults, overlay parsing, validation.
//!
//! A config file overlays the built-in defaults block by block. Parsing
//! collects every problem it can find and reports them all at once, each
//! anchored by its key path (JSON carries no line information once parsed;
//! syntax errors still come with line and column from the parser).

use boxfem::bridge::{default_axles, Axle, ScheduleLoads, TendonLayout, Truck, ASPECT_RATIOS, SPAN_MAINS};
use boxfem::fem::Material;
use boxfem::mesh::girder::GirderConfig;
use boxfem::section::SectionParams;
use serde_json::{Map, Value};

use crate::units::{parse_quantity, UnitClass};

#[derive(Clone, Debug)]
pub struct Config {
    pub girder: GirderConfig,
    /// Concrete, then strand (indices match the mesh material ids).
    pub materials: [Material; 2],
    pub tendons: TendonLayout,
    pub loads: ScheduleLoads,
    pub trucks: Vec<Truck>,
    /// Truck placement station, m; `None` means the mid-span reference cut.
    pub live_station: Option<f64>,
    pub aspect_ratios: Vec<f64>,
    pub main_spans: Vec<f64>,
    /// Cast stages per arm for sweep members.
    pub sweep_arm_segments: usize,
    /// Slab length cap for sweep members, m.
    pub sweep_max_slab_len: f64,
    /// Span of the analytic simply supported case, m.
    pub analytic_length: f64,
    /// Midspan point load of the analytic case, N.
    pub analytic_point_load: f64,
    /// Uniform line load of the analytic case, N/m.
    pub analytic_line_load: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            girder: GirderConfig::default(),
            materials: boxfem::bridge::default_materials(),
            tendons: TendonLayout::default(),
            loads: ScheduleLoads::default(),
            trucks: boxfem::bridge::default_trucks(),
            live_station: None,
            aspect_ratios: ASPECT_RATIOS.to_vec(),
            main_spans: SPAN_MAINS.to_vec(),
            sweep_arm_segments: 8,
            sweep_max_slab_len: 4.5,
            analytic_length: 30.0,
            analytic_point_load: 1.0e6,
            analytic_line_load: 1.0e5,
        }
    }
}

impl Config {
    /// Section parameters of the prismatic mid region.
    pub fn mid_section(&self) -> SectionParams {
        let g = &self.girder;
        SectionParams::new(
            g.b_top,
            g.b_bot,
            g.h_mid,
            g.t_top_mid,
            g.t_bot_mid,
            g.t_web_mid,
            g.t_cant_end,
        )
    }
}

/// Parses a config document. Empty or geometry-less input is rejected so a
/// truncated file never silently analyses the default bridge.
pub fn parse_config(text: &str) -> Result<Config, Vec<String>> {
    if text.trim().is_empty() {
        return Err(vec!["missing geometry".into()]);
    }
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return Err(vec![format!("syntax error: {e}")]),
    };
    let Some(map) = root.as_object() else {
        return Err(vec!["top level must be an object".into()]);
    };
    let mut w = Walker::default();
    let mut cfg = Config::default();

    if !map.contains_key("geometry") {
        w.errors.push("missing geometry".into());
    }
    w.check_keys(
        map,
        "",
        &[
            "geometry",
            "resolution",
            "materials",
            "tendons",
            "loads",
            "bearings",
            "live_load",
            "sweep",
            "analytic",
        ],
    );
    if let Some(m) = w.member(map, "geometry", "geometry") {
        geometry_block(&mut w, &m, &mut cfg.girder);
    }
    if let Some(m) = w.member(map, "resolution", "resolution") {
        resolution_block(&mut w, &m, &mut cfg.girder);
    }
    if let Some(m) = w.member(map, "materials", "materials") {
        materials_block(&mut w, &m, &mut cfg.materials);
    }
    if let Some(m) = w.member(map, "tendons", "tendons") {
        tendons_block(&mut w, &m, &mut cfg.tendons);
    }
    if let Some(m) = w.member(map, "loads", "loads") {
        loads_block(&mut w, &m, &mut cfg.loads);
    }
    if let Some(m) = w.member(map, "bearings", "bearings") {
        w.check_keys(&m, "bearings", &["shear_stiffness"]);
        w.quantity(
            &m,
            "bearings",
            "shear_stiffness",
            UnitClass::Stiffness,
            &mut cfg.loads.bearing_stiffness,
        );
    }
    if let Some(m) = w.member(map, "live_load", "live_load") {
        live_load_block(&mut w, &m, &mut cfg);
    }
    if let Some(m) = w.member(map, "sweep", "sweep") {
        sweep_block(&mut w, &m, &mut cfg);
    }
    if let Some(m) = w.member(map, "analytic", "analytic") {
        w.check_keys(&m, "analytic", &["length", "point_load", "line_load"]);
        w.quantity(&m, "analytic", "length", UnitClass::Length, &mut cfg.analytic_length);
        w.quantity(
            &m,
            "analytic",
            "point_load",
            UnitClass::Force,
            &mut cfg.analytic_point_load,
        );
        w.quantity(
            &m,
            "analytic",
            "line_load",
            UnitClass::Stiffness,
            &mut cfg.analytic_line_load,
        );
    }

    validate(&mut w, &cfg);
    if w.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(w.errors)
    }
}

/// Cross-field invariants, checked on the merged config.
fn validate(w: &mut Walker, cfg: &Config) {
    let g = &cfg.girder;
    let mid = cfg.mid_section();
    if let Err(e) = mid.validate() {
        w.errors.push(format!("geometry (mid section): {e}"));
    }
    let root = SectionParams::new(
        g.b_top,
        g.b_bot,
        g.h_root,
        g.t_top_root,
        g.t_bot_root,
        g.t_web_root,
        g.t_cant_end,
    );
    if let Err(e) = root.validate() {
        w.errors.push(format!("geometry (root section): {e}"));
    }
    if g.n_arm_segments == 0 {
        w.errors.push("geometry.n_arm_segments: must be at least 1".into());
    }
    if g.main_arm_len() <= 0.0 || g.side_arm_len() <= 0.0 {
        w.errors.push(
            "geometry: spans leave no room for cantilever arms (check block0_len, \
             closure_len, side_cast_len against the spans)"
                .into(),
        );
    }
    if cfg.trucks.is_empty() {
        w.errors.push("live_load.trucks: at least one truck".into());
    }
    for (i, t) in cfg.trucks.iter().enumerate() {
        if !(32.2..=34.1).contains(&t.weight_t) {
            w.errors.push(format!(
                "live_load.trucks[{i}].weight: {} t outside the replicated test range [32.2, 34.1] t",
                t.weight_t
            ));
        }
        if t.lane_x.abs() > 0.5 * g.b_top {
            w.errors.push(format!(
                "live_load.trucks[{i}].lane_x: {} m is off the deck",
                t.lane_x
            ));
        }
    }
    if let Some(s) = cfg.live_station {
        if s <= 0.0 || s >= g.total_length() {
            w.errors.push(format!(
                "live_load.station: {s} m is outside the bridge [0, {}] m",
                g.total_length()
            ));
        }
    }
    for (name, list) in [("sweep.aspect_ratios", &cfg.aspect_ratios), ("sweep.main_spans", &cfg.main_spans)] {
        if list.is_empty() {
            w.errors.push(format!("{name}: must not be empty"));
        }
        if list.windows(2).any(|p| p[1] <= p[0]) {
            w.errors.push(format!("{name}: values must be strictly increasing"));
        }
    }
    if cfg.analytic_length <= 0.0 {
        w.errors.push("analytic.length: must be positive".into());
    }
}

#[derive(Default)]
struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn path(prefix: &str, key: &str) -> String {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    }

    fn check_keys(&mut self, map: &Map<String, Value>, prefix: &str, allowed: &[&str]) {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.errors
                    .push(format!("unknown key '{}'", Self::path(prefix, key)));
            }
        }
    }

    /// Fetches `map[key]` as an object, cloned so the borrow ends here.
    fn member(
        &mut self,
        map: &Map<String, Value>,
        key: &str,
        path: &str,
    ) -> Option<Map<String, Value>> {
        match map.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m.clone()),
            Some(_) => {
                self.errors.push(format!("{path}: must be an object"));
                None
            }
        }
    }

    fn quantity(
        &mut self,
        map: &Map<String, Value>,
        prefix: &str,
        key: &str,
        class: UnitClass,
        dst: &mut f64,
    ) {
        let path = Self::path(prefix, key);
        match map.get(key) {
            None => {}
            Some(Value::String(s)) => match parse_quantity(s, class) {
                Ok(v) => *dst = v,
                Err(msg) => self.errors.push(format!("{path}: {msg}")),
            },
            Some(Value::Number(_)) => self.errors.push(format!(
                "{path}: missing unit, write a string like \"1 {}\"",
                class.si_name()
            )),
            Some(_) => self
                .errors
                .push(format!("{path}: must be a quantity string")),
        }
    }

    fn number(&mut self, map: &Map<String, Value>, prefix: &str, key: &str, dst: &mut f64) {
        let path = Self::path(prefix, key);
        match map.get(key) {
            None => {}
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => *dst = x,
                _ => self
                    .errors
                    .push(format!("{path}: must be a dimensionless number")),
            },
        }
    }

    fn integer(&mut self, map: &Map<String, Value>, prefix: &str, key: &str, dst: &mut usize) {
        let path = Self::path(prefix, key);
        match map.get(key) {
            None => {}
            Some(v) => match v.as_u64() {
                Some(x) => *dst = x as usize,
                None => self
                    .errors
                    .push(format!("{path}: must be a non-negative integer")),
            },
        }
    }

    fn boolean(&mut self, map: &Map<String, Value>, prefix: &str, key: &str, dst: &mut bool) {
        let path = Self::path(prefix, key);
        match map.get(key) {
            None => {}
            Some(Value::Bool(b)) => *dst = *b,
            Some(_) => self.errors.push(format!("{path}: must be true or false")),
        }
    }
}

fn geometry_block(w: &mut Walker, m: &Map<String, Value>, g: &mut GirderConfig) {
    w.check_keys(
        m,
        "geometry",
        &[
            "main_span",
            "side_span",
            "b_top",
            "b_bot",
            "h_root",
            "h_mid",
            "t_top_root",
            "t_top_mid",
            "t_bot_root",
            "t_bot_mid",
            "t_web_root",
            "t_web_mid",
            "t_cant_end",
            "haunch_exponent",
            "n_arm_segments",
            "block0_len",
            "closure_len",
            "side_cast_len",
            "web_hold",
            "web_taper",
            "diaphragms",
            "pier",
        ],
    );
    let p = "geometry";
    w.quantity(m, p, "main_span", UnitClass::Length, &mut g.main_span);
    w.quantity(m, p, "side_span", UnitClass::Length, &mut g.side_span);
    w.quantity(m, p, "b_top", UnitClass::Length, &mut g.b_top);
    w.quantity(m, p, "b_bot", UnitClass::Length, &mut g.b_bot);
    w.quantity(m, p, "h_root", UnitClass::Length, &mut g.h_root);
    w.quantity(m, p, "h_mid", UnitClass::Length, &mut g.h_mid);
    w.quantity(m, p, "t_top_root", UnitClass::Length, &mut g.t_top_root);
    w.quantity(m, p, "t_top_mid", UnitClass::Length, &mut g.t_top_mid);
    w.quantity(m, p, "t_bot_root", UnitClass::Length, &mut g.t_bot_root);
    w.quantity(m, p, "t_bot_mid", UnitClass::Length, &mut g.t_bot_mid);
    w.quantity(m, p, "t_web_root", UnitClass::Length, &mut g.t_web_root);
    w.quantity(m, p, "t_web_mid", UnitClass::Length, &mut g.t_web_mid);
    w.quantity(m, p, "t_cant_end", UnitClass::Length, &mut g.t_cant_end);
    w.quantity(m, p, "block0_len", UnitClass::Length, &mut g.block0_len);
    w.quantity(m, p, "closure_len", UnitClass::Length, &mut g.closure_len);
    w.quantity(m, p, "side_cast_len", UnitClass::Length, &mut g.side_cast_len);
    w.quantity(m, p, "web_hold", UnitClass::Length, &mut g.web_hold);
    w.quantity(m, p, "web_taper", UnitClass::Length, &mut g.web_taper);
    w.number(m, p, "haunch_exponent", &mut g.haunch_exponent);
    w.integer(m, p, "n_arm_segments", &mut g.n_arm_segments);
    w.boolean(m, p, "diaphragms", &mut g.diaphragms);
    if let Some(pm) = w.member(m, "pier", "geometry.pier") {
        w.check_keys(
            &pm,
            "geometry.pier",
            &[
                "height",
                "plan_half_len",
                "wall_thickness",
                "cap_depth",
                "max_cell_height",
            ],
        );
        let pp = "geometry.pier";
        w.quantity(&pm, pp, "height", UnitClass::Length, &mut g.pier.height);
        w.quantity(
            &pm,
            pp,
            "plan_half_len",
            UnitClass::Length,
            &mut g.pier.plan_half_len,
        );
        w.quantity(
            &pm,
            pp,
            "wall_thickness",
            UnitClass::Length,
            &mut g.pier.wall_thickness,
        );
        w.quantity(&pm, pp, "cap_depth", UnitClass::Length, &mut g.pier.cap_depth);
        w.quantity(
            &pm,
            pp,
            "max_cell_height",
            UnitClass::Length,
            &mut g.pier.max_cell_height,
        );
    }
}

fn resolution_block(w: &mut Walker, m: &Map<String, Value>, g: &mut GirderConfig) {
    w.check_keys(
        m,
        "resolution",
        &[
            "n_cant",
            "n_web",
            "n_inner",
            "n_top",
            "n_webh",
            "n_bot",
            "max_slab_len",
            "min_div",
        ],
    );
    let r = &mut g.resolution;
    let p = "resolution";
    w.integer(m, p, "n_cant", &mut r.n_cant);
    w.integer(m, p, "n_web", &mut r.n_web);
    w.integer(m, p, "n_inner", &mut r.n_inner);
    w.integer(m, p, "n_top", &mut r.n_top);
    w.integer(m, p, "n_webh", &mut r.n_webh);
    w.integer(m, p, "n_bot", &mut r.n_bot);
    w.integer(m, p, "min_div", &mut r.min_div);
    w.quantity(m, p, "max_slab_len", UnitClass::Length, &mut r.max_slab_len);
}

fn materials_block(w: &mut Walker, m: &Map<String, Value>, mats: &mut [Material; 2]) {
    w.check_keys(m, "materials", &["concrete", "strand"]);
    for (key, idx) in [("concrete", 0usize), ("strand", 1)] {
        let path = format!("materials.{key}");
        if let Some(mm) = w.member(m, key, &path) {
            w.check_keys(&mm, &path, &["e", "nu", "rho", "alpha"]);
            let mat = &mut mats[idx];
            w.quantity(&mm, &path, "e", UnitClass::Pressure, &mut mat.e);
            w.number(&mm, &path, "nu", &mut mat.nu);
            w.quantity(&mm, &path, "rho", UnitClass::Density, &mut mat.rho);
            w.quantity(
                &mm,
                &path,
                "alpha",
                UnitClass::ThermalExpansion,
                &mut mat.alpha,
            );
        }
    }
}

fn tendons_block(w: &mut Walker, m: &Map<String, Value>, t: &mut TendonLayout) {
    w.check_keys(
        m,
        "tendons",
        &[
            "arm_x",
            "top_inset",
            "strands_per_frame",
            "closure_bottom_x",
            "closure_bottom_strands",
            "closure_top_x",
            "closure_top_strands",
            "closure_reach_segments",
            "strand_area",
            "anchor_inset",
            "bar_length",
        ],
    );
    let p = "tendons";
    w.quantity(m, p, "arm_x", UnitClass::Length, &mut t.arm_x);
    w.quantity(m, p, "top_inset", UnitClass::Length, &mut t.top_inset);
    w.integer(m, p, "strands_per_frame", &mut t.strands_per_frame);
    w.quantity(
        m,
        p,
        "closure_bottom_x",
        UnitClass::Length,
        &mut t.closure_bottom_x,
    );
    w.integer(m, p, "closure_bottom_strands", &mut t.closure_bottom_strands);
    w.quantity(m, p, "closure_top_x", UnitClass::Length, &mut t.closure_top_x);
    w.integer(m, p, "closure_top_strands", &mut t.closure_top_strands);
    w.number(m, p, "closure_reach_segments", &mut t.closure_reach_segments);
    w.quantity(m, p, "strand_area", UnitClass::Area, &mut t.strand_area);
    w.quantity(m, p, "anchor_inset", UnitClass::Length, &mut t.anchor_inset);
    w.quantity(m, p, "bar_length", UnitClass::Length, &mut t.bar_length);
}

fn loads_block(w: &mut Walker, m: &Map<String, Value>, l: &mut ScheduleLoads) {
    w.check_keys(
        m,
        "loads",
        &["gravity", "deck_arms", "deck_closure", "pavement", "tendon_dt"],
    );
    let p = "loads";
    w.quantity(m, p, "gravity", UnitClass::Acceleration, &mut l.gravity);
    w.quantity(m, p, "deck_arms", UnitClass::Pressure, &mut l.deck_arms);
    w.quantity(m, p, "deck_closure", UnitClass::Pressure, &mut l.deck_closure);
    w.quantity(m, p, "pavement", UnitClass::Pressure, &mut l.pavement);
    w.quantity(
        m,
        p,
        "tendon_dt",
        UnitClass::TemperatureDelta,
        &mut l.tendon_dt,
    );
}

fn live_load_block(w: &mut Walker, m: &Map<String, Value>, cfg: &mut Config) {
    w.check_keys(m, "live_load", &["trucks", "station"]);
    if m.contains_key("station") {
        let mut station = f64::NAN;
        w.quantity(m, "live_load", "station", UnitClass::Length, &mut station);
        if station.is_finite() {
            cfg.live_station = Some(station);
        }
    }
    let Some(v) = m.get("trucks") else { return };
    let Some(list) = v.as_array() else {
        w.errors.push("live_load.trucks: must be an array".into());
        return;
    };
    let mut parsed = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let path = format!("live_load.trucks[{i}]");
        let Some(tm) = item.as_object() else {
            w.errors.push(format!("{path}: must be an object"));
            continue;
        };
        w.check_keys(tm, &path, &["weight", "lane_x", "axles"]);
        let (mut weight, mut lane_x) = (f64::NAN, f64::NAN);
        w.quantity(tm, &path, "weight", UnitClass::Mass, &mut weight);
        w.quantity(tm, &path, "lane_x", UnitClass::Length, &mut lane_x);
        if weight.is_nan() {
            w.errors.push(format!("{path}: missing weight"));
        }
        if lane_x.is_nan() {
            w.errors.push(format!("{path}: missing lane_x"));
        }
        let axles = match tm.get("axles") {
            None => Some(default_axles()),
            Some(v) => axle_list(w, &path, v),
        };
        if weight.is_finite() && lane_x.is_finite() {
            if let Some(axles) = axles {
                parsed.push(Truck {
                    weight_t: weight / 1000.0,
                    lane_x,
                    axles,
                });
            }
        }
    }
    cfg.trucks = parsed;
}

/// Per-truck axle override: offsets from the placement station plus weight
/// shares, which must cover the gross weight exactly.
fn axle_list(w: &mut Walker, truck_path: &str, v: &Value) -> Option<Vec<Axle>> {
    let Some(list) = v.as_array() else {
        w.errors.push(format!("{truck_path}.axles: must be an array"));
        return None;
    };
    let mut axles = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let path = format!("{truck_path}.axles[{i}]");
        let Some(am) = item.as_object() else {
            w.errors.push(format!("{path}: must be an object"));
            return None;
        };
        w.check_keys(am, &path, &["offset", "share"]);
        let (mut dz, mut share) = (f64::NAN, f64::NAN);
        w.quantity(am, &path, "offset", UnitClass::Length, &mut dz);
        w.number(am, &path, "share", &mut share);
        if !dz.is_finite() || !share.is_finite() {
            w.errors.push(format!("{path}: needs offset and share"));
            return None;
        }
        if share <= 0.0 {
            w.errors.push(format!("{path}.share: must be positive"));
            return None;
        }
        axles.push(Axle { dz, share });
    }
    let total: f64 = axles.iter().map(|a| a.share).sum();
    if axles.is_empty() || (total - 1.0).abs() > 1e-9 {
        w.errors.push(format!(
            "{truck_path}.axles: shares must sum to 1 (got {total})"
        ));
        return None;
    }
    Some(axles)
}

fn sweep_block(w: &mut Walker, m: &Map<String, Value>, cfg: &mut Config) {
    w.check_keys(
        m,
        "sweep",
        &["aspect_ratios", "main_spans", "arm_segments", "max_slab_len"],
    );
    if let Some(v) = m.get("aspect_ratios") {
        match v
            .as_array()
            .map(|a| a.iter().map(|x| x.as_f64()).collect::<Option<Vec<_>>>())
        {
            Some(Some(list)) => cfg.aspect_ratios = list,
            _ => w
                .errors
                .push("sweep.aspect_ratios: must be an array of numbers".into()),
        }
    }
    if let Some(v) = m.get("main_spans") {
        let Some(list) = v.as_array() else {
            w.errors
                .push("sweep.main_spans: must be an array of quantities".into());
            return;
        };
        let mut spans = Vec::with_capacity(list.len());
        for (i, item) in list.iter().enumerate() {
            let path = format!("sweep.main_spans[{i}]");
            match item {
                Value::String(s) => match parse_quantity(s, UnitClass::Length) {
                    Ok(x) => spans.push(x),
                    Err(msg) => w.errors.push(format!("{path}: {msg}")),
                },
                _ => w.errors.push(format!(
                    "{path}: missing unit, write a string like \"210 m\""
                )),
            }
        }
        cfg.main_spans = spans;
    }
    w.integer(m, "sweep", "arm_segments", &mut cfg.sweep_arm_segments);
    w.quantity(
        m,
        "sweep",
        "max_slab_len",
        UnitClass::Length,
        &mut cfg.sweep_max_slab_len,
    );
}
