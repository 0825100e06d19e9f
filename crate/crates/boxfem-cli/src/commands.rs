//! The seven subcommand drivers and their shared pipeline pieces.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use boxfem::bridge::{
    add_truck_loads, aspect_sweep_configs, build_bridge, reference_cuts, schedule_with,
    span_sweep_configs, sweep_preset, BridgeModel, TendonLayout,
};
use boxfem::fem::stress::StressField;
use boxfem::mesh::girder::GirderConfig;
use boxfem::mesh::validate_mesh;
use boxfem::section::{build_cross_section, PlateTag};
use boxfem::shearlag::{lambda_profile, section_cut, LambdaProfile, ReissnerParams};
use boxfem::staging::{
    elastic_increment, run_staged_analysis, validate_schedule, Bucket, StageLog, StagedOutcome,
};
use boxfem::vtk::write_vtk;

use crate::config::{parse_config, Config};
use crate::output::{
    io_err, plate_name, plate_rank, ratio, sig, write_profile_rows, Out, ANALYTIC_HEADER,
    LIVE_SUMMARY_HEADER, PROFILE_HEADER, REACTIONS_HEADER, SECTION_HEADER, STAGE_LOG_HEADER,
    SUMMARY_HEADER, SWEEP_HEADER,
};
use crate::output::coord;
use crate::CliError;

pub fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                CliError::Config(vec![format!("cannot read '{}': {e}", p.display())])
            })?;
            parse_config(&text).map_err(CliError::Config)
        }
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Builds the bridge of `girder` (tendons and all) and vets the mesh.
fn build_checked(girder: &GirderConfig, cfg: &Config) -> Result<BridgeModel, CliError> {
    build_with_tendons(girder, &cfg.tendons)
}

fn build_with_tendons(
    girder: &GirderConfig,
    tendons: &TendonLayout,
) -> Result<BridgeModel, CliError> {
    let model = build_bridge(girder, tendons).map_err(numerical)?;
    let report = validate_mesh(model.mesh()).map_err(numerical)?;
    if report.min_det_j <= 0.0 {
        return Err(CliError::Numerical(format!(
            "mesh has non-positive jacobians (min {})",
            report.min_det_j
        )));
    }
    Ok(model)
}

/// Applied-vs-balancing load gap per stage and bucket, against the run's
/// largest load component.
fn check_conservation(stages: &[StageLog]) -> Result<(), CliError> {
    let mut scale = 1.0f64;
    for s in stages {
        for b in 0..2 {
            for d in 0..3 {
                scale = scale.max(s.load_sum[b][d].abs());
            }
        }
    }
    for s in stages {
        for b in 0..2 {
            for d in 0..3 {
                let gap = (s.load_sum[b][d] - s.reaction_sum[b][d]).abs();
                if gap > 1e-8 * scale {
                    return Err(CliError::Numerical(format!(
                        "stage '{}': load/reaction imbalance {gap:.3e} N (scale {scale:.3e})",
                        s.name
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Cuts the model at every reporting station and forms lambda profiles of
/// `field`.
fn cut_profiles(
    model: &BridgeModel,
    candidates: &[usize],
    cuts: &[(String, f64)],
    field: &StressField,
) -> Result<Vec<(String, LambdaProfile)>, CliError> {
    cuts.iter()
        .map(|(id, z)| {
            let cut =
                section_cut(model.mesh(), candidates.iter().copied(), *z).map_err(numerical)?;
            let section = build_cross_section(&model.girder.config.section_at(*z))
                .map_err(numerical)?;
            let profile = lambda_profile(&cut, field, &section).map_err(numerical)?;
            Ok((id.clone(), profile))
        })
        .collect()
}

fn write_summary_rows<W: Write>(
    w: &mut W,
    prefix: &str,
    cut_id: &str,
    profile: &LambdaProfile,
) -> Result<(), CliError> {
    for plate in crate::output::PLATE_ORDER {
        if let Some(e) = profile.plate_extrema(plate) {
            writeln!(
                w,
                "{prefix}{cut_id},{},{},{},{}",
                plate_name(plate),
                ratio(e.max_lambda),
                ratio(e.min_lambda),
                coord(e.x_at_max),
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Cumulative total displacement per stage, for the log and VTK snapshots.
fn accumulate_stage_u(stages: &[StageLog], n_dofs: usize) -> Vec<Vec<f64>> {
    let mut run = vec![0.0; n_dofs];
    let mut out = Vec::with_capacity(stages.len());
    for s in stages {
        for (dst, (a, b)) in run
            .iter_mut()
            .zip(s.du[0].iter().zip(s.du[1].iter()))
        {
            *dst += a + b;
        }
        out.push(run.clone());
    }
    out
}

fn write_stage_log(
    out: &Out,
    schedule: &[boxfem::staging::Stage],
    stages: &[StageLog],
    stage_u: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut w = out.create("stage_log.csv", STAGE_LOG_HEADER)?;
    let mut active = 0usize;
    for (i, log) in stages.iter().enumerate() {
        active += schedule[i].activate_segments.len();
        let total_load = log.load_sum[Bucket::Dead as usize][1];
        let max_defl = stage_u[i]
            .iter()
            .skip(1)
            .step_by(3)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        writeln!(
            w,
            "{},{},{},{}",
            log.name,
            active,
            sig(total_load),
            sig(max_defl)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn analyze(cfg: &Config, out_dir: &Path, vtk: bool) -> Result<(), CliError> {
    let out = Out::new(out_dir)?;
    let mut profiles_w = out.create("lambda_profiles.csv", PROFILE_HEADER)?;
    let mut dead_w = out.create("lambda_profiles_dead.csv", PROFILE_HEADER)?;
    let mut summary_w = out.create("summary.csv", SUMMARY_HEADER)?;
    let mut reactions_w = out.create("reactions.csv", REACTIONS_HEADER)?;

    let model = build_checked(&cfg.girder, cfg)?;
    let schedule = schedule_with(&model, &cfg.loads);
    let outcome =
        run_staged_analysis(model.mesh(), &cfg.materials, &schedule).map_err(numerical)?;
    check_conservation(&outcome.stages)?;

    let stage_u = accumulate_stage_u(&outcome.stages, 3 * model.mesh().nodes.len());
    write_stage_log(&out, &schedule, &outcome.stages, &stage_u)?;

    let candidates = model.girder_hexes();
    let cuts = reference_cuts(&model.girder);
    let total = outcome.state.total_stress();
    for (id, profile) in cut_profiles(&model, &candidates, &cuts, &total)? {
        write_profile_rows(&mut profiles_w, &id, &profile)?;
        write_summary_rows(&mut summary_w, "", &id, &profile)?;
    }
    let dead = &outcome.state.stress[Bucket::Dead as usize];
    for (id, profile) in cut_profiles(&model, &candidates, &cuts, dead)? {
        write_profile_rows(&mut dead_w, &id, &profile)?;
    }

    // Accumulated support reactions (dead + prestress) on fixed dofs.
    let r0 = &outcome.state.reactions[0];
    let r1 = &outcome.state.reactions[1];
    for (&(node, dof), &r) in r0 {
        let total_r = r + r1.get(&(node, dof)).copied().unwrap_or(0.0);
        writeln!(reactions_w, "{node},{dof},{}", sig(total_r)).map_err(io_err)?;
    }

    if vtk {
        for (i, log) in outcome.stages.iter().enumerate() {
            let name = format!("stage_{i:02}_{}.vtk", log.name);
            let w = out.create_raw(&name)?;
            write_vtk(w, model.mesh(), Some(&stage_u[i]), None).map_err(io_err)?;
        }
        let w = out.create_raw("analyze.vtk")?;
        write_vtk(w, model.mesh(), Some(&outcome.state.total_u()), Some(&total))
            .map_err(io_err)?;
    }

    for w in [profiles_w, dead_w, summary_w, reactions_w] {
        let mut w = w;
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

/// Runs the staged build, then applies the truck group once at the placement
/// station (mid-span unless configured) and reports the lambda profile of
/// that live increment at every reference cut.
pub fn live_load(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let out = Out::new(out_dir)?;
    let mut profiles_w = out.create("live_profiles.csv", PROFILE_HEADER)?;
    let mut summary_w = out.create("live_summary.csv", LIVE_SUMMARY_HEADER)?;

    let model = build_checked(&cfg.girder, cfg)?;
    let schedule = schedule_with(&model, &cfg.loads);
    let mut outcome: StagedOutcome =
        run_staged_analysis(model.mesh(), &cfg.materials, &schedule).map_err(numerical)?;
    check_conservation(&outcome.stages)?;

    let candidates = model.girder_hexes();
    let mut cuts = reference_cuts(&model.girder);
    cuts.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite stations"));
    let station = cfg.live_station.unwrap_or_else(|| {
        cuts.iter()
            .find(|(id, _)| id == "main_mid")
            .expect("reference cuts include the mid-span")
            .1
    });

    let mut f = vec![0.0; 3 * model.mesh().nodes.len()];
    add_truck_loads(model.mesh(), &model.girder.deck_faces, &cfg.trucks, station, &mut f)
        .map_err(numerical)?;
    let (_, dstress) = elastic_increment(&mut outcome.system, model.mesh(), &cfg.materials, &f)
        .map_err(numerical)?;
    for (id, profile) in cut_profiles(&model, &candidates, &cuts, &dstress)? {
        write_profile_rows(&mut profiles_w, &id, &profile)?;
        write_summary_rows(&mut summary_w, &format!("{},", coord(station)), &id, &profile)?;
    }
    profiles_w.flush().map_err(io_err)?;
    summary_w.flush().map_err(io_err)
}

pub enum SweepKind {
    Aspect,
    Span,
}

struct SweepMember {
    label: String,
    sweep_value: f64,
    girder: GirderConfig,
    tendons: TendonLayout,
}

struct SummaryRow {
    sweep_value: f64,
    cut_id: String,
    plate: PlateTag,
    max_lambda: f64,
    min_lambda: f64,
    x_at_max: f64,
}

pub fn sweep(cfg: &Config, out_dir: &Path, threads: usize, kind: SweepKind) -> Result<(), CliError> {
    let out = Out::new(out_dir)?;
    let base = {
        let mut g = sweep_preset(&cfg.girder);
        g.n_arm_segments = cfg.sweep_arm_segments;
        g.resolution.max_slab_len = cfg.sweep_max_slab_len;
        g
    };
    let (summary_name, members): (&str, Vec<SweepMember>) = match kind {
        SweepKind::Aspect => (
            "sweep_aspect.csv",
            aspect_sweep_configs(&base, &cfg.aspect_ratios)
                .into_iter()
                .map(|(r, girder)| SweepMember {
                    label: format!("aspect_{r:.1}"),
                    sweep_value: r,
                    girder,
                    tendons: cfg.tendons.clone(),
                })
                .collect(),
        ),
        SweepKind::Span => (
            "sweep_span.csv",
            span_sweep_configs(&base, &cfg.main_spans)
                .into_iter()
                .map(|(main, girder)| SweepMember {
                    label: format!("span_{main:.0}"),
                    sweep_value: main / girder.b_bot,
                    tendons: cfg.tendons.clone(),
                    girder,
                })
                .collect(),
        ),
    };

    // Every output file exists (with header) before the first solve.
    let mut summary_w = out.create(summary_name, SWEEP_HEADER)?;
    for m in &members {
        out.create(&format!("{}_profiles.csv", m.label), PROFILE_HEADER)?;
    }

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<SummaryRow>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let n_workers = threads.clamp(1, members.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= members.len() {
                    break;
                }
                match run_member(&members[i], cfg, &out) {
                    Ok(mut member_rows) => rows.lock().unwrap().append(&mut member_rows),
                    Err(e) => failures
                        .lock()
                        .unwrap()
                        .push(format!("member '{}': {e}", members[i].label)),
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        failures.sort();
        return Err(CliError::Numerical(failures.join("; ")));
    }

    let mut rows = rows.into_inner().unwrap();
    rows.sort_by(|a, b| {
        a.sweep_value
            .partial_cmp(&b.sweep_value)
            .expect("finite sweep values")
            .then_with(|| a.cut_id.cmp(&b.cut_id))
            .then_with(|| plate_rank(a.plate).cmp(&plate_rank(b.plate)))
    });
    for r in rows {
        writeln!(
            summary_w,
            "{},{},{},{},{},{}",
            ratio(r.sweep_value),
            r.cut_id,
            plate_name(r.plate),
            ratio(r.max_lambda),
            ratio(r.min_lambda),
            coord(r.x_at_max),
        )
        .map_err(io_err)?;
    }
    summary_w.flush().map_err(io_err)
}

/// One sweep member: full staged pipeline, profile rows appended to the
/// member's own file, summary extrema returned for aggregation.
fn run_member(member: &SweepMember, cfg: &Config, out: &Out) -> Result<Vec<SummaryRow>, CliError> {
    let model = build_with_tendons(&member.girder, &member.tendons)?;
    let schedule = schedule_with(&model, &cfg.loads);
    let outcome =
        run_staged_analysis(model.mesh(), &cfg.materials, &schedule).map_err(numerical)?;
    check_conservation(&outcome.stages)?;

    let candidates = model.girder_hexes();
    let cuts = reference_cuts(&model.girder);
    let total = outcome.state.total_stress();
    let profiles = cut_profiles(&model, &candidates, &cuts, &total)?;

    let mut w = out.append(&format!("{}_profiles.csv", member.label))?;
    let mut rows = Vec::new();
    for (id, profile) in &profiles {
        write_profile_rows(&mut w, id, profile)?;
        for plate in crate::output::PLATE_ORDER {
            if let Some(e) = profile.plate_extrema(plate) {
                rows.push(SummaryRow {
                    sweep_value: member.sweep_value,
                    cut_id: id.clone(),
                    plate,
                    max_lambda: e.max_lambda,
                    min_lambda: e.min_lambda,
                    x_at_max: e.x_at_max,
                });
            }
        }
    }
    w.flush().map_err(io_err)?;
    Ok(rows)
}

pub fn analytic(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let out = Out::new(out_dir)?;
    let mut w = out.create("analytic_profiles.csv", ANALYTIC_HEADER)?;

    let sp = cfg.mid_section();
    let section = build_cross_section(&sp).map_err(numerical)?;
    let rp = ReissnerParams::new(&sp, &cfg.materials[0], cfg.analytic_length)
        .map_err(numerical)?;
    let z = 0.5 * cfg.analytic_length;

    // (case name, fiber stress, fiber beam stress)
    type StressFn<'a> = Box<dyn Fn(PlateTag, f64, f64) -> (f64, f64) + 'a>;
    let p = cfg.analytic_point_load;
    let q = cfg.analytic_line_load;
    let cases: [(&str, StressFn); 2] = [
        (
            "point",
            Box::new(|plate, x, y| {
                let s = rp.stress_point(p, plate, x, y, z).expect("z on span");
                (s, rp.beam_stress_point(p, y, z))
            }),
        ),
        (
            "uniform",
            Box::new(|plate, x, y| {
                let s = rp.stress_uniform(q, plate, x, y, z).expect("z on span");
                (s, rp.beam_stress_uniform(q, y, z))
            }),
        ),
    ];

    for (case, eval) in &cases {
        let mut samples = Vec::new();
        let mut max_bar = 0.0f64;
        for ml in &section.midlines {
            for &[x, y] in &ml.points {
                let (sigma, sigma_bar) = eval(ml.plate, x, y);
                max_bar = max_bar.max(sigma_bar.abs());
                samples.push((ml.plate, x, y, sigma, sigma_bar));
            }
        }
        // Same denominator floor rule as the FE lambda extraction.
        let floor = (0.02 * max_bar).max(1e4);
        for (plate, x, y, sigma, sigma_bar) in samples {
            let defined = sigma_bar.abs() >= floor;
            let denom = if defined {
                sigma_bar
            } else {
                sigma_bar.signum() * floor
            };
            writeln!(
                w,
                "{case},{},{},{},{},{},{},{}",
                plate_name(plate),
                coord(x),
                coord(y),
                sig(sigma),
                sig(sigma_bar),
                ratio(sigma / denom),
                u8::from(defined),
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn validate_mesh_cmd(cfg: &Config) -> Result<(), CliError> {
    let model = build_checked(&cfg.girder, cfg)?;
    let report = validate_mesh(model.mesh()).map_err(numerical)?;
    let schedule = schedule_with(&model, &cfg.loads);
    validate_schedule(model.mesh(), &schedule).map_err(numerical)?;
    println!("nodes: {}", report.n_nodes);
    println!("hexes: {}", report.n_hexes);
    println!("trusses: {}", report.n_trusses);
    println!("dofs: {}", 3 * report.n_nodes);
    println!("min_det_j: {}", sig(report.min_det_j));
    println!("total_volume_m3: {}", sig(report.total_volume));
    println!("schedule: {} stages ok", schedule.len());
    Ok(())
}

pub fn dump_section(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let out = Out::new(out_dir)?;
    let mut w = out.create("section_vertices.csv", SECTION_HEADER)?;
    let g = &cfg.girder;
    let root_sp = boxfem::section::SectionParams::new(
        g.b_top,
        g.b_bot,
        g.h_root,
        g.t_top_root,
        g.t_bot_root,
        g.t_web_root,
        g.t_cant_end,
    );
    for (name, sp) in [("mid", cfg.mid_section()), ("root", root_sp)] {
        let section = build_cross_section(&sp).map_err(numerical)?;
        for (ring, points) in [("outer", &section.outer), ("void", &section.void)] {
            for (idx, [x, y]) in points.iter().enumerate() {
                writeln!(w, "{name},{ring},{idx},{},{}", coord(*x), coord(*y)).map_err(io_err)?;
            }
        }
        for ml in &section.midlines {
            let ring = format!("midline_{}", plate_name(ml.plate));
            for (idx, [x, y]) in ml.points.iter().enumerate() {
                writeln!(w, "{name},{ring},{idx},{},{}", coord(*x), coord(*y)).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}
