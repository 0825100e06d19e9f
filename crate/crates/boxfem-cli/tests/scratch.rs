// Temporary exploration harness; not part of the suite.

use boxfem::fem::loads::add_face_pressure;
use boxfem::fem::system::{assemble, ActiveSet, Constraints};
use boxfem::fem::Material;
use boxfem::mesh::girder::{build_prism, GirderResolution};
use boxfem::mesh::{sweep_template, Mesh};
use boxfem::section::{build_cross_section, midspan_params, PlateTag};
use boxfem::shearlag::{lambda_profile, section_cut, ReissnerParams};
use boxfem::staging::elastic_increment;

fn concrete() -> Material {
    Material {
        e: 3.5e10,
        nu: 0.2,
        rho: 2500.0,
        alpha: 1e-5,
    }
}

/// Uniform bar along z with an (nx x ny) cell grid over width `b`, depth `h`.
fn bar_mesh(b: f64, h: f64, l: f64, nx: usize, ny: usize, nz: usize) -> Mesh {
    let cols = nx + 1;
    let quads: Vec<[usize; 4]> = (0..nx)
        .flat_map(|i| {
            (0..ny).map(move |j| {
                let p = j * cols + i;
                [p, p + 1, p + 1 + cols, p + cols]
            })
        })
        .collect();
    let stations: Vec<f64> = (0..=nz).map(|k| l * k as f64 / nz as f64).collect();
    let swept = sweep_template(
        cols * (ny + 1),
        &quads,
        &stations,
        |p, _z| {
            let (i, j) = (p % cols, p / cols);
            [b * i as f64 / nx as f64, h * j as f64 / ny as f64]
        },
        |_q, _s| Some((0, 0)),
    )
    .unwrap();
    let mut mesh = swept.mesh;
    mesh.segment_names.push("bar".into());
    mesh
}

fn tip_deflection(b: f64, h: f64, l: f64, nx: usize, ny: usize, nz: usize, p: f64) -> f64 {
    let mesh = bar_mesh(b, h, l, nx, ny, nz);
    let mats = [concrete()];
    let root: Vec<usize> = (0..mesh.nodes.len())
        .filter(|&v| mesh.nodes[v][2] == 0.0)
        .collect();
    let mut constraints = Constraints::default();
    constraints.fix_nodes(&root, &[0, 1, 2]);
    let mut sys = assemble(&mesh, &mats, &ActiveSet::all(&mesh), &constraints).unwrap();

    let tip: Vec<usize> = (0..mesh.nodes.len())
        .filter(|&v| (mesh.nodes[v][2] - l).abs() < 1e-9)
        .collect();
    let mut f = vec![0.0; 3 * mesh.nodes.len()];
    // Uniform end shear: every tip face hands P_face/4 to its corners.
    let per_face = p / (nx * ny) as f64;
    for (e, hx) in mesh.hexes.iter().enumerate() {
        let _ = e;
        let top4: Vec<usize> = hx
            .nodes
            .iter()
            .copied()
            .filter(|&v| (mesh.nodes[v][2] - l).abs() < 1e-9)
            .collect();
        if top4.len() == 4 {
            for v in top4 {
                f[3 * v + 1] += -per_face / 4.0;
            }
        }
    }
    let (u, _) = elastic_increment(&mut sys, &mesh, &mats, &f).unwrap();
    -tip.iter().map(|&v| u[3 * v + 1]).sum::<f64>() / tip.len() as f64
}

#[test]
#[ignore]
fn timoshenko_probe() {
    let (b, h, l, p) = (0.1, 0.1, 2.0, 1.0e4);
    let m = concrete();
    let g = m.e / (2.0 * (1.0 + m.nu));
    let i = b * h * h * h / 12.0;
    let a = b * h;
    let kappa = 5.0 / 6.0;
    let exact = p * l * l * l / (3.0 * m.e * i) + p * l / (kappa * g * a);
    eprintln!("exact timoshenko {exact:.6e}");
    for (nx, ny, nz) in [(1, 2, 16), (2, 4, 32), (4, 8, 64), (4, 12, 96)] {
        let start = std::time::Instant::now();
        let d = tip_deflection(b, h, l, nx, ny, nz, p);
        eprintln!(
            "mesh {nx}x{ny}x{nz}: delta {d:.6e}  err {:+.4}%  ({:.1?})",
            100.0 * (d - exact) / exact,
            start.elapsed()
        );
    }
}

#[test]
#[ignore]
fn ssb_probe() {
    let sp = midspan_params();
    let l = 30.0;
    let start = std::time::Instant::now();
    let prism = build_prism(&sp, l, 21, GirderResolution::default()).unwrap();
    let mesh = &prism.mesh;
    eprintln!(
        "prism: {} nodes, {} hexes, {} dofs ({:.1?})",
        mesh.nodes.len(),
        mesh.hexes.len(),
        3 * mesh.nodes.len(),
        start.elapsed()
    );

    let mats = [concrete()];
    let end_a = mesh.node_sets["end_a"].clone();
    let end_b = mesh.node_sets["end_b"].clone();
    let mut constraints = Constraints::default();
    constraints.fix_nodes(&end_a, &[1, 2]);
    constraints.fix_nodes(&end_b, &[1]);
    let mid_a = end_a[end_a.len() / 2];
    let mid_b = end_b[end_b.len() / 2];
    constraints.fix_nodes(&[mid_a, mid_b], &[0]);

    let mut sys = assemble(mesh, &mats, &ActiveSet::all(mesh), &constraints).unwrap();
    let pressure = 1.0e4;
    let mut f = vec![0.0; 3 * mesh.nodes.len()];
    add_face_pressure(mesh, &prism.deck_faces, pressure, &mut f);
    let (_, stress) = elastic_increment(&mut sys, mesh, &mats, &f).unwrap();
    eprintln!("solved ({:.1?})", start.elapsed());

    let cut = section_cut(mesh, 0..mesh.hexes.len(), 0.5 * l).unwrap();
    let cs = build_cross_section(&sp).unwrap();
    let profile = lambda_profile(&cut, &stress, &cs).unwrap();

    let rp = ReissnerParams::new(&sp, &concrete(), l).unwrap();
    let q = pressure * sp.b_top;
    for plate in [PlateTag::Top, PlateTag::Bottom] {
        let mut fe = Vec::new();
        let mut an = Vec::new();
        for s in profile.samples.iter().filter(|s| s.plate == plate) {
            fe.push(s.sigma);
            an.push(rp.stress_uniform(q, plate, s.x, s.y, 0.5 * l));
        }
        let n = fe.len() as f64;
        let (mf, ma) = (
            fe.iter().sum::<f64>() / n,
            an.iter().sum::<f64>() / n,
        );
        let (mut num, mut df, mut da) = (0.0, 0.0, 0.0);
        for (x, y) in fe.iter().zip(&an) {
            num += (x - mf) * (y - ma);
            df += (x - mf) * (x - mf);
            da += (y - ma) * (y - ma);
        }
        let corr = num / (df.sqrt() * da.sqrt());
        let peak_fe = fe.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let peak_an = an.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        eprintln!(
            "{plate:?}: corr {corr:.4}  peak fe {peak_fe:.4e} an {peak_an:.4e}  ratio {:.4}",
            peak_fe / peak_an
        );
        for s in profile.samples.iter().filter(|s| s.plate == plate) {
            eprintln!(
                "   x={:+.3} fe={:+.4e} an={:+.4e} lam={:.4}",
                s.x,
                s.sigma,
                rp.stress_uniform(q, plate, s.x, s.y, 0.5 * l),
                s.lambda
            );
        }
    }
    eprintln!("total {:.1?}", start.elapsed());
}
