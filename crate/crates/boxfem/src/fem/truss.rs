//! Two-node axial bar used for prestressing tendons.
//!
//! Tendons never carry bending here; prestress enters as a thermal
//! pseudo-load (cooling a bar that is fully restrained by the surrounding
//! solid produces an axial tension of `E * alpha * |dT|`).

/// Direction cosines and length of the bar axis from `a` to `b`.
fn axis(a: [f64; 3], b: [f64; 3]) -> ([f64; 3], f64) {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let l = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    ([d[0] / l, d[1] / l, d[2] / l], l)
}

/// 6x6 stiffness of the bar, `EA/L` along its axis.
pub fn stiffness(a: [f64; 3], b: [f64; 3], e: f64, area: f64) -> [[f64; 6]; 6] {
    let (d, l) = axis(a, b);
    let c = e * area / l;
    let mut k = [[0.0; 6]; 6];
    for p in 0..3 {
        for q in 0..3 {
            let v = c * d[p] * d[q];
            k[p][q] = v;
            k[p + 3][q + 3] = v;
            k[p][q + 3] = -v;
            k[p + 3][q] = -v;
        }
    }
    k
}

/// Consistent nodal loads of a uniform temperature change `dt`.
///
/// Cooling (`dt < 0`) pulls the end nodes towards each other.
pub fn thermal_load(a: [f64; 3], b: [f64; 3], e: f64, area: f64, alpha: f64, dt: f64) -> [f64; 6] {
    let (d, _) = axis(a, b);
    let n = e * area * alpha * dt;
    let mut f = [0.0; 6];
    for p in 0..3 {
        f[p] = -n * d[p];
        f[p + 3] = n * d[p];
    }
    f
}

/// Axial stress given end displacements and the accumulated temperature
/// change (positive in tension).
pub fn stress(
    a: [f64; 3],
    b: [f64; 3],
    ua: [f64; 3],
    ub: [f64; 3],
    e: f64,
    alpha: f64,
    dt_total: f64,
) -> f64 {
    let (d, l) = axis(a, b);
    let stretch = (0..3).map(|p| (ub[p] - ua[p]) * d[p]).sum::<f64>();
    e * (stretch / l - alpha * dt_total)
}
