//! Shear-lag coefficients from solid stress fields, and a thin-walled
//! analytic reference solution for simply supported spans.
//!
//! Everything reports `lambda = sigma / sigma_bar`: the axial stress at a
//! fiber divided by the engineer-beam stress built from the same force and
//! moment resultants over the cut. lambda > 1 means the fiber carries more
//! than the plane-section distribution, which happens near the web-flange
//! junctions of wide single-cell boxes.

use std::f64::consts::PI;

use thiserror::Error;

use crate::fem::loads::inverse_bilinear;
use crate::fem::stress::StressField;
use crate::fem::{hex8, Material};
use crate::mesh::Mesh;
use crate::section::{CrossSection, PlateTag, SectionParams};

/// Cut extraction and analytic-model failures.
#[derive(Debug, Error)]
pub enum ShearLagError {
    #[error("cut plane z = {z} m slices no element of the candidate set")]
    EmptyCut { z: f64 },
    #[error("element {hex} is not swept normal to z at the cut plane z = {z} m")]
    SkewedElement { hex: usize, z: f64 },
    #[error("no cut element contains the fiber at x = {x} m, y = {y} m")]
    FiberOutsideCut { x: f64, y: f64 },
    #[error("web midlines coincide: flange half-width b = {b} m must be positive")]
    DegenerateFlange { b: f64 },
    #[error("axial station z = {z} m lies outside the span [0, {l}] m")]
    StationOffSpan { z: f64, l: f64 },
}

// ---------------------------------------------------------------------------
// Section cuts through the swept solid
// ---------------------------------------------------------------------------

/// One in-plane Gauss point of a sliced element.
#[derive(Clone, Copy)]
struct CutPoint {
    xi: f64,
    eta: f64,
    y: f64,
    /// In-plane Jacobian determinant; the point's area weight.
    w: f64,
}

/// The slice of one hex at the cut plane: a bilinear quad in (x, y).
struct Slice {
    hex: usize,
    zeta: f64,
    corner_x: [f64; 4],
    corner_y: [f64; 4],
    points: [CutPoint; 4],
}

/// A transverse slice through swept hexes at a fixed z station.
///
/// Area, first and second moments come from the same 2x2 quadrature that
/// later integrates stresses, so the resultant identities
/// `int sigma_bar dA = N` and `int sigma_bar y dA = int sigma y dA` hold to
/// round-off by construction.
pub struct SectionCut {
    pub z: f64,
    pub area: f64,
    /// Centroid height of the cut (global y).
    pub y_c: f64,
    /// Second moment about the centroidal x axis.
    pub i: f64,
    slices: Vec<Slice>,
}

/// Force and moment carried by a cut, from one stress field.
#[derive(Clone, Copy, Debug)]
pub struct CutResultants {
    /// Axial force, tension positive.
    pub n: f64,
    /// Bending moment about the centroidal x axis, `int sigma (y - y_c) dA`.
    pub m: f64,
}

fn quad_shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

fn quad_deriv(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)],
        [0.25 * (1.0 - eta), -0.25 * (1.0 + xi)],
        [0.25 * (1.0 + eta), 0.25 * (1.0 + xi)],
        [-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)],
    ]
}

/// Builds the cut at `z` from the candidate hexes (pier or otherwise
/// out-of-scope elements are simply not passed in). Candidates must be swept
/// along z: their four lower nodes share one z plane, the upper four another.
pub fn section_cut(
    mesh: &Mesh,
    candidates: impl IntoIterator<Item = usize>,
    z: f64,
) -> Result<SectionCut, ShearLagError> {
    let mut ids: Vec<usize> = candidates.into_iter().collect();
    ids.sort_unstable();
    let mut slices = Vec::new();
    for e in ids {
        let c = mesh.hex_coords(e);
        let (z_lo, z_hi) = (c[0][2], c[4][2]);
        if !(z >= z_lo && z < z_hi) {
            continue;
        }
        let span = z_hi - z_lo;
        for k in 0..4 {
            if (c[k][2] - z_lo).abs() > 1e-9 * span || (c[k + 4][2] - z_hi).abs() > 1e-9 * span {
                return Err(ShearLagError::SkewedElement { hex: e, z });
            }
        }
        let zeta = 2.0 * (z - z_lo) / span - 1.0;
        let mut corner_x = [0.0; 4];
        let mut corner_y = [0.0; 4];
        for k in 0..4 {
            let n = hex8::shape(hex8::XI[k], hex8::ETA[k], zeta);
            for a in 0..8 {
                corner_x[k] += n[a] * c[a][0];
                corner_y[k] += n[a] * c[a][1];
            }
        }
        let g = hex8::GAUSS;
        let mut points = [CutPoint { xi: 0.0, eta: 0.0, y: 0.0, w: 0.0 }; 4];
        for (p, (xi, eta)) in [(-g, -g), (g, -g), (g, g), (-g, g)].into_iter().enumerate() {
            let n = quad_shape(xi, eta);
            let dn = quad_deriv(xi, eta);
            let mut y = 0.0;
            let mut j = [[0.0; 2]; 2];
            for k in 0..4 {
                y += n[k] * corner_y[k];
                j[0][0] += dn[k][0] * corner_x[k];
                j[0][1] += dn[k][1] * corner_x[k];
                j[1][0] += dn[k][0] * corner_y[k];
                j[1][1] += dn[k][1] * corner_y[k];
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det <= 0.0 {
                return Err(ShearLagError::SkewedElement { hex: e, z });
            }
            points[p] = CutPoint { xi, eta, y, w: det };
        }
        slices.push(Slice { hex: e, zeta, corner_x, corner_y, points });
    }
    if slices.is_empty() {
        return Err(ShearLagError::EmptyCut { z });
    }
    let (mut area, mut s_y) = (0.0, 0.0);
    for sl in &slices {
        for p in &sl.points {
            area += p.w;
            s_y += p.y * p.w;
        }
    }
    let y_c = s_y / area;
    let mut i = 0.0;
    for sl in &slices {
        for p in &sl.points {
            i += (p.y - y_c) * (p.y - y_c) * p.w;
        }
    }
    Ok(SectionCut { z, area, y_c, i, slices })
}

impl SectionCut {
    /// Number of sliced elements.
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Axial force and bending moment of `field` over the cut, integrated
    /// with the cut's own quadrature.
    pub fn resultants(&self, field: &StressField) -> CutResultants {
        let (mut n, mut m) = (0.0, 0.0);
        for sl in &self.slices {
            let gauss = &field.hex_gauss[sl.hex];
            for p in &sl.points {
                let s = hex8::gauss_field_at(gauss, p.xi, p.eta, sl.zeta)[2];
                n += s * p.w;
                m += s * (p.y - self.y_c) * p.w;
            }
        }
        CutResultants { n, m }
    }

    /// Engineer-beam stress at height `y` for the given resultants.
    pub fn beam_stress(&self, rs: &CutResultants, y: f64) -> f64 {
        rs.n / self.area + rs.m * (y - self.y_c) / self.i
    }

    /// Integrates the engineer-beam stress recovered from `rs` back over the
    /// cut quadrature. Reproduces `rs` to round-off because area, centroid
    /// and second moment come from the same points; exposed so consumers can
    /// verify that consistency on real fields.
    pub fn beam_stress_resultants(&self, rs: &CutResultants) -> CutResultants {
        let (mut n, mut m) = (0.0, 0.0);
        for sl in &self.slices {
            for p in &sl.points {
                let s = self.beam_stress(rs, p.y);
                n += s * p.w;
                m += s * (p.y - self.y_c) * p.w;
            }
        }
        CutResultants { n, m }
    }

    /// sigma_zz of `field` at the in-plane point `(x, y)` of the cut,
    /// evaluated from the Gauss lattice of the containing slice.
    pub fn axial_stress_at(&self, field: &StressField, x: f64, y: f64) -> Result<f64, ShearLagError> {
        for sl in &self.slices {
            if let Some((xi, eta, _)) = inverse_bilinear(&sl.corner_x, &sl.corner_y, x, y) {
                let gauss = &field.hex_gauss[sl.hex];
                return Ok(hex8::gauss_field_at(gauss, xi, eta, sl.zeta)[2]);
            }
        }
        Err(ShearLagError::FiberOutsideCut { x, y })
    }
}

// ---------------------------------------------------------------------------
// Lambda profiles over plate midlines
// ---------------------------------------------------------------------------

/// One sampled fiber of a lambda profile.
#[derive(Clone, Copy, Debug)]
pub struct FiberSample {
    pub plate: PlateTag,
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub sigma_bar: f64,
    pub lambda: f64,
    /// False when |sigma_bar| fell below the denominator floor; lambda is
    /// then computed against the floor and only indicative.
    pub defined: bool,
}

/// Lambda over the midline fibers of one cut.
pub struct LambdaProfile {
    pub z: f64,
    pub resultants: CutResultants,
    /// Denominator floor: max(0.02 max|sigma_bar|, 1e4 Pa).
    pub floor: f64,
    pub samples: Vec<FiberSample>,
}

/// Extreme lambda values of one plate, over defined samples only.
#[derive(Clone, Copy, Debug)]
pub struct PlateExtrema {
    pub max_lambda: f64,
    pub min_lambda: f64,
    pub x_at_max: f64,
}

/// Samples `field` along the section midlines and forms lambda fiber by
/// fiber. The cross-section must describe the same station the cut slices.
pub fn lambda_profile(
    cut: &SectionCut,
    field: &StressField,
    section: &CrossSection,
) -> Result<LambdaProfile, ShearLagError> {
    let rs = cut.resultants(field);
    let mut raw = Vec::new();
    for ml in &section.midlines {
        for &[x, y] in &ml.points {
            let sigma = cut.axial_stress_at(field, x, y)?;
            let sigma_bar = cut.beam_stress(&rs, y);
            raw.push((ml.plate, x, y, sigma, sigma_bar));
        }
    }
    let max_bar = raw.iter().fold(0.0f64, |acc, r| acc.max(r.4.abs()));
    let floor = (0.02 * max_bar).max(1e4);
    let samples = raw
        .into_iter()
        .map(|(plate, x, y, sigma, sigma_bar)| {
            let defined = sigma_bar.abs() >= floor;
            let denom = if defined { sigma_bar } else { sigma_bar.signum() * floor };
            FiberSample { plate, x, y, sigma, sigma_bar, lambda: sigma / denom, defined }
        })
        .collect();
    Ok(LambdaProfile { z: cut.z, resultants: rs, floor, samples })
}

impl LambdaProfile {
    /// Lambda extremes of one plate; None when no sample of the plate is
    /// defined.
    pub fn plate_extrema(&self, plate: PlateTag) -> Option<PlateExtrema> {
        let mut out: Option<PlateExtrema> = None;
        for s in self.samples.iter().filter(|s| s.plate == plate && s.defined) {
            let e = out.get_or_insert(PlateExtrema {
                max_lambda: s.lambda,
                min_lambda: s.lambda,
                x_at_max: s.x,
            });
            if s.lambda > e.max_lambda {
                e.max_lambda = s.lambda;
                e.x_at_max = s.x;
            }
            e.min_lambda = e.min_lambda.min(s.lambda);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Thin-walled analytic model
// ---------------------------------------------------------------------------

/// Straight midline strip of the thin-walled section.
#[derive(Clone, Copy)]
enum Strip {
    /// Horizontal plate between the web midlines, at height `y`.
    Flange { y: f64, t: f64 },
    /// Vertical web spanning `y0..y1`.
    Web { y0: f64, y1: f64, t: f64 },
    /// Tapered overhang from the web midline outward; `side` is +-1.
    Cant,
}

/// Point sample on a strip: position, thickness, raw warping value and its
/// transverse derivative.
#[derive(Clone, Copy)]
struct StripSample {
    y: f64,
    t: f64,
    omega: f64,
    domega_dx: f64,
}

/// Warping shear-lag model of a single-cell box with side cantilevers.
///
/// The assumed longitudinal warping is `omega = lever * s(x)` with
/// `s = 1 - (|x|/b)^3` between the web midlines, `s = (xh/b_cant)^3` on the
/// overhangs and zero on the webs, where `lever = y_c - y` is the bending
/// lever arm (positive below the centroid). The intensity f(z) follows the
/// beam by minimizing membrane plus shear energy, which yields
/// `f'' - k^2 f = k1 Q(z)` with natural conditions `f'(0) = f'(l) = 0` on a
/// simply supported span, and `sigma = M y / I + E f' omega_bar` with
/// `omega_bar` the warping made orthogonal to stretch and bending. The
/// moment-proportional normalization of f is the classic minimum-energy one;
/// alternative normalizations rescale f and omega_bar jointly and leave the
/// stress unchanged.
pub struct ReissnerParams {
    pub e: f64,
    pub g: f64,
    /// Span of the simply supported analytic beam.
    pub l: f64,
    pub area: f64,
    pub y_c: f64,
    pub i: f64,
    /// Half distance between web midlines.
    pub b: f64,
    /// Overhang length measured from the web midline.
    pub b_cant: f64,
    /// Stretch and bending couplings removed from the warping.
    pub mu0: f64,
    pub mu1: f64,
    /// Warping inertia of omega_bar.
    pub j_tilde: f64,
    /// Transverse shear constant, `int (d omega / dx)^2 t ds`.
    pub j_s: f64,
    /// Decay wavenumber, `k^2 = G J_s / (E J_tilde)`.
    pub k: f64,
    /// ODE load coupling, `k1 = -C / (E I J_tilde)` with `C = int lever * omega dA`.
    pub k1: f64,
    strips: Vec<Strip>,
    /// Midline geometry for omega evaluation on the overhangs.
    cant_t0: f64,
    cant_t1: f64,
}

/// 5-point Gauss-Legendre rule on [-1, 1]; exact through degree 9.
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];
const SUBDIV: usize = 8;

impl ReissnerParams {
    /// Builds the model for one cross-section and span. `mat` supplies E and
    /// nu of the plates.
    pub fn new(sp: &SectionParams, mat: &Material, l: f64) -> Result<Self, ShearLagError> {
        let b = 0.5 * (sp.b_bot - sp.t_web);
        if b <= 0.0 {
            return Err(ShearLagError::DegenerateFlange { b });
        }
        let b_cant = sp.cant_len + 0.5 * sp.t_web;
        let y_top = -0.5 * sp.t_top;
        let y_bot = -sp.h + 0.5 * sp.t_bot;
        let mut strips = vec![
            Strip::Flange { y: y_top, t: sp.t_top },
            Strip::Flange { y: y_bot, t: sp.t_bot },
            Strip::Web { y0: y_bot, y1: y_top, t: sp.t_web },
            Strip::Web { y0: y_bot, y1: y_top, t: sp.t_web },
        ];
        if sp.cant_len > 0.0 {
            // Two overhangs, identical by symmetry.
            strips.push(Strip::Cant);
            strips.push(Strip::Cant);
        }
        let mut model = ReissnerParams {
            e: mat.e,
            g: mat.e / (2.0 * (1.0 + mat.nu)),
            l,
            area: 0.0,
            y_c: 0.0,
            i: 0.0,
            b,
            b_cant,
            mu0: 0.0,
            mu1: 0.0,
            j_tilde: 0.0,
            j_s: 0.0,
            k: 0.0,
            k1: 0.0,
            strips,
            cant_t0: sp.t_top,
            cant_t1: sp.t_cant_end,
        };
        // Pass 1: area and centroid.
        let (mut area, mut s_y) = (0.0, 0.0);
        model.for_each_sample(0.0, |s, w| {
            area += w;
            s_y += s.y * w;
        });
        model.area = area;
        model.y_c = s_y / area;
        // Pass 2: bending and warping integrals about the centroid.
        let y_c = model.y_c;
        let (mut i, mut b_int, mut c_int, mut j_omega, mut j_s) = (0.0, 0.0, 0.0, 0.0, 0.0);
        model.for_each_sample(y_c, |s, w| {
            let lever = y_c - s.y;
            i += lever * lever * w;
            b_int += s.omega * w;
            c_int += lever * s.omega * w;
            j_omega += s.omega * s.omega * w;
            j_s += s.domega_dx * s.domega_dx * w;
        });
        model.i = i;
        model.mu0 = b_int / area;
        model.mu1 = c_int / i;
        model.j_tilde = j_omega - b_int * b_int / area - c_int * c_int / i;
        model.j_s = j_s;
        model.k = (model.g * model.j_s / (model.e * model.j_tilde)).sqrt();
        model.k1 = -c_int / (model.e * i * model.j_tilde);
        Ok(model)
    }

    /// Integrates over all strips; `f` receives each sample and its weight
    /// `t * gauss_w * jacobian`. Raw omega inside the samples uses the given
    /// centroid (zero on the first pass, when it is not yet known).
    fn for_each_sample(&self, y_c: f64, mut f: impl FnMut(StripSample, f64)) {
        for strip in &self.strips {
            for sub in 0..SUBDIV {
                for (gx, gw) in GL_X.iter().zip(GL_W) {
                    // Map the rule to the sub-interval of the unit parameter.
                    let s = (sub as f64 + 0.5 + 0.5 * gx) / SUBDIV as f64;
                    let sample = self.strip_sample(strip, s, y_c);
                    let jac = self.strip_len(strip) / SUBDIV as f64;
                    f(sample, sample.t * 0.5 * gw * jac);
                }
            }
        }
    }

    fn strip_len(&self, strip: &Strip) -> f64 {
        match strip {
            Strip::Flange { .. } => 2.0 * self.b,
            Strip::Web { y0, y1, .. } => y1 - y0,
            Strip::Cant => self.b_cant,
        }
    }

    fn strip_sample(&self, strip: &Strip, s: f64, y_c: f64) -> StripSample {
        match *strip {
            Strip::Flange { y, t } => {
                let x = -self.b + 2.0 * self.b * s;
                let lever = y_c - y;
                let u = x / self.b;
                StripSample {
                    y,
                    t,
                    omega: lever * (1.0 - (u.abs()).powi(3)),
                    domega_dx: lever * (-3.0 * u * u * u.signum() / self.b),
                }
            }
            Strip::Web { y0, y1, t } => StripSample {
                y: y0 + (y1 - y0) * s,
                t,
                omega: 0.0,
                domega_dx: 0.0,
            },
            Strip::Cant => {
                let xh = self.b_cant * s;
                let t = self.cant_t0 + (self.cant_t1 - self.cant_t0) * s;
                let y = -0.5 * t;
                let lever = y_c - y;
                let dlever_dx = 0.5 * (self.cant_t1 - self.cant_t0) / self.b_cant;
                let u = xh / self.b_cant;
                StripSample {
                    y,
                    t,
                    omega: lever * u * u * u,
                    domega_dx: dlever_dx * u * u * u + lever * 3.0 * u * u / self.b_cant,
                }
            }
        }
    }

    /// Orthogonalized warping at a fiber identified by its plate and
    /// position. Web fibers warp only through the removed couplings.
    pub fn omega_bar(&self, plate: PlateTag, x: f64, y: f64) -> f64 {
        let lever = self.y_c - y;
        let shape = match plate {
            PlateTag::WebLeft | PlateTag::WebRight => 0.0,
            PlateTag::Top | PlateTag::Bottom => {
                let u = x.abs() / self.b;
                if u <= 1.0 {
                    1.0 - u * u * u
                } else if plate == PlateTag::Top && self.b_cant > 0.0 {
                    ((x.abs() - self.b) / self.b_cant).powi(3)
                } else {
                    // Bottom fibers over the web outer half; keep the flange
                    // law's smooth continuation.
                    1.0 - u * u * u
                }
            }
            PlateTag::CantileverLeft | PlateTag::CantileverRight => {
                let u = ((x.abs() - self.b) / self.b_cant).clamp(0.0, 1.0);
                u * u * u
            }
        };
        lever * shape - self.mu0 - self.mu1 * lever
    }

    fn check_station(&self, z: f64) -> Result<(), ShearLagError> {
        if !(0.0..=self.l).contains(&z) {
            return Err(ShearLagError::StationOffSpan { z, l: self.l });
        }
        Ok(())
    }

    /// Stable form of `cosh(kz) - 1 + (1 - cosh(kl)) sinh(kz) / sinh(kl)`:
    /// exactly zero at the supports and overflow-free for any kl.
    fn bracket(k: f64, l: f64, z: f64) -> f64 {
        ((-k * z).exp() + (-k * (l - z)).exp()) / (1.0 + (-k * l).exp()) - 1.0
    }

    /// Axial stress under a uniform line load `q` (N/m, sagging positive)
    /// on the simply supported span, at fiber (plate, x, y) and station z.
    pub fn stress_uniform(
        &self,
        q: f64,
        plate: PlateTag,
        x: f64,
        y: f64,
        z: f64,
    ) -> Result<f64, ShearLagError> {
        self.check_station(z)?;
        let lever = self.y_c - y;
        let beam = q * z * (self.l - z) / (2.0 * self.i) * lever;
        let corr = -(self.e * self.k1 * q / (self.k * self.k))
            * Self::bracket(self.k, self.l, z)
            * self.omega_bar(plate, x, y);
        Ok(beam + corr)
    }

    /// Axial stress under a midspan point load `p` (N, sagging positive),
    /// four-term sine series for the warping correction. Stations past
    /// midspan evaluate mirrored, so the symmetry is exact.
    pub fn stress_point(
        &self,
        p: f64,
        plate: PlateTag,
        x: f64,
        y: f64,
        z: f64,
    ) -> Result<f64, ShearLagError> {
        self.check_station(z)?;
        let ze = z.min(self.l - z);
        let lever = self.y_c - y;
        let beam = 0.5 * p * ze * lever / self.i;
        let kl2 = (self.k * self.l) * (self.k * self.l);
        let mut series = 0.0;
        let mut sign = 1.0;
        for j in 0..4 {
            let m = (2 * j + 1) as f64;
            series += sign * (m * PI * ze / self.l).sin() / (m * m * PI * PI + kl2);
            sign = -sign;
        }
        let corr = 2.0 * self.e * self.k1 * p * self.l * self.omega_bar(plate, x, y) * series;
        Ok(beam + corr)
    }

    /// Beam-theory stress alone (no warping correction), for limits and
    /// comparisons.
    pub fn beam_stress_uniform(&self, q: f64, y: f64, z: f64) -> f64 {
        q * z * (self.l - z) / (2.0 * self.i) * (self.y_c - y)
    }

    /// Beam-theory stress of the midspan point load alone.
    pub fn beam_stress_point(&self, p: f64, y: f64, z: f64) -> f64 {
        0.5 * p * z.min(self.l - z) * (self.y_c - y) / self.i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::girder::{build_prism, GirderResolution};
    use crate::mesh::sweep_template;
    use crate::section::{build_cross_section, midspan_params, root_params};

    fn concrete() -> Material {
        Material { e: 3.5e10, nu: 0.2, rho: 2500.0, alpha: 1e-5 }
    }

    fn model(l: f64) -> ReissnerParams {
        ReissnerParams::new(&midspan_params(), &concrete(), l).unwrap()
    }

    #[test]
    fn warping_is_orthogonal_to_stretch_and_bending() {
        for sp in [midspan_params(), root_params()] {
            let m = ReissnerParams::new(&sp, &concrete(), 60.0).unwrap();
            let (mut int_w, mut int_wy, mut int_ww) = (0.0, 0.0, 0.0);
            let (mut w_max, mut lever_max) = (0.0f64, 0.0f64);
            m.for_each_sample(m.y_c, |s, w| {
                let lever = m.y_c - s.y;
                let wb = s.omega - m.mu0 - m.mu1 * lever;
                int_w += wb * w;
                int_wy += wb * lever * w;
                int_ww += wb * wb * w;
                w_max = w_max.max(wb.abs());
                lever_max = lever_max.max(lever.abs());
            });
            let scale0 = m.area * w_max;
            assert!(int_w.abs() <= 1e-10 * scale0, "axial coupling {int_w}");
            assert!(
                int_wy.abs() <= 1e-10 * scale0 * lever_max,
                "bending coupling {int_wy}"
            );
            assert!(
                (int_ww - m.j_tilde).abs() <= 1e-10 * m.j_tilde,
                "direct warping inertia {int_ww} vs {}",
                m.j_tilde
            );
            assert!(m.area > 0.0 && m.i > 0.0 && m.j_tilde > 0.0 && m.j_s > 0.0);
            assert!(m.k > 0.0, "decay rate {}", m.k);
            assert!(m.k1 < 0.0, "load coupling {}", m.k1);
            assert!(m.mu1 > 0.0, "bending coupling ratio {}", m.mu1);
        }
    }

    #[test]
    fn analytic_stress_vanishes_at_both_supports_exactly() {
        let sp = midspan_params();
        let m = model(30.0);
        let fibers = [
            (PlateTag::Top, 0.0, -0.5 * sp.t_top),
            (PlateTag::Top, m.b, -0.5 * sp.t_top),
            (PlateTag::Bottom, 0.0, -sp.h + 0.5 * sp.t_bot),
            (PlateTag::CantileverRight, 0.5 * sp.b_top, -0.5 * sp.t_cant_end),
        ];
        for (plate, x, y) in fibers {
            for z in [0.0, m.l] {
                assert_eq!(m.stress_uniform(1e5, plate, x, y, z).unwrap(), 0.0);
                assert_eq!(m.stress_point(2e6, plate, x, y, z).unwrap(), 0.0);
            }
        }
        assert!(matches!(
            m.stress_uniform(1e5, PlateTag::Top, 0.0, -0.15, -0.01),
            Err(ShearLagError::StationOffSpan { .. })
        ));
        assert!(matches!(
            m.stress_point(1e5, PlateTag::Top, 0.0, -0.15, m.l + 0.01),
            Err(ShearLagError::StationOffSpan { .. })
        ));
    }

    #[test]
    fn uniform_bracket_is_symmetric_stable_and_matches_the_cosh_form() {
        let m = model(30.0);
        let sp = midspan_params();
        let y_b = -sp.h + 0.5 * sp.t_bot;
        let kl = m.k * m.l;
        assert!(kl > 3.0 && kl < 30.0, "test section kl = {kl}");
        for z in [0.3, 4.2, 7.5, 11.1, 15.0] {
            let a = m.stress_uniform(1e5, PlateTag::Bottom, m.b, y_b, z).unwrap();
            let b = m
                .stress_uniform(1e5, PlateTag::Bottom, m.b, y_b, m.l - z)
                .unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            let naive = (m.k * z).cosh() - 1.0
                + (1.0 - kl.cosh()) / kl.sinh() * (m.k * z).sinh();
            let stable = ReissnerParams::bracket(m.k, m.l, z);
            assert!(
                (naive - stable).abs() <= 1e-9 * naive.abs().max(1e-12),
                "bracket at z = {z}: naive {naive} vs stable {stable}"
            );
        }
        // The naive form overflows past kl ~ 710; the stable one cannot.
        let extreme = ReissnerParams::bracket(100.0, 50.0, 25.0);
        assert!(extreme.is_finite());
        assert!((extreme + 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_load_stress_mirrors_about_midspan_exactly() {
        let sp = midspan_params();
        let m = model(30.0);
        let y_b = -sp.h + 0.5 * sp.t_bot;
        for z in [4.0, 9.0, 13.7] {
            let a = m.stress_point(2e6, PlateTag::Bottom, 0.0, y_b, z).unwrap();
            let b = m
                .stress_point(2e6, PlateTag::Bottom, 0.0, y_b, m.l - z)
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn junction_fibers_lag_and_centerline_fibers_relax() {
        let sp = midspan_params();
        let m = model(30.0);
        let y_t = -0.5 * sp.t_top;
        let y_b = -sp.h + 0.5 * sp.t_bot;
        let (z, q, p) = (15.0, 1.0e5, 2.0e6);
        let lam_u = |plate, x: f64, y: f64| {
            m.stress_uniform(q, plate, x, y, z).unwrap() / m.beam_stress_uniform(q, y, z)
        };
        let lam_p = |plate, x: f64, y: f64| {
            let beam = 0.5 * p * z.min(m.l - z) * (m.y_c - y) / m.i;
            m.stress_point(p, plate, x, y, z).unwrap() / beam
        };
        for lam in [&lam_u as &dyn Fn(PlateTag, f64, f64) -> f64, &lam_p] {
            let top_j = lam(PlateTag::Top, m.b, y_t);
            let top_c = lam(PlateTag::Top, 0.0, y_t);
            let bot_j = lam(PlateTag::Bottom, m.b, y_b);
            let bot_c = lam(PlateTag::Bottom, 0.0, y_b);
            let cant_tip = lam(PlateTag::CantileverRight, 0.5 * sp.b_top, -0.5 * sp.t_cant_end);
            assert!(top_j > 1.0 && top_j < 1.8, "top junction lambda {top_j}");
            assert!(bot_j > 1.0 && bot_j < 1.8, "bottom junction lambda {bot_j}");
            assert!(top_c < 1.0 && top_c > 0.2, "top centerline lambda {top_c}");
            assert!(bot_c < 1.0 && bot_c > 0.2, "bottom centerline lambda {bot_c}");
            assert!(cant_tip < 1.0, "cantilever tip lambda {cant_tip}");
        }
    }

    #[test]
    fn correction_vanishes_in_the_narrow_flange_limit() {
        let mut ratios = Vec::new();
        for w in [4.0, 2.0, 1.4] {
            let sp = SectionParams::new(w, w, 3.5, 0.3, 0.32, 0.5, 0.2);
            sp.validate().unwrap();
            let m = ReissnerParams::new(&sp, &concrete(), 30.0).unwrap();
            let y_b = -sp.h + 0.5 * sp.t_bot;
            let full = m
                .stress_uniform(1e5, PlateTag::Bottom, m.b, y_b, 15.0)
                .unwrap();
            let beam = m.beam_stress_uniform(1e5, y_b, 15.0);
            ratios.push(((full - beam) / beam).abs());
        }
        assert!(ratios[1] < ratios[0] && ratios[2] < ratios[1], "{ratios:?}");
        assert!(ratios[2] < 0.02, "residual correction {}", ratios[2]);
    }

    #[test]
    fn wider_flanges_slow_the_warping_decay() {
        let narrow = model(60.0);
        let wide_sp = SectionParams::new(45.0, 22.0, 3.5, 0.3, 0.32, 0.5, 0.2);
        wide_sp.validate().unwrap();
        let wide = ReissnerParams::new(&wide_sp, &concrete(), 60.0).unwrap();
        assert!(
            wide.k < narrow.k,
            "k wide {} should undercut k narrow {}",
            wide.k,
            narrow.k
        );
    }

    #[test]
    fn degenerate_flange_is_rejected() {
        let mut sp = midspan_params();
        sp.t_web = sp.b_bot;
        assert!(matches!(
            ReissnerParams::new(&sp, &concrete(), 30.0),
            Err(ShearLagError::DegenerateFlange { .. })
        ));
    }

    /// Hat-function minimizer of the warping energy functional
    /// `int E J~ f'^2/2 + G J_s f^2/2 + (C/I) M f' dz` with free ends.
    /// Its stationarity condition is the production ODE with its natural
    /// boundary conditions, derived independently of the closed forms.
    fn ritz_f(m: &ReissnerParams, n: usize, moment: impl Fn(f64) -> f64) -> Vec<f64> {
        let h = m.l / n as f64;
        let ej = m.e * m.j_tilde;
        let gj = m.g * m.j_s;
        // C recovered from the stored coupling: k1 = -C/(E I J~).
        let c_over_i = -m.k1 * m.e * m.j_tilde;
        let mut diag = vec![0.0; n + 1];
        let mut off = vec![0.0; n];
        let mut rhs = vec![0.0; n + 1];
        for e in 0..n {
            let stiff = ej / h;
            let mass = gj * h / 6.0;
            diag[e] += stiff + 2.0 * mass;
            diag[e + 1] += stiff + 2.0 * mass;
            off[e] = -stiff + mass;
            let (z0, z1) = (e as f64 * h, (e + 1) as f64 * h);
            let int_m = (moment(z0) + 4.0 * moment(0.5 * (z0 + z1)) + moment(z1)) * h / 6.0;
            rhs[e] += c_over_i * int_m / h;
            rhs[e + 1] -= c_over_i * int_m / h;
        }
        // Thomas elimination on the symmetric tridiagonal system.
        let mut c_star = vec![0.0; n];
        let mut d_star = vec![0.0; n + 1];
        c_star[0] = off[0] / diag[0];
        d_star[0] = rhs[0] / diag[0];
        for i in 1..=n {
            let den = diag[i] - off[i - 1] * c_star[i - 1];
            if i < n {
                c_star[i] = off[i] / den;
            }
            d_star[i] = (rhs[i] - off[i - 1] * d_star[i - 1]) / den;
        }
        let mut f = vec![0.0; n + 1];
        f[n] = d_star[n];
        for i in (0..n).rev() {
            f[i] = d_star[i] - c_star[i] * f[i + 1];
        }
        f
    }

    #[test]
    fn ritz_minimization_reproduces_the_uniform_closed_form() {
        let sp = midspan_params();
        let m = model(30.0);
        let q = 1.0e5;
        let n = 1500;
        let f = ritz_f(&m, n, |z| 0.5 * q * z * (m.l - z));
        let y_b = -sp.h + 0.5 * sp.t_bot;
        let wb = m.omega_bar(PlateTag::Bottom, m.b, y_b);
        let h = m.l / n as f64;
        let mut peak = 0.0f64;
        let mut worst = 0.0f64;
        for e in 0..n {
            let zm = (e as f64 + 0.5) * h;
            let closed = m.stress_uniform(q, PlateTag::Bottom, m.b, y_b, zm).unwrap()
                - m.beam_stress_uniform(q, y_b, zm);
            let ritz = m.e * (f[e + 1] - f[e]) / h * wb;
            peak = peak.max(closed.abs());
            worst = worst.max((ritz - closed).abs());
        }
        assert!(peak > 0.0);
        assert!(
            worst <= 5e-3 * peak,
            "ritz deviation {worst} vs peak correction {peak}"
        );
    }

    /// Raw modal sum for the point-load warping stress: the cosine expansion
    /// of the shear force, mode by mode, before collapsing into the four
    /// displayed coefficients.
    fn sigma_w_modal(m: &ReissnerParams, p: f64, wb: f64, z: f64, terms: usize) -> f64 {
        let kl2 = (m.k * m.l) * (m.k * m.l);
        let mut s = 0.0;
        for j in 0..terms {
            let mm = (2 * j + 1) as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let q_m = 2.0 * p / (mm * PI) * sign;
            let b_m = -m.k1 * q_m * m.l * m.l / (mm * mm * PI * PI + kl2);
            s += m.e * wb * b_m * (-(mm * PI / m.l)) * (mm * PI * z / m.l).sin();
        }
        s
    }

    #[test]
    fn ritz_minimization_reproduces_the_point_load_series() {
        let sp = midspan_params();
        let m = model(30.0);
        let p = 2.0e6;
        let n = 1500;
        let f = ritz_f(&m, n, |z| 0.5 * p * z.min(m.l - z));
        let y_b = -sp.h + 0.5 * sp.t_bot;
        let wb = m.omega_bar(PlateTag::Bottom, m.b, y_b);
        let h = m.l / n as f64;
        let mut peak = 0.0f64;
        let mut worst = 0.0f64;
        for e in 0..n {
            let zm = (e as f64 + 0.5) * h;
            // The shear jump at midspan kinks f''; skip the adjacent cells
            // where the linear elements cannot track it.
            if (zm - 0.5 * m.l).abs() < 2.0 * h {
                continue;
            }
            let series = sigma_w_modal(&m, p, wb, zm, 400);
            let ritz = m.e * (f[e + 1] - f[e]) / h * wb;
            peak = peak.max(series.abs());
            worst = worst.max((ritz - series).abs());
        }
        assert!(peak > 0.0);
        assert!(
            worst <= 5e-3 * peak,
            "ritz deviation {worst} vs peak correction {peak}"
        );
    }

    #[test]
    fn displayed_four_term_form_equals_the_modal_sum() {
        let sp = midspan_params();
        let m = model(30.0);
        let p = 2.0e6;
        let y_t = -0.5 * sp.t_top;
        for (plate, x, y) in [
            (PlateTag::Top, 0.0, y_t),
            (PlateTag::Top, m.b, y_t),
            (PlateTag::Bottom, 2.0, -sp.h + 0.5 * sp.t_bot),
        ] {
            let wb = m.omega_bar(plate, x, y);
            for z in [3.0f64, 9.0, 15.0] {
                let beam = 0.5 * p * z.min(m.l - z) * (m.y_c - y) / m.i;
                let corr = m.stress_point(p, plate, x, y, z).unwrap() - beam;
                let modal = sigma_w_modal(&m, p, wb, z, 4);
                assert!(
                    (corr - modal).abs() <= 1e-12 * modal.abs().max(1e-9),
                    "four-term {corr} vs modal {modal} at z = {z}"
                );
            }
        }
    }

    fn rect_prism() -> Mesh {
        let quads = [[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]];
        sweep_template(
            9,
            &quads,
            &[0.0, 0.4, 1.0],
            |p, _z| [0.5 * (p % 3) as f64, 0.3 * (p / 3) as f64],
            |_q, _s| Some((0, 0)),
        )
        .unwrap()
        .mesh
    }

    fn manufactured(mesh: &Mesh, f: impl Fn(f64, f64, f64) -> f64) -> StressField {
        let mut field = StressField::zeros(mesh);
        for e in 0..mesh.hexes.len() {
            let c = mesh.hex_coords(e);
            for (k, gp) in hex8::gauss_points().iter().enumerate() {
                let n = hex8::shape(gp[0], gp[1], gp[2]);
                let mut p = [0.0; 3];
                for a in 0..8 {
                    for d in 0..3 {
                        p[d] += n[a] * c[a][d];
                    }
                }
                field.hex_gauss[e][k][2] = f(p[0], p[1], p[2]);
            }
        }
        field
    }

    #[test]
    fn cut_recovers_rectangle_properties_and_linear_resultants() {
        let mesh = rect_prism();
        let cut = section_cut(&mesh, 0..mesh.hexes.len(), 0.7).unwrap();
        assert_eq!(cut.len(), 4);
        assert!((cut.area - 0.6).abs() < 1e-12);
        assert!((cut.y_c - 0.3).abs() < 1e-12);
        assert!((cut.i - 1.0 * 0.6f64.powi(3) / 12.0).abs() < 1e-12);
        let (c0, c1) = (2.0e6, 3.0e6);
        let field = manufactured(&mesh, |_x, y, _z| c0 + c1 * y);
        let rs = cut.resultants(&field);
        let n_want = c0 * 0.6 + c1 * 0.3 * 0.6;
        let m_want = c1 * cut.i;
        assert!((rs.n - n_want).abs() <= 1e-12 * n_want.abs());
        assert!((rs.m - m_want).abs() <= 1e-12 * m_want.abs());
        // A beam-consistent field reproduces itself through the resultants.
        for y in [0.05, 0.3, 0.55] {
            let sb = cut.beam_stress(&rs, y);
            assert!((sb - (c0 + c1 * y)).abs() <= 1e-9 * (c0 + c1 * y).abs());
        }
        // The cut quadrature integrates its own beam stress back to (N, M).
        let (mut int_n, mut int_m) = (0.0, 0.0);
        for sl in &cut.slices {
            for p in &sl.points {
                let sb = cut.beam_stress(&rs, p.y);
                int_n += sb * p.w;
                int_m += sb * (p.y - cut.y_c) * p.w;
            }
        }
        assert!((int_n - rs.n).abs() <= 1e-10 * rs.n.abs());
        assert!((int_m - rs.m).abs() <= 1e-10 * rs.m.abs());
    }

    #[test]
    fn cut_evaluates_affine_fields_pointwise() {
        let mesh = rect_prism();
        let f = |x: f64, y: f64, z: f64| 1.0e6 * (1.0 + 0.5 * x - 0.8 * y + 0.3 * z);
        let field = manufactured(&mesh, f);
        let cut = section_cut(&mesh, 0..mesh.hexes.len(), 0.55).unwrap();
        for (x, y) in [(0.1, 0.1), (0.62, 0.3), (0.98, 0.58), (0.5, 0.0)] {
            let got = cut.axial_stress_at(&field, x, y).unwrap();
            let want = f(x, y, 0.55);
            assert!(
                (got - want).abs() <= 1e-9 * want.abs(),
                "sigma at ({x}, {y}): {got} vs {want}"
            );
        }
        assert!(matches!(
            cut.axial_stress_at(&field, 5.0, 0.1),
            Err(ShearLagError::FiberOutsideCut { .. })
        ));
    }

    #[test]
    fn cut_outside_the_sweep_is_rejected() {
        let mesh = rect_prism();
        assert!(matches!(
            section_cut(&mesh, 0..mesh.hexes.len(), 2.0),
            Err(ShearLagError::EmptyCut { .. })
        ));
        assert!(matches!(
            section_cut(&mesh, std::iter::empty(), 0.5),
            Err(ShearLagError::EmptyCut { .. })
        ));
    }

    #[test]
    fn lambda_is_unity_for_a_beam_consistent_field_on_the_box() {
        let sp = midspan_params();
        let prism = build_prism(&sp, 12.0, 4, GirderResolution::default()).unwrap();
        let cs = build_cross_section(&sp).unwrap();
        // Pure-bending-plus-axial field: sigma depends on y alone, so every
        // defined fiber must come out at lambda = 1. The zero crossing is
        // placed on a web midline sample so the floor logic gets exercised.
        let field = manufactured(&prism.mesh, |_x, y, _z| 4.35e6 + 2.5e6 * y);
        let cut = section_cut(&prism.mesh, 0..prism.mesh.hexes.len(), 5.25).unwrap();
        let profile = lambda_profile(&cut, &field, &cs).unwrap();
        assert!(!profile.samples.is_empty());
        for s in &profile.samples {
            assert!(
                (s.sigma - (4.35e6 + 2.5e6 * s.y)).abs() <= 1e-9 * s.sigma.abs().max(1e4),
                "fiber stress off at ({}, {})",
                s.x,
                s.y
            );
            if s.defined {
                assert!(
                    (s.lambda - 1.0).abs() <= 1e-9,
                    "lambda {} at ({}, {})",
                    s.lambda,
                    s.x,
                    s.y
                );
            }
        }
        // The neutral-axis crossing on the webs must be flagged, not reported.
        let undefined = profile.samples.iter().filter(|s| !s.defined).count();
        assert!(undefined > 0);
        for s in profile.samples.iter().filter(|s| !s.defined) {
            assert!(matches!(s.plate, PlateTag::WebLeft | PlateTag::WebRight));
        }
        // Extrema bookkeeping picks defined fibers only.
        let top = profile.plate_extrema(PlateTag::Top).unwrap();
        assert!((top.max_lambda - 1.0).abs() <= 1e-9);
        assert!((top.min_lambda - 1.0).abs() <= 1e-9);
    }
}
