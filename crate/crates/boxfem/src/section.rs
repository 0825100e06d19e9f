//! Parametric single-cell box cross-sections and exact area properties.
//!
//! A section is described by seven plate dimensions ([`SectionParams`]) and
//! realised as two closed polygons (outer boundary and inner void) plus
//! per-plate mid-thickness sample curves. Area, centroid and second moment
//! come from exact Green's-theorem integrals over the polygons, so they are
//! consistent to machine precision with any mesh that tiles the same
//! polygons. The depth law along the girder ([`HeightProfile`]) is a power
//! haunch between the root and mid-span sections.
//!
//! Section-local coordinates: `x` transverse with the centreline at 0, `y`
//! vertical measured up from the bottom fibre (deck surface at `y = h`).

use thiserror::Error;

/// Plates making up a single-cell box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlateTag {
    /// Deck plate between the webs.
    Top,
    /// Bottom plate between the webs.
    Bottom,
    /// Web on the negative-`x` side.
    WebLeft,
    /// Web on the positive-`x` side.
    WebRight,
    /// Deck overhang on the negative-`x` side.
    CantileverLeft,
    /// Deck overhang on the positive-`x` side.
    CantileverRight,
}

impl PlateTag {
    /// Stable lower-case name used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            PlateTag::Top => "top",
            PlateTag::Bottom => "bottom",
            PlateTag::WebLeft => "web_left",
            PlateTag::WebRight => "web_right",
            PlateTag::CantileverLeft => "cantilever_left",
            PlateTag::CantileverRight => "cantilever_right",
        }
    }
}

/// Plate dimensions of one single-cell box section, all in metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionParams {
    /// Full deck width including both cantilevers.
    pub b_top: f64,
    /// Width over the web outer faces (also the bottom plate width).
    pub b_bot: f64,
    /// Section depth, bottom fibre to deck surface.
    pub h: f64,
    /// Deck plate thickness between the webs.
    pub t_top: f64,
    /// Bottom plate thickness.
    pub t_bot: f64,
    /// Thickness of each (vertical) web.
    pub t_web: f64,
    /// Cantilever thickness at the free tip.
    pub t_cant_end: f64,
    /// Cantilever length per side, `(b_top - b_bot) / 2`.
    pub cant_len: f64,
}

impl SectionParams {
    /// Builds params with the cantilever length derived from the two widths.
    pub fn new(
        b_top: f64,
        b_bot: f64,
        h: f64,
        t_top: f64,
        t_bot: f64,
        t_web: f64,
        t_cant_end: f64,
    ) -> Self {
        SectionParams {
            b_top,
            b_bot,
            h,
            t_top,
            t_bot,
            t_web,
            t_cant_end,
            cant_len: 0.5 * (b_top - b_bot),
        }
    }

    /// Checks geometric feasibility; the error names the violated constraint.
    pub fn validate(&self) -> Result<(), SectionError> {
        let dims = [
            ("b_top", self.b_top),
            ("b_bot", self.b_bot),
            ("h", self.h),
            ("t_top", self.t_top),
            ("t_bot", self.t_bot),
            ("t_web", self.t_web),
            ("t_cant_end", self.t_cant_end),
        ];
        for (name, value) in dims {
            if !(value > 0.0) || !value.is_finite() {
                return Err(SectionError::NonPositive { name, value });
            }
        }
        if self.b_top < self.b_bot {
            return Err(SectionError::TopNarrowerThanBottom {
                b_top: self.b_top,
                b_bot: self.b_bot,
            });
        }
        if (self.cant_len - 0.5 * (self.b_top - self.b_bot)).abs() > 1e-9 * self.b_top {
            return Err(SectionError::CantileverMismatch {
                cant_len: self.cant_len,
                expected: 0.5 * (self.b_top - self.b_bot),
            });
        }
        if self.t_top + self.t_bot >= self.h {
            return Err(SectionError::DegenerateVoid {
                t_sum: self.t_top + self.t_bot,
                h: self.h,
            });
        }
        if 2.0 * self.t_web >= self.b_bot {
            return Err(SectionError::SolidSection {
                t_web: self.t_web,
                b_bot: self.b_bot,
            });
        }
        if self.cant_len > 0.0 && self.t_cant_end > self.t_top {
            return Err(SectionError::CantileverThickerThanDeck {
                t_cant_end: self.t_cant_end,
                t_top: self.t_top,
            });
        }
        Ok(())
    }
}

/// Cross-section construction and lookup failures.
#[derive(Debug, Error)]
pub enum SectionError {
    #[error("non-positive dimension {name} = {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("deck width b_top = {b_top} is narrower than bottom width b_bot = {b_bot}")]
    TopNarrowerThanBottom { b_top: f64, b_bot: f64 },
    #[error("cant_len = {cant_len} disagrees with (b_top - b_bot)/2 = {expected}")]
    CantileverMismatch { cant_len: f64, expected: f64 },
    #[error("degenerate void: t_top + t_bot = {t_sum} must stay below the depth h = {h}")]
    DegenerateVoid { t_sum: f64, h: f64 },
    #[error(
        "void width is zero (2*t_web = {} >= b_bot = {b_bot}); solid sections are not supported",
        2.0 * t_web
    )]
    SolidSection { t_web: f64, b_bot: f64 },
    #[error("cantilever tip t_cant_end = {t_cant_end} exceeds the deck plate t_top = {t_top}")]
    CantileverThickerThanDeck { t_cant_end: f64, t_top: f64 },
    #[error("station z = {z} outside the profile range [0, {len}]")]
    StationOutOfRange { z: f64, len: f64 },
    #[error("haunch exponent {exponent} must be at least 1")]
    BadExponent { exponent: f64 },
    #[error("root section must not be shallower than mid-span (h_root {h_root} < h_mid {h_mid})")]
    RootShallower { h_root: f64, h_mid: f64 },
}

/// Mid-thickness sample curve of one plate (webs use the outer face).
#[derive(Clone, Debug)]
pub struct PlateMidline {
    pub plate: PlateTag,
    /// Sample points `[x, y]`; deck top sits at `y = 0`, the soffit at `-h`.
    pub points: Vec<[f64; 2]>,
}

/// Realised cross-section: closed polygons plus fibre sample curves.
#[derive(Clone, Debug)]
pub struct CrossSection {
    pub params: SectionParams,
    /// Outer boundary, counter-clockwise, not repeated at the end.
    pub outer: Vec<[f64; 2]>,
    /// Inner void rectangle, counter-clockwise.
    pub void: Vec<[f64; 2]>,
    pub midlines: Vec<PlateMidline>,
}

/// Samples per inner-plate midline; odd so the centreline is included.
const INNER_SAMPLES: usize = 17;
/// Samples per cantilever or web midline.
const SIDE_SAMPLES: usize = 9;

/// Builds the outer/void polygons and per-plate midlines for `params`.
pub fn build_cross_section(params: &SectionParams) -> Result<CrossSection, SectionError> {
    params.validate()?;
    let p = *params;
    let wb = 0.5 * p.b_bot;
    let wt = 0.5 * p.b_top;
    let has_cant = p.cant_len > 1e-12;

    let outer = if has_cant {
        vec![
            [-wb, -p.h],
            [wb, -p.h],
            [wb, -p.t_top],
            [wt, -p.t_cant_end],
            [wt, 0.0],
            [-wt, 0.0],
            [-wt, -p.t_cant_end],
            [-wb, -p.t_top],
        ]
    } else {
        vec![[-wb, -p.h], [wb, -p.h], [wb, 0.0], [-wb, 0.0]]
    };

    let vw = wb - p.t_web;
    let void = vec![
        [-vw, p.t_bot - p.h],
        [vw, p.t_bot - p.h],
        [vw, -p.t_top],
        [-vw, -p.t_top],
    ];

    let mut midlines = Vec::new();
    let line = |x0: f64, y0: f64, x1: f64, y1: f64, n: usize| -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                [x0 + f * (x1 - x0), y0 + f * (y1 - y0)]
            })
            .collect()
    };

    midlines.push(PlateMidline {
        plate: PlateTag::Top,
        points: line(-wb, -0.5 * p.t_top, wb, -0.5 * p.t_top, INNER_SAMPLES),
    });
    midlines.push(PlateMidline {
        plate: PlateTag::Bottom,
        points: line(-wb, 0.5 * p.t_bot - p.h, wb, 0.5 * p.t_bot - p.h, INNER_SAMPLES),
    });
    // Webs are sampled on the outer face, between the plate inner surfaces.
    midlines.push(PlateMidline {
        plate: PlateTag::WebLeft,
        points: line(-wb, p.t_bot - p.h, -wb, -p.t_top, SIDE_SAMPLES),
    });
    midlines.push(PlateMidline {
        plate: PlateTag::WebRight,
        points: line(wb, p.t_bot - p.h, wb, -p.t_top, SIDE_SAMPLES),
    });
    if has_cant {
        // Cantilever thickness tapers linearly from t_top at the web face to
        // t_cant_end at the tip; the midline follows half the local thickness.
        let cant = |sign: f64| -> Vec<[f64; 2]> {
            (0..SIDE_SAMPLES)
                .map(|i| {
                    let f = i as f64 / (SIDE_SAMPLES - 1) as f64;
                    let x = wb + f * p.cant_len;
                    let t = p.t_top + f * (p.t_cant_end - p.t_top);
                    [sign * x, -0.5 * t]
                })
                .collect()
        };
        midlines.push(PlateMidline {
            plate: PlateTag::CantileverLeft,
            points: cant(-1.0),
        });
        midlines.push(PlateMidline {
            plate: PlateTag::CantileverRight,
            points: cant(1.0),
        });
    }

    Ok(CrossSection {
        params: p,
        outer,
        void,
        midlines,
    })
}

/// Signed polygon area by the shoelace formula (positive when CCW).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    0.5 * cross_sum(poly, |_, _| 1.0)
}

/// First moment about the `y = 0` axis, `integral of y dA`.
pub fn polygon_first_moment_y(poly: &[[f64; 2]]) -> f64 {
    cross_sum(poly, |a, b| (a[1] + b[1]) / 3.0) * 0.5
}

/// Second moment about the `y = 0` axis, `integral of y^2 dA`.
pub fn polygon_second_moment_y(poly: &[[f64; 2]]) -> f64 {
    cross_sum(poly, |a, b| {
        (a[1] * a[1] + a[1] * b[1] + b[1] * b[1]) / 6.0
    }) * 0.5
}

fn cross_sum(poly: &[[f64; 2]], weight: impl Fn(&[f64; 2], &[f64; 2]) -> f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let cross = a[0] * b[1] - b[0] * a[1];
        sum += cross * weight(a, b);
    }
    sum
}

/// Exact area properties of a box section about its horizontal centroid axis.
#[derive(Clone, Copy, Debug)]
pub struct SectionProperties {
    /// Net solid area in m^2.
    pub a: f64,
    /// Centroid y in the section frame (deck top at 0, down negative), m.
    pub y_c: f64,
    /// Second moment about the centroid axis in m^4.
    pub i: f64,
    /// Deck-width-to-depth ratio `b_top / h`.
    pub ratio_top: f64,
    /// Box-width-to-depth ratio `b_bot / h`.
    pub ratio_2b_h: f64,
    /// Share of `i` carried by the top and bottom plates (own plus transfer).
    pub flange_stiffness_ratio: f64,
}

/// Integrates the outer-minus-void polygons exactly (Green's theorem).
pub fn section_properties(cs: &CrossSection) -> SectionProperties {
    let a = polygon_area(&cs.outer) - polygon_area(&cs.void);
    let s = polygon_first_moment_y(&cs.outer) - polygon_first_moment_y(&cs.void);
    let i0 = polygon_second_moment_y(&cs.outer) - polygon_second_moment_y(&cs.void);
    let y_c = s / a;
    let i = i0 - a * y_c * y_c;

    let p = &cs.params;
    let wb = 0.5 * p.b_bot;
    let wt = 0.5 * p.b_top;
    let top_region: Vec<[f64; 2]> = if p.cant_len > 1e-12 {
        vec![
            [-wb, -p.t_top],
            [wb, -p.t_top],
            [wt, -p.t_cant_end],
            [wt, 0.0],
            [-wt, 0.0],
            [-wt, -p.t_cant_end],
        ]
    } else {
        vec![[-wb, -p.t_top], [wb, -p.t_top], [wb, 0.0], [-wb, 0.0]]
    };
    let bot_region = vec![
        [-wb, -p.h],
        [wb, -p.h],
        [wb, p.t_bot - p.h],
        [-wb, p.t_bot - p.h],
    ];
    let mut i_flange = 0.0;
    for region in [&top_region, &bot_region] {
        let ra = polygon_area(region);
        let rs = polygon_first_moment_y(region);
        let ri = polygon_second_moment_y(region);
        i_flange += ri - 2.0 * y_c * rs + y_c * y_c * ra;
    }

    SectionProperties {
        a,
        y_c,
        i,
        ratio_top: p.b_top / p.h,
        ratio_2b_h: p.b_bot / p.h,
        flange_stiffness_ratio: i_flange / i,
    }
}

/// Power-haunch depth law from the root (pier face) to mid-span.
///
/// `z` is measured from the root; depth and bottom-plate thickness both
/// follow `v(z) = v_mid + (v_root - v_mid) * (1 - z / haunch_length)^exponent`
/// so the profile is flat at mid-span. Beyond the haunch both stay at the
/// mid-span values.
#[derive(Clone, Copy, Debug)]
pub struct HeightProfile {
    pub h_root: f64,
    pub h_mid: f64,
    pub haunch_length: f64,
    pub exponent: f64,
    pub t_bot_root: f64,
    pub t_bot_mid: f64,
}

impl HeightProfile {
    /// Depth and bottom-plate thickness at `z` metres from the root.
    pub fn height_at(&self, z: f64) -> Result<(f64, f64), SectionError> {
        if self.exponent < 1.0 {
            return Err(SectionError::BadExponent {
                exponent: self.exponent,
            });
        }
        if self.h_root < self.h_mid {
            return Err(SectionError::RootShallower {
                h_root: self.h_root,
                h_mid: self.h_mid,
            });
        }
        if !(0.0..=self.haunch_length).contains(&z) {
            return Err(SectionError::StationOutOfRange {
                z,
                len: self.haunch_length,
            });
        }
        let f = (1.0 - z / self.haunch_length).powf(self.exponent);
        let h = self.h_mid + (self.h_root - self.h_mid) * f;
        let t_bot = self.t_bot_mid + (self.t_bot_root - self.t_bot_mid) * f;
        Ok((h, t_bot))
    }
}

/// Planform ratios `(span / b_bot, b_bot / h)` used to place a design in the
/// slenderness parameter space.
pub fn planform_ratios(span: f64, params: &SectionParams) -> (f64, f64) {
    (span / params.b_bot, params.b_bot / params.h)
}

/// Mid-span section of the reference three-span girder (test fixture).
#[cfg(test)]
pub(crate) fn midspan_params() -> SectionParams {
    SectionParams::new(22.5, 11.0, 3.5, 0.30, 0.32, 0.50, 0.20)
}

/// Root section over the pier of the reference girder (test fixture).
#[cfg(test)]
pub(crate) fn root_params() -> SectionParams {
    SectionParams::new(22.5, 11.0, 12.5, 0.50, 1.50, 1.20, 0.20)
}
