//! Paraxial ray-transfer (ABCD) algebra for cat's-eye retroreflectors and the
//! two-retroreflector resonator.
//!
//! Matrices are stored row-major as `[[a, b], [c, d]]` acting on column rays
//! `[r, alpha]`. [`compose`] takes elements in light-traversal order, so the
//! first element traversed is the rightmost factor of the product.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equally spaced probes used by [`range_stability`].
pub const RANGE_PROBES: usize = 601;

/// Smallest distance probed by range checks. At `d = 0` the IO planes coincide
/// and `g1*g2* = 1` for every geometry, so the open stability interval is
/// tested on `(0, d_max]` when `d_min = 0`.
pub const MIN_PROBE_DISTANCE: f64 = 1e-6;

/// A 2x2 ray-transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// The same element traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self::new(self.d, self.b, self.c, self.a)
    }

    pub fn max_abs_diff(&self, other: &RayMatrix) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }

    pub fn elements(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    // Unchecked primitives for hot paths where the arguments are already valid.
    pub(crate) fn propagation(length: f64) -> Self {
        Self::new(1.0, length, 0.0, 1.0)
    }

    pub(crate) fn lens(focal: f64) -> Self {
        Self::new(1.0, 0.0, -1.0 / focal, 1.0)
    }
}

impl Default for RayMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for RayMatrix {
    type Output = RayMatrix;

    fn mul(self, rhs: RayMatrix) -> RayMatrix {
        RayMatrix::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }
}

impl Mul<RayVector> for RayMatrix {
    type Output = RayVector;

    fn mul(self, rhs: RayVector) -> RayVector {
        RayVector {
            r: self.a * rhs.r + self.b * rhs.alpha,
            alpha: self.c * rhs.r + self.d * rhs.alpha,
        }
    }
}

/// Paraxial ray: displacement `r` [m] from the axis and slope `alpha` [rad].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayVector {
    pub r: f64,
    pub alpha: f64,
}

impl RayVector {
    pub fn new(r: f64, alpha: f64) -> Self {
        Self { r, alpha }
    }
}

impl std::ops::Neg for RayVector {
    type Output = RayVector;

    fn neg(self) -> RayVector {
        RayVector::new(-self.r, -self.alpha)
    }
}

/// Free-space propagation over `length` meters.
pub fn free_space(length: f64) -> Result<RayMatrix> {
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::invalid(
            "length",
            format!("must be finite and >= 0, got {length}"),
        ));
    }
    Ok(RayMatrix::propagation(length))
}

/// Thin lens of focal length `focal` meters (negative for a concave lens).
pub fn thin_lens(focal: f64) -> Result<RayMatrix> {
    if focal == 0.0 || !focal.is_finite() {
        return Err(Error::invalid(
            "focal",
            format!("must be finite and non-zero, got {focal}"),
        ));
    }
    Ok(RayMatrix::lens(focal))
}

/// Ideal plane mirror in the unfolded axis convention.
pub fn plane_mirror() -> RayMatrix {
    RayMatrix::IDENTITY
}

/// Product of `seq` with the first traversed element applied first.
pub fn compose(seq: &[RayMatrix]) -> Result<RayMatrix> {
    let (first, rest) = seq.split_first().ok_or(Error::EmptySequence)?;
    Ok(rest.iter().fold(*first, |acc, m| *m * acc))
}

pub fn trace_ray(m: &RayMatrix, input: RayVector) -> RayVector {
    *m * input
}

fn retroreflector_sequence(focal: f64, gap: f64) -> [RayMatrix; 7] {
    [
        RayMatrix::propagation(focal),
        RayMatrix::lens(focal),
        RayMatrix::propagation(gap),
        plane_mirror(),
        RayMatrix::propagation(gap),
        RayMatrix::lens(focal),
        RayMatrix::propagation(focal),
    ]
}

/// Conventional telecentric cat's eye (lens-to-mirror gap equal to `focal`).
pub fn tcr_matrix(focal: f64) -> Result<RayMatrix> {
    ftcr_matrix(focal, focal)
}

/// Focal telecentric cat's eye (lens `focal`, lens-to-mirror gap `gap`) from
/// its outer focal plane back to the same plane.
pub fn ftcr_matrix(focal: f64, gap: f64) -> Result<RayMatrix> {
    if !(focal > 0.0) {
        return Err(Error::invalid("focal", format!("must be > 0, got {focal}")));
    }
    if !(gap > 0.0) {
        return Err(Error::invalid("gap", format!("must be > 0, got {gap}")));
    }
    compose(&retroreflector_sequence(focal, gap))
}

/// Equivalent focal length `f^2 / (2 (l - f))` of a focal cat's eye.
///
/// `None` when `gap == focal` (no focusing power). Negative values mean the
/// retroreflector defocuses; only `gap > focal` is a focusing FTCR.
pub fn equivalent_focal_length(focal: f64, gap: f64) -> Option<f64> {
    let excess = gap - focal;
    if excess == 0.0 {
        None
    } else {
        Some(focal * focal / (2.0 * excess))
    }
}

/// Cavity structure `(l1, f1, l2, f2)` plus the IO-plane distance `d`.
///
/// The axis origin is mirror M1; L1 sits at `l1`, the gain medium at the IO
/// plane of RR1 (`l1 + f1`), L2 at `l1 + f1 + d + f2` and M2 at `l2` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub l1: f64,
    pub f1: f64,
    pub l2: f64,
    pub f2: f64,
    pub d: f64,
}

impl CavityGeometry {
    pub fn new(l1: f64, f1: f64, l2: f64, f2: f64, d: f64) -> Result<Self> {
        for (name, v) in [("l1", l1), ("f1", f1), ("l2", l2), ("f2", f2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::invalid("d", format!("must be finite and >= 0, got {d}")));
        }
        Ok(Self { l1, f1, l2, f2, d })
    }

    /// Same structure at another IO-plane distance.
    pub fn at_distance(&self, d: f64) -> Self {
        Self { d, ..*self }
    }

    /// The resonator seen from M2: RR1 and RR2 exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            l1: self.l2,
            f1: self.f2,
            l2: self.l1,
            f2: self.f1,
            d: self.d,
        }
    }

    pub fn z_l1(&self) -> f64 {
        self.l1
    }

    pub fn z_gain(&self) -> f64 {
        self.l1 + self.f1
    }

    pub fn z_l2(&self) -> f64 {
        self.l1 + self.f1 + self.d + self.f2
    }

    pub fn z_m2(&self) -> f64 {
        self.z_l2() + self.l2
    }

    pub fn stability_polynomial(&self) -> StabilityPolynomial {
        StabilityPolynomial::new(self)
    }
}

/// Single-pass matrix of the resonator, built as the element product from M1
/// to M2.
pub fn sslr_single_pass(g: &CavityGeometry) -> RayMatrix {
    let seq = [
        plane_mirror(),
        RayMatrix::propagation(g.l1),
        RayMatrix::lens(g.f1),
        RayMatrix::propagation(g.f1 + g.f2 + g.d),
        RayMatrix::lens(g.f2),
        RayMatrix::propagation(g.l2),
        plane_mirror(),
    ];
    // non-empty by construction
    compose(&seq).unwrap_or_default()
}

/// Closed-form elements of the single-pass matrix.
pub fn sslr_closed_form(g: &CavityGeometry) -> RayMatrix {
    let CavityGeometry { l1, f1, l2, f2, d } = *g;
    let f12 = f1 * f2;
    RayMatrix::new(
        -f2 / f1 - d / f1 + d * l2 / f12,
        f1 + f2 - l2 * (f1 + d) / f2 - l1 * (f2 + d) / f1 + d * l1 * l2 / f12 + d,
        d / f12,
        -f1 / f2 - d / f2 + d * l1 / f12,
    )
}

/// Equivalent-resonator parameters and the stability verdict at `g.d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub g1_star: f64,
    pub g2_star: f64,
    pub l_star: f64,
    pub product: f64,
    pub stable: bool,
}

pub fn stability(g: &CavityGeometry) -> StabilityReport {
    let m = sslr_closed_form(g);
    // factored form: exact at the l = f boundary where A*D rounds below 1
    let product = stability_product(g);
    StabilityReport {
        g1_star: m.a,
        g2_star: m.d,
        l_star: m.b,
        product,
        stable: is_stable_product(product),
    }
}

/// `g1*g2*` from its factored closed form.
pub fn stability_product(g: &CavityGeometry) -> f64 {
    let CavityGeometry { l1, f1, l2, f2, d } = *g;
    ((f1 * f1 + d * (f1 - l1)) / (f1 * f1)) * ((f2 * f2 + d * (f2 - l2)) / (f2 * f2))
}

#[inline]
pub fn is_stable_product(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

/// `g1*g2*` as a function of distance for a fixed structure:
/// `(1 + u1 d)(1 + u2 d)` with `u_i = (f_i - l_i) / f_i^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPolynomial {
    u1: f64,
    u2: f64,
}

impl StabilityPolynomial {
    pub fn new(g: &CavityGeometry) -> Self {
        Self {
            u1: (g.f1 - g.l1) / (g.f1 * g.f1),
            u2: (g.f2 - g.l2) / (g.f2 * g.f2),
        }
    }

    #[inline]
    pub fn product(&self, d: f64) -> f64 {
        (1.0 + self.u1 * d) * (1.0 + self.u2 * d)
    }

    /// Distance of the parabola's extremum, if it has one.
    fn vertex(&self) -> Option<f64> {
        let quad = self.u1 * self.u2;
        if quad == 0.0 {
            None
        } else {
            Some(-(self.u1 + self.u2) / (2.0 * quad))
        }
    }

    /// Grid check with vertex and crossing refinement on `[lo, hi]`.
    /// Returns the first distance found outside the stable interval.
    pub fn first_unstable(&self, lo: f64, hi: f64) -> Option<f64> {
        let fails = |d: f64| !is_stable_product(self.product(d));
        if fails(lo) {
            return Some(lo);
        }
        if hi > lo {
            let step = (hi - lo) / (RANGE_PROBES - 1) as f64;
            let mut prev = lo;
            for k in 1..RANGE_PROBES {
                let d = if k == RANGE_PROBES - 1 {
                    hi
                } else {
                    lo + step * k as f64
                };
                if fails(d) {
                    return Some(self.refine_crossing(prev, d));
                }
                prev = d;
            }
            // A quadratic can leave (0, 1) and return between probes only around its vertex.
            if let Some(v) = self.vertex() {
                if v > lo && v < hi && fails(v) {
                    return Some(v);
                }
            }
        }
        None
    }

    /// Bisection between a stable `good` and an unstable `bad` distance.
    fn refine_crossing(&self, mut good: f64, mut bad: f64) -> f64 {
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if is_stable_product(self.product(mid)) {
                good = mid;
            } else {
                bad = mid;
            }
            if (bad - good).abs() <= 1e-12 * bad.abs().max(1.0) {
                break;
            }
        }
        bad
    }
}

/// Outcome of a stability check over a distance interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeStability {
    pub stable: bool,
    /// Smallest probed distance (after refinement) where `g1*g2*` leaves (0, 1).
    pub first_failure: Option<f64>,
}

/// Effective lower probe for a range starting at `d_min`.
pub fn range_start(d_min: f64, d_max: f64) -> f64 {
    d_min.max(MIN_PROBE_DISTANCE).min(d_max)
}

pub fn range_stability(template: &CavityGeometry, d_min: f64, d_max: f64) -> Result<RangeStability> {
    if !(d_min <= d_max) || d_min < 0.0 {
        return Err(Error::invalid(
            "d_min/d_max",
            format!("need 0 <= d_min <= d_max, got [{d_min}, {d_max}]"),
        ));
    }
    let first_failure = template
        .stability_polynomial()
        .first_unstable(range_start(d_min, d_max), d_max);
    Ok(RangeStability {
        stable: first_failure.is_none(),
        first_failure,
    })
}

/// `true` iff `0 < g1*g2* < 1` everywhere on `[d_min, d_max]`.
pub fn stable_over_range(template: &CavityGeometry, d_min: f64, d_max: f64) -> Result<bool> {
    range_stability(template, d_min, d_max).map(|r| r.stable)
}
