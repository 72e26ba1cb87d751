//! TEM00 mode of the resonator via the complex beam parameter q(z).
//!
//! The mode starts at the plane mirror M1 (`z = 0`) with a purely imaginary q
//! fixed by the equivalent resonator `(g1*, g2*, L*)`, then propagates through
//! free space and the two lenses towards M2.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{self, CavityGeometry};

/// Complex beam parameter [m].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParameter(pub Complex64);

impl QParameter {
    /// Free-space advance by `length`.
    pub fn propagate(self, length: f64) -> Self {
        QParameter(self.0 + length)
    }

    /// Thin-lens transform `q / (1 - q / f)`.
    pub fn through_lens(self, focal: f64) -> Self {
        QParameter(self.0 / (1.0 - self.0 / focal))
    }

    /// Bilinear ABCD transform `(A q + B) / (C q + D)`.
    pub fn transform(self, m: &optics::RayMatrix) -> Self {
        QParameter((self.0 * m.a + m.b) / (self.0 * m.c + m.d))
    }

    /// `sqrt(-lambda / (pi Im[1/q]))`; NaN when the radicand is not positive.
    pub fn radius(self, wavelength: f64) -> f64 {
        let inv_im = self.0.inv().im;
        (-wavelength / (PI * inv_im)).sqrt()
    }
}

/// Precomputed q at the element planes of one stable geometry.
#[derive(Debug, Clone, Copy)]
pub struct ModeSolution {
    geometry: CavityGeometry,
    wavelength: f64,
    q_m1: QParameter,
    /// just after L1
    q_l1: QParameter,
    /// just after L2
    q_l2: QParameter,
}

impl ModeSolution {
    pub fn new(geometry: &CavityGeometry, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::invalid("wavelength", format!("must be > 0, got {wavelength}")));
        }
        let m = optics::sslr_closed_form(geometry);
        let product = optics::stability_product(geometry);
        // the radicand below needs the matrix form inside (0, 1) as well
        if !optics::is_stable_product(product) || !optics::is_stable_product(m.a * m.d) {
            return Err(Error::Unstable {
                distance: geometry.d,
                product,
            });
        }
        let radicand = m.d / (m.a * (1.0 - m.a * m.d));
        let q_m1 = QParameter(Complex64::new(0.0, m.b.abs() * radicand.sqrt()));
        let q_l1 = q_m1.propagate(geometry.l1).through_lens(geometry.f1);
        let q_l2 = q_l1
            .propagate(geometry.f1 + geometry.d + geometry.f2)
            .through_lens(geometry.f2);
        Ok(Self {
            geometry: *geometry,
            wavelength,
            q_m1,
            q_l1,
            q_l2,
        })
    }

    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn q_mirror1(&self) -> QParameter {
        self.q_m1
    }

    pub fn q_at(&self, z: f64) -> Result<QParameter> {
        let g = &self.geometry;
        let z_m2 = g.z_m2();
        if !(0.0..=z_m2).contains(&z) {
            return Err(Error::OutOfRange { z, z_max: z_m2 });
        }
        Ok(self.q_unchecked(z))
    }

    fn q_unchecked(&self, z: f64) -> QParameter {
        let g = &self.geometry;
        if z <= g.z_l1() {
            self.q_m1.propagate(z)
        } else if z <= g.z_l2() {
            self.q_l1.propagate(z - g.z_l1())
        } else {
            self.q_l2.propagate(z - g.z_l2())
        }
    }

    pub fn w00_at(&self, z: f64) -> Result<f64> {
        Ok(self.q_at(z)?.radius(self.wavelength))
    }

    pub fn w00_mirror1(&self) -> f64 {
        self.q_m1.radius(self.wavelength)
    }

    /// Mode radius at L1 (the lens plane, continuous across the lens).
    pub fn w00_lens1(&self) -> f64 {
        self.q_m1.propagate(self.geometry.l1).radius(self.wavelength)
    }

    pub fn w00_gain(&self) -> f64 {
        self.q_l1.propagate(self.geometry.f1).radius(self.wavelength)
    }

    pub fn w00_lens2(&self) -> f64 {
        let g = &self.geometry;
        self.q_l1.propagate(g.f1 + g.d + g.f2).radius(self.wavelength)
    }

    /// Scaled beam radius `a_g / w00(z_g) * w00(z)`.
    pub fn w_at(&self, gain_aperture: f64, z: f64) -> Result<f64> {
        if !(gain_aperture > 0.0) {
            return Err(Error::invalid("a_g", format!("must be > 0, got {gain_aperture}")));
        }
        if z == self.geometry.z_gain() {
            return Ok(gain_aperture);
        }
        Ok(gain_aperture / self.w00_gain() * self.w00_at(z)?)
    }
}

pub fn q_at(g: &CavityGeometry, wavelength: f64, z: f64) -> Result<QParameter> {
    ModeSolution::new(g, wavelength)?.q_at(z)
}

pub fn w00_at(g: &CavityGeometry, wavelength: f64, z: f64) -> Result<f64> {
    ModeSolution::new(g, wavelength)?.w00_at(z)
}

pub fn w_at(g: &CavityGeometry, wavelength: f64, gain_aperture: f64, z: f64) -> Result<f64> {
    ModeSolution::new(g, wavelength)?.w_at(gain_aperture, z)
}

/// Sampled `w00(z)` over the whole cavity axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamProfile {
    pub geometry: CavityGeometry,
    pub wavelength: f64,
    /// `(z [m], w00 [m])`, strictly increasing in z.
    pub samples: Vec<(f64, f64)>,
}

/// Uniform grid of `n_samples` points on `[0, z_M2]` merged with the element
/// planes (M1, L1, gain medium, L2, M2).
pub fn profile(g: &CavityGeometry, wavelength: f64, n_samples: usize) -> Result<BeamProfile> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", format!("must be >= 2, got {n_samples}")));
    }
    let mode = ModeSolution::new(g, wavelength)?;
    let z_max = g.z_m2();
    let mut zs: Vec<f64> = (0..n_samples)
        .map(|k| z_max * k as f64 / (n_samples - 1) as f64)
        .chain([g.z_l1(), g.z_gain(), g.z_l2()])
        .collect();
    zs.sort_by(f64::total_cmp);
    zs.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * z_max);
    let zs = {
        // the last grid point is z_M2 exactly; keep it even if a plane landed within tolerance
        let mut zs = zs;
        if let Some(last) = zs.last_mut() {
            *last = z_max;
        }
        zs
    };
    let samples = zs
        .into_iter()
        .map(|z| mode.w00_at(z).map(|w| (z, w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamProfile {
        geometry: *g,
        wavelength,
        samples,
    })
}
