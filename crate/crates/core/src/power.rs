//! Intra-cavity power circulation with intra-cavity SHG, and the optical
//! powers delivered to the power-transfer (PV) and information-transfer (PD)
//! branches.
//!
//! The cavity reduces to a gain medium between two equivalent mirrors `R1`
//! (the SHG side) and `R2` (the receiver side). The leftward power `P4`
//! follows Rigrod's saturated-gain expression, while the SHG efficiency is
//! linear in `P4`; the coupled pair is a scalar fixed point in `P4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beam::ModeSolution;
use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::optics::CavityGeometry;

/// Fixed-point tolerance on `|F(P4) - P4|` [W].
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Damping of the fixed-point iteration.
pub const DAMPING: f64 = 0.5;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 200;
/// Upper clamp on the SHG efficiency.
pub const ETA_SHG_MAX: f64 = 1.0 - 1e-12;
/// Efficiencies at or above this are outside the plane-wave SHG model.
pub const ETA_SHG_WARNING: f64 = 0.999;

/// Gain-medium, wavelength and nonlinear-crystal constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialTable {
    /// Saturation intensity `I_s` [W/m^2].
    pub saturation_intensity_w_m2: f64,
    /// Resonant wavelength `lambda` [m].
    pub wavelength_m: f64,
    /// Combined pumping efficiency `eta_c`.
    pub pumping_efficiency: f64,
    /// Effective nonlinear coefficient `d_eff` [m/V].
    pub d_eff_m_per_v: f64,
    /// Refractive index of the SHG medium `n0`.
    pub shg_refractive_index: f64,
}

impl Default for MaterialTable {
    fn default() -> Self {
        Self {
            saturation_intensity_w_m2: 1.1976e7,
            wavelength_m: 1064e-9,
            pumping_efficiency: 0.439,
            d_eff_m_per_v: 4.7e-12,
            shg_refractive_index: 2.23,
        }
    }
}

impl MaterialTable {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("saturation_intensity_w_m2", self.saturation_intensity_w_m2),
            ("wavelength_m", self.wavelength_m),
            ("pumping_efficiency", self.pumping_efficiency),
            ("d_eff_m_per_v", self.d_eff_m_per_v),
            ("shg_refractive_index", self.shg_refractive_index),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `8 pi^2 d_eff^2 l_s^2 / (eps0 c lambda^2 n0^3)` [m^2/W]: SHG efficiency per unit intensity.
    pub fn shg_intensity_coefficient(&self, shg_thickness: f64) -> f64 {
        8.0 * PI * PI * self.d_eff_m_per_v.powi(2) * shg_thickness.powi(2)
            / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * self.wavelength_m.powi(2) * self.shg_refractive_index.powi(3))
    }
}

/// Surface transmissivities, reflectivities and air extinction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossTable {
    pub gamma_l1: f64,
    pub gamma_l2: f64,
    pub gamma_l3: f64,
    pub gamma_l4: f64,
    pub gamma_shg: f64,
    /// M2 transmissivity at the second harmonic.
    pub gamma_m2_2nu: f64,
    /// M3 transmissivity at the fundamental.
    pub gamma_m3_nu: f64,
    pub gamma_det: f64,
    pub gamma_pv: f64,
    pub gamma_gain: f64,
    /// Combined gain medium + EOM transmissivity at the second harmonic.
    pub gamma_gain_eom: f64,
    pub r_m1: f64,
    /// M3 reflectivity at the second harmonic.
    pub r_m3_2nu: f64,
    /// Air extinction coefficient `alpha` [1/m].
    pub air_extinction_per_m: f64,
}

impl Default for LossTable {
    fn default() -> Self {
        Self {
            gamma_l1: 0.99,
            gamma_l2: 0.99,
            gamma_l3: 0.99,
            gamma_l4: 0.99,
            gamma_shg: 0.99,
            gamma_m2_2nu: 0.99,
            gamma_m3_nu: 0.99,
            gamma_det: 0.995,
            gamma_pv: 0.995,
            gamma_gain: 0.9851,
            gamma_gain_eom: 0.9752,
            r_m1: 0.995,
            r_m3_2nu: 0.995,
            air_extinction_per_m: 1e-4,
        }
    }
}

impl LossTable {
    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("gamma_l1", self.gamma_l1),
            ("gamma_l2", self.gamma_l2),
            ("gamma_l3", self.gamma_l3),
            ("gamma_l4", self.gamma_l4),
            ("gamma_shg", self.gamma_shg),
            ("gamma_m2_2nu", self.gamma_m2_2nu),
            ("gamma_m3_nu", self.gamma_m3_nu),
            ("gamma_det", self.gamma_det),
            ("gamma_pv", self.gamma_pv),
            ("gamma_gain", self.gamma_gain),
            ("gamma_gain_eom", self.gamma_gain_eom),
            ("r_m1", self.r_m1),
            ("r_m3_2nu", self.r_m3_2nu),
        ];
        for (name, v) in unit {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 1], got {v}")));
            }
        }
        if !(self.air_extinction_per_m >= 0.0) || !self.air_extinction_per_m.is_finite() {
            return Err(Error::invalid(
                "air_extinction_per_m",
                format!("must be finite and >= 0, got {}", self.air_extinction_per_m),
            ));
        }
        Ok(())
    }

    /// One-way air transmissivity `exp(-alpha d)`.
    pub fn air_transmissivity(&self, distance: f64) -> f64 {
        (-self.air_extinction_per_m * distance).exp()
    }

    /// `R_RR1 = R_M1 Gamma_L1^2`: one bounce on M1, two passes through L1.
    pub fn retroreflector1(&self) -> f64 {
        self.r_m1 * self.gamma_l1 * self.gamma_l1
    }

    /// `R_RR2 = R_M2 Gamma_L2^2`.
    pub fn retroreflector2(&self, r_m2: f64) -> f64 {
        r_m2 * self.gamma_l2 * self.gamma_l2
    }
}

/// Gain aperture, output-mirror reflectivity and SHG thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    /// Gain medium aperture radius `a_g` [m].
    pub gain_aperture: f64,
    /// M2 reflectivity at the fundamental.
    pub r_m2: f64,
    /// SHG medium thickness `l_s` [m].
    pub shg_thickness: f64,
}

impl FunctionalParams {
    pub fn new(gain_aperture: f64, r_m2: f64, shg_thickness: f64) -> Result<Self> {
        let m = Self {
            gain_aperture,
            r_m2,
            shg_thickness,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_aperture > 0.0) || !self.gain_aperture.is_finite() {
            return Err(Error::invalid(
                "a_g",
                format!("must be > 0, got {}", self.gain_aperture),
            ));
        }
        if !(0.0..=1.0).contains(&self.r_m2) {
            return Err(Error::invalid("r_m2", format!("must lie in [0, 1], got {}", self.r_m2)));
        }
        if !(self.shg_thickness >= 0.0) || !self.shg_thickness.is_finite() {
            return Err(Error::invalid(
                "l_s",
                format!("must be finite and >= 0, got {}", self.shg_thickness),
            ));
        }
        Ok(())
    }
}

/// Converged circulation state and the derived received powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub p_in: f64,
    pub p4: f64,
    pub p2: f64,
    pub eta_shg: f64,
    pub r1: f64,
    pub r2: f64,
    pub gamma_diff: f64,
    pub gamma_air: f64,
    pub eta_slope: f64,
    pub p_threshold: f64,
    pub p_recv_pt: f64,
    pub p_recv_it: f64,
    pub eta_trans: f64,
    /// `|F(P4) - P4|` at the returned state [W].
    pub residual: f64,
    pub iterations: usize,
    /// An iterate proposed `eta_shg >= 1` and was clamped.
    pub shg_clamped: bool,
    /// `eta_shg >= 0.999`: plane-wave SHG model no longer trustworthy.
    pub shg_validity_warning: bool,
}

/// Fundamental-mode aperture survival `1 - exp(-2 (a_g / w00_g)^2)`.
///
/// Surrogate for a full diffraction simulation: the fraction of a TEM00
/// profile of radius `w00_g` passing a hard aperture of radius `a_g`.
pub fn diffraction_coeff(gain_aperture: f64, w00_gain: f64) -> f64 {
    let ratio = gain_aperture / w00_gain;
    -(-2.0 * ratio * ratio).exp_m1()
}

/// `(R1, R2)` for the given SHG efficiency, diffraction survival and air transmissivity.
pub fn equivalent_reflectivities(
    m: &FunctionalParams,
    loss: &LossTable,
    eta_shg: f64,
    gamma_diff: f64,
    gamma_air: f64,
) -> (f64, f64) {
    let conv = 1.0 - eta_shg;
    let r1 = conv * conv * loss.gamma_shg * loss.gamma_shg * loss.retroreflector1();
    let r2 = loss.gamma_gain * loss.gamma_gain * gamma_air * gamma_air * loss.retroreflector2(m.r_m2) * gamma_diff;
    (r1, r2)
}

/// Slope efficiency and threshold pump power for frozen `R1`, `R2`.
pub fn slope_threshold(gain_aperture: f64, mat: &MaterialTable, r1: f64, r2: f64) -> Result<(f64, f64)> {
    let rt = r1 * r2;
    if rt >= 1.0 {
        return Err(Error::LosslessCavity(rt));
    }
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::invalid("r1/r2", format!("must be >= 0, got ({r1}, {r2})")));
    }
    if r2 == 0.0 || r1 == 0.0 {
        // no feedback on one side: the threshold is never reached
        return Ok((0.0, f64::INFINITY));
    }
    let s = rt.sqrt();
    let eta_slope = mat.pumping_efficiency / ((1.0 + (r1 / r2).sqrt()) * (1.0 - s));
    let p_threshold =
        PI * gain_aperture * gain_aperture * mat.saturation_intensity_w_m2 / mat.pumping_efficiency * (-s.ln());
    Ok((eta_slope, p_threshold))
}

/// Rigrod leftward power for frozen `R1`, `R2`, clamped at zero.
pub fn rigrod_p4(p_in: f64, gain_aperture: f64, mat: &MaterialTable, r1: f64, r2: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    let s = (r1 * r2).sqrt();
    if s >= 1.0 {
        return f64::INFINITY;
    }
    let sat = PI * gain_aperture * gain_aperture * mat.saturation_intensity_w_m2;
    let p4 = sat / ((1.0 + (r1 / r2).sqrt()) * (1.0 - s)) * (mat.pumping_efficiency * p_in / sat + s.ln());
    p4.max(0.0)
}

/// Received optical powers `(P_recv,PT, P_recv,IT)` at the PV and the PD.
pub fn received_powers(pb: &PowerBreakdown, m: &FunctionalParams, loss: &LossTable, distance: f64) -> (f64, f64) {
    let gamma_air = loss.air_transmissivity(distance);
    let gamma_pt = loss.gamma_pv * loss.gamma_l3 * loss.gamma_m3_nu * (1.0 - m.r_m2) * loss.gamma_l2 * gamma_air;
    let gamma_it = loss.gamma_det
        * loss.gamma_l4
        * loss.r_m3_2nu
        * loss.gamma_m2_2nu
        * loss.gamma_l2
        * gamma_air
        * loss.gamma_gain_eom
        * loss.gamma_l1;
    (gamma_pt * pb.p2, 2.0 * pb.eta_shg * gamma_it * pb.p4)
}

/// Mode radii the circulation needs: at the gain medium and at M1 (the SHG plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    pub w00_gain: f64,
    pub w00_mirror1: f64,
    pub distance: f64,
}

impl CavityMode {
    pub fn from_solution(mode: &ModeSolution) -> Self {
        Self {
            w00_gain: mode.w00_gain(),
            w00_mirror1: mode.w00_mirror1(),
            distance: mode.geometry().d,
        }
    }
}

/// Scalar form of the coupled system at fixed mode and parameters.
#[derive(Debug, Clone, Copy)]
pub struct Circulation<'a> {
    p_in: f64,
    m: FunctionalParams,
    mat: &'a MaterialTable,
    loss: &'a LossTable,
    gamma_diff: f64,
    gamma_air: f64,
    distance: f64,
    /// `eta_shg = shg_per_watt * P4`
    shg_per_watt: f64,
}

impl<'a> Circulation<'a> {
    pub fn new(
        p_in: f64,
        mode: &CavityMode,
        m: &FunctionalParams,
        mat: &'a MaterialTable,
        loss: &'a LossTable,
    ) -> Self {
        let gain_aperture = m.gain_aperture;
        // scaled beam radius at the SHG plane
        let w_shg = gain_aperture / mode.w00_gain * mode.w00_mirror1;
        let shg_per_watt = mat.shg_intensity_coefficient(m.shg_thickness) * 2.0 / (PI * w_shg * w_shg);
        Self {
            p_in,
            m: *m,
            mat,
            loss,
            gamma_diff: diffraction_coeff(gain_aperture, mode.w00_gain),
            gamma_air: loss.air_transmissivity(mode.distance),
            distance: mode.distance,
            shg_per_watt,
        }
    }

    pub fn shg_per_watt(&self) -> f64 {
        self.shg_per_watt
    }

    /// SHG efficiency implied by `p4`, and whether it had to be clamped.
    pub fn eta_shg(&self, p4: f64) -> (f64, bool) {
        let eta = self.shg_per_watt * p4;
        if eta > ETA_SHG_MAX {
            (ETA_SHG_MAX, true)
        } else {
            (eta.max(0.0), false)
        }
    }

    pub fn reflectivities(&self, eta_shg: f64) -> (f64, f64) {
        equivalent_reflectivities(&self.m, self.loss, eta_shg, self.gamma_diff, self.gamma_air)
    }

    /// Rigrod `P4` with `R1` evaluated at the SHG efficiency implied by `p4`.
    pub fn map(&self, p4: f64) -> f64 {
        let (eta, _) = self.eta_shg(p4);
        let (r1, r2) = self.reflectivities(eta);
        rigrod_p4(self.p_in, self.m.gain_aperture, self.mat, r1, r2)
    }

    pub fn residual(&self, p4: f64) -> f64 {
        self.map(p4) - p4
    }

    /// Solve `map(P4) = P4`: damped iteration from the SHG-free closed form,
    /// bisection when the iteration stalls or oscillates.
    pub fn solve(&self) -> Result<(f64, f64, usize)> {
        let start = self.map(0.0);
        if start <= 0.0 {
            return Ok((0.0, 0.0, 0));
        }
        if self.shg_per_watt == 0.0 {
            return Ok((start, 0.0, 0));
        }
        let mut p = start;
        let mut prev_abs = f64::INFINITY;
        let mut growth = 0;
        for it in 1..=MAX_FIXED_POINT_ITERATIONS {
            let r = self.residual(p);
            if r.abs() < RESIDUAL_TOLERANCE {
                return Ok((p, r.abs(), it));
            }
            if !r.is_finite() {
                break;
            }
            if r.abs() >= prev_abs {
                growth += 1;
                if growth >= 3 {
                    break;
                }
            } else {
                growth = 0;
            }
            prev_abs = r.abs();
            p = (p + DAMPING * r).max(0.0);
        }
        self.bisect(start)
    }

    fn bisect(&self, start: f64) -> Result<(f64, f64, usize)> {
        let mut lo = 0.0;
        let mut hi = if self.residual(start) <= 0.0 {
            start
        } else {
            // eta_shg reaches its clamp, R1 -> 0 and the map returns zero
            1.0 / self.shg_per_watt
        };
        if self.residual(hi) > 0.0 {
            return Err(Error::NoConvergence {
                residual: self.residual(hi),
            });
        }
        let mut best = (hi, self.residual(hi).abs());
        for it in 1..=200 {
            let mid = 0.5 * (lo + hi);
            let r = self.residual(mid);
            if r.abs() < best.1 {
                best = (mid, r.abs());
            }
            if r.abs() < RESIDUAL_TOLERANCE {
                return Ok((mid, r.abs(), MAX_FIXED_POINT_ITERATIONS + it));
            }
            if r > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        if best.1 < RESIDUAL_TOLERANCE {
            Ok((best.0, best.1, MAX_FIXED_POINT_ITERATIONS + 200))
        } else {
            Err(Error::NoConvergence { residual: best.1 })
        }
    }

    /// Full breakdown at a given (converged) `p4`.
    pub fn breakdown(&self, p4: f64, residual: f64, iterations: usize) -> Result<PowerBreakdown> {
        let (eta_shg, shg_clamped) = self.eta_shg(p4);
        let (r1, r2) = self.reflectivities(eta_shg);
        let (eta_slope, p_threshold) = slope_threshold(self.m.gain_aperture, self.mat, r1, r2)?;
        let p2 = if p4 > 0.0 { (r1 / r2).sqrt() * p4 } else { 0.0 };
        let mut pb = PowerBreakdown {
            p_in: self.p_in,
            p4,
            p2,
            eta_shg,
            r1,
            r2,
            gamma_diff: self.gamma_diff,
            gamma_air: self.gamma_air,
            eta_slope,
            p_threshold,
            p_recv_pt: 0.0,
            p_recv_it: 0.0,
            eta_trans: 0.0,
            residual,
            iterations,
            shg_clamped,
            shg_validity_warning: eta_shg >= ETA_SHG_WARNING,
        };
        let (pt, it) = received_powers(&pb, &self.m, self.loss, self.distance);
        pb.p_recv_pt = pt;
        pb.p_recv_it = it;
        pb.eta_trans = if self.p_in > 0.0 { (pt + it) / self.p_in } else { 0.0 };
        Ok(pb)
    }
}

/// Solve the circulation for a precomputed mode.
pub fn solve_with_mode(
    p_in: f64,
    mode: &CavityMode,
    m: &FunctionalParams,
    mat: &MaterialTable,
    loss: &LossTable,
) -> Result<PowerBreakdown> {
    if !(p_in >= 0.0) || !p_in.is_finite() {
        return Err(Error::invalid("p_in", format!("must be finite and >= 0, got {p_in}")));
    }
    m.validate()?;
    let circ = Circulation::new(p_in, mode, m, mat, loss);
    let (p4, residual, iterations) = circ.solve()?;
    circ.breakdown(p4, residual, iterations)
}

/// Solve the coupled circulation/SHG system at `g.d`.
pub fn solve_circulation(
    p_in: f64,
    g: &CavityGeometry,
    m: &FunctionalParams,
    mat: &MaterialTable,
    loss: &LossTable,
) -> Result<PowerBreakdown> {
    let mode = ModeSolution::new(g, mat.wavelength_m)?;
    solve_with_mode(p_in, &CavityMode::from_solution(&mode), m, mat, loss)
}
