//! Receiver-side conversion: photovoltaic single-diode model with a maximum
//! power point search, and photodetector noise / achievable rate.
//!
//! The I-V curve is parametrized by the diode voltage `V_d`, which makes the
//! charging current explicit.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELECTRON_CHARGE};
use crate::error::{Error, Result};

/// Golden-section termination width on `V_d` [V].
pub const MPPT_TOLERANCE: f64 = 1e-6;
/// Samples of the unimodality guard scan.
pub const UNIMODALITY_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PVParams {
    /// Responsivity `rho` [A/W].
    pub responsivity_a_per_w: f64,
    /// Reverse saturation current `I0` [A].
    pub saturation_current_a: f64,
    pub shunt_resistance_ohm: f64,
    pub series_resistance_ohm: f64,
    /// Diode ideality factor `n`.
    pub ideality: f64,
    /// Cells in series `n_s`.
    pub cells: f64,
    pub temperature_k: f64,
}

impl Default for PVParams {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 0.6,
            saturation_current_a: 0.32e-6,
            shunt_resistance_ohm: 53.82,
            series_resistance_ohm: 0.037,
            ideality: 1.48,
            cells: 1.0,
            temperature_k: 298.0,
        }
    }
}

impl PVParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("responsivity_a_per_w", self.responsivity_a_per_w),
            ("saturation_current_a", self.saturation_current_a),
            ("shunt_resistance_ohm", self.shunt_resistance_ohm),
            ("series_resistance_ohm", self.series_resistance_ohm),
            ("ideality", self.ideality),
            ("cells", self.cells),
            ("temperature_k", self.temperature_k),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Thermal voltage `kT/e` [V].
    pub fn thermal_voltage(&self) -> f64 {
        BOLTZMANN * self.temperature_k / ELECTRON_CHARGE
    }

    fn diode_scale(&self) -> f64 {
        self.cells * self.ideality * self.thermal_voltage()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PDParams {
    /// Responsivity `gamma` [A/W].
    pub responsivity_a_per_w: f64,
    /// Background current `I_bk` [A].
    pub background_current_a: f64,
    pub bandwidth_hz: f64,
    /// Load resistance `R_IL` [Ohm].
    pub load_resistance_ohm: f64,
    pub temperature_k: f64,
}

impl Default for PDParams {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 0.4,
            background_current_a: 5100e-6,
            bandwidth_hz: 800e6,
            load_resistance_ohm: 1e4,
            temperature_k: 298.0,
        }
    }
}

impl PDParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("responsivity_a_per_w", self.responsivity_a_per_w),
            ("background_current_a", self.background_current_a),
            ("bandwidth_hz", self.bandwidth_hz),
            ("load_resistance_ohm", self.load_resistance_ohm),
            ("temperature_k", self.temperature_k),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PVOperatingPoint {
    pub v_chg: f64,
    pub i_chg: f64,
    pub v_d: f64,
    pub p_chg: f64,
    /// Equivalent load resistance `V_chg / I_chg`; infinite at zero current.
    pub r_pl: f64,
}

/// Point of the I-V curve at diode voltage `v_d`.
pub fn iv_curve_point(p_opt: f64, v_d: f64, pv: &PVParams) -> PVOperatingPoint {
    let i_d = pv.saturation_current_a * (v_d / pv.diode_scale()).exp_m1();
    let i_chg = pv.responsivity_a_per_w * p_opt - i_d - v_d / pv.shunt_resistance_ohm;
    let v_chg = v_d - i_chg * pv.series_resistance_ohm;
    let r_pl = if i_chg != 0.0 { v_chg / i_chg } else { f64::INFINITY };
    PVOperatingPoint {
        v_chg,
        i_chg,
        v_d,
        p_chg: v_chg * i_chg,
        r_pl,
    }
}

/// Diode voltage at which the charging current vanishes.
pub fn open_circuit_diode_voltage(p_opt: f64, pv: &PVParams) -> f64 {
    let photo = pv.responsivity_a_per_w * p_opt;
    if photo <= 0.0 {
        return 0.0;
    }
    // I_chg(V) is strictly decreasing; log bound ignores the shunt branch
    let mut lo = 0.0;
    let mut hi = pv.diode_scale() * (photo / pv.saturation_current_a).ln_1p();
    let current = |v: f64| iv_curve_point(p_opt, v, pv).i_chg;
    while current(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if current(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Whether `P_chg(V_d)` sampled on `n` points over `[0, v_oc_d]` rises then falls.
pub fn is_unimodal(p_opt: f64, v_oc_d: f64, pv: &PVParams, n: usize) -> bool {
    is_unimodal_on(p_opt, 0.0, v_oc_d, pv, n)
}

fn is_unimodal_on(p_opt: f64, lo: f64, hi: f64, pv: &PVParams, n: usize) -> bool {
    let mut sign_changes = 0;
    let mut prev = iv_curve_point(p_opt, lo, pv).p_chg;
    let mut rising = true;
    for k in 1..=n {
        let p = iv_curve_point(p_opt, lo + (hi - lo) * k as f64 / n as f64, pv).p_chg;
        let up = p >= prev;
        if up != rising {
            sign_changes += 1;
            rising = up;
        }
        prev = p;
    }
    sign_changes <= 1
}

/// Diode voltage at which the terminal voltage crosses zero; below it the
/// series drop exceeds the diode voltage.
pub fn zero_voltage_diode_voltage(p_opt: f64, pv: &PVParams) -> f64 {
    let v_oc = open_circuit_diode_voltage(p_opt, pv);
    // V_chg(V_d) = V_d - I_chg(V_d) R_s is strictly increasing
    let (mut lo, mut hi) = (0.0, v_oc);
    if iv_curve_point(p_opt, lo, pv).v_chg >= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if iv_curve_point(p_opt, mid, pv).v_chg < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Maximum power point over the diode voltages where `I_chg >= 0` and `V_chg >= 0`.
pub fn mppt(p_opt: f64, pv: &PVParams) -> PVOperatingPoint {
    if !(p_opt > 0.0) {
        return PVOperatingPoint::default();
    }
    let v_lo = zero_voltage_diode_voltage(p_opt, pv);
    let v_hi = open_circuit_diode_voltage(p_opt, pv);
    let power = |v: f64| iv_curve_point(p_opt, v, pv).p_chg;
    let best = if is_unimodal_on(p_opt, v_lo, v_hi, pv, UNIMODALITY_GRID) {
        golden_max(power, v_lo, v_hi, MPPT_TOLERANCE)
    } else {
        grid_max(power, v_lo, v_hi, 10_000)
    };
    let pt = iv_curve_point(p_opt, best.clamp(v_lo, v_hi), pv);
    if pt.i_chg < 0.0 || pt.v_chg < 0.0 {
        PVOperatingPoint::default()
    } else {
        pt
    }
}

/// Golden-section maximizer of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .map(|v| (v, f(v)))
        .fold(
            (lo, f64::NEG_INFINITY),
            |acc, (v, p)| if p > acc.1 { (v, p) } else { acc },
        )
        .0
}

/// Shot plus thermal noise variance [A^2].
pub fn noise_variance(p_recv_it: f64, pd: &PDParams) -> f64 {
    2.0 * ELECTRON_CHARGE * (pd.responsivity_a_per_w * p_recv_it + pd.background_current_a) * pd.bandwidth_hz
        + 4.0 * BOLTZMANN * pd.temperature_k * pd.bandwidth_hz / pd.load_resistance_ohm
}

/// Achievable rate [bit/s/Hz] of the intensity-modulated link.
pub fn achievable_rate(p_recv_it: f64, pd: &PDParams) -> f64 {
    if !(p_recv_it > 0.0) {
        return 0.0;
    }
    let signal = pd.responsivity_a_per_w * p_recv_it;
    // ordered to stay finite for very large powers
    let snr = signal * (signal / (2.0 * PI * E * noise_variance(p_recv_it, pd)));
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}
