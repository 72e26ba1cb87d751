use rayon::prelude::*;
use serde::Serialize;

use crate::beam::ModeSolution;
use crate::error::{Error, Result};
use crate::optics::CavityGeometry;
use crate::power::{self, CavityMode, FunctionalParams, LossTable, MaterialTable, PowerBreakdown};
use crate::receiver::{self, PDParams, PVOperatingPoint, PVParams};

/// Receiver-side figures of one link evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkPerformance {
    pub distance: f64,
    pub w00_gain: f64,
    pub p_chg: f64,
    pub r_b: f64,
    pub pv: PVOperatingPoint,
    pub breakdown: PowerBreakdown,
}

/// Model chain at one distance: mode, circulation, received powers, MPPT and rate.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_link(
    p_in: f64,
    g: &CavityGeometry,
    m: &FunctionalParams,
    mat: &MaterialTable,
    loss: &LossTable,
    pv: &PVParams,
    pd: &PDParams,
) -> Result<LinkPerformance> {
    let mode = ModeSolution::new(g, mat.wavelength_m)?;
    let breakdown = power::solve_with_mode(p_in, &CavityMode::from_solution(&mode), m, mat, loss)?;
    let op = receiver::mppt(breakdown.p_recv_pt, pv);
    Ok(LinkPerformance {
        distance: g.d,
        w00_gain: mode.w00_gain(),
        p_chg: op.p_chg,
        r_b: receiver::achievable_rate(breakdown.p_recv_it, pd),
        pv: op,
        breakdown,
    })
}

/// `evaluate_link` over a list of distances, in input order.
#[allow(clippy::too_many_arguments)]
pub fn sweep_distance(
    p_in: f64,
    template: &CavityGeometry,
    distances: &[f64],
    m: &FunctionalParams,
    mat: &MaterialTable,
    loss: &LossTable,
    pv: &PVParams,
    pd: &PDParams,
) -> Result<Vec<LinkPerformance>> {
    if distances.is_empty() {
        return Err(Error::invalid("distances", "empty sweep"));
    }
    distances
        .par_iter()
        .map(|&d| evaluate_link(p_in, &template.at_distance(d), m, mat, loss, pv, pd))
        .collect()
}

/// `n` evenly spaced distances on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
