use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::optimize_functional;
use super::link::evaluate_link;
use super::worst_distance::find_worst_distance;
use crate::error::{Error, Result};
use crate::optics::CavityGeometry;
use crate::power::{LossTable, MaterialTable};
use crate::receiver::{PDParams, PVParams};

/// One point of the power-rate boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub shg_thickness: f64,
    pub gain_aperture: f64,
    pub r_m2: f64,
    pub eta_trans: f64,
    pub p_chg: f64,
    pub r_b: f64,
}

/// SHG thicknesses `0, step, ..., max` (inclusive up to rounding), snapped
/// to the nanometre so decimal steps print as written.
pub fn thickness_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| (k as f64 * step * 1e9).round() / 1e9).collect()
}

/// Functional optimum and link figures at `d_m` for each SHG thickness.
///
/// Returns `d_m` (over `[d_min, d_max]`) and the boundary ordered as `l_s_list`.
#[allow(clippy::too_many_arguments)]
pub fn tradeoff_boundary(
    p_in: f64,
    template: &CavityGeometry,
    d_min: f64,
    d_max: f64,
    l_s_list: &[f64],
    mat: &MaterialTable,
    loss: &LossTable,
    pv: &PVParams,
    pd: &PDParams,
) -> Result<(f64, Vec<BoundaryPoint>)> {
    if l_s_list.is_empty() {
        return Err(Error::invalid("l_s_list", "empty thickness list"));
    }
    let worst = find_worst_distance(template, mat.wavelength_m, d_min, d_max)?;
    let g = template.at_distance(worst.d_m);
    let points = l_s_list
        .par_iter()
        .map(|&l_s| {
            let opt = optimize_functional(p_in, &g, l_s, mat, loss)?;
            let link = evaluate_link(p_in, &g, &opt.params(), mat, loss, pv, pd)?;
            Ok(BoundaryPoint {
                shg_thickness: l_s,
                gain_aperture: opt.gain_aperture,
                r_m2: opt.r_m2,
                eta_trans: opt.eta_trans,
                p_chg: link.p_chg,
                r_b: link.r_b,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((worst.d_m, points))
}
