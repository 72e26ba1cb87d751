//! Approximate symmetric reference design: identical retroreflectors
//! (`l1 = l2`, `f1 = f2`), so the waist sits mid-cavity.

use serde::Serialize;

use super::config::OptimizerConfig;
use super::functional::{optimize_functional, FunctionalOptimum};
use super::monte_carlo::CavityConstraints;
use super::worst_distance::find_worst_distance;
use crate::error::{Error, Result};
use crate::optics::CavityGeometry;
use crate::power::{LossTable, MaterialTable};
use crate::receiver::golden_max;

const GRID: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricBaseline {
    /// Structure at `d_set`.
    pub geometry: CavityGeometry,
    pub w00_gain: f64,
    pub d_m: f64,
    pub functional: FunctionalOptimum,
}

/// Smallest `w00(z_g)` at `d_set` with `l1 = l2 = l`, `f1 = f2 = focal`,
/// under the same constraints as the asymmetric search, followed by the
/// functional optimum at the baseline's own worst distance.
pub fn symmetric_baseline(
    cfg: &OptimizerConfig,
    focal: f64,
    p_in: f64,
    shg_thickness: f64,
    mat: &MaterialTable,
    loss: &LossTable,
) -> Result<SymmetricBaseline> {
    cfg.validate()?;
    let c = CavityConstraints::from_config(cfg, mat.wavelength_m);
    let w = |l: f64| {
        c.check(&CavityGeometry {
            l1: l,
            f1: focal,
            l2: l,
            f2: focal,
            d: cfg.d_set_m,
        })
        .ok()
    };
    // stability needs focusing power (l > f) but not so much that 1 + u d changes sign
    let lo = focal;
    let hi = focal + 2.0 * focal * focal / cfg.d_set_m.max(1e-3);
    let step = (hi - lo) / GRID as f64;
    let best = (1..GRID)
        .map(|k| lo + k as f64 * step)
        .filter_map(|l| w(l).map(|v| (l, v)))
        .fold(None::<(f64, f64)>, |acc, p| match acc {
            Some(b) if b.1 <= p.1 => Some(b),
            _ => Some(p),
        });
    let Some((l_grid, w_grid)) = best else {
        return Err(Error::invalid("baseline", "no feasible symmetric structure"));
    };
    let l_ref = golden_max(
        |l| w(l).map_or(f64::NEG_INFINITY, |v| -v),
        l_grid - step,
        l_grid + step,
        1e-12,
    );
    let (l, w00_gain) = match w(l_ref) {
        Some(v) if v < w_grid => (l_ref, v),
        _ => (l_grid, w_grid),
    };
    let geometry = CavityGeometry::new(l, focal, l, focal, cfg.d_set_m)?;
    let worst = find_worst_distance(&geometry, mat.wavelength_m, cfg.d_min_m, cfg.d_max_m)?;
    let functional = optimize_functional(p_in, &geometry.at_distance(worst.d_m), shg_thickness, mat, loss)?;
    Ok(SymmetricBaseline {
        geometry,
        w00_gain,
        d_m: worst.d_m,
        functional,
    })
}
