use serde::Serialize;

use crate::beam::ModeSolution;
use crate::error::{Error, Result};
use crate::optics::{self, CavityGeometry};
use crate::receiver::golden_max;

pub const GRID_STEP: f64 = 0.01;
pub const REFINE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstDistance {
    pub d_m: f64,
    pub w00_gain: f64,
}

fn w00_gain_at(template: &CavityGeometry, wavelength: f64, d: f64) -> Result<f64> {
    Ok(ModeSolution::new(&template.at_distance(d), wavelength)?.w00_gain())
}

/// Distance in `[d_min, d_max]` where `w00(z_g)` peaks: 1 cm scan, then golden-section.
pub fn find_worst_distance(
    template: &CavityGeometry,
    wavelength: f64,
    d_min: f64,
    d_max: f64,
) -> Result<WorstDistance> {
    let range = optics::range_stability(template, d_min, d_max)?;
    if let Some(d) = range.first_failure {
        return Err(Error::Unstable {
            distance: d,
            product: optics::stability_product(&template.at_distance(d)),
        });
    }
    let lo = optics::range_start(d_min, d_max);
    let n = ((d_max - lo) / GRID_STEP).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|k| (lo + k as f64 * GRID_STEP).min(d_max)).collect();
    let mut k_best = 0;
    let mut w_best = f64::NEG_INFINITY;
    for (k, &d) in grid.iter().enumerate() {
        let w = w00_gain_at(template, wavelength, d)?;
        if w > w_best {
            w_best = w;
            k_best = k;
        }
    }
    let a = grid[k_best.saturating_sub(1)];
    let b = grid[(k_best + 1).min(n)];
    let f = |d: f64| w00_gain_at(template, wavelength, d).unwrap_or(f64::NEG_INFINITY);
    let d_ref = golden_max(f, a, b, REFINE_TOLERANCE);
    let w_ref = f(d_ref);
    let (d_m, w00_gain) = if w_ref >= w_best {
        (d_ref, w_ref)
    } else {
        (grid[k_best], w_best)
    };
    Ok(WorstDistance { d_m, w00_gain })
}
