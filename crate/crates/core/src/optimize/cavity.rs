use super::config::OptimizerConfig;
use super::monte_carlo::{CavityConstraints, CavityProblem, WindowSearch};
use super::DesignReport;
use crate::error::Result;
use crate::optics::CavityGeometry;

/// Smallest `w00(z_g)` at `d_set` over `(l1, f1, l2, f2)` subject to the
/// lens-radius bounds and stability over `[d_min, d_max]`.
pub fn optimize_cavity_mc(cfg: &OptimizerConfig, wavelength: f64) -> Result<DesignReport> {
    cfg.validate()?;
    let constraints = CavityConstraints::from_config(cfg, wavelength);
    let out = WindowSearch::from_config(cfg).run(&CavityProblem(constraints))?;
    let v = &out.best;
    let v_star = CavityGeometry::new(v[0], v[1], v[2], v[3], cfg.d_set_m)?;
    Ok(DesignReport {
        v_star,
        m_star: None,
        objective: out.objective,
        d_m: None,
        samples: out.samples,
        iterations: out.history.len() as u32,
        seed: cfg.seed,
        boundary: Vec::new(),
        history: out.history,
    })
}
