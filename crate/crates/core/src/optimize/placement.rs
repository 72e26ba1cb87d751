use std::cell::Cell;

use super::config::OptimizerConfig;
use super::monte_carlo::{CavityConstraints, PlacementProblem, WindowSearch};
use super::DesignReport;
use crate::error::{Error, Result};
use crate::optics::CavityGeometry;
use crate::receiver::golden_max;

/// Step of the polish along the outer gap [m].
pub const POLISH_STEP: f64 = 1e-6;
/// Outer steps tried on each side of the window-search optimum.
const OUTER_REACH: usize = 500;
/// Inner scan spacing and half-width; the radius constraints move by about
/// 1e-4 relative per 1e-8 m of gap, so the scan resolves them.
const INNER_STEP: f64 = 2e-8;
const INNER_HALF_WIDTH: i32 = 50;
const MAX_RECENTRES: usize = 50;
const EDGE_TOLERANCE: f64 = 1e-13;
/// Consecutive infeasible outer steps that end a direction.
const MAX_MISSES: usize = 3;

/// Objective at `(l1, l2)`; `None` when a constraint fails.
struct Evaluator<'a> {
    constraints: &'a CavityConstraints,
    f1: f64,
    f2: f64,
    d_set: f64,
    lo: [f64; 2],
    hi: [f64; 2],
    count: Cell<u64>,
}

impl Evaluator<'_> {
    fn at(&self, v: [f64; 2]) -> Option<f64> {
        if (0..2).any(|k| v[k] < self.lo[k] || v[k] > self.hi[k]) {
            return None;
        }
        self.count.set(self.count.get() + 1);
        self.constraints
            .check(&CavityGeometry {
                l1: v[0],
                f1: self.f1,
                l2: v[1],
                f2: self.f2,
                d: self.d_set,
            })
            .ok()
    }

    fn point(outer: usize, x: f64, y: f64) -> [f64; 2] {
        if outer == 0 {
            [x, y]
        } else {
            [y, x]
        }
    }

    /// Best inner coordinate for outer coordinate `x`, starting near `y0`.
    ///
    /// A uniform scan locates the best feasible point; an infeasible
    /// neighbour means the optimum sits on a constraint edge, found by
    /// bisection, otherwise golden-section refines the interior minimum.
    fn inner(&self, outer: usize, x: f64, y0: f64) -> Option<(f64, f64)> {
        let f = |y: f64| self.at(Self::point(outer, x, y));
        let mut centre = y0;
        for _ in 0..MAX_RECENTRES {
            let ys: Vec<f64> = (-INNER_HALF_WIDTH..=INNER_HALF_WIDTH)
                .map(|k| centre + k as f64 * INNER_STEP)
                .collect();
            let ws: Vec<Option<f64>> = ys.iter().map(|&y| f(y)).collect();
            let (kb, wb) = ws
                .iter()
                .enumerate()
                .filter_map(|(k, w)| w.map(|w| (k, w)))
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            let last = ys.len() - 1;
            if (kb == 0 && ws.get(1).is_some_and(Option::is_some)) || (kb == last && ws[last - 1].is_some()) {
                // still descending at the scan edge: follow it
                centre = ys[kb];
                continue;
            }
            let mut best = (ys[kb], wb);
            let neighbours = [kb.checked_sub(1), (kb < last).then_some(kb + 1)];
            let interior = neighbours.iter().all(|n| n.is_some_and(|n| ws[n].is_some()));
            if interior {
                let y = golden_max(
                    |y| f(y).map_or(f64::NEG_INFINITY, |w| -w),
                    ys[kb - 1],
                    ys[kb + 1],
                    EDGE_TOLERANCE,
                );
                if let Some(w) = f(y) {
                    if w < best.1 {
                        best = (y, w);
                    }
                }
            } else {
                for n in neighbours.into_iter().flatten().filter(|&n| ws[n].is_none()) {
                    let (mut good, mut bad) = (ys[kb], ys[n]);
                    while (bad - good).abs() > EDGE_TOLERANCE {
                        let mid = 0.5 * (good + bad);
                        if f(mid).is_some() {
                            good = mid;
                        } else {
                            bad = mid;
                        }
                    }
                    if let Some(w) = f(good) {
                        if w < best.1 {
                            best = (good, w);
                        }
                    }
                }
            }
            return Some(best);
        }
        None
    }

    /// Follow the valley along `outer` from `start`, both directions.
    fn ridge(&self, outer: usize, start: [f64; 2]) -> ([f64; 2], f64) {
        let inner_axis = 1 - outer;
        let (x0, y0) = (start[outer], start[inner_axis]);
        let mut best: Option<(f64, f64, f64)> = None;
        for dir in [1.0, -1.0] {
            let mut y = y0;
            let mut misses = 0;
            for k in 0..=OUTER_REACH {
                let x = x0 + dir * k as f64 * POLISH_STEP;
                if x < self.lo[outer] || x > self.hi[outer] {
                    break;
                }
                match self.inner(outer, x, y) {
                    Some((yk, w)) => {
                        misses = 0;
                        y = yk;
                        if best.is_none_or(|b| w < b.2) {
                            best = Some((x, yk, w));
                        }
                    }
                    None => {
                        misses += 1;
                        if misses >= MAX_MISSES {
                            break;
                        }
                    }
                }
            }
        }
        let Some((xb, yb, wb)) = best else {
            return (start, f64::INFINITY);
        };
        let x = golden_max(
            |x| self.inner(outer, x, yb).map_or(f64::NEG_INFINITY, |(_, w)| -w),
            xb - POLISH_STEP,
            xb + POLISH_STEP,
            EDGE_TOLERANCE,
        );
        match self.inner(outer, x, yb) {
            Some((y, w)) if w < wb => (Self::point(outer, x, y), w),
            _ => (Self::point(outer, xb, yb), wb),
        }
    }
}

/// Smallest `w00(z_g)` at `d_set` over `(l1, l2)` with the focal lengths frozen.
///
/// Window search on the two gaps (bounds taken from the `l1`, `l2` elements
/// of the config), then a valley-following polish: step one gap by
/// [`POLISH_STEP`], re-optimize the other, for each choice of outer gap.
pub fn optimize_placement(cfg: &OptimizerConfig, wavelength: f64, f1: f64, f2: f64) -> Result<DesignReport> {
    cfg.validate()?;
    if !(f1 > 0.0) || !(f2 > 0.0) {
        return Err(Error::invalid(
            "f_set",
            format!("focal lengths must be > 0, got ({f1}, {f2})"),
        ));
    }
    let constraints = CavityConstraints::from_config(cfg, wavelength);
    let problem = PlacementProblem { constraints, f1, f2 };
    let mut search = WindowSearch::from_config(cfg);
    search.lbound = vec![cfg.v_lbound_m[0], cfg.v_lbound_m[2]];
    search.ubound = vec![cfg.v_ubound_m[0], cfg.v_ubound_m[2]];
    let out = search.run(&problem)?;

    let ev = Evaluator {
        constraints: &constraints,
        f1,
        f2,
        d_set: cfg.d_set_m,
        lo: [search.lbound[0], search.lbound[1]],
        hi: [search.ubound[0], search.ubound[1]],
        count: Cell::new(0),
    };
    let start = [out.best[0], out.best[1]];
    let mut best = (start, out.objective);
    for outer in [0, 1] {
        let cand = ev.ridge(outer, start);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let ([l1, l2], w) = best;
    Ok(DesignReport {
        v_star: CavityGeometry::new(l1, f1, l2, f2, cfg.d_set_m)?,
        m_star: None,
        objective: w,
        d_m: None,
        samples: out.samples + ev.count.get(),
        iterations: out.history.len() as u32,
        seed: cfg.seed,
        boundary: Vec::new(),
        history: out.history,
    })
}
