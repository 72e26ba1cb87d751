//! Shrinking-window Monte Carlo search.
//!
//! Iteration `j` draws `N_smax / j^2` uniform samples in the current window
//! and keeps a sample only if it beats the incumbent and passes every
//! constraint. The window then contracts by `alpha_sc` around the incumbent
//! and is clipped, element by element, to the original bounds.
//!
//! Samples are evaluated in parallel chunks. Within an iteration the
//! sequential acceptance rule keeps the feasible sample of smallest objective
//! (earliest on ties), so chunks reduce by `(objective, index)` and the result
//! does not depend on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use super::config::OptimizerConfig;
use super::rng::SampleStream;
use crate::beam::ModeSolution;
use crate::error::{Error, Result, ViolationCounts};
use crate::optics::{self, CavityGeometry};

const CHUNK: u64 = 2048;

/// Best objective in a batch and the sample attaining it.
type Sample = (f64, Vec<f64>);

/// First constraint a sample failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    NonPositive,
    UnstableAtDesignDistance,
    Lens1Radius,
    Lens2Radius,
    UnstableInRange,
}

impl ViolationCounts {
    fn record(&mut self, r: Rejection) {
        match r {
            Rejection::NonPositive => self.non_positive += 1,
            Rejection::UnstableAtDesignDistance => self.unstable_at_design_distance += 1,
            Rejection::Lens1Radius => self.l1_radius_exceeded += 1,
            Rejection::Lens2Radius => self.l2_radius_exceeded += 1,
            Rejection::UnstableInRange => self.unstable_in_range += 1,
        }
    }

    fn merge(&mut self, o: &ViolationCounts) {
        self.non_positive += o.non_positive;
        self.unstable_at_design_distance += o.unstable_at_design_distance;
        self.l1_radius_exceeded += o.l1_radius_exceeded;
        self.l2_radius_exceeded += o.l2_radius_exceeded;
        self.unstable_in_range += o.unstable_in_range;
    }
}

/// A minimization problem for the window search.
pub trait SearchProblem: Sync {
    fn dim(&self) -> usize;
    /// Objective of a sample that passes the inexpensive constraints.
    fn screen(&self, v: &[f64]) -> std::result::Result<f64, Rejection>;
    /// Remaining (expensive) constraints; only called on improving samples.
    fn certify(&self, v: &[f64]) -> std::result::Result<(), Rejection>;
}

/// One executed iteration of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub attempt: u32,
    pub samples: u64,
    pub lbound: Vec<f64>,
    pub ubound: Vec<f64>,
    /// Incumbent objective after the iteration; infinite while none exists.
    pub incumbent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: Vec<f64>,
    pub objective: f64,
    pub samples: u64,
    pub history: Vec<IterationRecord>,
}

/// Settings of one window search; bounds match the problem dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSearch {
    pub n_itr: u32,
    pub n_smax: u64,
    pub lbound: Vec<f64>,
    pub ubound: Vec<f64>,
    pub alpha_sc: f64,
    pub seed: u64,
    pub max_empty_attempts: u32,
}

impl WindowSearch {
    pub fn from_config(cfg: &OptimizerConfig) -> Self {
        Self {
            n_itr: cfg.n_itr,
            n_smax: cfg.n_smax,
            lbound: cfg.v_lbound_m.to_vec(),
            ubound: cfg.v_ubound_m.to_vec(),
            alpha_sc: cfg.alpha_sc,
            seed: cfg.seed,
            max_empty_attempts: cfg.max_empty_attempts,
        }
    }

    fn samples_in_iteration(&self, j: u32) -> u64 {
        (self.n_smax / (j as u64 * j as u64)).max(1)
    }

    pub fn run<P: SearchProblem>(&self, problem: &P) -> Result<SearchOutcome> {
        let dim = problem.dim();
        if self.lbound.len() != dim || self.ubound.len() != dim {
            return Err(Error::invalid("bounds", format!("expected {dim} elements")));
        }
        let mut lo = self.lbound.clone();
        let mut hi = self.ubound.clone();
        let mut diff: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut samples = 0u64;
        let mut history = Vec::with_capacity(self.n_itr as usize);
        let mut counts = ViolationCounts::default();

        for j in 1..=self.n_itr {
            let n_s = self.samples_in_iteration(j);
            let mut attempt = 0;
            loop {
                let threshold = best.as_ref().map_or(f64::INFINITY, |b| b.0);
                let found = self.iteration(problem, j, attempt, n_s, &lo, &hi, threshold, &mut counts);
                samples += n_s;
                if let Some(f) = found {
                    best = Some(f);
                }
                history.push(IterationRecord {
                    iteration: j,
                    attempt,
                    samples: n_s,
                    lbound: lo.clone(),
                    ubound: hi.clone(),
                    incumbent: best.as_ref().map_or(f64::INFINITY, |b| b.0),
                });
                if best.is_some() {
                    break;
                }
                attempt += 1;
                if attempt > self.max_empty_attempts {
                    return Err(Error::Infeasible { samples, counts });
                }
            }
            let v_star = &best.as_ref().expect("incumbent exists").1;
            for k in 0..dim {
                diff[k] *= self.alpha_sc;
                lo[k] = (v_star[k] - diff[k]).max(self.lbound[k]);
                hi[k] = (v_star[k] + diff[k]).min(self.ubound[k]);
            }
        }
        let (objective, best) = best.expect("at least one iteration ran");
        Ok(SearchOutcome {
            best,
            objective,
            samples,
            history,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn iteration<P: SearchProblem>(
        &self,
        problem: &P,
        iteration: u32,
        attempt: u32,
        n_s: u64,
        lo: &[f64],
        hi: &[f64],
        threshold: f64,
        counts: &mut ViolationCounts,
    ) -> Option<Sample> {
        let dim = problem.dim();
        let chunks = n_s.div_ceil(CHUNK);
        let results: Vec<(Option<Sample>, ViolationCounts)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(n_s);
                let mut stream = SampleStream::new(self.seed, iteration, attempt, dim);
                stream.seek(start);
                let mut v = vec![0.0; dim];
                let mut local: Option<(f64, Vec<f64>)> = None;
                let mut local_counts = ViolationCounts::default();
                for _ in start..end {
                    stream.fill(lo, hi, &mut v);
                    match problem.screen(&v) {
                        Err(r) => local_counts.record(r),
                        Ok(w) => {
                            let bar = local.as_ref().map_or(threshold, |b| b.0.min(threshold));
                            if w < bar {
                                match problem.certify(&v) {
                                    Ok(()) => local = Some((w, v.clone())),
                                    Err(r) => local_counts.record(r),
                                }
                            }
                        }
                    }
                }
                (local, local_counts)
            })
            .collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for (local, c) in results {
            counts.merge(&c);
            if let Some((w, v)) = local {
                if best.as_ref().is_none_or(|b| w < b.0) {
                    best = Some((w, v));
                }
            }
        }
        best
    }
}

/// Constraints shared by the cavity structure and lens placement searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConstraints {
    pub d_set: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub a_l1_bound: f64,
    pub a_l2_bound: f64,
    pub wavelength: f64,
}

impl CavityConstraints {
    pub fn from_config(cfg: &OptimizerConfig, wavelength: f64) -> Self {
        Self {
            d_set: cfg.d_set_m,
            d_min: cfg.d_min_m,
            d_max: cfg.d_max_m,
            a_l1_bound: cfg.a_l1_bound_m,
            a_l2_bound: cfg.a_l2_bound_m,
            wavelength,
        }
    }

    /// `w00(z_g)` at `d_set` when the radius and design-distance constraints hold.
    pub fn screen(&self, l1: f64, f1: f64, l2: f64, f2: f64) -> std::result::Result<f64, Rejection> {
        if !(l1 > 0.0 && f1 > 0.0 && l2 > 0.0 && f2 > 0.0) {
            return Err(Rejection::NonPositive);
        }
        let g = CavityGeometry {
            l1,
            f1,
            l2,
            f2,
            d: self.d_set,
        };
        let mode = ModeSolution::new(&g, self.wavelength).map_err(|_| Rejection::UnstableAtDesignDistance)?;
        if !(mode.w00_lens1() <= self.a_l1_bound) {
            return Err(Rejection::Lens1Radius);
        }
        if !(mode.w00_lens2() <= self.a_l2_bound) {
            return Err(Rejection::Lens2Radius);
        }
        Ok(mode.w00_gain())
    }

    pub fn certify(&self, l1: f64, f1: f64, l2: f64, f2: f64) -> std::result::Result<(), Rejection> {
        let g = CavityGeometry {
            l1,
            f1,
            l2,
            f2,
            d: self.d_set,
        };
        match g
            .stability_polynomial()
            .first_unstable(optics::range_start(self.d_min, self.d_max), self.d_max)
        {
            None => Ok(()),
            Some(_) => Err(Rejection::UnstableInRange),
        }
    }

    /// Re-check every constraint from scratch; `Ok` carries `w00(z_g)` at `d_set`.
    pub fn check(&self, g: &CavityGeometry) -> std::result::Result<f64, Rejection> {
        let w = self.screen(g.l1, g.f1, g.l2, g.f2)?;
        self.certify(g.l1, g.f1, g.l2, g.f2)?;
        Ok(w)
    }
}

/// Full four-parameter search over `(l1, f1, l2, f2)`.
#[derive(Debug, Clone, Copy)]
pub struct CavityProblem(pub CavityConstraints);

impl SearchProblem for CavityProblem {
    fn dim(&self) -> usize {
        4
    }

    fn screen(&self, v: &[f64]) -> std::result::Result<f64, Rejection> {
        self.0.screen(v[0], v[1], v[2], v[3])
    }

    fn certify(&self, v: &[f64]) -> std::result::Result<(), Rejection> {
        self.0.certify(v[0], v[1], v[2], v[3])
    }
}

/// Lens placement search over `(l1, l2)` with frozen focal lengths.
#[derive(Debug, Clone, Copy)]
pub struct PlacementProblem {
    pub constraints: CavityConstraints,
    pub f1: f64,
    pub f2: f64,
}

impl SearchProblem for PlacementProblem {
    fn dim(&self) -> usize {
        2
    }

    fn screen(&self, v: &[f64]) -> std::result::Result<f64, Rejection> {
        self.constraints.screen(v[0], self.f1, v[1], self.f2)
    }

    fn certify(&self, v: &[f64]) -> std::result::Result<(), Rejection> {
        self.constraints.certify(v[0], self.f1, v[1], self.f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimize |v - c|^2 over the box, with a forbidden half-space.
    struct Bowl;

    impl SearchProblem for Bowl {
        fn dim(&self) -> usize {
            2
        }
        fn screen(&self, v: &[f64]) -> std::result::Result<f64, Rejection> {
            Ok((v[0] - 0.3).powi(2) + (v[1] - 0.6).powi(2))
        }
        fn certify(&self, v: &[f64]) -> std::result::Result<(), Rejection> {
            if v[0] + v[1] > 0.85 {
                Err(Rejection::UnstableInRange)
            } else {
                Ok(())
            }
        }
    }

    fn search(seed: u64) -> WindowSearch {
        WindowSearch {
            n_itr: 20,
            n_smax: 20_000,
            lbound: vec![0.0, 0.0],
            ubound: vec![1.0, 1.0],
            alpha_sc: 0.7,
            seed,
            max_empty_attempts: 0,
        }
    }

    #[test]
    fn converges_to_constrained_minimum() {
        let out = search(1).run(&Bowl).unwrap();
        // projection of (0.3, 0.6) on x + y = 0.85
        assert!((out.best[0] - 0.275).abs() < 1e-3, "{:?}", out.best);
        assert!((out.best[1] - 0.575).abs() < 1e-3, "{:?}", out.best);
        assert!(out.best[0] + out.best[1] <= 0.85);
    }

    #[test]
    fn incumbent_monotone_and_window_clipped() {
        let out = search(2).run(&Bowl).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1].incumbent <= w[0].incumbent);
        }
        for rec in &out.history {
            for k in 0..2 {
                assert!(rec.lbound[k] >= 0.0 && rec.ubound[k] <= 1.0);
                assert!(rec.lbound[k] <= rec.ubound[k]);
            }
        }
        let expected: u64 = (1..=20u64).map(|j| (20_000 / (j * j)).max(1)).sum();
        assert_eq!(out.samples, expected);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| search(3).run(&Bowl).unwrap());
        let b = many.install(|| search(3).run(&Bowl).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_reports_counts() {
        let c = CavityConstraints {
            d_set: 6.0,
            d_min: 0.0,
            d_max: 6.0,
            a_l1_bound: 0.0,
            a_l2_bound: 0.0,
            wavelength: 1064e-9,
        };
        let mut s = search(4);
        s.n_smax = 5_000;
        s.lbound = vec![0.0; 4];
        s.ubound = vec![0.06; 4];
        s.max_empty_attempts = 1;
        match s.run(&CavityProblem(c)) {
            Err(Error::Infeasible { samples, counts }) => {
                assert_eq!(samples, 10_000);
                let total = counts.non_positive
                    + counts.unstable_at_design_distance
                    + counts.l1_radius_exceeded
                    + counts.l2_radius_exceeded
                    + counts.unstable_in_range;
                assert_eq!(total, samples);
                assert_eq!(counts.l2_radius_exceeded + counts.unstable_in_range, 0);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
