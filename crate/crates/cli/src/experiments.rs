//! The five canonical experiments. Each one is a pure function of the
//! scenario: tables and plot requests come back, nothing touches the disk.

use rayon::prelude::*;
use sslr_core::beam::{self, ModeSolution};
use sslr_core::optics::CavityGeometry;
use sslr_core::optimize::{self, DesignReport, LinkPerformance};
use sslr_core::power::{self, FunctionalParams};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::plot::PlotSpec;
use crate::table::{format_value, Column, ResultTable};

/// Axis resolution of the efficiency surface emitted next to the functional optimum.
pub const SURFACE_POINTS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    OptimizeCavity,
    OptimizePlacement,
    OptimizeFunctional,
    Tradeoff,
    SweepDistance,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::OptimizeCavity,
        Experiment::OptimizePlacement,
        Experiment::OptimizeFunctional,
        Experiment::Tradeoff,
        Experiment::SweepDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OptimizeCavity => "optimize-cavity",
            Experiment::OptimizePlacement => "optimize-placement",
            Experiment::OptimizeFunctional => "optimize-functional",
            Experiment::Tradeoff => "tradeoff",
            Experiment::SweepDistance => "sweep-distance",
        }
    }

    /// File stem of the primary table.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<ResultTable>,
    /// `(table name, plot)`
    pub plots: Vec<(String, PlotSpec)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// A model error together with whatever finished before it.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub partial: Vec<ResultTable>,
}

impl From<sslr_core::Error> for Failure {
    fn from(e: sslr_core::Error) -> Self {
        Failure {
            error: e.into(),
            partial: Vec::new(),
        }
    }
}

trait Partial<T> {
    fn keep(self, partial: &[ResultTable]) -> Result<T, Failure>;
}

impl<T> Partial<T> for sslr_core::Result<T> {
    fn keep(self, partial: &[ResultTable]) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            error: e.into(),
            partial: partial.to_vec(),
        })
    }
}

fn cols(spec: &[(&str, &str)]) -> Vec<Column> {
    spec.iter().map(|(n, u)| Column::new(n, u)).collect()
}

pub fn run_experiment(exp: Experiment, cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    match exp {
        Experiment::OptimizeCavity => optimize_cavity(cfg),
        Experiment::OptimizePlacement => optimize_placement(cfg),
        Experiment::OptimizeFunctional => optimize_functional(cfg),
        Experiment::Tradeoff => tradeoff(cfg),
        Experiment::SweepDistance => sweep_distance(cfg),
    }
}

fn profile_table(name: &str, g: &CavityGeometry, cfg: &ScenarioConfig) -> sslr_core::Result<ResultTable> {
    let mut t = ResultTable::new(name, cols(&[("d", "m"), ("z", "m"), ("w00", "m")]));
    for &d in &cfg.cavity.profile_distances_m {
        let p = beam::profile(&g.at_distance(d), cfg.material.wavelength_m, cfg.cavity.profile_samples)?;
        for (z, w) in p.samples {
            t.push(vec![d, z, w]);
        }
    }
    Ok(t)
}

fn history_table(name: &str, rep: &DesignReport) -> ResultTable {
    let mut spec = vec![("iteration", ""), ("attempt", ""), ("samples", ""), ("incumbent", "m")];
    let dims = ["l1", "f1", "l2", "f2"];
    let width = rep.history.first().map_or(0, |h| h.lbound.len());
    let lb: Vec<String> = dims[..width].iter().map(|d| format!("lbound_{d}")).collect();
    let ub: Vec<String> = dims[..width].iter().map(|d| format!("ubound_{d}")).collect();
    spec.extend(lb.iter().chain(&ub).map(|n| (n.as_str(), "m")));
    let mut t = ResultTable::new(name, cols(&spec));
    for h in &rep.history {
        let mut row = vec![h.iteration as f64, h.attempt as f64, h.samples as f64, h.incumbent];
        row.extend(h.lbound.iter().chain(&h.ubound));
        t.push(row);
    }
    t
}

const STRUCTURE_COLUMNS: [(&str, &str); 10] = [
    ("l1", "m"),
    ("f1", "m"),
    ("l2", "m"),
    ("f2", "m"),
    ("w00_gain", "m"),
    ("w00_l1", "m"),
    ("w00_l2", "m"),
    ("d_worst", "m"),
    ("w00_gain_worst", "m"),
    ("samples", ""),
];

/// Structure columns of one design: radii at `d_set`, then the worst distance.
fn structure_row(rep: &DesignReport, cfg: &ScenarioConfig) -> sslr_core::Result<Vec<f64>> {
    let g = rep.v_star;
    let lambda = cfg.material.wavelength_m;
    let mode = ModeSolution::new(&g, lambda)?;
    let worst = optimize::find_worst_distance(&g, lambda, cfg.optimizer.d_min_m, cfg.optimizer.d_max_m)?;
    Ok(vec![
        g.l1,
        g.f1,
        g.l2,
        g.f2,
        mode.w00_gain(),
        mode.w00_lens1(),
        mode.w00_lens2(),
        worst.d_m,
        worst.w00_gain,
        rep.samples as f64,
    ])
}

fn optimize_cavity(cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    let stem = Experiment::OptimizeCavity.stem();
    let lambda = cfg.material.wavelength_m;
    let seed = cfg.optimizer.seed;
    let runs: Vec<sslr_core::Result<DesignReport>> = (0..cfg.cavity.runs as u64)
        .into_par_iter()
        .map(|r| optimize::optimize_cavity_mc(&cfg.optimizer.with_seed(seed + r), lambda))
        .collect();

    let mut spec = vec![("run", ""), ("seed", "")];
    spec.extend(STRUCTURE_COLUMNS);
    spec.push(("iterations", ""));
    let mut table = ResultTable::new(&stem, cols(&spec));
    let mut first: Option<DesignReport> = None;
    for (r, rep) in runs.into_iter().enumerate() {
        let rep = rep.keep(std::slice::from_ref(&table))?;
        let mut row = vec![r as f64, rep.seed as f64];
        row.extend(structure_row(&rep, cfg).keep(std::slice::from_ref(&table))?);
        row.push(rep.iterations as f64);
        table.push(row);
        first.get_or_insert(rep);
    }
    let w = table.column("w00_gain_m").expect("own column");
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let spread = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - w.iter().cloned().fold(f64::INFINITY, f64::min);
    table.set_meta("w00_gain_mean_m", format_value(mean));
    table.set_meta("w00_gain_spread_m", format_value(spread));

    let first = first.expect("runs >= 1");
    let profile = profile_table(&format!("{stem}_profile"), &first.v_star, cfg).keep(std::slice::from_ref(&table))?;
    let history = history_table(&format!("{stem}_history"), &first);
    Ok(ExperimentOutput {
        plots: vec![(
            profile.name.clone(),
            PlotSpec::profile(
                &profile.name,
                "TEM00 radius along the cavity axis",
                "d_m",
                "z_m",
                "w00_m",
            ),
        )],
        tables: vec![table, profile, history],
    })
}

fn optimize_placement(cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    let stem = Experiment::OptimizePlacement.stem();
    let lambda = cfg.material.wavelength_m;
    let rep = optimize::optimize_placement(&cfg.optimizer, lambda, cfg.placement.f1_set_m, cfg.placement.f2_set_m)?;
    let mut table = ResultTable::new(&stem, cols(&STRUCTURE_COLUMNS));
    table.push(structure_row(&rep, cfg)?);
    let done = [table.clone()];

    let profile = profile_table(&format!("{stem}_profile"), &rep.v_star, cfg).keep(&done)?;
    let (d_lo, d_hi) = (cfg.optimizer.d_min_m, cfg.optimizer.d_max_m);
    let distances: Vec<f64> = cfg
        .sweep
        .distances()
        .into_iter()
        .filter(|d| (d_lo..=d_hi).contains(d))
        .collect();
    let radii = distances
        .par_iter()
        .map(|&d| ModeSolution::new(&rep.v_star.at_distance(d), lambda).map(|m| m.w00_gain()))
        .collect::<sslr_core::Result<Vec<f64>>>()
        .keep(&done)?;
    let mut by_distance = ResultTable::new(&format!("{stem}_distance"), cols(&[("d", "m"), ("w00_gain", "m")]));
    for (d, w) in distances.iter().zip(radii) {
        by_distance.push(vec![*d, w]);
    }
    let history = history_table(&format!("{stem}_history"), &rep);
    Ok(ExperimentOutput {
        plots: vec![
            (
                profile.name.clone(),
                PlotSpec::profile(
                    &profile.name,
                    "TEM00 radius along the cavity axis",
                    "d_m",
                    "z_m",
                    "w00_m",
                ),
            ),
            (
                by_distance.name.clone(),
                PlotSpec::line(
                    &by_distance.name,
                    "TEM00 radius at the gain medium",
                    "d_m",
                    &["w00_gain_m"],
                ),
            ),
        ],
        tables: vec![table, profile, by_distance, history],
    })
}

/// Configured geometry evaluated at its own worst distance.
fn worst_case_geometry(cfg: &ScenarioConfig) -> Result<CavityGeometry, Failure> {
    let template = cfg.geometry.at(cfg.optimizer.d_set_m).map_err(|error| Failure {
        error,
        partial: Vec::new(),
    })?;
    let worst = optimize::find_worst_distance(
        &template,
        cfg.material.wavelength_m,
        cfg.optimizer.d_min_m,
        cfg.optimizer.d_max_m,
    )?;
    Ok(template.at_distance(worst.d_m))
}

const FUNCTIONAL_COLUMNS: [(&str, &str); 12] = [
    ("l_s", "m"),
    ("d_worst", "m"),
    ("w00_gain", "m"),
    ("a_g", "m"),
    ("r_m2", ""),
    ("eta_trans", ""),
    ("p4", "w"),
    ("eta_shg", ""),
    ("gamma_diff", ""),
    ("p_recv_pt", "w"),
    ("p_recv_it", "w"),
    ("steps", ""),
];

fn optimize_functional(cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    let stem = Experiment::OptimizeFunctional.stem();
    let g = worst_case_geometry(cfg)?;
    let (mat, loss) = (&cfg.material, &cfg.loss);
    let l_s = cfg.functional.l_s_m;
    let opt = optimize::optimize_functional(cfg.p_in_w, &g, l_s, mat, loss)?;
    let b = &opt.breakdown;
    let mut table = ResultTable::new(&stem, cols(&FUNCTIONAL_COLUMNS));
    table.push(vec![
        l_s,
        g.d,
        opt.w00_gain,
        opt.gain_aperture,
        opt.r_m2,
        opt.eta_trans,
        b.p4,
        b.eta_shg,
        b.gamma_diff,
        b.p_recv_pt,
        b.p_recv_it,
        opt.steps as f64,
    ]);

    let n = SURFACE_POINTS;
    let grid: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| {
            let a_g = opt.w00_gain * (1.0 + 2.0 * i as f64 / (n - 1) as f64);
            (0..n).map(move |j| (a_g, j as f64 / (n - 1) as f64))
        })
        .collect();
    let etas = grid
        .par_iter()
        .map(|&(a_g, r)| {
            let m = FunctionalParams::new(a_g, r, l_s)?;
            power::solve_circulation(cfg.p_in_w, &g, &m, mat, loss).map(|pb| pb.eta_trans)
        })
        .collect::<sslr_core::Result<Vec<f64>>>()
        .keep(std::slice::from_ref(&table))?;
    let mut surface = ResultTable::new(
        &format!("{stem}_surface"),
        cols(&[("a_g", "m"), ("r_m2", ""), ("eta_trans", "")]),
    );
    for ((a_g, r), eta) in grid.into_iter().zip(etas) {
        surface.push(vec![a_g, r, eta]);
    }
    Ok(ExperimentOutput {
        tables: vec![table, surface],
        plots: Vec::new(),
    })
}

fn tradeoff(cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    let stem = Experiment::Tradeoff.stem();
    let template = cfg.geometry.at(cfg.optimizer.d_set_m).map_err(|error| Failure {
        error,
        partial: Vec::new(),
    })?;
    let (d_m, points) = optimize::tradeoff_boundary(
        cfg.p_in_w,
        &template,
        cfg.optimizer.d_min_m,
        cfg.optimizer.d_max_m,
        &cfg.tradeoff.l_s_list_m,
        &cfg.material,
        &cfg.loss,
        &cfg.pv,
        &cfg.pd,
    )?;
    let mut table = ResultTable::new(
        &stem,
        cols(&[
            ("l_s", "m"),
            ("a_g", "m"),
            ("r_m2", ""),
            ("eta_trans", ""),
            ("p_chg", "w"),
            ("r_b", "bps_hz"),
        ]),
    );
    table.set_meta("d_worst_m", format_value(d_m));
    for p in &points {
        table.push(vec![
            p.shg_thickness,
            p.gain_aperture,
            p.r_m2,
            p.eta_trans,
            p.p_chg,
            p.r_b,
        ]);
    }
    Ok(ExperimentOutput {
        plots: vec![
            (
                stem.clone(),
                PlotSpec::boundary(
                    &format!("{stem}_boundary"),
                    "Power-rate boundary",
                    "p_chg_w",
                    "r_b_bps_hz",
                ),
            ),
            (
                stem.clone(),
                PlotSpec::line(
                    &format!("{stem}_functional"),
                    "Functional optimum vs SHG thickness",
                    "l_s_m",
                    &["r_m2", "eta_trans"],
                ),
            ),
        ],
        tables: vec![table],
    })
}

fn link_rows(
    cfg: &ScenarioConfig,
    template: &CavityGeometry,
    m: &FunctionalParams,
    distances: &[f64],
) -> Vec<sslr_core::Result<LinkPerformance>> {
    distances
        .par_iter()
        .map(|&d| {
            optimize::evaluate_link(
                cfg.p_in_w,
                &template.at_distance(d),
                m,
                &cfg.material,
                &cfg.loss,
                &cfg.pv,
                &cfg.pd,
            )
        })
        .collect()
}

fn sweep_distance(cfg: &ScenarioConfig) -> Result<ExperimentOutput, Failure> {
    let stem = Experiment::SweepDistance.stem();
    let g = worst_case_geometry(cfg)?;
    let l_s = cfg.functional.l_s_m;
    let opt = optimize::optimize_functional(cfg.p_in_w, &g, l_s, &cfg.material, &cfg.loss)?;
    let baseline = if cfg.sweep.baseline {
        Some(optimize::symmetric_baseline(
            &cfg.optimizer,
            cfg.placement.f1_set_m,
            cfg.p_in_w,
            l_s,
            &cfg.material,
            &cfg.loss,
        )?)
    } else {
        None
    };

    let distances = cfg.sweep.distances();
    let main = link_rows(cfg, &g, &opt.params(), &distances);
    let base = baseline.map(|b| link_rows(cfg, &b.geometry, &b.functional.params(), &distances));

    let mut spec = vec![
        ("d", "m"),
        ("w00_gain", "m"),
        ("p_chg", "w"),
        ("r_b", "bps_hz"),
        ("p_recv_pt", "w"),
        ("p_recv_it", "w"),
    ];
    if base.is_some() {
        spec.extend([
            ("baseline_w00_gain", "m"),
            ("baseline_p_chg", "w"),
            ("baseline_r_b", "bps_hz"),
        ]);
    }
    let mut table = ResultTable::new(&stem, cols(&spec));
    table.set_meta("d_worst_m", format_value(g.d));
    table.set_meta("a_g_m", format_value(opt.gain_aperture));
    table.set_meta("r_m2", format_value(opt.r_m2));
    table.set_meta("l_s_m", format_value(l_s));
    if let Some(b) = &baseline {
        table.set_meta("baseline_l_m", format_value(b.geometry.l1));
        table.set_meta("baseline_d_worst_m", format_value(b.d_m));
        table.set_meta("baseline_a_g_m", format_value(b.functional.gain_aperture));
        table.set_meta("baseline_r_m2", format_value(b.functional.r_m2));
    }
    let has_base = base.is_some();
    let mut base = base.map(|b| b.into_iter());
    let mut first_error = None;
    for link in main {
        let other = base
            .as_mut()
            .map(|it| it.next().expect("one baseline point per distance"));
        match (link, other) {
            (Ok(a), None) => table.push(vec![
                a.distance,
                a.w00_gain,
                a.p_chg,
                a.r_b,
                a.breakdown.p_recv_pt,
                a.breakdown.p_recv_it,
            ]),
            (Ok(a), Some(Ok(b))) => table.push(vec![
                a.distance,
                a.w00_gain,
                a.p_chg,
                a.r_b,
                a.breakdown.p_recv_pt,
                a.breakdown.p_recv_it,
                b.w00_gain,
                b.p_chg,
                b.r_b,
            ]),
            (Err(e), _) | (_, Some(Err(e))) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        return Err(Failure {
            error: e.into(),
            partial: vec![table],
        });
    }

    let with_base = |a: &'static str, b: &'static str| if has_base { vec![a, b] } else { vec![a] };
    let plots = [
        (
            "w00",
            "TEM00 radius at the gain medium",
            with_base("w00_gain_m", "baseline_w00_gain_m"),
        ),
        ("p_chg", "Charging power", with_base("p_chg_w", "baseline_p_chg_w")),
        ("r_b", "Achievable rate", with_base("r_b_bps_hz", "baseline_r_b_bps_hz")),
    ]
    .into_iter()
    .map(|(suffix, title, ys)| {
        (
            stem.clone(),
            PlotSpec::line(&format!("{stem}_{suffix}"), title, "d_m", &ys),
        )
    })
    .collect();
    Ok(ExperimentOutput {
        tables: vec![table],
        plots,
    })
}
