//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria whose reference values the model does not reach are listed in
//! `KNOWN_DEVIATIONS`; they are still evaluated at full tolerance and
//! reported as FAIL. The process fails only when some other criterion fails,
//! or when a listed deviation starts passing (so the list cannot go stale).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use sslr_cli::table::payload;
use sslr_cli::{run, run_experiment, Experiment, ExperimentOutput, RunOptions, ScenarioConfig};
use sslr_core::optimize;

#[allow(dead_code)]
#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

const KNOWN_DEVIATIONS: &[&str] = &["2", "6"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn experiment(exp: Experiment, cfg: &ScenarioConfig) -> (ExperimentOutput, Duration) {
    let (out, dt) = timed(|| run_experiment(exp, cfg));
    match out {
        Ok(o) => (o, dt),
        Err(f) => panic!("{} failed: {}", exp.name(), f.error),
    }
}

fn first(out: &ExperimentOutput, exp: Experiment, col: &str) -> f64 {
    out.table(&exp.stem())
        .and_then(|t| t.column(col))
        .expect("column present")[0]
}

fn within(v: f64, reference: f64, tol: f64) -> bool {
    (v - reference).abs() <= tol
}

fn mm(v: f64) -> String {
    format!("{:.4} mm", v * 1e3)
}

fn cm(v: f64) -> String {
    format!("{:.4} cm", v * 1e2)
}

fn placement() -> (f64, f64, Duration) {
    let cfg = ScenarioConfig::default();
    let (out, dt) = experiment(Experiment::OptimizePlacement, &cfg);
    let e = Experiment::OptimizePlacement;
    (first(&out, e, "l1_m"), first(&out, e, "l2_m"), dt)
}

fn criterion_1() -> Outcome {
    let (l1, l2, dt) = placement();
    Outcome {
        id: "1",
        title: "lens placement optimum",
        pass: within(l1, 0.05027, 0.0002) && within(l2, 0.05041, 0.0002) && dt <= Duration::from_secs(60),
        detail: format!(
            "l1* = {}, l2* = {} (ref 5.027 / 5.041 cm +/- 0.02), {dt:.2?}",
            cm(l1),
            cm(l2)
        ),
    }
}

fn criterion_2() -> Outcome {
    let cfg = ScenarioConfig::default();
    let (l1, l2, _) = placement();
    let lambda = cfg.material.wavelength_m;
    let (d_min, d_max) = (cfg.optimizer.d_min_m, cfg.optimizer.d_max_m);
    let g = sslr_core::optics::CavityGeometry::new(l1, 0.05, l2, 0.05, cfg.optimizer.d_set_m).unwrap();
    let (worst, dt) = timed(|| optimize::find_worst_distance(&g, lambda, d_min, d_max).unwrap());
    let published = cfg.geometry.at(cfg.optimizer.d_set_m).unwrap();
    let reference = optimize::find_worst_distance(&published, lambda, d_min, d_max).unwrap();
    Outcome {
        id: "2",
        title: "worst-case distance",
        pass: within(worst.d_m, 4.32, 0.05) && within(worst.w00_gain, 1.09e-3, 0.02e-3) && dt <= Duration::from_secs(5),
        detail: format!(
            "d_m = {:.4} m, w00 = {} (ref 4.32 m, 1.09 mm), {dt:.2?}; geometry (5.027, 5.041) cm gives d_m = {:.4} m, w00 = {}",
            worst.d_m,
            mm(worst.w00_gain),
            reference.d_m,
            mm(reference.w00_gain)
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.cavity.runs = 20;
    cfg.optimizer.n_smax = 100_000;
    let (out, dt) = experiment(Experiment::OptimizeCavity, &cfg);
    let w = out.table("optimize_cavity").unwrap().column("w00_gain_m").unwrap();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let spread = w.iter().cloned().fold(f64::MIN, f64::max) - w.iter().cloned().fold(f64::MAX, f64::min);
    Outcome {
        id: "3",
        title: "Monte Carlo consistency",
        pass: w.len() == 20 && within(mean, 0.683e-3, 0.01e-3) && spread <= 0.02e-3 && dt <= Duration::from_secs(600),
        detail: format!(
            "20 runs: mean {}, spread {} (ref 0.683 +/- 0.01, <= 0.02), {dt:.2?}",
            mm(mean),
            mm(spread)
        ),
    }
}

fn criterion_4() -> Outcome {
    let base = ScenarioConfig::default();
    let hit = |l_s: f64| {
        let mut cfg = base.clone();
        cfg.functional.l_s_m = l_s;
        let (out, _) = experiment(Experiment::OptimizeFunctional, &cfg);
        let e = Experiment::OptimizeFunctional;
        let (a_g, r) = (first(&out, e, "a_g_m"), first(&out, e, "r_m2"));
        (within(a_g, 1.31e-3, 0.05e-3) && within(r, 0.822, 0.02), a_g, r)
    };
    let (primary, a_g, r) = hit(0.75e-3);
    let mut detail = format!(
        "l_s = 0.75 mm: a_g* = {}, R* = {:.2} % (ref 1.31 mm, 82.2 %)",
        mm(a_g),
        r * 100.0
    );
    let mut pass = primary;
    if !primary {
        for l_s in [0.5e-3, 1.0e-3] {
            let (ok, a_g, r) = hit(l_s);
            detail.push_str(&format!("; l_s = {} mm: {}, {:.2} %", l_s * 1e3, mm(a_g), r * 100.0));
            pass |= ok;
        }
    }
    Outcome {
        id: "4",
        title: "functional optimum",
        pass,
        detail,
    }
}

fn criterion_5() -> Outcome {
    let cfg = ScenarioConfig::default();
    let (out, dt) = experiment(Experiment::Tradeoff, &cfg);
    let t = out.table("tradeoff").unwrap();
    let l_s = t.column("l_s_m").unwrap();
    let r = t.column("r_m2").unwrap();
    let eta = t.column("eta_trans").unwrap();
    let r_b = t.column("r_b_bps_hz").unwrap();
    let monotone = r.windows(2).all(|w| w[1] >= w[0]);
    let r_last = *r.last().unwrap();
    let hi = eta.iter().cloned().fold(f64::MIN, f64::max);
    let lo = eta.iter().cloned().fold(f64::MAX, f64::min);
    let variation = (hi - lo) / hi;
    let zero_rate = l_s[0] == 0.0 && r_b[0] == 0.0;
    Outcome {
        id: "5",
        title: "trade-off trends",
        pass: monotone
            && within(*l_s.last().unwrap(), 4.5e-3, 1e-12)
            && r_last >= 0.995
            && variation < 0.2
            && zero_rate
            && dt <= Duration::from_secs(600),
        detail: format!(
            "R* non-decreasing: {monotone}, R*(4.5 mm) = {:.2} %, eta_trans variation {:.2} %, R_b(l_s = 0) = {}, {dt:.2?}",
            r_last * 100.0,
            variation * 100.0,
            r_b[0]
        ),
    }
}

fn sweep() -> (ExperimentOutput, Duration) {
    experiment(Experiment::SweepDistance, &ScenarioConfig::default())
}

fn criterion_6() -> Outcome {
    let (out, dt) = sweep();
    let t = out.table("sweep_distance").unwrap();
    let d = t.column("d_m").unwrap();
    let r_b = t.column("r_b_bps_hz").unwrap();
    let (d_low, low) = d
        .iter()
        .zip(&r_b)
        .filter(|(d, _)| (1.0..=6.0).contains(*d))
        .map(|(d, r)| (*d, *r))
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    Outcome {
        id: "6",
        title: "rate plateau",
        pass: low >= 11.3 && dt <= Duration::from_secs(30),
        detail: format!("min R_b on [1, 6] m = {low:.3} bit/s/Hz at d = {d_low} m (ref >= 11.3), {dt:.2?}"),
    }
}

fn criterion_7() -> Outcome {
    let suites: [(&str, fn()); 5] = [
        ("matrix closed form", oracles::matrix_product_matches_closed_form),
        ("slope/threshold", oracles::slope_threshold_matches_rigrod),
        ("MPPT grid", oracles::mppt_dominates_dense_grid),
        ("circulation scan", oracles::circulation_matches_residual_scan),
        ("q round trip", oracles::q_round_trip_closes),
    ];
    let mut failed = Vec::new();
    for (name, f) in suites {
        if catch_unwind(AssertUnwindSafe(f)).is_err() {
            failed.push(name);
        }
    }
    Outcome {
        id: "7",
        title: "oracle equivalences",
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            "5/5 suites".into()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn payloads(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), payload(&text))
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let cfg = ScenarioConfig::default();
    let opts = RunOptions {
        seed: Some(3),
        ..RunOptions::default()
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for exp in Experiment::ALL {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(exp, &cfg, &opts, a.path()).unwrap();
        // second run on one worker: the payload must not depend on scheduling
        single.install(|| run(exp, &cfg, &opts, b.path())).unwrap();
        let (pa, pb) = (payloads(a.path()), payloads(b.path()));
        files += pa.len();
        if pa != pb {
            differing.push(exp.name());
        }
    }
    Outcome {
        id: "8",
        title: "determinism",
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{files} files identical across reruns (multi-threaded vs one worker)")
        } else {
            format!("differing: {}", differing.join(", "))
        },
    }
}

fn baseline() -> Outcome {
    let (out, _) = sweep();
    let t = out.table("sweep_distance").unwrap();
    let d = t.column("d_m").unwrap();
    let k = d.iter().position(|v| *v == 6.0).unwrap();
    let p = t.column("p_chg_w").unwrap()[k];
    let pb = t.column("baseline_p_chg_w").unwrap()[k];
    Outcome {
        id: "baseline",
        title: "asymmetric beats symmetric at 6 m",
        pass: p > pb,
        detail: format!(
            "P_chg = {p:.4} W vs symmetric {pb:.4} W (+{:.1} %)",
            (p / pb - 1.0) * 100.0
        ),
    }
}

fn main() {
    let checks: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        baseline,
    ];
    let mut unexpected = Vec::new();
    for check in checks {
        let o = match catch_unwind(check) {
            Ok(o) => o,
            Err(_) => {
                println!("FAIL criterion ?: check panicked");
                unexpected.push("panic".to_string());
                continue;
            }
        };
        let known = KNOWN_DEVIATIONS.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        println!("{tag} criterion {} [{}]: {}", o.id, o.title, o.detail);
        if o.pass == known {
            unexpected.push(o.id.to_string());
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance outcome for: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
