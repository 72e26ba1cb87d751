//! Reference-value assertions applied in `--check` mode.
//!
//! Each check reads the experiment's own tables, so what is asserted is
//! exactly what was written.

use crate::experiments::{Experiment, ExperimentOutput};
use crate::table::{format_value, ResultTable};

/// `(label, reference, tolerance)`; values in the table's units.
struct Band(&'static str, f64, f64);

fn within(out: &mut Vec<String>, Band(label, reference, tol): Band, value: f64) {
    if !((value - reference).abs() <= tol) {
        out.push(format!(
            "{label} = {} outside {} +/- {}",
            format_value(value),
            format_value(reference),
            format_value(tol)
        ));
    }
}

fn col(out: &mut Vec<String>, t: &ResultTable, header: &str) -> Vec<f64> {
    t.column(header).unwrap_or_else(|| {
        out.push(format!("table `{}` lacks column `{header}`", t.name));
        Vec::new()
    })
}

/// Failed assertions; empty when everything holds.
pub fn check(exp: Experiment, output: &ExperimentOutput) -> Vec<String> {
    let mut out = Vec::new();
    let Some(t) = output.table(&exp.stem()) else {
        return vec![format!("missing table `{}`", exp.stem())];
    };
    if t.rows.is_empty() {
        return vec![format!("table `{}` is empty", t.name)];
    }
    match exp {
        Experiment::OptimizeCavity => {
            let w = col(&mut out, t, "w00_gain_m");
            if !w.is_empty() {
                let mean = w.iter().sum::<f64>() / w.len() as f64;
                let spread = w.iter().cloned().fold(f64::MIN, f64::max) - w.iter().cloned().fold(f64::MAX, f64::min);
                within(&mut out, Band("mean w00_gain_m", 0.683e-3, 0.01e-3), mean);
                if spread > 0.02e-3 {
                    out.push(format!("w00_gain_m spread {} exceeds 2e-05", format_value(spread)));
                }
            }
        }
        Experiment::OptimizePlacement => {
            let row = |out: &mut Vec<String>, h: &str| col(out, t, h).first().copied().unwrap_or(f64::NAN);
            let l1 = row(&mut out, "l1_m");
            let l2 = row(&mut out, "l2_m");
            let d = row(&mut out, "d_worst_m");
            let w = row(&mut out, "w00_gain_worst_m");
            within(&mut out, Band("l1_m", 0.05027, 0.0002), l1);
            within(&mut out, Band("l2_m", 0.05041, 0.0002), l2);
            within(&mut out, Band("d_worst_m", 4.32, 0.05), d);
            within(&mut out, Band("w00_gain_worst_m", 1.09e-3, 0.02e-3), w);
        }
        Experiment::OptimizeFunctional => {
            let a_g = col(&mut out, t, "a_g_m").first().copied().unwrap_or(f64::NAN);
            let r = col(&mut out, t, "r_m2").first().copied().unwrap_or(f64::NAN);
            within(&mut out, Band("a_g_m", 1.31e-3, 0.05e-3), a_g);
            within(&mut out, Band("r_m2", 0.822, 0.02), r);
        }
        Experiment::Tradeoff => {
            let l_s = col(&mut out, t, "l_s_m");
            let r = col(&mut out, t, "r_m2");
            let eta = col(&mut out, t, "eta_trans");
            let r_b = col(&mut out, t, "r_b_bps_hz");
            match l_s.iter().position(|v| *v == 0.0) {
                Some(k) if r_b[k] != 0.0 => out.push(format!("r_b at l_s = 0 is {}", format_value(r_b[k]))),
                Some(_) => {}
                None => out.push("no l_s = 0 row".into()),
            }
            if r.windows(2).any(|w| w[1] < w[0]) {
                out.push("r_m2 decreases along l_s".into());
            }
            if let Some(last) = r.last() {
                if *last < 0.995 {
                    out.push(format!(
                        "r_m2 at the thickest crystal is {}, below 0.995",
                        format_value(*last)
                    ));
                }
            }
            let hi = eta.iter().cloned().fold(f64::MIN, f64::max);
            let lo = eta.iter().cloned().fold(f64::MAX, f64::min);
            if hi > 0.0 && (hi - lo) / hi >= 0.2 {
                out.push(format!("eta_trans varies by {} relative", format_value((hi - lo) / hi)));
            }
        }
        Experiment::SweepDistance => {
            let d = col(&mut out, t, "d_m");
            let w = col(&mut out, t, "w00_gain_m");
            let r_b = col(&mut out, t, "r_b_bps_hz");
            match d.iter().position(|v| (*v - 4.32).abs() < 1e-9) {
                Some(k) => within(&mut out, Band("w00_gain_m at d = 4.32 m", 1.09e-3, 0.02e-3), w[k]),
                None => out.push("no d = 4.32 m row".into()),
            }
            let low = d
                .iter()
                .zip(&r_b)
                .filter(|(d, _)| (1.0..=6.0).contains(*d))
                .map(|(_, r)| *r)
                .fold(f64::INFINITY, f64::min);
            if low < 11.3 {
                out.push(format!(
                    "r_b falls to {} on 1 m <= d <= 6 m, below 11.3",
                    format_value(low)
                ));
            }
            if let (Some(p), Some(pb)) = (t.column("p_chg_w"), t.column("baseline_p_chg_w")) {
                match d.iter().position(|v| *v == 6.0) {
                    Some(k) if p[k] <= pb[k] => out.push(format!(
                        "p_chg at 6 m ({}) does not exceed the symmetric baseline ({})",
                        format_value(p[k]),
                        format_value(pb[k])
                    )),
                    Some(_) => {}
                    None => out.push("no d = 6 m row".into()),
                }
            }
        }
    }
    out
}
