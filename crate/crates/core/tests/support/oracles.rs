//! Independent reference implementations checked against the library.
//! Shared with the acceptance run, so the functions carry no test attribute.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sslr_core::beam::ModeSolution;
use sslr_core::optics::{self, CavityGeometry};
use sslr_core::power::{self, FunctionalParams, LossTable, MaterialTable};
use sslr_core::receiver::{self, PVParams};

type M2 = [[f64; 2]; 2];

fn mul(x: M2, y: M2) -> M2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

fn prop(z: f64) -> M2 {
    [[1.0, z], [0.0, 1.0]]
}

fn lens(f: f64) -> M2 {
    [[1.0, 0.0], [-1.0 / f, 1.0]]
}

/// M1 -> M2 single pass, multiplied out factor by factor.
fn single_pass(g: &CavityGeometry) -> M2 {
    let seq = [prop(g.l1), lens(g.f1), prop(g.f1 + g.d + g.f2), lens(g.f2), prop(g.l2)];
    seq.iter().fold([[1.0, 0.0], [0.0, 1.0]], |acc, m| mul(*m, acc))
}

fn random_geometry(rng: &mut impl Rng) -> CavityGeometry {
    CavityGeometry::new(
        rng.gen_range(0.01..0.1),
        rng.gen_range(0.01..0.1),
        rng.gen_range(0.01..0.1),
        rng.gen_range(0.01..0.1),
        rng.gen_range(0.0..10.0),
    )
    .unwrap()
}

fn random_stable(rng: &mut impl Rng) -> CavityGeometry {
    loop {
        let f1 = rng.gen_range(0.02..0.08);
        let f2 = rng.gen_range(0.02..0.08);
        let d = rng.gen_range(0.1..8.0);
        // gaps just beyond the focal planes keep the product inside (0, 1) often
        let l1 = f1 + rng.gen_range(0.0..1.5) * f1 * f1 / d;
        let l2 = f2 + rng.gen_range(0.0..1.5) * f2 * f2 / d;
        let g = CavityGeometry::new(l1, f1, l2, f2, d).unwrap();
        if optics::stability(&g).stable {
            let m = single_pass(&g);
            let p = m[0][0] * m[1][1];
            if p > 1e-6 && p < 1.0 - 1e-6 {
                return g;
            }
        }
    }
}

pub fn matrix_product_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let g = random_geometry(&mut rng);
        let CavityGeometry { l1, f1, l2, f2, d } = g;
        let oracle = single_pass(&g);
        let a_terms = [f2 / f1, d / f1, d * l2 / (f1 * f2)];
        let b_terms = [
            f1,
            f2,
            l2 * (f1 + d) / f2,
            l1 * (f2 + d) / f1,
            d * l1 * l2 / (f1 * f2),
            d,
        ];
        let c_terms = [d / (f1 * f2)];
        let d_terms = [f1 / f2, d / f2, d * l1 / (f1 * f2)];
        let scales = [
            a_terms.iter().map(|t| t.abs()).sum::<f64>(),
            b_terms.iter().map(|t| t.abs()).sum::<f64>(),
            // at d = 0 the product form's C is a cancellation of 1/f-sized terms
            c_terms.iter().map(|t| t.abs()).sum::<f64>() + 1.0 / f1 + 1.0 / f2,
            d_terms.iter().map(|t| t.abs()).sum::<f64>(),
        ];
        let oracle = [oracle[0][0], oracle[0][1], oracle[1][0], oracle[1][1]];
        for lib in [optics::sslr_closed_form(&g), optics::sslr_single_pass(&g)] {
            for k in 0..4 {
                let diff = (lib.elements()[k] - oracle[k]).abs();
                assert!(
                    diff <= 1e-12 * scales[k],
                    "element {k} of {g:?}: {} vs {}",
                    lib.elements()[k],
                    oracle[k]
                );
            }
        }
        let m = optics::sslr_closed_form(&g);
        // each entry carries rounding at its own term scale
        let det_scale = scales[0] * scales[3] + scales[1] * scales[2];
        assert!((m.determinant() - 1.0).abs() <= 1e-12 * det_scale);
    }
}

/// Rigrod with every factor written out.
fn rigrod(p_in: f64, a_g: f64, mat: &MaterialTable, r1: f64, r2: f64) -> f64 {
    let area_is = std::f64::consts::PI * a_g * a_g * mat.saturation_intensity_w_m2;
    let p = area_is / ((1.0 + (r1 / r2).sqrt()) * (1.0 - (r1 * r2).sqrt()))
        * (mat.pumping_efficiency * p_in / area_is - (1.0 / (r1 * r2).sqrt()).ln());
    p.max(0.0)
}

pub fn slope_threshold_matches_rigrod() {
    let mat = MaterialTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let r1 = rng.gen_range(0.05..0.999);
        let r2 = rng.gen_range(0.05..0.999);
        let a_g = rng.gen_range(0.5e-3..3e-3);
        let p_in = rng.gen_range(0.0..200.0);
        let direct = rigrod(p_in, a_g, &mat, r1, r2);
        let (slope, threshold) = power::slope_threshold(a_g, &mat, r1, r2).unwrap();
        let reformulated = (slope * (p_in - threshold)).max(0.0);
        let scale = slope * p_in.max(threshold);
        assert!(
            (direct - reformulated).abs() <= 1e-9 * scale,
            "r1={r1} r2={r2} a_g={a_g} p_in={p_in}: {direct} vs {reformulated}"
        );
        let lib = power::rigrod_p4(p_in, a_g, &mat, r1, r2);
        assert!((lib - direct).abs() <= 1e-12 * scale, "{lib} vs {direct}");
    }
}

fn pv_point(p: f64, v_d: f64, pv: &PVParams) -> (f64, f64) {
    let vt = 1.380649e-23 * pv.temperature_k / 1.602176634e-19;
    let i_d = pv.saturation_current_a * ((v_d / (pv.cells * pv.ideality * vt)).exp() - 1.0);
    let i = pv.responsivity_a_per_w * p - i_d - v_d / pv.shunt_resistance_ohm;
    let v = v_d - i * pv.series_resistance_ohm;
    (v, i)
}

pub fn mppt_dominates_dense_grid() {
    let pv = PVParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let p = rng.gen_range(0.1..20.0);
        // open-circuit diode voltage by plain bisection
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if pv_point(p, mid, &pv).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let n = 10_000;
        let grid_best = (0..=n)
            .map(|k| lo * k as f64 / n as f64)
            .map(|v| pv_point(p, v, &pv))
            .filter(|(v, i)| *v >= 0.0 && *i >= 0.0)
            .map(|(v, i)| v * i)
            .fold(0.0, f64::max);
        let op = receiver::mppt(p, &pv);
        assert!(
            op.p_chg >= grid_best * (1.0 - 1e-3),
            "P={p}: {} < {grid_best}",
            op.p_chg
        );

        // four-equation re-substitution
        let (v, i) = pv_point(p, op.v_d, &pv);
        assert!((op.i_chg - i).abs() <= 1e-9 * i.abs());
        assert!((op.v_chg - v).abs() <= 1e-9 * v.abs());
        assert!((op.p_chg - v * i).abs() <= 1e-9 * (v * i).abs());
        assert!((op.v_d - op.i_chg * (op.r_pl + pv.series_resistance_ohm)).abs() <= 1e-9 * op.v_d);
        assert!(op.i_chg >= 0.0 && op.v_chg >= 0.0);
    }
}

pub fn circulation_matches_residual_scan() {
    let mat = MaterialTable::default();
    let loss = LossTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let base = CavityGeometry::new(0.05027, 0.05, 0.05041, 0.05, 1.0).unwrap();
    let mut checked = 0;
    while checked < 20 {
        let d = rng.gen_range(0.5..6.0);
        let g = base.at_distance(d);
        let mode = ModeSolution::new(&g, mat.wavelength_m).unwrap();
        let a_g = mode.w00_gain() * rng.gen_range(1.0..3.0);
        let r_m2 = rng.gen_range(0.5..0.99);
        let l_s = rng.gen_range(0.0..5e-3);
        let p_in = rng.gen_range(20.0..100.0);

        // the coupled system, rebuilt from scratch
        let w_shg = a_g / mode.w00_gain() * mode.w00_mirror1();
        let k = 8.0 * std::f64::consts::PI.powi(2) * mat.d_eff_m_per_v.powi(2) * l_s * l_s
            / (8.8541878128e-12 * 299792458.0 * mat.wavelength_m.powi(2) * mat.shg_refractive_index.powi(3))
            * 2.0
            / (std::f64::consts::PI * w_shg * w_shg);
        let diff = 1.0 - (-2.0 * (a_g / mode.w00_gain()).powi(2)).exp();
        let air = (-loss.air_extinction_per_m * d).exp();
        let r2 = loss.gamma_gain.powi(2) * air * air * r_m2 * loss.gamma_l2.powi(2) * diff;
        let f = |p4: f64| {
            let eta = (k * p4).min(1.0);
            let r1 = (1.0 - eta).powi(2) * loss.gamma_shg.powi(2) * loss.r_m1 * loss.gamma_l1.powi(2);
            if r1 <= 0.0 {
                0.0
            } else {
                rigrod(p_in, a_g, &mat, r1, r2)
            }
        };
        let f0 = f(0.0);
        if f0 <= 0.0 {
            continue;
        }
        let step = 1e-5;
        let n = (2.0 * f0 / step) as usize;
        let mut root = None;
        let mut prev = f(0.0) - 0.0;
        for i in 1..=n {
            let p = i as f64 * step;
            let r = f(p) - p;
            if prev > 0.0 && r <= 0.0 {
                root = Some(p);
                break;
            }
            prev = r;
        }
        let root = root.expect("residual changes sign on the scan");

        let m = FunctionalParams::new(a_g, r_m2, l_s).unwrap();
        let pb = power::solve_circulation(p_in, &g, &m, &mat, &loss).unwrap();
        assert!(pb.residual < power::RESIDUAL_TOLERANCE);
        assert!(
            pb.p4 > root - step - 1e-9 && pb.p4 <= root + 1e-9,
            "config {checked}: solver {} vs scan bracket ({}, {root}]",
            pb.p4,
            root - step
        );
        checked += 1;
    }
}

pub fn q_round_trip_closes() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let g = random_stable(&mut rng);
        let mode = ModeSolution::new(&g, 1064e-9).unwrap();
        let q0 = mode.q_mirror1().0;
        let m = single_pass(&g);
        let back = [[m[1][1], m[0][1]], [m[1][0], m[0][0]]];
        let rt = mul(back, m);
        let q = (q0 * rt[0][0] + rt[0][1]) / (q0 * rt[1][0] + rt[1][1]);
        let err = (q - q0).norm() / q0.norm();
        assert!(err < 1e-9, "{g:?}: relative error {err}");
        // q after the forward pass is purely imaginary at M2 too
        let q_m2: Complex64 = (q0 * m[0][0] + m[0][1]) / (q0 * m[1][0] + m[1][1]);
        assert!(q_m2.re.abs() < 1e-9 * q_m2.norm());
    }
}
