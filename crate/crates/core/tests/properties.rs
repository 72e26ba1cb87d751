use proptest::prelude::*;
use sslr_core::beam::{self, ModeSolution};
use sslr_core::optics::{self, CavityGeometry};
use sslr_core::power::{self, FunctionalParams, LossTable, MaterialTable};
use sslr_core::receiver::{self, PDParams, PVParams};

const LAMBDA: f64 = 1064e-9;

/// Geometries stable at their distance, built from the factored product.
fn stable_geometry() -> impl Strategy<Value = CavityGeometry> {
    (0.02..0.08f64, 0.02..0.08f64, 0.5..8.0f64, 0.02..0.98f64, 0.02..0.98f64).prop_map(|(f1, f2, d, s1, s2)| {
        // 1 + u d in (0, 1) on both sides keeps the product inside (0, 1)
        let l1 = f1 + s1 * f1 * f1 / d;
        let l2 = f2 + s2 * f2 * f2 / d;
        CavityGeometry::new(l1, f1, l2, f2, d).unwrap()
    })
}

fn element() -> impl Strategy<Value = optics::RayMatrix> {
    prop_oneof![
        (0.0..5.0f64).prop_map(|z| optics::free_space(z).unwrap()),
        (0.01..2.0f64, any::<bool>()).prop_map(|(f, neg)| optics::thin_lens(if neg { -f } else { f }).unwrap()),
    ]
}

proptest! {
    #[test]
    fn composed_systems_are_unimodular(seq in prop::collection::vec(element(), 1..12)) {
        let m = optics::compose(&seq).unwrap();
        let scale: f64 = seq.iter().map(|e| e.elements().iter().map(|x| x.abs()).fold(1.0, f64::max)).product();
        prop_assert!((m.determinant() - 1.0).abs() <= 1e-12 * scale * scale);
    }

    #[test]
    fn mirrored_geometry_swaps_g_parameters(g in stable_geometry()) {
        let a = optics::stability(&g);
        let b = optics::stability(&g.mirrored());
        prop_assert!((a.g1_star - b.g2_star).abs() <= 1e-12 * (1.0 + a.g1_star.abs()) * 1e3);
        prop_assert!((a.product - b.product).abs() <= 1e-12);
        prop_assert!(a.stable && b.stable);
    }

    #[test]
    fn range_check_agrees_with_pointwise(g in stable_geometry(), t in 0.0..1.0f64) {
        let r = optics::range_stability(&g, 0.0, g.d).unwrap();
        let d = optics::range_start(0.0, g.d) + t * (g.d - optics::range_start(0.0, g.d));
        if r.stable {
            prop_assert!(optics::stability(&g.at_distance(d)).stable);
        }
    }

    #[test]
    fn mode_radius_positive_and_mirror_symmetric(g in stable_geometry(), t in 0.0..1.0f64) {
        let mode = ModeSolution::new(&g, LAMBDA).unwrap();
        let z = t * g.z_m2();
        let w = mode.w00_at(z).unwrap();
        prop_assert!(w > 0.0 && w.is_finite());
        let mirrored = beam::w00_at(&g.mirrored(), LAMBDA, g.z_m2() - z).unwrap();
        prop_assert!((w - mirrored).abs() <= 1e-7 * w, "{} vs {}", w, mirrored);
    }

    #[test]
    fn scaled_radius_hits_aperture_at_gain(g in stable_geometry(), a_g in 1e-4..5e-3f64) {
        let mode = ModeSolution::new(&g, LAMBDA).unwrap();
        let w = mode.w_at(a_g, g.z_gain()).unwrap();
        prop_assert!((w - a_g).abs() <= 1e-12 * a_g);
    }

    #[test]
    fn gain_radius_continuous_in_distance(g in stable_geometry()) {
        let h = 1e-6;
        prop_assume!(optics::stability(&g.at_distance(g.d + h)).stable);
        let w0 = ModeSolution::new(&g, LAMBDA).unwrap().w00_gain();
        let w1 = ModeSolution::new(&g.at_distance(g.d + h), LAMBDA).unwrap().w00_gain();
        prop_assert!((w1 - w0).abs() <= 1e-3 * w0);
    }

    #[test]
    fn circulation_conserves_energy(
        d in 0.5..6.0f64,
        scale in 1.0..3.0f64,
        r_m2 in 0.0..=1.0f64,
        l_s in 0.0..6e-3f64,
        p_in in 0.0..200.0f64,
    ) {
        let mat = MaterialTable::default();
        let loss = LossTable::default();
        let g = CavityGeometry::new(0.05027, 0.05, 0.05041, 0.05, d).unwrap();
        let mode = ModeSolution::new(&g, LAMBDA).unwrap();
        let m = FunctionalParams::new(scale * mode.w00_gain(), r_m2, l_s).unwrap();
        let pb = power::solve_circulation(p_in, &g, &m, &mat, &loss).unwrap();
        prop_assert!(pb.p4 >= 0.0 && pb.p2 >= 0.0);
        prop_assert!((0.0..1.0).contains(&pb.eta_shg));
        prop_assert!(pb.residual < power::RESIDUAL_TOLERANCE);
        prop_assert!(pb.p_recv_pt + pb.p_recv_it <= mat.pumping_efficiency * p_in + 1e-12);
        prop_assert!(pb.eta_trans >= 0.0 && pb.eta_trans <= mat.pumping_efficiency);
    }

    #[test]
    fn more_pump_never_less_power(p_in in 10.0..150.0f64, extra in 0.5..50.0f64, l_s in 0.0..3e-3f64) {
        let mat = MaterialTable::default();
        let loss = LossTable::default();
        let g = CavityGeometry::new(0.05027, 0.05, 0.05041, 0.05, 4.32).unwrap();
        let m = FunctionalParams::new(1.31e-3, 0.822, l_s).unwrap();
        let a = power::solve_circulation(p_in, &g, &m, &mat, &loss).unwrap();
        let b = power::solve_circulation(p_in + extra, &g, &m, &mat, &loss).unwrap();
        prop_assert!(b.p4 >= a.p4 - 1e-8);
        prop_assert!(b.p_recv_it >= a.p_recv_it - 1e-10);
    }

    #[test]
    fn noise_and_rate_monotone(p in 0.0..10.0f64, dp in 1e-6..1.0f64) {
        let pd = PDParams::default();
        prop_assert!(receiver::noise_variance(p + dp, &pd) > receiver::noise_variance(p, &pd));
        prop_assert!(receiver::achievable_rate(p + dp, &pd) > receiver::achievable_rate(p, &pd));
        prop_assert!(receiver::achievable_rate(p + dp, &pd) > 0.0);
    }

    #[test]
    fn charging_power_grows_with_light(p in 0.1..20.0f64) {
        let pv = PVParams::default();
        let a = receiver::mppt(p, &pv);
        let b = receiver::mppt(2.0 * p, &pv);
        prop_assert!(b.p_chg > a.p_chg);
        let voc = receiver::open_circuit_diode_voltage(p, &pv);
        prop_assert!(receiver::is_unimodal(p, voc, &pv, 10_000));
    }
}
