mod support;

use support::oracles;

#[test]
fn matrix_product_matches_closed_form() {
    oracles::matrix_product_matches_closed_form();
}

#[test]
fn slope_threshold_matches_rigrod() {
    oracles::slope_threshold_matches_rigrod();
}

#[test]
fn mppt_dominates_dense_grid() {
    oracles::mppt_dominates_dense_grid();
}

#[test]
fn circulation_matches_residual_scan() {
    oracles::circulation_matches_residual_scan();
}

#[test]
fn q_round_trip_closes() {
    oracles::q_round_trip_closes();
}
