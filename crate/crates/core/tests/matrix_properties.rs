//! Behavior of the alternating matrix estimator: single-cycle convergence
//! under rank-1 weights, the 2x2 counterexample family that converges for
//! any nonsingular weights, shortcut behavior when one axis starts
//! feasible, transpose symmetry and fixed points.

use ndarray::Array2;
use ordmat::rng::stream_rng;
use ordmat::{
    column_operator, estimate, matrix_feasible, one_cycle_applicable, row_operator,
    MatrixOrderSpec, OrderRestriction, WeightMatrix, FEASIBILITY_TOL,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_restriction<R: Rng>(rng: &mut R, p: usize) -> OrderRestriction {
    match rng.random_range(0..3) {
        0 => OrderRestriction::simple_order(p).unwrap(),
        1 => OrderRestriction::umbrella(p, rng.random_range(0..p)).unwrap(),
        _ => OrderRestriction::simple_tree(p, rng.random_range(0..p)).unwrap(),
    }
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

fn random_rank1<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> WeightMatrix {
    let u: Vec<f64> = (0..rows).map(|_| rng.random_range(0.2..3.0)).collect();
    let v: Vec<f64> = (0..cols).map(|_| rng.random_range(0.2..3.0)).collect();
    WeightMatrix::from_outer(&u, &v).unwrap()
}

fn sup_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn one_cycle_lands_in_the_restriction_set_for_rank1_weights() {
    let mut rng = stream_rng(0xA11CE, "test/one-cycle", 0);
    for _ in 0..150 {
        let rows = rng.random_range(2..6);
        let cols = rng.random_range(2..6);
        let spec = MatrixOrderSpec::new(
            rows,
            cols,
            random_restriction(&mut rng, cols),
            random_restriction(&mut rng, rows),
        )
        .unwrap();
        let x = random_matrix(&mut rng, rows, cols);
        let w_r = random_rank1(&mut rng, rows, cols);
        let w_c = random_rank1(&mut rng, rows, cols);
        assert!(one_cycle_applicable(&spec, &w_r, &w_c));

        let after_col = column_operator(&x, &w_c, spec.col_restriction()).unwrap();
        let after_cycle = row_operator(&after_col, &w_r, spec.row_restriction()).unwrap();
        assert!(
            matrix_feasible(&after_cycle, &spec, 1e-9).is_ok(),
            "one cycle must satisfy both restrictions"
        );
        let again_col = column_operator(&after_cycle, &w_c, spec.col_restriction()).unwrap();
        let again_row = row_operator(&after_cycle, &w_r, spec.row_restriction()).unwrap();
        assert!(sup_diff(&again_col, &after_cycle) <= 1e-10);
        assert!(sup_diff(&again_row, &after_cycle) <= 1e-10);
    }
}

#[test]
fn saddle_two_by_two_converges_in_one_cycle_for_any_nonsingular_weights() {
    // start pattern: x11 <= x12, x11 <= x21 <= x22, x12 >= x22
    let mut rng = stream_rng(0xA11CE, "test/saddle", 0);
    let spec = MatrixOrderSpec::new(
        2,
        2,
        OrderRestriction::simple_order(2).unwrap(),
        OrderRestriction::simple_order(2).unwrap(),
    )
    .unwrap();
    for _ in 0..200 {
        let x11: f64 = StandardNormal.sample(&mut rng);
        let x21 = x11 + rng.random_range(0.0..2.0);
        let x22 = x21 + rng.random_range(0.0..2.0);
        let x12 = x22 + rng.random_range(0.0..2.0);
        let x = ndarray::array![[x11, x12], [x21, x22]];
        let w_r = WeightMatrix::new(Array2::from_shape_fn((2, 2), |_| {
            rng.random_range(0.2..3.0)
        }))
        .unwrap();
        let w_c = WeightMatrix::new(Array2::from_shape_fn((2, 2), |_| {
            rng.random_range(0.2..3.0)
        }))
        .unwrap();

        let cycle = row_operator(
            &column_operator(&x, &w_c, spec.col_restriction()).unwrap(),
            &w_r,
            spec.row_restriction(),
        )
        .unwrap();
        assert!(matrix_feasible(&cycle, &spec, FEASIBILITY_TOL).is_ok());
        let est = estimate(&x, &spec, &w_r, &w_c, 1e-10, 1000).unwrap();
        assert!(est.converged);
        assert!(sup_diff(&est.theta_tilde_1, &cycle) <= 1e-12);
    }
}

#[test]
fn feasible_rows_need_only_the_column_pass() {
    let mut rng = stream_rng(0xA11CE, "test/row-feasible", 0);
    for _ in 0..100 {
        let rows = rng.random_range(2..5);
        let cols = rng.random_range(2..5);
        let mut x = random_matrix(&mut rng, rows, cols);
        for i in 0..rows {
            let mut row: Vec<f64> = x.row(i).to_vec();
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (j, v) in row.into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        let spec = MatrixOrderSpec::new(
            rows,
            cols,
            OrderRestriction::simple_order(cols).unwrap(),
            random_restriction(&mut rng, rows),
        )
        .unwrap();
        let w = random_rank1(&mut rng, rows, cols);

        let single_pass = column_operator(&x, &w, spec.col_restriction()).unwrap();
        assert!(matrix_feasible(&single_pass, &spec, FEASIBILITY_TOL).is_ok());
        let est = estimate(&x, &spec, &w, &w, 1e-10, 1000).unwrap();
        assert_eq!(est.iterations_1, 1);
        assert_eq!(est.iterations_2, 1);
        assert!(sup_diff(&est.theta_tilde_1, &single_pass) <= 1e-12);
        assert!(sup_diff(&est.theta_tilde_2, &single_pass) <= 1e-12);
    }
}

#[test]
fn estimate_commutes_with_transposition() {
    let mut rng = stream_rng(0xA11CE, "test/transpose", 0);
    for _ in 0..50 {
        let rows = rng.random_range(2..5);
        let cols = rng.random_range(2..5);
        let row_restriction = random_restriction(&mut rng, cols);
        let col_restriction = random_restriction(&mut rng, rows);
        let spec =
            MatrixOrderSpec::new(rows, cols, row_restriction.clone(), col_restriction.clone())
                .unwrap();
        let swapped =
            MatrixOrderSpec::new(cols, rows, col_restriction, row_restriction).unwrap();
        let x = random_matrix(&mut rng, rows, cols);
        let w_r = random_rank1(&mut rng, rows, cols);
        let w_c = random_rank1(&mut rng, rows, cols);

        let est = estimate(&x, &spec, &w_r, &w_c, 1e-10, 1000).unwrap();
        let est_t = estimate(
            &x.t().to_owned(),
            &swapped,
            &w_c.transpose(),
            &w_r.transpose(),
            1e-10,
            1000,
        )
        .unwrap();
        // transposing swaps the roles of the two composition orders
        assert_eq!(est_t.theta_tilde_1, est.theta_tilde_2.t().to_owned());
        assert_eq!(est_t.theta_tilde_2, est.theta_tilde_1.t().to_owned());
        assert_eq!(est_t.final_estimate, est.final_estimate.t().to_owned());
    }
}

#[test]
fn points_inside_the_restriction_set_are_fixed() {
    let mut rng = stream_rng(0xA11CE, "test/fixed-point", 0);
    for _ in 0..50 {
        let rows = rng.random_range(2..5);
        let cols = rng.random_range(2..5);
        let spec = MatrixOrderSpec::new(
            rows,
            cols,
            random_restriction(&mut rng, cols),
            random_restriction(&mut rng, rows),
        )
        .unwrap();
        let w_r = random_rank1(&mut rng, rows, cols);
        let w_c = random_rank1(&mut rng, rows, cols);
        let seed_matrix = random_matrix(&mut rng, rows, cols);
        let inside = estimate(&seed_matrix, &spec, &w_r, &w_c, 1e-10, 1000)
            .unwrap()
            .final_estimate;
        assert!(matrix_feasible(&inside, &spec, FEASIBILITY_TOL).is_ok());

        // pin slack can leave the average feasible only to ~1e-12, so the
        // re-estimate may micro-pool; it must stay within the feasibility
        // tolerance of the input
        let fixed = estimate(&inside, &spec, &w_r, &w_c, 1e-10, 1000).unwrap();
        assert_eq!(fixed.iterations_1, 1);
        assert!(sup_diff(&fixed.theta_tilde_1, &inside) <= FEASIBILITY_TOL);
        assert!(sup_diff(&fixed.theta_tilde_2, &inside) <= FEASIBILITY_TOL);
        assert!(sup_diff(&fixed.final_estimate, &inside) <= FEASIBILITY_TOL);
    }
}
