//! The dense-matrix oracle on a small grid: adjoint exactness against the
//! transpose, column construction, and operator-norm estimation.
//!
//! ```text
//! cargo run --example operator_oracle
//! ```

use patms::grid::{Grid2D, ScalarField2D};
use patms::solvers::estimate_operator_norm;
use patms::wave::{dense_forward_matrix, DetectorRing, TimeGrid, WaveOperator};

fn main() {
    let grid = Grid2D::new(8);
    let ring = DetectorRing::new(12);
    let time = TimeGrid::new(16, grid.spacing());
    let op = WaveOperator::new(grid, ring.clone(), time.clone());
    let dense = dense_forward_matrix(grid, &ring, &time).unwrap();
    println!("dense oracle: {} x {} ({} doubles)", dense.rows(), dense.cols(), dense.rows() * dense.cols());

    // forward agreement on a test field
    let mut f = ScalarField2D::zeros(grid);
    for (i, v) in f.values_mut().iter_mut().enumerate() {
        *v = ((i * 31 + 7) % 13) as f64 / 13.0 - 0.5;
    }
    let via_op = op.forward(&f).unwrap();
    let via_mat = dense.apply(f.values());
    let dev: f64 = via_op
        .values()
        .iter()
        .zip(&via_mat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / via_op.l2_norm();
    println!("forward vs matrix deviation: {dev:.2e}");

    // adjoint inner-product identity
    let g_values: Vec<f64> = (0..dense.rows()).map(|i| ((i * 17) % 29) as f64 / 29.0 - 0.5).collect();
    let lhs: f64 = via_op.values().iter().zip(&g_values).map(|(a, b)| a * b).sum();
    let back = op.adjoint_flat(&g_values);
    let rhs: f64 = f.values().iter().zip(&back).map(|(a, b)| a * b).sum();
    println!("<Wf, g> = {lhs:.10}  <f, W*g> = {rhs:.10}");

    let norm_sq = estimate_operator_norm(&dense, 60, 1);
    println!("||W||^2 by power iteration: {norm_sq:.6}");
}
