//! Compressed-sensing measurement matrices: uniform subsampling and seeded
//! Gaussian sensing, and their commutation with temporal filtering.
//!
//! ```text
//! cargo run --example compressed_measurements
//! ```

use patms::filters::{convolve_temporal, convolve_temporal_cs, TemporalFilterBank, TimePadding};
use patms::grid::Grid2D;
use patms::measure::{measure, MeasurementMatrix};
use patms::phantom::{make_phantom, PhantomSpec};
use patms::wave::{DetectorRing, TimeGrid, WaveOperator};

fn main() {
    let grid = Grid2D::new(64);
    let ring = DetectorRing::new(300);
    let time = TimeGrid::new((2.9 / grid.spacing()).round() as usize, grid.spacing());
    let op = WaveOperator::new(grid, ring, time);
    let f = make_phantom(&PhantomSpec::reference(), grid).unwrap();
    let g = op.forward(&f).unwrap();

    let sub = MeasurementMatrix::subsampling(300, 4).unwrap();
    let y_sub = measure(&sub, &g).unwrap();
    println!("subsampling factor 4: {} detectors -> {} rows", sub.n(), y_sub.m());

    let gauss = MeasurementMatrix::gaussian(75, 300, 7);
    let y_gauss = measure(&gauss, &g).unwrap();
    let entries = gauss.to_dense();
    let mean = entries.iter().sum::<f64>() / entries.len() as f64;
    let var = entries.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / entries.len() as f64;
    println!(
        "gaussian 75x300 (seed 7): entry mean {mean:+.4e}, variance {var:.5} (target {:.5})",
        1.0 / 75.0
    );
    println!("measurement norms: sub {:.3}, gauss {:.3}", y_sub.l2_norm(), y_gauss.l2_norm());

    // measuring commutes with temporal convolution
    let bank = TemporalFilterBank::standard();
    for j in 0..bank.scales() {
        let a = measure(&gauss, &convolve_temporal(&g, &bank, j).unwrap()).unwrap();
        let b = convolve_temporal_cs(&y_gauss, &bank, j, TimePadding::Zero).unwrap();
        let num: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        println!("  commutation deviation at scale {j}: {:.2e}", num / a.l2_norm());
    }
}
