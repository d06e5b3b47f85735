//! End-to-end compressed-sensing reconstruction at a desk-friendly size:
//! simulate, subsample by four, reconstruct with the multiscale method and
//! the plain l1 baseline, and compare errors.
//!
//! ```text
//! cargo run --example full_reconstruction
//! ```
//! Takes a couple of minutes on one core; set `PATMS_THREADS` equivalents by
//! configuring rayon in your own binaries if you embed the library.

use patms::filters::TemporalFilterBank;
use patms::grid::Grid2D;
use patms::measure::{measure, MeasurementMatrix};
use patms::phantom::{make_phantom, render_field, Normalization, PhantomSpec};
use patms::recon::{reconstruct_baseline_l1, reconstruct_multiscale, MultiscaleConfig};
use patms::wave::{DetectorRing, TimeGrid, WaveOperator};
use std::fs;
use std::time::Instant;

fn main() {
    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir).expect("create output dir");

    let grid = Grid2D::new(64);
    let ring = DetectorRing::new(300);
    let time = TimeGrid::new((2.9 / grid.spacing()).round() as usize, grid.spacing());
    let bank = TemporalFilterBank::standard();
    let wave = WaveOperator::new(grid, ring, time);
    let truth = make_phantom(&PhantomSpec::reference(), grid).unwrap();

    let mat = MeasurementMatrix::subsampling(300, 4).unwrap();
    let y = measure(&mat, &wave.forward(&truth).unwrap()).unwrap();
    println!(
        "measured {} x {} samples from {} detectors (subsampling factor 4)",
        y.m(),
        y.time().nt(),
        mat.n()
    );

    let cfg = MultiscaleConfig {
        low_iters: 150,
        high_iters: 300,
        deconv_iters: 1500,
        ..Default::default()
    };

    let t0 = Instant::now();
    let ms = reconstruct_multiscale(&y, &mat, &wave, &bank, &cfg, Some(&truth)).unwrap();
    println!(
        "multiscale: rel l2 error {:.4} in {:.0}s (factor iterations {:?})",
        ms.rel_l2_error.unwrap(),
        t0.elapsed().as_secs_f64(),
        ms.factors.as_ref().unwrap().iterations
    );

    let t1 = Instant::now();
    let base = reconstruct_baseline_l1(&y, &mat, &wave, &cfg, Some(&truth)).unwrap();
    println!(
        "l1 baseline: rel l2 error {:.4} in {:.0}s",
        base.rel_l2_error.unwrap(),
        t1.elapsed().as_secs_f64()
    );

    fs::write(out_dir.join("truth.pgm"), render_field(&truth, Normalization::MinMax)).unwrap();
    fs::write(
        out_dir.join("recon_multiscale.pgm"),
        render_field(&ms.f_hat, Normalization::MinMax),
    )
    .unwrap();
    fs::write(
        out_dir.join("recon_baseline.pgm"),
        render_field(&base.f_hat, Normalization::MinMax),
    )
    .unwrap();
    println!("wrote truth/recon images to {}", out_dir.display());
}
