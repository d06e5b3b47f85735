//! Decompose a phantom into its multiscale factors `u_j * f` and report how
//! sparse the band-pass factors are; renders each factor as an image.
//!
//! ```text
//! cargo run --example multiscale_factors
//! ```

use patms::filters::{convolve_spatial, SpatialFilterBank, SpatialKernel, TemporalFilterBank};
use patms::grid::Grid2D;
use patms::phantom::{make_phantom, render_field, Normalization, PhantomSpec};
use std::fs;

fn main() {
    let out_dir = std::path::Path::new("target/example-output");
    fs::create_dir_all(out_dir).expect("create output dir");

    let grid = Grid2D::new(100);
    let bank = TemporalFilterBank::standard();
    let sbank = SpatialFilterBank::new(&bank, grid);
    let f = make_phantom(&PhantomSpec::reference(), grid).unwrap();

    for j in 0..bank.scales() {
        let factor = convolve_spatial(&f, SpatialKernel::Scale(j), &sbank).unwrap();
        let peak = factor.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let below = factor
            .values()
            .iter()
            .filter(|v| v.abs() < 1e-3 * peak)
            .count() as f64
            / factor.values().len() as f64;
        println!(
            "factor {j}: peak {peak:8.3}, {:5.1}% of pixels below 1e-3 of peak",
            100.0 * below
        );
        fs::write(
            out_dir.join(format!("factor_{j}.pgm")),
            render_field(&factor, Normalization::Symmetric),
        )
        .expect("write factor image");
    }
    println!("wrote factor images to {}", out_dir.display());
    println!("(the low-pass factor is dense; the band-pass factors are sparse)");
}
