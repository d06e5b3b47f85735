//! Inspect the multiscale filter bank: point values, spectra, frame bounds
//! on the certified band, and the canonical dual reproduction identity.
//!
//! ```text
//! cargo run --example filter_bank
//! ```

use patms::filters::{frame_bounds, FrequencyBand, SpatialFilterBank, TemporalFilterBank};
use patms::grid::Grid2D;

fn main() {
    let bank = TemporalFilterBank::standard();
    println!("bank: base scale {}, scales 0..={}", bank.base_scale(), bank.j_max());

    for j in 0..bank.scales() {
        let a = bank.scale_factor(j).unwrap();
        println!(
            "  v_{j}: a_j={a:<4} v(0)={:<6.2} F1v(0)={:.4} peak spectrum at w={:.2}",
            bank.eval(j, 0.0).unwrap(),
            bank.spectrum(j, 0.0).unwrap(),
            if j == 0 { 0.0 } else { a * 2f64.sqrt() },
        );
    }

    let band = FrequencyBand::new(0.0, 32.0 * 2f64.sqrt());
    let (lo, hi) = frame_bounds(&bank, band, 2000);
    println!("frame bounds on [0, 32*sqrt2]: A = {lo:.4}, B = {hi:.4} (B/A = {:.2})", hi / lo);

    let grid = Grid2D::new(100);
    let sbank = SpatialFilterBank::new(&bank, grid);
    println!(
        "spatial bank on nx={}: {} degenerate frequency nodes of {} (eps_dual = {:.2e})",
        grid.nx(),
        sbank.degenerate_count(),
        grid.node_count(),
        sbank.eps_dual()
    );

    // the reproduction sum of the canonical duals is 1 inside the covered band
    let mut worst: f64 = 0.0;
    for k in 0..grid.nx() as i64 {
        let s: f64 = (0..sbank.scales())
            .map(|j| {
                sbank.spectrum_field(j).unwrap().get(k, 0).re
                    * sbank.dual_field(j).unwrap().get(k, 0).re
            })
            .sum();
        if sbank.phi_field().get(k, 0).re > sbank.eps_dual() {
            worst = worst.max((s - 1.0).abs());
        }
    }
    println!("max |sum_j U_j+ U_j - 1| along the k1 axis: {worst:.2e}");
}
