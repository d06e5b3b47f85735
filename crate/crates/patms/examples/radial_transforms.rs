//! The two routes to the spatial filters and the Radon loop closure.
//!
//! Route one evaluates the inverse-Radon expressions pointwise (closed form
//! in 3D, Abel quadrature in 2D). Route two is the Fourier-slice identity
//! used in production. Applying the forward radial Radon transform to either
//! profile must return the temporal filter.
//!
//! ```text
//! cargo run --example radial_transforms
//! ```

use patms::filters::{radial_radon_oracle, radon_dual_filter_analytic, Dim, TemporalFilterBank};

fn main() {
    let bank = TemporalFilterBank::standard();
    let tail = 10.0 / bank.base_scale();

    println!("radial profiles u_j(r) by Abel quadrature (2D):");
    for j in 0..bank.scales() {
        let vals: Vec<String> = [0.0, 0.02, 0.05, 0.1]
            .iter()
            .map(|&r| format!("{:9.3}", radon_dual_filter_analytic(&bank, j, Dim::Two, r).unwrap()))
            .collect();
        println!("  u_{j}(r) at r=0,0.02,0.05,0.1: {}", vals.join(" "));
    }

    println!("\nloop closure R(R# v_j)(t) vs v_j(t):");
    for j in 0..bank.scales() {
        for &t in &[0.0, 0.05, 0.1] {
            let v = bank.eval(j, t).unwrap();
            let u2 = |s: f64| radon_dual_filter_analytic(&bank, j, Dim::Two, s).unwrap();
            let r2 = radial_radon_oracle(&u2, Dim::Two, t, tail).unwrap();
            let u3 = |s: f64| radon_dual_filter_analytic(&bank, j, Dim::Three, s).unwrap();
            let r3 = radial_radon_oracle(&u3, Dim::Three, t, tail).unwrap();
            println!(
                "  j={j} t={t:4}: v={v:9.4}  2D dev {:.2e}  3D dev {:.2e}",
                (r2 - v).abs() / v.abs(),
                (r3 - v).abs() / v.abs()
            );
        }
    }
}
