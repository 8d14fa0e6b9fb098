//! Measures how the k-dilation of the rectangle construction scales with
//! the slab parameter, and compares the fitted slope to the predicted
//! exponent. Run with `--release`; the default budget takes a few seconds
//! per k.

use std::sync::Arc;

use kdilation::dilation::{scaling_sweep, SweepConfig};
use kdilation::expr::{degree_one_cube_map, hopf_cube_map};

fn main() {
    for k in [3u32, 2, 4] {
        let t0 = std::time::Instant::now();
        let cfg = SweepConfig {
            m: 3,
            n: 2,
            p: 1,
            k,
            eps_grid: vec![0.5, 0.25, 0.125, 0.0625],
            budget: 20_000,
            seed: 0,
        };
        let r = scaling_sweep(
            Arc::new(hopf_cube_map()),
            Arc::new(degree_one_cube_map(1)),
            cfg,
        )
        .expect("sweep");
        let slope = r
            .slope
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "undefined (all estimates zero)".into());
        println!(
            "k={k}: predicted exponent {}, fitted slope {slope}  [{:.1?}]",
            r.predicted_exponent_float,
            t0.elapsed()
        );
        for row in &r.rows {
            println!("   eps={:<7} estimate={:.6e}", row.eps, row.estimate);
        }
    }
}
