//! Trace-norm minimization over the constrained family with a grid certificate.

use vbroadcast::cost::{minimize, MinimizeConfig};

fn main() {
    let report = minimize(&MinimizeConfig::default());
    let [c1, c4, t] = report.argmin.as_array();
    println!("min ‖C‖₁      = {:.15} (10/3 = {:.15})", report.value, 10.0 / 3.0);
    println!("argmin        = c1 {c1:.10}, c4 {c4:.10}, t {t:.3e}");
    println!("evaluations   = {}", report.evaluations);
    let g = &report.grid_certificate;
    println!(
        "grid {}³: best node {:?} at {:.12}, nearest to argmin: {}, no better node: {}",
        g.points_per_axis,
        g.best_node.as_array(),
        g.best_value,
        g.best_is_nearest,
        g.no_better_node
    );
    println!(
        "descent from best node ends at {:?}; same basin: {}",
        g.best_node_descent.as_array(),
        g.same_basin
    );
}
