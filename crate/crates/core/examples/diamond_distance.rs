//! Diamond distances from the optimal broadcaster, with certificates, and a
//! small random local-optimality probe around the cloner.

use vbroadcast::channels::{
    cloner_local_optimality, diamond_distance, optimal_virtual_broadcaster, phase_covariant_cloner, DiamondConfig,
    LocalOptimalityConfig,
};

fn main() -> vbroadcast::Result<()> {
    let b = optimal_virtual_broadcaster();
    let e = phase_covariant_cloner();
    let d = diamond_distance(&b, &e, &DiamondConfig::default())?;
    println!("‖B − cloner‖◇ = {:.12}", d.value);
    println!("  bracket [{:.12}, {:.12}], certified {}", d.lower_cert, d.upper_cert, d.certified);

    let probe = cloner_local_optimality(&LocalOptimalityConfig {
        samples: 30,
        ..Default::default()
    })?;
    println!(
        "{} random CPTP perturbations: closest {:.9} (weight {}), below 2/3: {}",
        probe.samples, probe.min_distance, probe.min_weight, probe.below_threshold
    );
    Ok(())
}
