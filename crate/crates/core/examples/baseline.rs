//! The unitarily covariant baseline: canonical broadcaster and universal cloner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbroadcast::channels::{canonical_broadcaster, clone_fidelities, diamond_distance, universal_cloner, DiamondConfig};
use vbroadcast::choi::BlochVector;
use vbroadcast::constraints::verify_broadcast;
use vbroadcast::cost::base_norm_bounds;
use vbroadcast::linalg::c;

fn main() -> vbroadcast::Result<()> {
    let canonical = canonical_broadcaster()?;
    let universal = universal_cloner()?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states: Vec<BlochVector> = (0..100)
        .map(|_| {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
            BlochVector::new(v[0] / n, v[1] / n, v[2] / n).unwrap()
        })
        .collect();
    let report = verify_broadcast(&canonical, &states, 1e-12)?;
    println!("broadcasts 100 random states: max deviation {:.2e}", report.max_deviation);

    let bounds = base_norm_bounds(&canonical, 1e-10, 1e-9)?;
    println!("cost bracket [{:.12}, {:.12}]", bounds.lower, bounds.upper);

    let d = diamond_distance(&canonical, &universal, &DiamondConfig::default())?;
    println!("‖B − universal cloner‖◇ = {:.12} in [{:.12}, {:.12}]", d.value, d.lower_cert, d.upper_cert);

    for psi in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.6, 0.0), c(0.0, 0.8)]] {
        println!("universal cloner fidelities on {psi:?}: {:?}", clone_fidelities(&universal, &psi)?);
    }
    Ok(())
}
