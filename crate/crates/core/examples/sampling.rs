//! Copy counts and Monte-Carlo failure rates for simulating the optimal
//! broadcaster versus measuring input copies directly.

use vbroadcast::channels::optimal_virtual_broadcaster;
use vbroadcast::choi::EquatorialState;
use vbroadcast::sampler::{
    empirical_failure_rate, hoeffding_copies, inflated_shots, sample_cost_report, Observable, Scenario, ShotPlan,
    Strategy,
};

fn main() -> vbroadcast::Result<()> {
    let (eps, delta, c) = (0.05, 0.05, 2.0);
    let strategy = Strategy::virtual_map(optimal_virtual_broadcaster())?;
    let Strategy::Virtual { split, .. } = strategy.clone() else { unreachable!() };

    let report = sample_cost_report(&ShotPlan::symmetric(eps, delta, c)?, &split)?;
    println!(
        "n1 = n2 = {}, virtual {:.1} vs direct {} copies, ratio {:.6}",
        report.n1, report.virtual_copies, report.direct_copies, report.ratio
    );

    let n = hoeffding_copies(eps, delta, c)?;
    let run = |label: &str, strategy: Strategy, rho: EquatorialState, shots: u64| -> vbroadcast::Result<()> {
        let scenario = Scenario {
            strategy,
            rho,
            observable: Observable::pauli_x(),
            epsilon: eps,
            shots,
        };
        let r = empirical_failure_rate(&scenario, 500, 7)?;
        println!(
            "{label:<28} shots {shots:>5}: failure rate {:.3} (δ = {delta}), mean {:+.4} vs exact {:+.4}",
            r.rate, r.mean_estimate, r.exact
        );
        Ok(())
    };

    let plus = EquatorialState::plus();
    run("virtual, (a+b)² inflated", strategy.clone(), plus, inflated_shots(split.cost(), n))?;
    run("direct", Strategy::Direct, plus, n)?;

    // On the maximally mixed input σ_x has full variance; without the (a+b)²
    // factor the virtual estimate misses ε far more often than δ.
    let mixed = EquatorialState::maximally_mixed();
    run("virtual, uninflated, mixed", strategy.clone(), mixed, n)?;
    run("virtual, inflated, mixed", strategy, mixed, inflated_shots(split.cost(), n))?;
    run("direct, mixed", Strategy::Direct, mixed, n)?;
    Ok(())
}
