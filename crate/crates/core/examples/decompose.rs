//! Positive/negative split of the optimal broadcaster and its cost certificate.

use vbroadcast::channels::{optimal_virtual_broadcaster, phase_covariant_cloner};
use vbroadcast::cost::{base_norm_bounds, pos_neg_split};
use vbroadcast::linalg::eigenvalues;

fn main() -> vbroadcast::Result<()> {
    let b = optimal_virtual_broadcaster();
    println!("spectrum of C: {:?}", eigenvalues(b.matrix()));

    let split = pos_neg_split(&b, 1e-10)?;
    println!("a = {:.12}, b = {:.12}, a + b = {:.12}", split.a, split.b, split.cost());
    let e_plus = split.e_plus.as_ref().expect("positive part");
    let e_minus = split.e_minus.as_ref().expect("negative part");
    println!("E+ CPTP: {}, E- CPTP: {}", e_plus.is_cptp(1e-10), e_minus.is_cptp(1e-10));
    println!("3·E+ =\n{:?}", e_plus.matrix().scale_real(3.0));
    println!("6·E- =\n{:?}", e_minus.matrix().scale_real(6.0));
    println!(
        "E+ vs phase-covariant cloner: {:.2e}",
        e_plus.matrix().max_abs_diff(phase_covariant_cloner().matrix())
    );

    let bounds = base_norm_bounds(&b, 1e-10, 1e-9)?;
    println!("cost bracket [{:.15}, {:.15}], certified {}", bounds.lower, bounds.upper, bounds.certified);
    Ok(())
}
