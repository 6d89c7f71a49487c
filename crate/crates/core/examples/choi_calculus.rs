//! Building maps from Choi operators: application, composition, marginals and
//! broadcast checks on the equator.

use vbroadcast::channels::optimal_virtual_broadcaster;
use vbroadcast::choi::{classical_broadcaster, decohere, EquatorialState, QubitBasis};
use vbroadcast::constraints::{decohered_map, equatorial_grid, verify_broadcast};
use vbroadcast::linalg::trace_norm;

fn main() -> vbroadcast::Result<()> {
    let b = optimal_virtual_broadcaster();
    let rho = EquatorialState::new(0.8, 0.3)?.density();
    let out = b.apply(&rho)?;
    println!("B(ρ) has trace {:.12} and trace norm {:.12}", out.trace().re, trace_norm(&out));
    println!(
        "marginal deviations: {:.2e}, {:.2e}",
        b.marginal(&rho, 1)?.max_abs_diff(&rho),
        b.marginal(&rho, 2)?.max_abs_diff(&rho)
    );

    let pm = QubitBasis::plus_minus();
    let dec = decohered_map(&b, &pm)?;
    println!(
        "(D⊗D)∘B∘D vs classical copier in the ± basis: {:.2e}",
        dec.matrix().max_abs_diff(classical_broadcaster(&pm).matrix())
    );
    println!("D∘D = D: {}", decohere(&pm).after(&decohere(&pm))?.matrix().max_abs_diff(decohere(&pm).matrix()) < 1e-14);

    let report = verify_broadcast(&b, &equatorial_grid(10, 10), 1e-12)?;
    println!("equatorial grid: max deviation {:.2e}, pass {}", report.max_deviation, report.pass);
    Ok(())
}
