//! Twirling arbitrary Hermitian operators onto the symmetric family, then
//! imposing classical consistency.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vbroadcast::choi::ChoiOperator;
use vbroadcast::constraints::{apply_classic, verify_classic};
use vbroadcast::linalg::random_hermitian;
use vbroadcast::symmetry::{extract_params, family_to_choi, invariant_basis, symmetric_twirl};

fn main() -> vbroadcast::Result<()> {
    let basis = invariant_basis(symmetric_twirl);
    println!("invariant subspace dimension: {}", basis.len());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..3 {
        let c = ChoiOperator::new(random_hermitian(8, &mut rng), 2, vec![2, 2])?;
        let p = extract_params(&symmetric_twirl(&c), 1e-12)?;
        let q = apply_classic(&p);
        println!("sample {k}");
        println!("  twirled: {p:?}");
        println!("  classic: {q:?}");
        println!(
            "  CLASSIC holds: {}, still Hermitian: {} (needs Re c2 = 1/2)",
            verify_classic(&family_to_choi(&q), 1e-10),
            q.is_hermitian(1e-12)
        );
    }
    Ok(())
}
