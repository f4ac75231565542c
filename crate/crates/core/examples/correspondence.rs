//! A UCP map τ: M_2 → M_3 and its functional s on M_3(M_2), back and forth.

use opsys_toolkit::cpmaps::{self, CPMap, StateWeights};
use opsys_toolkit::{CMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opsys_toolkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tau = CPMap::random_ucp(2, 3, 2, &mut rng);

    let s = cpmaps::functional_from_cpmap(&tau, 3)?;
    let back = cpmaps::cpmap_from_functional(&s)?;
    let err = back
        .basis_images()
        .iter()
        .zip(tau.basis_images())
        .map(|(a, b)| a.dist(b))
        .fold(0.0, f64::max);
    println!("τ → s → τ residual      {err:.2e}");
    println!("min eigenvalue of ρ_s   {:.4}", s.min_density_eigenvalue()?);

    // s(x ⊗ I) = tr₀(τ(x)).
    let x = CMatrix::from_real(&[&[0.7, 0.2], &[0.2, 0.3]]);
    let lhs = s.evaluate_diagonal(&x)?;
    let rhs = tau.apply(&x)?.trace() / 3.0;
    println!("s(x⊗I) = {:.6}, tr₀τ(x) = {:.6}", lhs.re, rhs.re);

    let w = StateWeights::new(vec![C64::new(0.8, 0.0), C64::new(0.0, 0.36), C64::new(0.48, 0.0)])?;
    let sw = cpmaps::weighted_functional(&tau, &w)?;
    let phi0 = w.phi0_density().trace_product(&tau.apply(&x)?);
    println!("weighted: {:.6} vs φ₀(τ(x)) = {:.6}", sw.evaluate_diagonal(&x)?.re, phi0.re);
    Ok(())
}
