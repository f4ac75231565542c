use opsys_toolkit::cpmaps::CPMap;
use opsys_toolkit::haar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opsys_toolkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tau = CPMap::random_ucp(3, 3, 2, &mut rng);
    for c in [0.3, 0.7, 0.95] {
        let phi = haar::invariant_state_series(&tau, c, 1e-13)?;
        let rho = phi.density_matrix()?;
        let drift = haar::tau_c(&tau, c)?.dual_apply(&rho)?.dist(&rho);
        println!(
            "c = {c:<4}  terms = {:<4}  ‖φ∘τ_c − φ‖ = {drift:.1e}  λ_min(ρ) = {:.4}",
            haar::series_terms(c, 1e-13),
            phi.min_density_eigenvalue()?
        );
    }
    Ok(())
}
