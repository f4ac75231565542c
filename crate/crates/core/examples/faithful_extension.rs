use opsys_toolkit::cpmaps::{self, CPMap};
use opsys_toolkit::extend;
use opsys_toolkit::opsys::OperatorSystem;
use opsys_toolkit::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opsys_toolkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = OperatorSystem::new(vec![CMatrix::unit(3, 0, 1), CMatrix::unit(3, 1, 2)], 3)?;
    let tau = CPMap::random_ucp(3, 2, 3, &mut rng).restrict(&s)?;
    println!("dim S = {}, faithful margin on S = {:.4}", s.dim(), extend::system_faithfulness_margin(&tau)?);

    let fe = extend::faithful_extension(&tau)?;
    println!("η agrees with τ on S up to {:.2e}", fe.agreement_residual);
    println!("λ_min(tr₂ C_η) = {:.4}", fe.margin);
    println!("η unital residual {:.2e}", fe.eta.unital_residual()?);
    println!("η faithful: {}", cpmaps::is_faithful(&fe.eta)?);
    Ok(())
}
