//! Matching norm invariants and finding an implementing unitary.

use opsys_toolkit::haar::haar_unitary;
use opsys_toolkit::iso;
use opsys_toolkit::{CMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opsys_toolkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.2));
    let w = haar_unitary(3, &mut rng);
    let y = &(&w * &x) * &w.adjoint();

    let (ks, ls) = iso::default_grid(&x, 3);
    println!("invariants match: {}", iso::invariants_match(&x, &y, &ks, &ls, 1e-9));
    let found = iso::find_implementing_unitary(&x, &y, 1e-10, 16, 0)?;
    println!("{:?} after {} restarts, residual {:.2e}", found.method, found.restarts_used, found.residual);

    let z = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
    if let Some((k, l, a, b)) = iso::first_mismatch(&z, &CMatrix::identity(3), &ks, &ls, 1e-9) {
        println!("diag(1,0,0) vs I differ at k = {k}, λ = {l}: {a:.3} vs {b:.3}");
    }

    let rep = iso::unitarity_certificate(&CMatrix::diag_real(&[1.0, 0.5]), 1e-10);
    println!("diag(1, 1/2): unitary = {}, x_k(0) = {:?}", rep.is_unitary, rep.norms);
    Ok(())
}
